"""Integer-shift frame registration by normalized cross-correlation.

Every non-central frame is aligned to the central one: the shift within
the search window that maximizes the zero-mean normalized correlation
over the overlapping region wins, ties going to the smallest
displacement. Shifted-out borders are filled by replicating edge values.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidInputError, RegistrationError
from .image_core import BScanStack, Image2D

DEFAULT_SEARCH = 16


def apply_shift(image: Image2D, dy: int, dx: int) -> Image2D:
    """Translate content by (dy, dx) with replicate fill: out[y, x] = in[y - dy, x - dx]."""
    h, w = image.shape
    rows = np.clip(np.arange(h) - int(dy), 0, h - 1)
    cols = np.clip(np.arange(w) - int(dx), 0, w - 1)
    return Image2D(image.data[np.ix_(rows, cols)])


def _candidates(search: int) -> list[tuple[int, int]]:
    shifts = [
        (dy, dx)
        for dy in range(-search, search + 1)
        for dx in range(-search, search + 1)
    ]
    # small displacements first, so exact ties resolve toward no motion
    shifts.sort(key=lambda s: (abs(s[0]) + abs(s[1]), s[0], s[1]))
    return shifts


def estimate_shift(
    moving: Image2D, reference: Image2D, search: int = DEFAULT_SEARCH
) -> tuple[int, int]:
    """Best (dy, dx) within +-search aligning ``moving`` onto ``reference``."""
    if moving.shape != reference.shape:
        raise InvalidInputError(
            f"frame shapes differ: {moving.shape} vs {reference.shape}"
        )
    if search < 0:
        raise InvalidInputError("search radius must be nonnegative")
    if float(moving.data.std()) == 0.0 or float(reference.data.std()) == 0.0:
        raise RegistrationError("cannot register a constant frame")

    h, w = reference.shape
    best_shift: tuple[int, int] | None = None
    best_score = -np.inf
    for dy, dx in _candidates(search):
        y0, y1 = max(0, dy), h + min(0, dy)
        x0, x1 = max(0, dx), w + min(0, dx)
        if y1 - y0 < 2 or x1 - x0 < 2:
            continue
        a = moving.data[y0 - dy : y1 - dy, x0 - dx : x1 - dx]
        b = reference.data[y0:y1, x0:x1]
        am = a - a.mean()
        bm = b - b.mean()
        denom = np.sqrt(float((am * am).sum()) * float((bm * bm).sum()))
        if denom == 0.0:
            continue
        score = float((am * bm).sum()) / denom
        if score > best_score:
            best_score = score
            best_shift = (dy, dx)
    if best_shift is None:
        raise RegistrationError("no valid shift candidate in the search window")
    return best_shift


def register_stack(
    stack: BScanStack, search: int = DEFAULT_SEARCH
) -> tuple[BScanStack, list[tuple[int, int]]]:
    """Align all frames to the central one; single-frame stacks pass through.

    Returns the registered stack plus the applied (dy, dx) per frame.
    """
    if stack.k == 1:
        return stack, [(0, 0)]
    center = stack.k // 2
    reference = stack.frames[center]
    if float(reference.data.std()) == 0.0:
        raise RegistrationError(f"frame {center} (reference) is constant")
    frames: list[Image2D] = []
    shifts: list[tuple[int, int]] = []
    for index, frame in enumerate(stack.frames):
        if index == center:
            frames.append(frame)
            shifts.append((0, 0))
            continue
        if float(frame.data.std()) == 0.0:
            raise RegistrationError(f"frame {index} is constant")
        dy, dx = estimate_shift(frame, reference, search)
        frames.append(apply_shift(frame, dy, dx))
        shifts.append((dy, dx))
    return BScanStack(tuple(frames), stack.domain), shifts
