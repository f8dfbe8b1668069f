"""Image containers, linear/log domain transforms, and synthetic speckle phantoms.

Images are grayscale, stored row-major as float64 arrays of shape
(height, width). Linear-domain intensities are expected in [0, 1] (file
loaders normalize integer formats accordingly). The log domain is the
solver's working representation: multiplicative speckle becomes additive
there, so a stack is floored and mapped through the natural logarithm
before denoising and mapped back with exp afterwards.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import InvalidInputError, NumericRangeError

#: Default clamp applied before taking logs, so zero-valued background
#: pixels stay finite. Chosen for images normalized to [0, 1].
DEFAULT_INTENSITY_FLOOR = 1e-6


class Domain(Enum):
    """Intensity domain of a frame stack."""

    LINEAR = "linear"
    LOG = "log"


@dataclass(frozen=True)
class Image2D:
    """A single grayscale frame, immutable after construction.

    The wrapped array is copied and marked read-only, so instances can be
    shared freely across threads.
    """

    data: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.data, dtype=np.float64)
        if arr.ndim != 2 or arr.size == 0:
            raise InvalidInputError(
                f"image data must be a non-empty 2-D array, got shape {arr.shape}"
            )
        if not np.isfinite(arr).all():
            raise InvalidInputError("image contains non-finite pixels")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    @property
    def n_pixels(self) -> int:
        return self.data.size


@dataclass(frozen=True)
class BScanStack:
    """K same-size frames captured at one location, ordered as acquired."""

    frames: tuple[Image2D, ...]
    domain: Domain

    def __post_init__(self) -> None:
        frames = tuple(self.frames)
        if not frames:
            raise InvalidInputError("a stack needs at least one frame")
        if not isinstance(self.domain, Domain):
            raise InvalidInputError(f"unknown intensity domain: {self.domain!r}")
        shape = frames[0].shape
        for index, frame in enumerate(frames):
            if frame.shape != shape:
                raise InvalidInputError(
                    f"frame {index} has shape {frame.shape}, expected {shape}"
                )
        object.__setattr__(self, "frames", frames)

    @property
    def k(self) -> int:
        return len(self.frames)

    @property
    def shape(self) -> tuple[int, int]:
        return self.frames[0].shape

    def as_array(self) -> np.ndarray:
        """Stack the frames into a writable (K, height, width) array."""
        return np.stack([frame.data for frame in self.frames])


def log_image(image: Image2D, floor: float = DEFAULT_INTENSITY_FLOOR) -> Image2D:
    """Map a linear-domain frame to log intensities, clamping at ``floor``."""
    if not (np.isfinite(floor) and floor > 0):
        raise InvalidInputError("floor must be a positive finite number")
    return Image2D(np.log(np.maximum(image.data, floor)))


def exp_image(image: Image2D) -> Image2D:
    """Map a log-domain frame back to linear intensities."""
    out = np.exp(image.data)
    if not np.isfinite(out).all():
        raise NumericRangeError("exp overflowed while leaving the log domain")
    return Image2D(out)


def to_log(stack: BScanStack, floor: float = DEFAULT_INTENSITY_FLOOR) -> BScanStack:
    """Transform a linear-domain stack into the log domain.

    Every pixel is mapped x -> ln(max(x, floor)); the floor keeps
    zero-valued background pixels finite.
    """
    if stack.domain is not Domain.LINEAR:
        raise InvalidInputError("to_log expects a linear-domain stack")
    return BScanStack(tuple(log_image(f, floor) for f in stack.frames), Domain.LOG)


def from_log(stack: BScanStack) -> BScanStack:
    """Inverse of :func:`to_log` (exact up to the floor clamp)."""
    if stack.domain is not Domain.LOG:
        raise InvalidInputError("from_log expects a log-domain stack")
    return BScanStack(tuple(exp_image(f) for f in stack.frames), Domain.LINEAR)


@dataclass(frozen=True)
class PhantomSpec:
    """Layered test phantom: horizontal bands of constant intensity.

    ``boundaries`` are the row indices where a new band starts, so
    ``len(intensities) == len(boundaries) + 1``. ``looks`` controls the
    speckle severity: each noisy frame is the clean image times i.i.d.
    Gamma(looks, 1/looks) factors (unit mean, variance 1/looks).
    """

    width: int
    height: int
    intensities: tuple[float, ...]
    boundaries: tuple[int, ...] = field(default_factory=tuple)
    looks: int = 4
    seed: int = 0

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise InvalidInputError("phantom dimensions must be positive")
        if int(self.looks) < 1:
            raise InvalidInputError("looks must be a positive integer")
        boundaries = tuple(int(b) for b in self.boundaries)
        intensities = tuple(float(v) for v in self.intensities)
        if len(intensities) != len(boundaries) + 1:
            raise InvalidInputError(
                "need exactly one intensity per band: "
                f"{len(boundaries)} boundaries require {len(boundaries) + 1} intensities"
            )
        if any(b1 >= b2 for b1, b2 in zip(boundaries, boundaries[1:])):
            raise InvalidInputError("boundaries must be strictly increasing")
        if boundaries and (boundaries[0] <= 0 or boundaries[-1] >= self.height):
            raise InvalidInputError("boundaries must lie strictly inside the image")
        if any(not (0.0 < v <= 1.0) for v in intensities):
            raise InvalidInputError("intensities must lie in (0, 1]")
        object.__setattr__(self, "boundaries", boundaries)
        object.__setattr__(self, "intensities", intensities)
        object.__setattr__(self, "looks", int(self.looks))
        object.__setattr__(self, "seed", int(self.seed))


def generate_phantom(spec: PhantomSpec, k: int) -> tuple[Image2D, BScanStack]:
    """Build the clean layered image plus K speckled frames of it.

    Deterministic for a fixed spec (same seed gives bit-identical stacks).
    """
    if k < 1:
        raise InvalidInputError("k must be >= 1")
    clean = np.empty((spec.height, spec.width), dtype=np.float64)
    edges = (0, *spec.boundaries, spec.height)
    for row0, row1, value in zip(edges[:-1], edges[1:], spec.intensities):
        clean[row0:row1, :] = value
    rng = np.random.default_rng(spec.seed)
    speckle = rng.gamma(
        shape=spec.looks, scale=1.0 / spec.looks, size=(k, spec.height, spec.width)
    )
    frames = tuple(Image2D(clean * speckle[i]) for i in range(k))
    return Image2D(clean), BScanStack(frames, Domain.LINEAR)
