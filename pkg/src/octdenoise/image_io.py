"""Grayscale image file I/O.

Supported formats, selected by file extension:

* ``.pgm``: binary (P5) and ASCII (P2) portable graymaps, 8- or 16-bit.
  Loaded values are normalized by the header maxval to [0, 1]; saving
  quantizes with round-half-up (16-bit by default).
* ``.png``: 8- or 16-bit grayscale PNG via Pillow, same normalization.
* ``.raw`` / ``.f32``: little-endian float32 pixels, row-major, no
  header. Dimensions live in a text sidecar ``<file>.dims`` containing
  ``width height``. This path is lossless for float32 data.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image as PILImage
from PIL import UnidentifiedImageError

from .errors import DataIOError, InvalidInputError
from .image_core import Image2D

RAW_SUFFIXES = (".raw", ".f32")


def load_image(path: str | Path) -> Image2D:
    """Load a grayscale image; integer formats come back scaled to [0, 1]."""
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".pgm":
        return _load_pgm(path)
    if suffix == ".png":
        return _load_png(path)
    if suffix in RAW_SUFFIXES:
        return _load_raw(path)
    raise DataIOError(f"unsupported image format {suffix!r} for {path}")


def save_image(path: str | Path, image: Image2D, bit_depth: int | None = None) -> None:
    """Write an image, choosing the format from the file extension.

    ``bit_depth`` (8 or 16) applies to PGM and PNG output; PGM defaults
    to 16 bits, PNG to 8. Raw output ignores it.
    """
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".pgm":
        _save_pgm(path, image, bit_depth or 16)
    elif suffix == ".png":
        _save_png(path, image, bit_depth or 8)
    elif suffix in RAW_SUFFIXES:
        _save_raw(path, image)
    else:
        raise DataIOError(f"unsupported image format {suffix!r} for {path}")


def _quantize(data: np.ndarray, maxval: int) -> np.ndarray:
    # round-half-up, then clamp into the representable range
    return np.clip(np.floor(data * maxval + 0.5), 0, maxval)


# --- PGM ---------------------------------------------------------------


def _load_pgm(path: Path) -> Image2D:
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise DataIOError(f"cannot read {path}: {exc}") from exc

    # header tokens are whitespace-separated; '#' starts a comment
    pos = 0
    tokens: list[bytes] = []
    while len(tokens) < 4:
        if pos >= len(raw):
            raise DataIOError(f"{path}: truncated PGM header")
        ch = raw[pos : pos + 1]
        if ch == b"#":
            while pos < len(raw) and raw[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif ch.isspace():
            pos += 1
        else:
            start = pos
            while pos < len(raw) and not raw[pos : pos + 1].isspace() and raw[pos : pos + 1] != b"#":
                pos += 1
            tokens.append(raw[start:pos])

    magic = tokens[0]
    if magic not in (b"P5", b"P2"):
        raise DataIOError(f"{path}: not a PGM file (magic {magic!r})")
    try:
        width, height, maxval = (int(t) for t in tokens[1:4])
    except ValueError as exc:
        raise DataIOError(f"{path}: malformed PGM header") from exc
    if width < 1 or height < 1 or not (0 < maxval < 65536):
        raise DataIOError(f"{path}: invalid PGM dimensions or maxval")

    if magic == b"P5":
        pos += 1  # single whitespace byte separates header and raster
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        expected = width * height * dtype.itemsize
        body = raw[pos : pos + expected]
        if len(body) != expected:
            raise DataIOError(f"{path}: truncated PGM raster")
        values = np.frombuffer(body, dtype=dtype).astype(np.float64)
    else:
        try:
            values = np.array([int(t) for t in raw[pos:].split()], dtype=np.float64)
        except ValueError as exc:
            raise DataIOError(f"{path}: malformed ASCII PGM raster") from exc
        if values.size != width * height:
            raise DataIOError(
                f"{path}: expected {width * height} samples, found {values.size}"
            )
    if values.size and values.max() > maxval:
        raise DataIOError(f"{path}: sample exceeds declared maxval")
    return Image2D((values / maxval).reshape(height, width))


def _save_pgm(path: Path, image: Image2D, bit_depth: int) -> None:
    if bit_depth not in (8, 16):
        raise InvalidInputError("PGM bit depth must be 8 or 16")
    maxval = (1 << bit_depth) - 1
    quantized = _quantize(image.data, maxval)
    dtype = np.dtype(">u2") if bit_depth == 16 else np.dtype("u1")
    header = f"P5\n{image.width} {image.height}\n{maxval}\n".encode("ascii")
    path.write_bytes(header + quantized.astype(dtype).tobytes())


# --- PNG ---------------------------------------------------------------


def _load_png(path: Path) -> Image2D:
    try:
        with PILImage.open(path) as im:
            mode = im.mode
            if mode == "L":
                scale = 255.0
            elif mode in ("I;16", "I;16B", "I"):
                scale = 65535.0
            else:
                raise DataIOError(f"{path}: PNG must be grayscale, got mode {mode!r}")
            arr = np.asarray(im, dtype=np.float64)
    except FileNotFoundError as exc:
        raise DataIOError(f"cannot read {path}: {exc}") from exc
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise DataIOError(f"{path}: not a readable PNG: {exc}") from exc
    return Image2D(arr / scale)


def _save_png(path: Path, image: Image2D, bit_depth: int) -> None:
    if bit_depth == 8:
        out = PILImage.fromarray(_quantize(image.data, 255).astype(np.uint8), mode="L")
    elif bit_depth == 16:
        out = PILImage.fromarray(_quantize(image.data, 65535).astype("<u2"), mode="I;16")
    else:
        raise InvalidInputError("PNG bit depth must be 8 or 16")
    out.save(path)


# --- raw float32 -------------------------------------------------------


def _dims_path(path: Path) -> Path:
    return path.with_name(path.name + ".dims")


def _load_raw(path: Path) -> Image2D:
    dims_path = _dims_path(path)
    try:
        parts = dims_path.read_text().split()
    except OSError as exc:
        raise DataIOError(f"cannot read dims sidecar {dims_path}: {exc}") from exc
    if len(parts) != 2:
        raise DataIOError(f"{dims_path}: expected 'width height'")
    try:
        width, height = int(parts[0]), int(parts[1])
    except ValueError as exc:
        raise DataIOError(f"{dims_path}: non-integer dimensions") from exc
    if width < 1 or height < 1:
        raise DataIOError(f"{dims_path}: invalid dimensions {width}x{height}")
    try:
        values = np.fromfile(path, dtype="<f4")
    except OSError as exc:
        raise DataIOError(f"cannot read {path}: {exc}") from exc
    if values.size != width * height:
        raise DataIOError(
            f"{path}: expected {width * height} float32 samples, found {values.size}"
        )
    return Image2D(values.astype(np.float64).reshape(height, width))


def _save_raw(path: Path, image: Image2D) -> None:
    path.write_bytes(image.data.astype("<f4").tobytes())
    _dims_path(path).write_text(f"{image.width} {image.height}\n")
