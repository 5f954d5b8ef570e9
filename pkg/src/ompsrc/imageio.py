"""Grayscale raster reading and writing.

Rasters are float64 arrays of shape (height, width) scaled to [0, 1].
Binary PGM (P5) is decoded here directly; other formats go through
Pillow when it is installed.
"""

from pathlib import Path

import numpy as np

from .errors import ImageFormatError

_WHITESPACE = b" \t\r\n\v\f"


def _read_pgm_header(data, path):
    """Parse the P5 header; return (width, height, maxval, data offset)."""
    if data[:2] != b"P5":
        raise ImageFormatError(f"{path}: not a binary PGM (magic {data[:2]!r}, expected b'P5')")
    pos = 2
    fields = []
    while len(fields) < 3:
        if pos >= len(data):
            raise ImageFormatError(f"{path}: header ended after {len(fields)} of 3 fields")
        c = data[pos:pos + 1]
        if c in _WHITESPACE:
            pos += 1
        elif c == b"#":
            end = data.find(b"\n", pos)
            pos = len(data) if end < 0 else end + 1
        else:
            start = pos
            while pos < len(data) and data[pos:pos + 1] not in _WHITESPACE and data[pos:pos + 1] != b"#":
                pos += 1
            token = data[start:pos]
            if not token.isdigit():
                raise ImageFormatError(f"{path}: header field {token!r} at byte {start} is not a number")
            fields.append(int(token))
    if pos >= len(data) or data[pos:pos + 1] not in _WHITESPACE:
        raise ImageFormatError(f"{path}: missing whitespace after maxval at byte {pos}")
    width, height, maxval = fields
    if width < 1 or height < 1:
        raise ImageFormatError(f"{path}: empty image {width}x{height}")
    if not 1 <= maxval <= 65535:
        raise ImageFormatError(f"{path}: maxval {maxval} outside 1..65535")
    return width, height, maxval, pos + 1


def read_pgm(path):
    data = Path(path).read_bytes()
    width, height, maxval, offset = _read_pgm_header(data, path)
    dtype = np.dtype(np.uint8) if maxval < 256 else np.dtype(">u2")
    need = width * height * dtype.itemsize
    have = len(data) - offset
    if have < need:
        raise ImageFormatError(
            f"{path}: pixel data truncated, {have} of {need} bytes present after offset {offset}")
    pixels = np.frombuffer(data, dtype=dtype, count=width * height, offset=offset)
    return pixels.reshape(height, width).astype(np.float64) / maxval


def write_pgm(path, image):
    """Write an image in [0, 1] as an 8-bit P5 PGM, rounding to nearest level."""
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 2 or image.size == 0:
        raise ImageFormatError(f"cannot write image of shape {image.shape}")
    levels = np.rint(np.clip(image, 0.0, 1.0) * 255).astype(np.uint8)
    height, width = levels.shape
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (width, height))
        fh.write(levels.tobytes())


def read_image(path):
    """Load any supported raster as a (height, width) float array in [0, 1]."""
    path = Path(path)
    with open(path, "rb") as fh:
        magic = fh.read(2)
    if path.suffix.lower() in (".pgm", ".pnm") or magic == b"P5":
        return read_pgm(path)
    try:
        from PIL import Image
    except ImportError as exc:
        raise ImageFormatError(f"{path}: only PGM is supported without Pillow") from exc
    try:
        with Image.open(path) as im:
            return np.asarray(im.convert("L"), dtype=np.float64) / 255.0
    except (OSError, ValueError) as exc:
        raise ImageFormatError(f"{path}: {exc}") from exc
