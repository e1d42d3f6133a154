"""Reading and writing HDR images as PFM.

The format is three ASCII header lines (type, dimensions, scale) followed
by raw 32-bit floats.  A negative scale marks little-endian data, which is
what the writer always emits; positive-scale (big-endian) files are byte
swapped on read.  Rows are stored bottom-up.  Non-finite pixels are a
hard error in both directions: an HDR exchange file with NaNs in it is
corrupt, not "mostly fine".
"""

from __future__ import annotations

import numpy as np

from .fileio import atomic_write_bytes

_COLOR_MAGIC = b"PF"
_GRAY_MAGIC = b"Pf"


def write_pfm(path, image: np.ndarray) -> None:
    """Write an (H, W, 3) color or (H, W) grayscale float image."""
    img = np.asarray(image)
    if img.ndim == 3 and img.shape[2] == 3:
        magic = _COLOR_MAGIC
    elif img.ndim == 2:
        magic = _GRAY_MAGIC
    else:
        raise ValueError("image must be HxWx3 or HxW")
    if not np.all(np.isfinite(img)):
        raise ValueError("refusing to write non-finite pixel values")
    h, w = img.shape[:2]
    header = magic + b"\n" + f"{w} {h}\n".encode("ascii") + b"-1.0\n"
    payload = np.flipud(img).astype("<f4").tobytes()
    atomic_write_bytes(path, header + payload)


def read_pfm(path) -> np.ndarray:
    """Read a PFM file to float32, (H, W, 3) for color or (H, W) for gray."""
    with open(path, "rb") as handle:
        magic = handle.readline().strip()
        if magic == _COLOR_MAGIC:
            channels = 3
        elif magic == _GRAY_MAGIC:
            channels = 1
        else:
            raise ValueError(f"not a PFM file: magic {magic!r}")
        dims = handle.readline().split()
        if len(dims) != 2:
            raise ValueError("malformed PFM dimension line")
        w, h = int(dims[0]), int(dims[1])
        if w < 1 or h < 1:
            raise ValueError("PFM dimensions must be positive")
        scale = float(handle.readline().strip())
        if scale == 0.0:
            raise ValueError("PFM scale must be non-zero")
        dtype = "<f4" if scale < 0 else ">f4"
        count = w * h * channels
        raw = handle.read(count * 4)
    if len(raw) != count * 4:
        raise ValueError("PFM payload truncated")
    data = np.frombuffer(raw, dtype=dtype).astype(np.float32)
    if not np.all(np.isfinite(data)):
        raise ValueError("PFM payload contains non-finite values")
    if abs(scale) != 1.0:
        data = (data * np.float32(abs(scale))).astype(np.float32)
    shape = (h, w, 3) if channels == 3 else (h, w)
    return np.flipud(data.reshape(shape)).copy()
