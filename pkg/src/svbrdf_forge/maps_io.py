"""Loading SVBRDF map stacks from LDR image files.

Color maps (diffuse, specular albedo) are stored display encoded and are
linearized with the pure 2.2 power curve; normal and roughness rasters
hold raw parameter values, so they are only rescaled to [0, 1].  Supports
8-bit RGB/RGBA/grayscale and 16-bit grayscale PNGs.
"""

from __future__ import annotations

import io
import os

import numpy as np
from PIL import Image

from .fileio import atomic_write_bytes
from .radiometry import DISPLAY_GAMMA
from .render import SvbrdfMaps

NORMAL_Z_FLOOR = 1e-3


def read_png_ldr(path, linearize: bool = True) -> np.ndarray:
    """Read an LDR image to float64 in [0, 1]; RGB maps come back as
    (H, W, 3), grayscale as (H, W).

    ``linearize`` applies value**2.2 (inverse display encoding) and is
    meant for color data only.
    """
    with Image.open(path) as img:
        mode = img.mode
        if mode == "RGBA":
            img = img.convert("RGB")
            mode = "RGB"
        arr = np.asarray(img)
    if mode == "RGB":
        scale = 255.0
    elif mode == "L":
        scale = 255.0
    elif mode in ("I;16", "I"):
        scale = 65535.0
    else:
        raise ValueError(f"unsupported image mode: {mode}")
    values = arr.astype(np.float64) / scale
    if np.any(values < 0) or np.any(values > 1):
        raise ValueError("pixel values fall outside the LDR range")
    if linearize:
        values = values**DISPLAY_GAMMA
    return values


def decode_normal_map(raw01: np.ndarray, strict: bool = True) -> np.ndarray:
    """Map [0,1] RGB to unit normals via n = 2v - 1, renormalized.

    strict mode rejects any decoded normal that points into or along the
    surface (z <= 0); lenient mode lifts such normals to a tiny positive
    z and renormalizes, accepting boundary-quality map data.
    """
    raw01 = np.asarray(raw01, dtype=np.float64)
    if raw01.ndim != 3 or raw01.shape[2] != 3:
        raise ValueError("normal map must be HxWx3")
    n = 2.0 * raw01 - 1.0
    norms = np.linalg.norm(n, axis=-1, keepdims=True)
    if np.any(norms < 1e-6):
        raise ValueError("normal map contains zero-length vectors")
    n = n / norms
    if np.any(n[..., 2] <= 0.0):
        if strict:
            raise ValueError("normal map has entries with z <= 0")
        n[..., 2] = np.maximum(n[..., 2], NORMAL_Z_FLOOR)
        n = n / np.linalg.norm(n, axis=-1, keepdims=True)
    return n


def load_svbrdf_map_files(diffuse_path, specular_path, normal_path,
                          roughness_path, strict: bool = True) -> SvbrdfMaps:
    """Assemble an SvbrdfMaps stack from four image files.

    Roughness images may be grayscale or RGB (first channel used); it
    stores sqrt(alpha) and, like normals, is never gamma decoded.
    """
    diffuse = read_png_ldr(diffuse_path, linearize=True)
    specular = read_png_ldr(specular_path, linearize=True)
    normal = decode_normal_map(read_png_ldr(normal_path, linearize=False),
                               strict=strict)
    rough = read_png_ldr(roughness_path, linearize=False)
    if rough.ndim == 3:
        rough = rough[..., 0]
    return SvbrdfMaps(diffuse, specular, normal, rough)


_MAP_BASENAMES = {
    "diffuse": ("diffuse",),
    "specular": ("specular",),
    "normal": ("normal", "normals"),
    "roughness": ("roughness",),
}
_MAP_EXTENSIONS = (".png",)


def _find_map_file(directory, stem_options) -> str:
    for stem in stem_options:
        for ext in _MAP_EXTENSIONS:
            candidate = os.path.join(os.fspath(directory), stem + ext)
            if os.path.isfile(candidate):
                return candidate
    names = ", ".join(s + _MAP_EXTENSIONS[0] for s in stem_options)
    raise FileNotFoundError(
        f"no {stem_options[0]} map in {os.fspath(directory)!r} (expected {names})"
    )


def load_svbrdf_maps(directory, strict: bool = True) -> SvbrdfMaps:
    """Load a material from a directory of conventionally named maps.

    Expects diffuse.png, specular.png, normal.png (or normals.png), and
    roughness.png; a missing map raises naming the file looked for.
    """
    return load_svbrdf_map_files(
        _find_map_file(directory, _MAP_BASENAMES["diffuse"]),
        _find_map_file(directory, _MAP_BASENAMES["specular"]),
        _find_map_file(directory, _MAP_BASENAMES["normal"]),
        _find_map_file(directory, _MAP_BASENAMES["roughness"]),
        strict=strict,
    )


def save_png_ldr(path, image01: np.ndarray, encode_gamma: bool = True) -> None:
    """Write a [0,1] float image as an 8-bit PNG (display encoding applied
    to color data by default); writes atomically."""
    img = np.asarray(image01, dtype=np.float64)
    if np.any(img < 0) or np.any(img > 1) or not np.all(np.isfinite(img)):
        raise ValueError("image values must be finite and lie in [0, 1]")
    if encode_gamma:
        img = img ** (1.0 / DISPLAY_GAMMA)
    data = np.round(img * 255.0).astype(np.uint8)
    mode = "RGB" if data.ndim == 3 else "L"
    buffer = io.BytesIO()
    Image.fromarray(data, mode=mode).save(buffer, format="PNG")
    atomic_write_bytes(os.fspath(path), buffer.getvalue())
