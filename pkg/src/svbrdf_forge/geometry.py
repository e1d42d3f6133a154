"""Surface grids, perspective-rectified direction fields, and rotations.

The material surface is the z=0 plane spanning [-1,1] x [-1,1].  Pixel (x,y)
of a WxH raster sits at the cell center ((2x+1)/W - 1, (2y+1)/H - 1, 0), row
index y increasing with the +y world axis.  Direction fields are unit-vector
rasters of shape (H, W, 3); no camera projection is ever applied, so images
come out perspective-rectified.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# Distance at which a 28-degree FOV camera exactly frames the 2x2 surface.
D_VIEW = 1.0 / math.tan(math.radians(28.0 / 2.0))


@dataclass
class SurfaceGrid:
    """Pixel-center positions of an HxW raster on the unit material plane."""

    width: int
    height: int
    positions: np.ndarray = field(init=False)

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("grid dimensions must be positive")
        xs = (2.0 * np.arange(self.width) + 1.0) / self.width - 1.0
        ys = (2.0 * np.arange(self.height) + 1.0) / self.height - 1.0
        gx, gy = np.meshgrid(xs, ys)
        self.positions = np.stack([gx, gy, np.zeros_like(gx)], axis=-1)


@dataclass
class PointSource:
    """Point light: world position and linear-RGB intensity."""

    position: np.ndarray
    intensity: np.ndarray = field(default_factory=lambda: np.ones(3))

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=np.float64)
        self.intensity = np.asarray(self.intensity, dtype=np.float64)
        if self.position.shape != (3,):
            raise ValueError("position must be a 3-vector")
        if np.any(self.intensity < 0):
            raise ValueError("intensity must be non-negative")


def normalize(v, axis=-1):
    """Unit-normalize along ``axis``; zero-length input is a domain error."""
    v = np.asarray(v, dtype=np.float64)
    n = np.linalg.norm(v, axis=axis, keepdims=True)
    if np.any(n < 1e-12):
        raise ValueError("cannot normalize a zero-length vector")
    return v / n


def _source_position(source) -> np.ndarray:
    if isinstance(source, PointSource):
        return source.position
    return np.asarray(source, dtype=np.float64)


def direction_field(grid: SurfaceGrid, source) -> np.ndarray:
    """Per-pixel unit directions from each surface point toward ``source``
    (a PointSource or a bare position)."""
    position = _source_position(source)
    delta = position.reshape(1, 1, 3) - grid.positions
    dist = np.linalg.norm(delta, axis=-1, keepdims=True)
    if np.any(dist < 1e-12):
        raise ValueError("source coincides with a surface point")
    return delta / dist


def source_distances(grid: SurfaceGrid, source) -> np.ndarray:
    """Per-pixel Euclidean distances from surface points to ``source``."""
    position = _source_position(source)
    return np.linalg.norm(position.reshape(1, 1, 3) - grid.positions, axis=-1)


def half_vector(omega_i, omega_o):
    """Normalized sum of two unit directions; antiparallel pair is an error."""
    s = np.asarray(omega_i, dtype=np.float64) + np.asarray(omega_o, dtype=np.float64)
    n = np.linalg.norm(s, axis=-1, keepdims=True)
    if np.any(n < 1e-9):
        raise ValueError("half vector undefined for antiparallel directions")
    return s / n


def reflect_about(point_normal, direction):
    """Mirror ``direction`` about ``point_normal``: 2(n.d)n - d."""
    n = np.asarray(point_normal, dtype=np.float64)
    d = np.asarray(direction, dtype=np.float64)
    return 2.0 * np.sum(n * d, axis=-1, keepdims=True) * n - d


def gram_schmidt_rotation(n) -> np.ndarray:
    """Orthonormal rotation with columns (u, v, n); R.T maps n to +z.

    The reference axis is (1,0,0); normals nearly parallel to it fall back
    to (0,1,0) to keep the cross product well conditioned.  Accepts
    (..., 3) input and returns (..., 3, 3).
    """
    n = np.asarray(n, dtype=np.float64)
    lead = n.shape[:-1]
    flat = n.reshape(-1, 3)
    ref = np.tile(np.array([1.0, 0.0, 0.0]), (flat.shape[0], 1))
    ref[np.abs(flat[:, 0]) > 0.999] = (0.0, 1.0, 0.0)
    u = np.cross(flat, ref)
    u = u / np.linalg.norm(u, axis=-1, keepdims=True)
    v = np.cross(flat, u)
    rot = np.stack([u, v, flat], axis=-1)
    return rot.reshape(lead + (3, 3))
