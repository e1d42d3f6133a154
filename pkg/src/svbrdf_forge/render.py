"""Point-light rendering of GGX SVBRDF map stacks.

Renders are perspective-rectified: every pixel gets its own light and view
direction from the geometry module, but no camera projection is applied.
Output radiance is linear HDR (unclamped), already multiplied by the
foreshortening cosine of the per-pixel shading normal.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import geometry, ggx, radiometry
from .geometry import D_VIEW, PointSource, SurfaceGrid


@dataclass
class SvbrdfMaps:
    """The four GGX parameter rasters: diffuse, specular, normal, roughness.

    ``roughness`` stores sqrt(alpha) in [0,1]; normals are unit vectors with
    positive z.  All rasters share the same HxW resolution.
    """

    diffuse: np.ndarray
    specular: np.ndarray
    normal: np.ndarray
    roughness: np.ndarray

    def __post_init__(self):
        self.diffuse = np.asarray(self.diffuse, dtype=np.float64)
        self.specular = np.asarray(self.specular, dtype=np.float64)
        self.normal = np.asarray(self.normal, dtype=np.float64)
        self.roughness = np.asarray(self.roughness, dtype=np.float64)
        h, w = self.diffuse.shape[:2]
        if self.diffuse.shape != (h, w, 3) or self.specular.shape != (h, w, 3):
            raise ValueError("diffuse and specular must be HxWx3")
        if self.normal.shape != (h, w, 3):
            raise ValueError("normal map must be HxWx3")
        if self.roughness.shape not in ((h, w), (h, w, 1)):
            raise ValueError("roughness map must be HxW or HxWx1")
        self.roughness = self.roughness.reshape(h, w)
        for name, m in (("diffuse", self.diffuse), ("specular", self.specular),
                        ("roughness", self.roughness)):
            if np.any(m < 0) or np.any(m > 1):
                raise ValueError(f"{name} map values must lie in [0, 1]")
        norms = np.linalg.norm(self.normal, axis=-1)
        if np.any(np.abs(norms - 1.0) > 1e-3):
            raise ValueError("normal map vectors must be unit length")
        if np.any(self.normal[..., 2] <= 0):
            raise ValueError("normal map z components must be positive")

    @property
    def height(self) -> int:
        return self.diffuse.shape[0]

    @property
    def width(self) -> int:
        return self.diffuse.shape[1]

    @classmethod
    def uniform(cls, height, width, diffuse, specular, roughness,
                normal=(0.0, 0.0, 1.0)) -> "SvbrdfMaps":
        """Constant-valued maps, handy for synthetic test materials."""
        d = np.broadcast_to(np.asarray(diffuse, float), (height, width, 3)).copy()
        s = np.broadcast_to(np.asarray(specular, float), (height, width, 3)).copy()
        n = np.broadcast_to(np.asarray(normal, float), (height, width, 3)).copy()
        r = np.full((height, width), float(roughness))
        return cls(d, s, n, r)

    def sample_at(self, y: int, x: int) -> ggx.GgxSample:
        """Single-pixel GgxSample with the roughness value decoded."""
        return ggx.GgxSample(
            diffuse_rgb=self.diffuse[y, x],
            specular_rgb=self.specular[y, x],
            normal=self.normal[y, x] / np.linalg.norm(self.normal[y, x]),
            alpha=float(ggx.decode_alpha(self.roughness[y, x])),
        )


@dataclass
class RenderJob:
    """One render: maps, point light, view position, optional flags."""

    maps: SvbrdfMaps
    light: PointSource
    view_position: np.ndarray
    colocated: bool = False
    falloff: bool = False

    def __post_init__(self):
        self.view_position = np.asarray(self.view_position, dtype=np.float64)
        if self.light.position[2] <= 0 or self.view_position[2] <= 0:
            raise ValueError("light and view must sit above the surface (z > 0)")


def render(job: RenderJob) -> np.ndarray:
    """Render the job to an HxWx3 linear HDR radiance image.

    Per pixel: intensity * brdf(omega_i, omega_o) * max(0, n . omega_i),
    with the shading normal taken from the normal map.  Inverse-square
    distance falloff is applied only when the job requests it.
    """
    maps = job.maps
    grid = SurfaceGrid(maps.width, maps.height)
    omega_i = geometry.direction_field(grid, job.light.position)
    omega_o = geometry.direction_field(grid, job.view_position)

    alpha = ggx.decode_alpha(maps.roughness)
    brdf = ggx.combined_brdf(
        maps.diffuse, maps.specular, maps.normal, alpha, omega_i, omega_o
    )
    cos_i = np.maximum(np.sum(maps.normal * omega_i, axis=-1), 0.0)
    img = job.light.intensity.reshape(1, 1, 3) * brdf * cos_i[..., None]
    if job.falloff:
        dist = geometry.source_distances(grid, job.light.position)
        img = img / (dist * dist)[..., None]
    return img


def colocated_input_render(maps: SvbrdfMaps, intensity=(1.0, 1.0, 1.0),
                           falloff: bool = False) -> np.ndarray:
    """Input-photograph render: light and view both at (0, 0, D_VIEW)."""
    pos = np.array([0.0, 0.0, D_VIEW])
    job = RenderJob(
        maps=maps,
        light=PointSource(pos, np.asarray(intensity, dtype=np.float64)),
        view_position=pos,
        colocated=True,
        falloff=falloff,
    )
    return render(job)


def half_angle_cosines(height: int, width: int, light, view) -> np.ndarray:
    """Per-pixel z component of the half vector for given source positions.

    Equals the cosine between the macro normal (0,0,1) and the half-way
    direction at each pixel.
    """
    grid = SurfaceGrid(width, height)
    omega_i = geometry.direction_field(grid, light)
    omega_o = geometry.direction_field(grid, view)
    h = geometry.half_vector(omega_i, omega_o)
    return h[..., 2]


def build_estimator_input(photo_log: np.ndarray, light, view) -> np.ndarray:
    """Stack an HxWx4 estimator input: log-RGB plus the half-angle cosine.

    ``photo_log`` must already be log-compressed; it passes through
    unchanged.  The fourth channel is never log-scaled.
    """
    photo_log = np.asarray(photo_log, dtype=np.float64)
    if photo_log.ndim != 3 or photo_log.shape[2] != 3:
        raise ValueError("photo must be HxWx3")
    h, w = photo_log.shape[:2]
    cos_h = half_angle_cosines(h, w, light, view)
    return np.concatenate([photo_log, cos_h[..., None]], axis=-1)


def shadow_band(height: int, width: int, light_position,
                depth: float = 0.85, sigma: float = 0.18) -> np.ndarray:
    """Light-dependent multiplicative shadow band for GI-style experiments.

    A Gaussian dark band crosses the surface perpendicular to the light's
    horizontal offset; its center slides with the light azimuth, so each
    light position casts the band somewhere else.  Returns an HxW factor in
    (0, 1] to multiply into a rendered image.
    """
    light = np.asarray(light_position, dtype=np.float64)
    grid = SurfaceGrid(width, height)
    horiz = light[:2]
    norm = np.linalg.norm(horiz)
    if norm < 1e-9:
        axis = np.array([1.0, 0.0])
        center = 0.0
    else:
        axis = horiz / norm
        # Band sits opposite the light, clipped to stay on the surface.
        center = -np.clip(norm / np.maximum(light[2], 1e-6), 0.0, 0.8)
    coord = grid.positions[..., 0] * axis[0] + grid.positions[..., 1] * axis[1]
    return 1.0 - depth * np.exp(-0.5 * ((coord - center) / sigma) ** 2)


def log_render(job: RenderJob) -> np.ndarray:
    """Render and log-compress in one step (the fitting pipeline's view)."""
    return radiometry.log_compress(render(job))
