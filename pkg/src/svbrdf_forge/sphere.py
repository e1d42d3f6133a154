"""Re-rendering a fitted material pixel on a sphere.

An orthographic camera looks along a chosen view direction; each sphere
pixel has geometric normal m.  Directions are moved into the material's
frame with the rotation Q = R(n_enc) R(m)^T, where n_enc is the shading
normal the material was fitted with: Q maps m onto n_enc, so the sphere
presents the network with configurations matching its training geometry.
Because Q is a rotation, the incident cosine n_enc . (Q w) equals
m . w, so the cosine the network baked in is exactly the shading cosine
of the sphere point.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .geometry import PointSource, gram_schmidt_rotation, half_vector, normalize
from .ggx import GgxSample, eval_brdf
from .mlp import MlpNet
from .nbrdf import render_pixel_directions
from .sampling import RngStream


@dataclass
class NeuralMaterialPixel:
    """One fitted texel: its latent vector, the shading normal it was
    trained against, and the nets that interpret it."""

    params: np.ndarray
    normal: np.ndarray
    renderer: MlpNet
    nd_enc: MlpNet

    def __post_init__(self):
        self.params = np.asarray(self.params, dtype=np.float64)
        self.normal = normalize(np.asarray(self.normal, dtype=np.float64))
        if self.params.ndim != 1:
            raise ValueError("params must be a flat latent vector")


SphereMaterial = Union[GgxSample, NeuralMaterialPixel]


@dataclass
class SphereScene:
    """A sphere, a point light, an orthographic camera along
    ``view_direction`` (pointing from the sphere toward the camera), and
    the material covering the sphere."""

    light: PointSource
    material: SphereMaterial
    view_direction: np.ndarray = field(
        default_factory=lambda: np.array([0.0, 0.0, 1.0])
    )
    resolution: int = 128
    center: np.ndarray = field(default_factory=lambda: np.zeros(3))
    radius: float = 1.0

    def __post_init__(self):
        self.view_direction = normalize(
            np.asarray(self.view_direction, dtype=np.float64)
        )
        self.center = np.asarray(self.center, dtype=np.float64)
        if self.radius <= 0:
            raise ValueError("sphere radius must be positive")
        if self.resolution < 1:
            raise ValueError("resolution must be >= 1")
        if np.linalg.norm(self.light.position - self.center) <= self.radius:
            raise ValueError("the light must sit outside the sphere")


def sphere_geometry(scene: SphereScene):
    """Visible-hemisphere geometry for an orthographic render.

    Returns (mask, normals, omega_i, omega_o): a (res, res) visibility
    mask and, for visible pixels only, (N, 3) world-space unit normals,
    light directions, and the constant view direction broadcast to rows.
    """
    res = scene.resolution
    frame = gram_schmidt_rotation(scene.view_direction)
    u_axis, v_axis = frame[:, 0], frame[:, 1]
    ticks = (2.0 * np.arange(res) + 1.0) / res - 1.0
    gu, gv = np.meshgrid(ticks, ticks)
    rr = gu * gu + gv * gv
    mask = rr <= 1.0
    a, b = gu[mask], gv[mask]
    c = np.sqrt(np.maximum(0.0, 1.0 - a * a - b * b))
    normals = (
        a[:, None] * u_axis + b[:, None] * v_axis
        + c[:, None] * scene.view_direction
    )
    points = scene.center[None, :] + scene.radius * normals
    to_light = scene.light.position[None, :] - points
    omega_i = to_light / np.linalg.norm(to_light, axis=1, keepdims=True)
    omega_o = np.broadcast_to(scene.view_direction, normals.shape)
    return mask, normals, omega_i, omega_o


def material_frame_directions(normals: np.ndarray, shading_normal: np.ndarray,
                              omega_i: np.ndarray, omega_o: np.ndarray):
    """Rotate world directions into the fitted material's frame with
    Q = R(n_enc) R(m)^T per pixel."""
    rot_enc = gram_schmidt_rotation(shading_normal)
    rot_m = gram_schmidt_rotation(normals)
    q = rot_enc @ rot_m.transpose(0, 2, 1)
    wi = np.einsum("nij,nj->ni", q, omega_i)
    wo = np.einsum("nij,nj->ni", q, omega_o)
    return wi, wo


def _shade_neural(scene: SphereScene, material: NeuralMaterialPixel):
    """Per-visible-pixel radiance rows for a fitted material.

    The network output expands to radiance that already contains the
    incident cosine, so lit pixels are exactly intensity * expm1(pred).
    """
    mask, normals, omega_i, omega_o = sphere_geometry(scene)
    wi, wo = material_frame_directions(normals, material.normal, omega_i, omega_o)
    h = half_vector(wi, wo)
    y = render_pixel_directions(material.params, wi, wo, h,
                                material.renderer, material.nd_enc)
    radiance = np.maximum(np.expm1(y), 0.0)
    cos_i = np.sum(normals * omega_i, axis=1)
    radiance = radiance * (cos_i > 0.0)[:, None] * scene.light.intensity[None, :]
    return mask, radiance


def _shade_ggx(scene: SphereScene, sample: GgxSample):
    """Per-visible-pixel radiance rows for an analytic material.

    Uses the same per-pixel frame rotation and the same shading-normal
    cosine as the neural path, so differences between the two renders
    isolate what the networks learned.
    """
    mask, normals, omega_i, omega_o = sphere_geometry(scene)
    wi, wo = material_frame_directions(normals, sample.normal, omega_i, omega_o)
    brdf = eval_brdf(sample, wi, wo)
    cos_i = np.maximum(np.sum(normals * omega_i, axis=1), 0.0)
    radiance = brdf * cos_i[:, None] * scene.light.intensity[None, :]
    return mask, radiance


def render_sphere(scene: SphereScene) -> np.ndarray:
    """Linear-RGB sphere image; background pixels are black.

    Dispatches on the scene's material: analytic evaluation for a
    GgxSample, network evaluation for a NeuralMaterialPixel.
    """
    if isinstance(scene.material, NeuralMaterialPixel):
        mask, radiance = _shade_neural(scene, scene.material)
    elif isinstance(scene.material, GgxSample):
        mask, radiance = _shade_ggx(scene, scene.material)
    else:
        raise TypeError(f"unsupported sphere material: {type(scene.material)!r}")
    image = np.zeros((scene.resolution, scene.resolution, 3))
    image[mask] = radiance
    return image


def cosine_sample_hemisphere(rng):
    """Cosine-weighted direction on the +z hemisphere with its density.

    Polar map r = sqrt(u1), z = sqrt(1 - u1); returns (direction, pdf)
    where pdf = cos(theta)/pi.  ``rng`` is an RngStream or a Generator.
    """
    gen = rng.generator if isinstance(rng, RngStream) else rng
    u1 = gen.uniform()
    u2 = gen.uniform()
    r = np.sqrt(u1)
    phi = 2.0 * np.pi * u2
    z = np.sqrt(max(0.0, 1.0 - u1))
    direction = np.array([r * np.cos(phi), r * np.sin(phi), z])
    return direction, z / np.pi


def cosine_hemisphere_pdf(direction, normal=(0.0, 0.0, 1.0)) -> float:
    """Density of cosine_sample_hemisphere at ``direction``."""
    cos_t = float(np.dot(np.asarray(normal, dtype=np.float64),
                         np.asarray(direction, dtype=np.float64)))
    return max(0.0, cos_t) / np.pi
