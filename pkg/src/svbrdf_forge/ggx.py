"""Isotropic GGX microfacet BRDF with a Lambertian diffuse term.

All functions accept scalars or numpy arrays and broadcast componentwise, so
the same formulas serve both single-sample evaluation and whole-image
rendering.  Directions are unit 3-vectors; colors are linear RGB.

Conventions:
  * the roughness map stores sqrt(alpha); ``decode_alpha`` squares it and
    clamps to [ALPHA_MIN, 1] to keep the distribution non-singular,
  * the diffuse term is energy-normalized Lambertian (albedo / pi),
  * half-vector dot products are clamped below at 1e-6 before division.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ALPHA_MIN = 1e-3
ALPHA_MAX = 1.0
DOT_EPS = 1e-6
COS_SLACK = 1e-6


def decode_alpha(stored):
    """Decode a stored roughness value (sqrt(alpha) in [0,1]) to alpha."""
    stored = np.asarray(stored, dtype=np.float64)
    if np.any(stored < -COS_SLACK) or np.any(stored > 1.0 + COS_SLACK):
        raise ValueError("stored roughness must lie in [0, 1]")
    return np.clip(stored * stored, ALPHA_MIN, ALPHA_MAX)


@dataclass
class GgxSample:
    """Per-point GGX material: diffuse/specular color, shading normal, alpha.

    ``alpha`` is the surface-slope standard deviation, already decoded from
    the stored sqrt(alpha) map value.
    """

    diffuse_rgb: np.ndarray
    specular_rgb: np.ndarray
    normal: np.ndarray
    alpha: float

    def __post_init__(self):
        self.diffuse_rgb = np.asarray(self.diffuse_rgb, dtype=np.float64)
        self.specular_rgb = np.asarray(self.specular_rgb, dtype=np.float64)
        self.normal = np.asarray(self.normal, dtype=np.float64)
        if np.any(self.diffuse_rgb < 0) or np.any(self.diffuse_rgb > 1):
            raise ValueError("diffuse_rgb components must lie in [0, 1]")
        if np.any(self.specular_rgb < 0) or np.any(self.specular_rgb > 1):
            raise ValueError("specular_rgb components must lie in [0, 1]")
        if abs(np.linalg.norm(self.normal) - 1.0) > 1e-6:
            raise ValueError("normal must be unit length")
        if not (ALPHA_MIN - 1e-12 <= self.alpha <= ALPHA_MAX + 1e-12):
            raise ValueError("alpha must lie in [%g, %g]" % (ALPHA_MIN, ALPHA_MAX))


def ndf_d(cos_theta_h, alpha):
    """GGX normal distribution: alpha^2 / (pi ((cos^2)(alpha^2-1)+1)^2).

    ``cos_theta_h`` is the cosine between surface normal and microfacet
    normal; clamped into [0,1] inside a 1e-6 slack, rejected outside.
    """
    cos_theta_h = np.asarray(cos_theta_h, dtype=np.float64)
    alpha = np.asarray(alpha, dtype=np.float64)
    if np.any(alpha <= 0):
        raise ValueError("alpha must be positive")
    if np.any(np.abs(cos_theta_h) > 1.0 + COS_SLACK):
        raise ValueError("cos_theta_h outside [-1, 1]")
    c = np.clip(cos_theta_h, 0.0, 1.0)
    a2 = alpha * alpha
    denom = c * c * (a2 - 1.0) + 1.0
    return a2 / (np.pi * denom * denom)


def smith_g1(i_dot_h, alpha):
    """Smith shadow-masking factor for one direction.

    Back-facing input (i_dot_h <= 0) returns 0: no visible microfacets.
    """
    i_dot_h = np.asarray(i_dot_h, dtype=np.float64)
    alpha = np.asarray(alpha, dtype=np.float64)
    d = np.clip(i_dot_h, 0.0, 1.0)
    g = d / (d * (1.0 - 0.5 * alpha) + 0.5 * alpha)
    return np.where(i_dot_h <= 0.0, 0.0, g)


def fresnel_schlick(cos_term, f0):
    """Schlick Fresnel: F0 + (1 - F0)(1 - cos)^5, componentwise."""
    cos_term = np.clip(np.asarray(cos_term, dtype=np.float64), 0.0, 1.0)
    f0 = np.asarray(f0, dtype=np.float64)
    w = (1.0 - cos_term) ** 5
    return f0 + (1.0 - f0) * w


def combined_brdf(diffuse_rgb, specular_rgb, normal, alpha, omega_i, omega_o):
    """Diffuse + GGX specular BRDF, broadcast over leading dimensions.

    All direction arguments have shape (..., 3); ``alpha`` broadcasts over
    the leading dimensions.  Returns (..., 3) linear RGB, zero wherever a
    direction is below the local surface or the half vector degenerates.

    Written symmetrically in (omega_i, omega_o) so reciprocity holds exactly
    in floating point: the Fresnel cosine is the mean of the two (equal up
    to rounding) half-vector dot products.
    """
    omega_i = np.asarray(omega_i, dtype=np.float64)
    omega_o = np.asarray(omega_o, dtype=np.float64)
    normal = np.asarray(normal, dtype=np.float64)
    alpha = np.asarray(alpha, dtype=np.float64)

    h_sum = omega_i + omega_o
    h_len = np.linalg.norm(h_sum, axis=-1, keepdims=True)
    degenerate = h_len[..., 0] < 1e-12
    h = h_sum / np.where(h_len < 1e-12, 1.0, h_len)

    n_dot_i = np.sum(normal * omega_i, axis=-1)
    n_dot_o = np.sum(normal * omega_o, axis=-1)
    n_dot_h = np.sum(normal * h, axis=-1)
    h_dot_i = np.sum(h * omega_i, axis=-1)
    h_dot_o = np.sum(h * omega_o, axis=-1)

    d = ndf_d(np.clip(n_dot_h, -1.0, 1.0), alpha)
    g = smith_g1(h_dot_i, alpha) * smith_g1(h_dot_o, alpha)
    f = fresnel_schlick((0.5 * (h_dot_i + h_dot_o))[..., None], specular_rgb)
    denom = 4.0 * np.maximum(h_dot_o, DOT_EPS) * np.maximum(h_dot_i, DOT_EPS)

    spec = f * (d * g / denom)[..., None]
    value = np.asarray(diffuse_rgb, dtype=np.float64) / np.pi + spec

    below = (n_dot_i < 0.0) | (n_dot_o < 0.0) | degenerate
    return np.where(below[..., None], 0.0, value)


def eval_brdf(sample: GgxSample, omega_i, omega_o):
    """Evaluate the full BRDF of one GGX sample for a direction pair."""
    return combined_brdf(
        sample.diffuse_rgb,
        sample.specular_rgb,
        sample.normal,
        sample.alpha,
        omega_i,
        omega_o,
    )
