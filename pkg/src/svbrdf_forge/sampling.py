"""Light/view configuration sampling for training and evaluation exemplars.

The training ("reflect") sampler centers a specular highlight at a random
surface point: a view position is drawn uniformly on the hemisphere of
radius D_VIEW, and the light is placed along the mirror reflection of the
view direction about the macro normal at that point, at a distance
|Gaussian(0, 2)| + 0.5.  Evaluation additionally offers the co-located
"identity" configuration and independent "hemisphere" sampling at radius
4.0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .geometry import D_VIEW, reflect_about

RNG_ALGORITHM = "pcg64"
HEMISPHERE_RADIUS = 4.0
EVAL_KINDS = ("reflect", "identity", "hemisphere")

MACRO_NORMAL = np.array([0.0, 0.0, 1.0])


@dataclass
class RngStream:
    """Seeded PCG64 stream; equal seeds give equal sample sequences.

    ``split`` derives an independent child stream deterministically, for
    parallel generation with reproducible results.
    """

    seed: int
    algorithm: str = RNG_ALGORITHM
    _gen: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        if self.algorithm != RNG_ALGORITHM:
            raise ValueError(f"unsupported rng algorithm: {self.algorithm}")
        self._gen = np.random.Generator(np.random.PCG64(self.seed))

    @property
    def generator(self) -> np.random.Generator:
        return self._gen

    def split(self, index: int) -> "RngStream":
        """Child stream ``index``, derived via SeedSequence((seed, index))."""
        child = np.random.SeedSequence((self.seed, index))
        derived = int(child.generate_state(2, dtype=np.uint32).view(np.uint64)[0])
        return RngStream(derived)

    def uniform(self, *args, **kwargs):
        return self._gen.uniform(*args, **kwargs)

    def normal(self, *args, **kwargs):
        return self._gen.normal(*args, **kwargs)


@dataclass
class ExemplarConfig:
    """One light/view configuration, plus the highlight point that chose it
    (None for hemisphere-sampled configurations, which have no highlight
    construction)."""

    light_position: np.ndarray
    view_position: np.ndarray
    highlight_point: Optional[np.ndarray] = None

    def __post_init__(self):
        self.light_position = np.asarray(self.light_position, dtype=np.float64)
        self.view_position = np.asarray(self.view_position, dtype=np.float64)
        if self.highlight_point is not None:
            self.highlight_point = np.asarray(self.highlight_point, dtype=np.float64)
        if self.light_position[2] <= 0:
            raise ValueError("light position must lie above the surface")
        if self.view_position[2] < 0:
            raise ValueError("view position must not lie below the surface")


def sample_highlight_point(rng: RngStream) -> np.ndarray:
    """Random surface point: uniform in [-1,1] plus Gaussian(0, std=2) jitter.

    The jitter can land the point outside the surface; such samples are used
    as-is and simply produce oblique configurations.
    """
    px = (rng.uniform() * 2.0 - 1.0) + rng.normal(0.0, 2.0)
    py = (rng.uniform() * 2.0 - 1.0) + rng.normal(0.0, 2.0)
    return np.array([px, py])


def sample_view(rng: RngStream, radius: float = D_VIEW) -> np.ndarray:
    """Uniform (solid-angle) sample on the upper hemisphere of ``radius``.

    Uses the area-preserving map: z uniform in [0,1], azimuth uniform.
    """
    z = rng.uniform()
    phi = rng.uniform(0.0, 2.0 * np.pi)
    r_xy = np.sqrt(max(0.0, 1.0 - z * z))
    return radius * np.array([r_xy * np.cos(phi), r_xy * np.sin(phi), z])


def sample_light_for_highlight(p, v, rng: RngStream) -> np.ndarray:
    """Light position that centers a specular highlight at surface point p.

    The light direction from p mirrors the view direction about the macro
    normal, so the half vector at p is exactly (0,0,1); the distance is
    |Gaussian(0,2)| + 0.5.
    """
    p3 = np.array([p[0], p[1], 0.0])
    v = np.asarray(v, dtype=np.float64)
    to_view = v - p3
    norm = np.linalg.norm(to_view)
    if norm < 1e-12 or v[2] <= 0:
        raise ValueError("view must lie strictly above the surface")
    mirror = reflect_about(MACRO_NORMAL, to_view / norm)
    assert mirror[2] > 0.0, "mirror direction dipped below the surface"
    dist = abs(rng.normal(0.0, 2.0)) + 0.5
    return p3 + dist * mirror


def sample_reflect_config(rng: RngStream) -> ExemplarConfig:
    """One training exemplar: highlight point, view, then matching light."""
    p = sample_highlight_point(rng)
    v = sample_view(rng)
    i = sample_light_for_highlight(p, v, rng)
    return ExemplarConfig(light_position=i, view_position=v, highlight_point=p)


def identity_config() -> ExemplarConfig:
    """Co-located overhead configuration used for input photographs."""
    overhead = np.array([0.0, 0.0, D_VIEW])
    return ExemplarConfig(overhead.copy(), overhead.copy(), np.zeros(2))


def eval_configs(kind: str, count: int, rng: RngStream) -> list[ExemplarConfig]:
    """Evaluation configuration sets.

    ``reflect`` delegates to the training sampler; ``identity`` repeats the
    co-located overhead configuration; ``hemisphere`` samples light and view
    independently, uniformly on the radius-4.0 hemisphere.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if kind == "reflect":
        return [sample_reflect_config(rng) for _ in range(count)]
    if kind == "identity":
        return [identity_config() for _ in range(count)]
    if kind == "hemisphere":
        configs = []
        for _ in range(count):
            light = sample_view(rng, radius=HEMISPHERE_RADIUS)
            view = sample_view(rng, radius=HEMISPHERE_RADIUS)
            configs.append(ExemplarConfig(light, view, None))
        return configs
    raise ValueError(f"unknown configuration kind: {kind!r}")
