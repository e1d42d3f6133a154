import numpy as np
import pytest

from svbrdf_forge.geometry import normalize
from svbrdf_forge.ggx import (
    ALPHA_MIN,
    GgxSample,
    combined_brdf,
    decode_alpha,
    eval_brdf,
    fresnel_schlick,
    ndf_d,
    smith_g1,
)


def test_ndf_frozen_values():
    # 1/(pi alpha^2) at normal incidence.
    assert abs(ndf_d(1.0, 0.5) - 1.2732395447351627) < 1e-12
    assert abs(ndf_d(0.8, 0.3) - 0.164275068424551765) < 1e-12
    assert abs(ndf_d(1.0, 1.0) - 1.0 / np.pi) < 1e-15


def test_ndf_rejects_bad_inputs():
    with pytest.raises(ValueError):
        ndf_d(0.5, 0.0)
    with pytest.raises(ValueError):
        ndf_d(1.5, 0.5)


def test_ndf_projected_normalization():
    # Hemisphere integral of D(h) cos(theta) must be 1 for any alpha.
    theta = (np.arange(128) + 0.5) * (np.pi / 2) / 128
    weights = np.sin(theta) * np.cos(theta) * (np.pi / 2) / 128 * 2 * np.pi
    for alpha in (0.1, 0.5, 1.0):
        total = np.sum(ndf_d(np.cos(theta), alpha) * weights)
        assert abs(total - 1.0) < 0.02


def test_smith_g1_values():
    assert abs(smith_g1(1.0, 0.3) - 1.0) < 1e-12
    assert abs(smith_g1(0.5, 1.0) - 2.0 / 3.0) < 1e-12
    # Back-facing directions see no microfacets.
    assert smith_g1(-0.2, 0.5) == 0.0
    assert smith_g1(0.0, 0.5) == 0.0


def test_fresnel_schlick_endpoints():
    assert abs(fresnel_schlick(1.0, 0.04) - 0.04) < 1e-15
    assert abs(fresnel_schlick(0.0, 0.04) - 1.0) < 1e-15
    expected = 0.04 + 0.96 * 0.5**5
    assert abs(fresnel_schlick(0.5, 0.04) - expected) < 1e-15


def test_decode_alpha():
    assert decode_alpha(0.25) == 0.0625
    assert decode_alpha(1.0) == 1.0
    # Squared values below the floor clamp up to keep the NDF finite.
    assert decode_alpha(0.0) == ALPHA_MIN
    with pytest.raises(ValueError):
        decode_alpha(1.5)
    with pytest.raises(ValueError):
        decode_alpha(-0.1)


def test_sample_validation():
    up = np.array([0.0, 0.0, 1.0])
    GgxSample(np.full(3, 0.5), np.full(3, 0.04), up, 0.25)
    with pytest.raises(ValueError):
        GgxSample(np.full(3, 1.5), np.full(3, 0.04), up, 0.25)
    with pytest.raises(ValueError):
        GgxSample(np.full(3, 0.5), np.full(3, -0.1), up, 0.25)
    with pytest.raises(ValueError):
        GgxSample(np.full(3, 0.5), np.full(3, 0.04), np.array([0.0, 0.0, 2.0]), 0.25)
    with pytest.raises(ValueError):
        GgxSample(np.full(3, 0.5), np.full(3, 0.04), up, 0.0)


def test_specular_peak_frozen_value():
    # Pure specular, normal incidence: D F G / 4 = (4/pi) 0.04 / 4.
    sample = GgxSample(np.zeros(3), np.full(3, 0.04), np.array([0.0, 0.0, 1.0]), 0.5)
    up = np.array([0.0, 0.0, 1.0])
    out = eval_brdf(sample, up, up)
    np.testing.assert_allclose(out, 0.012732395447351627, rtol=0, atol=1e-15)


def test_lambertian_is_albedo_over_pi():
    albedo = np.array([0.2, 0.5, 0.8])
    sample = GgxSample(albedo, np.zeros(3), np.array([0.0, 0.0, 1.0]), 0.5)
    up = np.array([0.0, 0.0, 1.0])
    # At normal incidence the f0=0 Schlick term vanishes exactly.
    np.testing.assert_allclose(eval_brdf(sample, up, up), albedo / np.pi,
                               rtol=0, atol=1e-15)
    # Off normal, Schlick's (1-cos)^5 tail leaves a small residue on top
    # of the diffuse floor but never dips below it.
    gen = np.random.default_rng(3)
    d = normalize(np.abs(gen.normal(size=(64, 3))) + [0, 0, 0.5])
    out = eval_brdf(sample, d, np.broadcast_to(up, d.shape))
    assert np.all(out >= albedo / np.pi - 1e-15)
    np.testing.assert_allclose(out, np.broadcast_to(albedo / np.pi, out.shape),
                               atol=5e-3)


def test_reciprocity_exact():
    gen = np.random.default_rng(17)
    up = np.array([0.0, 0.0, 1.0])
    for _ in range(50):
        sample = GgxSample(gen.uniform(size=3), gen.uniform(size=3), up,
                           gen.uniform(ALPHA_MIN, 1.0))
        wi = normalize(gen.normal(size=(200, 3)) + [0, 0, 2.0])
        wo = normalize(gen.normal(size=(200, 3)) + [0, 0, 2.0])
        # Symmetric formulation: swapping directions is bit-exact.
        np.testing.assert_array_equal(eval_brdf(sample, wi, wo),
                                      eval_brdf(sample, wo, wi))


def test_non_negative_and_below_horizon_zero():
    gen = np.random.default_rng(23)
    up = np.array([0.0, 0.0, 1.0])
    sample = GgxSample(gen.uniform(size=3), gen.uniform(size=3), up, 0.3)
    wi = normalize(gen.normal(size=(500, 3)))
    wo = normalize(gen.normal(size=(500, 3)))
    out = eval_brdf(sample, wi, wo)
    assert np.all(out >= 0.0)
    below = (wi[:, 2] < 0) | (wo[:, 2] < 0)
    assert np.all(out[below] == 0.0)


def test_combined_brdf_broadcasts_alpha_map():
    # Whole-image call: per-pixel alpha against shared direction rasters.
    h, w = 4, 5
    alpha = np.linspace(0.1, 0.9, h * w).reshape(h, w)
    n = np.broadcast_to([0.0, 0.0, 1.0], (h, w, 3))
    wi = np.broadcast_to(normalize(np.array([0.2, 0.1, 1.0])), (h, w, 3))
    out = combined_brdf(np.full((h, w, 3), 0.5), np.full((h, w, 3), 0.04),
                        n, alpha, wi, wi)
    assert out.shape == (h, w, 3)
    ref = combined_brdf(np.full(3, 0.5), np.full(3, 0.04), [0.0, 0.0, 1.0],
                        alpha[2, 3], normalize(np.array([0.2, 0.1, 1.0])),
                        normalize(np.array([0.2, 0.1, 1.0])))
    np.testing.assert_allclose(out[2, 3], ref, atol=1e-15)


def test_tilted_normal_uses_shading_frame():
    tilt = normalize(np.array([0.3, 0.0, 1.0]))
    sample = GgxSample(np.full(3, 0.5), np.zeros(3), tilt, 0.5)
    # Direction below the shading horizon but above the geometric one.
    wi = normalize(np.array([-0.95, 0.0, 0.05]))
    out = eval_brdf(sample, wi, np.array([0.0, 0.0, 1.0]))
    assert np.all(out == 0.0)
