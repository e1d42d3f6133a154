import numpy as np
import pytest

from svbrdf_forge.geometry import D_VIEW, half_vector, normalize
from svbrdf_forge.sampling import (
    HEMISPHERE_RADIUS,
    ExemplarConfig,
    RngStream,
    eval_configs,
    identity_config,
    sample_highlight_point,
    sample_light_for_highlight,
    sample_reflect_config,
    sample_view,
)


def test_rng_stream_determinism():
    a = RngStream(42)
    b = RngStream(42)
    assert a.uniform() == b.uniform()
    assert a.normal() == b.normal()
    with pytest.raises(ValueError):
        RngStream(0, algorithm="mt19937")


def test_rng_split_children_independent():
    root = RngStream(7)
    c0 = root.split(0)
    c0_again = RngStream(7).split(0)
    c1 = RngStream(7).split(1)
    seq0 = [c0.uniform() for _ in range(5)]
    assert seq0 == [c0_again.uniform() for _ in range(5)]
    assert seq0 != [c1.uniform() for _ in range(5)]
    # Splitting does not advance the parent.
    fresh = RngStream(7)
    fresh.split(3)
    assert fresh.uniform() == RngStream(7).uniform()


def test_config_validation():
    with pytest.raises(ValueError):
        ExemplarConfig([0.0, 0.0, -1.0], [0.0, 0.0, 2.0])
    cfg = ExemplarConfig([0.0, 0.0, 2.0], [0.0, 0.0, 2.0])
    assert cfg.highlight_point is None


def test_identity_config():
    cfg = identity_config()
    np.testing.assert_allclose(cfg.light_position, [0.0, 0.0, D_VIEW])
    np.testing.assert_allclose(cfg.view_position, [0.0, 0.0, D_VIEW])
    np.testing.assert_array_equal(cfg.highlight_point, [0.0, 0.0])


def test_sample_view_on_hemisphere():
    rng = RngStream(5)
    views = np.array([sample_view(rng) for _ in range(500)])
    np.testing.assert_allclose(np.linalg.norm(views, axis=-1), D_VIEW, atol=1e-9)
    assert np.all(views[:, 2] >= 0.0)
    # Uniform in solid angle: mean z is radius/2.
    assert abs(views[:, 2].mean() - D_VIEW / 2) < 0.15


def test_highlight_point_moments():
    rng = RngStream(9)
    pts = np.array([sample_highlight_point(rng) for _ in range(20_000)])
    # Uniform[-1,1] + Gaussian(0,2): mean 0, std sqrt(1/3 + 4).
    assert np.abs(pts.mean(axis=0)).max() < 0.06
    np.testing.assert_allclose(pts.std(axis=0), 2.0816659994661327, rtol=0.03)


def test_highlight_identity_and_light_distance():
    rng = RngStream(123)
    for _ in range(1000):
        cfg = sample_reflect_config(rng)
        p3 = np.array([cfg.highlight_point[0], cfg.highlight_point[1], 0.0])
        to_light = normalize(cfg.light_position - p3)
        to_view = normalize(cfg.view_position - p3)
        h = half_vector(to_light, to_view)
        np.testing.assert_allclose(h, [0.0, 0.0, 1.0], atol=1e-6)
        assert np.linalg.norm(cfg.light_position - p3) >= 0.5


def test_sample_light_rejects_view_on_surface():
    rng = RngStream(1)
    with pytest.raises(ValueError):
        sample_light_for_highlight([0.0, 0.0], [0.0, 0.0, 0.0], rng)


def test_eval_configs_kinds():
    assert len(eval_configs("reflect", 4, RngStream(3))) == 4
    idents = eval_configs("identity", 3, RngStream(3))
    for cfg in idents:
        np.testing.assert_allclose(cfg.view_position, [0.0, 0.0, D_VIEW])
    hemi = eval_configs("hemisphere", 6, RngStream(3))
    for cfg in hemi:
        assert abs(np.linalg.norm(cfg.light_position) - HEMISPHERE_RADIUS) < 1e-9
        assert abs(np.linalg.norm(cfg.view_position) - HEMISPHERE_RADIUS) < 1e-9
        assert cfg.highlight_point is None
    with pytest.raises(ValueError):
        eval_configs("spiral", 2, RngStream(3))
    with pytest.raises(ValueError):
        eval_configs("reflect", 0, RngStream(3))


def test_eval_configs_seed_reproducible():
    a = eval_configs("reflect", 5, RngStream(77))
    b = eval_configs("reflect", 5, RngStream(77))
    for x, y in zip(a, b):
        np.testing.assert_array_equal(x.light_position, y.light_position)
        np.testing.assert_array_equal(x.view_position, y.view_position)
