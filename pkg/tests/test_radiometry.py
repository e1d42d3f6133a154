import numpy as np
import pytest

from svbrdf_forge.radiometry import (
    ldr_clamp,
    log_compress,
    log_expand,
    log_expand_and_gamma,
)


def test_log_compress_frozen_value():
    assert abs(log_compress(4.5) - 1.7047480922384252) < 1e-15
    assert log_compress(0.0) == 0.0


def test_log_compress_rejects_negative():
    with pytest.raises(ValueError):
        log_compress(np.array([0.5, -1e-9]))


def test_roundtrip_hdr_sweep():
    r = np.concatenate([[0.0], np.logspace(-8, 4, 400)])
    back = log_expand(log_compress(r))
    assert np.all(np.abs(r - back) < 1e-6 * (1.0 + r))


def test_display_conversion_frozen_values():
    # (e - 1)^(1/2.2) at log radiance 1.
    assert abs(log_expand_and_gamma(1.0) - 1.2789721558336881) < 1e-15
    # Radiance 1 maps to display 1.
    assert abs(log_expand_and_gamma(np.log(2.0)) - 1.0) < 1e-12
    assert log_expand_and_gamma(0.0) == 0.0


def test_display_conversion_rejects_negative_log():
    with pytest.raises(ValueError):
        log_expand_and_gamma(-0.1)


def test_ldr_clamp():
    img = np.array([0.3, 1.0, 2.5, 100.0])
    np.testing.assert_array_equal(ldr_clamp(img), [0.3, 1.0, 1.0, 1.0])
    np.testing.assert_array_equal(ldr_clamp(img, white_point=2.5),
                                  [0.3, 1.0, 2.5, 2.5])


def test_ldr_clamp_then_compress_is_bounded():
    img = np.array([0.0, 0.5, 7.0])
    out = log_compress(ldr_clamp(img))
    assert np.all(out <= np.log(2.0) + 1e-15)
