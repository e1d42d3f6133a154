import numpy as np
import pytest

from svbrdf_forge.encoding import (
    BLOCK_DIM,
    COMPRESSED_DIM,
    ENCODED_DIM,
    EncodingConfig,
    N_FREQS,
    RAW_DIM,
    encode_directions,
    nd_enc_forward,
    swap_io,
)
from svbrdf_forge.geometry import half_vector, normalize
from svbrdf_forge.mlp import make_nd_enc_net


def unit(v):
    return normalize(np.asarray(v, dtype=np.float64))


def test_dimension_constants():
    assert N_FREQS == 16
    assert RAW_DIM == 9
    assert BLOCK_DIM == 96
    assert ENCODED_DIM == 297
    assert COMPRESSED_DIM == 32
    assert ENCODED_DIM == RAW_DIM + 3 * BLOCK_DIM


def test_config_dim_formula():
    for n in range(1, 33):
        cfg = EncodingConfig(frequency_count=n)
        assert cfg.block_dim == 6 * n
        assert cfg.encoded_dim == 9 + 18 * n
    with pytest.raises(ValueError):
        EncodingConfig(frequency_count=0)
    with pytest.raises(ValueError):
        EncodingConfig(compressed_dim=0)


def test_encode_layout_and_raw_passthrough():
    wi = unit([0.2, -0.1, 0.9])
    wo = unit([-0.3, 0.4, 0.8])
    h = half_vector(wi, wo)
    enc = encode_directions(wi, wo, h)
    assert enc.shape == (297,)
    # First nine slots are the raw directions, in (incident, outgoing,
    # half) order.
    np.testing.assert_array_equal(enc[0:3], wi)
    np.testing.assert_array_equal(enc[3:6], wo)
    np.testing.assert_array_equal(enc[6:9], h)
    # The remaining 288 are sinusoids, bounded by construction.
    assert enc[9:].shape == (288,)
    assert np.all(np.abs(enc[9:]) <= 1.0)


def test_encode_frequency_endpoints():
    # Coordinate 0: sin(2^k pi 0) = 0, cos = 1 for every frequency.
    zero = np.array([0.0, 0.0, 1.0])
    enc = encode_directions(zero, zero, zero)
    block = enc[9:9 + 96].reshape(3, 32)  # per-coordinate rows
    x_row = block[0]
    np.testing.assert_allclose(x_row[0::2], 0.0, atol=1e-12)
    np.testing.assert_allclose(x_row[1::2], 1.0, atol=1e-12)
    # Coordinate 1 at the base frequency: sin(pi) = 0, cos(pi) = -1.
    one = np.array([1.0, 0.0, 0.0])
    enc1 = encode_directions(one, zero, half_vector(one, zero))
    x_row1 = enc1[9:9 + 96].reshape(3, 32)[0]
    assert abs(x_row1[0]) < 1e-9
    assert abs(x_row1[1] - (-1.0)) < 1e-12


def test_encode_batched():
    gen = np.random.default_rng(4)
    wi = normalize(gen.normal(size=(10, 7, 3)) + [0, 0, 2.0])
    wo = normalize(gen.normal(size=(10, 7, 3)) + [0, 0, 2.0])
    h = half_vector(wi, wo)
    enc = encode_directions(wi, wo, h)
    assert enc.shape == (10, 7, 297)
    one = encode_directions(wi[3, 2], wo[3, 2], h[3, 2])
    np.testing.assert_array_equal(enc[3, 2], one)


def test_swap_io_permutation():
    gen = np.random.default_rng(8)
    wi = unit(gen.normal(size=3) + [0, 0, 2.0])
    wo = unit(gen.normal(size=3) + [0, 0, 2.0])
    h = half_vector(wi, wo)
    swapped = swap_io(encode_directions(wi, wo, h))
    np.testing.assert_array_equal(swapped, encode_directions(wo, wi, h))
    # Involution: swapping twice is the identity.
    np.testing.assert_array_equal(swap_io(swapped), encode_directions(wi, wo, h))


def test_swap_io_respects_config():
    cfg = EncodingConfig(frequency_count=3)
    wi = unit([0.1, 0.2, 0.97])
    wo = unit([-0.2, 0.05, 0.9])
    h = half_vector(wi, wo)
    enc = encode_directions(wi, wo, h, cfg)
    assert enc.shape == (9 + 18 * 3,)
    np.testing.assert_array_equal(swap_io(enc, cfg),
                                  encode_directions(wo, wi, h, cfg))


def test_nd_enc_forward_shapes_and_validation():
    net = make_nd_enc_net(np.random.default_rng(0))
    enc = encode_directions(unit([0, 0, 1.0]), unit([0.1, 0, 1.0]),
                            half_vector(unit([0, 0, 1.0]), unit([0.1, 0, 1.0])))
    out = nd_enc_forward(enc, net)
    assert out.shape == (32,)
    np.testing.assert_array_equal(out, net.forward(enc))
    with pytest.raises(ValueError):
        nd_enc_forward(enc[:-1], net)
