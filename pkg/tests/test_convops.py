import numpy as np
import pytest

from svbrdf_forge.convops import (
    conv2d_backward,
    conv2d_forward,
    conv_transpose2d_backward,
    conv_transpose2d_forward,
    leaky_relu,
    leaky_relu_grad,
    reflect_pad,
    reflect_pad_backward,
    sigmoid,
)


def brute_conv(x, weights, bias, stride):
    c_out, c_in, kh, kw = weights.shape
    h_out = (x.shape[1] - kh) // stride + 1
    w_out = (x.shape[2] - kw) // stride + 1
    y = np.zeros((c_out, h_out, w_out))
    for o in range(c_out):
        for i in range(h_out):
            for j in range(w_out):
                patch = x[:, i * stride:i * stride + kh, j * stride:j * stride + kw]
                y[o, i, j] = np.sum(patch * weights[o]) + bias[o]
    return y


def test_conv_forward_matches_brute_force():
    gen = np.random.default_rng(0)
    x = gen.normal(size=(3, 9, 8))
    weights = gen.normal(size=(5, 3, 3, 3))
    bias = gen.normal(size=5)
    for stride in (1, 2):
        y, _ = conv2d_forward(x, weights, bias, stride=stride)
        ref = brute_conv(x, weights, bias, stride)
        assert y.shape == ref.shape
        np.testing.assert_allclose(y, ref, atol=1e-10)


def test_conv_forward_rejects_channel_mismatch():
    with pytest.raises(ValueError):
        conv2d_forward(np.zeros((2, 5, 5)), np.zeros((4, 3, 3, 3)), np.zeros(4))


def test_conv_backward_finite_differences():
    gen = np.random.default_rng(1)
    x = gen.normal(size=(2, 6, 6))
    weights = gen.normal(size=(3, 2, 3, 3))
    bias = gen.normal(size=3)
    probe = gen.normal(size=(3, 4, 4))

    y, cache = conv2d_forward(x, weights, bias)
    d_weights, d_bias, dx = conv2d_backward(cache, probe)

    h = 1e-6
    for arr, grad in ((weights, d_weights), (bias, d_bias), (x, dx)):
        flat = arr.reshape(-1)
        gflat = grad.reshape(-1)
        for i in gen.choice(flat.size, size=min(25, flat.size), replace=False):
            keep = flat[i]
            flat[i] = keep + h
            up = np.sum(conv2d_forward(x, weights, bias)[0] * probe)
            flat[i] = keep - h
            down = np.sum(conv2d_forward(x, weights, bias)[0] * probe)
            flat[i] = keep
            fd = (up - down) / (2 * h)
            assert abs(gflat[i] - fd) < 1e-6 * max(1.0, abs(fd))


def test_transpose_conv_doubles_spatial_size():
    gen = np.random.default_rng(2)
    x = gen.normal(size=(3, 5, 7))
    weights = gen.normal(size=(3, 4, 4, 4))
    y, _ = conv_transpose2d_forward(x, weights, np.zeros(4), stride=2, pad=1)
    assert y.shape == (4, 10, 14)


def test_transpose_conv_is_adjoint_of_strided_conv():
    # <conv(x), y> == <x, conv_T(y)> for the same kernel, so upsampling is
    # the exact adjoint of downsampling.
    gen = np.random.default_rng(3)
    kh = 4
    x = gen.normal(size=(2, 10, 10))
    weights = gen.normal(size=(3, 2, kh, kh))  # (Cout, Cin, kh, kw)
    # Strided conv with zero padding 1: pad manually.
    xp = np.pad(x, ((0, 0), (1, 1), (1, 1)))
    y_down, _ = conv2d_forward(xp, weights, np.zeros(3), stride=2)
    probe = gen.normal(size=y_down.shape)
    # The transposed-conv layout (Cin, Cout, kh, kw) lines up with the
    # conv layout (Cout, Cin, kh, kw) axis for axis, so the same array
    # serves both sides of the adjoint identity.
    back, _ = conv_transpose2d_forward(probe, weights, np.zeros(2),
                                       stride=2, pad=1)
    assert back.shape == x.shape
    lhs = np.sum(y_down * probe)
    rhs = np.sum(x * back)
    assert abs(lhs - rhs) < 1e-9 * max(1.0, abs(lhs))


def test_transpose_conv_backward_finite_differences():
    gen = np.random.default_rng(4)
    x = gen.normal(size=(2, 4, 4))
    weights = gen.normal(size=(2, 3, 4, 4))
    bias = gen.normal(size=3)
    y, cache = conv_transpose2d_forward(x, weights, bias)
    probe = gen.normal(size=y.shape)
    d_weights, d_bias, dx = conv_transpose2d_backward(cache, probe)

    h = 1e-6
    for arr, grad in ((weights, d_weights), (bias, d_bias), (x, dx)):
        flat = arr.reshape(-1)
        gflat = grad.reshape(-1)
        for i in gen.choice(flat.size, size=min(20, flat.size), replace=False):
            keep = flat[i]
            flat[i] = keep + h
            up = np.sum(conv_transpose2d_forward(x, weights, bias)[0] * probe)
            flat[i] = keep - h
            down = np.sum(conv_transpose2d_forward(x, weights, bias)[0] * probe)
            flat[i] = keep
            fd = (up - down) / (2 * h)
            assert abs(gflat[i] - fd) < 1e-6 * max(1.0, abs(fd))


def test_reflect_pad_matches_numpy():
    gen = np.random.default_rng(5)
    x = gen.normal(size=(3, 6, 5))
    np.testing.assert_array_equal(
        reflect_pad(x, 2), np.pad(x, ((0, 0), (2, 2), (2, 2)), mode="reflect"))
    np.testing.assert_array_equal(reflect_pad(x, 0), x)
    with pytest.raises(ValueError):
        reflect_pad(np.zeros((1, 3, 3)), 3)


def test_reflect_pad_backward_is_adjoint():
    gen = np.random.default_rng(6)
    x = gen.normal(size=(2, 5, 7))
    pad = 2
    y = reflect_pad(x, pad)
    probe = gen.normal(size=y.shape)
    back = reflect_pad_backward(probe, pad, 5, 7)
    assert back.shape == x.shape
    assert abs(np.sum(y * probe) - np.sum(x * back)) < 1e-10


def test_pointwise_helpers():
    x = np.array([-3.0, -0.5, 0.0, 0.5, 3.0])
    np.testing.assert_allclose(leaky_relu(x), [-0.03, -0.005, 0.0, 0.5, 3.0])
    np.testing.assert_array_equal(leaky_relu_grad(x),
                                  [0.01, 0.01, 0.01, 1.0, 1.0])
    s = sigmoid(np.linspace(-30, 30, 101))
    assert np.all((s > 0.0) & (s < 1.0))
    assert abs(sigmoid(np.zeros(1))[0] - 0.5) < 1e-15
    np.testing.assert_allclose(sigmoid(np.array([-1.0]))[0]
                               + sigmoid(np.array([1.0]))[0], 1.0, atol=1e-15)
    # Extreme arguments saturate instead of overflowing.
    np.testing.assert_array_equal(sigmoid(np.array([-1e4, 1e4])), [0.0, 1.0])
