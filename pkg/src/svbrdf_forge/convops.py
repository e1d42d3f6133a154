"""2-D convolution primitives with explicit forward caches and backward
passes.

Feature maps are single images shaped (C, H, W) in float64.  Forward
functions return (y, cache); the matching backward consumes the cache
and the output gradient and returns exact parameter and input gradients,
verified against central finite differences.

Spatial convolutions take already padded input (pair them with
``reflect_pad``); the transposed convolution implements the exact
adjoint of a zero-padded strided convolution, so upsampling gradients
mirror downsampling arithmetic.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


# ---------------------------------------------------------------------------
# Reflect padding
# ---------------------------------------------------------------------------

def _reflect_index(q: np.ndarray, size: int) -> np.ndarray:
    """Mirror coordinate q into [0, size) without repeating the border."""
    if size == 1:
        return np.zeros_like(q)
    period = 2 * (size - 1)
    r = np.mod(np.abs(q), period)
    return np.where(r >= size, period - r, r)


def reflect_pad(x: np.ndarray, pad: int) -> np.ndarray:
    """Mirror-pad the two spatial axes by ``pad`` on every side."""
    if pad == 0:
        return x
    if pad > x.shape[1] - 1 or pad > x.shape[2] - 1:
        raise ValueError("reflect pad must be smaller than the spatial size")
    return np.pad(x, ((0, 0), (pad, pad), (pad, pad)), mode="reflect")


def reflect_pad_backward(dy: np.ndarray, pad: int, height: int, width: int) -> np.ndarray:
    """Adjoint of reflect_pad: fold border gradients back onto the source
    pixels they mirrored."""
    if pad == 0:
        return dy
    channels = dy.shape[0]
    rows = _reflect_index(np.arange(-pad, height + pad), height)
    cols = _reflect_index(np.arange(-pad, width + pad), width)
    flat = (rows[:, None] * width + cols[None, :]).reshape(-1)
    dx = np.zeros((channels, height * width))
    np.add.at(dx, (np.arange(channels)[:, None], flat[None, :]),
              dy.reshape(channels, -1))
    return dx.reshape(channels, height, width)


# ---------------------------------------------------------------------------
# Strided convolution (im2col)
# ---------------------------------------------------------------------------

def conv2d_forward(x: np.ndarray, weights: np.ndarray, bias: np.ndarray,
                   stride: int = 1):
    """Valid convolution of padded input x (Cin, H, W) with weights
    (Cout, Cin, kh, kw).  Returns (y, cache) with y (Cout, Ho, Wo)."""
    c_out, c_in, kh, kw = weights.shape
    if x.shape[0] != c_in:
        raise ValueError("input channel count does not match the kernel")
    windows = sliding_window_view(x, (kh, kw), axis=(1, 2))[:, ::stride, ::stride]
    h_out, w_out = windows.shape[1], windows.shape[2]
    # (Cin, Ho, Wo, kh, kw) -> (Cin*kh*kw, Ho*Wo)
    patches = windows.transpose(0, 3, 4, 1, 2).reshape(c_in * kh * kw, -1)
    y = weights.reshape(c_out, -1) @ patches + bias[:, None]
    cache = (x.shape, patches, weights, stride, (h_out, w_out))
    return y.reshape(c_out, h_out, w_out), cache


def conv2d_backward(cache, dy: np.ndarray):
    """Gradients of conv2d_forward; returns (dW, db, dx) with dx in the
    padded input geometry."""
    x_shape, patches, weights, stride, (h_out, w_out) = cache
    c_out, c_in, kh, kw = weights.shape
    dy_mat = dy.reshape(c_out, -1)
    d_weights = (dy_mat @ patches.T).reshape(weights.shape)
    d_bias = dy_mat.sum(axis=1)
    # col2im: redistribute window-gradient columns onto the input plane.
    cols = (weights.reshape(c_out, -1).T @ dy_mat).reshape(
        c_in, kh, kw, h_out, w_out
    )
    dx = np.zeros(x_shape)
    for u in range(kh):
        for v in range(kw):
            dx[:, u : u + stride * h_out : stride,
               v : v + stride * w_out : stride] += cols[:, u, v]
    return d_weights, d_bias, dx


# ---------------------------------------------------------------------------
# Transposed convolution (upsampling adjoint)
# ---------------------------------------------------------------------------

def conv_transpose2d_forward(x: np.ndarray, weights: np.ndarray,
                             bias: np.ndarray, stride: int = 2, pad: int = 1):
    """Transposed convolution; weights (Cin, Cout, kh, kw).

    Output size is (H-1)*stride - 2*pad + kh per axis, so the default
    4x4/stride-2/pad-1 kernel exactly doubles the spatial size.
    """
    c_in, c_out, kh, kw = weights.shape
    if x.shape[0] != c_in:
        raise ValueError("input channel count does not match the kernel")
    h_in, w_in = x.shape[1], x.shape[2]
    h_full = (h_in - 1) * stride + kh
    w_full = (w_in - 1) * stride + kw
    x_mat = x.reshape(c_in, -1)
    cols = (weights.reshape(c_in, -1).T @ x_mat).reshape(
        c_out, kh, kw, h_in, w_in
    )
    y_full = np.zeros((c_out, h_full, w_full))
    for u in range(kh):
        for v in range(kw):
            y_full[:, u : u + stride * h_in : stride,
                   v : v + stride * w_in : stride] += cols[:, u, v]
    y = y_full[:, pad : h_full - pad, pad : w_full - pad] + bias[:, None, None]
    cache = (x, weights, stride, pad)
    return y, cache


def conv_transpose2d_backward(cache, dy: np.ndarray):
    """Gradients of conv_transpose2d_forward: (dW, db, dx)."""
    x, weights, stride, pad = cache
    c_in, c_out, kh, kw = weights.shape
    h_in, w_in = x.shape[1], x.shape[2]
    h_full = (h_in - 1) * stride + kh
    w_full = (w_in - 1) * stride + kw
    dy_full = np.zeros((c_out, h_full, w_full))
    dy_full[:, pad : h_full - pad, pad : w_full - pad] = dy
    # Gather the windows each input pixel scattered into.
    gathered = np.empty((c_out, kh, kw, h_in, w_in))
    for u in range(kh):
        for v in range(kw):
            gathered[:, u, v] = dy_full[:, u : u + stride * h_in : stride,
                                        v : v + stride * w_in : stride]
    g_mat = gathered.reshape(c_out * kh * kw, -1)
    x_mat = x.reshape(c_in, -1)
    d_weights = (x_mat @ g_mat.T).reshape(weights.shape)
    d_bias = dy.sum(axis=(1, 2))
    dx = (weights.reshape(c_in, -1) @ g_mat).reshape(x.shape)
    return d_weights, d_bias, dx


# ---------------------------------------------------------------------------
# Pointwise helpers shared by the estimator blocks
# ---------------------------------------------------------------------------

def sigmoid(x: np.ndarray) -> np.ndarray:
    """Numerically stable logistic function."""
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def leaky_relu(x: np.ndarray, slope: float = 0.01) -> np.ndarray:
    return np.where(x > 0, x, slope * x)


def leaky_relu_grad(x: np.ndarray, slope: float = 0.01) -> np.ndarray:
    return np.where(x > 0, 1.0, slope)
