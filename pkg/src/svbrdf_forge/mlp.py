"""Small dense networks with hand-written reverse-mode gradients.

Everything is float64 numpy.  A layer computes act(x @ W.T + b) with the
activation either "leaky" (LeakyReLU, slope 0.01) or "linear".  Backward
passes consume the caches produced by the matching forward and return
exact gradients; the finite-difference tests hold them to 1e-4 relative
error.

Two factory nets cover the appearance model: a direction-encoding
compressor (297 -> 64 -> 32, both layers leaky) and the shared renderer
head (96 -> 128 x5 -> 3, hidden layers leaky, output linear).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

LEAKY_SLOPE = 0.01
ACT_LEAKY = "leaky"
ACT_LINEAR = "linear"

RENDERER_WIDTHS = (96, 128, 128, 128, 128, 128, 3)
ND_ENC_WIDTHS = (297, 64, 32)


def _apply_activation(pre: np.ndarray, activation: str, slope: float) -> np.ndarray:
    if activation == ACT_LINEAR:
        return pre
    if activation == ACT_LEAKY:
        return np.where(pre > 0, pre, slope * pre)
    raise ValueError(f"unknown activation: {activation!r}")


def _activation_grad(pre: np.ndarray, activation: str, slope: float) -> np.ndarray:
    if activation == ACT_LINEAR:
        return np.ones_like(pre)
    if activation == ACT_LEAKY:
        return np.where(pre > 0, 1.0, slope)
    raise ValueError(f"unknown activation: {activation!r}")


@dataclass
class DenseLayer:
    """Fully connected layer; weights shape (out, in), bias shape (out,)."""

    weights: np.ndarray
    bias: np.ndarray
    activation: str = ACT_LEAKY
    slope: float = LEAKY_SLOPE

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.bias = np.asarray(self.bias, dtype=np.float64)
        if self.weights.ndim != 2:
            raise ValueError("weights must be 2-D (out, in)")
        if self.bias.shape != (self.weights.shape[0],):
            raise ValueError("bias length must match the output width")
        _apply_activation(np.zeros(1), self.activation, self.slope)  # validates the tag

    @property
    def in_dim(self) -> int:
        return self.weights.shape[1]

    @property
    def out_dim(self) -> int:
        return self.weights.shape[0]

    def forward(self, x: np.ndarray) -> np.ndarray:
        pre = x @ self.weights.T + self.bias
        return _apply_activation(pre, self.activation, self.slope)

    def forward_cached(self, x: np.ndarray):
        """Forward keeping (x, preactivation) for the backward pass."""
        pre = x @ self.weights.T + self.bias
        return _apply_activation(pre, self.activation, self.slope), (x, pre)

    def backward(self, cache, dy: np.ndarray):
        """Gradients for one cached forward.

        Returns (dW, db, dx); batch dimensions of dy are summed into the
        parameter gradients.
        """
        x, pre = cache
        dpre = dy * _activation_grad(pre, self.activation, self.slope)
        flat_x = x.reshape(-1, self.in_dim)
        flat_dpre = dpre.reshape(-1, self.out_dim)
        d_weights = flat_dpre.T @ flat_x
        d_bias = flat_dpre.sum(axis=0)
        dx = dpre @ self.weights
        return d_weights, d_bias, dx


@dataclass
class MlpNet:
    """Plain layer stack; parameters are exposed as a flat list of arrays
    so optimizers and the serialization container can stay generic."""

    layers: List[DenseLayer] = field(default_factory=list)

    @property
    def in_dim(self) -> int:
        return self.layers[0].in_dim

    @property
    def out_dim(self) -> int:
        return self.layers[-1].out_dim

    @property
    def leaky_slope(self) -> float:
        """Slope shared by the net's leaky layers (factories keep it uniform)."""
        for layer in self.layers:
            if layer.activation == ACT_LEAKY:
                return layer.slope
        return LEAKY_SLOPE

    def param_arrays(self) -> List[np.ndarray]:
        out: List[np.ndarray] = []
        for layer in self.layers:
            out.append(layer.weights)
            out.append(layer.bias)
        return out

    def set_param_arrays(self, arrays: Sequence[np.ndarray]) -> None:
        if len(arrays) != 2 * len(self.layers):
            raise ValueError("parameter array count does not match the net")
        for k, layer in enumerate(self.layers):
            w, b = arrays[2 * k], arrays[2 * k + 1]
            if w.shape != layer.weights.shape or b.shape != layer.bias.shape:
                raise ValueError("parameter shape mismatch")
            layer.weights = np.asarray(w, dtype=np.float64)
            layer.bias = np.asarray(b, dtype=np.float64)

    def param_count(self) -> int:
        return sum(a.size for a in self.param_arrays())

    def forward(self, x: np.ndarray) -> np.ndarray:
        for layer in self.layers:
            x = layer.forward(x)
        return x

    def forward_cached(self, x: np.ndarray):
        caches = []
        for layer in self.layers:
            x, cache = layer.forward_cached(x)
            caches.append(cache)
        return x, caches

    def backward(self, caches, dy: np.ndarray):
        """Returns (per-layer (dW, db) list in layer order, dx)."""
        grads: List[Tuple[np.ndarray, np.ndarray]] = [None] * len(self.layers)
        for k in range(len(self.layers) - 1, -1, -1):
            d_w, d_b, dy = self.layers[k].backward(caches[k], dy)
            grads[k] = (d_w, d_b)
        return grads, dy


def backward(net: MlpNet, x: np.ndarray, out_grad: np.ndarray):
    """Exact reverse-mode derivatives of net.forward(x).

    Runs the cached forward internally.  Returns (weight_grads, bias_grads,
    input_grad) with the weight/bias lists in layer order; batch dimensions
    of out_grad are summed into the parameter gradients.
    """
    _, caches = net.forward_cached(np.asarray(x, dtype=np.float64))
    pairs, dx = net.backward(caches, np.asarray(out_grad, dtype=np.float64))
    weight_grads = [p[0] for p in pairs]
    bias_grads = [p[1] for p in pairs]
    return weight_grads, bias_grads, dx


def he_dense(in_dim: int, out_dim: int, activation: str, gen: np.random.Generator,
             slope: float = LEAKY_SLOPE) -> DenseLayer:
    """He-normal initialized layer: weight std sqrt(2 / fan_in), zero bias."""
    std = np.sqrt(2.0 / in_dim)
    weights = gen.normal(0.0, std, size=(out_dim, in_dim))
    return DenseLayer(weights, np.zeros(out_dim), activation, slope)


def make_mlp(widths: Sequence[int], gen: np.random.Generator,
             hidden_activation: str = ACT_LEAKY,
             final_activation: str = ACT_LINEAR,
             slope: float = LEAKY_SLOPE) -> MlpNet:
    layers = []
    for k in range(len(widths) - 1):
        act = final_activation if k == len(widths) - 2 else hidden_activation
        layers.append(he_dense(widths[k], widths[k + 1], act, gen, slope))
    return MlpNet(layers)


def make_renderer_net(gen: np.random.Generator, in_dim: int = RENDERER_WIDTHS[0]) -> MlpNet:
    """Shared renderer head: 96 in (64 material + 32 encoded directions),
    five leaky hidden layers of width 128, linear 3-channel output in the
    log radiance domain."""
    return make_mlp((in_dim,) + RENDERER_WIDTHS[1:], gen)


def make_nd_enc_net(gen: np.random.Generator, in_dim: int = ND_ENC_WIDTHS[0],
                    out_dim: int = ND_ENC_WIDTHS[-1]) -> MlpNet:
    """Direction-encoding compressor: 297 -> 64 -> 32, leaky throughout."""
    return make_mlp((in_dim,) + ND_ENC_WIDTHS[1:-1] + (out_dim,), gen,
                    final_activation=ACT_LEAKY)
