"""Single-image material estimator: a small U-Net from a 4-channel input
(log photo RGB + half-angle cosine) to a per-pixel latent map.

The encoder uses gated convolutions (feature path modulated by a learned
sigmoid gate) in residual blocks, downsampling with 2x2 stride-2 convs;
the decoder mirrors it with plain residual blocks, 4x4 stride-2
transposed-conv upsampling, and concatenated skip connections reduced by
a 3x3 merge conv.  Spatial convs pad by reflection.  Every module keeps
its forward cache and implements an exact backward pass, which the
finite-difference suite checks end to end.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .convops import (
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
from .nbrdf import NeuralParamMap
from .render import build_estimator_input

ACT_LEAKY = "leaky"
ACT_LINEAR = "linear"


@dataclass(frozen=True)
class ConvLayerSpec:
    """Geometry of one convolution unit; ``pad None`` means same-size
    (kernel-1)//2 reflection padding."""

    in_channels: int
    out_channels: int
    kernel: int
    stride: int = 1
    pad: Optional[int] = None
    activation: str = ACT_LEAKY
    gated: bool = False
    transposed: bool = False

    def resolved_pad(self) -> int:
        return (self.kernel - 1) // 2 if self.pad is None else self.pad

    def build(self, gen: np.random.Generator):
        if self.transposed:
            if self.gated:
                raise ValueError("gated transposed convs are not supported")
            return UpConvUnit(self, gen)
        if self.gated:
            return GatedConvUnit(self, gen)
        return ConvUnit(self, gen)


def _he_kernel(shape, gen: np.random.Generator) -> np.ndarray:
    fan_in = int(np.prod(shape[1:]))
    return gen.normal(0.0, np.sqrt(2.0 / fan_in), size=shape)


class ConvUnit:
    """Reflect-padded convolution with an optional leaky activation."""

    def __init__(self, spec: ConvLayerSpec, gen: np.random.Generator):
        if spec.activation not in (ACT_LEAKY, ACT_LINEAR):
            raise ValueError(f"unknown activation: {spec.activation!r}")
        self.spec = spec
        k = spec.kernel
        self.weights = _he_kernel((spec.out_channels, spec.in_channels, k, k), gen)
        self.bias = np.zeros(spec.out_channels)
        self.d_weights = np.zeros_like(self.weights)
        self.d_bias = np.zeros_like(self.bias)

    def forward(self, x: np.ndarray) -> np.ndarray:
        pad = self.spec.resolved_pad()
        self._in_hw = x.shape[1:]
        xp = reflect_pad(x, pad)
        pre, self._cache = conv2d_forward(xp, self.weights, self.bias,
                                          self.spec.stride)
        self._pre = pre
        if self.spec.activation == ACT_LEAKY:
            return leaky_relu(pre)
        return pre

    def backward(self, dy: np.ndarray) -> np.ndarray:
        if self.spec.activation == ACT_LEAKY:
            dy = dy * leaky_relu_grad(self._pre)
        self.d_weights, self.d_bias, dxp = conv2d_backward(self._cache, dy)
        return reflect_pad_backward(dxp, self.spec.resolved_pad(), *self._in_hw)

    def param_arrays(self) -> List[np.ndarray]:
        return [self.weights, self.bias]

    def grad_arrays(self) -> List[np.ndarray]:
        return [self.d_weights, self.d_bias]


class GatedConvUnit:
    """Gated convolution: leaky(feature conv) * sigmoid(gate conv).

    The gate lets the encoder attenuate pixels whose photometric cues are
    unreliable (saturated highlights, shadowed regions) without committing
    a hard mask.
    """

    def __init__(self, spec: ConvLayerSpec, gen: np.random.Generator):
        if spec.stride != 1:
            raise ValueError("gated units are stride-1 only")
        self.spec = spec
        k = spec.kernel
        shape = (spec.out_channels, spec.in_channels, k, k)
        self.weights = _he_kernel(shape, gen)
        self.bias = np.zeros(spec.out_channels)
        self.gate_weights = _he_kernel(shape, gen)
        self.gate_bias = np.zeros(spec.out_channels)
        self.d_weights = np.zeros_like(self.weights)
        self.d_bias = np.zeros_like(self.bias)
        self.d_gate_weights = np.zeros_like(self.gate_weights)
        self.d_gate_bias = np.zeros_like(self.gate_bias)

    def forward(self, x: np.ndarray) -> np.ndarray:
        pad = self.spec.resolved_pad()
        self._in_hw = x.shape[1:]
        xp = reflect_pad(x, pad)
        pre_f, self._cache_f = conv2d_forward(xp, self.weights, self.bias)
        pre_g, self._cache_g = conv2d_forward(xp, self.gate_weights, self.gate_bias)
        self._pre_f = pre_f
        self._feat = leaky_relu(pre_f)
        self._gate = sigmoid(pre_g)
        return self._feat * self._gate

    def backward(self, dy: np.ndarray) -> np.ndarray:
        d_pre_f = dy * self._gate * leaky_relu_grad(self._pre_f)
        d_pre_g = dy * self._feat * self._gate * (1.0 - self._gate)
        self.d_weights, self.d_bias, dxp_f = conv2d_backward(self._cache_f, d_pre_f)
        self.d_gate_weights, self.d_gate_bias, dxp_g = conv2d_backward(
            self._cache_g, d_pre_g
        )
        return reflect_pad_backward(dxp_f + dxp_g, self.spec.resolved_pad(),
                                    *self._in_hw)

    def param_arrays(self) -> List[np.ndarray]:
        return [self.weights, self.bias, self.gate_weights, self.gate_bias]

    def grad_arrays(self) -> List[np.ndarray]:
        return [self.d_weights, self.d_bias, self.d_gate_weights, self.d_gate_bias]


class UpConvUnit:
    """4x4 stride-2 transposed convolution (zero padded) that doubles the
    spatial size, with a leaky activation."""

    def __init__(self, spec: ConvLayerSpec, gen: np.random.Generator):
        self.spec = spec
        k = spec.kernel
        self.weights = _he_kernel((spec.in_channels, spec.out_channels, k, k), gen)
        self.bias = np.zeros(spec.out_channels)
        self.d_weights = np.zeros_like(self.weights)
        self.d_bias = np.zeros_like(self.bias)

    def forward(self, x: np.ndarray) -> np.ndarray:
        pre, self._cache = conv_transpose2d_forward(
            x, self.weights, self.bias, self.spec.stride, self.spec.pad
        )
        self._pre = pre
        if self.spec.activation == ACT_LEAKY:
            return leaky_relu(pre)
        return pre

    def backward(self, dy: np.ndarray) -> np.ndarray:
        if self.spec.activation == ACT_LEAKY:
            dy = dy * leaky_relu_grad(self._pre)
        self.d_weights, self.d_bias, dx = conv_transpose2d_backward(self._cache, dy)
        return dx

    def param_arrays(self) -> List[np.ndarray]:
        return [self.weights, self.bias]

    def grad_arrays(self) -> List[np.ndarray]:
        return [self.d_weights, self.d_bias]


class ResidualBlock:
    """x + conv(conv(x)), both units 3x3 same-size; gated in the encoder,
    plain in the decoder."""

    def __init__(self, channels: int, gen: np.random.Generator, gated: bool):
        spec = ConvLayerSpec(channels, channels, 3, gated=gated)
        self.unit1 = spec.build(gen)
        self.unit2 = spec.build(gen)

    def forward(self, x: np.ndarray) -> np.ndarray:
        return x + self.unit2.forward(self.unit1.forward(x))

    def backward(self, dy: np.ndarray) -> np.ndarray:
        return dy + self.unit1.backward(self.unit2.backward(dy))

    def param_arrays(self) -> List[np.ndarray]:
        return self.unit1.param_arrays() + self.unit2.param_arrays()

    def grad_arrays(self) -> List[np.ndarray]:
        return self.unit1.grad_arrays() + self.unit2.grad_arrays()


@dataclass(frozen=True)
class UNetSpec:
    """Architecture knobs; the default matches the estimator used on desk
    captures, the tests shrink base_width for finite-difference speed."""

    in_channels: int = 4
    out_channels: int = 64
    base_width: int = 16
    depth: int = 3
    stem_kernel: int = 7

    def encoder_widths(self) -> List[int]:
        return [self.base_width * 2**i for i in range(self.depth)]

    @property
    def bottleneck_width(self) -> int:
        return self.base_width * 2**self.depth


class UNet:
    """Gated-encoder U-Net over a single (C, H, W) image; H and W must be
    divisible by 2**depth."""

    def __init__(self, spec: UNetSpec, gen: np.random.Generator):
        self.spec = spec
        widths = spec.encoder_widths()
        down_out = widths[1:] + [spec.bottleneck_width]
        self.stem = ConvLayerSpec(spec.in_channels, widths[0],
                                  spec.stem_kernel).build(gen)
        self.enc_blocks = [ResidualBlock(w, gen, gated=True) for w in widths]
        self.downs = [
            ConvLayerSpec(w, w2, 2, stride=2, pad=0).build(gen)
            for w, w2 in zip(widths, down_out)
        ]
        self.bottleneck = ResidualBlock(spec.bottleneck_width, gen, gated=True)
        up_in = [spec.bottleneck_width] + widths[:0:-1]
        up_out = widths[::-1]
        self.ups = [
            ConvLayerSpec(ci, co, 4, stride=2, pad=1, transposed=True).build(gen)
            for ci, co in zip(up_in, up_out)
        ]
        self.merges = [
            ConvLayerSpec(2 * w, w, 3).build(gen) for w in up_out
        ]
        self.dec_blocks = [ResidualBlock(w, gen, gated=False) for w in up_out]
        self.head = ConvLayerSpec(widths[0], spec.out_channels, 3,
                                  activation=ACT_LINEAR).build(gen)

    def _modules(self) -> list:
        mods = [self.stem]
        for blk, down in zip(self.enc_blocks, self.downs):
            mods.extend((blk, down))
        mods.append(self.bottleneck)
        for up, merge, blk in zip(self.ups, self.merges, self.dec_blocks):
            mods.extend((up, merge, blk))
        mods.append(self.head)
        return mods

    def param_arrays(self) -> List[np.ndarray]:
        out: List[np.ndarray] = []
        for mod in self._modules():
            out.extend(mod.param_arrays())
        return out

    def grad_arrays(self) -> List[np.ndarray]:
        out: List[np.ndarray] = []
        for mod in self._modules():
            out.extend(mod.grad_arrays())
        return out

    def param_count(self) -> int:
        return sum(a.size for a in self.param_arrays())

    def forward(self, x: np.ndarray) -> np.ndarray:
        factor = 2**self.spec.depth
        if x.shape[1] % factor or x.shape[2] % factor:
            raise ValueError(f"spatial size must be divisible by {factor}")
        h = self.stem.forward(x)
        skips = []
        for blk, down in zip(self.enc_blocks, self.downs):
            h = blk.forward(h)
            skips.append(h)
            h = down.forward(h)
        h = self.bottleneck.forward(h)
        for up, merge, blk, skip in zip(self.ups, self.merges,
                                        self.dec_blocks, reversed(skips)):
            h = up.forward(h)
            h = merge.forward(np.concatenate([h, skip], axis=0))
            h = blk.forward(h)
        return self.head.forward(h)

    def backward(self, dy: np.ndarray) -> np.ndarray:
        d = self.head.backward(dy)
        skip_grads: List[np.ndarray] = [None] * len(self.enc_blocks)
        for j in range(len(self.ups) - 1, -1, -1):
            width = self.merges[j].spec.out_channels
            d = self.dec_blocks[j].backward(d)
            d_cat = self.merges[j].backward(d)
            skip_grads[len(self.enc_blocks) - 1 - j] = d_cat[width:]
            d = self.ups[j].backward(d_cat[:width])
        d = self.bottleneck.backward(d)
        for i in range(len(self.enc_blocks) - 1, -1, -1):
            d = self.downs[i].backward(d)
            d = d + skip_grads[i]
            d = self.enc_blocks[i].backward(d)
        return self.stem.backward(d)


def make_unet(gen: np.random.Generator, spec: UNetSpec = UNetSpec()) -> UNet:
    return UNet(spec, gen)


def estimate(photo_input: np.ndarray, unet: UNet) -> NeuralParamMap:
    """One-shot latent estimate from a 4-channel capture raster.

    ``photo_input`` is (H, W, 4): log luminance plus the capture-geometry
    channels produced by build_estimator_input.  The result is a warm
    start for the fitting loop.
    """
    photo_input = np.asarray(photo_input, dtype=np.float64)
    if photo_input.ndim != 3 or photo_input.shape[2] != unet.spec.in_channels:
        raise ValueError(
            f"estimator input must be (H, W, {unet.spec.in_channels})"
        )
    y = unet.forward(photo_input.transpose(2, 0, 1))
    return NeuralParamMap(y.transpose(1, 2, 0))


def estimate_from_photo(photo_log: np.ndarray, light, view,
                        unet: UNet) -> NeuralParamMap:
    """Latent estimate straight from a log-domain photo and its capture
    geometry; builds the 4-channel raster and calls estimate."""
    return estimate(build_estimator_input(photo_log, light, view), unet)
