"""Binary containers for trained weights and latent maps.

Two formats, both little-endian and written atomically:

  * NBRF ("NBRF" magic + u32 version): named sections holding networks.
    MLP sections store per-layer activation tag, leaky slope, dimensions,
    then row-major float32 weights and biases.  The estimator section
    stores its architecture numbers followed by every parameter array
    with explicit dimensions.
  * NPMP ("NPMP" magic): a 16-byte header (magic, H, W, C as u32) then
    H*W*C float32 latent values in raster order.

Weights are stored as float32; loading restores float64 working arrays,
so save/load/save is byte stable.
"""

from __future__ import annotations

import struct
from typing import Dict, Optional

import numpy as np

from .estimator import UNet, UNetSpec
from .fileio import atomic_write_bytes
from .mlp import DenseLayer, MlpNet
from .nbrdf import NeuralParamMap

NBRF_MAGIC = b"NBRF"
NBRF_VERSION = 1
NPMP_MAGIC = b"NPMP"

SECTION_RENDERER = "renderer"
SECTION_ND_ENC = "nd_enc"
SECTION_UNET = "unet"
_KNOWN_SECTIONS = (SECTION_RENDERER, SECTION_ND_ENC, SECTION_UNET)

_KIND_MLP = "mlp"
_KIND_UNET = "unet"


def _pack_str(s: str) -> bytes:
    data = s.encode("utf-8")
    return struct.pack("<I", len(data)) + data


def _pack_f32(a: np.ndarray) -> bytes:
    return np.ascontiguousarray(a, dtype="<f4").tobytes()


class _Reader:
    """Sequential little-endian cursor over a binary payload."""

    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise ValueError("container truncated")
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def f32(self) -> float:
        return struct.unpack("<f", self.take(4))[0]

    def string(self) -> str:
        return self.take(self.u32()).decode("utf-8")

    def f32_array(self, shape) -> np.ndarray:
        count = int(np.prod(shape))
        raw = self.take(count * 4)
        return np.frombuffer(raw, dtype="<f4").astype(np.float64).reshape(shape)


# ---------------------------------------------------------------------------
# NBRF: network weights
# ---------------------------------------------------------------------------

def _encode_mlp(name: str, net: MlpNet) -> bytes:
    parts = [_pack_str(name), _pack_str(_KIND_MLP),
             struct.pack("<I", len(net.layers))]
    for layer in net.layers:
        parts.append(_pack_str(layer.activation))
        parts.append(struct.pack("<f", layer.slope))
        parts.append(struct.pack("<II", layer.out_dim, layer.in_dim))
        parts.append(_pack_f32(layer.weights))
        parts.append(_pack_f32(layer.bias))
    return b"".join(parts)


def _decode_mlp(reader: _Reader) -> MlpNet:
    layer_count = reader.u32()
    layers = []
    for _ in range(layer_count):
        activation = reader.string()
        slope = reader.f32()
        if not np.isfinite(slope) or slope < 0.0 or slope >= 1.0:
            raise ValueError(f"unsupported leaky slope: {slope}")
        out_dim = reader.u32()
        in_dim = reader.u32()
        weights = reader.f32_array((out_dim, in_dim))
        bias = reader.f32_array((out_dim,))
        layers.append(DenseLayer(weights, bias, activation, float(slope)))
    return MlpNet(layers)


def _encode_unet(unet: UNet) -> bytes:
    spec = unet.spec
    parts = [_pack_str(SECTION_UNET), _pack_str(_KIND_UNET),
             struct.pack("<5I", spec.in_channels, spec.out_channels,
                         spec.base_width, spec.depth, spec.stem_kernel)]
    arrays = unet.param_arrays()
    parts.append(struct.pack("<I", len(arrays)))
    for a in arrays:
        parts.append(struct.pack("<I", a.ndim))
        parts.append(struct.pack(f"<{a.ndim}I", *a.shape))
        parts.append(_pack_f32(a))
    return b"".join(parts)


def _decode_unet(reader: _Reader) -> UNet:
    in_ch, out_ch, base, depth, stem = struct.unpack("<5I", reader.take(20))
    spec = UNetSpec(in_channels=in_ch, out_channels=out_ch, base_width=base,
                    depth=depth, stem_kernel=stem)
    unet = UNet(spec, np.random.Generator(np.random.PCG64(0)))
    count = reader.u32()
    targets = unet.param_arrays()
    if count != len(targets):
        raise ValueError("estimator section array count mismatch")
    for target in targets:
        ndim = reader.u32()
        shape = struct.unpack(f"<{ndim}I", reader.take(4 * ndim))
        if shape != target.shape:
            raise ValueError("estimator parameter shape mismatch")
        target[...] = reader.f32_array(shape)
    return unet


def save_networks(path, renderer: Optional[MlpNet] = None,
                  nd_enc: Optional[MlpNet] = None,
                  unet: Optional[UNet] = None) -> None:
    """Write the given networks as named sections; at least one required."""
    sections = []
    if renderer is not None:
        sections.append(_encode_mlp(SECTION_RENDERER, renderer))
    if nd_enc is not None:
        sections.append(_encode_mlp(SECTION_ND_ENC, nd_enc))
    if unet is not None:
        sections.append(_encode_unet(unet))
    if not sections:
        raise ValueError("nothing to save")
    payload = NBRF_MAGIC + struct.pack("<II", NBRF_VERSION, len(sections))
    atomic_write_bytes(path, payload + b"".join(sections))


def load_networks(path) -> Dict[str, object]:
    """Read an NBRF file back to {section name: network}."""
    with open(path, "rb") as handle:
        data = handle.read()
    if data[:4] != NBRF_MAGIC:
        raise ValueError("not an NBRF file")
    reader = _Reader(data)
    reader.take(4)
    version = reader.u32()
    if version != NBRF_VERSION:
        raise ValueError(f"unsupported NBRF version: {version}")
    section_count = reader.u32()
    out: Dict[str, object] = {}
    for _ in range(section_count):
        name = reader.string()
        kind = reader.string()
        if name not in _KNOWN_SECTIONS:
            raise ValueError(f"unknown NBRF section: {name!r}")
        if name in out:
            raise ValueError(f"duplicate NBRF section: {name!r}")
        if kind == _KIND_MLP:
            out[name] = _decode_mlp(reader)
        elif kind == _KIND_UNET:
            out[name] = _decode_unet(reader)
        else:
            raise ValueError(f"unknown NBRF section kind: {kind!r}")
    if reader.pos != len(data):
        raise ValueError("trailing bytes after the last NBRF section")
    return out


# ---------------------------------------------------------------------------
# NPMP: per-pixel latent maps
# ---------------------------------------------------------------------------

def save_param_map(path, param_map: NeuralParamMap) -> None:
    """16-byte header (magic, H, W, C) + float32 raster."""
    v = param_map.values
    header = NPMP_MAGIC + struct.pack(
        "<III", param_map.height, param_map.width, param_map.channels
    )
    atomic_write_bytes(path, header + _pack_f32(v))


def load_param_map(path) -> NeuralParamMap:
    with open(path, "rb") as handle:
        data = handle.read()
    if data[:4] != NPMP_MAGIC:
        raise ValueError("not an NPMP file")
    if len(data) < 16:
        raise ValueError("NPMP header truncated")
    h, w, c = struct.unpack("<III", data[4:16])
    expected = 16 + h * w * c * 4
    if len(data) != expected:
        raise ValueError("NPMP payload size mismatch")
    values = np.frombuffer(data[16:], dtype="<f4").astype(np.float64)
    return NeuralParamMap(values.reshape(h, w, c))
