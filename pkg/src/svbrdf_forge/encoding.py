"""Sinusoidal positional encoding of direction triples.

A configuration (light dir, view dir, half vector) is flattened to 9 raw
components and augmented with sin/cos pairs at 16 octave frequencies:
for each component x and each k in 0..15, sin(2^k * pi * x) and
cos(2^k * pi * x).  That is 9 * 16 * 2 = 288 sinusoidal values, 297 total.

Layout is direction-major: [i, o, h, enc(i), enc(o), enc(h)], each enc
block 96 wide with the component-major order (x freqs, y freqs, z freqs,
sin/cos interleaved).  Swapping i and o therefore permutes whole blocks,
which the reciprocity tests rely on.

The raw 297-vector is squeezed to a short code by a small compressor net
before it reaches the renderer; ``nd_enc_forward`` runs that compression.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

N_FREQS = 16
RAW_DIM = 9
BLOCK_DIM = 3 * N_FREQS * 2  # 96 per direction
ENCODED_DIM = RAW_DIM + 3 * BLOCK_DIM  # 297
COMPRESSED_DIM = 32


@dataclass(frozen=True)
class EncodingConfig:
    """Sizing of the direction encoding stage.

    frequency_count octaves 2^0..2^(n-1) feed the sinusoidal expansion;
    compressed_dim is the width the compressor net squeezes the raw
    encoding down to before it is concatenated with material parameters.
    """

    frequency_count: int = N_FREQS
    compressed_dim: int = COMPRESSED_DIM

    def __post_init__(self) -> None:
        if self.frequency_count < 1:
            raise ValueError("frequency_count must be at least 1")
        if self.compressed_dim < 1:
            raise ValueError("compressed_dim must be at least 1")

    @property
    def block_dim(self) -> int:
        return 3 * self.frequency_count * 2

    @property
    def encoded_dim(self) -> int:
        return RAW_DIM + 3 * self.block_dim


def _encode_block(d: np.ndarray, frequency_count: int) -> np.ndarray:
    """Sin/cos expansion of one direction; d has shape (..., 3).

    Returns (..., 6 * frequency_count): per component, interleaved sin/cos
    over frequencies 2^0..2^(n-1) times pi.
    """
    freqs = (2.0 ** np.arange(frequency_count)) * np.pi  # (n,)
    phase = d[..., :, None] * freqs  # (..., 3, n)
    pairs = np.stack([np.sin(phase), np.cos(phase)], axis=-1)  # (..., 3, n, 2)
    return pairs.reshape(*d.shape[:-1], 6 * frequency_count)


def encode_directions(omega_i, omega_o, half, config: EncodingConfig = EncodingConfig()):
    """Encode a configuration of unit directions to the network input vector.

    Accepts broadcast-compatible arrays of shape (..., 3) and returns
    (..., 297) float64.  The leading 9 entries are the raw components in
    i, o, h order; the remaining 288 are the per-direction sinusoidal
    blocks in the same order.
    """
    omega_i = np.asarray(omega_i, dtype=np.float64)
    omega_o = np.asarray(omega_o, dtype=np.float64)
    half = np.asarray(half, dtype=np.float64)
    for name, d in (("omega_i", omega_i), ("omega_o", omega_o), ("half", half)):
        if d.shape[-1] != 3:
            raise ValueError(f"{name} must have a trailing dimension of 3")
    raw = np.concatenate(
        np.broadcast_arrays(omega_i, omega_o, half), axis=-1
    )
    blocks = [
        _encode_block(d, config.frequency_count) for d in (omega_i, omega_o, half)
    ]
    blocks = np.broadcast_arrays(*blocks)
    return np.concatenate([raw, *blocks], axis=-1)


def nd_enc_forward(encoded: np.ndarray, net) -> np.ndarray:
    """Compress raw direction encodings through the compressor net.

    encoded has shape (..., encoded_dim); the result is (..., out) where
    out is the net's final width (32 for the stock compressor).
    """
    encoded = np.asarray(encoded, dtype=np.float64)
    expect = net.layers[0].weights.shape[1]
    if encoded.shape[-1] != expect:
        raise ValueError(
            f"encoded width {encoded.shape[-1]} does not match net input {expect}"
        )
    return net.forward(encoded)


def swap_io(encoded: np.ndarray, config: EncodingConfig = EncodingConfig()) -> np.ndarray:
    """Exchange the light and view slots of an encoded vector.

    Pure block permutation; used by tests to state reciprocity directly on
    network inputs.
    """
    b = config.block_dim
    out = np.array(encoded, copy=True)
    out[..., 0:3] = encoded[..., 3:6]
    out[..., 3:6] = encoded[..., 0:3]
    out[..., 9 : 9 + b] = encoded[..., 9 + b : 9 + 2 * b]
    out[..., 9 + b : 9 + 2 * b] = encoded[..., 9 : 9 + b]
    return out
