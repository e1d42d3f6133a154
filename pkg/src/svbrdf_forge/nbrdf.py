"""Joint fitting of a per-pixel neural material map and a shared renderer.

The appearance model is three pieces optimized together against rendered
exemplars in the log radiance domain:

  * a per-pixel latent map (H x W x 64), zero initialized;
  * a direction compressor (297 -> 64 -> 32) applied to the sinusoidal
    encoding of (light dir, view dir, half vector);
  * a shared renderer head (64 + 32 -> 128 x5 -> 3) emitting log RGB.

The data term is an L1 distance over a weighted random subset of pixels
(60% by default).  Masks are redrawn at epoch boundaries, so gradients
within an epoch descend one fixed objective; the learning rate also
decays per epoch.  All randomness flows from a single seed, which makes
fits bit-reproducible.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .encoding import EncodingConfig, encode_directions, nd_enc_forward
from .geometry import PointSource, SurfaceGrid, direction_field, half_vector
from .mlp import MlpNet, make_nd_enc_net, make_renderer_net
from .radiometry import log_compress
from .sampling import ExemplarConfig, RngStream, identity_config

PARAM_CHANNELS = 64
MASK_MODES = ("inv_param_norm", "sq_rgb_norm", "none")
MASK_WEIGHT_EPS = 1e-6
COS_FLOOR = 1e-4
CONFIG_VERSION = 1

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


# ---------------------------------------------------------------------------
# Latent map and fit configuration
# ---------------------------------------------------------------------------

@dataclass
class NeuralParamMap:
    """Per-pixel material latent vectors, shape (H, W, C) float64."""

    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 3:
            raise ValueError("param map must be 3-D (H, W, C)")

    @classmethod
    def zeros(cls, height: int, width: int, channels: int = PARAM_CHANNELS):
        return cls(np.zeros((height, width, channels)))

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def channels(self) -> int:
        return self.values.shape[2]


@dataclass
class FitConfig:
    """Optimization settings; serializes to versioned JSON.

    ``lr_decay`` is the per-epoch multiplicative drop (0.015 means the
    rate shrinks by 1.5% each epoch); an epoch is ``epoch_iters``
    iterations and is also the mask refresh interval.
    """

    learning_rate: float = 1e-4
    lr_decay: float = 0.015
    exemplar_count: int = 8
    iterations: int = 2000
    epoch_iters: int = 100
    mask_fraction: float = 0.6
    mask_mode: str = "inv_param_norm"
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if not 0.0 <= self.lr_decay < 1.0:
            raise ValueError("lr_decay must lie in [0, 1)")
        if self.exemplar_count < 1 or self.iterations < 1 or self.epoch_iters < 1:
            raise ValueError("counts must be >= 1")
        if not 0.0 < self.mask_fraction <= 1.0:
            raise ValueError("mask_fraction must lie in (0, 1]")
        if self.mask_mode not in MASK_MODES:
            raise ValueError(f"mask_mode must be one of {MASK_MODES}")

    def to_json(self) -> str:
        data = {"version": CONFIG_VERSION}
        data.update(
            {name: getattr(self, name) for name in self.__dataclass_fields__}
        )
        return json.dumps(data, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "FitConfig":
        """Strict parse: the version must match and every field must be a
        known setting, so typos fail loudly instead of silently using a
        default."""
        data = json.loads(text)
        if not isinstance(data, dict):
            raise ValueError("fit config must be a JSON object")
        version = data.pop("version", None)
        if version != CONFIG_VERSION:
            raise ValueError(f"unsupported fit config version: {version!r}")
        known = set(cls.__dataclass_fields__)
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValueError(f"unknown fit config fields: {unknown}")
        return cls(**data)


# ---------------------------------------------------------------------------
# Model evaluation
# ---------------------------------------------------------------------------

def render_pixel(params, enc, net: MlpNet):
    """Log-RGB prediction for latent vectors and compressed encodings.

    ``params`` has shape (..., 64) and ``enc`` (..., 32); they are
    concatenated and pushed through the renderer head.  The output is
    log(1 + radiance) with the incident cosine baked in.
    """
    params = np.asarray(params, dtype=np.float64)
    enc = np.asarray(enc, dtype=np.float64)
    if params.shape[-1] + enc.shape[-1] != net.in_dim:
        raise ValueError(
            f"param width {params.shape[-1]} + encoding width {enc.shape[-1]}"
            f" does not match renderer input {net.in_dim}"
        )
    lead = np.broadcast_shapes(params.shape[:-1], enc.shape[:-1])
    params_b = np.broadcast_to(params, lead + params.shape[-1:])
    enc_b = np.broadcast_to(enc, lead + enc.shape[-1:])
    return net.forward(np.concatenate([params_b, enc_b], axis=-1))


def render_pixel_directions(params, omega_i, omega_o, half,
                            renderer: MlpNet, nd_enc: MlpNet,
                            enc_config: EncodingConfig = EncodingConfig()):
    """Log-RGB prediction straight from unit directions.

    Convenience composition: sinusoidal encoding, compressor, renderer.
    """
    enc = encode_directions(omega_i, omega_o, half, enc_config)
    return render_pixel(params, nd_enc_forward(enc, nd_enc), renderer)


def as_brdf(params, omega_i, omega_o, renderer: MlpNet, nd_enc: MlpNet,
            normal=(0.0, 0.0, 1.0),
            enc_config: EncodingConfig = EncodingConfig()):
    """Reflectance value of a fitted material pixel.

    The network predicts log(1 + radiance) where the radiance already
    includes the incident cosine against the material's shading normal,
    so the BRDF is recovered by expanding and dividing that cosine out
    (floored at 1e-4 to keep grazing values finite).  Clamped to be
    non-negative; directions at or below the floor return 0.
    """
    normal = np.asarray(normal, dtype=np.float64)
    omega_i = np.asarray(omega_i, dtype=np.float64)
    half = half_vector(omega_i, omega_o)
    y = render_pixel_directions(params, omega_i, omega_o, half,
                                renderer, nd_enc, enc_config)
    radiance = np.maximum(np.expm1(y), 0.0)
    cos_i = np.sum(normal * omega_i, axis=-1)
    value = radiance / np.maximum(cos_i, COS_FLOOR)[..., None]
    return np.where((cos_i >= COS_FLOOR)[..., None], value, 0.0)


def config_direction_fields(height: int, width: int, config: ExemplarConfig):
    """Per-pixel unit (light, view, half) fields for one configuration,
    each flattened to (H*W, 3)."""
    grid = SurfaceGrid(width=width, height=height)
    omega_i = direction_field(grid, PointSource(config.light_position))
    omega_o = direction_field(grid, PointSource(config.view_position))
    half = half_vector(omega_i, omega_o)
    n = height * width
    return omega_i.reshape(n, 3), omega_o.reshape(n, 3), half.reshape(n, 3)


def render_neural_image(param_map: NeuralParamMap, config: ExemplarConfig,
                        renderer: MlpNet, nd_enc: MlpNet,
                        enc_config: EncodingConfig = EncodingConfig()) -> np.ndarray:
    """Full-image log-RGB prediction under one light/view configuration."""
    h, w = param_map.height, param_map.width
    omega_i, omega_o, half = config_direction_fields(h, w, config)
    enc = encode_directions(omega_i, omega_o, half, enc_config)
    z = nd_enc_forward(enc, nd_enc)
    flat = param_map.values.reshape(h * w, -1)
    return render_pixel(flat, z, renderer).reshape(h, w, 3)


# ---------------------------------------------------------------------------
# Data term and pixel masks
# ---------------------------------------------------------------------------

def l1_data_loss(pred_log: np.ndarray, target_log: np.ndarray,
                 mask: Optional[np.ndarray] = None) -> float:
    """Mean absolute log-domain error, optionally over a pixel subset.

    ``mask`` holds flat pixel indices; predictions and targets may be
    (H, W, 3) or already flattened to (N, 3).
    """
    pred = np.asarray(pred_log, dtype=np.float64).reshape(-1, 3)
    target = np.asarray(target_log, dtype=np.float64).reshape(-1, 3)
    if pred.shape != target.shape:
        raise ValueError("prediction and target shapes differ")
    if mask is not None:
        pred = pred[mask]
        target = target[mask]
    return float(np.mean(np.abs(pred - target)))


def _mask_source_rows(source) -> np.ndarray:
    """Flatten a NeuralParamMap or an (H, W, C) / (N, C) raster to (N, C)."""
    values = source.values if isinstance(source, NeuralParamMap) else source
    values = np.asarray(values, dtype=np.float64)
    if values.ndim == 3:
        values = values.reshape(-1, values.shape[-1])
    if values.ndim != 2:
        raise ValueError("mask source must be (H, W, C) or (N, C)")
    return values


def pixel_mask_weights(source, mode: str) -> np.ndarray:
    """Normalized per-pixel sampling distribution.

    inv_param_norm reads ``source`` as the latent map and favors pixels
    whose latent is still small (little material committed yet);
    sq_rgb_norm reads it as a log-RGB target and favors bright pixels;
    none is uniform.  Degenerate weights (zero-sum or non-finite) fall
    back to uniform so a black target still trains.
    """
    rows = _mask_source_rows(source)
    if mode == "inv_param_norm":
        weights = 1.0 / (np.linalg.norm(rows, axis=1) + MASK_WEIGHT_EPS)
    elif mode == "sq_rgb_norm":
        weights = np.sum(rows**2, axis=1)
    elif mode == "none":
        weights = np.ones(rows.shape[0])
    else:
        raise ValueError(f"mask_mode must be one of {MASK_MODES}")
    total = weights.sum()
    if not np.isfinite(total) or total <= 0 or np.any(weights < 0):
        return np.full(rows.shape[0], 1.0 / rows.shape[0])
    return weights / total


def pixel_mask(source, mode: str, fraction: float, rng) -> np.ndarray:
    """Weighted sample of ceil(fraction * N) pixel indices, no repeats.

    ``source`` is the raster the mode's weights are computed from (latent
    map for inv_param_norm, log target for sq_rgb_norm); ``rng`` is an
    RngStream or a numpy Generator.  Returns sorted flat indices.
    """
    if not 0.0 < fraction <= 1.0:
        raise ValueError("fraction must lie in (0, 1]")
    gen = rng.generator if isinstance(rng, RngStream) else rng
    p = pixel_mask_weights(source, mode)
    n = p.shape[0]
    count = min(n, int(np.ceil(fraction * n)))
    support = np.flatnonzero(p > 0)
    if support.size >= count:
        return np.sort(gen.choice(n, size=count, replace=False, p=p))
    # Fewer positive-weight pixels than requested: they are all forced in,
    # and the remainder is drawn uniformly from the zero-weight pixels
    # (the limit of the weighted draw as those weights approach zero).
    zeros = np.setdiff1d(np.arange(n), support, assume_unique=True)
    extra = gen.choice(zeros, size=count - support.size, replace=False)
    return np.sort(np.concatenate([support, extra]))


# ---------------------------------------------------------------------------
# Optimizer
# ---------------------------------------------------------------------------

class Adam:
    """Standard Adam with bias correction; updates arrays in place so the
    layer objects keep pointing at the optimized storage."""

    def __init__(self, beta1: float = ADAM_BETA1, beta2: float = ADAM_BETA2,
                 eps: float = ADAM_EPS):
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self._m: Optional[List[np.ndarray]] = None
        self._v: Optional[List[np.ndarray]] = None

    def step(self, params: Sequence[np.ndarray], grads: Sequence[np.ndarray],
             lr: float) -> None:
        if self._m is None:
            self._m = [np.zeros_like(p) for p in params]
            self._v = [np.zeros_like(p) for p in params]
        if len(params) != len(self._m):
            raise ValueError("parameter list changed size under the optimizer")
        self.t += 1
        correction1 = 1.0 - self.beta1**self.t
        correction2 = 1.0 - self.beta2**self.t
        for p, g, m, v in zip(params, grads, self._m, self._v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            m_hat = m / correction1
            v_hat = v / correction2
            p -= lr * m_hat / (np.sqrt(v_hat) + self.eps)


# ---------------------------------------------------------------------------
# The fit loop
# ---------------------------------------------------------------------------

@dataclass
class FitResult:
    param_map: NeuralParamMap
    renderer: MlpNet
    nd_enc: MlpNet
    loss_trace: np.ndarray
    final_loss: float
    config: FitConfig


def fit(targets: Sequence, input_photo: Optional[np.ndarray],
        fit_config: FitConfig,
        enc_config: EncodingConfig = EncodingConfig(),
        renderer: Optional[MlpNet] = None,
        nd_enc: Optional[MlpNet] = None,
        param_map: Optional[NeuralParamMap] = None,
        progress=None) -> FitResult:
    """Jointly fit latent map, compressor, and renderer to exemplars.

    ``targets`` is a list of (linear HDR image, ExemplarConfig) pairs;
    ``input_photo`` is an optional co-located capture that trains as one
    more exemplar under the overhead identity configuration.  Images are
    compressed to the log domain here, and the loss is a masked L1 in
    that domain.  The per-iteration loss (evaluated before each update,
    on that epoch's masks) is returned as the trace; ``final_loss``
    re-evaluates after the last update.  A non-finite loss aborts.
    """
    if len(targets) < 1:
        raise ValueError("at least one target exemplar is required")
    if len(targets) != fit_config.exemplar_count:
        raise ValueError(
            f"{len(targets)} targets but the fit config expects"
            f" {fit_config.exemplar_count}"
        )

    pairs = [(np.asarray(img, dtype=np.float64), cfg) for img, cfg in targets]
    if input_photo is not None:
        pairs.append(
            (np.asarray(input_photo, dtype=np.float64), identity_config())
        )
    h, w = pairs[0][0].shape[:2]
    n_pix = h * w
    target_rows_all: List[np.ndarray] = []
    configs: List[ExemplarConfig] = []
    for img, cfg in pairs:
        if img.shape != (h, w, 3):
            raise ValueError("all targets must share one (H, W, 3) shape")
        target_rows_all.append(log_compress(img).reshape(n_pix, 3))
        configs.append(cfg)

    # Deterministic substreams: 0 initializes weights, 1 draws masks.
    rng_init = RngStream(fit_config.seed).split(0).generator
    rng_mask = RngStream(fit_config.seed).split(1).generator
    if renderer is None:
        renderer = make_renderer_net(
            rng_init, in_dim=PARAM_CHANNELS + enc_config.compressed_dim
        )
    if nd_enc is None:
        nd_enc = make_nd_enc_net(
            rng_init, in_dim=enc_config.encoded_dim,
            out_dim=enc_config.compressed_dim,
        )
    if param_map is None:
        channels = renderer.in_dim - nd_enc.out_dim
        param_map = NeuralParamMap.zeros(h, w, channels)
    param_flat = param_map.values.reshape(n_pix, -1)

    # Direction fields are fixed per exemplar, so the raw encodings are
    # computed once and only gathered per mask inside the loop.
    encodings = []
    for cfg in configs:
        omega_i, omega_o, half = config_direction_fields(h, w, cfg)
        encodings.append(encode_directions(omega_i, omega_o, half, enc_config))

    all_params = [param_flat] + renderer.param_arrays() + nd_enc.param_arrays()
    optimizer = Adam()

    masks: List[np.ndarray] = []
    lr = fit_config.learning_rate
    trace = np.zeros(fit_config.iterations)

    def draw_masks() -> List[np.ndarray]:
        drawn = []
        for target in target_rows_all:
            source = target if fit_config.mask_mode == "sq_rgb_norm" else param_flat
            drawn.append(
                pixel_mask(source, fit_config.mask_mode,
                           fit_config.mask_fraction, rng_mask)
            )
        return drawn

    def batch_forward(mask_list):
        rows = np.concatenate(mask_list)
        enc_rows = np.concatenate(
            [enc[m] for enc, m in zip(encodings, mask_list)]
        )
        target_rows = np.concatenate(
            [t[m] for t, m in zip(target_rows_all, mask_list)]
        )
        z, nd_caches = nd_enc.forward_cached(enc_rows)
        x = np.concatenate([param_flat[rows], z], axis=1)
        y, r_caches = renderer.forward_cached(x)
        return rows, target_rows, y, nd_caches, r_caches

    for it in range(fit_config.iterations):
        epoch, phase = divmod(it, fit_config.epoch_iters)
        if phase == 0:
            masks = draw_masks()
            lr = fit_config.learning_rate * (1.0 - fit_config.lr_decay) ** epoch

        rows, target_rows, y, nd_caches, r_caches = batch_forward(masks)
        diff = y - target_rows
        trace[it] = np.mean(np.abs(diff))
        if not np.isfinite(trace[it]):
            raise RuntimeError(
                f"fit diverged: loss became {trace[it]} at iteration {it}"
                f" (learning rate {lr:.3g}); try a smaller learning rate"
            )

        dy = np.sign(diff) / diff.size
        r_grads, dx = renderer.backward(r_caches, dy)
        d_rows = dx[:, : param_flat.shape[1]]
        dz = dx[:, param_flat.shape[1]:]
        nd_grads, _ = nd_enc.backward(nd_caches, dz)

        d_param = np.zeros_like(param_flat)
        np.add.at(d_param, rows, d_rows)
        grads = [d_param]
        for d_w, d_b in r_grads:
            grads.extend((d_w, d_b))
        for d_w, d_b in nd_grads:
            grads.extend((d_w, d_b))

        optimizer.step(all_params, grads, lr)
        if progress is not None:
            progress(it, trace[it])

    # The loop stores pre-update losses; measure once more after the
    # final step so the reported number reflects the returned weights.
    _, target_rows, y, _, _ = batch_forward(masks)
    final_loss = float(np.mean(np.abs(y - target_rows)))

    # param_flat is a reshaped view of the map's storage, so the map is
    # already up to date; re-wrap defensively in case of a copy.
    param_map = NeuralParamMap(param_flat.reshape(h, w, -1))
    return FitResult(
        param_map=param_map,
        renderer=renderer,
        nd_enc=nd_enc,
        loss_trace=trace,
        final_loss=final_loss,
        config=fit_config,
    )
