"""Finite-difference verification of the hand-written backward passes.

Each check builds a scalar loss L = sum(output * R) for a fixed random
projection R, computes analytic parameter gradients with one backward
pass, then probes a random subset of coordinates with central
differences (f(x+h) - f(x-h)) / 2h.  The reported figure is the worst
relative error max |analytic - numeric| / max(|analytic| + |numeric|,
floor) over the probed coordinates.
"""

from __future__ import annotations

from typing import List, Sequence

import numpy as np

from .estimator import UNet
from .mlp import MlpNet

FD_STEP = 1e-4
UNET_FD_STEP = 1e-5
REL_FLOOR = 1e-6


def _relative_error(analytic: float, numeric: float) -> float:
    scale = max(abs(analytic) + abs(numeric), REL_FLOOR)
    return abs(analytic - numeric) / scale


def _probe_coords(arrays: Sequence[np.ndarray], samples: int,
                  gen: np.random.Generator):
    """Random (array index, flat coordinate) probe sites, spread over all
    parameter arrays proportionally to size."""
    sizes = np.array([a.size for a in arrays], dtype=np.float64)
    probs = sizes / sizes.sum()
    coords = []
    for _ in range(samples):
        k = int(gen.choice(len(arrays), p=probs))
        coords.append((k, int(gen.integers(arrays[k].size))))
    return coords


def gradcheck_mlp(net: MlpNet, batch: int, gen: np.random.Generator,
                  samples: int = 60, step: float = FD_STEP) -> float:
    """Worst relative gradient error of an MLP, parameters and inputs."""
    x = gen.normal(0.0, 1.0, size=(batch, net.in_dim))
    projection = gen.normal(0.0, 1.0, size=(batch, net.out_dim))

    def loss() -> float:
        return float(np.sum(net.forward(x) * projection))

    y, caches = net.forward_cached(x)
    layer_grads, dx = net.backward(caches, projection)
    params = net.param_arrays()
    grads: List[np.ndarray] = []
    for d_w, d_b in layer_grads:
        grads.extend((d_w, d_b))

    worst = 0.0
    for k, flat in _probe_coords(params, samples, gen):
        arr = params[k].reshape(-1)
        keep = arr[flat]
        arr[flat] = keep + step
        up = loss()
        arr[flat] = keep - step
        down = loss()
        arr[flat] = keep
        worst = max(worst, _relative_error(grads[k].reshape(-1)[flat],
                                           (up - down) / (2.0 * step)))
    # Input gradient along a few coordinates as well.
    x_flat = x.reshape(-1)
    for flat in gen.integers(x_flat.size, size=min(samples // 4, x_flat.size)):
        keep = x_flat[flat]
        x_flat[flat] = keep + step
        up = loss()
        x_flat[flat] = keep - step
        down = loss()
        x_flat[flat] = keep
        worst = max(worst, _relative_error(dx.reshape(-1)[flat],
                                           (up - down) / (2.0 * step)))
    return worst


def gradcheck_unet(unet: UNet, height: int, width: int,
                   gen: np.random.Generator, samples: int = 40,
                   step: float = UNET_FD_STEP) -> float:
    """Worst relative gradient error of the estimator U-Net, parameters
    and input image.

    The default step is finer than the MLP check's: the net is deep and
    piecewise linear, so wider probes regularly straddle activation
    kinks and report spurious errors.
    """
    x = gen.normal(0.0, 1.0, size=(unet.spec.in_channels, height, width))
    y = unet.forward(x)
    projection = gen.normal(0.0, 1.0, size=y.shape)

    def loss() -> float:
        return float(np.sum(unet.forward(x) * projection))

    dx = unet.backward(projection)
    params = unet.param_arrays()
    grads = unet.grad_arrays()

    worst = 0.0
    for k, flat in _probe_coords(params, samples, gen):
        arr = params[k].reshape(-1)
        keep = arr[flat]
        arr[flat] = keep + step
        up = loss()
        arr[flat] = keep - step
        down = loss()
        arr[flat] = keep
        worst = max(worst, _relative_error(grads[k].reshape(-1)[flat],
                                           (up - down) / (2.0 * step)))
    x_flat = x.reshape(-1)
    for flat in gen.integers(x_flat.size, size=samples // 4):
        keep = x_flat[flat]
        x_flat[flat] = keep + step
        up = loss()
        x_flat[flat] = keep - step
        down = loss()
        x_flat[flat] = keep
        worst = max(worst, _relative_error(dx.reshape(-1)[flat],
                                           (up - down) / (2.0 * step)))
    return worst
