"""Reversible log compression of radiance and display conversion.

Radiance R >= 0 is processed as log(R + 1) (natural log).  For display the
inverse is applied followed by a 2.2 gamma.  log1p/expm1 keep the roundtrip
accurate over the whole HDR range.
"""

from __future__ import annotations

import numpy as np

DISPLAY_GAMMA = 2.2


def log_compress(r):
    """Map linear radiance to log space: log(r + 1), componentwise."""
    r = np.asarray(r, dtype=np.float64)
    if np.any(r < 0):
        raise ValueError("radiance must be non-negative")
    return np.log1p(r)


def log_expand(r_log):
    """Inverse of log_compress: exp(r_log) - 1."""
    return np.expm1(np.asarray(r_log, dtype=np.float64))


def log_expand_and_gamma(r_log):
    """Convert log radiance to a display value: (exp(r_log) - 1)^(1/2.2)."""
    r_log = np.asarray(r_log, dtype=np.float64)
    if np.any(r_log < 0):
        raise ValueError("log radiance must be non-negative")
    return np.expm1(r_log) ** (1.0 / DISPLAY_GAMMA)


def ldr_clamp(img, white_point: float = 1.0):
    """Clamp linear radiance to the LDR ceiling (default white point 1.0)."""
    return np.minimum(np.asarray(img, dtype=np.float64), white_point)
