"""Physicists' Hermite polynomials.

``hermite_h`` runs the plain three-term recurrence.  ``hermite_h_log`` runs the
same recurrence but rescales whenever the magnitude leaves a safe window, so
it returns ``(sign, log|H_n(x)|)`` for degrees where ``H_n`` overflows binary64.
"""

from __future__ import annotations

import math

_RESCALE = 2.0**300


def hermite_h(n: int, x):
    """H_n(x) by ``H_{k+1} = 2x H_k - 2k H_{k-1}``.  Exact for integer ``x`` and small ``n``."""
    if n < 0:
        raise ValueError("Hermite degree must be non-negative")
    h_prev, h = 1, 2 * x
    if n == 0:
        return x * 0 + 1
    for k in range(1, n):
        h_prev, h = h, 2 * x * h - 2 * k * h_prev
    return h


def hermite_h_log(n: int, x: float) -> tuple[int, float]:
    """Return ``(sign, log|H_n(x)|)``; sign is 0 when ``H_n(x) == 0``."""
    if n < 0:
        raise ValueError("Hermite degree must be non-negative")
    x = float(x)
    h_prev, h = 1.0, 2.0 * x
    log_scale = 0.0
    if n == 0:
        return 1, 0.0
    for k in range(1, n):
        h_prev, h = h, 2.0 * x * h - 2.0 * k * h_prev
        if abs(h) > _RESCALE:
            h_prev /= _RESCALE
            h /= _RESCALE
            log_scale += math.log(_RESCALE)
    if h == 0.0:
        return 0, -math.inf
    return (1 if h > 0 else -1), log_scale + math.log(abs(h))
