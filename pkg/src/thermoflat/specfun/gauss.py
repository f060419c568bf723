"""Gaussian distribution helpers."""

from __future__ import annotations

import math
from statistics import NormalDist

_STD = NormalDist()


def normal_cdf(x: float, var: float = 1.0) -> float:
    """CDF of N(0, var); uses ``erfc`` on both tails to keep relative accuracy."""
    t = x / math.sqrt(2.0 * var)
    if t < 0:
        return 0.5 * math.erfc(-t)
    return 1.0 - 0.5 * math.erfc(t)


def normal_sf(x: float, var: float = 1.0) -> float:
    return normal_cdf(-x, var)


def normal_ppf(p: float, var: float = 1.0) -> float:
    if not 0.0 < p < 1.0:
        raise ValueError("quantile needs 0 < p < 1")
    return _STD.inv_cdf(p) * math.sqrt(var)
