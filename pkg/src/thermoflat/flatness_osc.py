"""Classical-mimicking weights for the harmonic oscillator.

A geometric mixture of oscillator states at temperature t has position
variance ``1 / (2 tanh(1/(2t)))``.  Choosing t = tau_e with
``1/(2 tau_e) = artanh(1/(2 tau))`` makes that variance equal to tau, so the
mixture reproduces the classical Gaussian exactly.  This needs tau > 1/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .systems import OSCILLATOR, WeightDistribution
from .thermal import DivergenceReport

TAIL_TOL = 1e-12

#: half-width of the ratio window, in classical standard deviations
RATIO_WINDOW = 5.0


@dataclass(frozen=True)
class OscillatorMatch:
    tau: float
    tau_effective: float
    weights: WeightDistribution


def _check(tau: float) -> None:
    if not tau > 0.5:
        raise DomainError(
            f"tau={tau} <= 1/2: the classical spread is less than the spread of the quantum ground state, "
            "so no mixture of oscillator states can match it"
        )


def artanh(x: float) -> float:
    # log form stays accurate as x -> 1
    return 0.5 * (math.log1p(x) - math.log1p(-x))


def effective_temperature(tau: float) -> float:
    _check(tau)
    return 1.0 / (2.0 * artanh(1.0 / (2.0 * tau)))


def geometric_variance(t: float) -> float:
    """Position variance of the Boltzmann mixture at oscillator temperature t."""
    return 1.0 / (2.0 * math.tanh(1.0 / (2.0 * t)))


def default_truncation(tau_e: float, tau: float | None = None) -> int:
    """Smallest N with geometric tail mass <= 1e-12.

    With ``tau`` given the tail is further reduced by ``exp(-RATIO_WINDOW^2/2)``
    so the ratio to the classical density stays certified out to five classical
    standard deviations, where rho_c itself has dropped by that factor.
    """
    tol = TAIL_TOL
    if tau is not None:
        tol *= math.exp(-0.5 * RATIO_WINDOW**2)
    return max(1, math.ceil(tau_e * math.log(1.0 / tol)))


def matched_weights(tau: float, n_trunc: int | None = None) -> OscillatorMatch:
    """P_n = (1 - e^{-1/tau_e}) e^{-n/tau_e}, n = 0..n_trunc-1, renormalized."""
    tau_e = effective_temperature(tau)
    if n_trunc is None:
        n_trunc = default_truncation(tau_e, tau)
    n = np.arange(n_trunc)
    w = -math.expm1(-1.0 / tau_e) * np.exp(-n / tau_e)
    kept = math.fsum(w)
    wd = WeightDistribution(w / kept, provenance="matched", tau=float(tau), index_base=0, tail_mass=1.0 - kept)
    return OscillatorMatch(float(tau), tau_e, wd)


def position_variance(w: WeightDistribution) -> float:
    """<xi^2> = sum_n P_n (n + 1/2) for oscillator weights."""
    if w.index_base != OSCILLATOR.index_base:
        raise DomainError("oscillator weights start at n=0")
    return math.fsum(w.floats() * (np.arange(len(w)) + 0.5))


def kl_closed_form(tau: float) -> DivergenceReport:
    """Exact D(P_matched || P^B) between the two infinite geometric distributions."""
    tau_e = effective_temperature(tau)
    a = -math.expm1(-1.0 / tau_e)
    b = -math.expm1(-1.0 / tau)
    d = math.log(a / b) + math.exp(-1.0 / tau_e) / a * (1.0 / tau - 1.0 / tau_e)
    d = max(d, 0.0)
    return DivergenceReport(kl=d, scaled_kl=288.0 * tau**4 * d, rate_label="288 tau^4")
