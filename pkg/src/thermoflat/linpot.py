"""Linear potential with a hard wall: ratio structure and Boltzmann emergence.

With Boltzmann weights the ratio to the classical density is

    r(xi) = tau e^{xi/tau} / Z * sum_n e^{u_n/tau} Ai(xi + u_n)^2 / Ai'(u_n)^2,

where u_n are the Airy zeros.  Away from the wall (xi >~ 3 tau) r is constant
to far more digits than binary64 holds, yet not exactly constant.  The
functions here measure that plateau with per-point certified truncation, and
tabulate the large-n behaviour that makes Boltzmann weights the flat choice.

The function ``f(z) = e^{z/tau} Ai(z)^2`` integrates to
``sqrt(tau)/(2 sqrt(pi)) e^{1/(12 tau^3)}`` and has width about ``tau/sqrt(2)``.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericError
from .precision import Arith, Mode, arith
from .specfun import airy_ai, airy_ai_prime, airy_zero, gauss_kronrod, integrate
from .systems import LINEAR_POTENTIAL, WeightDistribution, _check_tau, log_boltzmann_tail, log_partition

#: max over x of Ai(x)^2, rounded up (Ai peaks at 0.53566... near x = -1.019)
AI_SQ_MAX = 0.2870

#: default plateau start in units of tau
PLATEAU_START = 3.0

#: (3 / (2 pi^2))^{1/3}, the large-n limit of n^{-1/3} Ai'(u_n)^2
EMERGENCE_LIMIT = (3.0 / (2.0 * math.pi**2)) ** (1.0 / 3.0)


# ---------------------------------------------------------------- cached zero data


class _SlopeTable:
    """u_n and Ai'(u_n)^2 for one precision mode, grown on demand."""

    def __init__(self, ar: Arith):
        self.ar = ar
        self.zeros: list = []
        self.slopes_sq: list = []
        self.lock = threading.Lock()

    def ensure(self, count: int) -> None:
        with self.lock:
            for n in range(len(self.zeros) + 1, count + 1):
                u = airy_zero(n, self.ar)
                d = airy_ai_prime(u, self.ar)
                self.zeros.append(u)
                self.slopes_sq.append(d * d)


_SLOPES: dict[Mode, _SlopeTable] = {}
_SLOPES_LOCK = threading.Lock()


def _slopes(ar: Arith, count: int) -> _SlopeTable:
    with _SLOPES_LOCK:
        table = _SLOPES.get(ar.mode)
        if table is None:
            table = _SLOPES[ar.mode] = _SlopeTable(ar)
    table.ensure(count)
    return table


def _check_weights(w: WeightDistribution) -> None:
    if w.index_base != LINEAR_POTENTIAL.index_base:
        raise DomainError("linear-potential weights start at n=1")


# ---------------------------------------------------------------- R_n


def weights_to_rn(w: WeightDistribution, tau) -> list:
    """R_n = P_n / (Ai'(u_n)^2 e^{u_n/tau})."""
    _check_weights(w)
    _check_tau(tau)
    ar = arith(w.mode)
    t = _slopes(ar, len(w))
    tau = ar.real(tau)
    return [p / (d * ar.exp(u / tau)) for p, u, d in zip(w.weights, t.zeros, t.slopes_sq)]


def rn_to_weights(rn, tau, mode: Arith | str = "native", provenance: str = "custom") -> WeightDistribution:
    """Inverse of :func:`weights_to_rn`."""
    _check_tau(tau)
    ar = arith(mode)
    rn = list(rn)
    t = _slopes(ar, len(rn))
    tau_r = ar.real(tau)
    w = [r * d * ar.exp(u / tau_r) for r, u, d in zip(rn, t.zeros, t.slopes_sq)]
    dtype = float if ar.mode is Mode.NATIVE else object
    return WeightDistribution(np.asarray(w, dtype=dtype), provenance=provenance, tau=float(tau), mode=ar.mode)


# ---------------------------------------------------------------- f(z)


def f_function(z: float, tau: float) -> float:
    """f(z) = e^{z/tau} Ai(z)^2, combined in logs so neither factor overflows."""
    a = airy_ai(float(z))
    if a == 0.0:
        return 0.0
    return math.exp(z / tau + 2.0 * math.log(abs(a)))


@dataclass(frozen=True)
class FIntegral:
    tau: float
    value: float
    closed_form: float
    rel_diff: float
    error_estimate: float


def f_closed_form(tau: float) -> float:
    return math.sqrt(tau) / (2.0 * math.sqrt(math.pi)) * math.exp(1.0 / (12.0 * tau**3))


def _hump(tau: float, lo: float, hi: float, abs_tol: float, depth: int = 0) -> np.ndarray:
    """Moments (1, z, z^2) of f over one interval between neighbouring zeros."""

    def g(z):
        v = f_function(z, tau)
        return np.array([v, z * v, z * z * v])

    val, err = gauss_kronrod(g, lo, hi)
    if depth < 8 and err[0] > abs_tol:
        mid = 0.5 * (lo + hi)
        half = 0.5 * abs_tol
        return _hump(tau, lo, mid, half, depth + 1) + _hump(tau, mid, hi, half, depth + 1)
    return val


def _negative_tail_bound(tau: float, u: float) -> float:
    # Ai^2 <= AI_SQ_MAX; integral of z^2 e^{z/tau} below u
    a = abs(u)
    return AI_SQ_MAX * tau * math.exp(u / tau) * (a * a + 2.0 * tau * a + 2.0 * tau * tau)


def _moments(tau: float, lo: float = -math.inf, hi: float = math.inf) -> np.ndarray:
    """Integrals of f, z f, z^2 f over [lo, hi].

    The oscillatory side is summed hump by hump between Airy zeros, from the
    first zero downward, until a crude exponential tail bound falls below 1e-17 of
    the running total.  The decaying side goes through adaptive quadrature.
    """
    if not lo < hi:
        raise DomainError("integration range is empty")
    u1 = float(airy_zero(1))
    total = np.zeros(3)
    # absolute hump tolerance; refreshed from the running total below
    scale = abs(_hump(tau, max(lo, hi - 1.0), hi, math.inf)[0]) if hi <= u1 else 0.0
    if hi > u1:
        a = max(lo, u1)
        for k, weight in enumerate((lambda z: 1.0, lambda z: z, lambda z: z * z)):
            res = integrate(lambda z, w=weight: w(z) * f_function(z, tau), a, hi, 1e-16, strict=False)
            if not res.converged and res.error_estimate > 1e-12 * abs(res.value):
                raise NumericError(f"quadrature of f beyond the first zero failed (tau={tau})")
            total[k] += res.value
    upper = min(hi, u1)
    n = 1
    while upper > lo:
        n += 1
        below = float(airy_zero(n))
        left = max(below, lo)
        if left < upper:
            scale = max(scale, abs(total[0]))
            total += _hump(tau, left, upper, 1e-17 * scale + 1e-300)
        upper = below
        if math.isinf(lo) and _negative_tail_bound(tau, below) <= 1e-17 * abs(total[0]):
            break
        if n > 200000:
            raise NumericError("hump summation did not terminate")
    return total


def f_integral(tau: float) -> FIntegral:
    """Quadrature of f over the real line, checked against the closed form to 1e-8."""
    _check_tau(tau)
    tau = float(tau)
    value = float(_moments(tau)[0])
    exact = f_closed_form(tau)
    rel = abs(value - exact) / exact
    if rel > 1e-8:
        raise NumericError(f"f integral {value!r} misses the closed form {exact!r} (rel {rel:.3g})")
    return FIntegral(tau, value, exact, rel, rel * exact)


def f_width(tau: float) -> float:
    """Standard deviation of f(z) / int f."""
    _check_tau(tau)
    m0, m1, m2 = _moments(float(tau))
    mean = m1 / m0
    var = m2 / m0 - mean * mean
    if not var > 0:
        raise NumericError(f"non-positive variance {var} for f at tau={tau}")
    return math.sqrt(var)


def window_integral(tau: float, s: int, t: int, n: int) -> float:
    """int_{|u_s|}^{|u_t|} f(xi + u_n) d xi, i.e. f over [|u_s| + u_n, |u_t| + u_n]."""
    _check_tau(tau)
    if not 1 <= s < t:
        raise DomainError("window needs 1 <= s < t")
    us = abs(float(airy_zero(s)))
    ut = abs(float(airy_zero(t)))
    un = float(airy_zero(n))
    return float(_moments(float(tau), us + un, ut + un)[0])


# ---------------------------------------------------------------- certified ratio


def _certified_sum(ar: Arith, tau, xi, target):
    """sum_n e^{u_n/tau} Ai(xi+u_n)^2/Ai'(u_n)^2 with a certified relative tail.

    After n terms the rest is at most AI_SQ_MAX / Ai'(u_{n+1})^2 times the
    Boltzmann tail, because Ai'(u_n)^2 grows with n.  Returns (sum, count).
    """
    terms = []
    partial = ar.real(0)
    n = 0
    chunk = 64
    while True:
        t = _slopes(ar, n + chunk + 1)
        for _ in range(chunk):
            u = t.zeros[n]
            a = airy_ai(xi + u, ar)
            term = ar.exp(u / tau) * a * a / t.slopes_sq[n]
            terms.append(term)
            n += 1
            partial = math.fsum(terms) if ar.mode is Mode.NATIVE else partial + term
            if partial > 0:
                log_bound = ar.log(AI_SQ_MAX / t.slopes_sq[n]) + log_boltzmann_tail(LINEAR_POTENTIAL, tau, n, ar)
                if log_bound <= ar.log(target * partial):
                    return partial, n
        if n > 100000:
            raise NumericError(f"ratio sum at xi={xi} did not certify within {n} states")


def _target(ar: Arith):
    return 1e-16 if ar.mode is Mode.NATIVE else ar.series_tol


def linpot_ratio(tau, xi, mode: Arith | str = "native"):
    """r(xi) with Boltzmann weights and a per-point certified truncation."""
    ar = arith(mode)
    _check_tau(tau)
    LINEAR_POTENTIAL.check_position(xi)
    tau_r = ar.real(tau)
    xi_r = ar.real(xi)
    s, _ = _certified_sum(ar, tau_r, xi_r, _target(ar))
    return tau_r * ar.exp(xi_r / tau_r - log_partition(LINEAR_POTENTIAL, tau_r, ar)) * s


@dataclass(frozen=True)
class ConstancyReport:
    tau: float
    grid: np.ndarray
    values: np.ndarray
    max: object
    min: object
    mean: object
    spread: object
    states_needed: int
    mode: Mode


def ratio_constancy(tau, xi_min, xi_max, grid: int = 61, mode: Arith | str = "native") -> ConstancyReport:
    """Evaluate r on an evenly spaced grid and report its relative spread.

    ``spread = (max - min) / mean``.  Each point is summed sequentially in
    index order, so results do not depend on scheduling.
    """
    ar = arith(mode)
    _check_tau(tau)
    if not 0 <= xi_min < xi_max:
        raise DomainError("need 0 <= xi_min < xi_max")
    if grid < 2:
        raise DomainError("grid needs at least two points")
    tau_r = ar.real(tau)
    lo, hi = ar.real(xi_min), ar.real(xi_max)
    xs = [lo + (hi - lo) * k / (grid - 1) for k in range(grid)]
    scale = tau_r * ar.exp(-log_partition(LINEAR_POTENTIAL, tau_r, ar))
    values = []
    needed = 0
    for x in xs:
        s, count = _certified_sum(ar, tau_r, x, _target(ar))
        values.append(scale * ar.exp(x / tau_r) * s)
        needed = max(needed, count)
    vmax, vmin = max(values), min(values)
    mean = (math.fsum(values) if ar.mode is Mode.NATIVE else sum(values)) / len(values)
    dtype = float if ar.mode is Mode.NATIVE else object
    return ConstancyReport(
        float(tau),
        np.asarray(xs, dtype=dtype),
        np.asarray(values, dtype=dtype),
        vmax,
        vmin,
        mean,
        (vmax - vmin) / mean,
        needed,
        ar.mode,
    )


# ---------------------------------------------------------------- emergence


@dataclass(frozen=True)
class EmergenceRow:
    n: int
    u_n: float
    ai_prime_sq: float
    spacing: float
    r_n_proxy: float
    limit_residual: float


@dataclass(frozen=True)
class EmergenceReport:
    tau: float
    rows: tuple[EmergenceRow, ...]
    b_tau: float
    a_tau: float

    def column(self, name: str) -> np.ndarray:
        return np.asarray([getattr(r, name) for r in self.rows], dtype=float)


def plateau_level(tau: float, start: float | None = None, stop: float | None = None, points: int = 25) -> float:
    """Mean of r over [start, stop] (defaults 3 tau and 6 tau)."""
    start = PLATEAU_START * tau if start is None else start
    stop = 2.0 * start if stop is None else stop
    return float(ratio_constancy(tau, start, stop, points).mean)


def emergence_check(tau: float, n_max: int, plateau_start: float | None = None) -> EmergenceReport:
    """Per-n diagnostics of the Airy-zero data behind the Boltzmann form.

    ``b_tau`` is the least-squares slope of R_n (Boltzmann weights) against
    the zero spacing over the upper half of n; ``a_tau`` is the plateau mean
    of r.
    """
    _check_tau(tau)
    if n_max < 10:
        raise DomainError("emergence check needs n_max >= 10")
    tau = float(tau)
    t = _slopes(arith("native"), n_max)
    rows = []
    for n in range(1, n_max + 1):
        u = float(t.zeros[n - 1])
        d2 = float(t.slopes_sq[n - 1])
        spacing = abs(u) - abs(float(t.zeros[n - 2])) if n > 1 else math.nan
        proxy = n ** (-1.0 / 3.0) * d2
        rows.append(EmergenceRow(n, u, d2, spacing, proxy, proxy - EMERGENCE_LIMIT))
    log_z = float(log_partition(LINEAR_POTENTIAL, tau))
    upper = rows[n_max // 2 :]
    rn = np.asarray([math.exp(-log_z) / r.ai_prime_sq for r in upper])
    sp = np.asarray([r.spacing for r in upper])
    b_tau = float(np.dot(rn, sp) / np.dot(sp, sp))
    return EmergenceReport(tau, tuple(rows), b_tau, plateau_level(tau, plateau_start))


__all__ = [
    "AI_SQ_MAX",
    "EMERGENCE_LIMIT",
    "ConstancyReport",
    "EmergenceReport",
    "EmergenceRow",
    "FIntegral",
    "emergence_check",
    "f_closed_form",
    "f_function",
    "f_integral",
    "f_width",
    "linpot_ratio",
    "plateau_level",
    "ratio_constancy",
    "rn_to_weights",
    "weights_to_rn",
    "window_integral",
]
