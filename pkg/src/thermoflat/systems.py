"""The three model systems in dimensionless variables.

Scaling conventions (physical constants never enter at runtime):

* box: ``xi = x / L`` on [0, 1], ``tau = kT / E_1``, states n = 1, 2, ...
* oscillator: ``xi = x sqrt(m omega / hbar)``, ``tau = kT / (hbar omega)``,
  states n = 0, 1, ...
* linear potential with a wall at 0: ``xi = x (2 m alpha / hbar^2)^{1/3}``,
  ``tau = kT (2 m / (hbar^2 alpha^2))^{1/3}``, states n = 1, 2, ...

In these units the oscillator has ``hbar^2/m = 1`` and ``V = xi^2/2``; the
linear potential has ``hbar^2/(2m) = 1`` and ``V = xi``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import special

from .errors import ConfigurationError, DomainError
from .precision import Arith, Mode, arith, extended_context
from .specfun import airy_ai, airy_ai_prime, airy_zero, hermite_h, hermite_h_log, integrate

#: tail mass (relative to Z) left out of native-mode partition sums
TAIL_TOL = 1e-12

LOG_CROSSOVER = 30


class Kind(str, enum.Enum):
    BOX = "box"
    OSCILLATOR = "oscillator"
    LINEAR_POTENTIAL = "linear"


@dataclass(frozen=True)
class SystemModel:
    kind: Kind
    index_base: int
    domain: tuple[float, float]

    @property
    def name(self) -> str:
        return self.kind.value

    def check_position(self, xi) -> None:
        lo, hi = self.domain
        if not lo <= xi <= hi:
            raise DomainError(f"xi={xi} lies outside the {self.name} domain [{lo}, {hi}]")


BOX = SystemModel(Kind.BOX, 1, (0.0, 1.0))
OSCILLATOR = SystemModel(Kind.OSCILLATOR, 0, (-math.inf, math.inf))
LINEAR_POTENTIAL = SystemModel(Kind.LINEAR_POTENTIAL, 1, (0.0, math.inf))

_BY_NAME = {
    "box": BOX,
    "oscillator": OSCILLATOR,
    "osc": OSCILLATOR,
    "linear": LINEAR_POTENTIAL,
    "linpot": LINEAR_POTENTIAL,
}


def get_system(name: str | SystemModel) -> SystemModel:
    if isinstance(name, SystemModel):
        return name
    try:
        return _BY_NAME[name.lower()]
    except KeyError:
        raise DomainError(f"unknown system {name!r}; choose box, oscillator or linear") from None


PROVENANCES = ("boltzmann", "flatness-optimal", "matched", "alternative", "custom")


@dataclass(frozen=True)
class WeightDistribution:
    """Probabilities over eigenstates ``index_base, index_base + 1, ...``."""

    weights: np.ndarray
    provenance: str = "custom"
    tau: float | None = None
    index_base: int = 1
    tail_mass: float = 0.0
    mode: Mode = Mode.NATIVE
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        w = self.weights
        if not isinstance(w, np.ndarray):
            w = np.asarray(w, dtype=float if self.mode is Mode.NATIVE else object)
            object.__setattr__(self, "weights", w)
        if w.ndim != 1 or len(w) < 1:
            raise DomainError("a weight distribution needs at least one entry")
        if self.provenance not in PROVENANCES:
            raise DomainError(f"unknown provenance {self.provenance!r}")
        if any(x < 0 for x in w):
            raise DomainError("weights must be non-negative")
        tol = 1e-12 if self.mode is Mode.NATIVE else 1e3 * arith(self.mode).eps
        if abs(sum(w) - 1) > tol:
            raise DomainError(f"weights sum to {sum(w)}, not 1")

    def __len__(self) -> int:
        return len(self.weights)

    @property
    def indices(self) -> range:
        return range(self.index_base, self.index_base + len(self.weights))

    def floats(self) -> np.ndarray:
        return np.asarray([float(x) for x in self.weights])


def normalized(values, **kwargs) -> WeightDistribution:
    """Build a distribution from non-negative scores by dividing by their sum."""
    mode = kwargs.get("mode", Mode.NATIVE)
    if mode is Mode.NATIVE:
        arr = np.asarray(values, dtype=float)
        return WeightDistribution(arr / math.fsum(arr), **kwargs)
    arr = np.asarray(list(values), dtype=object)
    total = sum(arr)
    return WeightDistribution(np.asarray([x / total for x in arr], dtype=object), **kwargs)


# ---------------------------------------------------------------- eigenstates


def _check_index(system: SystemModel, n: int) -> None:
    if n < system.index_base:
        raise DomainError(f"{system.name} states start at n={system.index_base}, got {n}")


def _oscillator_direct(n: int, xi: float) -> float:
    h = hermite_h(n, xi)
    return math.exp(-xi * xi) * h * h / (2.0**n * math.factorial(n) * math.sqrt(math.pi))


def _oscillator_log(n: int, xi: float) -> float:
    sign, log_abs = hermite_h_log(n, xi)
    if sign == 0:
        return 0.0
    log_rho = -xi * xi + 2.0 * log_abs - n * math.log(2.0) - math.lgamma(n + 1) - 0.5 * math.log(math.pi)
    return math.exp(log_rho)


def eigen_density(system: SystemModel, n: int, xi, mode: Arith | str = "native"):
    """|psi_n(xi)|^2 for one eigenstate."""
    ar = arith(mode)
    _check_index(system, n)
    system.check_position(xi)
    if system.kind is Kind.BOX:
        s = ar.sin(ar.pi * n * ar.real(xi))
        return 2 * s * s
    if system.kind is Kind.OSCILLATOR:
        if ar.mode is not Mode.NATIVE:
            raise ConfigurationError("oscillator densities are native-precision only")
        xi = float(xi)
        if n <= LOG_CROSSOVER:
            return _oscillator_direct(n, xi)
        return _oscillator_log(n, xi)
    u = airy_zero(n, ar)
    return airy_ai(ar.real(xi) + u, ar) ** 2 / _airy_slope_sq(n, ar.mode)


@lru_cache(maxsize=None)
def _airy_slope_sq(n: int, mode: Mode):
    """Ai'(u_n)^2, the normalization of the n-th linear-potential state."""
    d = airy_ai_prime(airy_zero(n, mode), mode)
    return d * d


def _oscillator_batch(count: int, xi: float) -> np.ndarray:
    """|psi_n(xi)|^2 for n = 0..count-1 by the orthonormal-function recurrence.

    ``phi_{n+1} = sqrt(2/(n+1)) xi phi_n - sqrt(n/(n+1)) phi_{n-1}`` run on a
    rescaled pair with the Gaussian factor kept as a separate log offset.
    """
    out = np.empty(count)
    log_offset = -0.5 * xi * xi - 0.25 * math.log(math.pi)
    prev, cur = 0.0, 1.0
    for n in range(count):
        out[n] = 2.0 * (math.log(abs(cur)) + log_offset) if cur != 0.0 else -math.inf
        nxt = math.sqrt(2.0 / (n + 1)) * xi * cur - math.sqrt(n / (n + 1)) * prev
        prev, cur = cur, nxt
        if abs(cur) > 1e150:
            prev /= 1e150
            cur /= 1e150
            log_offset += 150.0 * math.log(10.0)
    return np.exp(out)


def eigen_densities(system: SystemModel, count: int, xi, mode: Arith | str = "native"):
    """|psi_n(xi)|^2 for the first ``count`` states, as an array."""
    ar = arith(mode)
    system.check_position(xi)
    if system.kind is Kind.OSCILLATOR:
        if ar.mode is not Mode.NATIVE:
            raise ConfigurationError("oscillator densities are native-precision only")
        return _oscillator_batch(count, float(xi))
    dtype = float if ar.mode is Mode.NATIVE else object
    return np.asarray(
        [eigen_density(system, n, xi, ar) for n in range(system.index_base, system.index_base + count)],
        dtype=dtype,
    )


# ---------------------------------------------------------------- classical


def _check_tau(tau) -> None:
    if not tau > 0:
        raise DomainError(f"temperature must be positive, got tau={tau}")


def classical_density(system: SystemModel, tau, xi, mode: Arith | str = "native"):
    ar = arith(mode)
    _check_tau(tau)
    system.check_position(xi)
    tau = ar.real(tau)
    xi = ar.real(xi)
    if system.kind is Kind.BOX:
        return ar.real(1)
    if system.kind is Kind.OSCILLATOR:
        return ar.exp(-xi * xi / (2 * tau)) / ar.sqrt(2 * ar.pi * tau)
    return ar.exp(-xi / tau) / tau


# ---------------------------------------------------------------- Boltzmann


def _log_weight(system: SystemModel, tau, n: int, ar: Arith):
    if system.kind is Kind.BOX:
        return -ar.real(n * n) / tau
    if system.kind is Kind.OSCILLATOR:
        return -ar.real(n) / tau
    return airy_zero(n, ar) / tau


def boltzmann_tail(system: SystemModel, tau, n: int, mode: Arith | str = "native"):
    """Upper bound on sum of e^{-E_m/tau} over states after the ``n``-th one.

    Box: Gaussian integral comparison.  Oscillator: exact geometric tail.
    Linear potential: |u_m| >= (3 pi (4m - 1)/8)^{2/3}, then an integral
    comparison giving ``tau^{3/2}/pi * Gamma(3/2, s_n / tau)``.
    """
    ar = arith(mode)
    tau = ar.real(tau)
    ext = extended_context()
    if system.kind is Kind.BOX:
        x = ar.real(n) / ar.sqrt(tau)
        erfc = math.erfc(x) if ar.mode is Mode.NATIVE else ext.erfc(x)
        return ar.sqrt(ar.pi * tau) / 2 * erfc
    if system.kind is Kind.OSCILLATOR:
        # states 0..n-1 are the first n
        return ar.exp(-ar.real(n) / tau) / (-ar.expm1(-1 / tau))
    s = (3 * ar.pi * (4 * n - 1) / 8) ** (ar.real(2) / 3)
    if ar.mode is Mode.NATIVE:
        upper = special.gammaincc(1.5, s / tau) * special.gamma(1.5)
    else:
        upper = ext.gammainc(ext.mpf(3) / 2, s / tau)
    return tau * ar.sqrt(tau) / ar.pi * upper


def log_boltzmann_tail(system: SystemModel, tau, n: int, mode: Arith | str = "native"):
    """log of :func:`boltzmann_tail`, finite even where the tail itself underflows."""
    ar = arith(mode)
    tau = ar.real(tau)
    if ar.mode is not Mode.NATIVE:
        return ar.log(boltzmann_tail(system, tau, n, ar))
    if system.kind is Kind.BOX:
        # sqrt(pi tau)/2 erfc(x) with erfc(x) = 2 Phi(-x sqrt 2)
        x = n / math.sqrt(tau)
        return 0.5 * math.log(math.pi * tau) + float(special.log_ndtr(-x * math.sqrt(2.0)))
    if system.kind is Kind.OSCILLATOR:
        return -n / tau - math.log(-math.expm1(-1.0 / tau))
    tail = boltzmann_tail(system, tau, n, ar)
    if tail > 0:
        return math.log(tail)
    # Gamma(3/2, x) <= e^{-x} (sqrt(x) + 1/(2 sqrt(x)))
    x = (3 * math.pi * (4 * n - 1) / 8) ** (2.0 / 3.0) / tau
    return 1.5 * math.log(tau) - math.log(math.pi) - x + math.log(math.sqrt(x) + 0.5 / math.sqrt(x))


def certified_count(system: SystemModel, tau, tol=None, mode: Arith | str = "native") -> int:
    """Smallest state count whose left-out Boltzmann mass is below ``tol`` times Z."""
    ar = arith(mode)
    _check_tau(tau)
    if tol is None:
        tol = TAIL_TOL if ar.mode is Mode.NATIVE else ar.series_tol
    tau = ar.real(tau)
    base = system.index_base
    ref = _log_weight(system, tau, base, ar)
    log_tol = ar.log(ar.real(tol))
    partial = ar.real(0)
    n = 0
    while True:
        partial += ar.exp(_log_weight(system, tau, base + n, ar) - ref)
        n += 1
        # the bound is for absolute Boltzmann factors; compare after removing the reference
        if log_boltzmann_tail(system, tau, n, ar) - ref <= log_tol + ar.log(partial):
            return n


def log_partition(system: SystemModel, tau, mode: Arith | str = "native"):
    """log Z with Z = sum_n e^{-E_n/tau}, summed to the certified tail."""
    ar = arith(mode)
    _check_tau(tau)
    tau = ar.real(tau)
    count = certified_count(system, tau, mode=ar)
    ref = _log_weight(system, tau, system.index_base, ar)
    raw = [ar.exp(_log_weight(system, tau, system.index_base + k, ar) - ref) for k in range(count)]
    total = math.fsum(raw) if ar.mode is Mode.NATIVE else sum(raw)
    return ref + ar.log(total)


def boltzmann_weights(system: SystemModel, tau, n_trunc: int | None = None, mode: Arith | str = "native"):
    """First ``n_trunc`` Boltzmann probabilities, renormalized over the truncation.

    Z is summed to a certified tail (see :func:`certified_count`) even when the
    caller asks for fewer entries; the mass outside the returned entries is
    recorded in ``tail_mass``.
    """
    ar = arith(mode)
    _check_tau(tau)
    tau_r = ar.real(tau)
    full = certified_count(system, tau_r, mode=ar)
    if n_trunc is None:
        n_trunc = full
    if n_trunc < 1:
        raise DomainError("n_trunc must be at least 1")
    base = system.index_base
    count = max(full, n_trunc)
    ref = _log_weight(system, tau_r, base, ar)
    raw = [ar.exp(_log_weight(system, tau_r, base + k, ar) - ref) for k in range(count)]
    if ar.mode is Mode.NATIVE:
        z = math.fsum(raw)
        kept = math.fsum(raw[:n_trunc])
        weights = np.asarray(raw[:n_trunc]) / kept
    else:
        z = sum(raw)
        kept = sum(raw[:n_trunc])
        weights = np.asarray([r / kept for r in raw[:n_trunc]], dtype=object)
    return WeightDistribution(
        weights,
        provenance="boltzmann",
        tau=float(tau),
        index_base=base,
        tail_mass=float(1 - kept / z),
        mode=ar.mode,
    )


# ---------------------------------------------------------------- semiclassical


def _semiclassical_shape(system: SystemModel, tau: float, xi: float) -> float:
    if system.kind is Kind.OSCILLATOR:
        # V = xi^2/2: V'' = 1, V'^2 = xi^2, hbar^2/m = 1
        return (1.0 - 1.0 / (12.0 * tau**2) + xi * xi / (24.0 * tau**3)) * math.exp(-xi * xi / (2.0 * tau))
    # V = xi: V'' = 0, V'^2 = 1, hbar^2/m = 2
    return (1.0 + 1.0 / (12.0 * tau**3)) * math.exp(-xi / tau)


@lru_cache(maxsize=256)
def _semiclassical_norm(kind: Kind, tau: float) -> float:
    system = OSCILLATOR if kind is Kind.OSCILLATOR else LINEAR_POTENTIAL
    lo = -math.inf if kind is Kind.OSCILLATOR else 0.0
    res = integrate(lambda x: _semiclassical_shape(system, tau, x), lo, math.inf, 1e-13, strict=True)
    return res.value


def semiclassical_density(system: SystemModel, tau: float, xi: float) -> float:
    """Second-order-in-hbar thermal density, normalized numerically over the domain.

    The box returns the uniform density: its interior potential is flat, and the
    expansion has nothing to say about the wall boundary layers.  For the linear
    potential the correction is a constant factor, so after normalization the
    result coincides with the classical density; the hard wall lies outside the
    expansion's validity and is ignored.
    """
    _check_tau(tau)
    system.check_position(xi)
    if system.kind is Kind.BOX:
        return 1.0
    tau = float(tau)
    return _semiclassical_shape(system, tau, float(xi)) / _semiclassical_norm(system.kind, tau)


__all__ = [
    "BOX",
    "LINEAR_POTENTIAL",
    "OSCILLATOR",
    "Kind",
    "SystemModel",
    "WeightDistribution",
    "boltzmann_tail",
    "log_boltzmann_tail",
    "boltzmann_weights",
    "certified_count",
    "classical_density",
    "eigen_densities",
    "eigen_density",
    "get_system",
    "log_partition",
    "normalized",
    "semiclassical_density",
]
