"""Mixed position densities, quantum/classical ratios and KL divergence."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, NumericError
from .precision import Arith, Mode, arith
from .specfun import theta3
from .systems import (
    BOX,
    SystemModel,
    WeightDistribution,
    _check_tau,
    certified_count,
    classical_density,
    eigen_densities,
)


@dataclass(frozen=True)
class DensityCurve:
    grid: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        grid = np.asarray(self.grid)
        values = np.asarray(self.values)
        if grid.shape != values.shape:
            raise ValueError("grid and values differ in length")
        if np.any(np.diff(grid.astype(float)) <= 0):
            raise ValueError("grid must be strictly increasing")
        if not all(math.isfinite(float(v)) and v >= 0 for v in values):
            raise ValueError("density values must be finite and non-negative")


@dataclass(frozen=True)
class DivergenceReport:
    kl: float
    scaled_kl: float | None = None
    rate_label: str | None = None

    def __post_init__(self):
        if self.kl < 0:
            raise ValueError(f"KL divergence cannot be negative ({self.kl})")


def sample(fn, grid, **meta) -> DensityCurve:
    grid = np.asarray(grid, dtype=float)
    return DensityCurve(grid, np.asarray([fn(x) for x in grid]), meta)


def mixed_density(system: SystemModel, w: WeightDistribution, xi, mode: Arith | str | None = None):
    """sum_n w_n |psi_n(xi)|^2 over the stored weights."""
    ar = arith(mode if mode is not None else w.mode)
    if w.index_base != system.index_base:
        raise DomainError(f"weights start at n={w.index_base}, {system.name} states at n={system.index_base}")
    dens = eigen_densities(system, len(w), xi, ar)
    if ar.mode is Mode.NATIVE:
        return math.fsum(w.floats() * dens)
    return sum(p * d for p, d in zip(w.weights, dens))


def box_density_theta(tau, xi, mode: Arith | str = "native"):
    """Closed theta-function form of the box's Boltzmann-weighted density."""
    ar = arith(mode)
    _check_tau(tau)
    xi = ar.real(xi)
    BOX.check_position(xi)
    q = ar.exp(-1 / ar.real(tau))
    t0 = theta3(0, q, ar)
    return (t0 - theta3(ar.pi * xi, q, ar)) / (t0 - 1)


def ratio(system: SystemModel, w: WeightDistribution, tau, xi, mode: Arith | str | None = None):
    """r(xi) = rho(xi) / rho_c(xi)."""
    ar = arith(mode if mode is not None else w.mode)
    rho_c = classical_density(system, tau, xi, ar)
    if rho_c == 0:
        raise NumericError(f"classical density underflows to 0 at xi={xi}")
    return mixed_density(system, w, xi, ar) / rho_c


def kl_divergence(p: WeightDistribution, q: WeightDistribution) -> float:
    """D(p || q) in nats, with 0 ln 0 = 0.

    When ``q`` is longer than ``p`` it is cut to p's length and renormalized
    first, so a truncated distribution can be compared with a full one.
    """
    if p.index_base != q.index_base:
        raise DomainError("distributions use different index bases")
    pw = p.floats()
    qw = q.floats()
    if len(qw) < len(pw):
        qw = np.concatenate([qw, np.zeros(len(pw) - len(qw))])
    qw = qw[: len(pw)]
    qs = math.fsum(qw)
    if qs <= 0:
        raise DomainError("reference distribution has no mass on p's support")
    qw = qw / qs
    support = pw > 0
    if np.any(qw[support] <= 0):
        raise DomainError("q vanishes where p is positive")
    terms = pw[support] * np.log(pw[support] / qw[support])
    return max(math.fsum(terms), 0.0)


def alternative_weights(tau, n_trunc: int | None = None) -> WeightDistribution:
    """P^A_n = (e^{1/tau} - 1) e^{-n/tau}, n >= 1, truncated and renormalized."""
    _check_tau(tau)
    tau = float(tau)
    if n_trunc is None:
        # same geometric series as the oscillator's Boltzmann weights
        from .systems import OSCILLATOR

        n_trunc = certified_count(OSCILLATOR, tau)
    n = np.arange(1, n_trunc + 1)
    w = -math.expm1(-1.0 / tau) * np.exp(-(n - 1) / tau)
    kept = math.fsum(w)
    return WeightDistribution(w / kept, provenance="alternative", tau=tau, index_base=1, tail_mass=1.0 - kept)


def alternative_density(tau, xi) -> float:
    """Closed form of sum_n P^A_n 2 sin^2(pi n xi)."""
    _check_tau(tau)
    BOX.check_position(xi)
    a = math.exp(1.0 / tau)
    c = math.cos(2.0 * math.pi * xi)
    return (a + 1.0) * (1.0 - c) / (a - 2.0 * c + 1.0 / a)


def weighted_components(system: SystemModel, w: WeightDistribution, tau, xi, count: int = 4):
    """The first ``count`` terms w_n |psi_n|^2 / rho_c of the ratio at ``xi``."""
    ar = arith(w.mode)
    rho_c = classical_density(system, tau, xi, ar)
    dens = eigen_densities(system, count, xi, ar)
    return [p * d / rho_c for p, d in zip(w.weights[:count], dens)]


__all__ = [
    "DensityCurve",
    "DivergenceReport",
    "alternative_density",
    "alternative_weights",
    "box_density_theta",
    "kl_divergence",
    "mixed_density",
    "ratio",
    "sample",
    "weighted_components",
]
