"""Exact flatness-optimal weights for the particle in a box.

Restricting the box density to the first N states and asking that its first
2N - 1 derivatives vanish at the centre gives N linear equations

    sum_n (-1)^n n^{2m} P_n = 0   (m = 1..N-1),     sum_n P_n = 1,

whose unique solution is the positive half of a centred binomial,
``P_n = A (2N)! / ((N+n)! (N-n)!)``.  Everything here runs in exact rational
arithmetic (:class:`fractions.Fraction`); binary64 values are projections.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import NumericError
from .systems import BOX, WeightDistribution, boltzmann_weights
from .thermal import DivergenceReport, kl_divergence

ExactRational = Fraction


@dataclass(frozen=True)
class BoxFlatnessSolution:
    n: int
    weights_exact: tuple[Fraction, ...]
    weights: WeightDistribution
    normalization_a: Fraction


@dataclass(frozen=True)
class ResidualReport:
    n: int
    residuals: tuple[Fraction, ...]
    ok: bool


@dataclass(frozen=True)
class DeterminantReport:
    n: int
    determinant: int
    nonzero: bool


def _check_n(n: int) -> None:
    if n < 1:
        raise ValueError(f"truncation N must be >= 1, got {n}")


def _package(n: int, exact: Sequence[Fraction], a: Fraction) -> BoxFlatnessSolution:
    floats = np.asarray([float(p) for p in exact])
    # float() on a Fraction is correctly rounded; absorb the last-bit drift
    floats /= math.fsum(floats)
    wd = WeightDistribution(floats, provenance="flatness-optimal", tau=float(n), index_base=1)
    return BoxFlatnessSolution(n, tuple(exact), wd, a)


def normalization_constant(n: int) -> Fraction:
    """A = 2 / (2^{2N} - (2N)!/N!^2)."""
    _check_n(n)
    return Fraction(2, 4**n - math.comb(2 * n, n))


def closed_form_weights(n: int) -> BoxFlatnessSolution:
    _check_n(n)
    a = normalization_constant(n)
    exact = [a * math.comb(2 * n, n + k) for k in range(1, n + 1)]
    return _package(n, exact, a)


def half_binomial_log_weights(n: int) -> np.ndarray:
    """log P_n for n = 1..N via log-gamma; usable when N is too large for exact sums."""
    _check_n(n)
    k = np.arange(1, n + 1)
    lg = np.vectorize(math.lgamma)
    log_c = math.lgamma(2 * n + 1) - lg(n + k + 1) - lg(n - k + 1)
    top = log_c.max()
    return log_c - (top + math.log(np.exp(log_c - top).sum()))


# ---------------------------------------------------------------- linear system


def flatness_matrix(n: int) -> list[list[Fraction]]:
    """Rows m = 1..N-1 of the derivative conditions, then the normalization row."""
    _check_n(n)
    rows = [[Fraction((-1) ** k * k ** (2 * m)) for k in range(1, n + 1)] for m in range(1, n)]
    rows.append([Fraction(1)] * n)
    return rows


def solve_exact(matrix: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction]) -> list[Fraction]:
    """Gauss-Jordan elimination over the rationals with first-nonzero pivoting."""
    size = len(matrix)
    aug = [list(map(Fraction, row)) + [Fraction(b)] for row, b in zip(matrix, rhs)]
    for col in range(size):
        pivot = next((r for r in range(col, size) if aug[r][col] != 0), None)
        if pivot is None:
            raise NumericError(f"singular system at column {col}")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [v * inv for v in aug[col]]
        for r in range(size):
            if r != col and aug[r][col] != 0:
                factor = aug[r][col]
                aug[r] = [v - factor * p for v, p in zip(aug[r], aug[col])]
    return [row[-1] for row in aug]


def solve_flatness_system(n: int) -> BoxFlatnessSolution:
    """Solve the derivative conditions directly; an oracle for the closed form."""
    _check_n(n)
    rhs = [Fraction(0)] * (n - 1) + [Fraction(1)]
    exact = solve_exact(flatness_matrix(n), rhs)
    # recover A from the n = N entry, whose binomial coefficient is 1
    return _package(n, exact, exact[-1])


def verify_solution(n: int, weights: Sequence[Fraction] | None = None) -> ResidualReport:
    """Substitute weights (default: the closed form) into every equation exactly."""
    _check_n(n)
    if weights is None:
        weights = closed_form_weights(n).weights_exact
    rows = flatness_matrix(n)
    rhs = [Fraction(0)] * (n - 1) + [Fraction(1)]
    residuals = tuple(sum(c * p for c, p in zip(row, weights)) - b for row, b in zip(rows, rhs))
    return ResidualReport(n, residuals, all(r == 0 for r in residuals))


def bareiss_determinant(matrix: Sequence[Sequence[int]]) -> int:
    """Fraction-free integer determinant."""
    m = [list(row) for row in matrix]
    size = len(m)
    sign = 1
    prev = 1
    for k in range(size - 1):
        if m[k][k] == 0:
            swap = next((r for r in range(k + 1, size) if m[r][k] != 0), None)
            if swap is None:
                return 0
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        for i in range(k + 1, size):
            for j in range(k + 1, size):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[-1][-1]


def verify_uniqueness(n: int) -> DeterminantReport:
    """Exact determinant of the Vandermonde matrix M_jk = k^{2(j-1)}."""
    _check_n(n)
    if n > 12:
        raise ValueError("exact determinant check is limited to N <= 12")
    m = [[k ** (2 * (j - 1)) for k in range(1, n + 1)] for j in range(1, n + 1)]
    det = bareiss_determinant(m)
    return DeterminantReport(n, det, det != 0)


def center_derivatives(weights: Sequence[Fraction], order: int) -> list[Fraction]:
    """Exact coefficients c_k with d^k rho / d xi^k at xi = 1/2 equal to c_k pi^k.

    rho(xi) = sum_n P_n (1 - cos 2 pi n xi); odd derivatives vanish at the
    centre and the 2m-th is -(-1)^m 2^{2m} sum_n (-1)^n n^{2m} P_n (times pi^{2m}).
    """
    out = []
    for k in range(1, order + 1):
        if k % 2:
            out.append(Fraction(0))
            continue
        m = k // 2
        s = sum(Fraction((-1) ** n * n ** (2 * m)) * p for n, p in enumerate(weights, start=1))
        out.append(-((-1) ** m) * 2 ** (2 * m) * s)
    return out


# ---------------------------------------------------------------- KL scaling machinery


def full_binomial(n: int) -> dict[int, Fraction]:
    """Q_k = 2^{-2N} (2N)! / ((N+k)! (N-k)!) for k = -N..N."""
    _check_n(n)
    return {k: Fraction(math.comb(2 * n, n + k), 4**n) for k in range(-n, n + 1)}


def q_moments(n: int, k: int) -> Fraction:
    """<n^2> or <n^4> under the full centred binomial, summed exactly."""
    if k not in (2, 4):
        raise ValueError("only the second and fourth moments are provided")
    return sum((Fraction(j**k) * q for j, q in full_binomial(n).items()), Fraction(0))


def kl_to_boltzmann(n: int, tau: float | None = None) -> float:
    """D(P || P^B) between the N-state optimal weights and Boltzmann weights at tau (default N)."""
    tau = float(n) if tau is None else float(tau)
    p = closed_form_weights(n).weights
    q = boltzmann_weights(BOX, tau, n_trunc=n)
    return kl_divergence(p, q)


def kl_asymptotics(n_values: Iterable[int], tau_of_n=None) -> list[DivergenceReport]:
    """KL divergence at tau = N (or ``tau_of_n(N)``) with scaled value N^2 D."""
    reports = []
    for n in n_values:
        if n < 2:
            raise ValueError("the asymptotic scan needs N >= 2")
        tau = float(n) if tau_of_n is None else float(tau_of_n(n))
        d = kl_to_boltzmann(n, tau)
        reports.append(DivergenceReport(kl=d, scaled_kl=n * n * d, rate_label="N^2"))
    return reports
