"""Flatness in the cumulative classical coordinate.

``y(xi)`` is the classical probability of lying below ``xi``, so the classical
density is uniform in y and a quantum density becomes ``sigma(y) = r(xi(y))``.
A distribution is flat to within epsilon on the set where sigma is within
epsilon of its supremum; the measure of that set is the flatness score.

The optimizer here is a heuristic: a multiplicative pattern search on the
weight simplex.  It never returns a point scoring below its start, and makes
no claim about reaching the epsilon -> 0 limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DomainError, NumericError
from .specfun import integrate, normal_cdf, normal_ppf
from .systems import (
    Kind,
    SystemModel,
    WeightDistribution,
    _check_tau,
    boltzmann_weights,
    classical_density,
    eigen_densities,
)
from .thermal import mixed_density

#: sigma above this multiple of its grid mean counts as unbounded
CEILING_FACTOR = 1e6

#: stage tolerances for the decreasing-epsilon schedule
EPSILON_SCHEDULE = tuple(1e-2 * 4.0**-k for k in range(6))

# extra points probed near the ends of (0, 1) when checking for blow-up
_EDGE_PROBES = (1e-6, 1e-12, 1e-50, 1e-100, 1e-250)


def _probe_points() -> list[float]:
    return [*_EDGE_PROBES, *(1.0 - p for p in _EDGE_PROBES if 1.0 - p < 1.0)]


# ---------------------------------------------------------------- coordinate map


def y_map(system: SystemModel, tau, xi) -> float:
    """y = integral of the classical density from the left end of the domain to xi."""
    _check_tau(tau)
    system.check_position(xi)
    if system.kind is Kind.BOX:
        return float(xi)
    if system.kind is Kind.OSCILLATOR:
        return normal_cdf(float(xi), float(tau))
    return -math.expm1(-float(xi) / float(tau))


def y_inverse(system: SystemModel, tau, y) -> float:
    _check_tau(tau)
    if not 0.0 <= y <= 1.0:
        raise DomainError(f"y={y} lies outside [0, 1]")
    if system.kind is Kind.BOX:
        return float(y)
    if system.kind is Kind.OSCILLATOR:
        if y in (0.0, 1.0):
            return math.copysign(math.inf, y - 0.5)
        return normal_ppf(float(y), float(tau))
    if y == 1.0:
        return math.inf
    return -float(tau) * math.log1p(-float(y))


# ---------------------------------------------------------------- sigma


def _component_row(system: SystemModel, tau: float, count: int, y: float) -> np.ndarray:
    """sigma_n(y) = |psi_n(xi(y))|^2 / rho_c(xi(y)) for the first ``count`` states."""
    xi = y_inverse(system, tau, y)
    rho_c = classical_density(system, tau, xi)
    if rho_c == 0.0:
        raise NumericError(f"classical density underflows at y={y}")
    return eigen_densities(system, count, xi) / rho_c


def sigma_density(system: SystemModel, tau, w: WeightDistribution, y) -> float:
    """sum_n w_n sigma_n(y); equals the ratio r at xi(y)."""
    if not 0.0 < y < 1.0:
        raise DomainError(f"sigma needs 0 < y < 1 (the Jacobian may diverge at the ends), got y={y}")
    _check_tau(tau)
    xi = y_inverse(system, tau, y)
    rho_c = classical_density(system, tau, xi)
    if rho_c == 0.0:
        raise NumericError(f"classical density underflows at y={y}")
    return float(mixed_density(system, w, xi, "native")) / rho_c


def midpoint_grid(grid: int) -> np.ndarray:
    if grid < 1:
        raise DomainError("grid needs at least one point")
    return (np.arange(grid) + 0.5) / grid


@dataclass
class YDensity:
    """sigma(y) for one system, temperature and weight set, tabulated on demand."""

    system: SystemModel
    tau: float
    weights: WeightDistribution
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        _check_tau(self.tau)
        if self.weights.index_base != self.system.index_base:
            raise DomainError("weights and system use different index bases")

    def __call__(self, y: float) -> float:
        return sigma_density(self.system, self.tau, self.weights, y)

    def components(self, grid: int) -> np.ndarray:
        """Matrix M with M[k, n] = sigma_n(y_k) on the midpoint grid."""
        m = self._cache.get(grid)
        if m is None:
            ys = midpoint_grid(grid)
            m = np.vstack([_component_row(self.system, self.tau, len(self.weights), y) for y in ys])
            self._cache[grid] = m
        return m

    def values(self, grid: int) -> np.ndarray:
        return self.components(grid) @ self.weights.floats()

    def integral(self, tol: float = 1e-9) -> float:
        """Adaptive quadrature of sigma over (0, 1); nodes never touch the ends."""
        return integrate(self, 0.0, 1.0, tol, max_intervals=2000).value

    def probe_components(self) -> np.ndarray:
        """sigma_n at the edge probes, skipping points where rho_c underflows."""
        m = self._cache.get("probes")
        if m is None:
            rows = []
            for y in _probe_points():
                try:
                    row = _component_row(self.system, self.tau, len(self.weights), y)
                except NumericError:
                    continue
                if np.all(np.isfinite(row)):
                    rows.append(row)
            m = np.vstack(rows) if rows else np.zeros((0, len(self.weights)))
            self._cache["probes"] = m
        return m

    def check_bounded(self, grid: int = 1001) -> None:
        """Raise DomainError if sigma runs past CEILING_FACTOR times its mean."""
        vals = self.values(grid)
        ceiling = CEILING_FACTOR * float(np.mean(vals))
        peak = float(vals.max())
        probes = self.probe_components()
        if len(probes):
            peak = max(peak, float((probes @ self.weights.floats()).max()))
        if not math.isfinite(peak) or peak > ceiling:
            raise DomainError(
                f"sigma reaches {peak:.3g}, above {CEILING_FACTOR:g} times its mean: it is unbounded "
                "(for the oscillator this happens when the classical spread is narrower than the quantum one)"
            )

    def sigma_max(self, grid: int = 1001) -> float:
        """Grid maximum refined by bounded 1-D searches around the three best points."""
        vals = self.values(grid)
        ys = midpoint_grid(grid)
        best = float(vals.max())
        h = 1.0 / grid
        for k in np.argsort(vals)[-3:]:
            lo = max(ys[k] - h, 0.5 * h)
            hi = min(ys[k] + h, 1.0 - 0.5 * h)
            res = minimize_scalar(lambda y: -self(y), bounds=(lo, hi), method="bounded", options={"xatol": 1e-10})
            if res.success:
                best = max(best, -float(res.fun))
        return best


@dataclass(frozen=True)
class FlatnessScore:
    epsilon: float
    measure: float
    sigma_max: float

    def __post_init__(self):
        if not 0.0 <= self.measure <= 1.0:
            raise ValueError(f"measure {self.measure} outside [0, 1]")


def _measure(values: np.ndarray, top: float, epsilon: float) -> float:
    return float(np.count_nonzero(values >= top - epsilon)) / len(values)


def flatness_score(sigma: YDensity, epsilon: float, grid: int = 1001) -> FlatnessScore:
    """Lebesgue measure of {y : sigma(y) >= sigma_max - epsilon} on a midpoint grid."""
    if not epsilon > 0:
        raise DomainError("epsilon must be positive")
    sigma.check_bounded(grid)
    top = sigma.sigma_max(grid)
    return FlatnessScore(float(epsilon), _measure(sigma.values(grid), top, epsilon), top)


def flatness_probability_x(sigma: YDensity, epsilon: float, grid: int = 4001, sigma_max: float | None = None) -> float:
    """Classical probability of {xi : r(xi) >= sup r - epsilon}, summed on a uniform xi grid.

    The same quantity as :func:`flatness_score`, computed in the original
    coordinate as an independent check.  Each xi cell carries its exact
    classical mass ``y(right) - y(left)``.
    """
    system, tau = sigma.system, sigma.tau
    if system.kind is Kind.BOX:
        lo, hi = 0.0, 1.0
    elif system.kind is Kind.OSCILLATOR:
        lo, hi = -8.0 * math.sqrt(tau), 8.0 * math.sqrt(tau)
    else:
        # classical mass beyond 20 tau is e^{-20}
        lo, hi = 0.0, 20.0 * tau
    edges = np.linspace(lo, hi, grid + 1)
    mids = 0.5 * (edges[:-1] + edges[1:])
    mass = np.diff([y_map(system, tau, x) for x in edges])
    w = sigma.weights
    r = np.asarray([float(mixed_density(system, w, x, "native")) / classical_density(system, tau, x) for x in mids])
    top = float(r.max()) if sigma_max is None else sigma_max
    return float(np.sum(mass[r >= top - epsilon]))


# ---------------------------------------------------------------- optimizer


@dataclass(frozen=True)
class TraceEntry:
    start: int
    epsilon: float
    score: float
    shortfall: float


class FlatnessOptimizer:
    """Pattern search over log-weights, maximizing the flatness score.

    Moves are single-coordinate nudges plus low-order polynomial tilts of the
    log-weights across the index range.  Starts are the truncated Boltzmann
    weights (or ``start``) as given, and then that point and ``restarts``
    seeded Dirichlet points after a tilt-only pass minimizing
    ``(max - mean) / mean``.  Each
    start runs a decreasing-epsilon schedule in which a move is taken only if
    it raises the key ``(score, -shortfall)``; ``shortfall`` is the summed
    distance by which grid points miss the superlevel set.  The step halves
    when no move helps.

    One instance per run: the object holds mutable search state.
    """

    def __init__(
        self,
        system: SystemModel,
        tau: float,
        n_trunc: int,
        epsilon: float,
        seed: int = 0,
        *,
        grid: int = 1001,
        restarts: int = 2,
        max_evals: int = 20000,
        min_step: float = 1e-10,
        start: WeightDistribution | None = None,
    ):
        if n_trunc < 1:
            raise DomainError("n_trunc must be at least 1")
        if not epsilon > 0:
            raise DomainError("epsilon must be positive")
        _check_tau(tau)
        self.system = system
        self.tau = float(tau)
        self.n = int(n_trunc)
        self.epsilon = float(epsilon)
        self.grid = grid
        self.restarts = restarts
        self.max_evals = max_evals
        self.min_step = min_step
        self.rng = np.random.default_rng(seed)
        if start is None:
            start = boltzmann_weights(system, tau, n_trunc=self.n)
        elif len(start) != self.n or start.index_base != system.index_base:
            raise DomainError("start weights do not match the system and truncation")
        self.start = start
        self.sigma = YDensity(system, self.tau, self.start)
        self.matrix = self.sigma.components(grid)
        self.probes = self.sigma.probe_components()
        x = np.linspace(-1.0, 1.0, self.n) if self.n > 1 else np.zeros(1)
        self.tilts = [x**d for d in (1, 2, 3)] if self.n > 1 else []
        self.trace: list[TraceEntry] = []

    def _key(self, v: np.ndarray, eps: float):
        w = _softmax(v)
        s = self.matrix @ w
        # points past the blow-up ceiling rank below every admissible point
        ceiling = CEILING_FACTOR * s.mean()
        over = (self.probes @ w).max() - ceiling if len(self.probes) else -1.0
        if over > 0 or s.max() > ceiling:
            return (-1.0, -max(over, s.max() - ceiling))
        top = s.max()
        gap = top - eps - s
        return (_measure(s, top, eps), -float(np.sum(gap[gap > 0])))

    def _spread_key(self, v: np.ndarray, eps: float):
        # continuous surrogate: how far the peak stands above the mean
        w = _softmax(v)
        s = self.matrix @ w
        ceiling = CEILING_FACTOR * s.mean()
        if len(self.probes) and (self.probes @ w).max() > ceiling:
            return (-math.inf,)
        return (-(s.max() - s.mean()) / s.mean(),)

    def _search(self, v: np.ndarray, eps: float, key_fn=None, tilts_only: bool = False):
        key_fn = key_fn or self._key
        key = key_fn(v, eps)
        step = 0.5
        evals = 0
        moves = [] if self.n == 1 else self.tilts if tilts_only else [*self.tilts, *np.eye(self.n)]
        while step >= self.min_step and evals < self.max_evals:
            improved = False
            for d in moves:
                for sgn in (1.0, -1.0):
                    trial = v + sgn * step * d
                    k = key_fn(trial, eps)
                    evals += 1
                    if k > key:
                        v, key, improved = trial, k, True
                        break
                if evals >= self.max_evals:
                    break
            if not improved:
                step *= 0.5
        return v, key

    def run(self) -> WeightDistribution:
        self.sigma.check_bounded(self.grid)
        stages = [e for e in EPSILON_SCHEDULE if e > self.epsilon] + [self.epsilon]
        v0 = np.log(np.maximum(self.start.floats(), 1e-300))
        randoms = [np.log(self.rng.dirichlet(np.ones(self.n))) for _ in range(self.restarts)]
        # the raw start, then every start after a tilt-only flattening pass
        starts = [v0] + [self._search(v, self.epsilon, self._spread_key, tilts_only=True)[0] for v in [v0, *randoms]]
        best_v, best_key = v0, self._key(v0, self.epsilon)
        for i, v in enumerate(starts):
            for eps in stages:
                v, key = self._search(v, eps)
                final = self._key(v, self.epsilon)
                self.trace.append(TraceEntry(i, eps, final[0], -final[1]))
            if final > best_key:
                best_v, best_key = v, final
        found = WeightDistribution(
            _softmax(best_v), provenance="custom", tau=self.tau, index_base=self.system.index_base,
            meta={"method": "pattern-search", "epsilon": self.epsilon},
        )
        # the internal key skips sigma_max refinement; recheck with the full score
        base = flatness_score(self.sigma, self.epsilon, self.grid).measure
        try:
            got = flatness_score(YDensity(self.system, self.tau, found), self.epsilon, self.grid).measure
        except DomainError:
            return self.start
        return found if got >= base else self.start


def _softmax(v: np.ndarray) -> np.ndarray:
    e = np.exp(v - v.max())
    return e / math.fsum(e)


def optimize_flatness(system: SystemModel, tau, n_trunc: int, epsilon: float, seed: int = 0, **kwargs) -> WeightDistribution:
    """Heuristic flatness maximizer started from the truncated Boltzmann weights (or ``start=``)."""
    return FlatnessOptimizer(system, tau, n_trunc, epsilon, seed, **kwargs).run()


__all__ = [
    "CEILING_FACTOR",
    "EPSILON_SCHEDULE",
    "FlatnessOptimizer",
    "FlatnessScore",
    "TraceEntry",
    "YDensity",
    "flatness_probability_x",
    "flatness_score",
    "midpoint_grid",
    "optimize_flatness",
    "sigma_density",
    "y_inverse",
    "y_map",
]
