import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thermoflat.errors import DomainError
from thermoflat.flatness_box import closed_form_weights
from thermoflat.flatness_osc import matched_weights
from thermoflat.linpot import plateau_level
from thermoflat.systems import BOX, LINEAR_POTENTIAL, OSCILLATOR, WeightDistribution, boltzmann_weights
from thermoflat.thermal import mixed_density
from thermoflat.ytransform import (
    EPSILON_SCHEDULE,
    FlatnessOptimizer,
    FlatnessScore,
    YDensity,
    flatness_probability_x,
    flatness_score,
    midpoint_grid,
    optimize_flatness,
    sigma_density,
    y_inverse,
    y_map,
)


def test_coordinate_map_values():
    assert y_map(BOX, 3.0, 0.37) == 0.37
    assert y_map(LINEAR_POTENTIAL, 2.0, 2.0) == pytest.approx(1 - math.exp(-1), rel=1e-15)
    assert y_map(LINEAR_POTENTIAL, 2.0, 2.0) == pytest.approx(0.632121, abs=1e-6)
    assert y_map(OSCILLATOR, 2.0, 0.0) == pytest.approx(0.5, abs=1e-16)


@given(st.floats(0.001, 0.999), st.sampled_from([BOX, OSCILLATOR, LINEAR_POTENTIAL]), st.floats(0.6, 20))
def test_coordinate_round_trip(y, system, tau):
    assert y_map(system, tau, y_inverse(system, tau, y)) == pytest.approx(y, abs=1e-12)


def test_coordinate_map_monotone():
    for system, xs in ((OSCILLATOR, np.linspace(-6, 6, 50)), (LINEAR_POTENTIAL, np.linspace(0, 20, 50))):
        ys = [y_map(system, 2.0, x) for x in xs]
        assert all(a < b for a, b in zip(ys, ys[1:]))
    assert y_map(LINEAR_POTENTIAL, 2.0, 0.0) == 0.0


def test_sigma_is_box_density():
    w = boltzmann_weights(BOX, 5.0)
    for y in (0.1, 0.3, 0.77):
        assert sigma_density(BOX, 5.0, w, y) == pytest.approx(mixed_density(BOX, w, y), rel=1e-14)
    with pytest.raises(DomainError):
        sigma_density(BOX, 5.0, w, 0.0)


def test_matched_oscillator_sigma_is_one():
    w = matched_weights(2.0).weights
    for y in np.linspace(0.01, 0.99, 99):
        assert sigma_density(OSCILLATOR, 2.0, w, y) == pytest.approx(1.0, abs=1e-9)


def test_linear_sigma_rises_to_plateau():
    sigma = YDensity(LINEAR_POTENTIAL, 2.0, boltzmann_weights(LINEAR_POTENTIAL, 2.0))
    assert sigma(1e-4) < 0.01
    level = plateau_level(2.0)
    for y in (0.96, 0.99, 0.999):
        assert sigma(y) == pytest.approx(level, rel=1e-9)
    vals = sigma.values(201)
    assert vals[0] < vals[20] < vals[100]


@pytest.mark.parametrize("system", [BOX, OSCILLATOR, LINEAR_POTENTIAL])
def test_sigma_normalized(system):
    sigma = YDensity(system, 2.0, boltzmann_weights(system, 2.0))
    assert sigma.integral() == pytest.approx(1.0, abs=1e-6)
    assert np.all(sigma.values(201) >= 0)


def test_box_boltzmann_peak_at_centre():
    sigma = YDensity(BOX, 5.0, boltzmann_weights(BOX, 5.0))
    vals = sigma.values(1001)
    assert midpoint_grid(1001)[np.argmax(vals)] == pytest.approx(0.5)
    assert sigma.sigma_max() == pytest.approx(sigma(0.5), rel=1e-12)


def test_uniform_sigma_scores_one():
    sigma = YDensity(OSCILLATOR, 2.0, matched_weights(2.0).weights)
    for eps in (1e-2, 1e-6, 1e-9):
        assert flatness_score(sigma, eps).measure == 1.0


def test_measure_monotone_in_epsilon():
    for system in (BOX, LINEAR_POTENTIAL):
        sigma = YDensity(system, 2.0, boltzmann_weights(system, 2.0))
        scores = [flatness_score(sigma, e).measure for e in (1e-1, 1e-2, 1e-3, 1e-4, 1e-5)]
        assert all(0 <= s <= 1 for s in scores)
        assert all(a >= b for a, b in zip(scores, scores[1:]))


def test_optimal_box_weights_beat_boltzmann():
    eps = 1e-4
    opt = flatness_score(YDensity(BOX, 7.0, closed_form_weights(7).weights), eps).measure
    boltz = flatness_score(YDensity(BOX, 7.0, boltzmann_weights(BOX, 7.0)), eps).measure
    assert opt >= boltz


@pytest.mark.parametrize(
    "system, weights",
    [
        (BOX, boltzmann_weights(BOX, 7.0)),
        (BOX, closed_form_weights(7).weights),
        (LINEAR_POTENTIAL, boltzmann_weights(LINEAR_POTENTIAL, 2.0)),
    ],
)
def test_score_matches_x_probability(system, weights):
    tau = weights.tau
    sigma = YDensity(system, tau, weights)
    for eps in (1e-2, 1e-4):
        sc = flatness_score(sigma, eps)
        px = flatness_probability_x(sigma, eps, sigma_max=sc.sigma_max)
        assert sc.measure == pytest.approx(px, abs=1e-3)


def test_unbounded_sigma_detected():
    sigma = YDensity(OSCILLATOR, 0.3, boltzmann_weights(OSCILLATOR, 0.3))
    with pytest.raises(DomainError, match="unbounded"):
        flatness_score(sigma, 1e-3)


def test_score_validation():
    with pytest.raises(ValueError):
        FlatnessScore(1e-3, 1.5, 1.0)
    sigma = YDensity(BOX, 2.0, boltzmann_weights(BOX, 2.0))
    with pytest.raises(DomainError):
        flatness_score(sigma, 0.0)
    with pytest.raises(DomainError):
        YDensity(BOX, 2.0, boltzmann_weights(OSCILLATOR, 2.0))


def test_epsilon_schedule():
    assert EPSILON_SCHEDULE[0] == 1e-2
    assert len(EPSILON_SCHEDULE) == 6
    assert all(b == pytest.approx(a / 4) for a, b in zip(EPSILON_SCHEDULE, EPSILON_SCHEDULE[1:]))


def test_optimizer_recovers_matched_oscillator():
    tau, eps = 2.0, 1e-6
    target = flatness_score(YDensity(OSCILLATOR, tau, matched_weights(tau, 60).weights), eps).measure
    w = optimize_flatness(OSCILLATOR, tau, 60, eps)
    got = flatness_score(YDensity(OSCILLATOR, tau, w), eps).measure
    assert got >= target - 1e-3


def test_optimizer_improves_box_and_is_idempotent():
    eps = 1e-4
    start = boltzmann_weights(BOX, 5.0, n_trunc=5)
    base = flatness_score(YDensity(BOX, 5.0, start), eps).measure
    opt = FlatnessOptimizer(BOX, 5.0, 5, eps, seed=1)
    w = opt.run()
    first = flatness_score(YDensity(BOX, 5.0, w), eps).measure
    assert first >= base
    assert opt.trace and all(0 <= t.score <= 1 for t in opt.trace)
    again = optimize_flatness(BOX, 5.0, 5, eps, seed=2, start=w)
    assert flatness_score(YDensity(BOX, 5.0, again), eps).measure >= first


def test_optimizer_validation():
    with pytest.raises(DomainError):
        FlatnessOptimizer(BOX, 5.0, 0, 1e-3)
    with pytest.raises(DomainError):
        FlatnessOptimizer(BOX, 5.0, 3, 0.0)
    with pytest.raises(DomainError):
        FlatnessOptimizer(BOX, 5.0, 3, 1e-3, start=WeightDistribution(np.array([0.5, 0.5])))


def test_single_state_optimizer_returns_start():
    w = optimize_flatness(BOX, 2.0, 1, 1e-3)
    assert w.floats().tolist() == [1.0]
