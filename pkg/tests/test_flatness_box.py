import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from thermoflat.flatness_box import (
    bareiss_determinant,
    center_derivatives,
    closed_form_weights,
    full_binomial,
    half_binomial_log_weights,
    kl_asymptotics,
    kl_to_boltzmann,
    normalization_constant,
    q_moments,
    solve_flatness_system,
    verify_solution,
    verify_uniqueness,
)
from thermoflat.systems import BOX
from thermoflat.thermal import mixed_density


def test_small_cases_by_hand():
    assert closed_form_weights(1).weights_exact == (Fraction(1),)
    assert closed_form_weights(2).weights_exact == (Fraction(4, 5), Fraction(1, 5))
    assert closed_form_weights(3).weights_exact == (Fraction(15, 22), Fraction(6, 22), Fraction(1, 22))
    assert solve_flatness_system(2).weights_exact == (Fraction(4, 5), Fraction(1, 5))
    assert solve_flatness_system(1).weights_exact == (Fraction(1),)


def test_hand_residuals_for_three_states():
    p = [Fraction(15), Fraction(6), Fraction(1)]
    assert -p[0] + 4 * p[1] - 9 * p[2] == 0
    assert -p[0] + 16 * p[1] - 81 * p[2] == 0
    assert verify_solution(3).residuals == (0, 0, 0)


@pytest.mark.parametrize("n", range(1, 13))
def test_closed_form_equals_direct_solve(n):
    a = closed_form_weights(n)
    b = solve_flatness_system(n)
    assert a.weights_exact == b.weights_exact
    assert a.normalization_a == b.normalization_a


@pytest.mark.parametrize("n", range(1, 21))
def test_exact_solution(n):
    sol = closed_form_weights(n)
    assert sum(sol.weights_exact) == 1
    assert all(p > 0 for p in sol.weights_exact)
    rep = verify_solution(n)
    assert rep.ok and all(r == 0 for r in rep.residuals)


def test_wrong_weights_leave_residuals():
    rep = verify_solution(3, [Fraction(1, 3)] * 3)
    assert not rep.ok


def test_normalization_constant():
    assert normalization_constant(2) == Fraction(2, 16 - 6)
    assert normalization_constant(3) == Fraction(1, 22)


def test_vandermonde_determinants():
    assert verify_uniqueness(1).determinant == 1
    assert verify_uniqueness(2).determinant == 3
    for n in range(1, 13):
        rep = verify_uniqueness(n)
        assert rep.nonzero
        # Vandermonde in the squares k^2
        nodes = [k * k for k in range(1, n + 1)]
        expected = math.prod(nodes[j] - nodes[i] for i in range(n) for j in range(i + 1, n))
        assert rep.determinant == expected
    with pytest.raises(ValueError):
        verify_uniqueness(13)


def test_bareiss_with_pivot_swap():
    assert bareiss_determinant([[0, 1], [1, 0]]) == -1
    assert bareiss_determinant([[1, 2], [2, 4]]) == 0


@pytest.mark.parametrize("n", range(1, 16))
def test_binomial_moments(n):
    assert sum(full_binomial(n).values()) == 1
    assert q_moments(n, 2) == Fraction(n, 2)
    assert q_moments(n, 4) == Fraction(3, 4) * n * n - Fraction(1, 4) * n
    assert q_moments(1, 2) == Fraction(1, 2)


def test_moment_order_is_checked():
    with pytest.raises(ValueError):
        q_moments(3, 3)


@pytest.mark.parametrize("n", [1, 5, 12, 30])
def test_float_projection(n):
    sol = closed_form_weights(n)
    exact = np.array([float(p) for p in sol.weights_exact])
    np.testing.assert_allclose(sol.weights.floats(), exact, rtol=1e-14)


@pytest.mark.parametrize("n", [2, 10, 50, 100])
def test_half_binomial_strictly_decreasing(n):
    logs = half_binomial_log_weights(n)
    assert np.all(np.diff(logs) < 0)
    assert math.fsum(np.exp(logs)) == pytest.approx(1.0, abs=1e-14)


def test_log_weights_match_exact():
    sol = closed_form_weights(20)
    exact = np.array([math.log(p) for p in sol.weights_exact])
    np.testing.assert_allclose(half_binomial_log_weights(20), exact, rtol=1e-12, atol=1e-12)


def test_thirteen_derivatives_vanish_at_centre_for_seven_states():
    d = center_derivatives(closed_form_weights(7).weights_exact, 14)
    assert all(c == 0 for c in d[:13])
    assert d[13] != 0


def test_optimal_density_flatter_than_boltzmann_near_centre():
    sol = closed_form_weights(7)
    from thermoflat.systems import boltzmann_weights

    boltz = boltzmann_weights(BOX, 7.0, n_trunc=7)
    xs = np.linspace(0.3, 0.7, 41)
    opt = [mixed_density(BOX, sol.weights, x) for x in xs]
    bol = [mixed_density(BOX, boltz, x) for x in xs]
    assert np.ptp(opt) < np.ptp(bol)


@given(st.integers(1, 40))
def test_exact_weights_property(n):
    sol = closed_form_weights(n)
    assert sum(sol.weights_exact) == 1
    assert all(a > b for a, b in zip(sol.weights_exact, sol.weights_exact[1:]))


def test_kl_trend_and_rate():
    reps = kl_asymptotics([5, 10, 20, 40, 80])
    kls = [r.kl for r in reps]
    assert all(a > b for a, b in zip(kls, kls[1:]))
    a, b = kl_asymptotics([50, 100])
    assert abs(b.scaled_kl / a.scaled_kl - 1) <= 0.15
    assert b.rate_label == "N^2"
    assert kl_to_boltzmann(7) > 0


def test_kl_asymptotics_validation():
    with pytest.raises(ValueError):
        kl_asymptotics([1])
    with pytest.raises(ValueError):
        closed_form_weights(0)


def test_tau_override():
    assert kl_asymptotics([10], tau_of_n=lambda n: 2 * n)[0].kl == kl_to_boltzmann(10, 20.0)
