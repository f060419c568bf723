import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from thermoflat.errors import DomainError
from thermoflat.flatness_osc import (
    artanh,
    effective_temperature,
    geometric_variance,
    kl_closed_form,
    matched_weights,
    position_variance,
)
from thermoflat.systems import OSCILLATOR, boltzmann_weights
from thermoflat.thermal import kl_divergence, ratio


def _artanh_oracle(x):
    # Maclaurin series x + x^3/3 + x^5/5 + ...
    total, term, k = 0.0, x, 1
    while abs(term) / k > 1e-18:
        total += term / k
        term *= x * x
        k += 2
    return total


def _series_kl(tau):
    """Direct sum of p log(p/q) over the two geometric distributions."""
    te = effective_temperature(tau)
    ap, aq = -math.expm1(-1 / te), -math.expm1(-1 / tau)
    terms = []
    n = 0
    while True:
        p = ap * math.exp(-n / te)
        terms.append(p * (math.log(ap / aq) - n / te + n / tau))
        if math.exp(-n / te) < 1e-14 and n > 10:
            break
        n += 1
    return math.fsum(terms)


def test_effective_temperature_at_one():
    assert effective_temperature(1.0) == pytest.approx(1 / (2 * _artanh_oracle(0.5)), rel=1e-14)
    assert effective_temperature(1.0) == pytest.approx(0.9102392266, abs=1e-10)


def test_artanh_against_series():
    for x in (1e-8, 0.1, 0.5, 0.9):
        assert artanh(x) == pytest.approx(_artanh_oracle(x), rel=1e-14)


@pytest.mark.parametrize("tau", [10.0, 100.0])
def test_large_tau_offset(tau):
    assert (tau - effective_temperature(tau)) * 12 * tau == pytest.approx(1.0, rel=0.02)


def test_effective_temperature_near_half():
    assert effective_temperature(0.5 + 1e-12) < 0.05
    with pytest.raises(DomainError, match="ground state"):
        effective_temperature(0.4)
    with pytest.raises(DomainError):
        effective_temperature(0.5)


def test_effective_temperature_increasing():
    taus = np.linspace(0.51, 50, 400)
    te = [effective_temperature(t) for t in taus]
    assert all(a < b for a, b in zip(te, te[1:]))
    assert all(e < t for e, t in zip(te, taus))


@given(st.floats(0.5001, 1e3))
def test_variance_bridge(tau):
    assert geometric_variance(effective_temperature(tau)) == pytest.approx(tau, rel=1e-12)


def test_matched_variance_and_ratio():
    m = matched_weights(2.0)
    assert position_variance(m.weights) == pytest.approx(2.0, rel=1e-9)
    assert m.weights.tail_mass <= 1e-12
    for xi in np.linspace(-5 * math.sqrt(2), 5 * math.sqrt(2), 101):
        assert ratio(OSCILLATOR, m.weights, 2.0, xi) == pytest.approx(1.0, abs=1e-9)


def test_geometric_structure():
    m = matched_weights(3.0)
    w = m.weights.floats()
    np.testing.assert_allclose(w[1:] / w[:-1], math.exp(-1 / m.tau_effective), rtol=1e-12)


def test_high_temperature_weights_flatten():
    m = matched_weights(1e4, n_trunc=50)
    w = m.weights.floats()
    # untruncated P_0 = 1 - exp(-1/tau_e)
    assert -math.expm1(-1 / m.tau_effective) < 1e-3
    assert w[1] / w[0] > 0.999


def test_closed_form_kl_matches_series():
    assert kl_closed_form(2.0).kl == pytest.approx(_series_kl(2.0), rel=1e-10)


def test_closed_form_kl_matches_truncated_distributions():
    tau = 2.0
    m = matched_weights(tau, 200)
    b = boltzmann_weights(OSCILLATOR, tau, n_trunc=200)
    assert kl_divergence(m.weights, b) == pytest.approx(kl_closed_form(tau).kl, rel=1e-9)


def test_fourth_power_rate():
    scaled = [kl_closed_form(t).scaled_kl for t in (5.0, 10.0, 20.0, 40.0)]
    errs = [abs(s - 1) for s in scaled]
    assert all(a > b for a, b in zip(errs, errs[1:]))
    assert errs[-1] <= 0.05
    assert kl_closed_form(40.0).rate_label == "288 tau^4"


@given(st.floats(0.51, 500))
def test_kl_positive(tau):
    assert kl_closed_form(tau).kl > 0


def test_kl_is_asymmetric_at_tau_one():
    tau = 1.0
    m = matched_weights(tau, 100)
    b = boltzmann_weights(OSCILLATOR, tau, n_trunc=100)
    assert kl_divergence(m.weights, b) != pytest.approx(kl_divergence(b, m.weights), rel=1e-3)


def test_position_variance_needs_oscillator_weights():
    from thermoflat.systems import BOX

    with pytest.raises(DomainError):
        position_variance(boltzmann_weights(BOX, 2.0))
