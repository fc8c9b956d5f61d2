import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, special, stats

from twoechelon.unit_costs import (
    DEFAULT_EPSILON, Pi_closed_form, Pi_retailer, UnitCostTable, erlang_cdf, gamma_warehouse,
    gamma_warehouse_cdf_form, pi_retailer, truncation_level,
)

from conftest import make_params


def quad_Pi(Si, S0, p):
    """Independent oracle: average pi over the Erlang-distributed warehouse delay."""
    if S0 <= 0:
        return pi_retailer(Si, p.L0 - S0 / p.lam0 if S0 < 0 else p.L0, p)
    density = lambda t: pi_retailer(Si, p.L0 - t, p) * stats.gamma.pdf(t, S0, scale=1 / p.lam0)
    inner, _ = integrate.quad(density, 0, p.L0, epsabs=1e-14, epsrel=1e-13, limit=200)
    return inner + stats.gamma.sf(p.L0, S0, scale=1 / p.lam0) * pi_retailer(Si, 0.0, p)


def test_erlang_examples():
    assert erlang_cdf(0, 3.0, 2.0) == 1.0
    assert erlang_cdf(1, 1.0, 1.0) == pytest.approx(1 - math.exp(-1), rel=1e-15)
    assert erlang_cdf(5, 2.0, 3.0) == pytest.approx(special.gammainc(5, 6.0), rel=1e-13)


@given(S=st.integers(1, 400), t=st.floats(0.0, 50.0), rate=st.floats(0.01, 20.0))
def test_erlang_matches_incomplete_gamma(S, t, rate):
    ref = special.gammainc(S, rate * t)
    assert erlang_cdf(S, t, rate) == pytest.approx(ref, rel=1e-10, abs=1e-300)


def test_erlang_rejects_negative():
    with pytest.raises(ValueError):
        erlang_cdf(-1, 1.0, 1.0)


def test_gamma_examples():
    p = make_params(N=2, lam=1.0, L0=1.0, h0=1.0)
    assert gamma_warehouse(0, p) == 0.0
    assert gamma_warehouse(-3, p) == 0.0
    assert gamma_warehouse(1, p) == pytest.approx(math.exp(-2) / 2, rel=1e-14)


def test_gamma_monte_carlo():
    p = make_params(N=2, lam=1.0, L0=1.0, h0=1.0)
    rng = np.random.default_rng(7)
    arrival = rng.exponential(1 / p.lam0, 400_000)
    cost = p.h0 * np.maximum(arrival - p.L0, 0.0)
    se = cost.std(ddof=1) / math.sqrt(cost.size)
    assert abs(cost.mean() - gamma_warehouse(1, p)) < 3 * se


@pytest.mark.parametrize("lam0L0", [0.5, 4.0, 40.0])
def test_gamma_two_forms_agree(lam0L0):
    p = make_params(N=2, lam=lam0L0 / 2, L0=1.0, h0=1.3)
    for S0 in range(1, 201):
        assert gamma_warehouse_cdf_form(S0, p) == pytest.approx(gamma_warehouse(S0, p), rel=1e-10)


def test_pi_examples():
    assert pi_retailer(1, 0.0, make_params(L=0.0, h=1.7)) == pytest.approx(1.7, rel=1e-15)
    assert pi_retailer(1, 0.0, make_params(L=1.0, h=1.0, beta=2.0)) == pytest.approx(3 * math.exp(-1), rel=1e-14)


def test_pi_monte_carlo():
    p = make_params(lam=2.0, L=0.5, h=1.0, beta=1.0)
    rng = np.random.default_rng(11)
    t_demand = rng.gamma(2, 1 / p.lam, 400_000)
    lead = p.L + 0.5
    cost = p.h * np.maximum(t_demand - lead, 0) + p.beta * np.maximum(lead - t_demand, 0)
    se = cost.std(ddof=1) / math.sqrt(cost.size)
    assert abs(cost.mean() - pi_retailer(2, 0.5, p)) < 3 * se


def test_pi_rejects_negative_delay():
    with pytest.raises(ValueError):
        pi_retailer(1, -0.1, make_params())


def test_Pi_closed_form_negative_levels():
    p = make_params(N=2, lam=1.0, L=1.0, L0=1.0, beta=5.0)
    assert Pi_closed_form(-2, -1, p) == pytest.approx(p.beta * (p.L + p.L0 + 2 / p.lam + 1 / p.lam0), rel=1e-15)
    with pytest.raises(ValueError):
        Pi_closed_form(1, 0, p)


def test_Pi_monte_carlo_tagged_unit():
    p = make_params(N=2, lam=1.0, L=1.0, L0=1.0, h=1.0, h0=1.0, beta=5.0)
    rng = np.random.default_rng(3)
    n = 400_000
    wh_wait = np.maximum(p.L0 - rng.gamma(2, 1 / p.lam0, n), 0.0)
    arrival = p.L + wh_wait
    demand = rng.gamma(3, 1 / p.lam, n)
    cost = p.h * np.maximum(demand - arrival, 0) + p.beta * np.maximum(arrival - demand, 0)
    se = cost.std(ddof=1) / math.sqrt(n)
    assert abs(cost.mean() - Pi_retailer(3, 2, p)) < 3 * se


@pytest.mark.parametrize("params", [
    make_params(N=2), make_params(N=3, lam=0.5, L=2.0, beta=10.0), make_params(N=1, lam=2.0, L=0.5, L0=3.0, h=2.0, beta=1.0),
])
def test_Pi_recursion_matches_quadrature(params):
    table = UnitCostTable(params, si_min=-2, si_max=8)
    for Si in range(-2, 9):
        for S0 in range(0, table.s0_bar + 3):
            assert table.retailer(Si, S0) == pytest.approx(quad_Pi(Si, S0, params), rel=1e-9, abs=1e-11)


def test_seeding_rule():
    p = make_params()
    table = UnitCostTable(p, 1, 6)
    for Si in range(1, 7):
        assert table.retailer(Si, table.s0_bar) == table.pi_at_zero[Si] == pi_retailer(Si, 0.0, p)
    assert Pi_retailer(1, table.s0_bar, p) == pi_retailer(1, 0.0, p)


@pytest.mark.parametrize("params", [
    make_params(N=2), make_params(N=3, lam=0.5, L=2.0, beta=10.0), make_params(N=1, lam=2.0, L=0.5, L0=3.0, h=2.0, beta=1.0),
])
def test_convergence_to_seed(params):
    eps = DEFAULT_EPSILON
    table = UnitCostTable(params, 1, 8, epsilon=eps)
    threshold = 10 * eps * (params.h + params.beta) * (params.L + params.L0)
    for Si in range(1, 9):
        gap = [table.retailer(Si, S0) - table.pi_at_zero[Si] for S0 in range(table.s0_bar + 1)]
        # The gap may change sign once extra delay starts to save holding cost,
        # so it is only eventually monotone: from the peak of its last sign run.
        last_flip = max((j for j in range(1, len(gap)) if gap[j] * gap[j - 1] < 0), default=0)
        tail = [abs(g) for g in gap[last_flip:]]
        tail = tail[tail.index(max(tail)):]
        assert all(b <= a for a, b in zip(tail, tail[1:]))
        assert abs(gap[-2]) < threshold


def test_epsilon_halving_stable():
    p = make_params(N=3, Q=3)
    for Si, S0 in [(1, 0), (3, 2), (5, 4), (7, 9)]:
        a = Pi_retailer(Si, S0, p, epsilon=1e-10)
        b = Pi_retailer(Si, S0, p, epsilon=5e-11)
        assert abs(a - b) <= 1e-8 * abs(a)


def test_backorder_only_costs():
    p = make_params(h=0.0, h0=0.0, beta=3.0)
    table = UnitCostTable(p, -3, 10)
    assert all(gamma_warehouse(S0, p) == 0.0 for S0 in range(0, 30))
    for S0 in (0, 2, 5, 40):
        values = [table.retailer(Si, S0) for Si in range(-3, 11)]
        assert all(b <= a + 1e-15 for a, b in zip(values, values[1:]))
        assert all(v >= 0 for v in values)


@settings(max_examples=30, deadline=None)
@given(N=st.integers(1, 4), lam=st.floats(0.2, 3.0), L=st.floats(0.0, 3.0), L0=st.floats(0.0, 3.0),
       h=st.floats(0.0, 5.0), beta=st.floats(0.0, 20.0))
def test_table_finite_nonnegative(N, lam, L, L0, h, beta):
    p = make_params(N=N, lam=lam, L=L, L0=L0, h=h, beta=beta)
    table = UnitCostTable(p, -2, 6)
    for (Si, S0), v in table.Pi.items():
        assert math.isfinite(v) and v >= -1e-12


def test_truncation_level():
    p = make_params()
    bar = truncation_level(p)
    assert erlang_cdf(bar, p.L0, p.lam0) < DEFAULT_EPSILON <= erlang_cdf(bar - 1, p.L0, p.lam0)
    with pytest.raises(ValueError):
        truncation_level(p, 0.0)


def test_table_coverage():
    table = UnitCostTable(make_params(), 1, 3)
    with pytest.raises(KeyError):
        table.retailer(4, 0)
