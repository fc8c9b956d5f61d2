import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from twoechelon.core import Policy
from twoechelon.demand_probability import (
    EtaTable, RetailerClass, class_positions, eta_prob, f_count, m_prime, mu_distribution, mu_prob,
    representative_classes, retailer_class, split_weight, state_probability, trigger_distribution,
)
from twoechelon.oracle.enumeration import enumerate_trigger_distribution

from conftest import make_params

A, AT, B = RetailerClass.ABOVE, RetailerClass.AT, RetailerClass.BELOW


def test_state_probability_examples():
    for N in (1, 2, 5):
        assert state_probability(1, 0, make_params(N=N)) == 1.0
    assert state_probability(1, 2, make_params(N=2, Q=4)) == 0.5


def test_state_probability_matches_enumeration():
    # The other retailer sits uniformly on {1..4}; it is below R+s=2 exactly when x <= 2.
    params = make_params(N=3, Q=4)
    s = 3
    counts = {}
    for xs in itertools.product(range(1, 5), repeat=2):
        i = 1 + sum(x <= s for x in xs)
        counts[i] = counts.get(i, 0) + Fraction(1, 16)
    for i, p in counts.items():
        assert state_probability(i, s, params) == pytest.approx(float(p), abs=1e-15)


def test_state_probability_range():
    with pytest.raises(ValueError):
        state_probability(3, 1, make_params(N=2))


@given(N=st.integers(1, 8), Q=st.integers(1, 8), data=st.data())
def test_state_probability_sums_to_one(N, Q, data):
    s = data.draw(st.integers(0, Q - 1))
    params = make_params(N=N, Q=Q)
    assert sum(state_probability(i, s, params) for i in range(1, N + 1)) == pytest.approx(1.0, abs=1e-12)


def test_m_prime():
    assert m_prime(1, 2, 3) == 4
    assert m_prime(1, 0, 3) == 3
    assert m_prime(4, 3, 0) == 4


def test_batch_count_reference_values():
    assert mu_prob(A, False, 2, 4, 3, -1) == 0.5
    assert mu_prob(A, False, 2, 4, 3, 1) == 1.0


@pytest.mark.parametrize("b", [0, 1, 5])
@pytest.mark.parametrize("s", [1, 2, 3])
def test_trigger_class_in_B_at_s_minus_1(s, b):
    assert mu_prob(AT, True, s, 4, b, s - 1) == 1.0


def test_below_ratio():
    assert mu_prob(B, False, 3, 4, 1, 1) == pytest.approx(2 / 3, abs=1e-15)


def test_mu_residual_range():
    with pytest.raises(ValueError):
        mu_prob(A, False, 1, 4, 1, 4)


def test_mu_crossing_count_brute_force():
    # The retailer at x = I - R orders at cumulative demands x, x+Q, ...
    Q = 4
    for s in range(Q):
        for cls in RetailerClass:
            xs = list(class_positions(cls, s, Q))
            for l in range(0, 3 * Q):
                for b in range(0, 5):
                    u = l - b * Q
                    if not -Q < u < Q:
                        continue
                    expected = Fraction(sum(1 for x in xs if (0 if l < x else 1 + (l - x) // Q) == b),
                                        max(len(xs), 1))
                    if xs:
                        assert mu_prob(cls, False, s, Q, b, u) == float(expected)


@given(Q=st.integers(1, 7), l=st.integers(0, 40), data=st.data())
def test_mu_mass_one(Q, l, data):
    s = data.draw(st.integers(0, Q - 1))
    for cls in RetailerClass:
        if not class_positions(cls, s, Q):
            continue
        dist = mu_distribution(cls, False, s, Q, l, l // Q + 2)
        assert dist.sum() == pytest.approx(1.0, abs=1e-15)
        assert np.all((dist >= 0) & (dist <= 1))


def test_split_weight_example():
    assert split_weight(3, 2, 2) == 0.25


def test_f_count():
    assert f_count(2, B, 5) == 1
    assert f_count(2, A, 5) == 3
    assert f_count(1, B, 3) == 0
    assert f_count(3, A, 3) == 0
    assert representative_classes(1, 1) == [AT]


def test_exactly_one_at_retailer():
    for N in range(1, 6):
        for i in range(1, N + 1):
            assert [retailer_class(r, i) for r in range(1, N + 1)].count(AT) == 1


def test_eta_base_case_is_mu():
    table = EtaTable(1, AT, 1, 2, 2, b_max=4)
    for l in range(8):
        for b in range(5):
            u = l - b * 2
            expected = mu_prob(RetailerClass.AT, True, 1, 2, b, u) if -2 < u < 2 else 0.0
            assert table.prob(1, l, b) == expected
            assert eta_prob(1, l, b, AT, 1, 1, make_params(), b_max=4) == expected


def test_memoized_bit_identical():
    params = make_params(N=3, Q=3)
    policy = Policy(m=2, R=0, s=1)
    for i in range(1, 4):
        a = trigger_distribution(i, policy, params, memoize=True)
        b = trigger_distribution(i, policy, params, memoize=False)
        assert list(a.entries.items()) == list(b.entries.items())


def _max_dev(analytic, exact):
    keys = set(analytic.entries) | set(exact.law)
    return max(abs(analytic.entries.get(k, 0.0) - exact.law.get(k, 0.0)) for k in keys)


def test_full_law_N2_Q2():
    params = make_params(N=2, Q=2)
    for i in (1, 2):
        a = trigger_distribution(i, Policy(1, 1, 1), params)
        e = enumerate_trigger_distribution(i, Policy(1, 1, 1), params)
        assert _max_dev(a, e) <= 1e-9


def test_full_law_N3_Q2():
    params = make_params(N=3, Q=2)
    for i in (1, 2, 3):
        a = trigger_distribution(i, Policy(1, 1, 1), params)
        e = enumerate_trigger_distribution(i, Policy(1, 1, 1), params)
        assert _max_dev(a, e) <= 1e-9


def test_s0_m0_mass():
    dist = trigger_distribution(1, Policy(0, 0, 0), make_params(N=2, Q=2))
    assert dist.total_mass == 1.0
    assert dist.entries == {(AT, 0): 1.0}


def test_worked_example_support():
    dist = trigger_distribution(1, Policy(3, 5, 2), make_params(N=2, Q=4))
    ks = [k for k, p in dist.by_k().items() if p > 0]
    assert 13 <= min(ks) and max(ks) <= 17
    assert dist.total_mass == pytest.approx(1.0, abs=1e-12)


def test_unreachable_state_empty():
    assert trigger_distribution(2, Policy(1, 0, 0), make_params(N=2)).entries == {}


@settings(max_examples=60, deadline=None)
@given(N=st.integers(1, 5), Q=st.integers(1, 5), m=st.integers(0, 4), data=st.data())
def test_mass_and_support(N, Q, m, data):
    s = data.draw(st.integers(0, Q - 1))
    params = make_params(N=N, Q=Q)
    for i in range(1, N + 1):
        if state_probability(i, s, params) == 0.0:
            continue
        dist = trigger_distribution(i, Policy(m, 0, s), params)
        assert dist.total_mass == pytest.approx(1.0, abs=1e-9)
        assert all(0.0 <= p <= 1.0 for p in dist.entries.values())
        assert all(dist.bounds.lb <= k <= dist.bounds.ub for _, k in dist.entries)
