"""Per-unit cost functions for one-for-one unit tracking.

``gamma(S0)`` is the expected warehouse holding cost of a unit that will be
pulled by the ``S0``-th system demand after it is ordered; ``pi(S, t)`` the
expected retailer holding plus backorder cost of a unit that serves the
``S``-th retailer demand after the retailer order, when the warehouse adds a
delay ``t``; ``Pi(S, S0)`` the same cost averaged over the random warehouse
delay.  All costs are per unit, in money.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .core import SystemParams

DEFAULT_EPSILON = 1e-10


def poisson_terms(x: float, n: int) -> list[float]:
    """``[P(N = k) for k in range(n)]`` for ``N ~ Poisson(x)``, by term ratios."""
    terms = []
    term = math.exp(-x)
    for k in range(n):
        terms.append(term)
        term *= x / (k + 1)
    return terms


def erlang_sf(S: int, t: float, rate: float) -> float:
    """Probability that fewer than ``S`` arrivals occur by ``t``."""
    if S <= 0:
        return 0.0
    return math.fsum(poisson_terms(rate * t, S))


def erlang_cdf(S: int, t: float, rate: float) -> float:
    """Probability of at least ``S`` Poisson(``rate``) arrivals by time ``t``.

    Equivalently the CDF at ``t`` of an Erlang(``S``, ``rate``) variable.
    """
    if S < 0 or t < 0:
        raise ValueError("erlang_cdf needs S >= 0 and t >= 0")
    if S == 0:
        return 1.0
    x = rate * t
    if x == 0.0:
        return 0.0
    if x > S:
        # The lower tail is the small side here; sum it directly.
        return 1.0 - erlang_sf(S, t, rate)
    term = math.exp(-x + S * math.log(x) - math.lgamma(S + 1))
    terms = []
    k = S
    while term > 0.0:
        terms.append(term)
        k += 1
        term *= x / k
        if term < 1e-17 * terms[0]:
            break
    return min(1.0, math.fsum(terms))


def gamma_warehouse(S0: int, params: SystemParams) -> float:
    """Expected warehouse holding cost per unit at warehouse position ``S0``."""
    if S0 <= 0:
        return 0.0
    lam0 = params.lam0
    terms = poisson_terms(lam0 * params.L0, S0)
    acc = math.fsum((S0 - k) * p for k, p in enumerate(terms))
    return params.h0 / lam0 * acc


def gamma_warehouse_cdf_form(S0: int, params: SystemParams) -> float:
    """Same quantity as :func:`gamma_warehouse`, written with Erlang tail probabilities."""
    if S0 <= 0:
        return 0.0
    lam0, L0, h0 = params.lam0, params.L0, params.h0
    return h0 * S0 / lam0 * erlang_sf(S0 + 1, L0, lam0) - h0 * L0 * erlang_sf(S0, L0, lam0)


def pi_retailer(Si: int, t: float, params: SystemParams) -> float:
    """Expected retailer cost of a unit for the ``Si``-th demand, lead time ``L + t``."""
    if t < 0:
        raise ValueError("warehouse delay must be non-negative")
    lam, h, beta = params.lam, params.h, params.beta
    lead = params.L + t
    shortage = beta * (lead - Si / lam)
    if Si <= 0:
        return shortage
    terms = poisson_terms(lam * lead, Si)
    acc = math.fsum((Si - k) * p for k, p in enumerate(terms))
    return (h + beta) / lam * acc + shortage


def Pi_closed_form(Si: int, S0: int, params: SystemParams) -> float:
    """Closed form of ``Pi`` for ``Si <= 0``: pure backorder cost."""
    if Si > 0:
        raise ValueError("closed form only holds for Si <= 0")
    lam, lam0, L, L0, beta = params.lam, params.lam0, params.L, params.L0, params.beta
    if S0 > 0:
        # beta * E[(L0 - T_S0)^+] plus the fixed part.
        wait = L0 * erlang_cdf(S0, L0, lam0) - S0 / lam0 * erlang_cdf(S0 + 1, L0, lam0)
        return beta * wait + beta * (L - Si / lam)
    return beta * (L + L0 - Si / lam - S0 / lam0)


def truncation_level(params: SystemParams, epsilon: float = DEFAULT_EPSILON) -> int:
    """Smallest ``S0 >= 1`` whose probability of any warehouse delay is below ``epsilon``."""
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    S0 = 1
    while erlang_cdf(S0, params.L0, params.lam0) >= epsilon:
        S0 += 1
    return S0


@dataclass
class UnitCostTable:
    """``Pi(Si, S0)`` over a block of retailer levels, filled by downward recursion in ``S0``.

    For ``S0 >= s0_bar`` the warehouse delay is treated as zero, so lookups
    there return ``pi(Si, 0)``.  Retailer levels ``Si <= 0`` always use the
    closed form.
    """

    params: SystemParams
    si_min: int
    si_max: int
    epsilon: float = DEFAULT_EPSILON
    s0_min: int = 0
    s0_bar: int = field(init=False)
    pi_at_zero: dict[int, float] = field(init=False)
    Pi: dict[tuple[int, int], float] = field(init=False)
    _gamma: dict[int, float] = field(init=False, default_factory=dict)

    def __post_init__(self):
        params = self.params
        self.s0_bar = max(truncation_level(params, self.epsilon), self.s0_min + 1)
        lo, hi = min(self.si_min, 0), max(self.si_max, 0)
        self.si_min, self.si_max = lo, hi
        self.pi_at_zero = {Si: pi_retailer(Si, 0.0, params) for Si in range(lo, hi + 1)}
        s0_range = range(self.s0_min, self.s0_bar + 1)
        lam0 = params.lam0
        share = 1.0 / params.N
        no_delay = {S0: erlang_sf(S0, params.L0, lam0) for S0 in s0_range if S0 > 0}

        table: dict[tuple[int, int], float] = {}
        for Si in range(lo, 1):
            for S0 in s0_range:
                table[(Si, S0)] = Pi_closed_form(Si, S0, params)
        for Si in range(1, hi + 1):
            table[(Si, self.s0_bar)] = self.pi_at_zero[Si]
            jump = self.pi_at_zero[Si] - self.pi_at_zero[Si - 1]
            for S0 in range(self.s0_bar, self.s0_min, -1):
                value = share * table[(Si - 1, S0)] + (1.0 - share) * table[(Si, S0)]
                if S0 > 0:
                    value += share * no_delay[S0] * jump
                table[(Si, S0 - 1)] = value
        self.Pi = table

    def retailer(self, Si: int, S0: int) -> float:
        if not self.si_min <= Si <= self.si_max or S0 < self.s0_min:
            raise KeyError(f"Pi({Si}, {S0}) outside table coverage")
        if Si <= 0:
            return Pi_closed_form(Si, S0, self.params)
        if S0 >= self.s0_bar:
            return self.pi_at_zero[Si]
        return self.Pi[(Si, S0)]

    def warehouse(self, S0: int) -> float:
        value = self._gamma.get(S0)
        if value is None:
            value = gamma_warehouse(S0, self.params)
            self._gamma[S0] = value
        return value


def Pi_retailer(Si: int, S0: int, params: SystemParams, epsilon: float = DEFAULT_EPSILON) -> float:
    """Expected retailer cost of a unit at levels ``(Si, S0)``; builds a one-off table."""
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    if Si <= 0:
        return Pi_closed_form(Si, S0, params)
    table = UnitCostTable(params, si_min=0, si_max=Si, epsilon=epsilon, s0_min=min(S0, 0))
    return table.retailer(Si, S0)
