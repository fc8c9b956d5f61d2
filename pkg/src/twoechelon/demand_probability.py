"""Law of the demand process between a warehouse order and the pull of that batch.

Conventions.  At the warehouse order instant ``t0`` the system is in state
``i`` when ``i - 1`` retailers other than the trigger sit at or below
``R + s``.  Retailers are numbered so that ``1..i-1`` are BELOW (position
uniform on ``R+1..R+s``), ``i`` is the trigger (AT, exactly ``R+s``) and
``i+1..N`` are ABOVE (uniform on ``R+s+1..R+Q``).  With ``s = 0`` the trigger
has just reordered and sits at ``R+Q`` while every other retailer is uniform
on ``R+1..R+Q``.

Positions are handled relative to ``R``: ``x = I - R`` in ``1..Q``.  A
retailer at ``x`` places its orders after ``x, x+Q, x+2Q, ...`` of its own
demands.  Writing its demand count as ``l = bQ + u`` it has ordered exactly
``b`` batches iff ``u < x <= u + Q``; the ordering retailer ``B`` must in
addition sit at ``R+1`` after ``l`` demands, i.e. ``x = u + 1``, so that the
reserved last demand pulls the tracked batch.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from math import comb

import numpy as np
from scipy.stats import binom

from .core import Policy, SystemParams
from .demand_bounds import DemandBounds, demand_bounds


class RetailerClass(enum.Enum):
    BELOW = "below"
    AT = "at"
    ABOVE = "above"

    def offset(self) -> int:
        """Index of the representative retailer relative to the trigger ``i``."""
        return {RetailerClass.BELOW: -1, RetailerClass.AT: 0, RetailerClass.ABOVE: 1}[self]


def class_positions(cls: RetailerClass, s: int, Q: int) -> range:
    """Relative positions ``x = I - R`` a retailer of ``cls`` can occupy at t0."""
    if s == 0:
        if cls is RetailerClass.AT:
            return range(Q, Q + 1)
        if cls is RetailerClass.ABOVE:
            return range(1, Q + 1)
        return range(0)
    if cls is RetailerClass.BELOW:
        return range(1, s + 1)
    if cls is RetailerClass.AT:
        return range(s, s + 1)
    return range(s + 1, Q + 1)


def retailer_class(r: int, i: int) -> RetailerClass:
    if r < i:
        return RetailerClass.BELOW
    if r == i:
        return RetailerClass.AT
    return RetailerClass.ABOVE


def state_probability(i: int, s: int, params: SystemParams) -> float:
    N, Q = params.N, params.Q
    if not 1 <= i <= N:
        raise ValueError(f"state i={i} outside [1, {N}]")
    if s == 0:
        return 1.0 if i == 1 else 0.0
    p = s / Q
    return comb(N - 1, i - 1) * p ** (i - 1) * (1.0 - p) ** (N - i)


def m_prime(i: int, s: int, m: int) -> int:
    return m + i if s > 0 else m


def mu_prob(cls: RetailerClass, is_B: bool, s: int, Q: int, b: int, u: int) -> float:
    """Probability that a retailer of class ``cls`` orders ``b`` batches in ``bQ + u`` demands.

    For ``is_B`` the event also requires the retailer to be one demand away
    from its reorder point afterwards.  The probability is over the
    retailer's uniform position at t0.
    """
    if not -Q < u < Q:
        raise ValueError(f"residual u={u} outside (-{Q}, {Q})")
    if b < 0 or b * Q + u < 0:
        return 0.0
    xs = class_positions(cls, s, Q)
    if len(xs) == 0:
        return 0.0
    if is_B:
        hits = sum(1 for x in xs if x == u + 1)
    else:
        hits = sum(1 for x in xs if u < x <= u + Q)
    return hits / len(xs)


def mu_distribution(cls: RetailerClass, is_B: bool, s: int, Q: int, l: int, b_max: int) -> np.ndarray:
    """``Pr(mu = b)`` for ``b = 0..b_max`` after ``l`` demands at one retailer."""
    out = np.zeros(b_max + 1)
    # Only l // Q and l // Q + 1 keep the residual inside (-Q, Q).
    for b in (l // Q, l // Q + 1):
        if b <= b_max:
            u = l - b * Q
            if -Q < u < Q:
                out[b] = mu_prob(cls, is_B, s, Q, b, u)
    return out


class EtaTable:
    """Recursive convolution of per-retailer batch counts for one (state, B-class).

    ``eta(r, l)`` is the distribution over ``b = 0..b_max`` of the number of
    batches ordered by the first ``r`` retailers when ``l`` demands fall
    uniformly on them.  Results are cached per ``(r, l)`` unless
    ``memoize=False``.
    """

    def __init__(self, i: int, B: RetailerClass, s: int, N: int, Q: int, b_max: int,
                 memoize: bool = True, mu=mu_distribution):
        self.i, self.B, self.s, self.N, self.Q = i, B, s, N, Q
        self.b_max = b_max
        self.b_index = i + B.offset()
        self.memoize = memoize
        self._mu = mu
        self._cache: dict[tuple[int, int], np.ndarray] = {}
        self._mu_cache: dict[tuple[int, int], np.ndarray] = {}

    def mu(self, r: int, l: int) -> np.ndarray:
        key = (r, l)
        if self.memoize and key in self._mu_cache:
            return self._mu_cache[key]
        cls = retailer_class(r, self.i)
        dist = self._mu(cls, r == self.b_index, self.s, self.Q, l, self.b_max)
        if self.memoize:
            self._mu_cache[key] = dist
        return dist

    def eta(self, r: int, l: int) -> np.ndarray:
        key = (r, l)
        if self.memoize and key in self._cache:
            return self._cache[key]
        if r == 1:
            dist = self.mu(1, l)
        else:
            dist = np.zeros(self.b_max + 1)
            weights = binom.pmf(np.arange(l + 1), l, 1.0 / r)
            for k in range(l + 1):
                w = weights[k]
                if w == 0.0:
                    continue
                own = self.mu(r, k)
                if not own.any():
                    continue
                rest = self.eta(r - 1, l - k)
                dist += w * np.convolve(rest, own)[: self.b_max + 1]
        if self.memoize:
            self._cache[key] = dist
        return dist

    def prob(self, r: int, l: int, b: int) -> float:
        if b < 0 or b > self.b_max or l < 0:
            return 0.0
        return float(self.eta(r, l)[b])


def eta_prob(r: int, l: int, b: int, B: RetailerClass, s: int, i: int, params: SystemParams,
             b_max: int | None = None) -> float:
    """``Pr(eta^i_{r,l,B,s} = b)``, the first ``r`` retailers ordering ``b`` batches in ``l`` demands."""
    table = EtaTable(i, B, s, params.N, params.Q, b_max if b_max is not None else max(b, 0))
    return table.prob(r, l, b)


def split_weight(l_total: int, l_own: int, N: int) -> float:
    """Probability that ``l_own`` of ``l_total`` demands hit one retailer, the last one included."""
    if not 1 <= l_own <= l_total:
        return 0.0
    p = 1.0 / N
    return comb(l_total - 1, l_own - 1) * p ** l_own * (1.0 - p) ** (l_total - l_own)


def f_count(i: int, B: RetailerClass, N: int) -> int:
    """Number of retailers sharing the situation of representative ``B`` in state ``i``."""
    if B is RetailerClass.BELOW:
        return i - 1
    if B is RetailerClass.AT:
        return 1
    if B is RetailerClass.ABOVE:
        return N - i
    raise ValueError(f"unknown retailer class {B!r}")


def representative_classes(i: int, N: int) -> list[RetailerClass]:
    out = []
    if i > 1:
        out.append(RetailerClass.BELOW)
    out.append(RetailerClass.AT)
    if i < N:
        out.append(RetailerClass.ABOVE)
    return out


@dataclass
class TriggerDistribution:
    """Joint law of (class of the pulling retailer, demand count ``k``) in state ``i``.

    Each entry already carries the class multiplicity and the ``1/N``
    probability that the last demand lands on the pulling retailer, so the
    entries of a state sum to one.
    """

    i: int
    m_prime: int
    bounds: DemandBounds
    entries: dict[tuple[RetailerClass, int], float] = field(default_factory=dict)

    @property
    def total_mass(self) -> float:
        return float(sum(self.entries.values()))

    def by_k(self) -> dict[int, float]:
        out: dict[int, float] = {}
        for (_, k), p in sorted(self.entries.items(), key=lambda kv: (kv[0][1], kv[0][0].value)):
            out[k] = out.get(k, 0.0) + p
        return out


def trigger_distribution(i: int, policy: Policy, params: SystemParams, memoize: bool = True,
                         mu=mu_distribution) -> TriggerDistribution:
    N, Q, s = params.N, params.Q, policy.s
    bounds = demand_bounds(i, s, policy.m, N, Q)
    mp = m_prime(i, s, policy.m)
    dist = TriggerDistribution(i=i, m_prime=mp, bounds=bounds)
    if s == 0 and i > 1:
        return dist
    if mp == 0:
        # s = 0, m = 0: the retailer order placed at t0 takes the batch itself.
        dist.entries[(RetailerClass.AT, 0)] = 1.0
        return dist
    for B in representative_classes(i, N):
        table = EtaTable(i, B, s, N, Q, b_max=mp - 1, memoize=memoize, mu=mu)
        mult = f_count(i, B, N)
        for k in range(max(bounds.lb, 1), bounds.ub + 1):
            p = table.prob(N, k - 1, mp - 1)
            if p > 0.0:
                dist.entries[(B, k)] = mult * p / N
    return dist
