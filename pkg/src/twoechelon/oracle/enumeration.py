"""Brute-force law of the tracked batch's pull, by exhaustive Markov enumeration.

Starting from every joint retailer configuration at the warehouse order
instant, demands are pushed through one at a time (each lands on a uniformly
chosen retailer) until the retailer order that pulls the tracked batch.  The
result is exact up to the optional probability floor, and is independent of
the convolution machinery in :mod:`twoechelon.demand_probability`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from ..core import Policy, SystemParams
from ..demand_probability import RetailerClass, class_positions, m_prime, retailer_class


class StateSpaceTooLarge(RuntimeError):
    pass


@dataclass
class ExactTriggerLaw:
    i: int
    law: dict[tuple[RetailerClass, int], float] = field(default_factory=dict)
    truncated_mass: float = 0.0
    # Largest number of batches, over all paths, pulled after fewer than Q of
    # the pulling retailer's own demands.
    max_short_pulls: int = 0
    nodes_visited: int = 0

    @property
    def total_mass(self) -> float:
        return sum(self.law.values())

    def support(self) -> tuple[int, int]:
        ks = [k for (_, k), p in self.law.items() if p > 0]
        return min(ks), max(ks)


def _initial_configs(i: int, s: int, N: int, Q: int):
    ranges = [class_positions(retailer_class(r, i), s, Q) for r in range(1, N + 1)]
    if any(len(rg) == 0 for rg in ranges):
        return
    weight = 1.0
    for rg in ranges:
        weight /= len(rg)
    for xs in itertools.product(*ranges):
        yield xs, weight


def enumerate_trigger_distribution(i: int, policy: Policy, params: SystemParams,
                                   prob_floor: float = 1e-14,
                                   node_limit: int = 2_000_000) -> ExactTriggerLaw:
    N, Q, s = params.N, params.Q, policy.s
    if not 1 <= i <= N:
        raise ValueError(f"state i={i} outside [1, {N}]")
    target = m_prime(i, s, policy.m)
    out = ExactTriggerLaw(i=i)
    classes = [retailer_class(r, i) for r in range(1, N + 1)]

    if s == 0 and i > 1:
        # Unreachable state: without early ordering only the trigger is at or below R + s.
        return out
    if target == 0:
        # The order placed at t0 itself consumes the batch.
        out.law[(RetailerClass.AT, 0)] = 1.0
        return out

    # Node: (positions, own demands since last order or t0, orders so far, short pulls).
    frontier: dict[tuple, float] = {}
    for xs, w in _initial_configs(i, s, N, Q):
        key = (xs, (0,) * N, 0, 0)
        frontier[key] = frontier.get(key, 0.0) + w

    k = 0
    p_each = 1.0 / N
    while frontier:
        k += 1
        nxt: dict[tuple, float] = {}
        for (xs, since, orders, short), p in frontier.items():
            q = p * p_each
            for r in range(N):
                if xs[r] == 1:
                    n_own = since[r] + 1
                    new_short = short + (1 if n_own < Q else 0)
                    if orders + 1 == target:
                        key = (classes[r], k)
                        out.law[key] = out.law.get(key, 0.0) + q
                        out.max_short_pulls = max(out.max_short_pulls, new_short)
                        continue
                    new_xs = xs[:r] + (Q,) + xs[r + 1:]
                    new_since = since[:r] + (0,) + since[r + 1:]
                    node = (new_xs, new_since, orders + 1, new_short)
                else:
                    new_xs = xs[:r] + (xs[r] - 1,) + xs[r + 1:]
                    new_since = since[:r] + (since[r] + 1,) + since[r + 1:]
                    node = (new_xs, new_since, orders, short)
                nxt[node] = nxt.get(node, 0.0) + q
        frontier = {}
        for node, p in nxt.items():
            if p < prob_floor:
                out.truncated_mass += p
            else:
                frontier[node] = p
        out.nodes_visited += len(frontier)
        if len(frontier) > node_limit or out.nodes_visited > 50 * node_limit:
            raise StateSpaceTooLarge(
                f"enumeration exceeded {node_limit} live nodes at k={k}; instance too large"
            )
    return out
