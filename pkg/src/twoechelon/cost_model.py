"""Exact long-run average cost of an information-sharing policy.

Every warehouse batch ends up with exactly one retailer order, so the system
cost rate is the total demand rate ``N * lam`` times the expected cost of a
tracked unit.  That unit is a uniformly chosen unit ``j`` of a batch ordered
in state ``i``; given the demand count ``k`` up to its pull it costs
``gamma(k)`` at the warehouse and ``Pi(R + j, k)`` at the retailer.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Protocol

from .core import CostBreakdown, Policy, SystemParams, validate
from .demand_probability import TriggerDistribution, f_count, state_probability, trigger_distribution

__all__ = ["EvaluationReport", "StateReport", "TriggerCache", "UnitCosts", "build_unit_costs",
           "expected_unit_cost", "f_count", "total_cost"]
from .unit_costs import DEFAULT_EPSILON, UnitCostTable


class UnitCosts(Protocol):
    def warehouse(self, S0: int) -> float: ...

    def retailer(self, Si: int, S0: int) -> float: ...


@dataclass(frozen=True)
class StateReport:
    probability: float
    unit_cost: float
    mass_residual: float


@dataclass
class EvaluationReport:
    policy: Policy
    breakdown: CostBreakdown
    per_state: dict[int, StateReport] = field(default_factory=dict)

    @property
    def total(self) -> float:
        return self.breakdown.total

    @property
    def mass_residual_max(self) -> float:
        return max((st.mass_residual for st in self.per_state.values()), default=0.0)


def build_unit_costs(params: SystemParams, R_min: int, R_max: int,
                     epsilon: float = DEFAULT_EPSILON) -> UnitCostTable:
    """Unit cost table covering every reorder point in ``[R_min, R_max]``."""
    return UnitCostTable(params, si_min=R_min + 1, si_max=R_max + params.Q, epsilon=epsilon)


def expected_unit_cost(k: int, policy: Policy, params: SystemParams,
                       table: UnitCosts) -> tuple[float, float]:
    """Warehouse and retailer parts of the tracked unit's expected cost given ``k``."""
    Q = params.Q
    retail = sum(table.retailer(policy.R + j, k) for j in range(1, Q + 1)) / Q
    return table.warehouse(k), retail


class TriggerCache:
    """Trigger distributions keyed by ``(i, m, s)``; they do not depend on ``R``."""

    def __init__(self, params: SystemParams):
        self.params = params
        self._store: dict[tuple[int, int, int], TriggerDistribution] = {}

    def get(self, i: int, policy: Policy) -> TriggerDistribution:
        key = (i, policy.m, policy.s)
        dist = self._store.get(key)
        if dist is None:
            dist = trigger_distribution(i, policy, self.params)
            self._store[key] = dist
        return dist


def total_cost(policy: Policy, params: SystemParams, epsilon: float = DEFAULT_EPSILON,
               unit_costs: UnitCosts | None = None,
               triggers: TriggerCache | None = None) -> EvaluationReport:
    validate(params, policy)
    if unit_costs is None:
        unit_costs = build_unit_costs(params, policy.R, policy.R, epsilon)
    if triggers is None:
        triggers = TriggerCache(params)

    lam0 = params.lam0
    warehouse = retailer = 0.0
    per_state: dict[int, StateReport] = {}
    for i in range(1, params.N + 1):
        p_i = state_probability(i, policy.s, params)
        if p_i == 0.0:
            continue
        dist = triggers.get(i, policy)
        w_i = r_i = 0.0
        for (_, k), p in sorted(dist.entries.items(), key=lambda kv: (kv[0][0].offset(), kv[0][1])):
            g, pi = expected_unit_cost(k, policy, params, unit_costs)
            w_i += p * g
            r_i += p * pi
        warehouse += p_i * w_i
        retailer += p_i * r_i
        per_state[i] = StateReport(p_i, w_i + r_i, abs(1.0 - dist.total_mass))

    breakdown = CostBreakdown(lam0 * warehouse, lam0 * retailer)
    return EvaluationReport(policy=policy, breakdown=breakdown, per_state=per_state)
