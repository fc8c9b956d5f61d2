"""Cross-checks of the exact model against the two oracles.

Used by the ``validate`` command.  Every check reports its worst deviation and
passes only within its tolerance: ``1e-9`` for analytic comparisons and three
standard errors for the optional simulation comparison.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .core import Policy, SystemParams, validate
from .cost_model import total_cost
from .demand_probability import mu_distribution, state_probability, trigger_distribution
from .oracle.enumeration import enumerate_trigger_distribution
from .oracle.simulation import simulate

ANALYTIC_TOL = 1e-9
SIGMA_TOL = 3.0


@dataclass
class Check:
    name: str
    deviation: float
    tolerance: float
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.deviation <= self.tolerance


@dataclass
class ValidationReport:
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def corrupted_mu(scale: float):
    """A deliberately wrong batch-count law, for exercising the failure path."""
    def mu(cls, is_B, s, Q, l, b_max):
        return mu_distribution(cls, is_B, s, Q, l, b_max) * (1.0 + scale)
    return mu


def run_validation(policy: Policy, params: SystemParams, prob_floor: float = 1e-14,
                   simulate_check: bool = False, sim_kwargs: dict | None = None,
                   corrupt_mu: float = 0.0, epsilon: float = 1e-10) -> ValidationReport:
    validate(params, policy)
    mu = corrupted_mu(corrupt_mu) if corrupt_mu else mu_distribution
    report = ValidationReport()
    for i in range(1, params.N + 1):
        if state_probability(i, policy.s, params) == 0.0:
            continue
        analytic = trigger_distribution(i, policy, params, mu=mu)
        exact = enumerate_trigger_distribution(i, policy, params, prob_floor=prob_floor)
        keys = set(analytic.entries) | set(exact.law)
        dev = max(abs(analytic.entries.get(key, 0.0) - exact.law.get(key, 0.0)) for key in keys)
        report.checks.append(Check(f"state {i}: analytic vs enumeration", dev, ANALYTIC_TOL))

        lb, ub = analytic.bounds.lb, analytic.bounds.ub
        lo, hi = exact.support()
        outside = sum(p for (_, k), p in analytic.entries.items() if not lb <= k <= ub)
        outside += sum(p for (_, k), p in exact.law.items() if not lb <= k <= ub)
        report.checks.append(Check(f"state {i}: support within [lb, ub]", outside, 0.0,
                                   f"support [{lo}, {hi}] vs bounds [{lb}, {ub}]"))
        report.checks.append(Check(f"state {i}: trigger mass", abs(1.0 - analytic.total_mass),
                                   ANALYTIC_TOL))
        report.checks.append(Check(f"state {i}: enumeration mass",
                                   abs(1.0 - exact.total_mass - exact.truncated_mass), 1e-12))
        report.checks.append(Check(f"state {i}: short pulls <= N", max(0, exact.max_short_pulls - params.N),
                                   0.0, f"max {exact.max_short_pulls}"))

    if simulate_check:
        exact_cost = total_cost(policy, params, epsilon=epsilon).total
        sim = simulate(policy, params, **(sim_kwargs or {}))
        if sim.std_error > 0:
            z = abs(exact_cost - sim.mean_cost_rate) / sim.std_error
        else:
            z = 0.0 if exact_cost == sim.mean_cost_rate else float("inf")
        report.checks.append(Check("total cost vs simulation (sigmas)", z, SIGMA_TOL,
                                   f"exact {exact_cost!r}, sim {sim.mean_cost_rate!r} +- {sim.std_error!r}"))
    return report
