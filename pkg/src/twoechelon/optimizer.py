"""Grid search over ``(m, R, s)`` for the cheapest policy."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .core import Policy, SystemParams, validate_params
from .cost_model import EvaluationReport, TriggerCache, build_unit_costs, total_cost
from .unit_costs import DEFAULT_EPSILON


class SearchError(ValueError):
    pass


@dataclass(frozen=True)
class SearchSpace:
    """Inclusive integer ranges; ``s`` is clipped to ``[0, Q - 1]``."""

    m_range: tuple[int, int]
    R_range: tuple[int, int]
    s_range: tuple[int, int]
    budget: int | None = None

    def clipped(self, Q: int) -> "SearchSpace":
        s_lo, s_hi = max(self.s_range[0], 0), min(self.s_range[1], Q - 1)
        m_lo = max(self.m_range[0], 0)
        space = SearchSpace((m_lo, self.m_range[1]), self.R_range, (s_lo, s_hi), self.budget)
        for name, (lo, hi) in (("m", space.m_range), ("R", space.R_range), ("s", space.s_range)):
            if lo > hi:
                raise SearchError(f"empty {name} range after clipping")
        return space

    def size(self) -> int:
        return math.prod(hi - lo + 1 for lo, hi in (self.m_range, self.R_range, self.s_range))


def default_R_range(params: SystemParams) -> tuple[int, int]:
    """Covers the upper quantiles of lead-time demand at one retailer."""
    mean = params.lam * (params.L + params.L0)
    return 0, math.ceil(mean) + 3 * math.ceil(math.sqrt(mean)) + params.Q


def policy_key(policy: Policy) -> tuple[int, int, int]:
    # Ties go to the lexicographically smallest (m, s, R).
    return policy.m, policy.s, policy.R


@dataclass
class SearchResult:
    best: Policy
    report: EvaluationReport
    grid: list[EvaluationReport]


class _Evaluator:
    def __init__(self, params: SystemParams, space: SearchSpace, epsilon: float):
        self.params = params
        self.table = build_unit_costs(params, space.R_range[0], space.R_range[1], epsilon)
        self.triggers = TriggerCache(params)
        self.count = 0
        self.budget = space.budget

    def __call__(self, policy: Policy) -> EvaluationReport:
        if self.budget is not None and self.count >= self.budget:
            raise SearchError(f"evaluation budget {self.budget} exhausted")
        self.count += 1
        return total_cost(policy, self.params, unit_costs=self.table, triggers=self.triggers)


def _eval_column(args) -> list[EvaluationReport]:
    params, space, epsilon, R, s = args
    ev = _Evaluator(params, SearchSpace(space.m_range, space.R_range, space.s_range), epsilon)
    return [ev(Policy(m, R, s)) for m in range(space.m_range[0], space.m_range[1] + 1)]


def _argmin(reports: list[EvaluationReport]) -> EvaluationReport:
    # Costs equal to 12 significant digits count as ties, so rounding noise
    # never decides between equivalent policies.
    return min(reports, key=lambda rep: (float(f"{rep.total:.12g}"), policy_key(rep.policy)))


def optimize(params: SystemParams, space: SearchSpace, mode: str = "exhaustive",
             epsilon: float = DEFAULT_EPSILON, threads: int = 1) -> SearchResult:
    """Evaluate the grid and return the argmin.

    ``mode="pruned"`` walks ``m`` upward for each ``(R, s)`` and stops once the
    cost has risen on two consecutive steps.
    """
    validate_params(params)
    space = space.clipped(params.Q)
    columns = [(R, s) for s in range(space.s_range[0], space.s_range[1] + 1)
               for R in range(space.R_range[0], space.R_range[1] + 1)]

    if mode == "exhaustive":
        if space.budget is not None and space.budget < space.size():
            raise SearchError(f"budget {space.budget} below grid size {space.size()}")
        if threads > 1:
            tasks = [(params, space, epsilon, R, s) for R, s in columns]
            with ProcessPoolExecutor(max_workers=threads) as pool:
                grid = [rep for col in pool.map(_eval_column, tasks) for rep in col]
        else:
            ev = _Evaluator(params, space, epsilon)
            grid = [ev(Policy(m, R, s)) for R, s in columns
                    for m in range(space.m_range[0], space.m_range[1] + 1)]
    elif mode == "pruned":
        ev = _Evaluator(params, space, epsilon)
        grid = []
        for R, s in columns:
            rises = 0
            prev = None
            for m in range(space.m_range[0], space.m_range[1] + 1):
                rep = ev(Policy(m, R, s))
                grid.append(rep)
                if prev is not None and rep.total > prev:
                    rises += 1
                    if rises >= 2:
                        break
                else:
                    rises = 0
                prev = rep.total
    else:
        raise SearchError(f"unknown search mode {mode!r}")

    best = _argmin(grid)
    return SearchResult(best=best.policy, report=best, grid=grid)
