"""Discrete-event simulation of the physical two-echelon system.

Retailers see independent Poisson demand, backlog shortages and order a batch
of ``Q`` from the warehouse when their inventory position reaches ``R``.  The
warehouse starts with ``m`` batches on hand, orders one batch from the
supplier each time a retailer's position reaches ``R + s``, and ships
retailer orders first come, first served.  Costs are integrated exactly
between events over ``[warmup, horizon]``.

Receipts are processed before demands that share a timestamp.
"""

from __future__ import annotations

import heapq
import math
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..core import CostBreakdown, Policy, SystemParams, validate

_WAREHOUSE_RECEIPT = 0
_RETAILER_RECEIPT = 1
_BLOCK = 4096


@dataclass
class ReplicationResult:
    warehouse_holding: float
    retailer_holding: float
    retailer_shortage: float
    ip_counts: np.ndarray
    demands: int
    units_received: int
    start_on_hand: int
    end_on_hand: int
    end_backorders: int
    warehouse_orders: int
    observed_time: float

    @property
    def cost_rate(self) -> float:
        return self.warehouse_holding + self.retailer_holding + self.retailer_shortage


@dataclass
class SimulationResult:
    mean_cost_rate: float
    std_error: float
    replications: int
    horizon: float
    warmup: float
    breakdown: CostBreakdown
    inventory_histograms: np.ndarray
    per_replication: list[ReplicationResult] = field(default_factory=list, repr=False)

    def pooled_histogram(self) -> np.ndarray:
        return self.inventory_histograms.sum(axis=0)


def default_warmup(params: SystemParams) -> float:
    return max(10.0 * (params.L + params.L0), 100.0 / params.lam)


def default_sample_interval(params: SystemParams) -> float:
    """Snapshot spacing after which a retailer's position is uniform to within 1e-4.

    The position is the Poisson demand count mod ``Q``; its slowest Fourier
    mode decays like ``exp(-lam * t * (1 - cos(2 pi / Q)))``.
    """
    if params.Q == 1:
        return 1.0 / params.lam
    decay = 1.0 - math.cos(2.0 * math.pi / params.Q)
    return math.log(1e4) / (params.lam * decay)


def run_replication(policy: Policy, params: SystemParams, horizon: float, warmup: float,
                    rng: np.random.Generator, sample_interval: float | None = None) -> ReplicationResult:
    N, Q, R, s = params.N, params.Q, policy.R, policy.s
    lam0 = params.lam0
    if sample_interval is None:
        sample_interval = default_sample_interval(params)

    net = [R + Q] * N  # on hand minus backorders
    ip = [R + Q] * N
    wh_on_hand = policy.m  # batches
    waiting: deque[int] = deque()
    events: list[tuple[float, int, int, int]] = []
    seq = 0

    on_hand_units = sum(max(x, 0) for x in net)
    backorders = sum(max(-x, 0) for x in net)
    start_on_hand = on_hand_units
    ip_counts = np.zeros((N, Q), dtype=np.int64)
    next_sample = warmup

    wh_cost = hold_cost = short_cost = 0.0
    demands = received = wh_orders = 0

    gaps = rng.exponential(1.0 / lam0, _BLOCK)
    who = rng.integers(0, N, _BLOCK)
    t_demand = gaps[0]
    pos = 1

    t = 0.0
    while True:
        if events and events[0][0] <= t_demand:
            t_next = events[0][0]
            is_demand = False
        else:
            t_next = t_demand
            is_demand = True
        t_stop = min(t_next, horizon)

        # Snapshots fall strictly between events, where the state is constant.
        while next_sample < t_stop:
            for r in range(N):
                ip_counts[r, ip[r] - R - 1] += 1
            next_sample += sample_interval

        lo = max(t, warmup)
        if t_stop > lo:
            dt = t_stop - lo
            wh_cost += params.h0 * Q * wh_on_hand * dt
            hold_cost += params.h * on_hand_units * dt
            short_cost += params.beta * backorders * dt
        if t_next >= horizon:
            break
        t = t_next

        if is_demand:
            r = int(who[pos - 1])
            if pos >= _BLOCK:
                gaps = rng.exponential(1.0 / lam0, _BLOCK)
                who = rng.integers(0, N, _BLOCK)
                pos = 0
            t_demand = t + gaps[pos]
            pos += 1
            demands += 1
            if net[r] > 0:
                on_hand_units -= 1
            else:
                backorders += 1
            net[r] -= 1
            ip[r] -= 1
            if ip[r] == R + s:
                wh_orders += 1
                heapq.heappush(events, (t + params.L0, _WAREHOUSE_RECEIPT, seq, -1))
                seq += 1
            if ip[r] == R:
                ip[r] += Q
                if wh_on_hand > 0 and not waiting:
                    wh_on_hand -= 1
                    heapq.heappush(events, (t + params.L, _RETAILER_RECEIPT, seq, r))
                    seq += 1
                else:
                    waiting.append(r)
        else:
            _, kind, _, r = heapq.heappop(events)
            if kind == _WAREHOUSE_RECEIPT:
                if waiting:
                    dest = waiting.popleft()
                    heapq.heappush(events, (t + params.L, _RETAILER_RECEIPT, seq, dest))
                    seq += 1
                else:
                    wh_on_hand += 1
            else:
                before = net[r]
                net[r] += Q
                received += Q
                filled = min(Q, max(-before, 0))
                backorders -= filled
                on_hand_units += max(net[r], 0) - max(before, 0)

    span = horizon - warmup
    return ReplicationResult(
        warehouse_holding=wh_cost / span,
        retailer_holding=hold_cost / span,
        retailer_shortage=short_cost / span,
        ip_counts=ip_counts,
        demands=demands,
        units_received=received,
        start_on_hand=start_on_hand,
        end_on_hand=on_hand_units,
        end_backorders=backorders,
        warehouse_orders=wh_orders,
        observed_time=span,
    )


def _replication_task(args):
    policy, params, horizon, warmup, seed_seq, sample_interval = args
    return run_replication(policy, params, horizon, warmup, np.random.default_rng(seed_seq),
                           sample_interval)


def simulate(policy: Policy, params: SystemParams, horizon: float = 5000.0,
             warmup: float | None = None, replications: int = 20, seed: int = 0,
             sample_interval: float | None = None, threads: int = 1) -> SimulationResult:
    validate(params, policy)
    if warmup is None:
        warmup = default_warmup(params)
    if not horizon > warmup >= 0:
        raise ValueError("need horizon > warmup >= 0")
    if replications < 1:
        raise ValueError("need at least one replication")

    streams = np.random.SeedSequence(seed).spawn(replications)
    tasks = [(policy, params, horizon, warmup, ss, sample_interval) for ss in streams]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            reps = list(pool.map(_replication_task, tasks))
    else:
        reps = [_replication_task(task) for task in tasks]

    costs = np.array([rep.cost_rate for rep in reps])
    wh = float(np.mean([rep.warehouse_holding for rep in reps]))
    rt = float(np.mean([rep.retailer_holding + rep.retailer_shortage for rep in reps]))
    std_error = float(np.std(costs, ddof=1) / math.sqrt(replications)) if replications > 1 else 0.0
    return SimulationResult(
        mean_cost_rate=wh + rt,
        std_error=std_error,
        replications=replications,
        horizon=horizon,
        warmup=warmup,
        breakdown=CostBreakdown(wh, rt),
        inventory_histograms=sum(rep.ip_counts for rep in reps),
        per_replication=reps,
    )
