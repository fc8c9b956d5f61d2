"""Admissible range of the demand count between a warehouse order and its pull.

``k`` is the number of system demands from the instant the warehouse orders a
tracked batch up to and including the demand that makes a retailer pull it.
Both bounds are exact per state (attained by some retailer class), not per
retailer class.
"""

from __future__ import annotations

from dataclasses import dataclass

SUBSYSTEMS = ("A", "B", "C", "D", "E")


@dataclass(frozen=True)
class DemandBounds:
    lb: int
    ub: int
    subsystem: str


def classify_subsystem(i: int, s: int, m: int, N: int) -> str:
    if s > 0:
        if m + i >= N:
            return "A" if i == N else "B"
        return "C"
    return "D" if m < N else "E"


def lower_bound(i: int, s: int, m: int, N: int, Q: int) -> int:
    # Cheapest orders first: one demand for each retailer below R+s, s for the
    # trigger, s+1 for each retailer above; anything left costs a full Q.
    if s == 0:
        if m < N:
            return m
        return N - 1 + (m - N + 1) * Q
    if m + i < N:
        return i - 1 + s + m * (s + 1)
    return i - 1 + s + (N - i) * (s + 1) + (m + i - N) * Q


def upper_bound(i: int, s: int, m: int, N: int, Q: int) -> int:
    if s == 0:
        return (N - 1) * (Q - 1) + m * Q
    if i < N:
        return i * (s - 1) + (N - i - 1) * (Q - 1) + (m + i) * Q
    return (N - 1) * (s - 1) + s + (m + i - 1) * Q


def demand_bounds(i: int, s: int, m: int, N: int, Q: int) -> DemandBounds:
    if not 1 <= i <= N:
        raise ValueError(f"state i={i} outside [1, {N}]")
    return DemandBounds(
        lb=lower_bound(i, s, m, N, Q),
        ub=upper_bound(i, s, m, N, Q),
        subsystem=classify_subsystem(i, s, m, N),
    )
