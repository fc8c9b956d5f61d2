"""Shared domain types for the two-echelon information-sharing model.

A central warehouse supplies ``N`` identical retailers that each run an
``(R, Q)`` policy against Poisson demand.  The warehouse starts with ``m``
batches and orders a new batch from the outside supplier the moment any
retailer's inventory position drops to ``R + s``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


class ValidationError(ValueError):
    """Raised when a parameter set or policy breaks one of its invariants."""


@dataclass(frozen=True)
class SystemParams:
    """Physical and economic constants of the chain.

    Attributes:
        N: number of identical retailers.
        lam: Poisson demand rate at each retailer.
        L: transport time warehouse -> retailer.
        L0: transport time supplier -> warehouse.
        h: retailer holding cost per unit per time.
        h0: warehouse holding cost per unit per time.
        beta: retailer backorder cost per unit per time.
        Q: batch size shared by every order in the system.
    """

    N: int
    lam: float
    L: float
    L0: float
    h: float
    h0: float
    beta: float
    Q: int

    @property
    def lam0(self) -> float:
        """Total demand rate seen by the warehouse."""
        return self.N * self.lam


@dataclass(frozen=True)
class Policy:
    """Decision variables: initial batches ``m``, reorder point ``R``, offset ``s``."""

    m: int
    R: int
    s: int


@dataclass(frozen=True)
class CostBreakdown:
    warehouse_holding: float
    retailer_holding_shortage: float

    @property
    def total(self) -> float:
        return self.warehouse_holding + self.retailer_holding_shortage

    def as_dict(self) -> dict[str, float]:
        return {
            "warehouse_holding": self.warehouse_holding,
            "retailer_holding_shortage": self.retailer_holding_shortage,
            "total": self.total,
        }


def _is_int(value) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _check_finite(name: str, value) -> None:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ValidationError(f"{name} must be a finite number")


def validate_params(params: SystemParams) -> SystemParams:
    if not _is_int(params.N) or params.N < 1:
        raise ValidationError("N must be an integer >= 1")
    if not _is_int(params.Q) or params.Q < 1:
        raise ValidationError("Q must be an integer >= 1")
    for name in ("lam", "L", "L0", "h", "h0", "beta"):
        _check_finite(name, getattr(params, name))
    if params.lam <= 0:
        raise ValidationError("lambda must be positive")
    for name in ("L", "L0", "h", "h0", "beta"):
        if getattr(params, name) < 0:
            raise ValidationError(f"{name} must be non-negative")
    return params


def validate_policy(policy: Policy, Q: int) -> Policy:
    for name in ("m", "R", "s"):
        if not _is_int(getattr(policy, name)):
            raise ValidationError(f"{name} must be an integer")
    if policy.m < 0:
        raise ValidationError("m must be non-negative")
    if not 0 <= policy.s <= Q - 1:
        raise ValidationError(f"s out of range [0, Q-1] (s={policy.s}, Q={Q})")
    return policy


def validate(params: SystemParams, policy: Policy) -> tuple[SystemParams, Policy]:
    """Return ``(params, policy)`` unchanged, or raise on the first broken invariant."""
    validate_params(params)
    validate_policy(policy, params.Q)
    return params, policy
