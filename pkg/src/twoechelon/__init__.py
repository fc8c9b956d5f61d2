"""Exact cost evaluation for a two-echelon inventory system with information sharing."""

__version__ = "0.1.0"

from .core import CostBreakdown, Policy, SystemParams, ValidationError, validate
from .cost_model import EvaluationReport, total_cost
from .optimizer import SearchSpace, optimize

__all__ = [
    "CostBreakdown",
    "EvaluationReport",
    "Policy",
    "SearchSpace",
    "SystemParams",
    "ValidationError",
    "optimize",
    "total_cost",
    "validate",
]
