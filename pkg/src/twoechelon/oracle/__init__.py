"""Independent ground truth: exhaustive enumeration and discrete-event simulation."""

from .enumeration import ExactTriggerLaw, StateSpaceTooLarge, enumerate_trigger_distribution
from .simulation import SimulationResult, simulate

__all__ = [
    "ExactTriggerLaw",
    "SimulationResult",
    "StateSpaceTooLarge",
    "enumerate_trigger_distribution",
    "simulate",
]
