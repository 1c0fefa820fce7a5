"""Online packet scheduling over a jammed link: policies, oracle, audits."""
from .core import (LengthSystem, Packet, QueueState, aux_constants, build_length_system,
                   f_constants, queue_volume, upper_bound_gamma)
from .engine import Scenario, Trace, TransmissionRecord, completed_length, make_scenario, run

__version__ = "0.1.0"

__all__ = [
    "LengthSystem", "Packet", "QueueState", "aux_constants", "build_length_system",
    "f_constants", "queue_volume", "upper_bound_gamma", "Scenario", "Trace",
    "TransmissionRecord", "completed_length", "make_scenario", "run",
]
