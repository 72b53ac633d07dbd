"""Exact liar machine, linear machine and pathological liar game tooling."""

from .chipfield import (
    ChipConfiguration,
    LinearProfile,
    SignVector,
    chi_compute,
    interval_sum,
    liar_run,
    liar_step,
    linear_run,
    linear_step,
)
from .errors import InvariantViolation, ResourceLimitError

__version__ = "0.1.0"

__all__ = [
    "ChipConfiguration",
    "LinearProfile",
    "SignVector",
    "chi_compute",
    "interval_sum",
    "liar_run",
    "liar_step",
    "linear_run",
    "linear_step",
    "InvariantViolation",
    "ResourceLimitError",
]
