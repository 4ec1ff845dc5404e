from turnpike.bounds import (
    BoundConstants,
    bound_constants,
    error_bound,
    identity_error,
    merton_allocation,
    turnpike_error,
)
from turnpike.report import DecayFit, TurnpikeReport, build_report, fit_decay_rate

__all__ = [
    "BoundConstants",
    "DecayFit",
    "TurnpikeReport",
    "bound_constants",
    "build_report",
    "error_bound",
    "fit_decay_rate",
    "identity_error",
    "merton_allocation",
    "turnpike_error",
]
