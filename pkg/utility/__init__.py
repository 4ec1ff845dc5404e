from utility.asymptotics import (
    AsymptoticClass,
    AsymptoticKind,
    RateConstants,
    classify_asymptotics,
    rate_constants,
)
from utility.operations import (
    biconjugate_residual,
    conjugate,
    eval_utility,
    primal_limit_check,
    relative_risk_aversion,
    superdifferential,
)
from utility.specs import DualUtilitySpec, UtilityKind, UtilitySpec

__all__ = [
    "AsymptoticClass",
    "AsymptoticKind",
    "DualUtilitySpec",
    "RateConstants",
    "UtilityKind",
    "UtilitySpec",
    "biconjugate_residual",
    "classify_asymptotics",
    "conjugate",
    "eval_utility",
    "primal_limit_check",
    "rate_constants",
    "relative_risk_aversion",
    "superdifferential",
]
