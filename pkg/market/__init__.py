from market.params import (
    ConeKind,
    ConeSpec,
    DerivedConstants,
    MarketParams,
    ThetaSchedule,
    derived_constants,
    project_theta_hat,
)

__all__ = [
    "ConeKind",
    "ConeSpec",
    "DerivedConstants",
    "MarketParams",
    "ThetaSchedule",
    "derived_constants",
    "project_theta_hat",
]
