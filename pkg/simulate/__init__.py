from simulate.wealth import (
    PathBatch,
    Policy,
    capped_feedback,
    capped_wealth_path,
    estimate_value,
    ks_distance,
    merton_feedback,
    settle_terminal,
    simulate_wealth,
    zero_feedback,
)

__all__ = [
    "PathBatch",
    "Policy",
    "capped_feedback",
    "capped_wealth_path",
    "estimate_value",
    "ks_distance",
    "merton_feedback",
    "settle_terminal",
    "simulate_wealth",
    "zero_feedback",
]
