from solvers.dual import (
    DualSurface,
    boundary_limits,
    build_surface,
    eval_v,
    eval_vy,
    eval_vyy,
    mc_value_oracle,
)
from solvers.primal import (
    PrimalPoint,
    Region,
    allocation,
    conjugacy_gap,
    hjb_residual_dual,
    hjb_residual_primal,
    invert_marginal,
    primal_allocation,
    value_grid,
    value_u,
)
from solvers.quadrature import QuadratureConfig, QuadratureResult, gaussian_expectation

__all__ = [
    "DualSurface",
    "PrimalPoint",
    "QuadratureConfig",
    "QuadratureResult",
    "Region",
    "allocation",
    "boundary_limits",
    "build_surface",
    "conjugacy_gap",
    "eval_v",
    "eval_vy",
    "eval_vyy",
    "gaussian_expectation",
    "hjb_residual_dual",
    "hjb_residual_primal",
    "invert_marginal",
    "mc_value_oracle",
    "primal_allocation",
    "value_grid",
    "value_u",
]
