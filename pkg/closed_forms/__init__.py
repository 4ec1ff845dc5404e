from closed_forms.examples import (
    ReferencePoint,
    capped_dual,
    capped_frontier,
    capped_reference,
    capped_ruin_prob,
    ex4_reference,
    ex4_sharp_bound,
    ex5_allocation,
    ex400_diagnostics,
    merton_dual,
    merton_reference,
    piecewise_reference,
)

__all__ = [
    "ReferencePoint",
    "capped_dual",
    "capped_frontier",
    "capped_reference",
    "capped_ruin_prob",
    "ex4_reference",
    "ex4_sharp_bound",
    "ex5_allocation",
    "ex400_diagnostics",
    "merton_dual",
    "merton_reference",
    "piecewise_reference",
]
