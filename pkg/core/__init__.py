from core.errors import (
    BracketError,
    ConfigError,
    ConvergenceError,
    DegenerateError,
    DomainError,
    InsufficientDataError,
    ParameterError,
    PreconditionError,
    QuadratureError,
    RegionError,
    TurnpikeError,
    UnsupportedConeError,
)
from core.normal import norm_cdf, norm_pdf, norm_ppf, norm_sf
from core.numerics import decade_slopes, golden_section_min, snap_to_fraction

__all__ = [
    "BracketError",
    "ConfigError",
    "ConvergenceError",
    "DegenerateError",
    "DomainError",
    "InsufficientDataError",
    "ParameterError",
    "PreconditionError",
    "QuadratureError",
    "RegionError",
    "TurnpikeError",
    "UnsupportedConeError",
    "norm_cdf",
    "norm_pdf",
    "norm_ppf",
    "norm_sf",
    "decade_slopes",
    "golden_section_min",
    "snap_to_fraction",
]
