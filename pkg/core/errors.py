"""
Error hierarchy shared by every package.

Each error also derives from the builtin a caller would naturally catch
(ValueError for bad input, RuntimeError for a computation that failed).
"""

from typing import Optional


class TurnpikeError(Exception):
    """Root of all library errors."""


class DomainError(TurnpikeError, ValueError):
    """Argument outside the mathematical domain (e.g. negative wealth)."""


class ParameterError(TurnpikeError, ValueError):
    """Invalid utility, market or quadrature parameters."""


class UnsupportedConeError(ParameterError):
    pass


class DegenerateError(ParameterError):
    pass


class RegionError(DomainError):
    """Wealth lies in the saturated region where an interior point is required."""


class PreconditionError(TurnpikeError, ValueError):
    pass


class InsufficientDataError(TurnpikeError, ValueError):
    pass


class ConvergenceError(TurnpikeError, RuntimeError):
    """An iterative computation did not reach its tolerance."""


class QuadratureError(ConvergenceError):
    pass


class BracketError(ConvergenceError):
    pass


class ConfigError(TurnpikeError, ValueError):
    """Run-config problem, optionally located by key path or line/column."""

    def __init__(
        self,
        message: str,
        key_path: Optional[str] = None,
        line: Optional[int] = None,
        column: Optional[int] = None,
    ):
        self.key_path = key_path
        self.line = line
        self.column = column
        where = ""
        if key_path:
            where = f" [{key_path}]"
        elif line is not None:
            where = f" [line {line}, column {column}]"
        super().__init__(f"{message}{where}")
