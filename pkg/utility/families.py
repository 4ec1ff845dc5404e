"""
Closed forms for the builtin utility families.

Every method is vectorised over numpy arrays. A family returns None from
``dual_value`` / ``dual_slope`` when its conjugate has no closed form; the
``DualUtilitySpec`` then falls back to numeric conjugation.
"""

import math
from typing import Dict, Mapping, Optional, Tuple

import numpy as np

from core.errors import ParameterError

Params = Mapping[str, float]


def _require(params: Params, name: str) -> float:
    if name not in params:
        raise ParameterError(f"missing utility parameter '{name}'")
    return float(params[name])


def _check_p(p: float) -> None:
    if not 0 < p < 1:
        raise ParameterError(f"p must lie in (0, 1), got {p}")


def _check_h(h: float) -> None:
    if not (h > 0 and math.isfinite(h)):
        raise ParameterError(f"H must be positive, got {h}")


class UtilityFamily:
    """Default behaviour: no closed-form conjugate, no kinks."""

    name = "base"
    param_names: Tuple[str, ...] = ()

    def validate(self, params: Params) -> None:
        for key in params:
            if key not in self.param_names:
                raise ParameterError(f"unknown parameter '{key}' for {self.name}")

    def value(self, x: np.ndarray, params: Params) -> np.ndarray:
        raise NotImplementedError

    def slopes(self, x: np.ndarray, params: Params) -> Tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def curvature(self, x: np.ndarray, params: Params) -> Optional[np.ndarray]:
        return None

    def dual_value(self, y: np.ndarray, params: Params) -> Optional[np.ndarray]:
        return None

    def dual_slope(self, y: np.ndarray, params: Params) -> Optional[np.ndarray]:
        return None

    def dual_difference(self, w: np.ndarray, y: float, params: Params) -> Optional[np.ndarray]:
        """V(w) − V(y) without the cancellation of a shared constant; None if not needed."""
        return None

    def dual_limits(self, params: Params) -> Tuple[float, float]:
        return math.inf, -math.inf

    def dual_kinks(self, params: Params) -> Tuple[float, ...]:
        return ()

    def growth(self, params: Params) -> Tuple[Optional[float], float]:
        """(C, p̄) with U ≤ C(1+x^p̄); C=None asks the caller to fit it."""
        return None, 0.5


class PowerFamily(UtilityFamily):
    name = "power"
    param_names = ("p",)

    def validate(self, params):
        super().validate(params)
        _check_p(_require(params, "p"))

    def value(self, x, params):
        p = params["p"]
        return np.power(x, p) / p

    def slopes(self, x, params):
        with np.errstate(divide="ignore"):
            d = np.power(x, params["p"] - 1.0)
        return d, d

    def curvature(self, x, params):
        p = params["p"]
        with np.errstate(divide="ignore"):
            return (p - 1.0) * np.power(x, p - 2.0)

    def dual_value(self, y, params):
        q = params["p"] / (params["p"] - 1.0)
        with np.errstate(divide="ignore", over="ignore"):
            return -np.power(y, q) / q

    def dual_slope(self, y, params):
        q = params["p"] / (params["p"] - 1.0)
        with np.errstate(divide="ignore", over="ignore"):
            return -np.power(y, q - 1.0)

    def growth(self, params):
        return 1.0 / params["p"], params["p"]


class CappedLinearFamily(UtilityFamily):
    name = "capped_linear"
    param_names = ("H",)

    def validate(self, params):
        super().validate(params)
        _check_h(_require(params, "H"))

    def value(self, x, params):
        return np.minimum(x, params["H"])

    def slopes(self, x, params):
        h = params["H"]
        lo = np.where(x < h, 1.0, 0.0)
        hi = np.where(x <= h, 1.0, 0.0)
        return lo, hi

    def curvature(self, x, params):
        return np.zeros_like(np.asarray(x, dtype=float))

    def dual_value(self, y, params):
        return params["H"] * np.maximum(1.0 - y, 0.0)

    def dual_slope(self, y, params):
        return np.where(y < 1.0, -params["H"], 0.0)

    def dual_difference(self, w, y, params):
        return params["H"] * (min(float(y), 1.0) - np.minimum(w, 1.0))

    def dual_limits(self, params):
        return params["H"], -params["H"]

    def dual_kinks(self, params):
        return (1.0,)

    def growth(self, params):
        return params["H"], 0.5


class PiecewisePowerFamily(UtilityFamily):
    """Linear up to H, then H(x/H)^p: a kink at x=H with slopes 1 and p."""

    name = "piecewise_power"
    param_names = ("H", "p")

    def validate(self, params):
        super().validate(params)
        _check_h(_require(params, "H"))
        _check_p(_require(params, "p"))

    def value(self, x, params):
        h, p = params["H"], params["p"]
        return np.where(x <= h, x, h * np.power(np.maximum(x, h) / h, p))

    def slopes(self, x, params):
        h, p = params["H"], params["p"]
        upper = p * np.power(np.maximum(x, h) / h, p - 1.0)
        lo = np.where(x < h, 1.0, upper)
        hi = np.where(x <= h, 1.0, upper)
        return lo, hi

    def curvature(self, x, params):
        h, p = params["H"], params["p"]
        upper = p * (p - 1.0) / h * np.power(np.maximum(x, h) / h, p - 2.0)
        return np.where(x < h, 0.0, upper)

    def dual_value(self, y, params):
        h, p = params["H"], params["p"]
        q = p / (p - 1.0)
        scale = h * (1.0 - p) / p * p ** (1.0 / (1.0 - p))
        with np.errstate(divide="ignore", over="ignore"):
            power_branch = scale * np.power(np.minimum(y, p), q)
        return np.where(y <= p, power_branch, h * np.maximum(1.0 - y, 0.0))

    def dual_slope(self, y, params):
        h, p = params["H"], params["p"]
        with np.errstate(divide="ignore", over="ignore"):
            power_branch = -h * np.power(np.minimum(y, p) / p, 1.0 / (p - 1.0))
        return np.where(y < p, power_branch, np.where(y < 1.0, -h, 0.0))

    def dual_kinks(self, params):
        return (params["p"], 1.0)

    def growth(self, params):
        return params["H"] ** (1.0 - params["p"]), params["p"]


class InverseQuarticFamily(UtilityFamily):
    """U with conjugate V(y) = y⁻³/3 + y⁻¹."""

    name = "inverse_quartic"

    @staticmethod
    def marginal(x):
        """H(x) = (2/(−1+√(1+4x)))^{1/2}, written without cancellation."""
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            return np.sqrt((1.0 + np.sqrt(1.0 + 4.0 * x)) / (2.0 * x))

    def value(self, x, params):
        x = np.asarray(x, dtype=float)
        safe = np.where(x > 0, x, 1.0)
        h = self.marginal(safe)
        out = np.power(h, -3.0) / 3.0 + 1.0 / h + safe * h
        return np.where(x > 0, out, 0.0)

    def slopes(self, x, params):
        h = self.marginal(x)
        return h, h

    def curvature(self, x, params):
        x = np.asarray(x, dtype=float)
        root = np.sqrt(1.0 + 4.0 * x)
        with np.errstate(divide="ignore"):
            gap = 4.0 * x / (1.0 + root)
            return -math.sqrt(2.0) * np.power(gap, -1.5) / root

    def dual_value(self, y, params):
        with np.errstate(divide="ignore", over="ignore"):
            return np.power(y, -3.0) / 3.0 + 1.0 / y

    def dual_slope(self, y, params):
        with np.errstate(divide="ignore", over="ignore"):
            return -np.power(y, -4.0) - np.power(y, -2.0)

    def growth(self, params):
        return None, 0.75


class ShiftedExponentialFamily(UtilityFamily):
    """U(x) = 1 − e^{−x}."""

    name = "shifted_exponential"

    def value(self, x, params):
        return -np.expm1(-np.asarray(x, dtype=float))

    def slopes(self, x, params):
        d = np.exp(-np.asarray(x, dtype=float))
        return d, d

    def curvature(self, x, params):
        return -np.exp(-np.asarray(x, dtype=float))

    def dual_value(self, y, params):
        y = np.asarray(y, dtype=float)
        safe = np.minimum(y, 1.0)
        return np.where(y < 1.0, 1.0 + safe * (np.log(safe) - 1.0), 0.0)

    def dual_slope(self, y, params):
        y = np.asarray(y, dtype=float)
        return np.where(y < 1.0, np.log(np.minimum(y, 1.0)), 0.0)

    @staticmethod
    def _excess(y: np.ndarray) -> np.ndarray:
        # V(y) − 1
        safe = np.minimum(y, 1.0)
        return np.where(y < 1.0, safe * (np.log(safe) - 1.0), -1.0)

    def dual_difference(self, w, y, params):
        w = np.asarray(w, dtype=float)
        return self._excess(w) - self._excess(np.asarray(float(y)))

    def dual_limits(self, params):
        return 1.0, -math.inf

    def dual_kinks(self, params):
        return (1.0,)

    def growth(self, params):
        return 1.0, 0.5


class LogPowerFamily(UtilityFamily):
    """Linear below x̄ = e^{1/(1−p)}, x^p ln x above; C¹ at x̄."""

    name = "log_power"
    param_names = ("p",)

    def validate(self, params):
        super().validate(params)
        _check_p(_require(params, "p"))

    @staticmethod
    def threshold(p: float) -> float:
        return math.exp(1.0 / (1.0 - p))

    @staticmethod
    def base_slope(p: float) -> float:
        return 1.0 / ((1.0 - p) * math.e)

    def value(self, x, params):
        p = params["p"]
        xbar = self.threshold(p)
        upper = np.maximum(x, xbar)
        return np.where(x <= xbar, self.base_slope(p) * x, np.power(upper, p) * np.log(upper))

    def slopes(self, x, params):
        p = params["p"]
        xbar = self.threshold(p)
        upper = np.maximum(x, xbar)
        d = np.where(x <= xbar, self.base_slope(p), np.power(upper, p - 1.0) * (p * np.log(upper) + 1.0))
        return d, d

    def curvature(self, x, params):
        p = params["p"]
        xbar = self.threshold(p)
        upper = np.maximum(x, xbar)
        d2 = np.power(upper, p - 2.0) * (p * (p - 1.0) * np.log(upper) + 2.0 * p - 1.0)
        return np.where(x < xbar, 0.0, d2)

    def dual_kinks(self, params):
        return (self.base_slope(params["p"]),)

    def growth(self, params):
        return None, 0.5 * (1.0 + params["p"])


FAMILIES: Dict[str, UtilityFamily] = {
    family.name: family
    for family in (
        PowerFamily(),
        CappedLinearFamily(),
        PiecewisePowerFamily(),
        InverseQuarticFamily(),
        ShiftedExponentialFamily(),
        LogPowerFamily(),
    )
}
