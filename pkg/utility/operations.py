"""
Public utility operations: evaluation, superdifferentials, conjugation and
the biconjugate residual, plus the primal-side limit diagnostics.
"""

from typing import Dict, Tuple

import numpy as np

from config.settings import settings
from core.errors import DomainError
from utility.conjugation import numeric_biconjugate, numeric_conjugate
from utility.specs import UtilitySpec


def eval_utility(spec: UtilitySpec, x: float) -> float:
    return spec.eval(x)


def superdifferential(spec: UtilitySpec, x: float) -> Tuple[float, float]:
    """[lo, hi] = [right derivative, left derivative] of U at x."""
    return spec.superdifferential(x)


def conjugate(spec: UtilitySpec, y: float, numeric: bool = False) -> float:
    """V(y); closed form when the family has one unless ``numeric`` is set."""
    if not y > 0:
        raise DomainError("conjugate needs y > 0")
    if numeric:
        value, _ = numeric_conjugate(spec.eval, y, settings.CONJUGATE_BRACKET_CAP)
        return value
    return spec.dual().eval(y)


def biconjugate_residual(spec: UtilitySpec, x: float) -> float:
    if not x > 0:
        raise DomainError("biconjugate residual needs x > 0")
    dual = spec.dual()
    inf_value, _ = numeric_biconjugate(dual.eval, x)
    return abs(spec.eval(x) - inf_value)


def relative_risk_aversion(spec: UtilitySpec, x):
    """R(x) = −xU''(x)/U'(x) using the right derivative."""
    arr = np.asarray(x, dtype=float)
    if np.any(arr <= 0):
        raise DomainError("relative risk aversion needs x > 0")
    slopes = np.array([spec.superdifferential(float(v))[0] for v in arr.reshape(-1)]).reshape(arr.shape)
    out = -arr * np.asarray(spec.curvature(arr), dtype=float) / slopes
    return float(out) if np.ndim(x) == 0 else out


def primal_limit_check(spec: UtilitySpec, p: float, grid=None) -> Dict[str, object]:
    """Large-x diagnostics for the primal sufficient conditions.

    Reports U(x)/(x^p/p) (power target), U(x)/ln x (p=0) or
    (U(∞)−U(x))/(x^p/|p|) (p<0), together with R(x) whose limit is 1−p.
    """
    xs = np.logspace(2, 10, 9) if grid is None else np.asarray(grid, dtype=float)
    u = np.asarray(spec.eval(xs), dtype=float)
    if p > 0:
        ratio = u / (np.power(xs, p) / p)
    elif p == 0:
        ratio = u / np.log(xs)
    else:
        sup = spec.dual().V0
        ratio = (sup - u) / (np.power(xs, p) / abs(p)) if np.isfinite(sup) else np.full_like(xs, np.nan)
    return {
        "x": xs,
        "ratio": ratio,
        "risk_aversion": relative_risk_aversion(spec, xs),
        "target_risk_aversion": 1.0 - p,
    }
