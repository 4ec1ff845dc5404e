"""
Asymptotic classification of dual utilities near y = 0.

The turnpike target is read off from how V behaves as y → 0:
    power_q            V(y)/y^q        → −k/q,  q < 0
    log                V(y)/ln y       → −k
    finite_saturation  (V−V(0))/y^q    → −k/q,  0 < q < 1
The limits are detected numerically from per-decade regressions on a
y grid, followed by a stability check of the normalised ratio.
"""

import logging
import math
from dataclasses import asdict, dataclass
from enum import Enum
from typing import Dict, Optional, Tuple

import numpy as np

from config.settings import settings
from core.errors import ConvergenceError, PreconditionError
from core.numerics import decade_slopes, snap_to_fraction
from utility.specs import DualUtilitySpec

logger = logging.getLogger(__name__)

_LOWEST_DECADES = 3


class AsymptoticKind(str, Enum):
    POWER_Q = "power_q"
    LOG = "log"
    FINITE_SATURATION = "finite_saturation"
    NONE = "none"


@dataclass(frozen=True)
class RateConstants:
    K: float
    alpha1: float
    delta: float
    exact: bool = False


@dataclass(frozen=True)
class AsymptoticClass:
    kind: AsymptoticKind
    q: Optional[float] = None
    scale_k: Optional[float] = None
    merton_p: Optional[float] = None
    rate_alpha1: Optional[float] = None
    rate_K: Optional[float] = None
    threshold_delta: Optional[float] = None
    exact: bool = False

    @property
    def has_rate(self) -> bool:
        return self.rate_alpha1 is not None and self.rate_K is not None

    def to_record(self) -> Dict[str, object]:
        record = asdict(self)
        record["kind"] = self.kind.value
        return record


def _sample(dual: DualUtilitySpec, grid: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Evaluate V on the grid, dropping points where numeric conjugation fails."""
    ys, vs = [], []
    for y in grid:
        try:
            vs.append(float(dual.eval(float(y))))
            ys.append(float(y))
        except ConvergenceError as e:
            logger.warning("⚠️  sample y=%.3g dropped: %s", y, e)
    return np.asarray(ys), np.asarray(vs)


def _stable_slope(ys: np.ndarray, fs: np.ndarray, log_values: bool = True) -> Optional[float]:
    slopes = decade_slopes(ys, fs, log_values=log_values)
    if len(slopes) < _LOWEST_DECADES:
        return None
    tail = [s for _, s in slopes[-_LOWEST_DECADES:]]
    if max(tail) - min(tail) >= settings.CLASSIFY_SLOPE_TOL:
        return None
    return tail[-1]


def _tail_mask(ys: np.ndarray) -> np.ndarray:
    cutoff = ys.min() * 10.0 ** _LOWEST_DECADES * (1 + 1e-9)
    return ys <= cutoff


def _stable_limit(ys: np.ndarray, ratio: np.ndarray, absolute: bool = False) -> Optional[float]:
    window = ratio[_tail_mask(ys)]
    limit = float(window[np.argmin(ys[_tail_mask(ys)])])
    drift = float(window.max() - window.min())
    scale = 1.0 + abs(limit) if absolute else abs(limit)
    if not np.all(np.isfinite(window)) or scale == 0 or drift > settings.CLASSIFY_RATIO_TOL * scale:
        return None
    return limit


def classify_asymptotics(dual: DualUtilitySpec, y_grid=None) -> AsymptoticClass:
    grid = settings.classification_grid() if y_grid is None else np.sort(np.asarray(y_grid, dtype=float))[::-1]
    if grid.min() > 1e-8:
        logger.warning("⚠️  y grid stops at %.3g; classification may be premature", grid.min())
    ys, vs = _sample(dual, grid)
    if ys.size < 2:
        return AsymptoticClass(AsymptoticKind.NONE)

    if math.isfinite(dual.V0):
        gap = dual.V0 - vs
        if np.any(gap <= 0):
            return AsymptoticClass(AsymptoticKind.NONE)
        slope = _stable_slope(ys, gap)
        if slope is None or not 0 < slope < 1:
            return AsymptoticClass(AsymptoticKind.NONE)
        q = snap_to_fraction(slope)
        if not 0 < q < 1:
            return AsymptoticClass(AsymptoticKind.NONE)
        limit = _stable_limit(ys, gap / np.power(ys, q))
        if limit is None:
            return AsymptoticClass(AsymptoticKind.NONE)
        k = q * limit
        return _with_rates(dual, AsymptoticKind.FINITE_SATURATION, q, k)

    log_slope = _stable_slope(ys, vs, log_values=False)
    if log_slope is not None and log_slope < 0:
        k = snap_to_fraction(-log_slope)
        if _stable_limit(ys, vs + k * np.log(ys), absolute=True) is not None:
            return AsymptoticClass(AsymptoticKind.LOG, q=0.0, scale_k=k, merton_p=0.0)

    if np.any(vs <= 0):
        return AsymptoticClass(AsymptoticKind.NONE)
    slope = _stable_slope(ys, vs)
    if slope is None or not slope < 0:
        return AsymptoticClass(AsymptoticKind.NONE)
    q = snap_to_fraction(slope)
    if not q < 0:
        return AsymptoticClass(AsymptoticKind.NONE)
    limit = _stable_limit(ys, vs / np.power(ys, q))
    if limit is None:
        return AsymptoticClass(AsymptoticKind.NONE)
    return _with_rates(dual, AsymptoticKind.POWER_Q, q, -q * limit)


def _with_rates(dual: DualUtilitySpec, kind: AsymptoticKind, q: float, k: float) -> AsymptoticClass:
    rates = rate_constants(dual, q, k=k)
    return AsymptoticClass(
        kind=kind,
        q=q,
        scale_k=k,
        merton_p=q / (q - 1.0),
        rate_alpha1=rates.alpha1,
        rate_K=rates.K,
        threshold_delta=rates.delta,
        exact=rates.exact,
    )


def rate_constants(
    dual: DualUtilitySpec,
    q: float,
    k: float = 1.0,
    delta: Optional[float] = None,
) -> RateConstants:
    """(K, α₁, δ) with |V(y)/(k y^q) + 1/q| ≤ K y^{α₁} for y ≤ δ.

    For 0 < q < 1 the finite value V(0) is subtracted first. α₁ is fitted in
    the small-y window; when the residual only shows up above it, the largest
    admissible exponent 1−q is used and K covers the whole range.
    """
    if not q < 1 or q == 0:
        raise PreconditionError(f"rate constants need q < 1, q != 0; got {q}")
    delta = settings.RATE_THRESHOLD_DELTA if delta is None else delta
    top = math.log10(delta)
    grid = np.logspace(top, settings.CLASSIFY_BOTTOM_DECADE, int(round((top - settings.CLASSIFY_BOTTOM_DECADE) * 8)) + 1)
    ys, vs = _sample(dual, grid)
    base = vs - dual.V0 if q > 0 else vs
    resid = np.abs(base / (k * np.power(ys, q)) + 1.0 / q)

    noise = 1e-12 * (1.0 + abs(1.0 / q))
    resolvable = resid > noise
    if not np.any(resolvable):
        return RateConstants(K=0.0, alpha1=1.0 - q, delta=delta, exact=True)

    window = resolvable & (ys <= 0.1 * delta)
    alpha1 = 1.0 - q
    if window.sum() >= 3:
        fitted = float(np.polyfit(np.log(ys[window]), np.log(resid[window]), 1)[0])
        if fitted > 0:
            alpha1 = min(snap_to_fraction(fitted), 1.0 - q)
    K = float(np.max(resid[resolvable] / np.power(ys[resolvable], alpha1)))
    return RateConstants(K=K, alpha1=alpha1, delta=delta)
