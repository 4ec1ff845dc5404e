"""
Turnpike reports: measured errors along a τ grid, the explicit bound curve
and an empirical decay-rate fit.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import stats

from closed_forms.examples import ex4_sharp_bound
from core.errors import InsufficientDataError, PreconditionError
from solvers.dual import DualSurface
from solvers.primal import Region, value_u
from turnpike.bounds import BoundConstants, bound_constants, error_bound, identity_error, merton_allocation
from utility.asymptotics import AsymptoticClass, AsymptoticKind
from utility.specs import UtilityKind

logger = logging.getLogger(__name__)

_ERROR_FLOOR = 1e-14
_MIN_FIT_POINTS = 5
# quadrature noise allowance when the bound is exactly zero
_DOMINANCE_SLACK = 1e-9


@dataclass(frozen=True)
class DecayFit:
    c_hat: float
    intercept: float
    r_squared: float
    window: Tuple[float, float]
    exact: bool = False

    @classmethod
    def exact_turnpike(cls, window: Tuple[float, float]) -> "DecayFit":
        return cls(c_hat=math.inf, intercept=-math.inf, r_squared=1.0, window=window, exact=True)

    def to_record(self) -> Dict[str, object]:
        if self.exact:
            return {"fitted_rate": "exact", "window": list(self.window)}
        return {
            "fitted_rate": self.c_hat,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "window": list(self.window),
        }


def fit_decay_rate(
    points: Sequence[Tuple[float, float]],
    window: Optional[Tuple[float, float]] = None,
) -> DecayFit:
    """OLS of ln(error) on t inside the window; c_hat = −slope.

    Errors at or below 1e−14 are dropped. A window whose errors are all
    below that floor is an exact turnpike.
    """
    ts = np.asarray([t for t, _ in points], dtype=float)
    errs = np.asarray([e for _, e in points], dtype=float)
    if window is None:
        window = (float(ts.min()), float(ts.max())) if ts.size else (0.0, 0.0)
    t_min, t_max = window
    inside = (ts >= t_min) & (ts <= t_max)
    if np.any(inside) and np.all(errs[inside] <= _ERROR_FLOOR):
        return DecayFit.exact_turnpike(window)

    usable = inside & (errs > _ERROR_FLOOR)
    if usable.sum() < _MIN_FIT_POINTS:
        raise InsufficientDataError(
            f"need {_MIN_FIT_POINTS} points with error > {_ERROR_FLOOR:g} in [{t_min}, {t_max}], got {int(usable.sum())}"
        )
    fit = stats.linregress(ts[usable], np.log(errs[usable]))
    return DecayFit(
        c_hat=-float(fit.slope),
        intercept=float(fit.intercept),
        r_squared=float(fit.rvalue) ** 2,
        window=(float(t_min), float(t_max)),
    )


@dataclass(frozen=True)
class TurnpikeReport:
    x: float
    p: float
    tau_grid: Tuple[float, ...]
    merton_target: float
    errors: Tuple[float, ...]
    allocations: Tuple[float, ...]
    bound_curve: Tuple[float, ...]
    fitted_rate: Optional[DecayFit] = None
    dominance_ok: Optional[bool] = None
    t_bar: Optional[float] = None
    sharp_bound: Optional[Tuple[float, ...]] = None
    constants: Optional[BoundConstants] = field(default=None, repr=False)

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(
            {
                "t": self.tau_grid,
                "error": self.errors,
                "bound": self.bound_curve,
                "target": [self.merton_target] * len(self.tau_grid),
                "A": self.allocations,
            }
        )
        if self.sharp_bound is not None:
            frame["sharp_bound"] = self.sharp_bound
        return frame

    def footer(self) -> Dict[str, object]:
        record: Dict[str, object] = {
            "x": self.x,
            "p": self.p,
            "merton_target": self.merton_target,
            "dominance_ok": self.dominance_ok,
            "t_bar": self.t_bar,
        }
        record["fit"] = self.fitted_rate.to_record() if self.fitted_rate is not None else None
        if self.constants is not None:
            c = self.constants
            record["constants"] = {
                "q": c.q, "alpha1": c.alpha1, "K": c.K, "L0": c.L0, "L1": c.L1, "L2": c.L2,
                "L": c.L, "rate": c.rate, "D_of_x": c.D_of_x(self.x / c.scale_k),
            }
        return record


def _terminal_allocation(surface: DualSurface, x: float) -> float:
    """A(0,x) = −(θ/σ)U'/U'' where U is twice differentiable with U'' < 0."""
    primal = surface.dual.primal
    if primal is None:
        return math.nan
    slope = primal.superdifferential(x)[0]
    curv = float(primal.curvature(x))
    if not curv < 0:
        return math.nan
    return -surface.market.theta / surface.market.sigma * slope / curv


def build_report(
    surface: DualSurface,
    cls: AsymptoticClass,
    x: float,
    tau_grid: Sequence[float],
    window: Optional[Tuple[float, float]] = None,
) -> TurnpikeReport:
    if cls.kind is AsymptoticKind.NONE or cls.merton_p is None:
        raise PreconditionError("a turnpike report needs a utility with a Merton limit")
    p = cls.merton_p
    target = merton_allocation(surface.market, p, x)
    taus = tuple(float(t) for t in tau_grid)

    constants = None
    if cls.kind is AsymptoticKind.POWER_Q and cls.has_rate:
        try:
            constants = bound_constants(surface.market, cls)
        except PreconditionError as e:
            logger.warning("⚠️  no explicit bound: %s", e)

    errors: List[float] = []
    amounts: List[float] = []
    bounds: List[float] = []
    for tau in taus:
        if tau == 0:
            amount = _terminal_allocation(surface, x)
            err = abs(amount - target)
        else:
            point = value_u(surface, tau, x)
            amount = point.A
            if point.region is Region.SATURATED:
                err = target
            else:
                err = identity_error(surface, tau, point.y, p)
        errors.append(err)
        amounts.append(amount)
        if constants is not None and tau > constants.t_bar:
            bounds.append(error_bound(constants, x, tau))
        else:
            bounds.append(math.nan)
        logger.debug("tau=%.6g error=%.6g bound=%.6g", tau, err, bounds[-1])

    dominance = None
    if constants is not None:
        checked = [(e, b) for t, e, b in zip(taus, errors, bounds) if t > constants.t_bar]
        if checked:
            dominance = all(b >= e - _DOMINANCE_SLACK * target for e, b in checked)

    if window is None:
        if constants is not None:
            window = (constants.t_bar * (1 + 1e-12), 4.0 * constants.t_bar)
        else:
            positive = [t for t in taus if t > 0]
            window = (min(positive), max(positive)) if positive else (0.0, 0.0)
    try:
        fit = fit_decay_rate(list(zip(taus, errors)), window)
    except InsufficientDataError as e:
        logger.warning("⚠️  decay rate not fitted: %s", e)
        fit = None

    sharp = None
    if surface.dual.kind is UtilityKind.INVERSE_QUARTIC:
        sharp = tuple(ex4_sharp_bound(surface.market, x, t) for t in taus)

    logger.info(
        "📈 turnpike report x=%.6g over %d taus: dominance=%s fit=%s",
        x, len(taus), dominance, None if fit is None else ("exact" if fit.exact else f"{fit.c_hat:.6g}"),
    )
    return TurnpikeReport(
        x=x,
        p=p,
        tau_grid=taus,
        merton_target=target,
        errors=tuple(errors),
        allocations=tuple(amounts),
        bound_curve=tuple(bounds),
        fitted_rate=fit,
        dominance_ok=dominance,
        t_bar=None if constants is None else constants.t_bar,
        sharp_bound=sharp,
        constants=constants,
    )
