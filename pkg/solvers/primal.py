"""
Primal recovery from a dual surface.

For interior wealth x < −v_y(τ, 0) the dual state y solves v_y(τ, y) = −x,
u = v + xy, u_x = y, u_xx = −1/v_yy and the optimal amount in the risky
asset is A = (θ/σ)·y·v_yy. At or beyond the saturation boundary the value is
v(τ, 0) and nothing is invested.
"""

import logging
import math
from dataclasses import asdict, dataclass
from enum import Enum
from typing import Dict, Iterable, Sequence, Tuple

import numpy as np
import pandas as pd

from config.settings import settings
from core.errors import BracketError, DegenerateError, DomainError, RegionError
from solvers.dual import DualSurface
from utility.conjugation import numeric_biconjugate

logger = logging.getLogger(__name__)

_BISECTION_WIDTH = 1e-3
_MAX_NEWTON = 30


class Region(str, Enum):
    INTERIOR = "interior"
    SATURATED = "saturated"


@dataclass(frozen=True)
class PrimalPoint:
    tau: float
    x: float
    region: Region
    y: float
    u: float
    u_x: float
    A: float
    pi_frac: float

    def to_record(self) -> Dict[str, object]:
        record = asdict(self)
        record["region"] = self.region.value
        return record


# ----------------------------------------------------------------------
# Inversion
# ----------------------------------------------------------------------
def _initial_guess(surface: DualSurface, tau: float, x: float) -> float:
    q, lam = surface.constants.q, surface.constants.lam
    if q < 0:
        guess = x ** (1.0 / (q - 1.0)) * math.exp(-lam * tau / (q - 1.0))
        if math.isfinite(guess) and guess > 0:
            return guess
    return 1.0


def invert_marginal(surface: DualSurface, tau: float, x: float) -> float:
    """Unique y > 0 with v_y(τ, y) = −x.

    Bisection in ln y until the bracket is narrower than 1e−3 relative,
    then safeguarded Newton steps using v_yy.
    """
    if not tau > 0:
        raise DomainError("inversion needs tau > 0")
    if not x > 0:
        raise DomainError("inversion needs x > 0")
    boundary = surface.saturation_wealth(tau)
    if x >= boundary:
        raise RegionError(f"x={x:.6g} is saturated (boundary {boundary:.6g})")

    tol = settings.INVERSION_TOL * (1.0 + x)
    max_expansions = settings.INVERSION_MAX_EXPANSIONS

    def gap(y: float) -> float:
        return surface.eval_vy(tau, y) + x

    y0 = _initial_guess(surface, tau, x)
    g0 = gap(y0)
    if g0 == 0:
        return y0
    lo = hi = y0
    expansions = 0
    if g0 > 0:
        while True:
            hi, lo = lo, lo / 2.0
            expansions += 1
            if gap(lo) <= 0:
                break
            if expansions >= max_expansions:
                raise BracketError(f"no lower bracket for x={x:.6g} after {expansions} halvings")
    else:
        while True:
            lo, hi = hi, hi * 2.0
            expansions += 1
            if gap(hi) >= 0:
                break
            if expansions >= max_expansions:
                raise BracketError(f"no upper bracket for x={x:.6g} after {expansions} doublings")

    while hi / lo - 1.0 > _BISECTION_WIDTH:
        mid = math.sqrt(lo * hi)
        g_mid = gap(mid)
        if abs(g_mid) <= tol:
            return mid
        if g_mid > 0:
            hi = mid
        else:
            lo = mid

    y = math.sqrt(lo * hi)
    g_y = gap(y)
    best_y, best_gap = y, abs(g_y)
    for _ in range(_MAX_NEWTON):
        if g_y > 0:
            hi = y
        else:
            lo = y
        step_to = y - g_y / surface.eval_vyy(tau, y)
        if not lo < step_to < hi:
            step_to = math.sqrt(lo * hi)
        if abs(step_to - y) <= 1e-15 * y:
            break
        y = step_to
        g_y = gap(y)
        if abs(g_y) < best_gap:
            best_y, best_gap = y, abs(g_y)
        elif best_gap <= tol:
            break
    if best_gap > tol:
        raise BracketError(f"inversion stalled at |v_y + x| = {best_gap:.3g} for x={x:.6g}")
    return best_y


# ----------------------------------------------------------------------
# Primal values
# ----------------------------------------------------------------------
def _terminal_point(surface: DualSurface, x: float) -> PrimalPoint:
    dual = surface.dual
    region = Region.SATURATED if x >= -dual.Vprime0 else Region.INTERIOR
    if dual.primal is not None:
        u = float(dual.primal.eval(x))
        y = dual.primal.superdifferential(x)[0]
    else:
        u, y = numeric_biconjugate(dual.eval, x)
    return PrimalPoint(tau=0.0, x=x, region=region, y=y, u=u, u_x=y, A=math.nan, pi_frac=math.nan)


def value_u(surface: DualSurface, tau: float, x: float) -> PrimalPoint:
    if not x > 0:
        raise DomainError("primal value needs x > 0")
    if tau < 0:
        raise DomainError("time-to-horizon must be >= 0")
    if tau == 0:
        return _terminal_point(surface, x)

    v0, _ = surface.boundary_limits(tau)
    if x >= surface.saturation_wealth(tau):
        return PrimalPoint(tau=tau, x=x, region=Region.SATURATED, y=0.0, u=v0, u_x=0.0, A=0.0, pi_frac=0.0)

    y = invert_marginal(surface, tau, x)
    v = surface.eval_v(tau, y)
    vyy = surface.eval_vyy(tau, y)
    market = surface.market
    amount = market.theta / market.sigma * y * vyy
    return PrimalPoint(
        tau=tau, x=x, region=Region.INTERIOR, y=y, u=v + x * y, u_x=y, A=amount, pi_frac=amount / x
    )


def allocation(surface: DualSurface, tau: float, x: float) -> Tuple[float, float]:
    if not tau > 0:
        raise DomainError("allocation needs tau > 0")
    point = value_u(surface, tau, x)
    return point.A, point.pi_frac


def primal_allocation(surface: DualSurface, tau: float, x: float) -> float:
    """−(θ/σ)u_x/u_xx with u_xx from the inverse-function rule."""
    y = invert_marginal(surface, tau, x)
    u_xx = _u_xx(surface, tau, y)
    market = surface.market
    return -market.theta / market.sigma * y / u_xx


def _u_xx(surface: DualSurface, tau: float, y: float) -> float:
    vyy = surface.eval_vyy(tau, y)
    if not (vyy > 0 and math.isfinite(vyy)) or vyy < 1e-300:
        raise DegenerateError(f"v_yy={vyy:.3g} at y={y:.6g}; u_xx is undefined")
    return -1.0 / vyy


# ----------------------------------------------------------------------
# HJB residuals
# ----------------------------------------------------------------------
def _tau_step(tau: float) -> float:
    h = settings.FD_TAU_STEP
    return h if tau > h else 0.5 * tau


def hjb_residual_dual(surface: DualSurface, tau: float, y: float) -> float:
    """∂v/∂τ − ½θ²y²v_yy + r·y·v_y, with ∂v/∂τ by central difference."""
    if not tau > 0:
        raise DomainError("residual needs tau > 0")
    h = _tau_step(tau)
    dv = (surface.eval_v(tau + h, y) - surface.eval_v(tau - h, y)) / (2.0 * h)
    theta, r = surface.market.theta, surface.market.r
    vy = surface.eval_vy(tau, y)
    vyy = surface.eval_vyy(tau, y)
    return dv - 0.5 * theta ** 2 * y * y * vyy + r * y * vy


def hjb_residual_primal(surface: DualSurface, tau: float, x: float) -> float:
    """−∂u/∂τ − ½θ²u_x²/u_xx + r·x·u_x at an interior point."""
    point = value_u(surface, tau, x)
    if point.region is not Region.INTERIOR:
        raise RegionError(f"x={x:.6g} is not interior at tau={tau:.6g}")
    h = _tau_step(tau)
    du = (value_u(surface, tau + h, x).u - value_u(surface, tau - h, x).u) / (2.0 * h)
    u_xx = _u_xx(surface, tau, point.y)
    theta, r = surface.market.theta, surface.market.r
    return -du - 0.5 * theta ** 2 * point.u_x ** 2 / u_xx + r * x * point.u_x


# ----------------------------------------------------------------------
# Sweeps
# ----------------------------------------------------------------------
def conjugacy_gap(surface: DualSurface, tau: float, x: float, y_grid: Sequence[float]) -> float:
    """u(τ,x) − min over the grid of v(τ,y) + xy (≤ 0 up to solver error)."""
    point = value_u(surface, tau, x)
    best = min(surface.eval_v(tau, float(y)) + x * float(y) for y in y_grid)
    return point.u - best


def value_grid(surface: DualSurface, taus: Iterable[float], xs: Iterable[float]) -> pd.DataFrame:
    xs = list(xs)
    rows = [value_u(surface, float(tau), float(x)).to_record() for tau in taus for x in xs]
    frame = pd.DataFrame(rows, columns=["tau", "x", "region", "y", "u", "u_x", "A", "pi_frac"])
    return frame.astype({"tau": np.float64, "x": np.float64})
