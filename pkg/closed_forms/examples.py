"""
Analytic reference solutions for the worked examples.

Each function evaluates an explicit formula; none of them calls the
quadrature or the inversion routines, so they can serve as independent
oracles for both.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, Tuple

import pandas as pd

from core.errors import DomainError, ParameterError
from core.normal import norm_cdf, norm_pdf, norm_ppf
from market.params import MarketParams, derived_constants
from utility.families import LogPowerFamily

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ReferencePoint:
    tau: float
    x: float
    y: float
    v: float
    v_y: float
    u: float
    A: float
    pi_frac: float
    saturated: bool = False
    extra: Dict[str, float] = field(default_factory=dict)


def _check_p(p: float) -> None:
    if not 0 < p < 1:
        raise ParameterError(f"p must lie in (0, 1), got {p}")


# ----------------------------------------------------------------------
# Power utility
# ----------------------------------------------------------------------
def merton_dual(market: MarketParams, p: float, tau: float, y: float) -> Tuple[float, float]:
    """(v, v_y) for V(y) = −y^q/q."""
    _check_p(p)
    q = p / (p - 1.0)
    lam = derived_constants(market, q).lam
    grow = math.exp(lam * tau)
    return -(y ** q) / q * grow, -(y ** (q - 1.0)) * grow


def merton_reference(market: MarketParams, p: float, tau: float, x: float) -> ReferencePoint:
    _check_p(p)
    if not x > 0:
        raise DomainError("merton reference needs x > 0")
    q = p / (p - 1.0)
    lam = derived_constants(market, q).lam
    y = x ** (1.0 / (q - 1.0)) * math.exp(-lam * tau / (q - 1.0))
    v, v_y = merton_dual(market, p, tau, y)
    frac = market.theta / ((1.0 - p) * market.sigma)
    return ReferencePoint(tau=tau, x=x, y=y, v=v, v_y=v_y, u=v + x * y, A=frac * x, pi_frac=frac)


# ----------------------------------------------------------------------
# Capped linear utility U(x) = min(x, H)
# ----------------------------------------------------------------------
def capped_dual(market: MarketParams, H: float, tau: float, y: float) -> Tuple[float, float]:
    if not (tau > 0 and y > 0):
        raise DomainError("capped dual needs tau > 0 and y > 0")
    s = market.theta * math.sqrt(tau)
    d2 = (-math.log(y) + (market.r + 0.5 * market.theta ** 2) * tau) / s
    d1 = d2 - s
    disc = math.exp(-market.r * tau)
    return H * norm_cdf(d2) - H * y * disc * norm_cdf(d1), -H * disc * norm_cdf(d1)


def capped_reference(market: MarketParams, H: float, tau: float, x: float) -> ReferencePoint:
    if not H > 0:
        raise ParameterError("H must be positive")
    if not (tau > 0 and x > 0):
        raise DomainError("capped reference needs tau > 0 and x > 0")
    boundary = H * math.exp(-market.r * tau)
    if x >= boundary:
        return ReferencePoint(
            tau=tau, x=x, y=0.0, v=H, v_y=-boundary, u=H, A=0.0, pi_frac=0.0,
            saturated=True, extra={"boundary": boundary},
        )
    s = market.theta * math.sqrt(tau)
    z0 = norm_ppf(x / boundary)
    y = math.exp(-s * z0 + (market.r - 0.5 * market.theta ** 2) * tau)
    v, v_y = capped_dual(market, H, tau, y)
    amount = boundary * norm_pdf(z0) / (market.sigma * math.sqrt(tau))
    return ReferencePoint(
        tau=tau, x=x, y=y, v=v, v_y=v_y, u=H * norm_cdf(z0 + s), A=amount, pi_frac=amount / x,
        extra={"boundary": boundary},
    )


def capped_ruin_prob(market: MarketParams, H: float, T: float, x: float) -> Tuple[float, float]:
    """(P(X*_T = 0), E[U(X*_T)]) under the optimal capped strategy."""
    if not (H > 0 and T > 0 and x > 0):
        raise DomainError("capped ruin needs H, T, x > 0")
    boundary = H * math.exp(-market.r * T)
    if x >= boundary:
        return 0.0, H
    z0 = norm_ppf(x / boundary)
    s = market.theta * math.sqrt(T)
    return norm_cdf(-z0 - s), H * norm_cdf(z0 + s)


def capped_frontier(market: MarketParams, H_values: Iterable[float], T: float, x: float) -> pd.DataFrame:
    """Value and ruin probability across caps; both rise with H."""
    rows = []
    for H in H_values:
        ruin, value = capped_ruin_prob(market, float(H), T, x)
        rows.append({"H": float(H), "value": value, "ruin": ruin})
    return pd.DataFrame(rows, columns=["H", "value", "ruin"])


# ----------------------------------------------------------------------
# Linear-then-power utility
# ----------------------------------------------------------------------
def piecewise_reference(market: MarketParams, H: float, p: float, tau: float, y: float) -> Tuple[float, float]:
    """(v, v_y) for V(y) = H(1−p)p^{−q}y^q on (0,p], H(1−y) on (p,1], 0 beyond.

    The law of ln Ỹ is N(m, s²) with m = −rτ − s²/2 and s = θ√τ; the three
    branches integrate to lognormal partial moments.

    Since yỸ = (ye^{−rτ})·e^{−s²/2 − sZ}, this is the rate-free closed form
    with spread α = θ√τ evaluated at the discounted state ye^{−rτ}.
    """
    _check_p(p)
    if not H > 0:
        raise ParameterError("H must be positive")
    if not (tau > 0 and y > 0):
        raise DomainError("piecewise reference needs tau > 0 and y > 0")
    q = p / (p - 1.0)
    s = market.theta * math.sqrt(tau)
    m = -market.r * tau - 0.5 * s * s
    # ln Ỹ thresholds of the kinks y·Ỹ = p and y·Ỹ = 1
    c_p = math.log(p / y)
    c_1 = -math.log(y)
    scale = H * (1.0 - p) * p ** (-q)
    power_mass = math.exp(q * m + 0.5 * (q * s) ** 2) * norm_cdf((c_p - m - q * s * s) / s)
    mean_y = math.exp(m + 0.5 * s * s)
    linear_prob = norm_cdf((c_1 - m) / s) - norm_cdf((c_p - m) / s)
    linear_mean = mean_y * (norm_cdf((c_1 - m - s * s) / s) - norm_cdf((c_p - m - s * s) / s))
    v = scale * y ** q * power_mass + H * (linear_prob - y * linear_mean)
    v_y = q * scale * y ** (q - 1.0) * power_mass - H * linear_mean
    return v, v_y


# ----------------------------------------------------------------------
# Inverse-quartic utility, V(y) = y⁻³/3 + y⁻¹
# ----------------------------------------------------------------------
def ex4_sharp_bound(market: MarketParams, x: float, t: float) -> float:
    theta, sigma, r = market.theta, market.sigma, market.r
    return 2.0 * theta / sigma * math.sqrt(x) * math.exp(-(0.5 * r + 2.0 * theta ** 2) * t)


def ex4_reference(market: MarketParams, t: float, x: float) -> ReferencePoint:
    if t < 0:
        raise DomainError("time-to-horizon must be >= 0")
    if not x > 0:
        raise DomainError("ex4 reference needs x > 0")
    theta, sigma, r = market.theta, market.sigma, market.r
    slow = math.exp((r + theta ** 2) * t)
    fast = math.exp(3.0 * (r + 2.0 * theta ** 2) * t)
    y = math.sqrt((slow + math.sqrt(slow * slow + 4.0 * x * fast)) / (2.0 * x))
    v = fast / (3.0 * y ** 3) + slow / y
    v_y = -fast / y ** 4 - slow / y ** 2
    u = 2.0 / 3.0 * (slow / y + 2.0 * x * y)
    amount = theta / sigma * (4.0 * x - 2.0 * slow / (y * y))
    exact_error = theta / sigma * 4.0 * x / (1.0 + math.sqrt(1.0 + 4.0 * x * math.exp((r + 4.0 * theta ** 2) * t)))
    return ReferencePoint(
        tau=t, x=x, y=y, v=v, v_y=v_y, u=u, A=amount, pi_frac=amount / x,
        extra={"exact_error": exact_error, "sharp_bound": ex4_sharp_bound(market, x, t)},
    )


# ----------------------------------------------------------------------
# Shifted exponential utility U(x) = 1 − e^{−x}
# ----------------------------------------------------------------------
def ex5_allocation(market: MarketParams, tau: float, y: float) -> float:
    if not (tau > 0 and y > 0):
        raise DomainError("ex5 allocation needs tau > 0 and y > 0")
    theta = market.theta
    s = theta * math.sqrt(tau)
    k = (math.log(y) - (market.r + 0.5 * theta ** 2) * tau) / s
    return theta / market.sigma * math.exp(-market.r * tau) * norm_cdf(-k - s)


# ----------------------------------------------------------------------
# Linear-then-x^p ln x utility
# ----------------------------------------------------------------------
def ex400_diagnostics(p: float, x: float) -> Tuple[float, Callable[[float], float]]:
    """R(x) = −xU''/U' and the power moment q ↦ x·U'(x)^{1−q}.

    R is 0 on the linear piece and tends to 1−p; for q = p/(p−1) the moment
    has no finite positive limit.
    """
    _check_p(p)
    if not x > 0:
        raise DomainError("ex400 diagnostics need x > 0")
    xbar = LogPowerFamily.threshold(p)
    if x < xbar:
        risk_aversion = 0.0
        marginal = LogPowerFamily.base_slope(p)
    else:
        ln_x = math.log(x)
        risk_aversion = (p * (1.0 - p) * ln_x + 1.0 - 2.0 * p) / (p * ln_x + 1.0)
        marginal = x ** (p - 1.0) * (p * ln_x + 1.0)

    def power_moment(q: float) -> float:
        return x * marginal ** (1.0 - q)

    return risk_aversion, power_moment
