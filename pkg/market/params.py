"""
Market description: rates, Sharpe ratio, transform constants of the heat
substitution, the two supported constraint cones and θ̂ schedules.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence, Tuple

import numpy as np

from core.errors import DegenerateError, ParameterError, UnsupportedConeError


@dataclass(frozen=True)
class MarketParams:
    """Single risky asset plus money market; all rates per year."""

    r: float
    mu: float
    sigma: float

    def __post_init__(self):
        for name in ("r", "mu", "sigma"):
            if not math.isfinite(getattr(self, name)):
                raise ParameterError(f"{name} must be finite")
        if self.r <= 0:
            raise ParameterError("r must be positive")
        if self.sigma <= 0:
            raise ParameterError("sigma must be positive")

    @property
    def theta(self) -> float:
        return (self.mu - self.r) / self.sigma

    @property
    def excess_return(self) -> float:
        return self.mu - self.r

    @classmethod
    def from_projection(cls, r: float, sigma: float, theta_hat: Sequence[float]) -> "MarketParams":
        """Scalar market carrying the magnitude of a projected Sharpe vector."""
        norm = float(np.linalg.norm(np.asarray(theta_hat, dtype=float)))
        return cls(r=r, mu=r + sigma * norm, sigma=sigma)


@dataclass(frozen=True)
class DerivedConstants:
    alpha: float
    a: float
    beta: float
    q: float
    lam: float

    def lambda_of(self, q: float) -> float:
        theta_sq = 2.0 * self.a * self.a
        r = (self.alpha - 0.5) * theta_sq
        return 0.5 * theta_sq * q * (q - 1.0) - r * q


def derived_constants(market: MarketParams, q: float) -> DerivedConstants:
    if not q < 1:
        raise ParameterError(f"q must be < 1, got {q}")
    theta = market.theta
    if theta == 0:
        raise DegenerateError("Sharpe ratio is zero; transform constants are undefined")
    theta_sq = theta * theta
    alpha = 0.5 + market.r / theta_sq
    a = abs(theta) / math.sqrt(2.0)
    beta = -(a * a) * (alpha * alpha)
    lam = 0.5 * theta_sq * q * (q - 1.0) - market.r * q
    return DerivedConstants(alpha=alpha, a=a, beta=beta, q=q, lam=lam)


# ----------------------------------------------------------------------
# Cones
# ----------------------------------------------------------------------
class ConeKind(str, Enum):
    UNCONSTRAINED = "unconstrained"
    NONNEGATIVE_ORTHANT = "nonneg"

    @classmethod
    def parse(cls, value: str) -> "ConeKind":
        aliases = {"nonnegative_orthant": cls.NONNEGATIVE_ORTHANT, "no_short_selling": cls.NONNEGATIVE_ORTHANT}
        if value in aliases:
            return aliases[value]
        try:
            return cls(value)
        except ValueError:
            raise UnsupportedConeError(f"unsupported cone '{value}'") from None


@dataclass(frozen=True)
class ConeSpec:
    kind: ConeKind = ConeKind.UNCONSTRAINED
    excess_returns: Tuple[float, ...] = field(default_factory=tuple)


def project_theta_hat(theta_vec: Sequence[float], cone: ConeSpec) -> Tuple[np.ndarray, float]:
    """Return (θ̂, θ₀ = |θ̂|) for the two cones whose projection is closed-form.

    For both, the minimiser of |θ + σ⁻¹π̃|² over the polar cone is π̃ = 0,
    so θ̂ = θ.
    """
    theta = np.asarray(theta_vec, dtype=float).reshape(-1)
    if cone.kind is ConeKind.NONNEGATIVE_ORTHANT:
        b = np.asarray(cone.excess_returns, dtype=float).reshape(-1)
        if b.size != theta.size:
            raise UnsupportedConeError("excess_returns must match the number of assets")
        if not np.all(b > 0):
            raise UnsupportedConeError("no-short-selling cone needs all excess returns positive")
    elif cone.kind is not ConeKind.UNCONSTRAINED:
        raise UnsupportedConeError(f"unsupported cone '{cone.kind}'")

    theta0 = float(np.linalg.norm(theta))
    if theta0 == 0:
        raise DegenerateError("|theta_hat| = 0: no positive floor on the market price of risk")
    return theta.copy(), theta0


# ----------------------------------------------------------------------
# θ̂ schedules
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class ThetaSchedule:
    """Piecewise-constant θ̂ over time-to-go; values[i] holds on [breaks[i], breaks[i+1])."""

    breaks: Tuple[float, ...]
    values: Tuple[float, ...]

    def __post_init__(self):
        if len(self.breaks) != len(self.values) or not self.breaks:
            raise ParameterError("schedule needs one theta per segment start")
        if self.breaks[0] != 0.0:
            raise ParameterError("schedule must start at time-to-go 0")
        if any(b1 <= b0 for b0, b1 in zip(self.breaks, self.breaks[1:])):
            raise ParameterError("schedule breaks must be strictly increasing")
        if any(v == 0 for v in self.values):
            raise DegenerateError("schedule contains a zero Sharpe ratio")

    def accumulated(self, tau: float) -> float:
        """Exact ∫₀^τ ½θ̂(s)² ds."""
        total = 0.0
        edges = list(self.breaks[1:]) + [math.inf]
        for start, end, value in zip(self.breaks, edges, self.values):
            if tau <= start:
                break
            total += 0.5 * value * value * (min(tau, end) - start)
        return total
