"""
Dual value surface v(τ, y) = E[V(yỸ)] with ln Ỹ ~ N(−(r+θ²/2)τ, θ²τ).

Derivatives come from differentiating the Gaussian kernel instead of V
(route B), so kinked duals need no special treatment beyond splitting the
integration range at the kink images. With x = ln y and s = θ√τ:

    y v_y            = E[(V(yỸ) − V(y)) Z] / s
    y² v_yy + y v_y  = E[(V(yỸ) − V(y)) (Z² − 1)] / s²

Route A uses V' directly: y v_y = E[V'(yỸ) yỸ].
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np

from config.settings import settings
from core.errors import DomainError, ParameterError
from core.normal import norm_cdf
from market.params import DerivedConstants, MarketParams, ThetaSchedule, derived_constants
from solvers.quadrature import QuadratureConfig, gaussian_expectation
from utility.asymptotics import AsymptoticClass, AsymptoticKind
from utility.specs import DualUtilitySpec, UtilitySpec

logger = logging.getLogger(__name__)

_ETA_LIMIT = 60.0
_ROUTES = ("A", "B")


@dataclass(frozen=True)
class DualSurface:
    market: MarketParams
    dual: DualUtilitySpec
    quad: QuadratureConfig = field(default_factory=QuadratureConfig.from_settings)
    constants: Optional[DerivedConstants] = None
    theta_schedule: Optional[ThetaSchedule] = None

    def __post_init__(self):
        if self.constants is None:
            object.__setattr__(self, "constants", derived_constants(self.market, self.dual.growth_q))

    def with_schedule(self, schedule: ThetaSchedule) -> "DualSurface":
        return DualSurface(self.market, self.dual, self.quad, self.constants, schedule)

    # ------------------------------------------------------------------
    # Law of Ỹ
    # ------------------------------------------------------------------
    def log_moments(self, tau: float) -> Tuple[float, float]:
        """(mean, std) of ln Ỹ at time-to-horizon τ."""
        if self.theta_schedule is not None:
            acc = self.theta_schedule.accumulated(tau)
        else:
            acc = 0.5 * self.market.theta ** 2 * tau
        return -self.market.r * tau - acc, math.sqrt(2.0 * acc)

    def _eta(self, y: float, m: float, s: float) -> float:
        """Enlarge η until the growth-certificate tail bound is negligible."""
        c, q = self.dual.growth_C, self.dual.growth_q
        eta = max(self.quad.eta_halfwidth, abs(q) * s + 8.0)
        if math.isfinite(self.dual.V0):
            return eta
        # V(w) ≤ C(1 + w^q) and E[Ỹ^q; tail] has a closed form
        power_moment = y ** q * math.exp(q * m + 0.5 * (q * s) ** 2)
        scale = c * (1.0 + power_moment)
        while eta < _ETA_LIMIT:
            tail = c * (
                2.0 * norm_cdf(-eta)
                + power_moment * (norm_cdf(-eta - q * s) + norm_cdf(-eta + q * s))
            )
            if tail <= 1e-6 * self.quad.rel_tol * scale:
                break
            eta += 2.0
        return eta

    def _breakpoints(self, y: float, m: float, s: float) -> List[float]:
        return [(math.log(k / y) - m) / s for k in self.dual.kinks]

    def _expect(self, tau: float, y: float, weight: Callable[[np.ndarray, np.ndarray, float], np.ndarray]) -> float:
        m, s = self.log_moments(tau)
        eta = self._eta(y, m, s)

        def integrand(z: np.ndarray) -> np.ndarray:
            w = y * np.exp(m + s * z)
            return weight(z, w, s)

        result = gaussian_expectation(integrand, eta, self.quad, self._breakpoints(y, m, s))
        return result.value

    @staticmethod
    def _check(tau: float, y: float, allow_terminal: bool) -> None:
        if not y > 0:
            raise DomainError("dual surface needs y > 0")
        if tau < 0 or (tau == 0 and not allow_terminal):
            raise DomainError(f"time-to-horizon out of range: {tau}")

    # ------------------------------------------------------------------
    # Values and derivatives
    # ------------------------------------------------------------------
    def eval_v(self, tau: float, y: float) -> float:
        self._check(tau, y, allow_terminal=True)
        if tau == 0:
            return float(self.dual.eval(y))
        return self._expect(tau, y, lambda z, w, s: self.dual.eval(w))

    def _first(self, tau: float, y: float, route: str) -> float:
        """y·v_y(τ, y)."""
        if route == "A":
            return self._expect(tau, y, lambda z, w, s: self.dual.slope(w) * w)
        return self._expect(tau, y, lambda z, w, s: self.dual.difference(w, y) * z / s)

    def _second(self, tau: float, y: float, route: str) -> float:
        """y²v_yy + y v_y."""
        if route == "A":
            anchor = float(self.dual.slope(y)) * y
            return self._expect(tau, y, lambda z, w, s: (self.dual.slope(w) * w - anchor) * z / s)
        return self._expect(tau, y, lambda z, w, s: self.dual.difference(w, y) * (z * z - 1.0) / (s * s))

    def _route(self, route: str) -> str:
        if route not in _ROUTES:
            raise ParameterError(f"unknown derivative route '{route}'")
        if route == "A" and not self.dual.has_slope:
            raise ParameterError(f"route A needs a closed-form V' ({self.dual.kind.value})")
        return route

    def eval_vy(self, tau: float, y: float, route: str = "B") -> float:
        self._check(tau, y, allow_terminal=False)
        return self._first(tau, y, self._route(route)) / y

    def eval_vyy(self, tau: float, y: float, route: str = "B", cross_check: bool = False) -> float:
        self._check(tau, y, allow_terminal=False)
        route = self._route(route)
        vyy = (self._second(tau, y, route) - self._first(tau, y, route)) / (y * y)
        if cross_check:
            h = max(1e-5 * y, 1e-9)
            fd = (self.eval_vy(tau, y + h, route) - self.eval_vy(tau, y - h, route)) / (2.0 * h)
            if abs(fd - vyy) > 1e-4 * abs(vyy):
                logger.warning(
                    "⚠️  v_yy cross-check mismatch at tau=%.6g y=%.6g: kernel %.12g vs difference %.12g",
                    tau, y, vyy, fd,
                )
        return vyy

    def boundary_limits(self, tau: float) -> Tuple[float, float]:
        """(v(τ,0), v_y(τ,0)) = (V(0), e^{−rτ}V'(0)); infinities propagate."""
        if tau < 0:
            raise DomainError("time-to-horizon must be >= 0")
        return self.dual.V0, math.exp(-self.market.r * tau) * self.dual.Vprime0

    def saturation_wealth(self, tau: float) -> float:
        """−v_y(τ, 0): the smallest wealth in the saturated region (∞ if none)."""
        return -self.boundary_limits(tau)[1]

    # ------------------------------------------------------------------
    # Monte Carlo oracle
    # ------------------------------------------------------------------
    def mc_value_oracle(self, tau: float, y: float, n_samples: int, seed: int) -> Tuple[float, float]:
        """Sample mean and standard error of V(yỸ).

        Samples are produced in fixed-size chunks, each from its own Philox
        stream keyed by (seed, chunk index).
        """
        if n_samples < 10_000:
            raise ParameterError("mc oracle needs at least 10^4 samples")
        self._check(tau, y, allow_terminal=False)
        m, s = self.log_moments(tau)
        chunk = settings.MC_CHUNK_SIZE
        parts = []
        for index, start in enumerate(range(0, n_samples, chunk)):
            size = min(chunk, n_samples - start)
            rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(index,))))
            z = rng.standard_normal(size)
            parts.append(np.asarray(self.dual.eval(y * np.exp(m - s * z)), dtype=float))
        samples = np.concatenate(parts)
        return float(samples.mean()), float(samples.std(ddof=1) / math.sqrt(n_samples))


# ----------------------------------------------------------------------
# Functional API
# ----------------------------------------------------------------------
def build_surface(
    market: MarketParams,
    utility,
    quad: Optional[QuadratureConfig] = None,
    cls: Optional[AsymptoticClass] = None,
) -> DualSurface:
    """Surface for a UtilitySpec or DualUtilitySpec; constants use the classified q when known."""
    dual = utility.dual() if isinstance(utility, UtilitySpec) else utility
    q = dual.growth_q
    if cls is not None and cls.kind is not AsymptoticKind.NONE and cls.q is not None and cls.q < 1:
        q = cls.q
    return DualSurface(
        market=market,
        dual=dual,
        quad=quad or QuadratureConfig.from_settings(),
        constants=derived_constants(market, q),
    )


def eval_v(surface: DualSurface, tau: float, y: float) -> float:
    return surface.eval_v(tau, y)


def eval_vy(surface: DualSurface, tau: float, y: float, route: str = "B") -> float:
    return surface.eval_vy(tau, y, route)


def eval_vyy(surface: DualSurface, tau: float, y: float, route: str = "B", cross_check: bool = False) -> float:
    return surface.eval_vyy(tau, y, route, cross_check)


def boundary_limits(surface: DualSurface, tau: float) -> Tuple[float, float]:
    return surface.boundary_limits(tau)


def mc_value_oracle(surface: DualSurface, tau: float, y: float, n_samples: int, seed: int) -> Tuple[float, float]:
    return surface.mc_value_oracle(tau, y, n_samples, seed)
