"""
Turnpike error and its explicit exponential bound.

The distance between the optimal amount A(τ,x) and the Merton amount
θx/(σ(1−p)) is measured through the dual identity

    |A − θx/(σ(1−p))| = (θ/σ)·|y·v_yy + (1−q)·v_y|,   y = u_x(τ,x),

and bounded by D(x)·e^{−rα₁τ/(1−q)} once τ exceeds t̄ = 1/(a²α₁²).
"""

import math
from dataclasses import dataclass

from core.errors import DomainError, PreconditionError
from market.params import MarketParams, derived_constants
from solvers.dual import DualSurface
from solvers.primal import invert_marginal
from utility.asymptotics import AsymptoticClass, AsymptoticKind


def merton_allocation(market: MarketParams, p: float, x: float) -> float:
    if not p < 1:
        raise DomainError("Merton allocation needs p < 1")
    if not x > 0:
        raise DomainError("Merton allocation needs x > 0")
    return market.theta * x / (market.sigma * (1.0 - p))


def merton_q(p: float) -> float:
    return p / (p - 1.0)


def identity_error(surface: DualSurface, tau: float, y: float, p: float) -> float:
    """(θ/σ)|y v_yy + (1−q) v_y| at a given dual state."""
    q = merton_q(p)
    if tau == 0:
        # v(0, ·) = V, with V'' from a central difference of the closed-form V'
        dual = surface.dual
        if not dual.has_slope:
            raise DomainError("terminal turnpike error needs a closed-form V'")
        h = 1e-5 * y
        vy = float(dual.slope(y))
        vyy = (float(dual.slope(y + h)) - float(dual.slope(y - h))) / (2.0 * h)
    else:
        vy = surface.eval_vy(tau, y)
        vyy = surface.eval_vyy(tau, y)
    market = surface.market
    return market.theta / market.sigma * abs(y * vyy + (1.0 - q) * vy)


def turnpike_error(surface: DualSurface, tau: float, x: float, p: float) -> float:
    if not tau > 0:
        raise DomainError("turnpike error needs tau > 0")
    y = invert_marginal(surface, tau, x)
    return identity_error(surface, tau, y, p)


@dataclass(frozen=True)
class BoundConstants:
    q: float
    alpha1: float
    K: float
    scale_k: float
    r: float
    theta: float
    sigma: float
    alpha: float
    a: float
    beta: float
    lam: float
    t_bar: float
    L0: float
    L1: float
    L2: float
    L: float
    rate: float

    # ------------------------------------------------------------------
    # Bound ingredients as functions of t
    # ------------------------------------------------------------------
    def L0_at(self, t: float) -> float:
        a2 = self.a * self.a
        return math.exp(self.alpha ** 2 * a2 * t) + math.exp((self.alpha - self.q) ** 2 * a2 * t)

    def L1_at(self, t: float) -> float:
        a2 = self.a * self.a
        return (
            math.exp((self.alpha - self.q - self.alpha1) ** 2 * a2 * t)
            + math.exp(4.0 + self.alpha ** 2 * a2 * t)
            + 2.0 * math.exp(4.0 - 2.0 * (self.alpha - self.q) * self.a * math.sqrt(t))
        )

    def L2_at(self, t: float) -> float:
        return (self.alpha1 + abs(self.q) + 2.0 / (self.a * math.sqrt(t))) * self.L1_at(t)

    # ------------------------------------------------------------------
    # Wealth-dependent constants
    # ------------------------------------------------------------------
    def C_of_x(self, x: float) -> float:
        ratio = (1.0 - self.q) / self.alpha1
        tail = 0.0 if self.L == 0 else (2.0 * self.L) ** ratio * math.exp(self.lam * (1.0 + ratio) * self.t_bar)
        return 2.0 * (self.L + x) + math.exp(self.lam * self.t_bar) + tail

    def D_of_x(self, x: float) -> float:
        if self.L == 0:
            return 0.0
        exponent = (self.alpha1 + self.q - 1.0) / (self.q - 1.0)
        inner = (self.C_of_x(x) * math.exp(-self.lam * self.t_bar) + 1.0) ** exponent
        first = 2.0 * self.L * inner * math.exp(self.r * self.alpha1 * self.t_bar / (1.0 - self.q))
        return self.theta / self.sigma * (first + self.L * math.exp(self.r * self.t_bar))


def bound_constants(market: MarketParams, cls: AsymptoticClass) -> BoundConstants:
    if cls.kind is not AsymptoticKind.POWER_Q or not cls.has_rate:
        raise PreconditionError(f"bound constants need a power_q class with rate constants, got {cls.kind.value}")
    q, alpha1, K = cls.q, cls.rate_alpha1, cls.rate_K
    if not 0 < alpha1 <= 1.0 - q:
        raise PreconditionError(f"need 0 < alpha1 <= 1 - q, got alpha1={alpha1}, q={q}")

    dc = derived_constants(market, q)
    t_bar = 1.0 / (dc.a ** 2 * alpha1 ** 2)
    partial = BoundConstants(
        q=q, alpha1=alpha1, K=K, scale_k=cls.scale_k or 1.0,
        r=market.r, theta=market.theta, sigma=market.sigma,
        alpha=dc.alpha, a=dc.a, beta=dc.beta, lam=dc.lam,
        t_bar=t_bar, L0=0.0, L1=0.0, L2=0.0, L=0.0,
        rate=market.r * alpha1 / (1.0 - q),
    )
    l0, l1, l2 = partial.L0_at(t_bar), partial.L1_at(t_bar), partial.L2_at(t_bar)
    e_lam, e_beta = math.exp(dc.lam * t_bar), math.exp(dc.beta * t_bar)
    big_l = K * max(
        2.0 * e_lam * l1,
        2.0 * e_lam * l2,
        e_beta * l0 + e_lam,
        (2.0 + 2.0 * abs(q) + 1.0 / (dc.a * math.sqrt(math.pi * t_bar))) * e_beta * l0,
    )
    return BoundConstants(**{**partial.__dict__, "L0": l0, "L1": l1, "L2": l2, "L": big_l})


def error_bound(constants: BoundConstants, x: float, t: float) -> float:
    """k·D(x/k)·e^{−rate·t}; k rescales a dual normalised to V(y)/y^q → −1/q."""
    if not t > constants.t_bar:
        raise PreconditionError(f"bound holds for t > t_bar = {constants.t_bar:.6g}, got t={t}")
    k = constants.scale_k
    return k * constants.D_of_x(x / k) * math.exp(-constants.rate * t)
