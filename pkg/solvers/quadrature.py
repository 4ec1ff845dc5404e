"""
Gauss–Legendre expectations against the standard normal density.

The standardised variable z ranges over [−η, η]; known kink images split
the range into panels and node counts double until two successive rules
agree to rel_tol of the integrand's absolute mass.
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Mapping, Sequence, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss

from config.settings import settings
from core.errors import ParameterError, QuadratureError
from core.normal import norm_pdf


@dataclass(frozen=True)
class QuadratureConfig:
    node_count: int = 256
    eta_halfwidth: float = 12.0
    rel_tol: float = 1e-10
    max_doublings: int = 5

    def __post_init__(self):
        if self.node_count < 64 or self.node_count % 2:
            raise ParameterError("node_count must be an even integer >= 64")
        if self.eta_halfwidth < 8:
            raise ParameterError("eta_halfwidth must be >= 8")
        if not self.rel_tol > 0:
            raise ParameterError("rel_tol must be positive")

    @classmethod
    def from_settings(cls) -> "QuadratureConfig":
        return cls(
            node_count=settings.QUAD_NODE_COUNT,
            eta_halfwidth=settings.QUAD_ETA_HALFWIDTH,
            rel_tol=settings.QUAD_REL_TOL,
            max_doublings=settings.QUAD_MAX_DOUBLINGS,
        )

    @classmethod
    def from_config(cls, block: Mapping) -> "QuadratureConfig":
        base = cls.from_settings()
        return cls(
            node_count=int(block.get("node_count", base.node_count)),
            eta_halfwidth=float(block.get("eta_halfwidth", base.eta_halfwidth)),
            rel_tol=float(block.get("rel_tol", base.rel_tol)),
            max_doublings=int(block.get("max_doublings", base.max_doublings)),
        )


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    nodes_per_panel: int
    eta: float
    panels: int


@lru_cache(maxsize=16)
def _legendre(n: int) -> Tuple[np.ndarray, np.ndarray]:
    nodes, weights = leggauss(n)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def _panel_sum(
    integrand: Callable[[np.ndarray], np.ndarray], edges: Sequence[float], n: int
) -> Tuple[float, float]:
    nodes, weights = _legendre(n)
    total, mass = 0.0, 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        half, mid = 0.5 * (hi - lo), 0.5 * (hi + lo)
        z = mid + half * nodes
        w = half * weights * norm_pdf(z)
        with np.errstate(invalid="ignore", over="ignore"):
            terms = np.where(w > 0, integrand(z) * w, 0.0)
        total += float(np.sum(terms))
        mass += float(np.sum(np.abs(terms)))
    return total, mass


def gaussian_expectation(
    integrand: Callable[[np.ndarray], np.ndarray],
    eta: float,
    config: QuadratureConfig,
    breakpoints: Sequence[float] = (),
) -> QuadratureResult:
    """∫_{−η}^{η} f(z) φ(z) dz with panel edges at the given breakpoints."""
    inner = sorted(b for b in breakpoints if -eta < b < eta)
    edges = [-eta] + inner + [eta]

    n = config.node_count
    previous, _ = _panel_sum(integrand, edges, n)
    for _ in range(config.max_doublings):
        n *= 2
        current, mass = _panel_sum(integrand, edges, n)
        if not np.isfinite(current):
            break
        if abs(current - previous) <= config.rel_tol * mass or mass == 0.0:
            return QuadratureResult(value=current, nodes_per_panel=n, eta=eta, panels=len(edges) - 1)
        previous = current
    raise QuadratureError(
        f"quadrature did not settle to rel_tol={config.rel_tol:g} with {n} nodes per panel"
    )
