"""
Monte Carlo simulation of controlled wealth.

    dX = X(r dt + bπ dt + σπ dW),   b = μ − r

is stepped in ln X with the feedback fraction π evaluated at the start of
each step. Step k draws its normals from a Philox stream keyed by
(seed, k); draw i of that stream belongs to path i, so a batch is
reproducible bit-for-bit from (seed, n_paths, n_steps, policy).
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np
import pandas as pd
from scipy import stats

from config.settings import settings
from core.errors import DomainError, ParameterError
from core.normal import norm_cdf, norm_pdf, norm_ppf
from market.params import MarketParams
from utility.specs import UtilitySpec

logger = logging.getLogger(__name__)

Policy = Callable[[float, np.ndarray], np.ndarray]

_MIN_STEPS = 100
_MIN_PATHS = 1_000


@dataclass(frozen=True)
class PathBatch:
    seed: int
    n_paths: int
    n_steps: int
    horizon: float
    x0: float
    terminal_wealth: np.ndarray
    terminal_dual: Optional[np.ndarray] = None
    diagnostics: Dict[str, float] = field(default_factory=dict)
    budget: List[Dict[str, float]] = field(default_factory=list)
    paths: Optional[np.ndarray] = None

    def __post_init__(self):
        for name in ("terminal_wealth", "terminal_dual", "paths"):
            arr = getattr(self, name)
            if arr is not None:
                arr.setflags(write=False)

    def path_frame(self) -> pd.DataFrame:
        """Long-format dump with columns path_id, t, X."""
        if self.paths is None:
            raise ParameterError("paths were not recorded for this batch")
        n_rec, n_cols = self.paths.shape
        times = np.linspace(0.0, self.horizon, n_cols)
        return pd.DataFrame(
            {
                "path_id": np.repeat(np.arange(n_rec), n_cols),
                "t": np.tile(times, n_rec),
                "X": self.paths.ravel(),
            }
        )


# ----------------------------------------------------------------------
# Shared plumbing
# ----------------------------------------------------------------------
def _validate(x0: float, n_steps: int, n_paths: int, T: float) -> None:
    if not x0 > 0:
        raise DomainError("x0 must be positive")
    if not T > 0:
        raise DomainError("horizon T must be positive")
    if n_steps < _MIN_STEPS:
        raise ParameterError(f"n_steps must be >= {_MIN_STEPS}")
    if n_paths < _MIN_PATHS:
        raise ParameterError(f"n_paths must be >= {_MIN_PATHS}")


def _increments(seed: int, step: int, n_paths: int, dt: float) -> np.ndarray:
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(step,))))
    return rng.standard_normal(n_paths) * math.sqrt(dt)


def _recorded(n_paths: int, record_paths: bool) -> int:
    if not record_paths:
        return 0
    limit = settings.PATH_DUMP_LIMIT
    if n_paths > limit:
        logger.warning("⚠️  path dump limited to the first %d of %d paths", limit, n_paths)
    return min(n_paths, limit)


def _evaluate_policy(policy: Policy, tau: float, x: np.ndarray) -> np.ndarray:
    """Vectorised call, falling back to per-path calls; failures come back as nan."""
    try:
        pi = np.asarray(policy(tau, x), dtype=float)
        if pi.shape == x.shape:
            return pi
    except Exception as e:  # noqa: BLE001 - any policy failure is handled per path
        logger.debug("vectorised policy failed at tau=%.6g: %s", tau, e)
    out = np.empty_like(x)
    for i, xi in enumerate(x):
        try:
            out[i] = float(np.asarray(policy(tau, np.asarray([xi]))).ravel()[0])
        except Exception:  # noqa: BLE001
            out[i] = math.nan
    return out


def _budget_record(t: float, x: np.ndarray, y: np.ndarray, bound: float) -> Dict[str, float]:
    product = x * y
    se = float(product.std(ddof=1) / math.sqrt(product.size))
    return {"t": t, "mean": float(product.mean()), "se": se, "bound": bound}


# ----------------------------------------------------------------------
# Feedback-controlled wealth
# ----------------------------------------------------------------------
def simulate_wealth(
    policy: Policy,
    market: MarketParams,
    T: float,
    x0: float,
    n_steps: int,
    n_paths: int,
    seed: int,
    y0: float = 1.0,
    record_paths: bool = False,
) -> PathBatch:
    _validate(x0, n_steps, n_paths, T)
    dt = T / n_steps
    r, sigma, theta = market.r, market.sigma, market.theta
    excess = market.excess_return
    cap = settings.POLICY_CLAMP / sigma

    log_x = np.full(n_paths, math.log(x0))
    log_y = np.full(n_paths, math.log(y0))
    alive = np.ones(n_paths, dtype=bool)
    aborted = np.zeros(n_paths, dtype=bool)
    exposure = np.zeros(n_paths)
    clamps = 0
    half = n_steps // 2
    budget: List[Dict[str, float]] = []

    n_rec = _recorded(n_paths, record_paths)
    paths = np.empty((n_rec, n_steps + 1)) if n_rec else None
    if paths is not None:
        paths[:, 0] = x0

    for step in range(n_steps):
        tau = T - step * dt
        dw = _increments(seed, step, n_paths, dt)
        live = alive & ~aborted
        pi = np.zeros(n_paths)
        if live.any():
            pi_live = _evaluate_policy(policy, tau, np.exp(log_x[live]))
            failed = ~np.isfinite(pi_live)
            if failed.any():
                idx = np.flatnonzero(live)[failed]
                aborted[idx] = True
                logger.warning("⚠️  policy failed on %d paths at tau=%.6g; paths aborted", failed.sum(), tau)
                pi_live = np.where(failed, 0.0, pi_live)
            over = np.abs(pi_live) > cap
            clamps += int(over.sum())
            pi[live] = np.clip(pi_live, -cap, cap)
        live = alive & ~aborted

        vol = sigma * pi
        log_x[live] += (r + excess * pi[live] - 0.5 * vol[live] ** 2) * dt + vol[live] * dw[live]
        exposure += 0.5 * vol ** 2 * dt
        log_y += -(r + 0.5 * theta ** 2) * dt - theta * dw

        dead = live & ~np.isfinite(log_x)
        if dead.any():
            alive[dead] = False
            log_x[dead] = -math.inf

        if paths is not None:
            paths[:, step + 1] = np.exp(log_x[:n_rec])
        if step + 1 == half:
            budget.append(_budget_record(half * dt, np.exp(log_x), np.exp(log_y), x0 * y0))

    wealth = np.exp(log_x)
    dual = np.exp(log_y)
    budget.append(_budget_record(T, wealth, dual, x0 * y0))
    with np.errstate(over="ignore"):
        exp_moment = float(np.mean(np.exp(exposure)))

    if clamps:
        logger.warning("⚠️  |pi*sigma| clamped at %g on %d path-steps", settings.POLICY_CLAMP, clamps)
    diagnostics = {
        "exp_moment": exp_moment,
        "clamps": float(clamps),
        "aborted": float(aborted.sum()),
        "absorbed": float((~alive).sum()),
    }
    completed = ~aborted
    return PathBatch(
        seed=seed,
        n_paths=n_paths,
        n_steps=n_steps,
        horizon=T,
        x0=x0,
        terminal_wealth=wealth[completed],
        terminal_dual=dual[completed],
        diagnostics=diagnostics,
        budget=budget,
        paths=paths,
    )


def estimate_value(batch: PathBatch, utility: UtilitySpec):
    """(mean, standard error) of U(X_T)."""
    if batch.terminal_wealth.size == 0:
        raise ParameterError("empty path batch")
    values = np.asarray(utility.eval(batch.terminal_wealth), dtype=float)
    if values.size < 2:
        return float(values.mean()), math.nan
    return float(values.mean()), float(values.std(ddof=1) / math.sqrt(values.size))


# ----------------------------------------------------------------------
# Exact optimal path for U(x) = min(x, H)
# ----------------------------------------------------------------------
def capped_wealth_path(
    market: MarketParams,
    H: float,
    T: float,
    x0: float,
    seed: int,
    n_steps: int = 2000,
    n_paths: int = _MIN_PATHS,
    record_paths: bool = False,
) -> PathBatch:
    """X*_t = He^{−r(T−t)}Φ(Z_t), Z_t = (Z₀√T + θt + W_t)/√(T−t).

    Uses the same Brownian increments as ``simulate_wealth`` with the same
    seed, so exact and discretised paths can be compared pathwise.
    """
    if not H > 0:
        raise ParameterError("H must be positive")
    _validate(x0, n_steps, n_paths, T)
    boundary = H * math.exp(-market.r * T)
    if not x0 < boundary:
        raise DomainError(f"x0 must lie below the saturation boundary {boundary:.6g}")
    dt = T / n_steps
    theta = market.theta
    anchor = norm_ppf(x0 / boundary) * math.sqrt(T)

    w = np.zeros(n_paths)
    n_rec = _recorded(n_paths, record_paths)
    paths = np.empty((n_rec, n_steps + 1)) if n_rec else None
    if paths is not None:
        paths[:, 0] = x0
    log_y = np.zeros(n_paths)
    budget: List[Dict[str, float]] = []
    half = n_steps // 2

    for step in range(n_steps):
        dw = _increments(seed, step, n_paths, dt)
        w += dw
        log_y += -(market.r + 0.5 * theta ** 2) * dt - theta * dw
        t = (step + 1) * dt
        drift = anchor + theta * t + w
        if step + 1 == n_steps:
            x = np.where(drift > 0, H, 0.0)
        else:
            x = H * math.exp(-market.r * (T - t)) * norm_cdf(drift / math.sqrt(T - t))
        if paths is not None:
            paths[:, step + 1] = x[:n_rec]
        if step + 1 == half:
            budget.append(_budget_record(t, x, np.exp(log_y), x0))

    budget.append(_budget_record(T, x, np.exp(log_y), x0))
    return PathBatch(
        seed=seed,
        n_paths=n_paths,
        n_steps=n_steps,
        horizon=T,
        x0=x0,
        terminal_wealth=np.asarray(x, dtype=float),
        terminal_dual=np.exp(log_y),
        diagnostics={"ruined": float(np.mean(x == 0.0))},
        budget=budget,
        paths=paths,
    )


# ----------------------------------------------------------------------
# Feedback policies
# ----------------------------------------------------------------------
def zero_feedback() -> Policy:
    def policy(tau: float, x: np.ndarray) -> np.ndarray:
        return np.zeros_like(x)

    return policy


def merton_feedback(market: MarketParams, p: float) -> Policy:
    if not p < 1:
        raise ParameterError("Merton feedback needs p < 1")
    frac = market.theta / ((1.0 - p) * market.sigma)

    def policy(tau: float, x: np.ndarray) -> np.ndarray:
        return np.full_like(x, frac)

    return policy


def capped_feedback(market: MarketParams, H: float) -> Policy:
    """π = He^{−rτ}φ(z₀)/(σ√τ x) with z₀ = Φ⁻¹(xe^{rτ}/H); zero at or above the boundary."""
    if not H > 0:
        raise ParameterError("H must be positive")

    def policy(tau: float, x: np.ndarray) -> np.ndarray:
        boundary = H * math.exp(-market.r * tau)
        ratio = np.clip(x / boundary, 0.0, 1.0)
        interior = (ratio > 0.0) & (ratio < 1.0)
        out = np.zeros_like(x)
        if interior.any():
            z0 = norm_ppf(ratio[interior])
            out[interior] = boundary * norm_pdf(z0) / (market.sigma * math.sqrt(tau) * x[interior])
        return out

    return policy


def settle_terminal(wealth: np.ndarray, H: float, tol: float = 0.01) -> np.ndarray:
    """Snap wealth within tol·H of 0 or of H (or beyond) onto those two values."""
    out = np.asarray(wealth, dtype=float).copy()
    out[out <= tol * H] = 0.0
    out[out >= (1.0 - tol) * H] = H
    return out


def ks_distance(a: np.ndarray, b: np.ndarray) -> float:
    return float(stats.ks_2samp(np.asarray(a), np.asarray(b)).statistic)
