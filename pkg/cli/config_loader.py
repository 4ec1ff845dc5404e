"""
Run configuration: a JSON file with market, utility, quadrature, grid and
Monte Carlo blocks. Everything is validated before any computation starts.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple

from config.settings import settings
from core.errors import ConfigError, TurnpikeError
from market.params import ConeKind, ConeSpec, MarketParams, ThetaSchedule, project_theta_hat
from solvers.quadrature import QuadratureConfig
from utility.specs import UtilitySpec

_ALLOWED: Dict[str, Tuple[str, ...]] = {
    "": ("market", "utility", "quad", "grids", "mc", "output_dir", "turnpike"),
    "market": ("r", "mu", "sigma", "cone", "theta_schedule"),
    "market.theta_schedule": ("breaks", "values"),
    "utility": ("kind", "params"),
    "quad": ("node_count", "eta_halfwidth", "rel_tol", "max_doublings"),
    "grids": ("tau", "x", "y"),
    "mc": ("n_paths", "n_steps", "seed", "horizon", "x0", "policy", "dump_paths"),
    "turnpike": ("window",),
}
_REQUIRED = ("market", "utility")
_POLICIES = ("optimal", "zero")


@dataclass(frozen=True)
class Grids:
    tau: Tuple[float, ...] = (0.25, 1.0, 4.0, 8.0)
    x: Tuple[float, ...] = (0.5, 1.0, 2.0)
    y: Tuple[float, ...] = (0.1, 0.5, 1.0, 2.0, 10.0)


@dataclass(frozen=True)
class McConfig:
    n_paths: int = 10_000
    n_steps: int = 200
    seed: int = 0
    horizon: float = 1.0
    x0: float = 1.0
    policy: str = "optimal"
    dump_paths: bool = False


@dataclass(frozen=True)
class RunConfig:
    market: MarketParams
    utility: UtilitySpec
    quad: QuadratureConfig
    grids: Grids = field(default_factory=Grids)
    mc: McConfig = field(default_factory=McConfig)
    output_dir: Path = field(default_factory=lambda: settings.OUTPUT_DIR)
    theta_schedule: Optional[ThetaSchedule] = None
    fit_window: Optional[Tuple[float, float]] = None
    raw: Mapping[str, Any] = field(default_factory=dict, repr=False, compare=False)

    def record(self) -> Dict[str, Any]:
        """Canonical description used for the deterministic run id."""
        return {
            "market": {"r": self.market.r, "mu": self.market.mu, "sigma": self.market.sigma},
            "utility": {"kind": self.utility.kind.value, "params": dict(self.utility.params)},
            "quad": {
                "node_count": self.quad.node_count,
                "eta_halfwidth": self.quad.eta_halfwidth,
                "rel_tol": self.quad.rel_tol,
                "max_doublings": self.quad.max_doublings,
            },
            "grids": {"tau": list(self.grids.tau), "x": list(self.grids.x), "y": list(self.grids.y)},
            "mc": self.mc.__dict__.copy(),
            "theta_schedule": None if self.theta_schedule is None else {
                "breaks": list(self.theta_schedule.breaks), "values": list(self.theta_schedule.values),
            },
            "fit_window": None if self.fit_window is None else list(self.fit_window),
        }


# ----------------------------------------------------------------------
# Validation helpers
# ----------------------------------------------------------------------
def _check_keys(block: Any, path: str) -> Mapping[str, Any]:
    if not isinstance(block, Mapping):
        raise ConfigError("expected an object", key_path=path or "<root>")
    allowed = _ALLOWED[path]
    for key in block:
        if key not in allowed:
            raise ConfigError(f"unknown key '{key}'", key_path=f"{path}.{key}" if path else key)
    return block


def _grid(values: Any, path: str) -> Tuple[float, ...]:
    if not isinstance(values, list) or not values:
        raise ConfigError("grid must be a non-empty list of numbers", key_path=path)
    try:
        grid = tuple(float(v) for v in values)
    except (TypeError, ValueError):
        raise ConfigError("grid must be a non-empty list of numbers", key_path=path) from None
    if any(v < 0 for v in grid):
        raise ConfigError("grid values must be non-negative", key_path=path)
    return grid


def _number(block: Mapping, key: str, path: str) -> float:
    if key not in block:
        raise ConfigError(f"missing key '{key}'", key_path=f"{path}.{key}")
    value = block[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError("expected a number", key_path=f"{path}.{key}")
    return float(value)


def _wrap(path: str, build):
    try:
        return build()
    except ConfigError:
        raise
    except (TurnpikeError, ValueError, TypeError) as e:
        raise ConfigError(str(e), key_path=path) from e


# ----------------------------------------------------------------------
# Public API
# ----------------------------------------------------------------------
def load_config(data: Mapping[str, Any]) -> RunConfig:
    root = _check_keys(data, "")
    for key in _REQUIRED:
        if key not in root:
            raise ConfigError(f"missing block '{key}'", key_path=key)

    m = _check_keys(root["market"], "market")
    market = _wrap(
        "market",
        lambda: MarketParams(r=_number(m, "r", "market"), mu=_number(m, "mu", "market"), sigma=_number(m, "sigma", "market")),
    )
    if "cone" in m:
        theta_hat, _ = _wrap(
            "market.cone",
            lambda: project_theta_hat(
                [market.theta], ConeSpec(ConeKind.parse(str(m["cone"])), (market.excess_return,))
            ),
        )
        market = MarketParams.from_projection(market.r, market.sigma, theta_hat)
    schedule = None
    if "theta_schedule" in m:
        s = _check_keys(m["theta_schedule"], "market.theta_schedule")
        schedule = _wrap(
            "market.theta_schedule",
            lambda: ThetaSchedule(tuple(float(b) for b in s["breaks"]), tuple(float(v) for v in s["values"])),
        )

    u = _check_keys(root["utility"], "utility")
    utility = _wrap("utility", lambda: UtilitySpec.from_config(u))
    quad = _wrap("quad", lambda: QuadratureConfig.from_config(_check_keys(root.get("quad", {}), "quad")))

    g = _check_keys(root.get("grids", {}), "grids")
    defaults = Grids()
    grids = Grids(
        tau=_grid(g["tau"], "grids.tau") if "tau" in g else defaults.tau,
        x=_grid(g["x"], "grids.x") if "x" in g else defaults.x,
        y=_grid(g["y"], "grids.y") if "y" in g else defaults.y,
    )

    mc_block = _check_keys(root.get("mc", {}), "mc")
    mc = _wrap("mc", lambda: _mc(mc_block))

    window = None
    if "turnpike" in root:
        t = _check_keys(root["turnpike"], "turnpike")
        if "window" in t:
            w = t["window"]
            if not (isinstance(w, list) and len(w) == 2 and w[0] < w[1]):
                raise ConfigError("window must be [t_min, t_max] with t_min < t_max", key_path="turnpike.window")
            window = (float(w[0]), float(w[1]))

    output_dir = Path(root["output_dir"]) if "output_dir" in root else settings.OUTPUT_DIR
    return RunConfig(
        market=market,
        utility=utility,
        quad=quad,
        grids=grids,
        mc=mc,
        output_dir=output_dir,
        theta_schedule=schedule,
        fit_window=window,
        raw=dict(root),
    )


def _mc(block: Mapping[str, Any]) -> McConfig:
    base = McConfig()
    policy = str(block.get("policy", base.policy))
    if policy not in _POLICIES:
        raise ConfigError(f"policy must be one of {', '.join(_POLICIES)}", key_path="mc.policy")
    mc = McConfig(
        n_paths=int(block.get("n_paths", base.n_paths)),
        n_steps=int(block.get("n_steps", base.n_steps)),
        seed=int(block.get("seed", base.seed)),
        horizon=float(block.get("horizon", base.horizon)),
        x0=float(block.get("x0", base.x0)),
        policy=policy,
        dump_paths=bool(block.get("dump_paths", base.dump_paths)),
    )
    if mc.seed < 0:
        raise ConfigError("seed must be a non-negative integer", key_path="mc.seed")
    return mc


def parse_config(file_path) -> RunConfig:
    path = Path(file_path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config: {e}") from e
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"malformed JSON: {e.msg}", line=e.lineno, column=e.colno) from e
    return load_config(data)
