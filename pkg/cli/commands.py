"""
Command orchestration for the batch front-end.

Each handler computes its results, stages the output files in the run
store and returns (ok, summary rows). ``run`` maps the outcome to the
0/1/2 exit-code contract and prints a summary table.
"""

import logging
import math
from enum import Enum
from typing import Callable, Dict, List, Tuple

import numpy as np
import pandas as pd
from rich.console import Console
from rich.table import Table

from cli.config_loader import RunConfig
from closed_forms.examples import (
    capped_dual,
    capped_reference,
    capped_ruin_prob,
    ex4_reference,
    ex5_allocation,
    merton_reference,
    piecewise_reference,
)
from core.errors import ConfigError, TurnpikeError
from market.params import MarketParams
from simulate.wealth import (
    capped_feedback,
    estimate_value,
    merton_feedback,
    simulate_wealth,
    zero_feedback,
)
from solvers.dual import DualSurface, build_surface
from solvers.primal import Region, value_grid, value_u
from storage.run_store import RunStore
from turnpike.bounds import bound_constants, error_bound, identity_error
from turnpike.report import build_report
from utility.asymptotics import AsymptoticClass, classify_asymptotics
from utility.specs import UtilityKind, UtilitySpec

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2

ORACLE_TOL = 1e-7
EX4_ERROR_TOL = 1e-6
_ORACLE_FLOOR = 1e-5
VALIDATE_TAUS = (0.25, 1.0, 4.0, 8.0)
VALIDATE_GRID = tuple(float(v) for v in np.logspace(math.log10(0.05), math.log10(20.0), 7))

Summary = List[Tuple[str, str]]


class Command(str, Enum):
    VALUE = "value"
    ALLOCATE = "allocate"
    TURNPIKE = "turnpike"
    BOUND = "bound"
    VALIDATE = "validate"
    SIMULATE = "simulate"
    CLASSIFY = "classify"


def _surface(config: RunConfig, cls: AsymptoticClass = None) -> DualSurface:
    surface = build_surface(config.market, config.utility, config.quad, cls)
    if config.theta_schedule is not None:
        surface = surface.with_schedule(config.theta_schedule)
    return surface


def _classified(config: RunConfig) -> Tuple[DualSurface, AsymptoticClass]:
    cls = classify_asymptotics(config.utility.dual())
    logger.info("🔎 %s classified as %s", config.utility.kind.value, cls.kind.value)
    return _surface(config, cls), cls


# ----------------------------------------------------------------------
# value / allocate / classify
# ----------------------------------------------------------------------
def _value(config: RunConfig, store: RunStore) -> Tuple[bool, Summary]:
    frame = value_grid(_surface(config), config.grids.tau, config.grids.x)
    store.write_csv("value.csv", frame[["tau", "x", "region", "y", "u", "A", "pi_frac"]])
    saturated = int((frame["region"] == Region.SATURATED.value).sum())
    return True, [("points", str(len(frame))), ("saturated", str(saturated))]


def _allocate(config: RunConfig, store: RunStore) -> Tuple[bool, Summary]:
    surface = _surface(config)
    rows = []
    for tau in config.grids.tau:
        if tau == 0:
            continue
        for x in config.grids.x:
            point = value_u(surface, tau, x)
            rows.append({"tau": tau, "x": x, "region": point.region.value, "A": point.A, "pi_frac": point.pi_frac})
    frame = pd.DataFrame(rows, columns=["tau", "x", "region", "A", "pi_frac"])
    store.write_csv("allocate.csv", frame)
    return True, [("points", str(len(frame))), ("max A", f"{frame['A'].max():.6g}" if len(frame) else "-")]


def _classify(config: RunConfig, store: RunStore) -> Tuple[bool, Summary]:
    cls = classify_asymptotics(config.utility.dual())
    record = {k: v for k, v in cls.to_record().items() if v is not None}
    store.write_json("classify.json", record)
    return True, [(k, str(v)) for k, v in sorted(record.items())]


# ----------------------------------------------------------------------
# turnpike / bound
# ----------------------------------------------------------------------
def _turnpike(config: RunConfig, store: RunStore) -> Tuple[bool, Summary]:
    surface, cls = _classified(config)
    footers = []
    summary: Summary = []
    for index, x in enumerate(config.grids.x):
        report = build_report(surface, cls, x, config.grids.tau, config.fit_window)
        store.write_csv(f"turnpike_{index}.csv", report.to_frame())
        footers.append(report.footer())
        fit = report.fitted_rate
        rate = "-" if fit is None else ("exact" if fit.exact else f"{fit.c_hat:.6g}")
        summary.append((f"x={x:g}", f"rate {rate}, dominance {report.dominance_ok}"))
    flags = [f["dominance_ok"] for f in footers if f["dominance_ok"] is not None]
    dominance = all(flags) if flags else None
    store.write_json("turnpike.json", {"dominance_ok": dominance, "reports": footers, "class": cls.to_record()})
    return dominance is not False, summary


def _bound(config: RunConfig, store: RunStore) -> Tuple[bool, Summary]:
    cls = classify_asymptotics(config.utility.dual())
    constants = bound_constants(config.market, cls)
    rows = [
        {"t": t, "x": x, "bound": error_bound(constants, x, t)}
        for t in config.grids.tau
        if t > constants.t_bar
        for x in config.grids.x
    ]
    store.write_csv("bound.csv", pd.DataFrame(rows, columns=["t", "x", "bound"]))
    record = {
        "q": constants.q, "alpha1": constants.alpha1, "K": constants.K, "t_bar": constants.t_bar,
        "L0": constants.L0, "L1": constants.L1, "L2": constants.L2, "L": constants.L, "rate": constants.rate,
        "D_of_x": {repr(x): constants.D_of_x(x / constants.scale_k) for x in config.grids.x},
    }
    store.write_json("bound.json", record)
    return True, [("t_bar", f"{constants.t_bar:.6g}"), ("rate", f"{constants.rate:.6g}"), ("L", f"{constants.L:.6g}")]


# ----------------------------------------------------------------------
# validate
# ----------------------------------------------------------------------
def _deviation(measured: float, reference: float) -> float:
    return abs(measured - reference) / (abs(reference) + _ORACLE_FLOOR)


class _Suite:
    """Collects max deviations per (family, quantity)."""

    def __init__(self):
        self.records: Dict[Tuple[str, str], Dict[str, float]] = {}

    def add(self, family: str, quantity: str, measured: float, reference: float, tol: float = ORACLE_TOL):
        key = (family, quantity)
        entry = self.records.setdefault(key, {"max_deviation": 0.0, "tolerance": tol, "checks": 0})
        entry["max_deviation"] = max(entry["max_deviation"], _deviation(measured, reference))
        entry["checks"] += 1

    def rows(self) -> List[Dict[str, object]]:
        return [
            {
                "family": family,
                "quantity": quantity,
                "max_deviation": entry["max_deviation"],
                "tolerance": entry["tolerance"],
                "checks": entry["checks"],
                "passed": entry["max_deviation"] <= entry["tolerance"],
            }
            for (family, quantity), entry in sorted(self.records.items())
        ]


def _validate_merton(market: MarketParams, suite: _Suite, p: float = 0.5) -> None:
    surface = build_surface(market, UtilitySpec.power(p))
    for tau in VALIDATE_TAUS:
        for x in VALIDATE_GRID:
            point = value_u(surface, tau, x)
            ref = merton_reference(market, p, tau, x)
            suite.add("power", "pi_frac", point.pi_frac, ref.pi_frac)
            suite.add("power", "u", point.u, ref.u)


def _validate_capped(market: MarketParams, suite: _Suite, H: float = 1.0) -> None:
    surface = build_surface(market, UtilitySpec.capped_linear(H))
    for tau in VALIDATE_TAUS:
        for y in VALIDATE_GRID:
            v_ref, vy_ref = capped_dual(market, H, tau, y)
            suite.add("capped_linear", "v", surface.eval_v(tau, y), v_ref)
            suite.add("capped_linear", "v_y", surface.eval_vy(tau, y), vy_ref)
        for x in VALIDATE_GRID:
            point = value_u(surface, tau, x)
            ref = capped_reference(market, H, tau, x)
            if ref.saturated:
                suite.add("capped_linear", "saturated_region", float(point.region is Region.SATURATED), 1.0)
                suite.add("capped_linear", "saturated_u", point.u, H)
                suite.add("capped_linear", "saturated_A", point.A, 0.0)
                continue
            suite.add("capped_linear", "u", point.u, ref.u)
            suite.add("capped_linear", "A", point.A, ref.A)


def _validate_piecewise(market: MarketParams, suite: _Suite, H: float = 1.0, p: float = 0.5) -> None:
    surface = build_surface(market, UtilitySpec.piecewise_power(H, p))
    for tau in VALIDATE_TAUS:
        for y in VALIDATE_GRID:
            v_ref, vy_ref = piecewise_reference(market, H, p, tau, y)
            v, vy = surface.eval_v(tau, y), surface.eval_vy(tau, y)
            if max(_deviation(v, v_ref), _deviation(vy, vy_ref)) > ORACLE_TOL:
                logger.warning(
                    "⚠️  piecewise closed form disagrees with quadrature at tau=%.6g y=%.6g: v %.12g vs %.12g",
                    tau, y, v_ref, v,
                )
            suite.add("piecewise_power", "v", v, v_ref)
            suite.add("piecewise_power", "v_y", vy, vy_ref)


def _validate_inverse_quartic(market: MarketParams, suite: _Suite) -> None:
    surface = build_surface(market, UtilitySpec.inverse_quartic())
    for t in (0.0, 1.0, 2.0, 4.0, 8.0):
        for x in (0.5, 1.0, 2.0):
            point = value_u(surface, t, x)
            ref = ex4_reference(market, t, x)
            suite.add("inverse_quartic", "u", point.u, ref.u)
            if t > 0:
                suite.add("inverse_quartic", "A", point.A, ref.A)
            err = identity_error(surface, t, point.y, 0.75)
            suite.add("inverse_quartic", "turnpike_error", err, ref.extra["exact_error"], EX4_ERROR_TOL)


def _validate_shifted_exponential(market: MarketParams, suite: _Suite) -> None:
    surface = build_surface(market, UtilitySpec.shifted_exponential())
    for tau in VALIDATE_TAUS:
        for x in VALIDATE_GRID:
            point = value_u(surface, tau, x)
            suite.add("shifted_exponential", "A", point.A, ex5_allocation(market, tau, point.y))


def _validate(config: RunConfig, store: RunStore) -> Tuple[bool, Summary]:
    suite = _Suite()
    for check in (
        _validate_merton,
        _validate_capped,
        _validate_piecewise,
        _validate_inverse_quartic,
        _validate_shifted_exponential,
    ):
        check(config.market, suite)
    rows = suite.rows()
    store.write_json("validate.json", rows)
    ok = all(row["passed"] for row in rows)
    for row in rows:
        if not row["passed"]:
            logger.error(
                "❌ %s.%s: max deviation %.3e exceeds %.1e over %d checks",
                row["family"], row["quantity"], row["max_deviation"], row["tolerance"], row["checks"],
            )
    summary = [
        (f"{row['family']}.{row['quantity']}", f"{row['max_deviation']:.3e} {'✅' if row['passed'] else '❌'}")
        for row in rows
    ]
    return ok, summary


# ----------------------------------------------------------------------
# simulate
# ----------------------------------------------------------------------
def _policy_for(config: RunConfig):
    utility = config.utility
    if config.mc.policy == "zero":
        return zero_feedback(), None
    T, x0 = config.mc.horizon, config.mc.x0
    if utility.kind is UtilityKind.POWER:
        p = utility.params["p"]
        return merton_feedback(config.market, p), merton_reference(config.market, p, T, x0).u
    if utility.kind is UtilityKind.CAPPED_LINEAR:
        H = utility.params["H"]
        return capped_feedback(config.market, H), capped_ruin_prob(config.market, H, T, x0)[1]
    raise ConfigError(f"no optimal feedback policy for {utility.kind.value}; use policy 'zero'", key_path="mc.policy")


def _simulate(config: RunConfig, store: RunStore) -> Tuple[bool, Summary]:
    policy, reference = _policy_for(config)
    mc = config.mc
    batch = simulate_wealth(
        policy, config.market, mc.horizon, mc.x0, mc.n_steps, mc.n_paths, mc.seed, record_paths=mc.dump_paths
    )
    mean, se = estimate_value(batch, config.utility)
    budget_ok = all(b["mean"] <= b["bound"] + 3.0 * b["se"] for b in batch.budget)
    record = {
        "seed": mc.seed,
        "n_paths": mc.n_paths,
        "n_steps": mc.n_steps,
        "value_mean": mean,
        "value_se": se,
        "reference": reference,
        "budget": batch.budget,
        "budget_ok": budget_ok,
        "diagnostics": batch.diagnostics,
    }
    store.write_json("simulate.json", record)
    if batch.paths is not None:
        store.write_csv("paths.csv", batch.path_frame())
    summary = [("E[U(X_T)]", f"{mean:.6g} ± {se:.2g}"), ("budget", "ok" if budget_ok else "violated")]
    if reference is not None:
        summary.append(("reference", f"{reference:.6g}"))
    return budget_ok, summary


HANDLERS: Dict[Command, Callable[[RunConfig, RunStore], Tuple[bool, Summary]]] = {
    Command.VALUE: _value,
    Command.ALLOCATE: _allocate,
    Command.TURNPIKE: _turnpike,
    Command.BOUND: _bound,
    Command.VALIDATE: _validate,
    Command.SIMULATE: _simulate,
    Command.CLASSIFY: _classify,
}


def _print_summary(console: Console, command: Command, ok: bool, rows: Summary) -> None:
    table = Table(title=f"{command.value} {'✅' if ok else '❌'}")
    table.add_column("quantity", style="cyan")
    table.add_column("value", justify="right")
    for name, value in rows:
        table.add_row(name, value)
    console.print(table)


def run(command, config: RunConfig, console: Console = None) -> int:
    try:
        command = Command(command)
    except ValueError:
        logger.error("❌ unknown command '%s'", command)
        return EXIT_CONFIG
    console = console or Console()
    store = RunStore(config.output_dir)
    store.begin()
    try:
        ok, rows = HANDLERS[command](config, store)
        if ok:
            store.commit(RunStore.run_id(config.record(), command.value), command.value)
        else:
            store.abort()
    except ConfigError as e:
        store.abort()
        logger.error("❌ %s: configuration error: %s", command.value, e)
        return EXIT_CONFIG
    except TurnpikeError as e:
        store.abort()
        logger.error("❌ %s failed: %s", command.value, e)
        return EXIT_FAILED
    except Exception:
        store.abort()
        raise

    _print_summary(console, command, ok, rows)
    if ok:
        logger.info("✅ %s finished; outputs in %s", command.value, config.output_dir)
        return EXIT_OK
    logger.warning("⚠️  %s finished with failed checks; no outputs kept", command.value)
    return EXIT_FAILED
