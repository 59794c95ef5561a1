"""Run plans, bound reports, and sweeps.

A run executes the requested bounds per scenario with per-bound error
isolation, attaches ordering checks and oracle comparisons, and serializes
to JSON (nested report) and CSV (flat table).  Output is deterministic for a
fixed config and backend; wall-clock timings are only included on request
because they would break byte-identical reports.
"""

from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .bounds_sdp import bh_lambda_bound, bh_thetadep_bound, bnh_bound
from .closed_form import (bld_bound, bld_max_over_lambda, direct_bound,
                          personick_matrix_bound)
from .errors import ToolkitError
from .measurement import (classical_optimal_risk, classical_view_of_commuting_model,
                          pairwise_commuting)
from .models import Scenario, compute_averages, depolarize_scenario
from .sdp import DEFAULT_TOLERANCE, SolverBackend, get_backend

ALL_BOUNDS = ("direct", "bld", "bld_max", "bh_lambda", "bh_thetadep", "bnh",
              "personick_matrix")
REPORT_SCHEMA = "qbrisk-report/1"


@dataclass(frozen=True)
class RunPlan:
    scenarios: tuple[Scenario, ...]
    bounds: tuple[str, ...] = ALL_BOUNDS
    lambda_grid: tuple[float, ...] = (-1.0, -0.5, 0.0, 0.5, 1.0)
    tolerance: float = DEFAULT_TOLERANCE
    backend_name: str = "clarabel"
    sweep_axis: str | None = None  # "lambda" | "prior_width" | "nodes"
    sweep_values: tuple[float, ...] = ()
    include_timings: bool = False
    config_digest: str | None = None
    # opt-in state preprocessing for rank-deficient scenarios; recorded verbatim
    depolarize: float | None = None

    def __post_init__(self):
        unknown = set(self.bounds) - set(ALL_BOUNDS)
        if unknown:
            raise ToolkitError(f"unknown bounds requested: {sorted(unknown)}")


def _entry(name: str, value: float | None, lam: float | None = None,
           status: str = "ok", error: str | None = None,
           elapsed: float | None = None) -> dict:
    entry = {"name": name, "lambda": lam, "value": value, "status": status}
    if error is not None:
        entry["error"] = error
    if elapsed is not None:
        entry["time_s"] = round(elapsed, 6)
    return entry


def _run_bound(entries: list[dict], plan: RunPlan, name: str, lam, fn) -> None:
    start = time.perf_counter()
    try:
        value = fn()
    except ToolkitError as exc:
        entries.append(_entry(name, None, lam, status="error",
                              error=f"{type(exc).__name__}: {exc}"))
        return
    elapsed = time.perf_counter() - start if plan.include_timings else None
    if isinstance(value, dict):
        entries.append(_entry(name, value["value"], value.get("lambda", lam),
                              elapsed=elapsed))
    else:
        entries.append(_entry(name, value, lam, elapsed=elapsed))


def _scenario_report(sc: Scenario, plan: RunPlan, backend: SolverBackend) -> dict:
    entries: list[dict] = []
    avg = compute_averages(sc.model, sc.prior, sc.weight)

    if "direct" in plan.bounds:
        _run_bound(entries, plan, "direct", None, lambda: direct_bound(avg).value)
    if "bld" in plan.bounds:
        for lam in plan.lambda_grid:
            _run_bound(entries, plan, "bld", lam,
                       lambda lam=lam: bld_bound(avg, lam, sc.weight).value)
    if "bld_max" in plan.bounds:
        def _bld_max():
            bound, lam_star = bld_max_over_lambda(avg, sc.weight)
            return {"value": bound.value, "lambda": lam_star}
        _run_bound(entries, plan, "bld_max", None, _bld_max)
    if "bh_lambda" in plan.bounds:
        for lam in plan.lambda_grid:
            _run_bound(entries, plan, "bh_lambda", lam,
                       lambda lam=lam: bh_lambda_bound(avg, lam, sc.weight, backend,
                                                       plan.tolerance).value)
    if "bh_thetadep" in plan.bounds:
        _run_bound(entries, plan, "bh_thetadep", None,
                   lambda: bh_thetadep_bound(avg, sc.model, sc.prior, sc.weight,
                                             backend, plan.tolerance).value)
    if "bnh" in plan.bounds:
        _run_bound(entries, plan, "bnh", None,
                   lambda: bnh_bound(avg, backend, plan.tolerance).value)
    if "personick_matrix" in plan.bounds:
        start = time.perf_counter()
        try:
            mat = personick_matrix_bound(avg)
            entries.append({"name": "personick_matrix", "lambda": None,
                            "value": float(np.trace(mat)), "status": "ok",
                            "matrix": [[float(v) for v in row] for row in mat]})
            if plan.include_timings:
                entries[-1]["time_s"] = round(time.perf_counter() - start, 6)
        except ToolkitError as exc:
            entries.append(_entry("personick_matrix", None, status="error",
                                  error=f"{type(exc).__name__}: {exc}"))

    report = {
        "name": sc.name,
        "description": sc.description,
        "n_params": sc.model.n_params,
        "dim": sc.model.dim,
        "n_nodes": sc.prior.n_nodes,
        "weight_kind": "constant" if sc.weight.is_constant else "varying",
        "bounds": entries,
        "ordering_checks": _ordering_checks(entries),
        "oracle_comparisons": _oracle_comparisons(sc, entries),
    }
    return report


def _value_of(entries: list[dict], name: str, lam=None):
    for e in entries:
        if e["name"] == name and e.get("lambda") == lam and e["status"] == "ok":
            return e["value"]
    return None


def _ordering_checks(entries: list[dict], tol: float = 1e-5) -> list[dict]:
    checks = []
    bnh = _value_of(entries, "bnh")
    direct = _value_of(entries, "direct")
    thetadep = _value_of(entries, "bh_thetadep")
    lams = sorted({e["lambda"] for e in entries if e["name"] == "bh_lambda"
                   and e["status"] == "ok"})

    def add(name, lhs, rhs):
        if lhs is None or rhs is None:
            return
        margin = lhs - rhs
        checks.append({"name": name, "passed": bool(margin >= -tol),
                       "margin": float(margin)})

    for lam in lams:
        bh = _value_of(entries, "bh_lambda", lam)
        add(f"bnh>=bh_lambda({lam:g})", bnh, bh)
        add(f"bh_lambda({lam:g})>=bld({lam:g})", bh, _value_of(entries, "bld", lam))
        add(f"bh_lambda({lam:g})>=direct", bh, direct)
    add("bnh>=bh_thetadep", bnh, thetadep)
    add("bnh>=direct", bnh, direct)
    return checks


def _oracle_comparisons(sc: Scenario, entries: list[dict]) -> list[dict]:
    out = []
    states = [sc.model.state(t) for t in sc.prior.thetas]
    if pairwise_commuting(states):
        view = classical_view_of_commuting_model(sc.model, sc.prior)
        classical, _ = classical_optimal_risk(view, sc.prior, sc.weight)
        for name, lam in (("direct", None), ("bnh", None)):
            value = _value_of(entries, name, lam)
            if value is not None:
                out.append({"name": f"classical_vs_{name}", "classical": classical,
                            "bound": value, "gap": float(abs(classical - value))})
    return out


def run(plan: RunPlan) -> dict:
    """Execute the plan and return the nested report document."""
    backend = get_backend(plan.backend_name)
    report = {
        "schema": REPORT_SCHEMA,
        "toolkit_version": __version__,
        "backend": backend.name,
        "tolerance": plan.tolerance,
        "lambda_grid": list(plan.lambda_grid),
        "config_hash": plan.config_digest,
        "scenarios": [_scenario_report(sc, plan, backend) for sc in plan.scenarios],
    }
    return report


def sweep(plan: RunPlan) -> tuple[dict, list[dict]]:
    """Run the plan once per sweep value; returns (nested report, flat rows).

    Axes: "lambda" replaces the lambda grid by a single value per step;
    "prior_width" and "nodes" rebuild each scenario (only scenarios that
    expose a rebuild hook are allowed).
    """
    if plan.sweep_axis not in ("lambda", "prior_width", "nodes"):
        raise ToolkitError(f"unknown sweep axis {plan.sweep_axis!r}")
    if len(plan.sweep_values) < 2:
        raise ToolkitError("sweep requires at least 2 axis values")

    steps = []
    rows: list[dict] = []
    for value in plan.sweep_values:
        if plan.sweep_axis == "lambda":
            step_plan = RunPlan(plan.scenarios, plan.bounds, (float(value),),
                                plan.tolerance, plan.backend_name,
                                include_timings=plan.include_timings,
                                config_digest=plan.config_digest)
        else:
            kwargs = ({"width": float(value)} if plan.sweep_axis == "prior_width"
                      else {"points": int(value)})
            rebuilt = []
            for sc in plan.scenarios:
                if sc.rebuild is None:
                    raise ToolkitError(
                        f"scenario {sc.name!r} cannot be rebuilt for a "
                        f"{plan.sweep_axis} sweep")
                rebuilt.append(sc.rebuild(**kwargs))
            step_plan = RunPlan(tuple(rebuilt), plan.bounds, plan.lambda_grid,
                                plan.tolerance, plan.backend_name,
                                include_timings=plan.include_timings,
                                config_digest=plan.config_digest)
        step_report = run(step_plan)
        steps.append({"axis_value": float(value), "report": step_report})
        for sc_rep in step_report["scenarios"]:
            for e in sc_rep["bounds"]:
                rows.append({
                    "axis": plan.sweep_axis, "axis_value": float(value),
                    "scenario": sc_rep["name"], "bound": e["name"],
                    "lambda": e["lambda"], "value": e["value"], "status": e["status"],
                })

    report = {
        "schema": REPORT_SCHEMA, "toolkit_version": __version__,
        "sweep_axis": plan.sweep_axis, "config_hash": plan.config_digest,
        "steps": steps,
    }
    return report, rows


def flat_rows(report: dict) -> list[dict]:
    rows = []
    for sc_rep in report["scenarios"]:
        for e in sc_rep["bounds"]:
            rows.append({"axis": "", "axis_value": "", "scenario": sc_rep["name"],
                         "bound": e["name"], "lambda": e["lambda"],
                         "value": e["value"], "status": e["status"]})
    return rows


def _fmt_float(v) -> str:
    return "" if v is None or v == "" else f"{float(v):.17g}"


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=False) + "\n"


def rows_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["axis", "axis_value", "scenario", "bound", "lambda", "value", "status"])
    for r in rows:
        writer.writerow([r["axis"], _fmt_float(r["axis_value"]), r["scenario"],
                         r["bound"], _fmt_float(r["lambda"]), _fmt_float(r["value"]),
                         r["status"]])
    return buf.getvalue()
