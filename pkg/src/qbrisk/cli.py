"""Command-line front end.

Subcommands: run (bounds on scenarios), sweep (bounds along an axis),
catalog (list built-in scenarios), check (invariant suite on the catalog).
The QBRISK_BACKEND environment variable overrides backend selection only.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from .checks import run_all_checks
from .config import load_scenario
from .errors import ToolkitError
from .models import catalog, get_scenario
from .report import ALL_BOUNDS, RunPlan, flat_rows, report_json, rows_csv, run, sweep
from .sdp import available_backends


def _backend_name(args) -> str:
    return os.environ.get("QBRISK_BACKEND") or args.backend


def _gather_scenarios(args) -> tuple[list, str | None]:
    scenarios, digest = [], None
    for name in args.scenario or []:
        scenarios.append(get_scenario(name))
    for path in args.config or []:
        sc, digest = load_scenario(path)
        scenarios.append(sc)
    if not scenarios:
        raise ToolkitError("no scenarios selected; use --scenario and/or --config")
    return scenarios, digest


def _lambda_grid(count: int) -> tuple[float, ...]:
    if count < 2:
        return (0.0,)
    return tuple(float(v) for v in np.linspace(-1.0, 1.0, count))


def _write_outputs(out_dir: str | None, stem: str, json_text: str, csv_text: str) -> None:
    if out_dir is None:
        sys.stdout.write(json_text)
        return
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / f"{stem}.json").write_text(json_text)
    (out / f"{stem}.csv").write_text(csv_text)
    print(f"wrote {out / (stem + '.json')} and {out / (stem + '.csv')}")


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--scenario", action="append", metavar="NAME",
                        help="catalog scenario name (repeatable)")
    parser.add_argument("--config", action="append", metavar="PATH",
                        help="scenario config JSON file (repeatable)")
    parser.add_argument("--out", metavar="DIR", default=None,
                        help="output directory (default: JSON to stdout)")
    parser.add_argument("--bounds", default=",".join(ALL_BOUNDS),
                        help=f"comma-separated subset of {ALL_BOUNDS}")
    parser.add_argument("--lambda-grid", type=int, default=5, metavar="N",
                        help="number of uniform lambda grid points on [-1, 1]")
    parser.add_argument("--tol", type=float, default=1e-8, help="SDP solver tolerance")
    parser.add_argument("--backend", default="clarabel",
                        choices=available_backends(), help="SDP backend")
    parser.add_argument("--timings", action="store_true",
                        help="include wall-clock timings (breaks byte-determinism)")


def _plan_from(args, **extra) -> RunPlan:
    scenarios, digest = _gather_scenarios(args)
    return RunPlan(
        scenarios=tuple(scenarios),
        bounds=tuple(b.strip() for b in args.bounds.split(",") if b.strip()),
        lambda_grid=_lambda_grid(args.lambda_grid),
        tolerance=args.tol,
        backend_name=_backend_name(args),
        include_timings=args.timings,
        config_digest=digest,
        **extra,
    )


def cmd_run(args) -> int:
    report = run(_plan_from(args))
    _write_outputs(args.out, "report", report_json(report), rows_csv(flat_rows(report)))
    return 0


def cmd_sweep(args) -> int:
    values = tuple(float(v) for v in args.values.split(","))
    plan = _plan_from(args, sweep_axis=args.axis, sweep_values=values)
    report, rows = sweep(plan)
    _write_outputs(args.out, "sweep", report_json(report), rows_csv(rows))
    return 0


def cmd_catalog(_args) -> int:
    for sc in catalog():
        weight = "constant W" if sc.weight.is_constant else "varying W"
        print(f"{sc.name:24s} n={sc.model.n_params} d={sc.model.dim} "
              f"nodes={sc.prior.n_nodes:3d} {weight:10s} {sc.description}")
    return 0


def cmd_check(args) -> int:
    from .sdp import get_backend

    results = run_all_checks(get_backend(_backend_name(args)))
    for res in results:
        print(res.line())
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qbrisk",
        description="Bayesian lower bounds for quantum estimation")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="compute bounds for scenarios")
    _add_common(p_run)
    p_run.set_defaults(fn=cmd_run)

    p_sweep = sub.add_parser("sweep", help="compute bounds along a sweep axis")
    _add_common(p_sweep)
    p_sweep.add_argument("--axis", required=True,
                         choices=("lambda", "prior_width", "nodes"))
    p_sweep.add_argument("--values", required=True,
                         help="comma-separated axis values")
    p_sweep.set_defaults(fn=cmd_sweep)

    p_cat = sub.add_parser("catalog", help="list built-in scenarios")
    p_cat.set_defaults(fn=cmd_catalog)

    p_check = sub.add_parser("check", help="run the invariant suite on the catalog")
    p_check.add_argument("--backend", default="clarabel", choices=available_backends())
    p_check.set_defaults(fn=cmd_check)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ToolkitError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
