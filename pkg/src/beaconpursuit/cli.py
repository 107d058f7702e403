"""Command-line interface.

Subcommands: simulate, predict, verify, compare, sweep. Scenario
arguments accept either a JSON file path or a shipped preset name.
Exit codes: 0 success, 1 validation error, 2 runtime singularity,
3 verification failure.
"""

from __future__ import annotations

import argparse
import itertools
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .control_laws import ControlParams
from .dynamics import Scenario, simulate
from .equilibria import EquilibriumPrediction, predict, residual
from .errors import BeaconPursuitError, NotConverged, SingularityAbort, TooShort
from .harness import (
    DEFAULT_CONV_TOL,
    DEFAULT_WINDOW,
    ComparisonReport,
    compare,
    detect_convergence,
)
from .presets import PRESET_NAMES, preset_scenario
from .scenario_io import load_scenario, scenario_to_dict, write_trajectory_csv

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_SINGULARITY = 2
EXIT_VERIFICATION = 3

# Default residual-suite grid. Target values cover both signs, zero, and
# the magnitudes used by the shipped presets.
DEFAULT_GRID = {
    "configs": ["I", "II", "III"],
    "mu": [0.5, 1.0, 2.0],
    "lambda": [0.2, 0.35, 0.5, 0.65, 0.8],
    "targets": [-0.9, -0.707, -0.3, -0.156, 0.0, 0.156, 0.3, 0.707, 0.9],
    "b_values": {"I": [2.0, 10.0], "II": [0.0], "III": [2.0, 10.0]},
    "family_members": 3,
}


def _resolve_scenario(ref: str) -> Scenario:
    p = Path(ref)
    if p.exists():
        return load_scenario(p)
    if ref in PRESET_NAMES:
        return preset_scenario(ref)
    raise BeaconPursuitError(
        f"{ref!r} is neither a scenario file nor a preset name "
        f"(presets: {', '.join(PRESET_NAMES)})"
    )


def _jsonable(value):
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def _prediction_doc(pred: EquilibriumPrediction) -> dict:
    doc = {
        "case_label": pred.case_label,
        "config_type": pred.config_type,
        "exists": pred.exists,
    }
    if pred.exists:
        doc["quantities"] = _jsonable(pred.quantities())
        if pred.free:
            doc["free"] = list(pred.free)
        if pred.relations:
            doc["relations"] = list(pred.relations)
    else:
        doc["reason"] = pred.reason
    return doc


def _comparison_doc(report: ComparisonReport) -> dict:
    conv = report.convergence
    return {
        "prediction": _prediction_doc(report.prediction),
        "converged": conv.converged,
        "settle_time": _jsonable(conv.settle_time),
        "window_max_dev": _jsonable(conv.window_max_dev),
        "cb_cost_final": _jsonable(conv.cb_cost_final),
        "predicted": _jsonable(report.predicted),
        "observed": _jsonable(report.observed),
        "per_quantity_rel_error": _jsonable(report.per_quantity_rel_error),
        "skipped": list(report.skipped),
        "tol": report.tol,
        "passed": report.passed,
    }


def _format_prediction(pred: EquilibriumPrediction) -> str:
    if not pred.exists:
        return f"  {pred.case_label:<12} --      {pred.reason}"
    parts = [f"{k}={v:.6g}" for k, v in sorted(pred.quantities().items())]
    line = f"  {pred.case_label:<12} exists  " + "  ".join(parts)
    if pred.free:
        line += "  [free: " + ", ".join(pred.free) + "]"
    return line


# --- simulate ----------------------------------------------------------------


def _cmd_simulate(args: argparse.Namespace) -> int:
    scenario = _resolve_scenario(args.scenario)
    traj = simulate(scenario)
    write_trajectory_csv(traj, args.output)
    if traj.aborted:
        print(
            f"singularity: separation fell below threshold at t={traj.abort_time:g}; "
            f"wrote {len(traj.times)} snapshots to {args.output}",
            file=sys.stderr,
        )
        return EXIT_SINGULARITY
    print(f"wrote {len(traj.times)} snapshots to {args.output}")
    return EXIT_OK


# --- predict -----------------------------------------------------------------


def _cmd_predict(args: argparse.Namespace) -> int:
    scenario = _resolve_scenario(args.scenario)
    preds = predict(scenario.config_type, scenario.params)
    p = scenario.params
    if scenario.config_type == "I":
        targets = f"ab1={p.ab1:g} ab2={p.ab2:g}"
    else:
        targets = f"a={p.a:g} a0={p.a0:g}"
    print(
        f"config {scenario.config_type}  mu={p.mu:g} lambda={p.lam:g} "
        f"{targets} b={p.b:g}"
    )
    for pred in preds:
        print(_format_prediction(pred))
    return EXIT_OK


# --- verify ------------------------------------------------------------------


def _grid_param_sets(grid: dict):
    """Yield (config_type, ControlParams) over the grid's cartesian product."""
    for config in grid["configs"]:
        for b in grid["b_values"][config]:
            for mu, lam, t1, t2 in itertools.product(
                grid["mu"], grid["lambda"], grid["targets"], grid["targets"]
            ):
                if config == "I":
                    yield config, ControlParams(mu=mu, lam=lam, ab1=t1, ab2=t2, b=b)
                else:
                    yield config, ControlParams(mu=mu, lam=lam, a=t1, a0=t2, b=b)


def run_residual_suite(grid: dict | None = None) -> dict:
    """Predict and residual-check every existing case over a parameter grid.

    Returns a summary dict with counts, the worst residual, and any
    failures (case label, parameters, worst derivative).
    """
    g = dict(DEFAULT_GRID)
    if grid:
        unknown = set(grid) - set(DEFAULT_GRID)
        if unknown:
            raise BeaconPursuitError(f"unknown grid keys {sorted(unknown)}")
        g.update(grid)
    n_members = int(g["family_members"])
    checked = 0
    passed = 0
    worst = 0.0
    failures: list[dict] = []
    for config, params in _grid_param_sets(g):
        for pred in predict(config, params):
            if not pred.exists:
                continue
            report = residual(pred, n_family=n_members)
            checked += 1
            worst = max(worst, report.max_abs_derivative / params.mu)
            if report.passed:
                passed += 1
            else:
                failures.append(
                    {
                        "case_label": pred.case_label,
                        "config_type": config,
                        "mu": params.mu,
                        "lambda": params.lam,
                        "targets": [params.ab1, params.ab2]
                        if config == "I"
                        else [params.a, params.a0],
                        "b": params.b,
                        "max_abs_derivative": report.max_abs_derivative,
                        "tolerance": report.tolerance,
                    }
                )
    return {
        "checked": checked,
        "passed": passed,
        "failed": checked - passed,
        "worst_scaled_residual": worst,
        "failures": failures,
    }


def _cmd_verify(args: argparse.Namespace) -> int:
    grid = None
    if args.grid:
        try:
            grid = json.loads(Path(args.grid).read_text())
        except json.JSONDecodeError as e:
            raise BeaconPursuitError(f"malformed grid JSON: {e}") from e
    summary = run_residual_suite(grid)
    print(
        f"residual suite: {summary['passed']}/{summary['checked']} predictions "
        f"passed (worst scaled residual {summary['worst_scaled_residual']:.3g})"
    )
    for f in summary["failures"][:20]:
        print(
            f"  FAIL {f['case_label']} config {f['config_type']} "
            f"mu={f['mu']:g} lambda={f['lambda']:g} targets={f['targets']} "
            f"b={f['b']:g}: max |d/dt| = {f['max_abs_derivative']:.3g}",
            file=sys.stderr,
        )
    if summary["failed"]:
        return EXIT_VERIFICATION
    return EXIT_OK


# --- compare -----------------------------------------------------------------


def _cmd_compare(args: argparse.Namespace) -> int:
    scenario = _resolve_scenario(args.scenario)
    candidates = [
        p for p in predict(scenario.config_type, scenario.params) if p.exists
    ]
    if not candidates:
        raise BeaconPursuitError(
            "no equilibrium case exists for the scenario's parameters"
        )
    traj = simulate(scenario)
    report_doc: dict = {"scenario": scenario_to_dict(scenario), "comparisons": []}
    exit_code = EXIT_VERIFICATION
    if traj.aborted:
        report_doc["aborted"] = True
        report_doc["abort_time"] = traj.abort_time
        report_doc["passed"] = False
        exit_code = EXIT_SINGULARITY
    else:
        report_doc["aborted"] = False
        any_passed = False
        for pred in candidates:
            try:
                rep = compare(traj, pred, tol=args.tol)
            except NotConverged as e:
                report_doc["comparisons"].append(
                    {
                        "prediction": _prediction_doc(pred),
                        "converged": False,
                        "error": str(e),
                        "passed": False,
                    }
                )
                continue
            report_doc["comparisons"].append(_comparison_doc(rep))
            any_passed = any_passed or rep.passed
        report_doc["passed"] = any_passed
        if any_passed:
            exit_code = EXIT_OK
    Path(args.output).write_text(json.dumps(report_doc, indent=2) + "\n")
    best = next(
        (c for c in report_doc["comparisons"] if c.get("passed")),
        report_doc["comparisons"][0] if report_doc["comparisons"] else None,
    )
    if report_doc.get("aborted"):
        print("comparison aborted: singularity during simulation", file=sys.stderr)
    elif best is None:
        print("comparison produced no results", file=sys.stderr)
    else:
        label = best["prediction"]["case_label"]
        status = "pass" if report_doc["passed"] else "fail"
        print(f"compare {label}: {status} (report: {args.output})")
    return exit_code


# --- sweep -------------------------------------------------------------------


def _sweep_run(task: tuple) -> dict:
    """One isolated sweep member; must stay picklable for process pools."""
    index, doc, overrides, save_csv, out_dir, window, tol = task
    from .scenario_io import scenario_from_dict

    scenario = scenario_from_dict(doc)
    traj = simulate(scenario)
    row: dict = {
        "run": index,
        "overrides": overrides,
        "aborted": traj.aborted,
        "abort_time": traj.abort_time if traj.aborted else None,
        "converged": None,
    }
    if not traj.aborted:
        try:
            conv = detect_convergence(traj, window=window, tol=tol)
        except TooShort:
            conv = None
        if conv is not None:
            row["converged"] = conv.converged
            row["settle_time"] = _jsonable(conv.settle_time)
            row["cb_cost_final"] = _jsonable(conv.cb_cost_final)
            if conv.converged:
                steady = dict(zip(traj.shape_names, conv.steady_shape.as_array()))
                row["steady_shape"] = _jsonable(steady)
    if save_csv:
        csv_name = f"run_{index:04d}.csv"
        write_trajectory_csv(traj, Path(out_dir) / csv_name)
        row["csv"] = csv_name
    return row


def _cmd_sweep(args: argparse.Namespace) -> int:
    from .scenario_io import scenario_from_dict

    try:
        grid = json.loads(Path(args.grid).read_text())
    except json.JSONDecodeError as e:
        raise BeaconPursuitError(f"malformed sweep JSON: {e}") from e
    if not isinstance(grid, dict) or "base" not in grid:
        raise BeaconPursuitError("sweep grid must be an object with a 'base' key")
    unknown = set(grid) - {"base", "vary", "save_csv"}
    if unknown:
        raise BeaconPursuitError(f"unknown sweep keys {sorted(unknown)}")
    base = grid["base"]
    if isinstance(base, str):
        base_doc = scenario_to_dict(_resolve_scenario(base))
    elif isinstance(base, dict):
        base_doc = dict(base)
    else:
        raise BeaconPursuitError("'base' must be a scenario object or preset name")
    vary = grid.get("vary", {})
    if not isinstance(vary, dict) or not all(
        isinstance(v, list) and v for v in vary.values()
    ):
        raise BeaconPursuitError("'vary' must map scenario keys to nonempty lists")
    save_csv = bool(grid.get("save_csv", False))

    out_dir = Path(args.output)
    out_dir.mkdir(parents=True, exist_ok=True)

    keys = sorted(vary)
    combos = list(itertools.product(*(vary[k] for k in keys))) if keys else [()]
    tasks = []
    for i, combo in enumerate(combos):
        overrides = dict(zip(keys, combo))
        doc = dict(base_doc)
        doc.update(overrides)
        # Validate up front so a bad grid fails before any run starts.
        scenario_from_dict(doc)
        tasks.append(
            (i, doc, overrides, save_csv, str(out_dir), DEFAULT_WINDOW, DEFAULT_CONV_TOL)
        )

    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_sweep_run, tasks))
    else:
        rows = [_sweep_run(task) for task in tasks]
    rows.sort(key=lambda r: r["run"])
    summary = {"base": base_doc, "vary": vary, "runs": rows}
    (out_dir / "sweep_summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    n_aborted = sum(1 for r in rows if r["aborted"])
    print(
        f"sweep: {len(rows)} runs ({n_aborted} aborted); "
        f"summary: {out_dir / 'sweep_summary.json'}"
    )
    return EXIT_OK


# --- entry point ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="beaconpursuit",
        description="Beacon-referenced constant-bearing pursuit in three dimensions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run a scenario and export CSV")
    p_sim.add_argument("scenario", help="scenario JSON path or preset name")
    p_sim.add_argument("-o", "--output", required=True, help="output CSV path")
    p_sim.set_defaults(func=_cmd_simulate)

    p_pred = sub.add_parser("predict", help="print equilibrium predictions")
    p_pred.add_argument("scenario", help="scenario JSON path or preset name")
    p_pred.set_defaults(func=_cmd_predict)

    p_ver = sub.add_parser("verify", help="run the residual suite over a grid")
    p_ver.add_argument("--grid", help="grid JSON path (defaults built in)")
    p_ver.set_defaults(func=_cmd_verify)

    p_cmp = sub.add_parser("compare", help="simulate, detect convergence, compare")
    p_cmp.add_argument("scenario", help="scenario JSON path or preset name")
    p_cmp.add_argument("-o", "--output", required=True, help="report JSON path")
    p_cmp.add_argument("--tol", type=float, default=0.01, help="relative tolerance")
    p_cmp.set_defaults(func=_cmd_compare)

    p_swp = sub.add_parser("sweep", help="run a parameter sweep")
    p_swp.add_argument("grid", help="sweep JSON path")
    p_swp.add_argument("-o", "--output", required=True, help="output directory")
    p_swp.add_argument("--jobs", type=int, default=1, help="parallel processes")
    p_swp.set_defaults(func=_cmd_sweep)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SingularityAbort as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_SINGULARITY
    except (BeaconPursuitError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
