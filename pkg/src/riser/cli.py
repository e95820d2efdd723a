"""Command-line entry point: ``riser run|verify|classify|analyze|sweep``.

Exit codes:
  0 success / PASS
  2 invalid configuration or malformed input
  3 solver divergence
  4 inequality violation (verify)
  5 decay verdict FAIL (analyze)
"""

from __future__ import annotations

import argparse
import csv
import itertools
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import scenario as sc
from .conditions import SUMMARY_OUTSIDE
from .cylinder import CylinderGrid, verify_suite
from .decay import fit_tail, predicted_exponents, verdict
from .errors import ConfigError, Diverged, EnergyUnderflow, RiserError, WindowTooSmall
from .integrator import resolve_dt, run

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_DIVERGED = 3
EXIT_VIOLATION = 4
EXIT_FAIL = 5

SERIES_NAME = "series.csv"
SUMMARY_NAME = "summary.json"
CHECKPOINT_NAME = "checkpoint.bin"
SWEEP_TABLE_NAME = "sweep.csv"

log = logging.getLogger("riser")


def _setup_logging() -> None:
    level = os.environ.get("RISER_LOG", "info").upper()
    if level not in ("ERROR", "INFO", "DEBUG"):
        level = "INFO"
    logging.basicConfig(level=getattr(logging, level), format="riser: %(levelname)s: %(message)s", stream=sys.stderr)


def _fail(msg: str, code: int) -> int:
    print(f"riser: error: {msg}", file=sys.stderr)
    return code


def _analyze_series(series, resolved: sc.ResolvedScenario, tolerance: float | None = None) -> dict:
    """Fit and verdict as a JSON-ready dict; raises WindowTooSmall."""
    tol = resolved.tolerance if tolerance is None else tolerance
    p = resolved.problem.params.p
    try:
        fit = fit_tail(series, resolved.growth, p, resolved.fit_window_fraction)
    except EnergyUnderflow as exc:
        pred = predicted_exponents(resolved.growth, p)
        v = verdict(exc, tol)
        return {
            "fitted_exponent": None,
            "predicted_exponent_theorem": pred.theorem,
            "predicted_exponent_proof": pred.proof,
            **v.to_dict(),
        }
    v = verdict(fit, tol)
    return {**fit.to_dict(), **v.to_dict()}


def execute_run(resolved: sc.ResolvedScenario, out_dir: Path) -> dict:
    """Run one scenario into ``out_dir``; returns the summary dict. Raises Diverged."""
    out_dir.mkdir(parents=True, exist_ok=True)
    report = resolved.classify()
    if report.summary == SUMMARY_OUTSIDE:
        log.info("%s", report.summary)
    started = time.perf_counter()
    series = run(resolved.scenario, checkpoint_path=out_dir / CHECKPOINT_NAME)
    elapsed = time.perf_counter() - started
    sc.write_series_csv(series, out_dir / SERIES_NAME)
    dt, n_steps = resolve_dt(resolved.scenario.scheme, resolved.problem, resolved.scenario.run.t_end)
    last = series[-1]
    try:
        fit = _analyze_series(series, resolved)
    except WindowTooSmall as exc:
        fit = {"error": str(exc)}
    summary = {
        "schema_version": sc.SCHEMA_VERSION,
        "fingerprint": resolved.scenario.fingerprint,
        "config": resolved.config,
        "dt": dt,
        "n_steps": n_steps,
        "n_records": len(series),
        "wall_seconds": elapsed,
        "E_initial": series[0].E,
        "E_final": last.E,
        "integrals": {"I_b": last.int_I_b, "dissipation": last.int_dissipation, "d_t": last.int_d_t},
        "classification": report.to_dict(),
        "fit": fit,
    }
    sc.dump_json(summary, out_dir / SUMMARY_NAME)
    return summary


# --- subcommands -------------------------------------------------------------


def cmd_run(args) -> int:
    try:
        raw = sc.load_config(args.config)
        if args.seed is not None:
            raw["seed"] = args.seed
        resolved = sc.build(raw)
    except (RiserError, ValueError) as exc:
        return _fail(str(exc), EXIT_INVALID)
    try:
        summary = execute_run(resolved, Path(args.out))
    except Diverged as exc:
        return _fail(f"solver diverged: {exc}", EXIT_DIVERGED)
    log.info("E: %.6g -> %.6g over %d steps", summary["E_initial"], summary["E_final"], summary["n_steps"])
    return EXIT_OK


def cmd_verify(args) -> int:
    try:
        grid = CylinderGrid(rho=args.rho, h=args.h, Nr=args.nr, Nphi=args.nphi, Nz=args.nz)
    except ValueError as exc:
        return _fail(str(exc), EXIT_INVALID)
    if args.fields < 0:
        return _fail("--fields must be non-negative", EXIT_INVALID)
    seed = 42 if args.seed is None else args.seed
    result = verify_suite(args.fields, seed, grid, alpha_sign=args.alpha_sign)
    text = sc.dump_json(result, args.out)
    if args.out is None:
        print(text)
    return EXIT_VIOLATION if result["fatal_violations"] else EXIT_OK


def cmd_classify(args) -> int:
    try:
        resolved = sc.build(sc.load_config(args.config), strict=False)
    except (RiserError, ValueError) as exc:
        return _fail(str(exc), EXIT_INVALID)
    print(sc.dump_json(resolved.classify().to_dict()))
    return EXIT_OK


def cmd_analyze(args) -> int:
    try:
        resolved = sc.build(sc.load_config(args.config), strict=False)
        series = sc.read_series_csv(args.csv)
        result = _analyze_series(series, resolved, args.tolerance)
    except WindowTooSmall as exc:
        return _fail(f"WindowTooSmall: {exc}", EXIT_INVALID)
    except (RiserError, ValueError) as exc:
        return _fail(str(exc), EXIT_INVALID)
    print(sc.dump_json(result))
    return EXIT_OK if result["passed"] else EXIT_FAIL


def _sweep_points(axes: dict) -> list[dict]:
    names = list(axes)
    return [dict(zip(names, combo)) for combo in itertools.product(*(axes[n] for n in names))]


def _run_sweep_point(task) -> dict:
    """Worker body: build, run and analyse one point; never raises."""
    index, point, raw, seed, out_dir = task
    row = {"point": index, **point, "status": "ok", "error": ""}
    try:
        cfg = sc.apply_sweep_point(raw, point)
        cfg["seed"] = seed
        resolved = sc.build(cfg, strict=False)
        report = resolved.classify()
        row.update(report.flags())
        row["summary"] = report.summary
        if resolved.constants is None:
            raise ConfigError(report.rigidity_error or "rigidity condition fails")
        summary = execute_run(resolved, Path(out_dir))
        fit = summary["fit"]
        row["fitted_exponent"] = fit.get("fitted_exponent")
        row["predicted_exponent_proof"] = fit.get("predicted_exponent_proof")
        row["predicted_exponent_theorem"] = fit.get("predicted_exponent_theorem")
        row["verdict"] = fit.get("verdict", "")
        if "error" in fit:
            row["error"] = fit["error"]
    except Diverged as exc:
        row.update(status="diverged", error=str(exc))
    except Exception as exc:  # recorded per point; the sweep continues
        row.update(status="failed", error=f"{type(exc).__name__}: {exc}")
    return row


def cmd_sweep(args) -> int:
    try:
        raw = sc.load_config(args.config)
        resolved_cfg = sc.resolve_config(raw)
    except (RiserError, ValueError) as exc:
        return _fail(str(exc), EXIT_INVALID)
    axes = resolved_cfg.get("sweep", {}).get("axes")
    if not axes:
        return _fail("config has no sweep.axes", EXIT_INVALID)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    points = _sweep_points(axes)
    base_seed = resolved_cfg["seed"] if args.seed is None else args.seed
    seeds = [int(s.generate_state(1, dtype=np.uint32)[0]) for s in np.random.SeedSequence(base_seed).spawn(len(points))]
    tasks = [(i, pt, raw, seeds[i], str(out / f"point_{i:04d}")) for i, pt in enumerate(points)]
    log.info("sweep: %d points, %d worker(s)", len(tasks), args.jobs)
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_run_sweep_point, tasks))
    else:
        rows = [_run_sweep_point(t) for t in tasks]

    flag_cols = ["rigidity_ok", "condK_ok", "condD_ok", "drag_floor_ok", "m_lt_half", "n_lt_minus_m",
                 "lambda_ok", "remark_m_minus_n_lt_0", "remark_m_lt_0"]
    columns = ["point", *axes, *flag_cols, "summary", "fitted_exponent", "predicted_exponent_proof",
               "predicted_exponent_theorem", "verdict", "status", "error"]
    with open(out / SWEEP_TABLE_NAME, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns, extrasaction="ignore")
        writer.writeheader()
        for row in rows:
            writer.writerow({c: _cell(row.get(c, "")) for c in columns})
    failed = [r for r in rows if r["status"] != "ok"]
    for r in failed:
        log.error("point %d %s: %s", r["point"], r["status"], r["error"])
    return EXIT_OK


def _cell(value):
    if isinstance(value, float):
        return format(value, ".17g")
    return value


# --- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="riser", description="Nonlinear riser equation laboratory.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="simulate a scenario")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("verify", help="randomised cylinder inequality suite")
    p.add_argument("--fields", type=int, default=1000)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--h", type=float, default=1.0)
    p.add_argument("--nr", type=int, default=16)
    p.add_argument("--nphi", type=int, default=8)
    p.add_argument("--nz", type=int, default=128)
    p.add_argument("--alpha-sign", choices=("any", "negative"), default="any")
    p.add_argument("--out", default=None, help="write JSON here instead of stdout")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("classify", help="report which hypotheses hold")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("analyze", help="fit the tail decay exponent of a series")
    p.add_argument("--csv", required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--tolerance", type=float, default=None)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("sweep", help="run a grid of scenarios")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
