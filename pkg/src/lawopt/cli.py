"""Command-line front end.

    lawopt solve <config> [--tolerance X] [--out DIR] [--full-grid] [--seed N]
    lawopt sweep <config> --tolerances a,b,c [--out DIR] [--full-grid]
    lawopt demo-convexity <config> --epsilons a,b,c [--out DIR] [--seed N]

Exit codes: 0 success, 2 configuration error, 3 non-convergence, 4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import asdict, replace
from pathlib import Path

import numpy as np

from .alm import AlmReport, outer_loop
from .config import ConfigError, RunConfig, load_config
from .dp import ControlField, push_forward
from .lattice import Dynamics
from .measure import empirical_wasserstein1, write_measure_csv
from .problems import make_problem
from .simulate import branching_demo, fit_loglog_slope, sample_measure, simulate_feedback

EXIT_OK, EXIT_CONFIG, EXIT_NONCONVERGED, EXIT_IO = 0, 2, 3, 4

log = logging.getLogger("lawopt")

CONVERGENCE_COLUMNS = ["tolerance", "G_final", "lambda", "vi_residual", "c", "standard_solves",
                       "converged"]


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def write_matrix_csv(path: Path, times: np.ndarray, x: np.ndarray, values: np.ndarray) -> None:
    """Rows are time steps, columns are nodes; the header carries node coordinates."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t"] + [_fmt(v) for v in x])
        for t, row in zip(times, values):
            w.writerow([_fmt(t)] + [_fmt(v) for v in row])


def convergence_row(tolerance: float, report: AlmReport) -> dict:
    lam = report.lam
    return {
        "tolerance": tolerance,
        "G_final": float(report.constraint_final[0]) if len(report.constraint_final) == 1
        else float(np.max(report.constraint_final)),
        "lambda": float(lam[0]) if len(lam) == 1 else float(np.max(lam)),
        "vi_residual": report.vi_residual,
        "c": report.c,
        "standard_solves": report.n_standard_solves,
        "converged": report.converged,
    }


def write_table(path: Path, rows: list[dict], columns: list[str]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(row[c]) if row.get(c) is not None else "" for c in columns])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj


def run_solve(cfg: RunConfig, out: Path) -> AlmReport:
    """Solve one problem and write every artifact into ``out``."""
    lattice = cfg.lattice()
    problem = make_problem(cfg.problem, cfg.alpha, lattice, cfg.x0, cfg.sigma)
    report = outer_loop(problem, cfg.alm_config())
    out.mkdir(parents=True, exist_ok=True)

    laws = push_forward(problem.m0, report.feedback, problem.stencils)
    times = lattice.dt * np.arange(lattice.nt + 1)
    write_matrix_csv(out / "control.csv", times[:-1], lattice.x, report.feedback.values)
    write_matrix_csv(out / "distribution.csv", times, lattice.x, np.stack([m.weights for m in laws]))
    write_matrix_csv(out / "value.csv", times, lattice.x, report.value_field.values)
    write_measure_csv(out / "terminal_measure.csv", report.m_final)
    write_table(out / "convergence.csv", [convergence_row(cfg.tolerance, report)], CONVERGENCE_COLUMNS)
    write_table(out / "outer_iterations.csv", [asdict(r) | {"lam": r.lam[0] if len(r.lam) == 1 else
                                                            str(r.lam)} for r in report.outer],
                ["k", "residual_norm", "eps", "c", "eta", "omega", "lam", "multiplier_updated",
                 "inner_iterations", "inner_converged", "inner_stalled"])

    summary = {
        "status": report.status,
        "converged": report.converged,
        "lambda": report.lam,
        "constraint_final": report.constraint_final,
        "cost_final": report.cost_final,
        "c": report.c,
        "standard_solves": report.n_standard_solves,
        "outer_iterations": len(report.outer),
        "inner_iterations": [r.inner_iterations for r in report.inner],
        "certificate": report.certificate.to_dict() if report.certificate else None,
        "gap_bound_iterate": report.gap_bound_iterate,
        "gap_bound_iterate_refusal": report.gap_bound_iterate_refusal,
        # the destination is left out so that outputs do not depend on where they are written
        "config": {k: v for k, v in cfg.to_dict().items() if k != "out_dir"},
    }
    if cfg.n_paths > 0:
        ens = simulate_feedback(Dynamics.controlled_drift(cfg.sigma),
                                report.feedback, cfg.x0, cfg.n_paths, cfg.seed)
        ens.to_csv(out / "terminal_samples.csv")
        summary["monte_carlo"] = {
            "n_paths": cfg.n_paths,
            "seed": cfg.seed,
            "mean": float(np.mean(ens.terminal_samples)),
            "variance": float(np.var(ens.terminal_samples)),
            "w1_to_chain": empirical_wasserstein1(
                np.sort(ens.terminal_samples), sample_measure(report.m_final, cfg.n_paths)),
        }
    with open(out / "summary.json", "w") as fh:
        json.dump(_jsonable(summary), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return report


def run_sweep(cfg: RunConfig, tolerances: list[float], out: Path) -> list[dict]:
    """One solve per tolerance; a failing row is recorded and the sweep continues."""
    rows = []
    out.mkdir(parents=True, exist_ok=True)
    for i, tol in enumerate(tolerances):
        row_cfg = replace(cfg, tolerance=tol)
        try:
            report = run_solve(row_cfg, out / f"row{i:02d}_tol{tol:g}")
            rows.append(convergence_row(tol, report))
        except (ArithmeticError, ValueError) as exc:
            log.error("tolerance %g failed: %s", tol, exc)
            rows.append({"tolerance": tol, "converged": False})
    write_table(out / "sweep.csv", rows, CONVERGENCE_COLUMNS)
    return rows


def run_demo(cfg: RunConfig, epsilons: list[float], out: Path) -> dict:
    lattice = cfg.lattice()
    dyn = Dynamics.controlled_drift(cfg.sigma)
    controls = [ControlField.constant(lattice, cfg.u_min), ControlField.constant(lattice, cfg.u_max)]
    rows = []
    for eps in epsilons:
        res = branching_demo(dyn, controls, [0.5, 0.5], eps, cfg.demo_paths, cfg.seed, x0=cfg.x0)
        rows.append({"eps": eps, "distance": res.distance,
                     "fraction_1": float(res.branch_fractions[0]),
                     "fraction_2": float(res.branch_fractions[1])})
    out.mkdir(parents=True, exist_ok=True)
    write_table(out / "convexity_demo.csv", rows, ["eps", "distance", "fraction_1", "fraction_2"])
    result = {"rows": rows}
    if len(epsilons) >= 2:
        result["loglog_slope"] = fit_loglog_slope(epsilons, [r["distance"] for r in rows])
    with open(out / "convexity_demo.json", "w") as fh:
        json.dump(result, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return result


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lawopt", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run the augmented Lagrangian method once")
    p.add_argument("config")
    p.add_argument("--tolerance", type=float)
    p.add_argument("--out")
    p.add_argument("--full-grid", action="store_true")
    p.add_argument("--seed", type=int)

    p = sub.add_parser("sweep", help="one run per tolerance, aggregated into sweep.csv")
    p.add_argument("config")
    p.add_argument("--tolerances", required=True, type=_floats)
    p.add_argument("--out")
    p.add_argument("--full-grid", action="store_true")

    p = sub.add_parser("demo-convexity", help="Monte-Carlo check of the branching construction")
    p.add_argument("config")
    p.add_argument("--epsilons", required=True, type=_floats)
    p.add_argument("--out")
    p.add_argument("--seed", type=int)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        overrides = {}
        if getattr(args, "tolerance", None) is not None:
            overrides["tolerance"] = args.tolerance
        if getattr(args, "full_grid", False):
            overrides["full_grid"] = True
        if getattr(args, "seed", None) is not None:
            overrides["seed"] = args.seed
        if args.out:
            overrides["out_dir"] = args.out
        cfg = replace(cfg, **overrides)
        cfg.validate()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO

    out = Path(cfg.out_dir)
    try:
        if args.command == "solve":
            report = run_solve(cfg, out)
            print(f"{report.status}: lambda={report.lam.tolist()} G={report.constraint_final.tolist()} "
                  f"c={report.c:g} solves={report.n_standard_solves}")
            return EXIT_OK if report.converged else EXIT_NONCONVERGED
        if args.command == "sweep":
            rows = run_sweep(cfg, args.tolerances, out)
            return EXIT_OK if all(r.get("converged") for r in rows) else EXIT_NONCONVERGED
        if args.command == "demo-convexity":
            result = run_demo(cfg, args.epsilons, out)
            print(json.dumps(result, indent=2))
            return EXIT_OK
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
