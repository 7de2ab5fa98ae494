"""Command-line front end.

Subcommands: ``classify``, ``solve``, ``verify``, ``rellich`` and ``sweep``.
Exit codes: 0 success, 2 invalid parameters, 3 solver nonconvergence,
4 I/O failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .diagnostics import SCHEMA_VERSION, verification_fields
from .operators import LineGrid, TrajectoryPair, energy, first_derivative
from .params import (
    ParameterError,
    RegimeTag,
    SystemParams,
    apriori_bounds,
    classify_regime,
    derive_reduced,
    equilibria,
)
from .radial import pde_relative_residuals, to_radial
from .rellich import RellichParams, mu2, mu_theta, theta_double_star
from .variational import SolverOptions, duality_check, minimize_quotient, NonConvergenceError

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NONCONVERGENCE = 3
EXIT_IO = 4

TRAJECTORY_COLUMNS = ("s", "g", "f", "gp", "fp", "energy")
RADIAL_COLUMNS = ("r", "u", "v", "residual1", "residual2")


class CommandError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _number(x: float) -> str:
    return format(float(x), ".17g")


def _clean(obj):
    """Make a report JSON-safe: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return obj


def dump_json(report: dict) -> str:
    return json.dumps(_clean(report), indent=2, sort_keys=True) + "\n"


def _flatten(obj, prefix: str = "") -> dict:
    flat = {}
    if isinstance(obj, dict):
        for key, value in obj.items():
            flat.update(_flatten(value, f"{prefix}.{key}" if prefix else str(key)))
    elif isinstance(obj, list):
        for i, value in enumerate(obj):
            flat.update(_flatten(value, f"{prefix}.{i}"))
    else:
        flat[prefix] = obj
    return flat


def _csv_cell(value) -> str:
    if isinstance(value, float):
        return _number(value)
    if value is None:
        return ""
    return str(value)


def dump_csv_records(records: list[dict]) -> str:
    """One row per record, columns the sorted union of flattened keys."""
    rows = [_flatten(_clean(r)) for r in records]
    columns = sorted(set().union(*rows)) if rows else []
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_csv_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def dump_table(columns, arrays) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(columns)
    for row in zip(*arrays):
        writer.writerow([_number(v) for v in row])
    return buf.getvalue()


def _write(path: str | None, text: str):
    if path is None:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise CommandError(EXIT_IO, f"cannot write {path}: {exc}") from exc


def _emit(report, args):
    text = dump_json(report) if args.format == "json" else dump_csv_records(
        report if isinstance(report, list) else [report]
    )
    _write(args.out, text)


def _params(args) -> SystemParams:
    try:
        return SystemParams(args.n, args.a, args.b, args.p, args.q)
    except ParameterError as exc:
        raise CommandError(EXIT_INVALID, str(exc)) from exc


def _reduced(params: SystemParams):
    try:
        return derive_reduced(params)
    except ParameterError as exc:
        raise CommandError(EXIT_INVALID, str(exc)) from exc


def _grid(args) -> LineGrid:
    try:
        return LineGrid(args.L, args.h)
    except ValueError as exc:
        raise CommandError(EXIT_INVALID, str(exc)) from exc


def _options(args) -> SolverOptions:
    try:
        return SolverOptions(
            tol=args.tol, max_iter=args.max_iter, seed=args.seed, multistarts=args.multistarts
        )
    except ValueError as exc:
        raise CommandError(EXIT_INVALID, str(exc)) from exc


def _params_dict(params: SystemParams) -> dict:
    return {"n": params.n, "a": params.a, "b": params.b, "p": params.p, "q": params.q}


def _grid_dict(grid: LineGrid) -> dict:
    return {"L": grid.L, "h": grid.h, "nodes": grid.nodes}


def classify_report(params: SystemParams) -> dict:
    red = _reduced(params)
    regime = classify_regime(params)
    g_bound, f_bound = apriori_bounds(red)
    return {
        "schema_version": SCHEMA_VERSION,
        "command": "classify",
        "params": _params_dict(params),
        "reduced": {
            "lambda1": red.lambda1,
            "lambda2": red.lambda2,
            "A": red.A,
            "Gamma": red.Gamma,
            "delta": red.delta,
            "p_conj": red.p_conj,
            "q_conj": red.q_conj,
        },
        "regime": {"tag": regime.tag.value, "reasons": list(regime.reasons)},
        "apriori_bounds": {"g_bound": g_bound, "f_bound": f_bound},
        "equilibria": [list(e) for e in equilibria(red)],
    }


def trajectory_table(pair: TrajectoryPair) -> str:
    h = pair.grid.h
    return dump_table(
        TRAJECTORY_COLUMNS,
        (
            pair.grid.s,
            pair.g,
            pair.f,
            first_derivative(pair.g, h),
            first_derivative(pair.f, h),
            energy(pair),
        ),
    )


def radial_table(pair: TrajectoryPair, params: SystemParams) -> str:
    sol = to_radial(pair, params)
    res1, res2 = pde_relative_residuals(sol)
    return dump_table(RADIAL_COLUMNS, (sol.radii, sol.u, sol.v, res1, res2))


def read_trajectory(path: str, params: SystemParams) -> TrajectoryPair:
    """Load a trajectory CSV written by ``solve``."""
    red = _reduced(params)
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise CommandError(EXIT_IO, f"cannot read {path}: {exc}") from exc
    if not rows or tuple(rows[0]) != TRAJECTORY_COLUMNS:
        raise CommandError(EXIT_IO, f"{path}: header must be {','.join(TRAJECTORY_COLUMNS)}")
    try:
        data = np.array([[float(x) for x in row] for row in rows[1:]])
        grid = LineGrid.from_nodes(data[:, 0])
    except (ValueError, IndexError) as exc:
        raise CommandError(EXIT_IO, f"{path}: malformed trajectory ({exc})") from exc
    return TrajectoryPair(grid, data[:, 1], data[:, 2], red)


def solve_report(params: SystemParams, grid: LineGrid, opts: SolverOptions, duality: bool = False):
    """Run the minimizer and assemble the report. Returns ``(report, pair)``."""
    red = _reduced(params)
    regime = classify_regime(params)
    if regime.tag is RegimeTag.DEGENERATE:
        raise CommandError(EXIT_INVALID, "degenerate: Gamma = 0, solvers require Gamma != 0")
    result = minimize_quotient(red, grid, opts)
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": "solve",
        "params": _params_dict(params),
        "grid": _grid_dict(grid),
        "options": {
            "tol": opts.tol,
            "max_iter": opts.max_iter,
            "seed": opts.seed,
            "multistarts": opts.multistarts,
        },
        "regime": regime.tag.value,
        "m": result.m,
        "mu": result.mu,
        "converged": result.converged,
        "iterations": result.iterations,
        "start_index": result.start_index,
    }
    report.update(verification_fields(result.pair, params))
    if duality:
        try:
            report["duality_defect"] = duality_check(params, grid, opts)[2]
        except NonConvergenceError:
            report["duality_defect"] = None
    return report, result.pair


def cmd_classify(args) -> int:
    _emit(classify_report(_params(args)), args)
    return EXIT_OK


def cmd_solve(args) -> int:
    params = _params(args)
    report, pair = solve_report(params, _grid(args), _options(args), args.duality)
    if args.out is None:
        _emit(report, args)
    else:
        try:
            os.makedirs(args.out, exist_ok=True)
        except OSError as exc:
            raise CommandError(EXIT_IO, f"cannot create {args.out}: {exc}") from exc
        name = "report.json" if args.format == "json" else "report.csv"
        body = dump_json(report) if args.format == "json" else dump_csv_records([report])
        _write(os.path.join(args.out, name), body)
        _write(os.path.join(args.out, "trajectory.csv"), trajectory_table(pair))
        _write(os.path.join(args.out, "radial.csv"), radial_table(pair, params))
    return EXIT_OK if report["converged"] else EXIT_NONCONVERGENCE


def cmd_verify(args) -> int:
    params = _params(args)
    pair = read_trajectory(args.trajectory, params)
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": "verify",
        "params": _params_dict(params),
        "grid": _grid_dict(pair.grid),
    }
    report.update(verification_fields(pair, params))
    _emit(report, args)
    return EXIT_OK


def rellich_report(n: int, theta: float, alpha: float) -> dict:
    try:
        rp = RellichParams(n, theta, alpha)
    except ValueError as exc:
        raise CommandError(EXIT_INVALID, str(exc)) from exc
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": "rellich",
        "n": n,
        "theta": theta,
        "alpha": alpha,
        "Gamma_appx": rp.Gamma_appx,
        "A_appx": rp.A_appx,
    }
    if theta == 2:
        value, k = mu2(n, alpha)
        report["mu2"] = {"value": value, "k": k}
    try:
        report["mu_theta"] = mu_theta(n, theta, alpha)
    except ValueError as exc:
        report["mu_theta"] = None
        report["mu_theta_note"] = str(exc)
    star = theta_double_star(n, theta)
    report["theta_double_star"] = "unbounded" if math.isinf(star) else star
    return report


def cmd_rellich(args) -> int:
    _emit(rellich_report(args.n, args.theta, args.alpha), args)
    return EXIT_OK


def parse_tuple(text: str) -> tuple:
    parts = text.split(",")
    if len(parts) != 5:
        raise argparse.ArgumentTypeError(f"expected n,a,b,p,q, got {text!r}")
    try:
        n = int(parts[0])
        return (n,) + tuple(float(x) for x in parts[1:])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad tuple {text!r}: {exc}") from exc


def sweep_record(job) -> dict:
    """Classify and, where a solution exists, solve one tuple. Never raises."""
    tup, L, h, opts = job
    record = {"params": dict(zip("nabpq", tup))}
    try:
        params = SystemParams(*tup)
        red = derive_reduced(params)
        regime = classify_regime(params)
        record.update(regime=regime.tag.value, A=red.A, Gamma=red.Gamma)
        if regime.tag is RegimeTag.DEGENERATE:
            record["status"] = "refused"
            return record
        report, _ = solve_report(params, LineGrid(L, h), opts)
    except (ParameterError, ValueError, CommandError) as exc:
        record.update(status="invalid", message=str(exc))
        return record
    record.update(
        status="converged" if report["converged"] else "nonconverged",
        m=report["m"],
        residual_norms=report["residual_norms"],
        gf_all_positive=report["sign_report"]["all_positive"],
        bounds_ok=report["bound_check"]["ok"],
    )
    return record


def cmd_sweep(args) -> int:
    if not args.tuple:
        raise CommandError(EXIT_INVALID, "sweep: give at least one --tuple n,a,b,p,q")
    opts = _options(args)
    tuples = sorted(set(args.tuple))
    jobs = [(t, args.L, args.h, opts) for t in tuples]
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            records = list(pool.map(sweep_record, jobs))
    else:
        records = [sweep_record(job) for job in jobs]
    if args.format == "json":
        _write(args.out, dump_json({"schema_version": SCHEMA_VERSION, "command": "sweep", "records": records}))
    else:
        _write(args.out, dump_csv_records(records))
    return EXIT_OK


def _add_system(p: argparse.ArgumentParser):
    p.add_argument("--n", type=int, required=True, help="dimension")
    p.add_argument("--a", type=float, required=True, help="weight exponent of the first equation")
    p.add_argument("--b", type=float, required=True, help="weight exponent of the second equation")
    p.add_argument("--p", type=float, required=True, help="exponent on v")
    p.add_argument("--q", type=float, required=True, help="exponent on u")


def _add_output(p: argparse.ArgumentParser, out_help: str):
    p.add_argument("--out", default=None, help=out_help)
    p.add_argument("--format", choices=("json", "csv"), default="json")


def _add_solver(p: argparse.ArgumentParser):
    p.add_argument("--L", type=float, default=30.0, help="half-length of the line")
    p.add_argument("--h", type=float, default=0.01, help="grid spacing")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-iter", type=int, default=200_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--multistarts", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hle-radial",
        description="Radial solutions of the Hénon-Lane-Emden system on the critical hyperbola.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="reduced constants, regime, bounds and equilibria")
    _add_system(p)
    _add_output(p, "output file (default stdout)")
    p.set_defaults(handler=cmd_classify)

    p = sub.add_parser("solve", help="variational solution with verification report")
    _add_system(p)
    _add_solver(p)
    p.add_argument("--duality", action="store_true", help="also run the dual minimization")
    _add_output(p, "output directory for report, trajectory.csv and radial.csv (default: report to stdout)")
    p.set_defaults(handler=cmd_solve)

    p = sub.add_parser("verify", help="re-run all verifiers on a trajectory CSV")
    _add_system(p)
    p.add_argument("--trajectory", required=True, help="trajectory CSV written by solve")
    _add_output(p, "output file (default stdout)")
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("rellich", help="weighted Rellich closed forms")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--alpha", type=float, required=True)
    _add_output(p, "output file (default stdout)")
    p.set_defaults(handler=cmd_rellich)

    p = sub.add_parser("sweep", help="classify and solve several parameter tuples")
    p.add_argument("--tuple", type=parse_tuple, action="append", help="n,a,b,p,q (repeatable)")
    _add_solver(p)
    p.add_argument("--workers", type=int, default=1, help="parallel worker processes")
    _add_output(p, "output file (default stdout)")
    p.set_defaults(handler=cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except CommandError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
