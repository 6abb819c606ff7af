"""Command-line front end.

Subcommands::

    adjport simulate -s scenario.json -o out.csv
    adjport reproduce ex3 --n 3
    adjport reproduce --all
    adjport falsify -s falsify.json --n-max 8 -o cert.json
    adjport drift-sweep --L 10,20,40 -s coils.json -o sweep.csv

Exit codes: 0 success, 2 parse error, 3 simulation failure, 4 reproduction
mismatch.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import devices as dv
from . import mechanism as me
from .energy import falsify_passivity
from .numerics import snap_grid
from .reproduce import CASE_IDS, reproduce
from .scenario import (ScenarioError, Tolerances, load_json, parse_drift, parse_falsify,
                       parse_scenario)
from .trajectories import family

__all__ = ["main", "write_csv", "format_value", "run_scenario", "EXIT_OK", "EXIT_PARSE",
           "EXIT_SIM", "EXIT_MISMATCH"]

EXIT_OK, EXIT_PARSE, EXIT_SIM, EXIT_MISMATCH = 0, 2, 3, 4


class SimulationFailure(RuntimeError):
    pass


def format_value(v: float) -> str:
    if math.isnan(v):
        return "nan"
    return format(float(v), ".17g")


def _atomic_write(path, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path, header, rows):
    lines = [",".join(header)]
    lines.extend(",".join(format_value(v) for v in row) for row in rows)
    _atomic_write(path, "\n".join(lines) + "\n")


def _with_tol(tols: Tolerances, tol: float | None) -> Tolerances:
    if tol is None:
        return tols
    return Tolerances(tol, tols.quad_abs, tols.ode, tols.cycle)


def run_scenario(path, out=None, dt=None, tol=None) -> tuple[dv.SimResult, str]:
    """Simulate a scenario file, write its CSV and return the result and
    the summary text."""
    sc = parse_scenario(load_json(path), dt)
    tols = _with_tol(sc.tolerances, tol)
    out = out or sc.output
    if out is None:
        raise ScenarioError("scenario.output: no output path (give -o)")
    try:
        law = dv.OnePortLaw(sc.law, sc.parameter, sc.w0)
        res = dv.simulate(law, sc.input, sc.t_start, sc.t_end, sc.dt, tols.quad, tols.ode_spec)
    except (ValueError, ArithmeticError) as exc:
        raise SimulationFailure(f"{sc.law}: {exc}") from exc
    write_csv(out, dv.SimResult.COLUMNS, res.table())
    x, xdot, F = res.labels
    parts = [f"law {res.law_id} ({res.domain}; x={x}, xdot={xdot}, F={F})",
             f"net energy {format_value(res.net_energy)}"]
    if law.lossless:
        parts.append(f"internal energy change "
                     f"{format_value(res.internal_energy[-1] - res.internal_energy[0])}")
        parts.append(f"max balance residual {format_value(float(np.max(res.balance_residual)))}")
    return res, "; ".join(parts)


# --------------------------------------------------------------------------
# subcommands


def _cmd_simulate(args) -> int:
    _, summary = run_scenario(args.scenario, args.output, args.dt, args.tol)
    print(summary)
    return EXIT_OK


def _cmd_reproduce(args) -> int:
    if args.all == (args.case is not None):
        raise ScenarioError("reproduce: give exactly one case id or --all")
    if args.n is not None and args.n < 1:
        raise ScenarioError("--n: must be a positive integer")
    if args.L is not None and not (args.L > 0 and math.isfinite(args.L)):
        raise ScenarioError("--L: must be a positive number")
    ids = CASE_IDS if args.all else (args.case,)
    if args.case is not None and args.case not in CASE_IDS:
        raise ScenarioError(f"reproduce: unknown case id {args.case!r} "
                            f"(known: {', '.join(CASE_IDS)})")

    def run(cid):
        takes_n = cid in ("ex1", "ex2", "ex3", "ex4", "ex5", "ex6")
        return reproduce(cid, args.n if takes_n else None,
                         args.L if cid == "coil-drift" else None, args.tol)

    try:
        if len(ids) > 1:
            with ThreadPoolExecutor() as pool:
                cases = list(pool.map(run, ids))
        else:
            cases = [run(ids[0])]
    except (ValueError, ArithmeticError) as exc:
        raise SimulationFailure(str(exc)) from exc
    for case in cases:
        print("\n".join(case.lines()))
    if args.output:
        _atomic_write(args.output, json.dumps([c.to_dict() for c in cases], indent=2) + "\n")
    return EXIT_OK if all(c.passed for c in cases) else EXIT_MISMATCH


def _cmd_falsify(args) -> int:
    sc = parse_falsify(load_json(args.scenario))
    n_max = args.n_max if args.n_max is not None else sc.n_max
    if n_max < 3:
        raise ScenarioError("--n-max: must be at least 3")
    tol = args.tol if args.tol is not None else sc.tolerances.cycle
    try:
        cert = falsify_passivity(sc.law, family(sc.family, sc.law), n_max, tol, sc.tolerances.quad)
    except (ValueError, ArithmeticError) as exc:
        raise SimulationFailure(f"{sc.law}: {exc}") from exc
    _atomic_write(args.output, cert.to_json() + "\n")
    print(f"{cert.law_id} on {cert.family_id}: {cert.verdict}; E_n = "
          + ", ".join(format(e, ".10g") for e in cert.energies))
    return EXIT_OK


def _parse_L(text: str) -> list[float]:
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ScenarioError(f"--L: expected comma-separated numbers, got {text!r}") from None
    if not values or any(not (v > 0 and math.isfinite(v)) for v in values):
        raise ScenarioError("--L: every inductance must be a positive number")
    return values


def _cmd_drift(args) -> int:
    Ls = _parse_L(args.L)
    sc = parse_drift(load_json(args.scenario), args.dt)
    ode = Tolerances(sc.tolerances.quad_rel, sc.tolerances.quad_abs,
                     args.tol if args.tol is not None else sc.tolerances.ode).ode_spec
    rows = []
    try:
        for L in Ls:
            drift = me.coupled_coils_drift(me.CoilConfig(L, sc.m, sc.gamma0), sc.v1,
                                           sc.t_start, sc.t_end, ode)
            grid = snap_grid(sc.t_start, sc.t_end, sc.dt, drift.gamma.breakpoints)
            rows.append((L, float(np.max(np.abs(drift.gamma.eval(grid)))),
                         float(np.max(np.abs(drift.residual.eval(grid))))))
    except (ValueError, ArithmeticError) as exc:
        raise SimulationFailure(str(exc)) from exc
    write_csv(args.output, ("L", "max_abs_gamma", "max_abs_residual"), rows)
    for row in rows:
        print(",".join(format_value(v) for v in row))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="adjport",
                                     description="Adjustable spring, inerter and circuit "
                                                 "element laws: simulation and energy checks.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a scenario file and write CSV")
    p.add_argument("-s", "--scenario", required=True)
    p.add_argument("-o", "--output")
    p.add_argument("--dt", type=float, help="sample step (overrides the scenario)")
    p.add_argument("--tol", type=float, help="relative quadrature tolerance")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("reproduce", help="re-run a worked example or construction check")
    p.add_argument("case", nargs="?", help=f"one of: {', '.join(CASE_IDS)}")
    p.add_argument("--all", action="store_true")
    p.add_argument("--n", type=int)
    p.add_argument("--L", type=float)
    p.add_argument("--dt", type=float, help="accepted for symmetry; cases fix their own grids")
    p.add_argument("--tol", type=float, help="replace each case's headline tolerance")
    p.add_argument("-o", "--output", help="also write the reports as JSON")
    p.set_defaults(func=_cmd_reproduce)

    p = sub.add_parser("falsify", help="search a trajectory family for unbounded extraction")
    p.add_argument("-s", "--scenario", required=True)
    p.add_argument("--n-max", type=int, dest="n_max")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--dt", type=float, help="accepted for symmetry; energies use quadrature")
    p.add_argument("--tol", type=float, help="energy and cycle tolerance")
    p.set_defaults(func=_cmd_falsify)

    p = sub.add_parser("drift-sweep", help="coupled-coil drift against inductance")
    p.add_argument("--L", required=True, help="comma-separated inductances")
    p.add_argument("-s", "--scenario", required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--dt", type=float)
    p.add_argument("--tol", type=float, help="ODE step-doubling tolerance")
    p.set_defaults(func=_cmd_drift)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_PARSE
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (OSError, UnicodeDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except SimulationFailure as exc:
        print(f"simulation failed: {exc}", file=sys.stderr)
        return EXIT_SIM


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
