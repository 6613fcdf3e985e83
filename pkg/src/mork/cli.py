"""Command-line experiment harness.

Four subcommands write CSV (or plain text for ``graph-report``) to ``--out``
or standard output.  Floats use 17 significant digits and lines end in LF,
so repeated runs with the same flags produce identical bytes.

Exit status: 0 on success, 1 when a scan finds a violation or a run is cut
short by a rejected step, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import io
import math
import sys
from typing import Optional, Sequence

import numpy as np

from mork.conditions import fit_slope
from mork.core import confluent_linear_ivp
from mork.graph import IMPLICIT_COST, computation_plan, graph_report
from mork.methods import CATALOG_NAMES, RKTableau, as_gmork, catalog
from mork.stability import (
    DEFAULT_SEED,
    a_stability_scan,
    half_line_scan,
    l_stability_probe,
)
from mork.stepper import PicardConfig, mork_step, rk_step, step_sequence

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _g(x: float) -> str:
    return f"{x:.17g}"


def _complex_list(text: str) -> list[complex]:
    try:
        return [complex(part.strip().replace(" ", "")) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise UsageError(f"cannot parse {text!r} as a comma-separated list of numbers") from exc


def _method(name: str):
    try:
        return catalog(name)
    except (KeyError, ValueError) as exc:
        raise UsageError(f"{exc.args[0] if exc.args else exc}; known names: {', '.join(CATALOG_NAMES)}") from exc


def _problem(args: argparse.Namespace):
    if args.order < 1:
        raise UsageError("--order must be positive")
    lam = complex(args.lambda_re, args.lambda_im)
    y0 = None
    if args.y0 is not None:
        y0 = _complex_list(args.y0)
        if len(y0) != args.order:
            raise UsageError(f"--y0 needs {args.order} values (rank 1 first)")
    return confluent_linear_ivp(args.order, lam, args.t0, y0)


def _picard(args: argparse.Namespace) -> PicardConfig:
    try:
        return PicardConfig(threshold=args.picard_threshold, max_iter=args.picard_max)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _ranks(args: argparse.Namespace, n: int) -> list[int]:
    if args.rank is None:
        return list(range(1, n + 1))
    if not 1 <= args.rank <= n:
        raise UsageError(f"--rank must lie in 1..{n}")
    return [args.rank]


def cmd_order_sweep(args: argparse.Namespace, out: io.StringIO) -> int:
    method = _method(args.method)
    ivp = _problem(args)
    if args.h_count < 2:
        raise UsageError("--h-count must be at least 2")
    if not 0 < args.h_min < args.h_max:
        raise UsageError("need 0 < --h-min < --h-max")
    hs = np.logspace(math.log10(args.h_min), math.log10(args.h_max), args.h_count)
    cfg = _picard(args)
    ranks = _ranks(args, ivp.n)
    errors = np.empty((hs.size, ivp.n))
    for i, h in enumerate(hs):
        if isinstance(method, RKTableau):
            res = rk_step(method, None, ivp, ivp.t0, ivp.y0, float(h), cfg)
        else:
            res = mork_step(method, None, ivp, ivp.t0, ivp.y0, float(h), cfg)
        errors[i] = np.abs(res.final[0] - ivp.exact(ivp.t0 + h)[0])
    out.write(",".join(["h"] + [f"abs_error_rank{N}" for N in ranks]) + "\n")
    for h, row in zip(hs, errors):
        out.write(",".join([_g(h)] + [_g(row[N - 1]) for N in ranks]) + "\n")
    scale = float(np.max(np.abs(ivp.y0)))
    for N in ranks:
        fit = fit_slope(hs, errors[:, N - 1], N, scale)
        out.write(
            f"# fit rank={N} slope={_g(fit.slope)} order={_g(fit.order)} "
            f"points={fit.used} verdict={fit.verdict}\n"
        )
    return EXIT_OK


def cmd_trajectory(args: argparse.Namespace, out: io.StringIO) -> int:
    method = _method(args.method)
    ivp = _problem(args)
    if args.steps < 0 or not args.h > 0:
        raise UsageError("need --steps >= 0 and --h > 0")
    ranks = _ranks(args, ivp.n)
    traj = step_sequence(method, ivp, [args.h] * args.steps, _picard(args))
    head = ["t"]
    for N in ranks:
        head += [f"rank{N}_re", f"rank{N}_im", f"exact{N}_re", f"exact{N}_im", f"abs_error{N}"]
    out.write(",".join(head + ["picard_iterations", "converged"]) + "\n")
    for q, (t, y) in enumerate(zip(traj.times, traj.jets)):
        exact = ivp.exact(t)[0]
        cells = [_g(t)]
        for N in ranks:
            v, e = complex(y[0, N - 1]), complex(exact[N - 1])
            cells += [_g(v.real), _g(v.imag), _g(e.real), _g(e.imag), _g(abs(v - e))]
        if q == 0:
            cells += ["0", "true"]
        else:
            o = traj.outcomes[q - 1]
            cells += [str(sum(o.iterations)), str(o.converged).lower()]
        out.write(",".join(cells) + "\n")
    if traj.rejected is not None:
        print(f"step rejected: {traj.rejected}", file=sys.stderr)
        return EXIT_VIOLATION
    flagged = sum(1 for c in traj.converged if not c)
    if flagged:
        print(f"{flagged} step(s) stopped before the Picard threshold was met", file=sys.stderr)
    return EXIT_OK


def cmd_stability_scan(args: argparse.Namespace, out: io.StringIO) -> int:
    method = _method(args.method)
    n = args.order
    if n < 1:
        raise UsageError("--order must be positive")
    caveat = "scans sample finitely many points; 'no violation found' is not a proof"
    if args.notion == "l":
        mags = np.logspace(0, 4, args.h_count if args.h_count else 9)
        probe = l_stability_probe(method, n, mags)
        out.write(probe.to_csv())
        verdict = "decaying" if probe.decaying else "not decaying"
        print(f"l: {verdict}; final max |R|={_g(probe.norms[-1])} ({caveat})", file=sys.stderr)
        return EXIT_OK if probe.decaying else EXIT_VIOLATION
    if args.notion == "half-line":
        if args.direction is None:
            raise UsageError("--notion half-line needs --direction")
        direction = _complex_list(args.direction)
        if len(direction) != n:
            raise UsageError(f"--direction needs {n} components")
        hs = np.logspace(-3, 6, args.h_count) if args.h_count else None
        try:
            report = half_line_scan(method, n, direction, hs)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    else:
        report = a_stability_scan(method, n, strict=args.notion == "absolute-a", seed=args.seed)
    out.write(report.to_csv())
    print(report.summary(), file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_VIOLATION


def cmd_graph_report(args: argparse.Namespace, out: io.StringIO) -> int:
    method = _method(args.method)
    if isinstance(method, RKTableau):
        method = as_gmork(method)
        n = 1
    else:
        n = args.order
    plan = computation_plan(method, n, implicit_cost=IMPLICIT_COST, unit_costs=args.cost == "unit")
    out.write(graph_report(method, n, plan))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--method", required=True, help="catalog name, e.g. mork-euler or emork-2-3-2:0.5")
    common.add_argument("--order", type=int, default=1, help="order n of the problem or stability matrix (default 1)")
    common.add_argument("--lambda-re", type=float, default=-0.5, help="real part of the confluent root (default -0.5)")
    common.add_argument("--lambda-im", type=float, default=1.0, help="imaginary part of the confluent root (default 1)")
    common.add_argument("--t0", type=float, default=0.0, help="initial time (default 0)")
    common.add_argument(
        "--y0", default=None, help="initial jet, comma-separated, rank 1 first (default: jet of exp(lambda t))"
    )
    common.add_argument("--h-min", type=float, default=1e-3, help="smallest step of the sweep (default 1e-3)")
    common.add_argument("--h-max", type=float, default=1e-1, help="largest step of the sweep (default 1e-1)")
    common.add_argument(
        "--h-count", type=int, default=None, help="number of grid points (sweep default 20; scans use their own grids)"
    )
    common.add_argument("--h", type=float, default=0.5, help="constant step of a trajectory (default 0.5)")
    common.add_argument("--steps", type=int, default=30, help="number of trajectory steps (default 30)")
    common.add_argument("--rank", type=int, default=None, help="report only this rank (default: all)")
    common.add_argument("--out", default=None, help="output file (default: standard output)")
    common.add_argument("--picard-threshold", type=float, default=1e-12, help="Picard stopping threshold (default 1e-12)")
    common.add_argument("--picard-max", type=int, default=200, help="maximum Picard sweeps (default 200)")
    common.add_argument("--seed", type=lambda x: int(x, 0), default=DEFAULT_SEED, help="scan seed (default 0x5EED)")
    common.add_argument(
        "--notion", choices=["a", "absolute-a", "l", "half-line"], default="a", help="stability notion (default a)"
    )
    common.add_argument("--direction", default=None, help="half-line direction, comma-separated")
    common.add_argument(
        "--cost", choices=["unit", "estimate"], default="estimate", help="block costs for graph priorities"
    )

    parser = argparse.ArgumentParser(prog="mork", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, func, text in (
        ("order-sweep", cmd_order_sweep, "one step per h on a confluent problem, errors and fitted slopes"),
        ("trajectory", cmd_trajectory, "constant-step run on a confluent problem"),
        ("stability-scan", cmd_stability_scan, "sample the stability matrix for one notion"),
        ("graph-report", cmd_graph_report, "stage digraph, blocks and priorities"),
    ):
        p = sub.add_parser(name, parents=[common], help=text, description=text)
        p.set_defaults(func=func)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    if args.command == "order-sweep" and args.h_count is None:
        args.h_count = 20
    buf = io.StringIO()
    try:
        code = args.func(args, buf)
    except UsageError as exc:
        print(f"mork: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = buf.getvalue()
    if args.out is None:
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
