"""Command-line interface.

Subcommands: gen (synthetic instance), solve (run a driver on an LP file),
experiment (figure-style sweeps), reduce (rank reductions).  Exit codes:
0 converged, 1 usage/input error, 2 nonconvergence, 3 numerical failure.
"""

import argparse
import sys

import numpy as np

from . import harness, io, reductions
from .driver import IpmConfig, run
from .errors import (ConvergenceFailureError, FactorizationError, IpmLabError,
                     LeftInteriorError, LpFileError, NumericalError,
                     RankMismatchError)
from .model import PrimalDualPoint
from .rng import rng_for

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NONCONVERGENCE = 2
EXIT_NUMERICAL = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser():
    parser = _Parser(prog="ipm-lab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a synthetic LP with an embedded start")
    gen.add_argument("--m", type=int, required=True)
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)

    solve = sub.add_parser("solve", help="solve an LP file")
    solve.add_argument("input")
    solve.add_argument("--mode", choices=["corrected", "uncorrected", "exact"],
                       default="corrected")
    solve.add_argument("--solver", choices=["pcg", "direct", "perturb"],
                       default="direct")
    solve.add_argument("--eps", type=float, default=0.1)
    solve.add_argument("--solver-tol", type=float, default=None)
    solve.add_argument("--zeta", type=float, default=0.5)
    solve.add_argument("--eta", type=float, default=0.1)
    solve.add_argument("--sketch-cols", type=int, default=None)
    solve.add_argument("--seed", type=int, default=0)
    solve.add_argument("--max-outer", type=int, default=None)
    solve.add_argument("--trace", default=None, help="write per-iteration CSV here")
    solve.add_argument("--out", default=None, help="write solution JSON here")
    solve.add_argument("--gen-start", action="store_true",
                       help="resample a centered start for A, replacing b and c")

    exp = sub.add_parser("experiment", help="run a figure-style sweep")
    exp.add_argument("--figure", type=int, choices=[1, 2, 3, 4], required=True)
    exp.add_argument("--reps", type=int, default=60)
    exp.add_argument("--seed", type=int, default=0)
    exp.add_argument("--out", required=True, help="trial CSV path (summary CSV alongside)")
    exp.add_argument("--threads", type=int, default=None)

    red = sub.add_parser("reduce", help="rank reductions to full-row-rank form")
    red.add_argument("input")
    red.add_argument("--kind", choices=["dual", "lowrank"], required=True)
    red.add_argument("--rank", type=int, default=None)
    red.add_argument("--seed", type=int, default=0)
    red.add_argument("--out", required=True)
    red.add_argument("--record-out", default=None)
    return parser


def cmd_gen(args):
    if args.m > args.n:
        print(f"error: m={args.m} > n={args.n}; generate the transposed shape and "
              "use `ipm-lab reduce --kind dual`", file=sys.stderr)
        return EXIT_USAGE
    lp, start = harness.generate_synthetic_lp(args.m, args.n, args.seed)
    io.save_lp(args.out, lp, init=start,
               provenance={"generator": "synthetic", "seed": args.seed})
    print(f"wrote {args.m}x{args.n} instance to {args.out}")
    return EXIT_OK


def _resample_start(lp, seed):
    """Fresh centered start for A; b and c are replaced to match."""
    rng = rng_for(seed, "instance")
    x0 = rng.uniform(0.0, 10.0, size=lp.n)
    while np.any(x0 == 0.0):
        x0[x0 == 0.0] = rng.uniform(0.0, 10.0, size=int(np.sum(x0 == 0.0)))
    y0 = rng.uniform(-10.0, 10.0, size=lp.m)
    s0 = 20.0 / x0
    new_lp = type(lp)(a=lp.a, b=lp.a @ x0, c=lp.a.T @ y0 + s0)
    return new_lp, PrimalDualPoint(x=x0, y=y0, s=s0)


def cmd_solve(args):
    lp, init, _ = io.load_lp(args.input)
    if init is None:
        if not args.gen_start:
            print("error: LP file has no init point; generate instances with "
                  "`ipm-lab gen`, or pass --gen-start to resample a centered "
                  "start (this replaces b and c)", file=sys.stderr)
            return EXIT_USAGE
        lp, init = _resample_start(lp, args.seed)
        print("note: --gen-start replaced b and c to match the resampled start",
              file=sys.stderr)
    cfg = IpmConfig(epsilon=args.eps, mode=args.mode, solver=args.solver,
                    zeta=args.zeta, eta=args.eta,
                    sketch_cols_override=args.sketch_cols,
                    max_outer=args.max_outer, seed=args.seed,
                    solver_tol=args.solver_tol)
    outcome = run(lp, init, cfg)
    if args.trace:
        outcome.trace.write_csv(args.trace)
    if args.out:
        io.save_solution(args.out, outcome)
    res = outcome.residuals
    print(f"mode={args.mode} solver={args.solver} outer_iterations="
          f"{outcome.outer_iterations} mu={res.duality_measure:.6e} "
          f"primal_infeas={res.primal_infeasibility:.6e} "
          f"dual_infeas={res.dual_infeasibility:.6e} converged={outcome.converged}")
    return EXIT_OK if outcome.converged else EXIT_NONCONVERGENCE


def cmd_experiment(args):
    plan = harness.figure_plan(args.figure, repetitions=args.reps,
                               seed_base=args.seed, output_path=args.out)
    result = harness.run_experiment(plan, threads=args.threads)
    fit = result.fit
    if fit is not None:
        print(f"figure={args.figure} slope={fit.slope:.4f} "
              f"intercept={fit.intercept:.4f} pearson_r={fit.pearson_r:.4f}")
    for s in result.summaries:
        print(f"  n={s.n} eps={s.eps:g} median={s.median_iters:g} "
              f"[{s.q10_iters:g}, {s.q90_iters:g}] failures={s.failures}"
              f"{' FLAGGED' if s.flagged else ''}")
    flagged = any(s.flagged for s in result.summaries)
    return EXIT_NONCONVERGENCE if flagged else EXIT_OK


def cmd_reduce(args):
    lp, _, _ = io.load_lp(args.input)
    if args.kind == "dual":
        reduced, record = reductions.dual_reformulate(lp)
    else:
        if args.rank is None:
            raise UsageError("--kind lowrank requires --rank")
        reduced, record = reductions.low_rank_reduce(lp, args.rank, args.seed)
    io.save_lp(args.out, reduced)
    if args.record_out:
        io.save_reduction_record(args.record_out, record)
    print(f"reduced {lp.m}x{lp.n} -> {reduced.m}x{reduced.n} ({record.kind})")
    return EXIT_OK


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        handler = {"gen": cmd_gen, "solve": cmd_solve,
                   "experiment": cmd_experiment, "reduce": cmd_reduce}[args.command]
        return handler(args)
    except (UsageError, LpFileError, RankMismatchError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConvergenceFailureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except (NumericalError, FactorizationError, LeftInteriorError, IpmLabError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
