"""Synthetic instances and scaling experiments.

The generator samples an LP together with an exactly feasible, exactly
centered interior start: A and y0 uniform on [-10, 10], x0 uniform on
(0, 10], s0 = 20/x0 (so mu0 = 20 and the central-path distance is 0), then
b := A x0 and c := A^T y0 + s0.

Experiment plans sweep either n at fixed epsilon (outer iterations vs
sqrt(n)) or epsilon at fixed n (outer iterations vs ln(1/epsilon)), run many
seeded repetitions per grid point, and fit an ordinary least-squares line
through the per-point medians.
"""

import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .driver import IpmConfig, run
from .errors import DegenerateFitError
from .model import LinearProgram, PrimalDualPoint
from .rng import derive_seed, rng_for

FIGURE_N_GRID = [40, 80, 160, 320, 640]
FIGURE_EPS_GRID = [1e-1, 1e-2, 1e-3, 1e-4]
FAILURE_FLAG_FRACTION = 0.10

TRIAL_CSV_COLUMNS = ["regressor", "n", "m", "eps", "seed", "outer_iters",
                     "primal_infeas", "dual_infeas", "mean_inner_iters", "converged"]


def generate_synthetic_lp(m, n, seed):
    """Sample (LinearProgram, PrimalDualPoint) with mu0 = 20, centered start."""
    if m > n:
        raise ValueError(f"generator expects m <= n, got {m}x{n}")
    rng = rng_for(seed, "instance")
    a = rng.uniform(-10.0, 10.0, size=(m, n))
    x0 = rng.uniform(0.0, 10.0, size=n)
    while np.any(x0 == 0.0):  # probability-zero, but s0 = 20/x0 must be finite
        x0[x0 == 0.0] = rng.uniform(0.0, 10.0, size=int(np.sum(x0 == 0.0)))
    y0 = rng.uniform(-10.0, 10.0, size=m)
    s0 = 20.0 / x0
    lp = LinearProgram(a=a, b=a @ x0, c=a.T @ y0 + s0)
    return lp, PrimalDualPoint(x=x0, y=y0, s=s0)


@dataclass
class ExperimentPlan:
    """One figure-style sweep."""

    figure: int
    m: int
    repetitions: int
    mode: str = "corrected"
    solver: str = "perturb"
    n_grid: Optional[list] = None      # sweep n at fixed epsilon
    eps_grid: Optional[list] = None    # sweep epsilon at fixed n
    epsilon: Optional[float] = None
    n: Optional[int] = None
    solver_tol: Optional[float] = None
    tol_equals_eps: bool = False
    zeta: float = 0.5
    eta: float = 0.1
    sketch_cols: Optional[int] = None
    seed_base: int = 0
    output_path: Optional[str] = None

    def __post_init__(self):
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if (self.n_grid is None) == (self.eps_grid is None):
            raise ValueError("exactly one of n_grid / eps_grid must be set")
        grid = self.n_grid if self.n_grid is not None else self.eps_grid
        if not grid or any(g <= 0 for g in grid):
            raise ValueError("grid must be nonempty and positive")

    def grid_points(self):
        """[(regressor, n, eps), ...] in sweep order."""
        if self.n_grid is not None:
            return [(math.sqrt(n), int(n), float(self.epsilon)) for n in self.n_grid]
        return [(math.log(1.0 / e), int(self.n), float(e)) for e in self.eps_grid]


def figure_plan(figure, repetitions=60, seed_base=0, output_path=None):
    """Default plans matching the four reported experiment configurations."""
    if figure == 1:
        return ExperimentPlan(figure=1, m=20, repetitions=repetitions,
                              solver="perturb", n_grid=list(FIGURE_N_GRID),
                              epsilon=0.1, solver_tol=0.001,
                              seed_base=seed_base, output_path=output_path)
    if figure == 2:
        return ExperimentPlan(figure=2, m=30, repetitions=repetitions,
                              solver="perturb", eps_grid=list(FIGURE_EPS_GRID),
                              n=70, tol_equals_eps=True,
                              seed_base=seed_base, output_path=output_path)
    if figure == 3:
        return ExperimentPlan(figure=3, m=20, repetitions=repetitions,
                              solver="pcg", n_grid=list(FIGURE_N_GRID),
                              epsilon=0.1, solver_tol=0.001,
                              zeta=0.5, sketch_cols=60,
                              seed_base=seed_base, output_path=output_path)
    if figure == 4:
        return ExperimentPlan(figure=4, m=30, repetitions=repetitions,
                              solver="pcg", eps_grid=list(FIGURE_EPS_GRID),
                              n=70, tol_equals_eps=True,
                              zeta=0.5, sketch_cols=60,
                              seed_base=seed_base, output_path=output_path)
    raise ValueError("figure must be 1, 2, 3 or 4")


@dataclass
class FitResult:
    slope: float
    intercept: float
    pearson_r: float
    degenerate: bool = False


def fit_linearity(xs, ys):
    """Ordinary least squares plus Pearson correlation of ys against xs."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.size < 3:
        raise ValueError("need at least 3 points")
    if np.ptp(xs) == 0.0:
        raise DegenerateFitError("constant regressor")
    slope, intercept = np.polyfit(xs, ys, 1)
    if np.ptp(ys) == 0.0:
        return FitResult(slope=0.0, intercept=float(ys[0]), pearson_r=0.0,
                         degenerate=True)
    r = float(np.corrcoef(xs, ys)[0, 1])
    return FitResult(slope=float(slope), intercept=float(intercept), pearson_r=r)


@dataclass
class GridPointSummary:
    regressor: float
    n: int
    eps: float
    median_iters: float
    q10_iters: float
    q90_iters: float
    mean_primal_infeas: float
    mean_inner_iters: float
    failures: int
    flagged: bool


@dataclass
class ExperimentResult:
    plan: ExperimentPlan
    trials: list                  # one dict per (grid point, repetition)
    summaries: list               # GridPointSummary per grid point
    fit: Optional[FitResult]
    traces: list = field(default_factory=list)  # IterationTrace, when kept


def _trial(args):
    (m, n, eps, mode, solver, solver_tol, zeta, eta, sketch_cols,
     seed_base, grid_idx, trial_idx, regressor, keep_trace) = args
    instance_seed = derive_seed(seed_base, "instance", grid_idx, trial_idx)
    run_seed = derive_seed(seed_base, "run", grid_idx, trial_idx)
    lp, start = generate_synthetic_lp(m, n, instance_seed)
    cfg = IpmConfig(epsilon=eps, mode=mode, solver=solver, zeta=zeta, eta=eta,
                    sketch_cols_override=sketch_cols, seed=run_seed,
                    solver_tol=solver_tol)
    outcome = run(lp, start, cfg)
    inner = [r.predictor_inner + r.corrector_inner for r in outcome.trace]
    row = {
        "regressor": regressor, "n": n, "m": m, "eps": eps, "seed": instance_seed,
        "outer_iters": outcome.outer_iterations,
        "primal_infeas": outcome.residuals.primal_infeasibility,
        "dual_infeas": outcome.residuals.dual_infeasibility,
        "mean_inner_iters": (sum(inner) / (2.0 * len(inner))) if inner else 0.0,
        "converged": outcome.converged,
        "solver_tol": outcome.solver_tol,
    }
    return row, (outcome.trace if keep_trace else None)


def _thread_count(threads):
    if threads is not None:
        return max(int(threads), 1)
    return max(int(os.environ.get("IPM_LAB_THREADS", "1")), 1)


def run_experiment(plan, threads=None, keep_traces=False):
    """Run every (grid point, repetition) trial and aggregate the medians."""
    jobs = []
    for gi, (regressor, n, eps) in enumerate(plan.grid_points()):
        tol = eps if plan.tol_equals_eps else plan.solver_tol
        for ti in range(plan.repetitions):
            jobs.append((plan.m, n, eps, plan.mode, plan.solver, tol,
                         plan.zeta, plan.eta, plan.sketch_cols,
                         plan.seed_base, gi, ti, regressor, keep_traces))

    workers = _thread_count(threads)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outputs = list(pool.map(_trial, jobs, chunksize=4))
    else:
        outputs = [_trial(job) for job in jobs]

    trials = [row for row, _ in outputs]
    traces = [tr for _, tr in outputs] if keep_traces else []

    summaries = []
    for regressor, n, eps in plan.grid_points():
        rows = [r for r in trials if r["n"] == n and r["eps"] == eps]
        ok = [r for r in rows if r["converged"]]
        failures = len(rows) - len(ok)
        iters = np.array([r["outer_iters"] for r in ok], dtype=float)
        summaries.append(GridPointSummary(
            regressor=regressor, n=n, eps=eps,
            median_iters=float(np.median(iters)) if iters.size else float("nan"),
            q10_iters=float(np.quantile(iters, 0.10)) if iters.size else float("nan"),
            q90_iters=float(np.quantile(iters, 0.90)) if iters.size else float("nan"),
            mean_primal_infeas=float(np.mean([r["primal_infeas"] for r in ok]))
            if ok else float("nan"),
            mean_inner_iters=float(np.mean([r["mean_inner_iters"] for r in ok]))
            if ok else float("nan"),
            failures=failures,
            flagged=failures > FAILURE_FLAG_FRACTION * max(len(rows), 1),
        ))

    fit = None
    pts = [(s.regressor, s.median_iters) for s in summaries if np.isfinite(s.median_iters)]
    if len(pts) >= 3:
        fit = fit_linearity([p[0] for p in pts], [p[1] for p in pts])

    result = ExperimentResult(plan=plan, trials=trials, summaries=summaries,
                              fit=fit, traces=traces)
    if plan.output_path:
        write_trials_csv(plan.output_path, trials)
        root, ext = os.path.splitext(plan.output_path)
        write_summary_csv(f"{root}_summary{ext or '.csv'}", result)
    return result


def write_trials_csv(path, trials):
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=TRIAL_CSV_COLUMNS, extrasaction="ignore")
        writer.writeheader()
        for row in trials:
            writer.writerow(row)


def write_summary_csv(path, result):
    fields = ["regressor", "n", "eps", "median_iters", "q10_iters", "q90_iters",
              "mean_primal_infeas", "mean_inner_iters", "failures", "flagged",
              "fit_slope", "fit_intercept", "fit_pearson_r"]
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        for s in result.summaries:
            row = {k: getattr(s, k) for k in fields[:10]}
            if result.fit is not None:
                row.update(fit_slope=result.fit.slope,
                           fit_intercept=result.fit.intercept,
                           fit_pearson_r=result.fit.pearson_r)
            writer.writerow(row)
