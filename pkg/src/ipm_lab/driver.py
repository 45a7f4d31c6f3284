"""Outer-loop predictor-corrector drivers.

Three variants share one loop:

- corrected:   error-adjusted inexact steps (Solve^v); every step keeps the
  primal residual unchanged because A dx = 0 exactly,
- uncorrected: plain inexact steps (Solve) whose residual f leaks into the
  primal infeasibility, bounded by the telescoped 2*k*delta,
- exact:       direct normal-equation solves, the baseline oracle.

Each outer iteration is a predictor (sigma=0, adaptive alpha) followed by a
corrector (sigma=1, alpha=1); the loop runs while mu > 2*epsilon.  Iterates
are steered inside the l2 neighborhoods: predictor output in N2(0.5),
corrector output in N2(0.25).
"""

import csv
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InvalidStartError, NumericalError
from .model import (LinearProgram, PrimalDualPoint, duality_measure,
                    neighborhood_check, residuals, validate_full_rank)
from .normal_eq import (StepDirection, build_normal_matrix, build_p,
                        complete_step_corrected, complete_step_uncorrected,
                        cross_term_bound, near_boundary)
from .linalg import solve_spd
from .pcg import perturbation_solve_v, solve as pcg_solve_plain, solve_v as pcg_solve_v
from .rng import derive_seed

C0_CORRECTED = 0.14
C0_UNCORRECTED = math.sqrt(0.14) - 1.0 / 256.0
THETA_START = 0.25
THETA_PRED = 0.5
MAX_BACKTRACKS = 6
START_FEAS_TOL = 1e-6

MODES = ("corrected", "uncorrected", "exact")
SOLVERS = ("pcg", "direct", "perturb")


@dataclass
class IpmConfig:
    """Driver configuration."""

    epsilon: float
    mode: str = "corrected"
    solver: str = "direct"
    zeta: float = 0.5
    eta: float = 0.1
    sketch_cols_override: Optional[int] = None
    max_outer: Optional[int] = None
    seed: int = 0
    solver_tol: Optional[float] = None  # None = the algorithm's own formula

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.solver not in SOLVERS:
            raise ValueError(f"solver must be one of {SOLVERS}")
        if self.mode != "corrected" and self.solver == "perturb":
            raise ValueError("the perturbation solver applies to the corrected mode only")
        if self.max_outer is not None and self.max_outer < 1:
            raise ValueError("max_outer must be >= 1")


@dataclass
class IterationRecord:
    """One outer iteration of the trace."""

    k: int
    mu: float                    # duality measure entering the iteration
    alpha: float                 # accepted predictor step size
    predictor_inner: int
    corrector_inner: int
    error_norm_pred: float       # ||v||_2 (corrected) or ||f||_2 (uncorrected)
    error_norm_corr: float
    primal_infeasibility: float  # after the full iteration
    dual_infeasibility: float
    dist_after_predictor: float
    dist_after_corrector: float
    mu_after_predictor: float
    mu_after_corrector: float
    backtracks: int
    near_boundary: bool
    predictor_in_n05: bool
    corrector_in_n025: bool
    cross_monitor_ok: bool


@dataclass
class IterationTrace:
    records: list = field(default_factory=list)

    def append(self, record):
        self.records.append(record)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def to_rows(self):
        return [vars(r) for r in self.records]

    def write_csv(self, path):
        fields = [f for f in IterationRecord.__dataclass_fields__]
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=fields)
            writer.writeheader()
            for row in self.to_rows():
                writer.writerow(row)


@dataclass
class SolveOutcome:
    point: PrimalDualPoint
    residuals: object
    trace: IterationTrace
    converged: bool
    outer_iterations: int
    solver_tol: float


def predictor_step_size(mu, cross_norm):
    """alpha = min{1/2, sqrt(mu / (16 ||dx*ds||_2))}; 1/2 when the cross term vanishes."""
    if mu <= 0:
        raise ValueError("mu must be positive")
    if cross_norm < 0:
        raise ValueError("cross_norm must be nonnegative")
    if cross_norm == 0.0:
        return 0.5
    return min(0.5, math.sqrt(mu / (16.0 * cross_norm)))


def uncorrected_tolerance(epsilon, n, mu0):
    """delta_{eps,n} = min{sqrt(eps)/2^6, eps*C0/(2 sqrt(n) log(mu0/eps))}."""
    log_term = max(math.log(mu0 / epsilon), 1.0)
    return min(math.sqrt(epsilon) / 64.0,
               epsilon * C0_UNCORRECTED / (2.0 * math.sqrt(n) * log_term))


def default_max_outer(n, mu0, epsilon):
    """3x the closed-form recurrence bound (smaller C0), plus slack."""
    log_term = max(math.log(mu0 / epsilon), 1.0)
    return math.ceil(3.0 * (math.sqrt(n) / C0_CORRECTED) * log_term) + 10


def recurrence_bound(mu0, n, c0, c1, eps, k):
    """Closed-form upper bound on mu_k for mu_{j+1} <= (1-c0/sqrt(n))mu_j + c1*eps."""
    if not (0.0 < c0 < 1.0):
        raise ValueError("c0 must lie in (0, 1)")
    xi = 1.0 - c0 / math.sqrt(n)
    if not (0.0 <= c1 < c0 / math.sqrt(n)):
        raise ValueError("c1 must lie in [0, c0/sqrt(n))")
    return eps * (c1 / (c0 / math.sqrt(n))) + xi**k * mu0


def _solve_step(lp, point, sigma, mode, cfg, delta, k, phase):
    """One linear-system solve, dispatched on (mode, solver)."""
    if mode == "exact" or cfg.solver == "direct":
        dy = solve_spd(build_normal_matrix(lp, point), build_p(lp, point, sigma))
        v = None if mode != "corrected" else np.zeros(lp.n)
        return dy, v, 0, 0.0
    if mode == "corrected":
        if cfg.solver == "perturb":
            rep = perturbation_solve_v(lp, point, sigma, delta,
                                       seed=derive_seed(cfg.seed, "iteration", k, phase))
        else:
            rep = pcg_solve_v(lp, point, sigma, delta, zeta=cfg.zeta, eta=cfg.eta,
                              seed=derive_seed(cfg.seed, "sketch", k, phase),
                              cols_override=cfg.sketch_cols_override)
        return rep.dy, rep.v, rep.inner_iterations, float(np.linalg.norm(rep.v))
    # uncorrected + pcg
    rep = pcg_solve_plain(lp, point, sigma, delta, zeta=cfg.zeta, eta=cfg.eta,
                          seed=derive_seed(cfg.seed, "sketch", k, phase),
                          cols_override=cfg.sketch_cols_override)
    return rep.dy, None, rep.inner_iterations, rep.plain_residual


def _complete(lp, point, sigma, dy, v, mode):
    if mode == "corrected":
        return complete_step_corrected(lp, point, sigma, dy, v)
    return complete_step_uncorrected(lp, point, sigma, dy)


def _advance(point, step, alpha):
    """point + alpha*step, or None if it leaves the strict interior."""
    x = point.x + alpha * step.dx
    s = point.s + alpha * step.ds
    if np.any(x <= 0.0) or np.any(s <= 0.0):
        return None
    return PrimalDualPoint(x=x, y=point.y + alpha * step.dy, s=s)


def _run(lp, start, cfg, mode):
    validate_full_rank(lp)
    mu0 = duality_measure(start)
    trace = IterationTrace()

    if mu0 <= 2.0 * cfg.epsilon:
        return SolveOutcome(point=start, residuals=residuals(lp, start), trace=trace,
                            converged=True, outer_iterations=0, solver_tol=0.0)

    status = neighborhood_check(start, THETA_START)
    if not status.member:
        raise InvalidStartError(
            f"start outside N2({THETA_START}): distance {status.distance:.3e} vs "
            f"{THETA_START * mu0:.3e}"
        )
    res0 = residuals(lp, start)
    feas_scale = 1.0 + np.linalg.norm(lp.b) + np.linalg.norm(lp.c)
    if res0.primal_infeasibility > START_FEAS_TOL * feas_scale or \
            res0.dual_infeasibility > START_FEAS_TOL * feas_scale:
        raise InvalidStartError(
            f"start not primal-dual feasible: residuals "
            f"({res0.primal_infeasibility:.3e}, {res0.dual_infeasibility:.3e})"
        )

    if cfg.solver_tol is not None:
        delta = cfg.solver_tol
    elif mode == "corrected":
        delta = cfg.epsilon / 2.0**7
    elif mode == "uncorrected":
        delta = uncorrected_tolerance(cfg.epsilon, lp.n, mu0)
    else:
        delta = 0.0

    max_outer = cfg.max_outer or default_max_outer(lp.n, mu0, cfg.epsilon)

    point = start
    mu = mu0
    k = 0
    converged = False
    while True:
        if mu <= 2.0 * cfg.epsilon:
            converged = True
            break
        if k >= max_outer:
            break

        theta_here = min(neighborhood_check(point, 1.0).distance / mu, 0.999)

        # predictor: sigma = 0, adaptive step length
        dy, v, pred_inner, err_pred = _solve_step(lp, point, 0.0, mode, cfg, delta, k, 0)
        step = _complete(lp, point, 0.0, dy, v, mode)
        cross = float(np.linalg.norm(step.dx * step.ds))
        cross_ok = _cross_monitor_ok(mode, cfg, cross, lp.n, theta_here, 0.0, mu, step, point)
        alpha = predictor_step_size(mu, cross)

        backtracks = 0
        mid = None
        while backtracks <= MAX_BACKTRACKS:
            candidate = _advance(point, step, alpha)
            if candidate is not None:
                cand_mu = duality_measure(candidate)
                if neighborhood_check(candidate, THETA_PRED).distance <= THETA_PRED * cand_mu:
                    mid = candidate
                    break
            alpha *= 0.5
            backtracks += 1
        if mid is None:
            raise NumericalError(
                f"predictor iterate left N2({THETA_PRED}) after {MAX_BACKTRACKS} backtracks"
            )
        mu_pred = duality_measure(mid)
        dist_pred = neighborhood_check(mid, THETA_PRED).distance
        in_n05 = dist_pred <= THETA_PRED * mu_pred

        # corrector: sigma = 1, full step
        dy, v, corr_inner, err_corr = _solve_step(lp, mid, 1.0, mode, cfg, delta, k, 1)
        cstep = _complete(lp, mid, 1.0, dy, v, mode)
        point = _advance(mid, cstep, 1.0)
        if point is None:
            # constructor-level check gives the offending index
            PrimalDualPoint(x=mid.x + cstep.dx, y=mid.y + cstep.dy, s=mid.s + cstep.ds)
        mu = duality_measure(point)
        dist_corr = neighborhood_check(point, THETA_START).distance
        res = residuals(lp, point)
        trace.append(IterationRecord(
            k=k, mu=trace.records[-1].mu_after_corrector if trace.records else mu0,
            alpha=alpha,
            predictor_inner=pred_inner, corrector_inner=corr_inner,
            error_norm_pred=err_pred, error_norm_corr=err_corr,
            primal_infeasibility=res.primal_infeasibility,
            dual_infeasibility=res.dual_infeasibility,
            dist_after_predictor=dist_pred, dist_after_corrector=dist_corr,
            mu_after_predictor=mu_pred, mu_after_corrector=mu,
            backtracks=backtracks, near_boundary=near_boundary(point),
            predictor_in_n05=bool(in_n05),
            corrector_in_n025=bool(dist_corr <= THETA_START * mu),
            cross_monitor_ok=cross_ok,
        ))
        k += 1

    return SolveOutcome(point=point, residuals=residuals(lp, point), trace=trace,
                        converged=converged, outer_iterations=k, solver_tol=delta)


def _cross_monitor_ok(mode, cfg, cross, n, theta, sigma, mu, step, point):
    """One-sided cross-term monitor, with the error-dependent slack terms."""
    base = cross_term_bound(n, theta, sigma, mu)
    head = math.sqrt((theta**2 + n * (1.0 - sigma) ** 2) * mu / (1.0 - theta))
    if mode == "exact" or cfg.solver == "direct":
        return cross <= base * (1.0 + 1e-9) + 1e-12
    if mode == "corrected":
        e = float(np.linalg.norm(step.correction / np.sqrt(point.x * point.s)))
        bound = base + 3.0 * head * e + 2.0 * e**2
        return cross <= bound * (1.0 + 1e-9) + 1e-12
    # uncorrected iterative mode: ||(AD)^+ f|| is a proof device; monitor disabled
    return True


def run_corrected(lp, start, cfg):
    """Error-adjusted inexact predictor-corrector."""
    return _run(lp, start, cfg, "corrected")


def run_uncorrected(lp, start, cfg):
    """Inexact predictor-corrector without error adjustment."""
    return _run(lp, start, cfg, "uncorrected")


def run_exact(lp, start, cfg):
    """Exact-solve baseline."""
    return _run(lp, start, cfg, "exact")


def run(lp, start, cfg):
    """Dispatch on cfg.mode."""
    return _run(lp, start, cfg, cfg.mode)
