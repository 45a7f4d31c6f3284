"""Preconditioned conjugate gradient on the normal equations.

The preconditioner comes from a sketched factorization: with W a sparse
sketch, Q = (ADW)(ADW)^T and Q^{-1/2} = U_Q diag(1/sigma_i(ADW)) U_Q^T.  CG
runs on the symmetrically preconditioned system

    Q^{-1/2} A D^2 A^T Q^{-1/2} z = Q^{-1/2} p,     dy = Q^{-1/2} z.

Three entry points wrap the iteration:

- solve:   inexact dy with both the energy-norm and l2 residual guarantees,
- solve_v: (dy, v) where the correction v makes (dy, v) an exact solution of
  the modified system A D^2 A^T dy = p + A S^{-1} v with ||v||_2 <= delta,
- perturbation_solve_v: the experimental variant that samples v uniformly on
  the radius-delta sphere and solves the modified system directly.
"""

import math
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConvergenceFailureError, NumericalError, SketchTooWideError
from .linalg import ThinSvd, pinv_apply, solve_spd, thin_svd
from .model import duality_measure
from .normal_eq import build_normal_matrix, build_p, inv_s, scaling_d2
from .rng import derive_seed, rng_for
from .sketch import SketchMatrix, build_sketch, identity_sketch

CAP_MULTIPLIER = 10
RESKETCH_ATTEMPTS = 3
THETA_REF = 0.25  # neighborhood radius used in the iteration-cap estimate


@dataclass(frozen=True, eq=False)
class Preconditioner:
    """Factored Q^{-1/2} plus the retained SVD of ADW."""

    u_q: np.ndarray              # (m, m) orthogonal
    inv_sqrt_sigma: np.ndarray   # (m,) = 1/sigma_i(ADW), strictly positive
    source_sketch: SketchMatrix
    adw_svd: ThinSvd

    @property
    def sigma_max_q_half(self):
        """sigma_max(Q^{1/2}) = largest singular value of ADW."""
        return float(self.adw_svd.sigma[0])

    def apply_inv_sqrt(self, vec):
        return self.u_q @ (self.inv_sqrt_sigma * (self.u_q.T @ vec))

    def apply_sqrt(self, vec):
        return self.u_q @ ((1.0 / self.inv_sqrt_sigma) * (self.u_q.T @ vec))


@dataclass(eq=False)
class SolveReport:
    """Outcome of one linear-system solve."""

    dy: np.ndarray
    v: Optional[np.ndarray]
    inner_iterations: int
    preconditioned_residual: float
    plain_residual: float
    wall_time: float
    residual_history: Optional[list] = None


def normal_matvec(lp, p0, vec):
    """(A D^2 A^T) vec without forming the m-by-m matrix."""
    return lp.a @ (scaling_d2(p0) * (lp.a.T @ vec))


def build_preconditioner(lp, p0, zeta, eta, seed, cols_override=None):
    """Sketch AD and factor Q = (ADW)(ADW)^T; resketch on rank deficiency."""
    ad = lp.a * np.sqrt(scaling_d2(p0))
    m, n = ad.shape
    last_err = None
    for attempt in range(RESKETCH_ATTEMPTS):
        sk_seed = seed if attempt == 0 else derive_seed(seed, "resketch", attempt)
        try:
            w_mat = build_sketch(n, m, zeta, eta, sk_seed, cols_override=cols_override)
        except SketchTooWideError:
            w_mat = identity_sketch(n)
        adw = w_mat.right_multiply(ad)
        svd = thin_svd(adw)
        if svd.sigma.size >= m and svd.sigma[m - 1] > 1e-12 * svd.sigma[0]:
            return Preconditioner(
                u_q=svd.u,
                inv_sqrt_sigma=1.0 / svd.sigma[:m],
                source_sketch=w_mat,
                adw_svd=svd,
            )
        last_err = NumericalError(
            f"ADW rank deficient after sketch attempt {attempt + 1}"
        )
    raise last_err


def pcg_solve(precond, lp, p0, rhs, target, max_iters,
              absolute=False, extra_stop=None, recompute_every=50):
    """CG on the preconditioned normal equations.

    Stops when the preconditioned residual drops below target (relative to
    ||Q^{-1/2} rhs||_2 unless absolute=True), or when extra_stop(z, r) is
    truthy.  Raises on hitting max_iters, carrying the residual history.
    """
    rhs = np.asarray(rhs, dtype=float)
    t_start = time.perf_counter()
    d2 = scaling_d2(p0)

    def matvec(z):
        t = precond.apply_inv_sqrt(z)
        return precond.apply_inv_sqrt(lp.a @ (d2 * (lp.a.T @ t)))

    rhs_t = precond.apply_inv_sqrt(rhs)
    rhs_t_norm = float(np.linalg.norm(rhs_t))
    if rhs_t_norm == 0.0:
        return SolveReport(dy=np.zeros(lp.m), v=None, inner_iterations=0,
                           preconditioned_residual=0.0, plain_residual=float(np.linalg.norm(rhs)),
                           wall_time=time.perf_counter() - t_start, residual_history=[0.0])
    threshold = target if absolute else target * rhs_t_norm

    z = np.zeros_like(rhs_t)
    r = rhs_t.copy()
    d = r.copy()
    rr = float(r @ r)
    rnorm = math.sqrt(rr)
    history = [rnorm]
    restarted = False
    it = 0
    while True:
        if rnorm <= threshold:
            break
        if extra_stop is not None and extra_stop(z, r):
            break
        if it >= max_iters:
            raise ConvergenceFailureError(
                f"pcg_solve: cap {max_iters} reached at residual {rnorm:.3e}",
                residual_history=history,
            )
        q = matvec(d)
        den = float(d @ q)
        if den <= 0.0 or not math.isfinite(den):
            if restarted:
                raise NumericalError(f"pcg_solve: CG breakdown (curvature {den})")
            restarted = True
            r = rhs_t - matvec(z)
            d = r.copy()
            rr = float(r @ r)
            rnorm = math.sqrt(rr)
            continue
        alpha = rr / den
        z += alpha * d
        it += 1
        if it % recompute_every == 0:
            r = rhs_t - matvec(z)
        else:
            r -= alpha * q
        rr_new = float(r @ r)
        rnorm = math.sqrt(rr_new)
        history.append(rnorm)
        d = r + (rr_new / rr) * d
        rr = rr_new

    dy = precond.apply_inv_sqrt(z)
    plain = float(np.linalg.norm(normal_matvec(lp, p0, dy) - rhs))
    return SolveReport(dy=dy, v=None, inner_iterations=it,
                       preconditioned_residual=rnorm, plain_residual=plain,
                       wall_time=time.perf_counter() - t_start,
                       residual_history=history)


def iteration_cap(delta, sigma, n, mu, zeta, m):
    """Hard cap derived from the geometric-decay rate and the rhs-norm bound."""
    c_bound = sigma * math.sqrt(2.0 / (1.0 - THETA_REF)) + math.sqrt(2.0)
    base = c_bound * math.sqrt(max(n * mu, 1e-30))
    if delta < base:
        cap = CAP_MULTIPLIER * math.ceil(math.log(delta / base) / math.log(zeta))
    else:
        cap = CAP_MULTIPLIER
    return max(cap, m + 5, CAP_MULTIPLIER)


def make_correction(precond, lp, p0, dy, p_vec):
    """v = (XS)^{1/2} W (ADW)^+ (A D^2 A^T dy - p)."""
    resid = normal_matvec(lp, p0, dy) - p_vec
    u = pinv_apply(precond.adw_svd, resid)
    return np.sqrt(p0.x * p0.s) * precond.source_sketch.apply(u)


def solve(lp, p0, sigma, delta, zeta=0.5, eta=0.1, seed=0,
          cols_override=None, precond=None):
    """Inexact dy with energy-norm and l2 residual errors both below delta.

    The measurable surrogate for the two conditions is the preconditioned
    residual: delta/sqrt(1+zeta/2) covers the energy norm and
    delta/sigma_max(Q^{1/2}) covers the plain l2 residual.
    """
    if precond is None:
        precond = build_preconditioner(lp, p0, zeta, eta, seed, cols_override)
    p_vec = build_p(lp, p0, sigma)
    abs_target = min(delta / math.sqrt(1.0 + zeta / 2.0),
                     delta / precond.sigma_max_q_half)
    mu = duality_measure(p0)
    cap = iteration_cap(abs_target, sigma, lp.n, mu, zeta, lp.m)
    return pcg_solve(precond, lp, p0, p_vec, abs_target, cap, absolute=True)


def solve_v(lp, p0, sigma, delta, zeta=0.5, eta=0.1, seed=0,
            cols_override=None, precond=None):
    """(dy, v) exactly solving the modified system with ||v||_2 <= delta."""
    if precond is None:
        precond = build_preconditioner(lp, p0, zeta, eta, seed, cols_override)
    p_vec = build_p(lp, p0, sigma)
    mu = duality_measure(p0)
    sqrt_xs = np.sqrt(p0.x * p0.s)
    w_mat = precond.source_sketch

    def correction_small(z, r):
        # plain residual A D^2 A^T dy - p = -Q^{1/2} r in the z-space recurrence
        resid = -precond.apply_sqrt(r)
        u = pinv_apply(precond.adw_svd, resid)
        v = sqrt_xs * w_mat.apply(u)
        return float(np.linalg.norm(v)) <= delta

    cap = iteration_cap(max(delta * 1e-3, 1e-14), sigma, lp.n, mu, zeta, lp.m)
    report = pcg_solve(precond, lp, p0, p_vec, 1e-14, cap,
                       absolute=False, extra_stop=correction_small)
    # rebuild v from the returned dy with a fresh matvec for full accuracy
    if report.plain_residual == 0.0:
        v = np.zeros(lp.n)
    else:
        v = make_correction(precond, lp, p0, report.dy, p_vec)
    report.v = v
    return report


def perturbation_solve_v(lp, p0, sigma, delta, seed):
    """Sample v uniformly on the radius-delta sphere, then solve exactly."""
    t_start = time.perf_counter()
    n = lp.n
    if delta == 0.0:
        v = np.zeros(n)
    else:
        rng = rng_for(seed, "perturb-v")
        g = rng.standard_normal(n)
        while np.linalg.norm(g) == 0.0:  # probability-zero guard
            g = rng.standard_normal(n)
        v = delta * g / np.linalg.norm(g)
    p_vec = build_p(lp, p0, sigma)
    rhs = p_vec + lp.a @ (inv_s(p0) * v)
    dy = solve_spd(build_normal_matrix(lp, p0), rhs)
    plain = float(np.linalg.norm(normal_matvec(lp, p0, dy) - p_vec))
    return SolveReport(dy=dy, v=v, inner_iterations=0,
                       preconditioned_residual=0.0, plain_residual=plain,
                       wall_time=time.perf_counter() - t_start)
