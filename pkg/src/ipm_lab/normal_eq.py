"""Normal-equation assembly and step completion.

The Newton step for the centering system reduces to the m-by-m normal
equations

    A D^2 A^T dy = p,      D^2 = X S^{-1},
    p = -sigma * mu * A S^{-1} 1 + A x,

with ds = -A^T dy and dx recovered by back-substitution.  Two completions are
provided: the plain (uncorrected) one, which tolerates an inexact dy and
carries the residual f, and the error-adjusted one, which takes a correction
vector v chosen so that (dy, v) solves a nearby system exactly and the primal
step satisfies A dx = 0.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InconsistentPairError
from .linalg import solve_spd
from .model import duality_measure

S_FLOOR = 1e-300
NEAR_BOUNDARY_REL = 1e-14


@dataclass(frozen=True, eq=False)
class StepDirection:
    """Step (dx, dy, ds) with solver-residual metadata."""

    dx: np.ndarray
    dy: np.ndarray
    ds: np.ndarray
    sigma: float
    correction: Optional[np.ndarray]  # v, present only for error-adjusted steps
    residual_norm: float              # ||A D^2 A^T dy - p||_2


def inv_s(p0):
    """Element-wise 1/s with a tiny floor to avoid overflow."""
    return 1.0 / np.maximum(p0.s, S_FLOOR)


def near_boundary(p0):
    """True if some s_i is vanishingly small relative to max(s)."""
    return bool(np.min(p0.s) < NEAR_BOUNDARY_REL * np.max(p0.s))


def scaling_d2(p0):
    """Diagonal of D^2 = X S^{-1} as a vector."""
    return p0.x * inv_s(p0)


def build_p(lp, p0, sigma):
    """Right-hand side p = -sigma*mu*A S^{-1} 1 + A x."""
    mu = duality_measure(p0)
    return lp.a @ (p0.x - sigma * mu * inv_s(p0))


def build_normal_matrix(lp, p0):
    """A D^2 A^T with D^2 = diag(x/s)."""
    return (lp.a * scaling_d2(p0)) @ lp.a.T


def complete_step_uncorrected(lp, p0, sigma, dy):
    """Complete an (possibly inexact) dual step without error adjustment."""
    dy = np.asarray(dy, dtype=float)
    mu = duality_measure(p0)
    s_inv = inv_s(p0)
    ds = -(lp.a.T @ dy)
    dx = -p0.x + sigma * mu * s_inv - scaling_d2(p0) * ds
    residual = np.linalg.norm((lp.a * scaling_d2(p0)) @ (lp.a.T @ dy) - build_p(lp, p0, sigma))
    return StepDirection(dx=dx, dy=dy, ds=ds, sigma=float(sigma),
                         correction=None, residual_norm=float(residual))


def complete_step_corrected(lp, p0, sigma, dy, v):
    """Complete an error-adjusted step; (dy, v) must satisfy the modified system.

    dx picks up the extra -S^{-1} v term, which restores A dx = 0 exactly when
    A D^2 A^T dy = p + A S^{-1} v.
    """
    dy = np.asarray(dy, dtype=float)
    v = np.asarray(v, dtype=float)
    mu = duality_measure(p0)
    s_inv = inv_s(p0)
    p_vec = build_p(lp, p0, sigma)
    pair_residual = np.linalg.norm(
        (lp.a * scaling_d2(p0)) @ (lp.a.T @ dy) - p_vec - lp.a @ (s_inv * v)
    )
    if pair_residual > 1e-6 * (1.0 + np.linalg.norm(p_vec)):
        raise InconsistentPairError(
            f"(dy, v) violates the modified normal equations by {pair_residual:.3e}"
        )
    ds = -(lp.a.T @ dy)
    dx = -p0.x + sigma * mu * s_inv - scaling_d2(p0) * ds - s_inv * v
    residual = np.linalg.norm((lp.a * scaling_d2(p0)) @ (lp.a.T @ dy) - p_vec)
    return StepDirection(dx=dx, dy=dy, ds=ds, sigma=float(sigma),
                         correction=v, residual_norm=float(residual))


def exact_step(lp, p0, sigma):
    """Newton step from a direct SPD solve of the normal equations."""
    dy = solve_spd(build_normal_matrix(lp, p0), build_p(lp, p0, sigma))
    return complete_step_uncorrected(lp, p0, sigma, dy)


def cross_term_bound(n, theta, sigma, mu):
    """Upper bound on ||dx * ds||_2 for an exact step from a point in N2(theta)."""
    return (theta**2 + n * (1.0 - sigma) ** 2) / (2.0**1.5 * (1.0 - theta)) * mu
