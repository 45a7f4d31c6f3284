"""Dense linear-algebra primitives.

Thin wrappers around LAPACK-backed numpy/scipy kernels, with the error
contracts and tolerances the rest of the library relies on.  Everything is
dense, row-major, float64.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionError, FactorizationError, NumericalError

RANK_TOL_DEFAULT = 1e-12


@dataclass(frozen=True, eq=False)
class ThinSvd:
    """Thin SVD M = U diag(sigma) Vt with r = min(rows, cols) factors."""

    u: np.ndarray       # (m, r), orthonormal columns
    sigma: np.ndarray   # (r,), nonincreasing, >= 0
    vt: np.ndarray      # (r, n), orthonormal rows


def hadamard(u, v):
    """Element-wise product of two equal-length vectors."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise DimensionError(f"hadamard: shapes {u.shape} and {v.shape} differ")
    return u * v


def energy_norm(x, m_mat):
    """sqrt(x^T M x) for symmetric positive-definite M."""
    x = np.asarray(x, dtype=float)
    q = float(x @ (np.asarray(m_mat, dtype=float) @ x))
    if q < -1e-12:
        raise FactorizationError(f"energy_norm: x^T M x = {q} < 0, M not positive definite")
    return np.sqrt(max(q, 0.0))


def thin_svd(m_mat):
    """Thin SVD of a dense matrix."""
    m_mat = np.asarray(m_mat, dtype=float)
    try:
        u, sigma, vt = np.linalg.svd(m_mat, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"thin_svd did not converge: {exc}") from exc
    return ThinSvd(u=u, sigma=sigma, vt=vt)


def solve_spd(m_mat, rhs):
    """Solve M x = rhs for symmetric positive-definite M via Cholesky."""
    m_mat = np.asarray(m_mat, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    if m_mat.shape[0] != m_mat.shape[1] or m_mat.shape[0] != rhs.shape[0]:
        raise DimensionError(f"solve_spd: shapes {m_mat.shape}, {rhs.shape}")
    try:
        factor = scipy.linalg.cho_factor(m_mat, lower=True, check_finite=False)
    except scipy.linalg.LinAlgError as exc:
        pivot = _failing_pivot(str(exc))
        raise FactorizationError(
            f"solve_spd: Cholesky failed (pivot {pivot}): {exc}", pivot=pivot
        ) from exc
    return scipy.linalg.cho_solve(factor, rhs, check_finite=False)


def _failing_pivot(message):
    # scipy reports "k-th leading minor ... is not positive definite"
    head = message.split("-th", 1)[0].split()
    try:
        return int(head[-1]) - 1
    except (ValueError, IndexError):
        return None


def pinv_apply(svd, rhs, rank_tol=RANK_TOL_DEFAULT):
    """Apply the Moore-Penrose pseudoinverse V Sigma^+ U^T to rhs.

    Singular values below rank_tol * sigma_max are treated as zero.
    """
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape[0] != svd.u.shape[0]:
        raise DimensionError(f"pinv_apply: rhs length {rhs.shape[0]} != {svd.u.shape[0]}")
    sigma = svd.sigma
    cutoff = rank_tol * (sigma[0] if sigma.size else 0.0)
    inv = np.where(sigma > cutoff, 1.0 / np.where(sigma > 0, sigma, 1.0), 0.0)
    return svd.vt.T @ (inv * (svd.u.T @ rhs))


def spectral_norm(m_mat):
    """Largest singular value of a dense matrix."""
    m_mat = np.asarray(m_mat, dtype=float)
    if m_mat.size == 0:
        return 0.0
    return float(np.linalg.svd(m_mat, compute_uv=False)[0])
