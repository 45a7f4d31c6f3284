"""Reductions to full-row-rank standard form.

Two preprocessing transforms for constraint matrices the drivers cannot take
directly:

- dual_reformulate: a tall-and-thin A (m >> n, rank n) is replaced by the
  dual written in standard form, with constraint matrix [A^T, -A^T, I_n]
  (n-by-(2m+n)), right-hand side c, and cost (-b, b, 0).  A solution ybar
  maps back to a dual-feasible (y, s) of the original via y = y+ - y-,
  s = the identity block.
- low_rank_reduce: an exactly rank-k A is compressed with a randomized range
  finder Z, then Gaussian elimination selects k independent rows of Z^T A.
  The feasible set is unchanged, so primal solutions carry over as-is.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .errors import DimensionError, RankMismatchError
from .linalg import thin_svd
from .model import LinearProgram
from .rng import rng_for

OVERSAMPLING = 2
PIVOT_REL_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class ReductionRecord:
    """Provenance of a reduction, sufficient to map solutions back."""

    kind: str                        # "dual_split" or "low_rank"
    z: Optional[np.ndarray]          # orthonormal range basis (low_rank)
    kept_rows: Optional[list]        # surviving rows of Z^T A (low_rank)
    original_shape: Tuple[int, int]


def dual_reformulate(lp):
    """Rewrite the dual of a tall-and-thin LP in standard form."""
    m, n = lp.m, lp.n
    if m <= n:
        raise RankMismatchError(f"dual_reformulate expects m > n, got {m}x{n}")
    sigma = thin_svd(lp.a).sigma
    if sigma[-1] <= 1e-8 * sigma[0]:
        raise RankMismatchError(
            "dual_reformulate expects rank(A) = n; use low_rank_reduce instead"
        )
    a_bar = np.hstack([lp.a.T, -lp.a.T, np.eye(n)])
    b_bar = lp.c.copy()
    c_bar = np.concatenate([-lp.b, lp.b, np.zeros(n)])
    record = ReductionRecord(kind="dual_split", z=None, kept_rows=None,
                             original_shape=(m, n))
    return LinearProgram(a=a_bar, b=b_bar, c=c_bar), record


def map_back_dual(record, ybar):
    """Recover (y, s) of the original LP from a dual_split solution ybar."""
    if record.kind != "dual_split":
        raise DimensionError(f"map_back_dual: record kind {record.kind}")
    m, n = record.original_shape
    ybar = np.asarray(ybar, dtype=float).ravel()
    if ybar.shape[0] != 2 * m + n:
        raise DimensionError(f"map_back_dual: length {ybar.shape[0]} != {2 * m + n}")
    return ybar[:m] - ybar[m:2 * m], ybar[2 * m:]


def randomized_range_finder(a, ell, seed):
    """Orthonormal Z (m-by-(ell+2)) approximating the range of A.

    Single-pass Gaussian test matrix with oversampling 2, orthonormalized by QR.
    """
    a = np.asarray(a, dtype=float)
    m, n = a.shape
    if ell > min(m, n):
        raise DimensionError(f"range finder: ell={ell} exceeds min{a.shape}")
    rng = rng_for(seed, "range-finder")
    omega = rng.standard_normal((n, min(ell + OVERSAMPLING, m)))
    z, _ = np.linalg.qr(a @ omega)
    return z


def low_rank_reduce(lp, k, seed):
    """Compress an exactly rank-k system A x = b to k independent rows."""
    z = randomized_range_finder(lp.a, k, seed)
    b_rows = z.T @ lp.a          # (k+2)-by-n
    b_rhs = z.T @ lp.b
    kept = _independent_rows(b_rows, k)
    reduced = LinearProgram(a=b_rows[kept], b=b_rhs[kept], c=lp.c.copy())
    record = ReductionRecord(kind="low_rank", z=z, kept_rows=list(kept),
                             original_shape=(lp.m, lp.n))
    return reduced, record


def _independent_rows(mat, k):
    """Indices of k linearly independent rows via Gaussian elimination.

    Partial pivoting on a working copy; pivot threshold relative to the
    largest row norm.
    """
    work = np.array(mat, dtype=float)
    r, n = work.shape
    row_norms = np.linalg.norm(work, axis=1)
    threshold = PIVOT_REL_TOL * (row_norms.max() if row_norms.size else 0.0)
    kept = []
    remaining = list(range(r))
    col = 0
    while len(kept) < k and col < n and remaining:
        pivot_row = max(remaining, key=lambda i: abs(work[i, col]))
        if abs(work[pivot_row, col]) <= threshold:
            col += 1
            continue
        kept.append(pivot_row)
        remaining.remove(pivot_row)
        for i in remaining:
            work[i] -= (work[i, col] / work[pivot_row, col]) * work[pivot_row]
        col += 1
    if len(kept) < k:
        raise RankMismatchError(
            f"low_rank_reduce: found {len(kept)} independent rows, expected {k}"
        )
    return sorted(kept)
