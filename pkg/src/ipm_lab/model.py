"""Standard-form LP model and primal-dual iterates.

Primal: min c^T x  s.t.  A x = b, x >= 0   (A is m-by-n, full row rank)
Dual:   max b^T y  s.t.  A^T y + s = c, s >= 0

The duality measure mu = x^T s / n and the l2 central-path neighborhood
N2(theta) = { (x, y, s) interior : ||x*s - mu*1||_2 <= theta*mu } are the
quantities the drivers steer by.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, LeftInteriorError, RankDeficientError
from .linalg import thin_svd

RANK_CHECK_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class LinearProgram:
    """Standard-form LP data (A, b, c)."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "a", np.atleast_2d(np.asarray(self.a, dtype=float)))
        object.__setattr__(self, "b", np.asarray(self.b, dtype=float).ravel())
        object.__setattr__(self, "c", np.asarray(self.c, dtype=float).ravel())
        m, n = self.a.shape
        if self.b.shape[0] != m or self.c.shape[0] != n:
            raise DimensionError(
                f"LinearProgram: A is {m}x{n}, b has {self.b.shape[0]}, c has {self.c.shape[0]}"
            )
        if not (np.isfinite(self.a).all() and np.isfinite(self.b).all() and np.isfinite(self.c).all()):
            raise DimensionError("LinearProgram: non-finite entries")

    @property
    def m(self):
        return self.a.shape[0]

    @property
    def n(self):
        return self.a.shape[1]


def validate_full_rank(lp, tol=RANK_CHECK_TOL):
    """Check rank(A) = m via thin SVD; route rank-deficient input to reductions."""
    if lp.m > lp.n:
        raise RankDeficientError(
            f"A is {lp.m}x{lp.n} with m > n; apply reductions.dual_reformulate first"
        )
    sigma = thin_svd(lp.a).sigma
    if sigma.size == 0 or sigma[-1] <= tol * sigma[0]:
        raise RankDeficientError(
            "A is rank deficient (sigma_min/sigma_max <= "
            f"{tol}); apply reductions.low_rank_reduce first"
        )


@dataclass(frozen=True, eq=False)
class PrimalDualPoint:
    """Strictly interior iterate (x, y, s)."""

    x: np.ndarray
    y: np.ndarray
    s: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float).ravel())
        object.__setattr__(self, "y", np.asarray(self.y, dtype=float).ravel())
        object.__setattr__(self, "s", np.asarray(self.s, dtype=float).ravel())
        if self.x.shape != self.s.shape:
            raise DimensionError("PrimalDualPoint: x and s lengths differ")
        for name, vec in (("x", self.x), ("s", self.s)):
            if not np.isfinite(vec).all():
                raise LeftInteriorError(f"PrimalDualPoint: non-finite {name}")
            bad = np.flatnonzero(vec <= 0.0)
            if bad.size:
                raise LeftInteriorError(
                    f"left_interior: {name}[{bad[0]}] = {vec[bad[0]]} <= 0", index=int(bad[0])
                )
        if not np.isfinite(self.y).all():
            raise DimensionError("PrimalDualPoint: non-finite y")


@dataclass(frozen=True)
class Residuals:
    """Primal/dual infeasibility norms and the duality measure."""

    primal_infeasibility: float
    dual_infeasibility: float
    duality_measure: float


@dataclass(frozen=True)
class NeighborhoodStatus:
    member: bool
    distance: float


def duality_measure(p):
    """mu = x^T s / n."""
    return float(p.x @ p.s) / p.x.shape[0]


def neighborhood_check(p, theta):
    """Membership and distance for the l2 neighborhood N2(theta)."""
    mu = duality_measure(p)
    distance = float(np.linalg.norm(p.x * p.s - mu))
    return NeighborhoodStatus(member=bool(distance <= theta * mu), distance=distance)


def residuals(lp, p):
    """Primal/dual residual norms and mu for a point."""
    primal = float(np.linalg.norm(lp.a @ p.x - lp.b))
    dual = float(np.linalg.norm(lp.a.T @ p.y + p.s - lp.c))
    return Residuals(primal, dual, duality_measure(p))
