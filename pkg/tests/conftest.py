import numpy as np
import pytest

from ipm_lab.harness import generate_synthetic_lp


@pytest.fixture
def small_instance():
    """A 5x12 instance with an exactly centered feasible start."""
    return generate_synthetic_lp(5, 12, seed=42)


def make_instance(m, n, seed):
    return generate_synthetic_lp(m, n, seed)


def off_center_point(point, rng, spread=0.2):
    """Jitter x (and rebalance s) so the point sits off the central path.

    Keeps exact primal-dual feasibility of nothing in particular -- intended
    for step/solver math that only needs an interior point.
    """
    x = point.x * np.exp(rng.uniform(-spread, spread, size=point.x.shape))
    s = point.s * np.exp(rng.uniform(-spread, spread, size=point.s.shape))
    return type(point)(x=x, y=point.y, s=s)
