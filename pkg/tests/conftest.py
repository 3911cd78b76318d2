import numpy as np
import pytest

from htpotential import dilate, gauge_norm, heisenberg, point, quaternionic


@pytest.fixture(scope="session")
def h1():
    return heisenberg(1)


@pytest.fixture(scope="session")
def h2():
    return heisenberg(2)


@pytest.fixture(scope="session")
def quat():
    return quaternionic(1)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_points(spec, rng, n, lo=0.5, hi=3.0):
    """Random points with gauge norm uniformly drawn from [lo, hi]."""
    pts = []
    while len(pts) < n:
        g = point(spec, rng.standard_normal(spec.m), rng.standard_normal(spec.k))
        norm = gauge_norm(g)
        if norm == 0.0:
            continue
        pts.append(dilate(spec, rng.uniform(lo, hi) / norm, g))
    return pts
