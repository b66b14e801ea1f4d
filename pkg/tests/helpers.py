"""Random PMFs and quadruples shared by the test modules."""

import numpy as np
from hypothesis import strategies as st

from didinvariance.distributions import DiscreteDistribution
from didinvariance.mixture import Case3Spec, build_case3_quadruple
from didinvariance.panel import FourCells


def random_pmf(rng, k, support=None, sparsity=0.3):
    """PMF on ``k`` points with some exact zeros."""
    m = rng.random(k) * (rng.random(k) > sparsity)
    if m.sum() == 0:
        m[rng.integers(k)] = 1.0
    support = np.arange(k, dtype=float) if support is None else support
    return DiscreteDistribution(support, m / m.sum())


def random_case3(rng, k=6, theta=None):
    theta = rng.random() if theta is None else theta
    parts = [random_pmf(rng, k) for _ in range(4)]
    return build_case3_quadruple(Case3Spec(theta, *parts)), theta


def random_quadruple(rng, k=6):
    return FourCells.from_dists(*(random_pmf(rng, k) for _ in range(4)))


@st.composite
def pmf_arrays(draw, k):
    raw = draw(st.lists(st.integers(0, 8), min_size=k, max_size=k))
    if sum(raw) == 0:
        raw[draw(st.integers(0, k - 1))] = 1
    m = np.array(raw, dtype=float)
    return m / m.sum()


@st.composite
def quadruples(draw, max_k=6):
    k = draw(st.integers(1, max_k))
    support = np.arange(k, dtype=float)
    return FourCells.from_dists(
        *(DiscreteDistribution(support, draw(pmf_arrays(k))) for _ in range(4))
    )
