"""Data generating processes for 2x2 panels, with their population oracles.

Every cell ``(d, t)`` draws from its own generator seeded by
``SeedSequence([seed, d, t])``, so a panel is a pure function of its
arguments. Clusters are nested in groups and shared across periods, like
states observed before and after treatment: cluster ``k`` belongs to group
``k % 2`` and unit ``i`` of cell ``(d, t)`` goes to the ``i``-th cluster of
its group, round robin.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np
from scipy import stats

from .distributions import Binning, DiscreteDistribution, discretize_law
from .errors import InputError
from .mixture import EXAMPLE3
from .panel import CELLS, FourCells, PanelDataset

__all__ = [
    "cell_rng",
    "simulate_panel",
    "simulate_mixture",
    "simulate_example3",
    "simulate_binary",
    "simulate_normal_violation",
    "NORMAL_VIOLATION",
    "BINARY",
    "normal_violation_quadruple",
    "binary_quadruple",
    "mixture_cell_means",
]

Sampler = Callable[[np.random.Generator, int], np.ndarray]


def cell_rng(seed: int, d: int, t: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), d, t])))


def _cluster_labels(n: int, d: int, clusters: int) -> np.ndarray:
    own = np.arange(d, clusters, 2)
    ids = own[np.arange(n) % own.size]
    width = len(str(clusters - 1))
    return np.array([f"c{k:0{width}d}" for k in range(clusters)], dtype=object)[ids]


def simulate_panel(
    samplers: dict[tuple[int, int], Sampler],
    n: int,
    seed: int,
    clusters: int = 50,
    bin_width: float | None = None,
    source: str | None = None,
) -> PanelDataset:
    """Draw ``n`` units per cell from ``samplers[(d, t)]``.

    With ``bin_width`` the outcomes are replaced by their bin labels.
    """
    if int(n) != n or n < 1:
        raise InputError("n per cell must be a positive integer")
    if int(clusters) != clusters or clusters < 2:
        raise InputError("need at least two clusters")
    n, clusters = int(n), int(clusters)
    cid, grp, per, out = [], [], [], []
    for d, t in CELLS:
        y = np.asarray(samplers[d, t](cell_rng(seed, d, t), n), dtype=float)
        out.append(y)
        cid.append(_cluster_labels(n, d, clusters))
        grp.append(np.full(n, d, dtype=np.int8))
        per.append(np.full(n, t, dtype=np.int8))
    outcome = np.concatenate(out)
    binning = None
    if bin_width is not None:
        binning = Binning(bin_width)
        outcome = binning.labels(outcome)
    return PanelDataset(
        np.concatenate(cid),
        np.concatenate(grp),
        np.concatenate(per),
        outcome,
        np.ones(outcome.size),
        source=source,
        binning=binning,
    )


def _mixture_sampler(theta: float, g: tuple, h: tuple) -> Sampler:
    def draw(rng: np.random.Generator, n: int) -> np.ndarray:
        from_g = rng.random(n) < theta
        z = rng.standard_normal(n)
        mu = np.where(from_g, g[0], h[0])
        sigma = np.where(from_g, g[1], h[1])
        return np.exp(mu + sigma * z)

    return draw


def simulate_mixture(
    theta: float,
    n: int,
    seed: int,
    clusters: int = 50,
    G=EXAMPLE3["G"],
    H=EXAMPLE3["H"],
    bin_width: float | None = None,
) -> PanelDataset:
    """Units from ``theta LN(G_t) + (1 - theta) LN(H_d)``; component drawn per unit.

    ``theta = 1`` gives random assignment, ``theta = 0`` stationary outcomes.
    """
    if not 0.0 <= theta <= 1.0:
        raise InputError("theta must lie in [0, 1]")
    samplers = {(d, t): _mixture_sampler(theta, G[t], H[d]) for d, t in CELLS}
    return simulate_panel(samplers, n, seed, clusters, bin_width)


def simulate_example3(
    n: int, seed: int, bin_width: float | None = None, clusters: int = 50
) -> PanelDataset:
    """Half ``LN(2 + t, 1)``, half ``LN(3 + d, 1)`` in every cell."""
    return simulate_mixture(EXAMPLE3["theta"], n, seed, clusters, bin_width=bin_width)


#: success probabilities p[d][t]; the difference in differences is zero
BINARY = ((0.3, 0.4), (0.5, 0.6))


def simulate_binary(
    n: int, seed: int, clusters: int = 50, p=BINARY
) -> PanelDataset:
    samplers = {
        (d, t): (lambda rng, size, q=p[d][t]: (rng.random(size) < q).astype(float))
        for d, t in CELLS
    }
    return simulate_panel(samplers, n, seed, clusters)


def binary_quadruple(p=BINARY) -> FourCells:
    cells = [DiscreteDistribution([0.0, 1.0], [1 - p[d][t], p[d][t]]) for d, t in CELLS]
    return FourCells.from_dists(*cells)


#: comparison group sd shrinks over time; treated group is static
NORMAL_VIOLATION = {
    "comparison": ((0.0, 1.3), (0.0, 1.0)),
    "treated": ((0.0, 1.0), (0.0, 1.0)),
    "bin_width": 0.5,
}


def _normal_params(d: int, t: int, params) -> tuple[float, float]:
    return params["treated" if d else "comparison"][t]


def simulate_normal_violation(
    n: int, seed: int, clusters: int = 50, params=NORMAL_VIOLATION
) -> PanelDataset:
    """Gaussian cells for which parallel trends of CDFs fails.

    Outcomes are continuous; bin them with ``params["bin_width"]`` before
    testing.
    """
    samplers = {}
    for d, t in CELLS:
        mu, sd = _normal_params(d, t, params)
        samplers[d, t] = lambda rng, size, mu=mu, sd=sd: mu + sd * rng.standard_normal(size)
    return simulate_panel(samplers, n, seed, clusters)


def normal_violation_quadruple(params=NORMAL_VIOLATION, tail: float = 1e-8) -> FourCells:
    """Population cell PMFs of the violation design on its test bins."""
    laws = [stats.norm(*_normal_params(d, t, params)) for d, t in CELLS]
    lo = min(float(law.ppf(tail)) for law in laws)
    hi = max(float(law.ppf(1 - tail)) for law in laws)
    cells = [discretize_law(law, params["bin_width"], lo=lo, hi=hi) for law in laws]
    return FourCells.from_dists(*cells)


def mixture_cell_means(theta: float, G=EXAMPLE3["G"], H=EXAMPLE3["H"]) -> dict:
    """Analytic level means ``{(d, t): mean}`` of the lognormal mixture design."""
    return {
        (d, t): theta * math.exp(G[t][0] + G[t][1] ** 2 / 2)
        + (1 - theta) * math.exp(H[d][0] + H[d][1] ** 2 / 2)
        for d, t in CELLS
    }

