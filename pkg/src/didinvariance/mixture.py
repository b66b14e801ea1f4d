"""Mixture structure behind parallel trends of CDFs.

Two distributions ``f1, f2`` always split as ``f_j = (1 - theta) f_min +
theta f~_j`` with ``theta`` their total variation distance. A quadruple of
untreated laws satisfies parallel trends for every monotone transform
exactly when it can be written ``F_dt = theta G_t + (1 - theta) H_d``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy import stats

from .distributions import (
    DiscreteDistribution,
    align_supports,
    discretize_law,
    mix,
    total_variation,
)
from .errors import InputError
from .panel import FourCells

__all__ = [
    "MixtureDecomposition",
    "Case3Spec",
    "decompose",
    "reconstruct",
    "build_case3_quadruple",
    "case3_representation",
    "lognormal_mixture_quadruple",
    "example3_quadruple",
    "example3_oracle_mean",
    "example3_table",
    "EXAMPLE3",
]


@dataclass(frozen=True)
class MixtureDecomposition:
    """``f_j = (1 - theta) * f_min + theta * f_tilde_j`` for ``j = 1, 2``."""

    theta: float
    f_min: DiscreteDistribution
    f_tilde_1: DiscreteDistribution
    f_tilde_2: DiscreteDistribution
    degenerate_case: Literal["none", "theta_zero", "theta_one"] = "none"


def decompose(f1: DiscreteDistribution, f2: DiscreteDistribution) -> MixtureDecomposition:
    """Split a pair of PMFs into a common part and two disjoint residual parts.

    ``theta`` is the total variation distance. Where the weights are
    degenerate the free components are pinned: with ``theta == 0`` both
    residuals equal ``f_min``; with ``theta == 1`` ``f_min`` is ``f1``.

    Examples
    --------
    >>> f1 = DiscreteDistribution([0, 1, 2], [0.5, 0.5, 0])
    >>> f2 = DiscreteDistribution([0, 1, 2], [0, 0.5, 0.5])
    >>> d = decompose(f1, f2)
    >>> d.theta, d.f_min.masses.tolist()
    (0.5, [0.0, 1.0, 0.0])
    """
    a, b = align_supports([f1, f2])
    support = a.support
    theta = total_variation(a, b)
    pos = np.maximum(a.masses - b.masses, 0.0)
    neg = np.maximum(b.masses - a.masses, 0.0)
    common = np.minimum(a.masses, b.masses)
    if theta == 0.0:
        f_min = DiscreteDistribution(support, a.masses)
        return MixtureDecomposition(0.0, f_min, f_min, f_min, "theta_zero")
    t1 = DiscreteDistribution(support, pos / pos.sum())
    t2 = DiscreteDistribution(support, neg / neg.sum())
    if theta == 1.0:
        return MixtureDecomposition(1.0, DiscreteDistribution(support, a.masses), t1, t2, "theta_one")
    f_min = DiscreteDistribution(support, common / common.sum())
    return MixtureDecomposition(theta, f_min, t1, t2, "none")


def reconstruct(decomp: MixtureDecomposition) -> tuple[DiscreteDistribution, DiscreteDistribution]:
    th = decomp.theta
    return (
        mix(1.0 - th, decomp.f_min, decomp.f_tilde_1),
        mix(1.0 - th, decomp.f_min, decomp.f_tilde_2),
    )


@dataclass(frozen=True)
class Case3Spec:
    """Mixture weight plus time components ``G0, G1`` and group components ``H0, H1``."""

    theta: float
    G0: DiscreteDistribution
    G1: DiscreteDistribution
    H0: DiscreteDistribution
    H1: DiscreteDistribution

    def __post_init__(self):
        if not 0.0 <= self.theta <= 1.0:
            raise InputError("theta must lie in [0, 1]")


def build_case3_quadruple(spec: Case3Spec) -> FourCells:
    """Untreated laws ``F_dt = theta G_t + (1 - theta) H_d`` on a common support."""
    G0, G1, H0, H1 = align_supports([spec.G0, spec.G1, spec.H0, spec.H1])
    G, H = (G0, G1), (H0, H1)
    cells = [mix(spec.theta, G[t], H[d]) for d in (0, 1) for t in (0, 1)]
    return FourCells.from_dists(*cells)


def case3_representation(cells: FourCells, tolerance: float = 0.0) -> Case3Spec | None:
    """Recover ``(theta, G, H)`` from a quadruple, or None if none exists.

    A representation exists iff the two groups' changes over time coincide;
    it is built from the decompositions of the two time pairs.
    """
    f = cells.dists
    delta_treated = f[1][1].masses - f[1][0].masses
    delta_comparison = f[0][1].masses - f[0][0].masses
    if np.max(np.abs(delta_treated - delta_comparison)) > tolerance:
        return None
    treated = decompose(f[1][1], f[1][0])
    comparison = decompose(f[0][1], f[0][0])
    return Case3Spec(
        theta=treated.theta,
        G0=treated.f_tilde_2,
        G1=treated.f_tilde_1,
        H0=comparison.f_min,
        H1=treated.f_min,
    )


# -- lognormal mixtures -------------------------------------------------------

#: theta, (mu, sigma) of G_t for t = 0, 1 and of H_d for d = 0, 1
EXAMPLE3 = {
    "theta": 0.5,
    "G": ((2.0, 1.0), (3.0, 1.0)),
    "H": ((3.0, 1.0), (4.0, 1.0)),
}


def _lognormal(mu: float, sigma: float):
    return stats.lognorm(s=sigma, scale=math.exp(mu))


def lognormal_mixture_quadruple(
    theta: float,
    G=EXAMPLE3["G"],
    H=EXAMPLE3["H"],
    bin_width: float = 0.5,
    tail: float = 1e-8,
) -> FourCells:
    """Discretized quadruple with lognormal ``G_t`` and ``H_d``.

    All four components share one grid spanning the lowest ``tail`` quantile
    to the highest ``1 - tail`` quantile among them.
    """
    laws = [_lognormal(*p) for p in (*G, *H)]
    lo = min(float(law.ppf(tail)) for law in laws)
    hi = max(float(law.ppf(1 - tail)) for law in laws)
    G0, G1, H0, H1 = (discretize_law(law, bin_width, lo=lo, hi=hi) for law in laws)
    return build_case3_quadruple(Case3Spec(theta, G0, G1, H0, H1))


def example3_quadruple(bin_width: float = 0.5) -> FourCells:
    return lognormal_mixture_quadruple(EXAMPLE3["theta"], bin_width=bin_width)


def example3_oracle_mean(
    theta: float,
    g: tuple[float, float],
    h: tuple[float, float],
    transform: Literal["levels", "log"] = "levels",
) -> float:
    """Mean of ``Y`` (levels) or ``log Y`` in a cell mixing ``LN(g)`` and ``LN(h)``.

    >>> round(example3_oracle_mean(0.5, (2, 1), (3, 1)), 2)
    22.65
    """
    (mu_g, s_g), (mu_h, s_h) = g, h
    if transform == "levels":
        return theta * math.exp(mu_g + s_g**2 / 2) + (1 - theta) * math.exp(mu_h + s_h**2 / 2)
    if transform == "log":
        return theta * mu_g + (1 - theta) * mu_h
    raise InputError(f"unknown transform {transform!r}")


def example3_table(theta: float = EXAMPLE3["theta"], G=EXAMPLE3["G"], H=EXAMPLE3["H"]) -> dict:
    """Analytic cell means by transform and group: pre, post and change."""
    table = {}
    for transform in ("levels", "log"):
        for d, name in ((0, "comparison"), (1, "treated")):
            pre = example3_oracle_mean(theta, G[0], H[d], transform)
            post = example3_oracle_mean(theta, G[1], H[d], transform)
            table[transform, name] = {"pre": pre, "post": post, "change": post - pre}
    return table
