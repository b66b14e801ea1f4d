"""Counterfactual untreated distributions for the treated group in period 1.

Two constructions are provided: the one implied by parallel trends of CDFs,
``F10 + F01 - F00``, which is a signed measure that may fail to be a
distribution, and the changes-in-changes quantile mapping, which always is
one. Neither reads the treated post-period cell.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .distributions import (
    MASS_TOL,
    CumulativeCurve,
    DiscreteDistribution,
    MonotoneTransform,
    SignedMeasure,
    apply_transform,
    cdf,
    mean,
)
from .errors import InputError
from .panel import FourCells

__all__ = [
    "ImpliedCounterfactual",
    "ParallelCheck",
    "CicComparison",
    "implied_counterfactual",
    "implied_from",
    "check_cdf_parallel",
    "did_att",
    "cic_counterfactual",
    "compare_counterfactuals",
    "counterfactual_divergence",
]

_LEVEL_TOL = 1e-12


@dataclass(frozen=True)
class ImpliedCounterfactual:
    pmf: SignedMeasure
    cdf: CumulativeCurve
    min_mass: float
    argmin: float
    is_proper: bool


class ParallelCheck(NamedTuple):
    holds: bool
    max_abs_deviation: float
    argmax: float


def implied_from(f10: DiscreteDistribution, f01: DiscreteDistribution, f00: DiscreteDistribution) -> ImpliedCounterfactual:
    """``f10 + f01 - f00`` on a shared support."""
    support = f10.support
    if not (np.array_equal(f01.support, support) and np.array_equal(f00.support, support)):
        raise InputError("implied counterfactual needs three distributions on one support")
    pmf = SignedMeasure(support, f10.masses + f01.masses - f00.masses)
    i = int(np.argmin(pmf.masses))
    return ImpliedCounterfactual(
        pmf=pmf,
        cdf=cdf(pmf),
        min_mass=float(pmf.masses[i]),
        argmin=float(support[i]),
        is_proper=pmf.is_proper(MASS_TOL),
    )


def implied_counterfactual(cells: FourCells) -> ImpliedCounterfactual:
    """Counterfactual PMF of the treated group in period 1 under parallel trends of CDFs."""
    return implied_from(cells.dists[1][0], cells.dists[0][1], cells.dists[0][0])


def check_cdf_parallel(cells: FourCells, tolerance: float = MASS_TOL) -> ParallelCheck:
    """Largest violation of ``F11 - F10 = F01 - F00`` over the support.

    All four cells are read as untreated-outcome laws, so this is meant for
    population quadruples and simulations rather than observed data.
    """
    F = {(d, t): np.cumsum(cells.dists[d][t].masses) for d in (0, 1) for t in (0, 1)}
    gap = np.abs((F[1, 1] - F[1, 0]) - (F[0, 1] - F[0, 0]))
    i = int(np.argmax(gap))
    dev = float(gap[i])
    return ParallelCheck(dev <= tolerance, dev, float(cells.support[i]))


def did_att(cells: FourCells, g: MonotoneTransform | None = None) -> float:
    """Difference-in-differences of cell means after transforming outcomes by ``g``."""
    g = g or MonotoneTransform.identity()
    m = [[mean(apply_transform(cells.dists[d][t], g)) for t in (0, 1)] for d in (0, 1)]
    return (m[1][1] - m[1][0]) - (m[0][1] - m[0][0])


# -- changes-in-changes -------------------------------------------------------


def _cic_step(f10, f01, f00) -> np.ndarray:
    F10, F01, F00 = np.cumsum(f10), np.cumsum(f01), np.cumsum(f00)
    idx = np.searchsorted(F00, F01 - _LEVEL_TOL, side="left")
    idx = np.minimum(idx, F00.size - 1)
    values = np.where(F01 <= _LEVEL_TOL, 0.0, F10[idx])
    values[-1] = 1.0
    return np.diff(values, prepend=0.0)


def _cic_interpolated(f10, f01, f00) -> np.ndarray:
    # Ranks are spread uniformly within each atom of F00. Mass of F10 sitting
    # where F00 has none keeps its (point) rank and is sent to the admissible
    # quantile of F01 nearest to where it started.
    F01 = np.cumsum(f01)
    F00 = np.cumsum(f00)
    atom = f00 > 0
    knots = np.concatenate([[0.0], F00[atom]])
    carried = np.concatenate([[0.0], np.cumsum(f10[atom])])
    masses = np.diff(np.interp(F01, knots, carried), prepend=0.0)

    loose = np.flatnonzero(~atom & (f10 > 0))
    if loose.size:
        u = F00[loose]
        first_level = np.searchsorted(F01, u - _LEVEL_TOL, side="left")
        above = np.searchsorted(F01, u + _LEVEL_TOL, side="right")
        target = np.minimum(above, np.maximum(first_level, loose))
        target = np.minimum(target, F01.size - 1)
        np.add.at(masses, target, f10[loose])
    return masses


def cic_counterfactual(cells: FourCells, method: str = "interpolated") -> DiscreteDistribution:
    """Changes-in-changes counterfactual ``F10(F00^-1(F01(y)))``.

    Parameters
    ----------
    cells : FourCells
        Only cells (1, 0), (0, 0) and (0, 1) are used.
    method : {"interpolated", "step"}
        ``"step"`` plugs step CDFs into the formula with the generalized
        inverse ``inf{y : F(y) >= q}``; any mass beyond the comparison
        group's range goes to the top support point. ``"interpolated"``
        spreads ranks uniformly within atoms of ``F00``, which coincides with
        the formula for continuous CDFs and keeps it exact when the treated
        and comparison groups share a law in period 0 or when nothing changes
        over time.
    """
    f10 = cells.dists[1][0].masses
    f01 = cells.dists[0][1].masses
    f00 = cells.dists[0][0].masses
    if method == "interpolated":
        masses = _cic_interpolated(f10, f01, f00)
    elif method == "step":
        masses = _cic_step(f10, f01, f00)
    else:
        raise InputError(f"unknown CiC method {method!r}")
    masses = np.maximum(masses, 0.0)
    return DiscreteDistribution(cells.support, masses / masses.sum())


@dataclass(frozen=True)
class CicComparison:
    """Sup-distance between the CiC and parallel-trends counterfactual CDFs.

    When the implied counterfactual has negative mass, it is replaced by its
    normalized positive part and ``implied_proper`` is False.
    """

    divergence: float
    argmax: float
    implied_proper: bool
    cic_cdf: np.ndarray
    implied_cdf: np.ndarray
    support: np.ndarray


def compare_counterfactuals(cells: FourCells, method: str = "interpolated") -> CicComparison:
    implied = implied_counterfactual(cells)
    cic = cic_counterfactual(cells, method)
    if implied.is_proper:
        implied_cdf = implied.cdf.values
    else:
        pos = np.maximum(implied.pmf.masses, 0.0)
        implied_cdf = np.cumsum(pos / pos.sum())
    cic_cdf = np.cumsum(cic.masses)
    gap = np.abs(cic_cdf - implied_cdf)
    i = int(np.argmax(gap))
    return CicComparison(
        divergence=float(gap[i]),
        argmax=float(cells.support[i]),
        implied_proper=implied.is_proper,
        cic_cdf=cic_cdf,
        implied_cdf=np.asarray(implied_cdf),
        support=cells.support,
    )


def counterfactual_divergence(cells: FourCells, method: str = "interpolated") -> float:
    """``sup_y |F_cic(y) - F_implied(y)|``."""
    return compare_counterfactuals(cells, method).divergence
