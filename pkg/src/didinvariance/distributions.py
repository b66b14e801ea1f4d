"""Finite discrete distributions on the real line.

Everything in the package is expressed through probability mass functions
on a finite support, with counting measure as the dominating measure. A
continuous outcome enters either through :func:`discretize` (data) or
:func:`discretize_law` (analytic distributions).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, InputError, MonotonicityError

__all__ = [
    "MASS_TOL",
    "DiscreteDistribution",
    "SignedMeasure",
    "CumulativeCurve",
    "MonotoneTransform",
    "Binning",
    "empirical_pmf",
    "weighted_pmf",
    "discretize",
    "discretize_law",
    "align_supports",
    "cdf",
    "total_variation",
    "apply_transform",
    "mean",
    "mix",
]

MASS_TOL = 1e-12


def _frozen(values, dtype=np.float64) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True).reshape(-1)
    arr.setflags(write=False)
    return arr


def _check_support(support: np.ndarray) -> None:
    if not np.all(np.isfinite(support)):
        raise InputError("support points must be finite")
    if support.size > 1 and not np.all(np.diff(support) > 0):
        raise InputError("support must be strictly increasing without duplicates")


@dataclass(frozen=True, eq=False)
class SignedMeasure:
    """Masses of either sign on a strictly increasing support, summing to one."""

    support: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        support = _frozen(self.support)
        masses = _frozen(self.masses)
        if support.size == 0:
            raise InputError("support must be non-empty")
        if support.shape != masses.shape:
            raise InputError("support and masses must have the same length")
        _check_support(support)
        if not np.all(np.isfinite(masses)):
            raise InputError("masses must be finite")
        total = masses.sum()
        if abs(total - 1.0) > MASS_TOL:
            raise InputError(f"masses sum to {total!r}, not 1")
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "masses", masses)

    def __len__(self) -> int:
        return self.support.size

    def __eq__(self, other) -> bool:
        if type(other) is not type(self):
            return NotImplemented
        return np.array_equal(self.support, other.support) and np.array_equal(
            self.masses, other.masses
        )

    __hash__ = None

    @property
    def min_mass(self) -> float:
        return float(self.masses.min())

    def is_proper(self, tol: float = MASS_TOL) -> bool:
        """True when every mass is at least ``-tol``."""
        return bool(self.min_mass >= -tol)

    def restrict(self, keep: np.ndarray) -> "SignedMeasure":
        """Drop support points where ``keep`` is False; the dropped mass must be zero."""
        keep = np.asarray(keep, dtype=bool)
        if np.any(self.masses[~keep] != 0):
            raise InputError("can only drop support points carrying zero mass")
        return type(self)(self.support[keep], self.masses[keep])


@dataclass(frozen=True, eq=False)
class DiscreteDistribution(SignedMeasure):
    """A probability mass function with finite support.

    Parameters
    ----------
    support : array_like
        Strictly increasing outcome values.
    masses : array_like
        Non-negative probabilities, one per support point, summing to one.
    total_weight : float
        Total sampling weight the distribution was estimated from (metadata,
        1.0 for analytic distributions).
    """

    total_weight: float = field(default=1.0)

    def __post_init__(self):
        super().__post_init__()
        if np.any(self.masses < 0):
            raise InputError("masses must be non-negative")
        if not (self.total_weight > 0 and math.isfinite(self.total_weight)):
            raise InputError("total_weight must be positive and finite")

    def restrict(self, keep: np.ndarray) -> "DiscreteDistribution":
        keep = np.asarray(keep, dtype=bool)
        if np.any(self.masses[~keep] != 0):
            raise InputError("can only drop support points carrying zero mass")
        return DiscreteDistribution(
            self.support[keep], self.masses[keep], self.total_weight
        )

    @classmethod
    def point_mass(cls, value: float) -> "DiscreteDistribution":
        return cls([value], [1.0])

    def on_support(self, support: np.ndarray) -> "DiscreteDistribution":
        """Re-express on a superset of the current support, padding with zeros."""
        return DiscreteDistribution(
            support, _embed(self, np.asarray(support, dtype=float)), self.total_weight
        )


@dataclass(frozen=True, eq=False)
class CumulativeCurve:
    """Right-continuous step function given by its values at the support points."""

    support: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "support", _frozen(self.support))
        object.__setattr__(self, "values", _frozen(self.values))
        if self.support.shape != self.values.shape:
            raise InputError("support and values must have the same length")

    def __call__(self, y) -> np.ndarray:
        """Evaluate at arbitrary points (0 left of the support)."""
        idx = np.searchsorted(self.support, np.asarray(y, dtype=float), side="right")
        padded = np.concatenate([[0.0], self.values])
        return padded[idx]

    @property
    def is_monotone(self) -> bool:
        """Whether the curve is a valid CDF (non-decreasing, within [0, 1])."""
        v = self.values
        return bool(
            v[0] >= -MASS_TOL
            and np.all(np.diff(v) >= -MASS_TOL)
            and v[-1] <= 1 + MASS_TOL
        )


# -- transforms ---------------------------------------------------------------

_TRANSFORM_KINDS = ("identity", "log", "affine", "indicator_shift", "table")


@dataclass(frozen=True)
class MonotoneTransform:
    """A strictly increasing map of outcomes.

    Build instances with the class constructors :meth:`identity`, :meth:`log`,
    :meth:`affine`, :meth:`indicator_shift` and :meth:`table`.
    """

    kind: str
    params: tuple = ()

    def __post_init__(self):
        if self.kind not in _TRANSFORM_KINDS:
            raise InputError(f"unknown transform kind {self.kind!r}")

    @classmethod
    def identity(cls) -> "MonotoneTransform":
        return cls("identity")

    @classmethod
    def log(cls) -> "MonotoneTransform":
        return cls("log")

    @classmethod
    def affine(cls, a: float, b: float = 0.0) -> "MonotoneTransform":
        if not (a > 0 and math.isfinite(a) and math.isfinite(b)):
            raise InputError("affine transform needs a finite slope a > 0")
        return cls("affine", (float(a), float(b)))

    @classmethod
    def indicator_shift(cls, threshold: float) -> "MonotoneTransform":
        """``y -> y - 1[y <= threshold]``."""
        return cls("indicator_shift", (float(threshold),))

    @classmethod
    def table(cls, inputs: Sequence[float], outputs: Sequence[float]) -> "MonotoneTransform":
        """Piecewise-linear interpolation through ``(inputs[i], outputs[i])``.

        Defined only on ``[inputs[0], inputs[-1]]``.
        """
        xs = tuple(float(x) for x in inputs)
        ys = tuple(float(y) for y in outputs)
        if len(xs) != len(ys) or len(xs) < 2:
            raise InputError("table transform needs at least two (input, output) pairs")
        if not (np.all(np.diff(xs) > 0) and np.all(np.diff(ys) > 0)):
            raise MonotonicityError("table inputs and outputs must be strictly increasing")
        return cls("table", (xs, ys))

    def __call__(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        if self.kind == "identity":
            return y.copy()
        if self.kind == "log":
            if np.any(y <= 0):
                raise DomainError("log transform requires strictly positive support")
            return np.log(y)
        if self.kind == "affine":
            a, b = self.params
            return a * y + b
        if self.kind == "indicator_shift":
            (threshold,) = self.params
            return y - (y <= threshold)
        xs, ys = self.params
        if np.any(y < xs[0]) or np.any(y > xs[-1]):
            raise DomainError("table transform evaluated outside its input range")
        return np.interp(y, xs, ys)


def apply_transform(dist: DiscreteDistribution, g: MonotoneTransform) -> DiscreteDistribution:
    """Push ``dist`` forward through the strictly increasing map ``g``.

    Raises
    ------
    DomainError
        If ``g`` is undefined somewhere on the support.
    MonotonicityError
        If mapped support points collide or change order.
    """
    mapped = g(dist.support)
    if not np.all(np.isfinite(mapped)):
        raise DomainError(f"{g.kind} transform produced non-finite values")
    if mapped.size > 1 and not np.all(np.diff(mapped) > 0):
        raise MonotonicityError(f"{g.kind} transform is not strictly increasing on the support")
    return DiscreteDistribution(mapped, dist.masses, dist.total_weight)


# -- construction -------------------------------------------------------------


def weighted_pmf(outcomes, weights=None) -> DiscreteDistribution:
    """Weighted empirical PMF from parallel arrays of outcomes and weights."""
    y = np.asarray(outcomes, dtype=float).reshape(-1)
    if y.size == 0:
        raise InputError("cannot build a distribution from zero observations")
    w = np.ones_like(y) if weights is None else np.asarray(weights, dtype=float).reshape(-1)
    if w.shape != y.shape:
        raise InputError("outcomes and weights must have the same length")
    if not np.all(np.isfinite(y)):
        raise InputError("outcomes must be finite")
    if not np.all(np.isfinite(w)) or np.any(w <= 0):
        raise InputError("weights must be finite and strictly positive")
    support, inverse = np.unique(y, return_inverse=True)
    raw = np.bincount(inverse.reshape(-1), weights=w, minlength=support.size)
    total = raw.sum()
    return DiscreteDistribution(support, raw / total, float(total))


def empirical_pmf(observations: Iterable[tuple[float, float]]) -> DiscreteDistribution:
    """Weighted empirical PMF from ``(outcome, weight)`` pairs.

    >>> empirical_pmf([(0, 1), (1, 1), (1, 2)]).masses.tolist()
    [0.25, 0.75]
    """
    pairs = list(observations)
    if not pairs:
        raise InputError("cannot build a distribution from zero observations")
    arr = np.asarray(pairs, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise InputError("observations must be (outcome, weight) pairs")
    return weighted_pmf(arr[:, 0], arr[:, 1])


@dataclass(frozen=True)
class Binning:
    """Left-closed bins ``[origin + k*width, origin + (k+1)*width)`` labelled by left edge.

    With ``zero_bin`` set, outcomes exactly equal to 0 get a dedicated bin
    whose label is one bin below the lower of the origin bin and the bin
    containing 0. Any other outcome falling into that reserved bin is an
    error, except the reserved label itself (so binning is idempotent).
    """

    width: float
    origin: float = 0.0
    zero_bin: bool = False

    def __post_init__(self):
        if not (self.width > 0 and math.isfinite(self.width)):
            raise InputError("bin width must be positive and finite")
        if not math.isfinite(self.origin):
            raise InputError("bin origin must be finite")

    def _index(self, y: np.ndarray) -> np.ndarray:
        k = np.floor((y - self.origin) / self.width)
        # align with the label arithmetic so that label(k) <= y < label(k + 1)
        k = np.where(self.origin + k * self.width > y, k - 1, k)
        k = np.where(self.origin + (k + 1) * self.width <= y, k + 1, k)
        return k

    @property
    def zero_label(self) -> float:
        k_zero = self._index(np.array([0.0]))[0]
        return float(self.origin + (min(0.0, k_zero) - 1) * self.width)

    def labels(self, outcomes) -> np.ndarray:
        y = np.asarray(outcomes, dtype=float)
        if not np.all(np.isfinite(y)):
            raise InputError("outcomes must be finite")
        k = self._index(y)
        out = self.origin + k * self.width
        if self.zero_bin:
            zero_label = self.zero_label
            is_zero = (y == 0) | (y == zero_label)
            clash = (out == zero_label) & ~is_zero
            if np.any(clash):
                bad = y[clash][0]
                raise InputError(
                    f"outcome {bad!r} falls in the bin reserved for zero outcomes "
                    f"(label {zero_label!r}); choose a different origin"
                )
            out = np.where(is_zero, zero_label, out)
        return out


def discretize(
    observations: Iterable[tuple[float, float]],
    bin_width: float,
    origin: float = 0.0,
    zero_bin: bool = False,
) -> DiscreteDistribution:
    """Bin ``(outcome, weight)`` pairs and return the PMF over bin labels."""
    binning = Binning(bin_width, origin, zero_bin)
    pairs = list(observations)
    if not pairs:
        raise InputError("cannot build a distribution from zero observations")
    arr = np.asarray(pairs, dtype=float)
    return weighted_pmf(binning.labels(arr[:, 0]), arr[:, 1])


def discretize_law(
    law,
    bin_width: float,
    origin: float = 0.0,
    lo: float | None = None,
    hi: float | None = None,
    tail: float = 1e-8,
) -> DiscreteDistribution:
    """Discretize a continuous law (anything with ``cdf`` and ``ppf``) onto bins.

    The grid runs from the bin containing ``lo`` to the bin containing
    ``hi`` (by default the ``tail`` and ``1 - tail`` quantiles); mass outside
    is folded into the end bins, so the result sums to one exactly up to
    rounding. Bins are labelled by their left edge.
    """
    binning = Binning(bin_width, origin)
    lo = float(law.ppf(tail)) if lo is None else lo
    hi = float(law.ppf(1 - tail)) if hi is None else hi
    if not hi >= lo:
        raise InputError("empty discretization range")
    k0, k1 = binning._index(np.array([lo, hi]))
    ks = np.arange(k0, k1 + 1)
    labels = origin + ks * bin_width
    edges = origin + (ks[1:]) * bin_width
    cum = np.concatenate([[0.0], law.cdf(edges), [1.0]])
    masses = np.clip(np.diff(cum), 0.0, None)
    masses = masses / masses.sum()
    return DiscreteDistribution(labels, masses)


# -- operations ---------------------------------------------------------------


def _embed(dist: SignedMeasure, support: np.ndarray) -> np.ndarray:
    idx = np.searchsorted(support, dist.support)
    if np.any(idx >= support.size) or np.any(support[np.minimum(idx, support.size - 1)] != dist.support):
        raise InputError("target support does not contain the distribution's support")
    out = np.zeros(support.size)
    out[idx] = dist.masses
    return out


def align_supports(distributions: Sequence[DiscreteDistribution]) -> list[DiscreteDistribution]:
    """Re-express every distribution on the union of all supports."""
    distributions = list(distributions)
    if not distributions:
        raise InputError("need at least one distribution")
    if all(np.array_equal(d.support, distributions[0].support) for d in distributions):
        return distributions
    union = distributions[0].support
    for d in distributions[1:]:
        union = np.union1d(union, d.support)
    return [d.on_support(union) for d in distributions]


def cdf(dist: SignedMeasure) -> CumulativeCurve:
    """Prefix sums of the masses (works for signed measures too)."""
    return CumulativeCurve(dist.support, np.cumsum(dist.masses))


def total_variation(f1: DiscreteDistribution, f2: DiscreteDistribution) -> float:
    """``sum_y max(f1(y) - f2(y), 0)``, the total variation distance."""
    a, b = align_supports([f1, f2])
    if not np.minimum(a.masses, b.masses).any():
        return 1.0
    return float(min(1.0, np.maximum(a.masses - b.masses, 0.0).sum()))


def mean(dist: DiscreteDistribution) -> float:
    return float(np.dot(dist.support, dist.masses))


def mix(weight: float, first: DiscreteDistribution, second: DiscreteDistribution) -> DiscreteDistribution:
    """``weight * first + (1 - weight) * second`` on the union support."""
    if not 0.0 <= weight <= 1.0:
        raise InputError("mixture weight must lie in [0, 1]")
    a, b = align_supports([first, second])
    return DiscreteDistribution(a.support, weight * a.masses + (1.0 - weight) * b.masses)
