"""Falsification test for parallel trends of distributions.

The null is that the implied counterfactual PMF ``f10 + f01 - f00`` is
non-negative at every support point. Its sampling covariance comes from a
cluster bootstrap, the statistic is the smallest studentized mass, and the
critical value is the least-favorable one that treats every moment as
binding at zero.

Randomness is indexed, never shared: bootstrap replicate ``b`` draws from
``SeedSequence([seed, 0, b])`` and the critical-value simulation from
``SeedSequence([seed, 1])``, so results do not depend on ``workers``.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import NamedTuple

import numpy as np

from .counterfactual import implied_counterfactual
from .distributions import MASS_TOL, Binning, SignedMeasure
from .errors import InputError, NumericalError
from .panel import PanelDataset, cell_distributions

__all__ = [
    "TestConfig",
    "TestResult",
    "StudentizedMin",
    "estimate_implied_pmf",
    "cluster_bootstrap_cov",
    "bootstrap_replicates",
    "studentized_min",
    "least_favorable_cv",
    "simulate_minima",
    "falsification_test",
]

#: standard errors at or below this are treated as exactly zero
ZERO_SE = 1e-12
#: cells entering the implied PMF, as (group, period)
USED_CELLS = ((1, 0), (0, 1), (0, 0))
_SIGNS = np.array([1.0, 1.0, -1.0])


@dataclass(frozen=True)
class TestConfig:
    """Tuning of the falsification test.

    ``bootstrap_reps`` and ``cv_sims`` are the number of cluster bootstrap
    replicates and of Gaussian draws for the critical value.
    """

    __test__ = False

    alpha: float = 0.05
    bootstrap_reps: int = 1000
    cv_sims: int = 10000
    seed: int = 0
    bin_width: float | None = None
    origin: float = 0.0
    zero_bin: bool = False
    min_se_floor: float = 0.0
    drop_empty_bins: bool = True
    workers: int = 1

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise InputError("alpha must lie in (0, 1)")
        if self.bootstrap_reps < 100:
            raise InputError("need at least 100 bootstrap replicates")
        if self.cv_sims < 1000:
            raise InputError("need at least 1000 critical-value simulations")
        if self.min_se_floor < 0:
            raise InputError("min_se_floor must be non-negative")
        if self.workers < 1:
            raise InputError("workers must be at least 1")

    @property
    def binning(self) -> Binning | None:
        if self.bin_width is None:
            if self.zero_bin:
                raise InputError("zero_bin requires a bin width")
            return None
        return Binning(self.bin_width, self.origin, self.zero_bin)


# -- estimation ---------------------------------------------------------------


def estimate_implied_pmf(
    panel: PanelDataset, binning: Binning | None = None, drop_empty_bins: bool = True
) -> tuple[SignedMeasure, np.ndarray]:
    """Sample analog of the implied counterfactual PMF.

    With ``drop_empty_bins`` the support keeps only points where at least
    one of the three cells used has positive mass.
    """
    cells = cell_distributions(panel, binning)
    pmf = implied_counterfactual(cells).pmf
    if drop_empty_bins:
        used = np.zeros(len(cells.support), dtype=bool)
        for d, t in USED_CELLS:
            used |= cells.dists[d][t].masses > 0
        pmf = pmf.restrict(used)
    return pmf, pmf.support


class _ClusterTable:
    """Per-cluster weight totals by used cell and support point."""

    def __init__(self, panel: PanelDataset, binning: Binning | None, support: np.ndarray):
        labels = panel.outcome if binning is None else binning.labels(panel.outcome)
        clusters, code = np.unique(panel.cluster_id.astype(str), return_inverse=True)
        code = code.reshape(-1)
        self.n_clusters = clusters.size
        J = support.size
        pos = np.searchsorted(support, labels)
        in_support = (pos < J) & (support[np.minimum(pos, J - 1)] == labels)
        self.mass = np.zeros((self.n_clusters, 3, J))
        self.total = np.zeros((self.n_clusters, 3))
        for c, (d, t) in enumerate(USED_CELLS):
            rows = panel.cell_mask(d, t)
            if np.any(rows & ~in_support):
                raise InputError("support does not cover every observation of the used cells")
            np.add.at(self.mass[:, c, :], (code[rows], pos[rows]), panel.weight[rows])
            np.add.at(self.total[:, c], code[rows], panel.weight[rows])
        self._flat = self.mass.reshape(self.n_clusters, 3 * J)
        self.J = J

    def implied(self, counts: np.ndarray) -> np.ndarray | None:
        totals = counts @ self.total
        if np.any(totals <= 0):
            return None
        masses = (counts @ self._flat).reshape(3, self.J) / totals[:, None]
        return _SIGNS @ masses


def _replicate_rng(seed: int, b: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), 0, int(b)])))


def _run_replicates(table: _ClusterTable, indices: range, seed: int, max_attempts: int):
    K = table.n_clusters
    out = np.empty((len(indices), table.J))
    attempts = 0
    for row, b in enumerate(indices):
        rng = _replicate_rng(seed, b)
        for tries in range(1, max_attempts + 1):
            counts = np.bincount(rng.integers(0, K, size=K), minlength=K).astype(float)
            value = table.implied(counts)
            if value is not None:
                break
        else:
            raise NumericalError(
                f"bootstrap replicate {b} left a required cell empty in {max_attempts} draws; "
                "more clusters per cell are needed"
            )
        attempts += tries
        out[row] = value
    return out, attempts


def bootstrap_replicates(
    panel: PanelDataset,
    binning: Binning | None,
    support: np.ndarray,
    B: int,
    seed: int,
    workers: int = 1,
) -> np.ndarray:
    """``B x len(support)`` array of implied PMFs on cluster-resampled panels.

    Each replicate draws as many clusters as the panel has, with
    replacement. Draws that leave a used cell empty are redrawn within the
    same replicate; if more than half of all draws fail, or one replicate
    fails ``10 * B`` times, :class:`NumericalError` is raised.
    """
    if B < 1:
        raise InputError("need at least one bootstrap replicate")
    table = _ClusterTable(panel, binning, np.asarray(support, dtype=float))
    if table.n_clusters < 2:
        raise InputError("cluster bootstrap needs at least two clusters")
    max_attempts = 10 * B
    chunks = [range(lo, min(lo + 64, B)) for lo in range(0, B, 64)]
    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda r: _run_replicates(table, r, seed, max_attempts), chunks))
    else:
        parts = [_run_replicates(table, r, seed, max_attempts) for r in chunks]
    draws = np.concatenate([p[0] for p in parts])
    attempts = sum(p[1] for p in parts)
    if attempts - B > attempts / 2:
        raise NumericalError(
            f"{attempts - B} of {attempts} bootstrap draws left a required cell empty; "
            "more clusters per cell are needed"
        )
    return draws


def cluster_bootstrap_cov(
    panel: PanelDataset,
    binning: Binning | None,
    B: int,
    seed: int,
    support: np.ndarray | None = None,
    workers: int = 1,
) -> np.ndarray:
    """Bootstrap covariance of the implied PMF over ``support``.

    ``support`` defaults to the estimate's own (empty bins dropped) and stays
    fixed across replicates; bins absent from a replicate contribute zero.
    Replicates are not recentered.
    """
    if support is None:
        support = estimate_implied_pmf(panel, binning)[1]
    draws = bootstrap_replicates(panel, binning, support, B, seed, workers)
    return np.atleast_2d(np.cov(draws, rowvar=False, ddof=1))


# -- statistic and critical value ---------------------------------------------


class StudentizedMin(NamedTuple):
    statistic: float
    argmin: float
    values: np.ndarray
    usable: np.ndarray


def studentized_min(pmf: SignedMeasure, se) -> StudentizedMin:
    """Smallest ``f(y) / se(y)`` over usable support points.

    Points with zero standard error are skipped when their estimate is
    non-negative; a negative estimate with zero standard error makes the
    statistic ``-inf``.

    >>> pmf = SignedMeasure([0.0, 1.0, 2.0], [0.1, -0.05, 0.95])
    >>> studentized_min(pmf, [0.02, 0.01, 0.1]).statistic
    -5.0
    """
    f = np.asarray(pmf.masses, dtype=float)
    se = np.asarray(se, dtype=float)
    if se.shape != f.shape:
        raise InputError("need one standard error per support point")
    if np.any(se < 0) or not np.all(np.isfinite(se)):
        raise InputError("standard errors must be finite and non-negative")
    zero = se <= ZERO_SE
    usable = ~zero
    values = np.full(f.shape, np.nan)
    values[usable] = f[usable] / se[usable]
    forced = zero & (f < -MASS_TOL)
    if forced.any():
        i = int(np.flatnonzero(forced)[0])
        return StudentizedMin(-math.inf, float(pmf.support[i]), values, usable)
    if not usable.any():
        raise NumericalError(
            "every support point has zero bootstrap variance; the test is undefined"
        )
    i = int(np.nanargmin(values))
    return StudentizedMin(float(values[i]), float(pmf.support[i]), values, usable)


def _check_matrix(corr) -> np.ndarray:
    m = np.asarray(corr, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise InputError("correlation matrix must be square and non-empty")
    if not np.all(np.isfinite(m)):
        raise InputError("correlation matrix must be finite")
    if not np.allclose(m, m.T, rtol=0, atol=1e-10):
        raise InputError("correlation matrix must be symmetric")
    return (m + m.T) / 2


def _gaussian_factor(m: np.ndarray) -> tuple[np.ndarray, bool]:
    eigval, eigvec = np.linalg.eigh(m)
    projected = bool(eigval.min() < -1e-10 * max(1.0, eigval.max()))
    if projected:
        warnings.warn(
            "correlation matrix is not positive semi-definite; clipping negative eigenvalues",
            RuntimeWarning,
            stacklevel=3,
        )
    return eigvec * np.sqrt(np.clip(eigval, 0.0, None)), projected


class SimulatedMinima(NamedTuple):
    minima: np.ndarray
    psd_projected: bool
    min_eigenvalue: float


def simulate_minima(corr, S: int, seed: int) -> SimulatedMinima:
    """Minima of ``S`` zero-mean Gaussian vectors with covariance ``corr``."""
    m = _check_matrix(corr)
    factor, projected = _gaussian_factor(m)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), 1])))
    z = rng.standard_normal((int(S), m.shape[0])) @ factor.T
    return SimulatedMinima(z.min(axis=1), projected, float(np.linalg.eigvalsh(m).min()))


def _lower_quantile(minima: np.ndarray, alpha: float) -> float:
    return float(np.quantile(minima, alpha, method="inverted_cdf"))


def least_favorable_cv(corr, alpha: float, S: int, seed: int) -> float:
    """Alpha-quantile of the minimum of a Gaussian vector with correlation ``corr``.

    The quantile is the order statistic ``ceil(alpha * S)`` of the simulated
    minima.
    """
    if not 0.0 < alpha < 1.0:
        raise InputError("alpha must lie in (0, 1)")
    return _lower_quantile(simulate_minima(corr, S, seed).minima, alpha)


# -- full test ----------------------------------------------------------------


@dataclass
class TestResult:
    """Outcome of :func:`falsification_test`.

    ``decision`` is ``"reject"`` iff ``statistic < critical_value``; the
    p-value is the share of simulated minima strictly below the statistic.
    When ``status`` is ``"numerical_failure"`` only ``error`` and the
    configuration are meaningful.
    """

    __test__ = False

    config: TestConfig
    status: str = "ok"
    error: str | None = None
    support: np.ndarray = field(default_factory=lambda: np.empty(0))
    estimates: np.ndarray = field(default_factory=lambda: np.empty(0))
    se: np.ndarray = field(default_factory=lambda: np.empty(0))
    studentized: np.ndarray = field(default_factory=lambda: np.empty(0))
    statistic: float | None = None
    argmin: float | None = None
    critical_value: float | None = None
    p_value: float | None = None
    decision: str | None = None
    negative_bins: list = field(default_factory=list)
    zero_se_bins: list = field(default_factory=list)
    correlation: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    @property
    def rejected(self) -> bool:
        return self.decision == "reject"

    def config_dict(self) -> dict:
        return asdict(self.config)


def _correlation_summary(corr: np.ndarray, sims: SimulatedMinima | None) -> dict:
    k = corr.shape[0]
    off = corr[~np.eye(k, dtype=bool)]
    return {
        "dimension": int(k),
        "min_offdiagonal": float(off.min()) if off.size else None,
        "max_offdiagonal": float(off.max()) if off.size else None,
        "min_eigenvalue": None if sims is None else sims.min_eigenvalue,
        "psd_projected": False if sims is None else sims.psd_projected,
    }


def falsification_test(panel: PanelDataset, config: TestConfig = TestConfig()) -> TestResult:
    """Test that the implied counterfactual PMF is non-negative everywhere.

    Numerical failures (degenerate bootstrap, no usable support points) are
    reported through ``status`` instead of raised.
    """
    result = TestResult(config=config)
    try:
        binning = config.binning
        pmf, support = estimate_implied_pmf(panel, binning, config.drop_empty_bins)
        result.support = support
        result.estimates = pmf.masses
        cov = cluster_bootstrap_cov(
            panel, binning, config.bootstrap_reps, config.seed, support, config.workers
        )
        se = np.sqrt(np.clip(np.diag(cov), 0.0, None))
        if config.min_se_floor > 0:
            se = np.maximum(se, config.min_se_floor)
        result.se = se
        result.negative_bins = support[pmf.masses < 0].tolist()
        result.zero_se_bins = support[se <= ZERO_SE].tolist()
        stud = studentized_min(pmf, se)
        result.studentized = stud.values
        result.statistic = stud.statistic
        result.argmin = stud.argmin
        u = stud.usable
        sims = None
        if u.any():
            corr = cov[np.ix_(u, u)] / np.outer(se[u], se[u])
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always")
                sims = simulate_minima(corr, config.cv_sims, config.seed)
            result.warnings.extend(str(w.message) for w in caught)
            result.correlation = _correlation_summary(corr, sims)
            result.critical_value = _lower_quantile(sims.minima, config.alpha)
        if sims is None:
            # only zero-variance points with a negative estimate remain
            result.p_value = 0.0
            result.decision = "reject"
        else:
            result.p_value = float(np.mean(sims.minima < stud.statistic))
            result.decision = "reject" if stud.statistic < result.critical_value else "fail_to_reject"
    except NumericalError as exc:
        result.status = "numerical_failure"
        result.error = str(exc)
        result.decision = None
    return result
