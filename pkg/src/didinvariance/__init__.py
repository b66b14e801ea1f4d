"""Is parallel trends insensitive to functional form? Tools to find out.

The package builds the counterfactual distribution implied by parallel
trends of CDFs, tests it for negative mass, and exposes the mixture
structure that characterizes transformation-invariant parallel trends.
"""

__version__ = "0.1.0"

from .counterfactual import (
    check_cdf_parallel,
    cic_counterfactual,
    compare_counterfactuals,
    counterfactual_divergence,
    did_att,
    implied_counterfactual,
)
from .distributions import (
    Binning,
    CumulativeCurve,
    DiscreteDistribution,
    MonotoneTransform,
    SignedMeasure,
    align_supports,
    apply_transform,
    cdf,
    discretize,
    empirical_pmf,
    mean,
    total_variation,
)
from .errors import (
    DomainError,
    InputError,
    MonotonicityError,
    NumericalError,
    ParseError,
    SchemaError,
    ValidationError,
)
from .inference import (
    TestConfig,
    TestResult,
    cluster_bootstrap_cov,
    estimate_implied_pmf,
    falsification_test,
    least_favorable_cv,
    studentized_min,
)
from .mixture import (
    Case3Spec,
    MixtureDecomposition,
    build_case3_quadruple,
    decompose,
    example3_oracle_mean,
    reconstruct,
)
from .panel import FourCells, PanelDataset, cell_distributions, parse_panel_csv
from .simulate import simulate_example3
