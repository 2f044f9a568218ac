"""Integrated organic inference: post-data densities from three routes.

The package computes post-data densities for a scalar parameter by pivot
inversion (fiducial), by prior updating (bayes), and by P-value assessment
of region probabilities (bispatial), composes per-region densities into a
mixture (compose), and samples joint laws defined only through their full
conditionals (gibbs). ``estimators`` wraps the routes in scikit-learn
style classes; ``cli`` is the batch front door.
"""

__version__ = "0.1.0"

from .bayes import (
    LikelihoodKernel,
    NormalPrior,
    conjugate_normal_update,
    grid_bayes_update,
    normal_mean_likelihood,
    uniform_grid_prior,
)
from .bispatial import (
    P_VALUE_THRESHOLD,
    BispatialConfig,
    PValueResult,
    assess_region_probability,
    default_odds_calibration,
    one_sided_p_value,
)
from .compose import (
    Region,
    RegionPartition,
    RegionalDensitySet,
    compose,
    ioi_pipeline,
    truncate_to_region,
    two_region_split,
)
from .density import (
    DEFAULT_GRID_POINTS,
    Density1D,
    SampleBatch,
    std_normal_cdf,
    std_normal_pdf,
    std_normal_quantile,
)
from .exceptions import (
    AnalogyRejected,
    ChainAborted,
    DegenerateUpdate,
    EmptyRegion,
    InferenceError,
    InputError,
    NumericalError,
    UndefinedRatio,
)
from .fiducial import (
    DataSummary,
    Pivot,
    PriorKnowledge,
    fiducial_density,
    fiducial_region_probability,
    normal_mean_pivot,
)
from .gibbs import (
    ChainResult,
    CompatibilityResult,
    ConditionalSet,
    ConditionalSpec,
    ScanOrder,
    ScanSensitivityResult,
    bivariate_normal_mean_family,
    build_conditional_set,
    canonical_compatible_set,
    canonical_incompatible_set,
    check_compatibility,
    default_burn_in,
    gibbs_run,
    scan_sensitivity,
    two_sample_ks,
)

__all__ = [
    "__version__",
    "AnalogyRejected",
    "BispatialConfig",
    "ChainAborted",
    "ChainResult",
    "CompatibilityResult",
    "ConditionalSet",
    "ConditionalSpec",
    "DEFAULT_GRID_POINTS",
    "DataSummary",
    "DegenerateUpdate",
    "Density1D",
    "EmptyRegion",
    "InferenceError",
    "InputError",
    "LikelihoodKernel",
    "NormalPrior",
    "NumericalError",
    "P_VALUE_THRESHOLD",
    "PValueResult",
    "Pivot",
    "PriorKnowledge",
    "Region",
    "RegionPartition",
    "RegionalDensitySet",
    "SampleBatch",
    "ScanOrder",
    "ScanSensitivityResult",
    "UndefinedRatio",
    "assess_region_probability",
    "bivariate_normal_mean_family",
    "build_conditional_set",
    "canonical_compatible_set",
    "canonical_incompatible_set",
    "check_compatibility",
    "compose",
    "conjugate_normal_update",
    "default_burn_in",
    "default_odds_calibration",
    "fiducial_density",
    "fiducial_region_probability",
    "gibbs_run",
    "grid_bayes_update",
    "ioi_pipeline",
    "normal_mean_likelihood",
    "normal_mean_pivot",
    "one_sided_p_value",
    "scan_sensitivity",
    "std_normal_cdf",
    "std_normal_pdf",
    "std_normal_quantile",
    "truncate_to_region",
    "two_region_split",
    "two_sample_ks",
    "uniform_grid_prior",
]
