"""Goodness-of-fit tests for the inverse Gaussian family."""

__version__ = "0.1.0"

from igfit.competing import (  # noqa: E402
    TABLE_STATS,
    StatKind,
    StatTag,
    ad_stat,
    cm_stat,
    compute_statistic,
    scaled_statistic,
    hk1_stat,
    hk2_stat,
    ks_stat,
    vg_stat,
)
from igfit.datasets import load_dataset, read_data_file  # noqa: E402
from igfit.errors import DegenerateSampleError, DomainError, IGFitError, NumericalError  # noqa: E402
from igfit.estimators import EstimatorKind, ScaledSample, estimate_ml, estimate_mo, scale_sample  # noqa: E402
from igfit.ig_core import IGParams, erfce, ig_cdf, ig_laplace, ig_pdf, ig_sample, std_normal_cdf  # noqa: E402
from igfit.montecarlo import (  # noqa: E402
    AltSpec,
    BootstrapConfig,
    PowerStudyConfig,
    bootstrap_test,
    bootstrap_tests,
    sample_alternative,
    warp_speed_power,
)
from igfit.stein import (  # noqa: E402
    WeightSpec,
    characterization_residual,
    delta_limit,
    statistic_T,
    statistic_T_quadrature,
    statistic_T_tilde,
)
