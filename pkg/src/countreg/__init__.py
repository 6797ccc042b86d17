"""Count-data regression: Poisson, NB, and ZINB by maximum likelihood.

Fits log-link count models with an optional logit-link zero-inflation part,
reports incidence-rate ratios with significance stars, and provides the
chi-square screening, dispersion, and zero-inflation diagnostics used to
choose among the families.  Likelihood kernels run through numba when
available; set COUNTREG_NO_NUMBA=1 to force the pure-numpy path.
"""

from ._kernels import BACKEND, warm_up
from .data import (
    Column,
    Dataset,
    DesignMatrix,
    ModelSpec,
    build_design,
    load_csv,
    parse_schema,
)
from .diagnostics import (
    ContingencyResult,
    DispersionSummary,
    ZeroSummary,
    chi_square_independence,
    chi_square_sf,
    dispersion_summary,
    screen,
    zero_summary,
)
from .distributions import (
    NbParams,
    ZinbParams,
    nb_log_pmf,
    nb_moments,
    poisson_log_pmf,
    sample_nb,
    sample_poisson,
    sample_zinb,
    zinb_log_pmf,
    zinb_moments,
)
from .errors import (
    ComparisonError,
    ConfigurationError,
    CountregError,
    DegenerateCovariateError,
    DegenerateTableError,
    EvaluationError,
    InsufficientDataError,
    ParameterDomainError,
    RowParseError,
    SchemaError,
)
from .fitting import (
    ComparisonRow,
    FitOptions,
    FitResult,
    IrrRow,
    ParamVector,
    compare_models,
    fit,
    gradient,
    irr_table,
    log_likelihood,
)
from .report import format_estimate_cell, stars_for_p
from .simulate import CovariateSpec, SimConfig, demo_preset, simulate

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "Column",
    "ComparisonError",
    "ComparisonRow",
    "ConfigurationError",
    "ContingencyResult",
    "CountregError",
    "CovariateSpec",
    "Dataset",
    "DegenerateCovariateError",
    "DegenerateTableError",
    "DesignMatrix",
    "DispersionSummary",
    "EvaluationError",
    "FitOptions",
    "FitResult",
    "InsufficientDataError",
    "IrrRow",
    "ModelSpec",
    "NbParams",
    "ParamVector",
    "ParameterDomainError",
    "RowParseError",
    "SchemaError",
    "SimConfig",
    "ZeroSummary",
    "ZinbParams",
    "build_design",
    "chi_square_independence",
    "chi_square_sf",
    "compare_models",
    "demo_preset",
    "dispersion_summary",
    "fit",
    "format_estimate_cell",
    "gradient",
    "irr_table",
    "load_csv",
    "log_likelihood",
    "nb_log_pmf",
    "nb_moments",
    "parse_schema",
    "poisson_log_pmf",
    "sample_nb",
    "sample_poisson",
    "sample_zinb",
    "screen",
    "simulate",
    "stars_for_p",
    "warm_up",
    "zero_summary",
    "zinb_log_pmf",
    "zinb_moments",
]
