"""Robust mean estimation for heavy-tailed data: truncated-mean estimators
with non-asymptotic, observable confidence intervals under variance or
kurtosis priors, closed-form deviation bounds, and a seeded Monte Carlo
coverage harness."""

__version__ = "0.1.0"

from .core import (
    AlphaPolicy,
    ConfidenceEstimate,
    PriorBounds,
    Sample,
    truncated_mean,
    width_clipped,
    width_prop31,
    width_prop32,
)
from .errors import (
    AdmissibilityError,
    DomainError,
    EmptyFamily,
    InvalidParameter,
    NoRoot,
    NumericalError,
    TruncMeanError,
)
from .iterated import (
    IterationSchedule,
    JitterSource,
    run_iterated,
    schedule_empirical_start,
    schedule_known_delta0,
    split_eps,
)
from .scalar_funcs import (
    CLIP_A,
    CLIP_LAMBDA,
    TruncationKind,
    normal_cdf,
    normal_quantile,
)

__all__ = [
    "__version__",
    "AlphaPolicy",
    "ConfidenceEstimate",
    "PriorBounds",
    "Sample",
    "truncated_mean",
    "width_clipped",
    "width_prop31",
    "width_prop32",
    "AdmissibilityError",
    "DomainError",
    "EmptyFamily",
    "InvalidParameter",
    "NoRoot",
    "NumericalError",
    "TruncMeanError",
    "IterationSchedule",
    "JitterSource",
    "run_iterated",
    "schedule_empirical_start",
    "schedule_known_delta0",
    "split_eps",
    "CLIP_A",
    "CLIP_LAMBDA",
    "TruncationKind",
    "normal_cdf",
    "normal_quantile",
]
