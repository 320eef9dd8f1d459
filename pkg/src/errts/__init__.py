"""Autoregressive models for time series observed with measurement error.

Naive fits of a contaminated series are biased towards zero. This package
gives the limits of those fits in closed form and corrects them for a known
error mechanism. Forecast intervals account for error in the initial values.
"""

from errts.corrected import (
    BootstrapResult,
    CorrectedFit,
    block_bootstrap,
    corrected_moments,
    fit_corrected,
    sandwich_cov,
)
from errts.error_models import (
    TAU_A,
    AdditiveError,
    MultiplicativeError,
    contaminate,
    scale_from_tau,
    surrogate_mean,
    surrogate_var,
    validate_bounds,
)
from errts.estimation import ArFit, ArModel, FitMethod, fit_ee, fit_ls, fitted_equivalence_gap
from errts.exceptions import (
    BoundViolationError,
    ConditioningError,
    DataError,
    ErrtsError,
    MissingMomentError,
    ModelError,
    NonStationaryError,
    OvercorrectionError,
    TruncationError,
)
from errts.forecasting import Forecast, adjust_initials, forecast, monte_carlo_mspe, mspe, prediction_interval
from errts.naive import (
    MomentSet,
    NaiveLimit,
    bartlett_q,
    estimate_moments,
    gaussian_moments,
    naive_limit_ar1_additive,
    naive_limit_ar1_multiplicative,
    naive_limit_arp,
    omega1,
    omega2,
    q1_element,
    q2_element,
)
from errts.selection import AdfResult, adf_test, aic, screen, select_lag
from errts.series import (
    AutocovSummary,
    Series,
    autocov_hat,
    autocov_summary,
    difference,
    integrate,
    is_stationary,
    mean_hat,
)

__version__ = "0.1.0"
