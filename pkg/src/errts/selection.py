"""Unit-root screening, AIC lag selection and the differencing workflow."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike
from statsmodels.tsa.stattools import adfuller

from errts.estimation import fit_ls
from errts.exceptions import DataError
from errts.series import Series, as_series, difference

__all__ = ["AdfResult", "ScreenResult", "adf_test", "default_adf_lags", "aic", "select_lag", "screen"]

_TINY = np.nextafter(0.0, 1.0)


@dataclass(frozen=True)
class AdfResult:
    statistic: float
    p_value: float
    lags_used: int
    n_obs: int
    deterministic: str = "constant"


def default_adf_lags(T: int) -> int:
    """``floor((T - 1)^(1/3))``."""
    return int(math.floor((T - 1) ** (1.0 / 3.0) + 1e-12))


def adf_test(s: Series | ArrayLike, lags: int | None = None) -> AdfResult:
    """Augmented Dickey-Fuller test with a constant and fixed lag order.

    The regression and MacKinnon's approximate p-value come from
    ``statsmodels``.
    """
    x = as_series(s)
    T = len(x)
    if T < 15:
        raise DataError(f"ADF test needs T >= 15, got {T}")
    if x.is_constant:
        raise DataError("constant series: ADF test undefined")
    k = default_adf_lags(T) if lags is None else int(lags)
    stat, pval, used, nobs, *_ = adfuller(x.values, maxlag=k, regression="c", autolag=None)
    pval = float(np.clip(pval, _TINY, 1.0 - np.finfo(float).eps))
    return AdfResult(float(stat), pval, int(used), int(nobs))


def _window_residuals(s: Series, p: int, p_max: int):
    resid = fit_ls(s, p).residuals
    return resid[p_max - p :]


def aic(s: Series | ArrayLike, p: int, p_max: int | None = None) -> float:
    """Gaussian conditional AIC ``-2 log L + 2 p`` of the least-squares AR(p) fit.

    The likelihood runs over ``t = p_max+1..T`` (``p_max`` defaults to ``p``)
    with the maximum-likelihood variance of the residuals in that window.
    """
    s = as_series(s)
    p_max = p if p_max is None else p_max
    if p_max < p:
        raise DataError("p_max must be at least p")
    r = _window_residuals(s, p, p_max)
    n = r.size
    sigma2 = float(r @ r) / n
    if not sigma2 > 0:
        raise DataError("perfect fit: AIC undefined")
    loglik = -0.5 * n * (math.log(2 * math.pi * sigma2) + 1)
    return -2 * loglik + 2 * p


def select_lag(s: Series | ArrayLike, p_max: int) -> int:
    """Lag ``1..p_max`` with the smallest AIC; ties go to the smaller lag.

    All candidates are scored on the same window ``t = p_max+1..T`` so their
    likelihoods are comparable.
    """
    s = as_series(s)
    if p_max < 1:
        raise DataError("p_max must be positive")
    if not p_max < len(s) / 5:
        raise DataError(f"p_max={p_max} too large for T={len(s)}: need p_max < T/5")
    scores = [aic(s, p, p_max) for p in range(1, p_max + 1)]
    return int(np.argmin(scores)) + 1


@dataclass(frozen=True)
class ScreenResult:
    diff_order: int
    adf: AdfResult
    warning: bool
    series: Series


def screen(s: Series | ArrayLike, max_diff: int = 1, level: float = 0.10) -> ScreenResult:
    """Smallest differencing order whose series rejects a unit root at ``level``.

    If none up to ``max_diff`` rejects, returns ``max_diff`` with ``warning``
    set.
    """
    cur = as_series(s)
    for d in range(max_diff + 1):
        res = adf_test(cur)
        if res.p_value < level:
            return ScreenResult(d, res, False, cur)
        if d < max_diff:
            cur = difference(cur)
    return ScreenResult(max_diff, res, True, cur)
