"""h-step forecasts with error-adjusted initial values.

Initial values are the last ``p`` surrogate observations mapped back to the
true scale. The mean squared prediction error then has two parts: the
error-free AR part and the measurement error of the initial value carried
forward by ``phi1^h``.
"""

from __future__ import annotations

import datetime as _dt
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.stats import norm

from errts.error_models import AdditiveError, ErrorModel, contaminate_array, identity_error
from errts.estimation import ArModel
from errts.exceptions import DataError, ModelError
from errts.series import Series, as_series

__all__ = [
    "Forecast",
    "adjust_initials",
    "forecast",
    "mspe",
    "mspe_path",
    "monte_carlo_mspe",
    "prediction_interval",
    "make_forecast",
    "to_levels",
]

IntervalScale = Literal["sqrt", "literal"]


def adjust_initials(values: ArrayLike, err: ErrorModel) -> NDArray[np.float64]:
    """Map surrogate values to the true scale: ``(x - alpha0) / alpha1`` or ``x / beta0``."""
    x = np.asarray(values, dtype=float)
    if isinstance(err, AdditiveError):
        return (x - err.alpha0) / err.alpha1
    return x / err.beta0


def _recurse(phi0: float, phi: NDArray[np.float64], init: NDArray[np.float64], H: int) -> NDArray[np.float64]:
    """Forecasts for every row of ``init`` (shape ``(n, p)``, oldest first)."""
    p = phi.size
    buf = np.concatenate([init, np.zeros((init.shape[0], H))], axis=1)
    rev = phi[::-1]
    for h in range(H):
        buf[:, p + h] = phi0 + buf[:, h : p + h] @ rev
    return buf[:, p:]


def forecast(model: ArModel, initials: Sequence[float], H: int) -> NDArray[np.float64]:
    """Recursive point forecasts ``X_{T+1..T+H}``.

    ``initials`` holds ``x_{T-p+1}, ..., x_T`` in time order.
    """
    init = np.asarray(initials, dtype=float).ravel()
    if init.size != model.p:
        raise DataError(f"need {model.p} initial values, got {init.size}")
    if H < 1:
        raise DataError("horizon must be at least 1")
    return _recurse(model.phi0, model.phi_array, init[None, :], H)[0]


def mspe(model: ArModel, err: ErrorModel, h: int) -> float:
    """Closed-form ``h``-step MSPE for an AR(1) model with known parameters.

    Additive: ``phi^(2h) sigma_e2 / alpha1^2 + sum_{i<h} phi^(2i) sigma_eps2``.
    Multiplicative: ``phi^(2h) (gamma_0 + mu^2) sigma_u2 + sum_{i<h} phi^(2i) sigma_eps2``.
    """
    if model.p != 1:
        raise ModelError("closed-form MSPE only for p=1; use monte_carlo_mspe")
    model.require_stationary()
    if h < 1:
        raise DataError("horizon must be at least 1")
    (phi,) = model.phi
    f2 = phi**2
    base = model.sigma_eps2 * (1 - f2**h) / (1 - f2)
    if isinstance(err, AdditiveError):
        return f2**h * err.sigma_e2 / err.alpha1**2 + base
    gamma0 = model.sigma_eps2 / (1 - f2)
    return f2**h * (gamma0 + model.mean**2) * err.sigma_u2 + base


def mspe_path(model: ArModel, err: ErrorModel, H: int) -> NDArray[np.float64]:
    return np.array([mspe(model, err, h) for h in range(1, H + 1)])


def monte_carlo_mspe(
    model: ArModel, err: ErrorModel, h: int, reps: int = 50000, seed: int = 0, batch: int = 10000
) -> float:
    """Average squared ``h``-step forecast error with contaminated initial values.

    Draws stationary paths, contaminates the ``p`` initial values, adjusts
    them, forecasts with the true model and compares with the realised value.
    Batches draw from keyed child streams of ``SeedSequence(seed)``.
    """
    from errts.montecarlo import replicate_streams, simulate_paths

    if reps < 100:
        raise DataError("reps must be at least 100")
    p = model.p
    total = 0.0
    n_batches = -(-reps // batch)
    for b, rng in enumerate(replicate_streams(seed, n_batches)):
        n = min(batch, reps - b * batch)
        x = simulate_paths(model, p + h, rng, n, burn_in=200)
        init = adjust_initials(contaminate_array(x[:, :p], err, rng), err)
        pred = _recurse(model.phi0, model.phi_array, init, h)[:, -1]
        total += float(np.sum((pred - x[:, -1]) ** 2))
    return total / reps


def _mspe_for(model: ArModel, err: ErrorModel, H: int, seed: int, reps: int) -> NDArray[np.float64]:
    if model.p == 1:
        return mspe_path(model, err, H)
    return np.array([monte_carlo_mspe(model, err, h, reps=reps, seed=seed + h) for h in range(1, H + 1)])


def prediction_interval(point, pe_h, alpha: float = 0.05, scale: IntervalScale = "sqrt"):
    """``point -/+ q P`` with ``q`` the upper ``alpha/2`` normal quantile.

    ``scale="sqrt"`` uses ``sqrt(P)`` (the prediction standard deviation);
    ``scale="literal"`` multiplies the quantile by ``P`` itself.
    """
    if not 0 < alpha < 1:
        raise DataError("alpha must lie in (0, 1)")
    pe = np.asarray(pe_h, dtype=float)
    if np.any(pe < 0):
        raise DataError("MSPE must be non-negative")
    q = norm.ppf(1 - alpha / 2)
    if scale == "sqrt":
        half = q * np.sqrt(pe)
    elif scale == "literal":
        half = q * pe
    else:
        raise DataError(f"unknown interval scale {scale!r}")
    point = np.asarray(point, dtype=float)
    lo, hi = point - half, point + half
    if lo.ndim == 0:
        return float(lo), float(hi)
    return lo, hi


@dataclass(frozen=True)
class Forecast:
    points: NDArray[np.float64]
    mspe: NDArray[np.float64]
    lower: NDArray[np.float64]
    upper: NDArray[np.float64]
    alpha: float
    scale: Literal["differenced", "level"]
    interval_scale: IntervalScale = "sqrt"
    origin: _dt.date | None = None

    @property
    def horizon(self) -> int:
        return self.points.size

    @property
    def mspe_total(self) -> float:
        return float(np.sum(self.mspe))

    def dates(self) -> list[_dt.date] | None:
        if self.origin is None:
            return None
        return [self.origin + _dt.timedelta(days=h) for h in range(1, self.horizon + 1)]


def make_forecast(
    model: ArModel,
    surrogate: Series | ArrayLike,
    err: ErrorModel | None = None,
    H: int = 5,
    alpha: float = 0.05,
    interval_scale: IntervalScale = "sqrt",
    seed: int = 0,
    mc_reps: int = 50000,
) -> Forecast:
    """Forecast ``H`` steps past the end of ``surrogate`` on its own scale.

    The MSPE is closed-form for ``p = 1`` and simulated otherwise.
    """
    s = as_series(surrogate)
    err = identity_error() if err is None else err
    init = adjust_initials(s.values[-model.p :], err)
    points = forecast(model, init, H)
    pe = _mspe_for(model, err, H, seed, mc_reps)
    lo, hi = prediction_interval(points, pe, alpha, interval_scale)
    last = None if s.origin is None else s.origin + _dt.timedelta(days=len(s) - 1)
    scale = "differenced" if s.diff_order > 0 else "level"
    return Forecast(points, pe, lo, hi, alpha, scale, interval_scale, last)


def to_levels(fc: Forecast, anchor: float) -> Forecast:
    """Integrate a forecast of first differences back to levels.

    Level MSPEs are partial sums of the differenced MSPEs, which treats the
    ``h``-step errors as uncorrelated (an approximation).
    """
    if fc.scale != "differenced":
        raise DataError("forecast is already on the level scale")
    points = anchor + np.cumsum(fc.points)
    pe = np.cumsum(fc.mspe)
    lo, hi = prediction_interval(points, pe, fc.alpha, fc.interval_scale)
    return Forecast(points, pe, lo, hi, fc.alpha, "level", fc.interval_scale, fc.origin)
