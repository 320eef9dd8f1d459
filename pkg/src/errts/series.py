"""Time-series container, empirical moments, differencing and stationarity."""

from __future__ import annotations

import datetime as _dt
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.linalg import companion, toeplitz

from errts.exceptions import DataError

__all__ = [
    "Series",
    "AutocovSummary",
    "as_series",
    "mean_hat",
    "autocov_hat",
    "autocov_summary",
    "difference",
    "integrate",
    "ar_roots",
    "is_stationary",
]


@dataclass(frozen=True)
class Series:
    """Ordered real-valued observations.

    Parameters
    ----------
    values : array_like
        Observations in time order. Must be non-empty and finite.
    origin : datetime.date, optional
        Calendar date of the first observation. Metadata only.
    diff_order : int
        Number of differencing operations already applied.
    """

    values: NDArray[np.float64]
    origin: _dt.date | None = None
    diff_order: int = 0

    def __post_init__(self) -> None:
        arr = np.array(self.values, dtype=float, copy=True).ravel()
        if arr.size == 0:
            raise DataError("empty input")
        if not np.all(np.isfinite(arr)):
            raise DataError("series contains non-finite values")
        if self.diff_order < 0:
            raise DataError("diff_order must be non-negative")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return self.values.size

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.values
        return self.values.astype(dtype)

    @property
    def is_constant(self) -> bool:
        return bool(np.ptp(self.values) == 0.0)

    def dates(self) -> list[_dt.date] | None:
        """Daily calendar index, if an origin is known."""
        if self.origin is None:
            return None
        return [self.origin + _dt.timedelta(days=i) for i in range(len(self))]


def as_series(x: Series | ArrayLike) -> Series:
    if isinstance(x, Series):
        return x
    return Series(np.asarray(x, dtype=float))


def mean_hat(s: Series | ArrayLike) -> float:
    """Sample mean ``(1/T) sum X_t``."""
    values = np.asarray(s, dtype=float)
    if values.size == 0:
        raise DataError("empty input")
    return float(values.mean())


def _autocov(values: NDArray[np.float64], k: int, mu: float) -> float:
    T = values.size
    if values.min() == values.max():
        return 0.0  # the floating-point mean of a constant need not be exact
    dev = values - mu
    return float(np.dot(dev[k:], dev[: T - k]) / (T - k))


def autocov_hat(s: Series | ArrayLike, k: int) -> float:
    """Lag-``k`` sample autocovariance with ``1/(T-k)`` normalisation.

    Each lag is averaged over its own number of products rather than over
    ``T``; deviations are taken from the full-sample mean.
    """
    values = np.asarray(s, dtype=float)
    if values.size == 0:
        raise DataError("empty input")
    if k < 0:
        raise DataError("lag must be non-negative")
    if k >= values.size:
        raise DataError(f"lag exceeds length: k={k}, T={values.size}")
    return _autocov(values, k, float(values.mean()))


@dataclass(frozen=True)
class AutocovSummary:
    """Sample mean and autocovariances ``gamma_0..gamma_p`` of a series."""

    mu_hat: float
    gammas: tuple[float, ...]
    p: int
    n_obs: int | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        gammas = tuple(float(g) for g in self.gammas)
        if len(gammas) != self.p + 1:
            raise DataError(f"expected {self.p + 1} autocovariances, got {len(gammas)}")
        object.__setattr__(self, "gammas", gammas)

    @property
    def gamma0(self) -> float:
        return self.gammas[0]

    @property
    def gamma_vec(self) -> NDArray[np.float64]:
        """``(gamma_1, ..., gamma_p)``."""
        return np.array(self.gammas[1:])

    @property
    def toeplitz(self) -> NDArray[np.float64]:
        """The ``p x p`` matrix built from ``gamma_0..gamma_{p-1}``."""
        return toeplitz(np.array(self.gammas[: self.p]))

    def replace(self, **changes: Any) -> "AutocovSummary":
        data = {"mu_hat": self.mu_hat, "gammas": self.gammas, "p": self.p, "n_obs": self.n_obs}
        data.update(changes)
        return AutocovSummary(**data)


def autocov_summary(s: Series | ArrayLike, p: int) -> AutocovSummary:
    values = np.asarray(s, dtype=float)
    if values.size == 0:
        raise DataError("empty input")
    if p < 1:
        raise DataError("lag order p must be positive")
    if p >= values.size:
        raise DataError(f"lag exceeds length: p={p}, T={values.size}")
    mu = float(values.mean())
    gammas = tuple(_autocov(values, k, mu) for k in range(p + 1))
    return AutocovSummary(mu_hat=mu, gammas=gammas, p=p, n_obs=values.size)


def difference(s: Series) -> Series:
    """First difference ``X_{t+1} - X_t``; increments ``diff_order``."""
    s = as_series(s)
    if len(s) < 2:
        raise DataError("differencing needs at least 2 observations")
    origin = None if s.origin is None else s.origin + _dt.timedelta(days=1)
    return Series(np.diff(s.values), origin=origin, diff_order=s.diff_order + 1)


def integrate(diffs: Series, anchor: float) -> Series:
    """Cumulative sum of ``diffs`` starting at ``anchor`` (inverse of :func:`difference`).

    The result has one more element than ``diffs``; its first element is
    ``anchor``.
    """
    diffs = as_series(diffs)
    if diffs.diff_order < 1:
        raise DataError("cannot integrate a series with diff_order 0")
    levels = np.concatenate(([float(anchor)], float(anchor) + np.cumsum(diffs.values)))
    origin = None if diffs.origin is None else diffs.origin - _dt.timedelta(days=1)
    return Series(levels, origin=origin, diff_order=diffs.diff_order - 1)


def _coefficients(model_or_phi: Any) -> NDArray[np.float64]:
    phi = getattr(model_or_phi, "phi", model_or_phi)
    return np.atleast_1d(np.asarray(phi, dtype=float))


def ar_roots(model_or_phi: Any) -> NDArray[np.complex128]:
    """Roots of ``z^p - phi_1 z^{p-1} - ... - phi_p``.

    Computed as eigenvalues of the companion matrix of the monic polynomial.
    """
    phi = _coefficients(model_or_phi)
    if phi.size == 0:
        return np.array([], dtype=complex)
    return np.linalg.eigvals(companion(np.concatenate(([1.0], -phi))))


def is_stationary(model_or_phi: Any | Sequence[float]) -> bool:
    """True iff every characteristic root lies strictly inside the unit circle."""
    roots = ar_roots(model_or_phi)
    if roots.size == 0:
        return True
    return bool(np.max(np.abs(roots)) < 1.0)
