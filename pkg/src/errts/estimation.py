"""AR(p) model and its two estimators.

``fit_ls`` minimises the centred sum of squares; ``fit_ee`` solves the
autocovariance estimating equations

    phi      = Gamma^{-1} gamma
    phi_0    = (1 - sum(phi)) * mu
    sigma^2  = gamma_0 - 2 phi' gamma + phi' Gamma phi

The two agree asymptotically. ``fit_ee`` is the building block reused by the
corrected estimator, which only swaps the moments it is fed.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

from errts.exceptions import ConditioningError, DataError, ModelError, NonStationaryError
from errts.series import AutocovSummary, Series, as_series, autocov_summary, is_stationary

__all__ = [
    "ArModel",
    "ArFit",
    "FitMethod",
    "MAX_CONDITION",
    "fit_ls",
    "fit_ee",
    "fitted_equivalence_gap",
    "check_length",
]

MAX_CONDITION = 1e12


@dataclass(frozen=True)
class ArModel:
    """``X_t = phi0 + sum_j phi_j X_{t-j} + eps_t`` with ``Var(eps_t) = sigma_eps2``.

    ``eta`` is the innovation kurtosis ratio ``E(eps^4) / sigma_eps2^2`` and
    only enters Bartlett's covariance formula.
    """

    phi0: float
    phi: tuple[float, ...]
    sigma_eps2: float
    eta: float = 3.0

    def __post_init__(self) -> None:
        phi = tuple(float(v) for v in np.atleast_1d(np.asarray(self.phi, dtype=float)))
        if len(phi) < 1:
            raise ModelError("AR model needs at least one coefficient")
        if not np.all(np.isfinite(phi)) or not np.isfinite(self.phi0):
            raise ModelError("AR coefficients must be finite")
        if not self.sigma_eps2 >= 0:
            raise ModelError(f"innovation variance must be non-negative, got {self.sigma_eps2}")
        if not self.eta >= 1:
            raise ModelError(f"kurtosis ratio eta must be >= 1, got {self.eta}")
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "phi0", float(self.phi0))
        object.__setattr__(self, "sigma_eps2", float(self.sigma_eps2))
        object.__setattr__(self, "eta", float(self.eta))

    @property
    def p(self) -> int:
        return len(self.phi)

    @property
    def phi_array(self) -> NDArray[np.float64]:
        return np.array(self.phi)

    @property
    def stationary(self) -> bool:
        return is_stationary(self.phi)

    @property
    def mean(self) -> float:
        """Stationary mean ``phi0 / (1 - sum(phi))``."""
        denom = 1.0 - sum(self.phi)
        if denom == 0:
            raise NonStationaryError("unit root: stationary mean undefined")
        return self.phi0 / denom

    @property
    def long_run_variance(self) -> float:
        """``sum_h gamma_h = sigma_eps2 / (1 - sum(phi))^2``."""
        self.require_stationary()
        return self.sigma_eps2 / (1.0 - sum(self.phi)) ** 2

    @property
    def params(self) -> NDArray[np.float64]:
        """Parameter vector ``(phi0, phi_1..phi_p, sigma_eps2)``."""
        return np.array([self.phi0, *self.phi, self.sigma_eps2])

    @property
    def param_names(self) -> list[str]:
        return ["phi0", *[f"phi{j}" for j in range(1, self.p + 1)], "sigma_eps2"]

    def require_stationary(self) -> None:
        if not self.stationary:
            raise NonStationaryError(f"AR coefficients {self.phi} are not stationary")

    def acvf(self, nlags: int) -> NDArray[np.float64]:
        """Theoretical autocovariances ``gamma_0..gamma_{nlags}``.

        Solves the first ``p+1`` Yule-Walker relations for ``gamma_0..gamma_p``
        and extends by the AR recursion.
        """
        self.require_stationary()
        p = self.p
        phi = self.phi_array
        A = np.eye(p + 1)
        for k in range(p + 1):
            for j in range(1, p + 1):
                A[k, abs(k - j)] -= phi[j - 1]
        rhs = np.zeros(p + 1)
        rhs[0] = self.sigma_eps2
        head = np.linalg.solve(A, rhs)
        n = max(nlags, p) + 1
        gam = np.empty(n)
        gam[: p + 1] = head
        for k in range(p + 1, n):
            gam[k] = np.dot(phi, gam[k - p : k][::-1])
        return gam[: nlags + 1]


class FitMethod(enum.Enum):
    LEAST_SQUARES = "least_squares"
    ESTIMATING_EQUATIONS = "estimating_equations"


@dataclass(frozen=True)
class ArFit:
    model: ArModel
    method: FitMethod
    summary: AutocovSummary
    residuals: NDArray[np.float64] | None = field(default=None, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.model.p != self.summary.p:
            raise ModelError("model lag order does not match its moment summary")


def check_length(T: int, p: int) -> None:
    """Fitting requires ``T >= 5 p``."""
    if p < 1:
        raise DataError("lag order p must be positive")
    if T < 5 * p:
        raise DataError(f"series too short for AR({p}): need T >= {5 * p}, got T={T}")


def _lag_matrix(values: NDArray[np.float64], p: int) -> NDArray[np.float64]:
    """Rows ``(X_{t-1}, ..., X_{t-p})`` for ``t = p+1..T``."""
    T = values.size
    return np.column_stack([values[p - j : T - j] for j in range(1, p + 1)])


def fit_ls(s: Series | ArrayLike, p: int, estimate_eta: bool = False) -> ArFit:
    """Least-squares AR(p) fit with every mean estimated by the global mean.

    ``phi`` solves the normal equations of the regression of ``X_t - mu`` on
    ``X_{t-1} - mu, ..., X_{t-p} - mu``; ``phi0 = mu (1 - sum(phi))`` and
    ``sigma_eps2 = S(phi) / (T - p)``.
    """
    s = as_series(s)
    values = s.values
    T = values.size
    check_length(T, p)
    if s.is_constant:
        raise DataError("constant series: AR coefficients are not identified")
    mu = float(values.mean())
    dev = values - mu
    X = _lag_matrix(dev, p)
    y = dev[p:]
    XtX = X.T @ X
    cond = np.linalg.cond(XtX)
    if not np.isfinite(cond) or cond >= MAX_CONDITION:
        raise ConditioningError("singular normal equations", cond)
    phi = np.linalg.solve(XtX, X.T @ y)
    resid = y - X @ phi
    sigma2 = float(resid @ resid) / (T - p)
    eta = 3.0
    if estimate_eta and sigma2 > 0:
        m2 = float(np.mean(resid**2))
        eta = max(1.0, float(np.mean(resid**4)) / m2**2)
    model = ArModel(phi0=mu * (1.0 - phi.sum()), phi=tuple(phi), sigma_eps2=sigma2, eta=eta)
    return ArFit(model, FitMethod.LEAST_SQUARES, autocov_summary(values, p), residuals=resid)


def fit_ee(summary: AutocovSummary, eta: float = 3.0) -> ArFit:
    """Solve the estimating equations for the moments in ``summary``."""
    Gamma = summary.toeplitz
    gamma = summary.gamma_vec
    cond = np.linalg.cond(Gamma)
    if not np.isfinite(cond) or cond >= MAX_CONDITION:
        raise ConditioningError("autocovariance matrix is ill-conditioned", cond)
    phi = np.linalg.solve(Gamma, gamma)
    phi0 = (1.0 - phi.sum()) * summary.mu_hat
    sigma2 = summary.gamma0 - 2.0 * phi @ gamma + phi @ Gamma @ phi
    if sigma2 < 0:
        raise ModelError(f"estimated innovation variance is negative ({sigma2:.4g})")
    model = ArModel(phi0=float(phi0), phi=tuple(phi), sigma_eps2=float(sigma2), eta=eta)
    return ArFit(model, FitMethod.ESTIMATING_EQUATIONS, summary)


def fitted_equivalence_gap(s: Series | ArrayLike, p: int) -> float:
    """Largest componentwise gap between the LS and estimating-equation fits."""
    s = as_series(s)
    ls = fit_ls(s, p).model.params
    ee = fit_ee(autocov_summary(s, p)).model.params
    return float(np.max(np.abs(ls - ee)))
