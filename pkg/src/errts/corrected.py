"""Bias-corrected AR estimation from a surrogate series.

The surrogate moments are mapped to moments that share the limits of the
true-series moments, and the usual estimating equations are solved with
them. Uncertainty comes from a moving-block bootstrap or from the sandwich
form ``G Q G' / T``.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

from errts.error_models import AdditiveError, ErrorModel, validate_bounds
from errts.estimation import ArModel, check_length, fit_ee
from errts.exceptions import BoundViolationError, DataError, ModelError, OvercorrectionError
from errts.series import AutocovSummary, Series, as_series, autocov_summary

log = logging.getLogger(__name__)

__all__ = [
    "CorrectedFit",
    "BootstrapResult",
    "corrected_moments",
    "fit_corrected",
    "block_bootstrap",
    "default_block_len",
    "sandwich_jacobian",
    "sandwich_cov",
    "check_grid_bounds",
    "corrected_moments_mean",
    "MAX_FAIL_FRACTION",
]

MAX_FAIL_FRACTION = 0.10


@dataclass(frozen=True)
class CorrectedFit:
    model: ArModel
    corrected_summary: AutocovSummary
    error_model: ErrorModel
    surrogate_summary: AutocovSummary
    n_obs: int

    @property
    def stationary(self) -> bool:
        return self.model.stationary


def corrected_moments(summary: AutocovSummary, err: ErrorModel) -> AutocovSummary:
    """Surrogate moments mapped to estimates of the true-series moments.

    Additive: ``mu = (mu* - alpha0) / alpha1``, ``g_0 = (g*_0 - sigma_e2) /
    alpha1^2``, ``g_k = g*_k / alpha1^2``. Multiplicative: ``mu = mu* / beta0``,
    ``g_0 = g*_0 / ((1 + s) beta0^2) - s mu^2 / (1 + s)`` with ``mu`` the
    corrected mean, ``g_k = g*_k / beta0^2``.

    Raises
    ------
    OvercorrectionError
        If the corrected ``g_0`` is not positive.
    """
    g = np.array(summary.gammas)
    if isinstance(err, AdditiveError):
        a2 = err.alpha1**2
        mu = (summary.mu_hat - err.alpha0) / err.alpha1
        g0 = (g[0] - err.sigma_e2) / a2
        gk = g[1:] / a2
    else:
        b2, s = err.beta0**2, err.sigma_u2
        mu = summary.mu_hat / err.beta0
        g0 = g[0] / ((1 + s) * b2) - s * mu**2 / (1 + s)
        gk = g[1:] / b2
    if not g0 > 0:
        raise OvercorrectionError(
            f"overcorrection: error variance too large for observed variability (corrected gamma_0 = {g0:.4g})"
        )
    return summary.replace(mu_hat=float(mu), gammas=(float(g0), *gk.tolist()))


def _fit_summary(summary: AutocovSummary, p: int, err: ErrorModel, n_obs: int) -> CorrectedFit:
    corr = corrected_moments(summary, err)
    model = fit_ee(corr).model
    return CorrectedFit(model, corr, err, summary, n_obs)


def fit_corrected(surrogate: Series | ArrayLike, p: int, err: ErrorModel) -> CorrectedFit:
    """Solve the estimating equations with error-corrected moments.

    A non-stationary corrected fit is returned with a ``RuntimeWarning``.
    """
    s = as_series(surrogate)
    check_length(len(s), p)
    fit = _fit_summary(autocov_summary(s, p), p, err, len(s))
    if not fit.stationary:
        warnings.warn(f"corrected AR coefficients {fit.model.phi} are not stationary", RuntimeWarning, stacklevel=2)
    return fit


@dataclass(frozen=True)
class BootstrapResult:
    n_reps: int
    block_len: int
    variance: NDArray[np.float64]
    names: tuple[str, ...]
    n_failed: int = 0
    estimates: NDArray[np.float64] | None = field(default=None, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.n_reps < 2:
            raise ModelError("bootstrap needs at least 2 replicates")

    @property
    def se(self) -> NDArray[np.float64]:
        return np.sqrt(self.variance)


def default_block_len(T: int) -> int:
    """``ceil(T^(1/3))``."""
    b = math.ceil(T ** (1.0 / 3.0) - 1e-12)
    return max(1, b)


def block_bootstrap(
    surrogate: Series | ArrayLike,
    p: int,
    err: ErrorModel,
    b: int | None = None,
    N: int = 1000,
    seed: int = 0,
    keep: bool = False,
) -> BootstrapResult:
    """Moving-block bootstrap of the corrected estimator.

    Each replicate draws start indices uniformly from ``0..T-b``, concatenates
    the blocks of length ``b`` until at least ``T`` values are collected,
    truncates to ``T`` and refits with :func:`fit_corrected`. The variance
    divides by ``N`` (the number of successful replicates).

    Replicate ``n`` uses the ``n``-th child of ``SeedSequence(seed)``, so
    results do not depend on evaluation order. Replicates whose refit fails
    are skipped; more than 10% failures raise :class:`ModelError`.
    """
    x = as_series(surrogate).values
    T = x.size
    check_length(T, p)
    b = default_block_len(T) if b is None else int(b)
    if not 1 <= b <= T:
        raise DataError(f"block length must lie in [1, {T}], got {b}")
    if N < 2:
        raise DataError("N must be at least 2")
    n_blocks = -(-T // b)
    offsets = np.arange(b)
    estimates = []
    failed = 0
    for child in np.random.SeedSequence(seed).spawn(N):
        rng = np.random.default_rng(child)
        starts = rng.integers(0, T - b + 1, size=n_blocks)
        idx = (starts[:, None] + offsets).ravel()[:T]
        try:
            fit = _fit_summary(autocov_summary(x[idx], p), p, err, T)
        except (ModelError, DataError) as exc:
            failed += 1
            log.debug("bootstrap replicate failed: %s", exc)
            continue
        estimates.append(fit.model.params)
    if failed > MAX_FAIL_FRACTION * N:
        raise ModelError(f"{failed} of {N} bootstrap replicates failed")
    est = np.asarray(estimates)
    var = np.mean((est - est.mean(axis=0)) ** 2, axis=0)
    names = ("phi0", *[f"phi{j}" for j in range(1, p + 1)], "sigma_eps2")
    return BootstrapResult(len(estimates), b, var, names, failed, est if keep else None)


def _param_map(fit: CorrectedFit):
    base = fit.surrogate_summary
    p = base.p

    def f(gstar: NDArray[np.float64]) -> NDArray[np.float64]:
        summary = base.replace(gammas=tuple(gstar))
        m = fit_ee(corrected_moments(summary, fit.error_model)).model
        return np.array([*m.phi, m.sigma_eps2])

    return f, np.array(base.gammas), p


def sandwich_jacobian(fit: CorrectedFit, rel_step: float = 1e-5) -> NDArray[np.float64]:
    """Derivatives of ``(phi_1..phi_p, sigma_eps2)`` with respect to ``(g*_0..g*_p)``.

    Central differences with step ``rel_step * |g*_0|``; the surrogate mean
    is held fixed.
    """
    f, g, p = _param_map(fit)
    h = rel_step * abs(g[0])
    G = np.empty((p + 1, p + 1))
    for k in range(p + 1):
        up, dn = g.copy(), g.copy()
        up[k] += h
        dn[k] -= h
        G[:, k] = (f(up) - f(dn)) / (2 * h)
    return G


def sandwich_cov(fit: CorrectedFit, q_matrix: ArrayLike, rel_step: float = 1e-5) -> NDArray[np.float64]:
    """Finite-sample covariance ``G Q G' / T`` of ``(phi_1..phi_p, sigma_eps2)``.

    ``q_matrix`` is the asymptotic covariance of ``sqrt(T) (g*_0..g*_p)``
    (Bartlett, ``Q1`` or ``Q2``).
    """
    Q = np.asarray(q_matrix, dtype=float)
    p = fit.model.p
    if Q.shape != (p + 1, p + 1):
        raise ModelError(f"Q must be {p + 1}x{p + 1}, got {Q.shape}")
    norm = np.linalg.norm(Q)
    if np.linalg.norm(Q - Q.T) > 1e-6 * norm:
        raise ModelError("Q matrix is not symmetric")
    if np.linalg.eigvalsh((Q + Q.T) / 2).min() < -1e-8 * norm:
        raise ModelError("Q matrix is not positive semidefinite")
    G = sandwich_jacobian(fit, rel_step)
    return G @ Q @ G.T / fit.n_obs


def check_grid_bounds(s: Series | ArrayLike, err: ErrorModel) -> None:
    """Raise :class:`BoundViolationError` if ``err`` exceeds what ``s`` allows."""
    summary = autocov_summary(s, 1)
    mu = corrected_moments_mean(summary, err)
    if not validate_bounds(err, summary.gamma0, mu):
        raise BoundViolationError(
            f"{err.kind} error variance {err.error_variance} exceeds the bound implied by the data"
        )


def corrected_moments_mean(summary: AutocovSummary, err: ErrorModel) -> float:
    if isinstance(err, AdditiveError):
        return (summary.mu_hat - err.alpha0) / err.alpha1
    return summary.mu_hat / err.beta0
