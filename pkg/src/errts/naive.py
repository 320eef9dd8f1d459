"""What naive (error-ignoring) AR estimation converges to, in closed form.

Also the asymptotic covariance of the scaled surrogate autocovariances
``sqrt(T) (gamma*_0, ..., gamma*_p)``: Bartlett's formula for the
error-free case and its additive (``Q1``) and multiplicative (``Q2``)
extensions.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.linalg import toeplitz

from errts.error_models import AdditiveError, ErrorModel, MultiplicativeError
from errts.estimation import MAX_CONDITION, ArModel
from errts.exceptions import (
    ConditioningError,
    DataError,
    MissingMomentError,
    ModelError,
    NonStationaryError,
    TruncationError,
)
from errts.series import Series, as_series

log = logging.getLogger(__name__)

__all__ = [
    "NaiveLimit",
    "MomentSet",
    "omega1",
    "omega2",
    "naive_limit_ar1_additive",
    "naive_limit_ar1_multiplicative",
    "naive_limit_arp",
    "autocov_sequence",
    "bartlett_q",
    "bartlett_matrix",
    "q1_element",
    "q1_matrix",
    "q2_element",
    "q2_matrix",
    "gaussian_moments",
    "estimate_moments",
    "required_patterns",
]


@dataclass(frozen=True)
class NaiveLimit:
    """Probability limits of the naive estimator and surrogate moments."""

    phi0_star: float
    phi_star: tuple[float, ...]
    var_eps_star: float
    gamma_star: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.gamma_star) != len(self.phi_star) + 1:
            raise ModelError("gamma_star must hold gamma*_0..gamma*_p")

    @property
    def p(self) -> int:
        return len(self.phi_star)

    @property
    def params(self) -> NDArray[np.float64]:
        return np.array([self.phi0_star, *self.phi_star, self.var_eps_star])


# --------------------------------------------------------------------------
# AR(1) attenuation


def _check_ar1(phi1: float) -> None:
    if not abs(phi1) < 1:
        raise NonStationaryError(f"|phi1| must be < 1, got {phi1}")


def omega1(phi1: float, sigma_eps2: float, alpha1: float, sigma_e2: float) -> float:
    """Attenuation factor of the naive AR(1) slope under additive error."""
    _check_ar1(phi1)
    signal = alpha1**2 * sigma_eps2
    denom = signal + sigma_e2 * (1 - phi1**2)
    if not denom > 0:
        raise ModelError("attenuation factor undefined: zero signal and error variance")
    return signal / denom


def omega2(phi0: float, phi1: float, sigma_eps2: float, sigma_u2: float) -> float:
    """Attenuation factor of the naive AR(1) slope under multiplicative error."""
    _check_ar1(phi1)
    if not sigma_eps2 > 0:
        raise ModelError("sigma_eps2 must be positive")
    return 1.0 / (1 + sigma_u2 + (1 + phi1) * sigma_u2 * phi0**2 / ((1 - phi1) * sigma_eps2))


def _require_p1(model: ArModel) -> None:
    if model.p != 1:
        raise ModelError(f"AR(1) closed form requested for an AR({model.p}) model")


def naive_limit_ar1_additive(model: ArModel, err: AdditiveError) -> NaiveLimit:
    """Naive AR(1) limits under ``X* = alpha0 + alpha1 X + e``.

    ``var_eps_star`` is the limit of the naive residual variance,
    ``gamma*_0 (1 - phi1*^2)``, which coincides with :func:`naive_limit_arp`
    at ``p = 1``.
    """
    _require_p1(model)
    (phi1,) = model.phi
    w = omega1(phi1, model.sigma_eps2, err.alpha1, err.sigma_e2)
    phi1_star = phi1 * w
    phi0_star = (err.alpha0 + err.alpha1 * model.phi0 / (1 - phi1)) * (1 - phi1_star)
    gamma0 = model.sigma_eps2 / (1 - phi1**2)
    g0_star = err.alpha1**2 * gamma0 + err.sigma_e2
    g1_star = err.alpha1**2 * phi1 * gamma0
    return NaiveLimit(
        phi0_star=phi0_star,
        phi_star=(phi1_star,),
        var_eps_star=g0_star * (1 - phi1_star**2),
        gamma_star=(g0_star, g1_star),
    )


def naive_limit_ar1_multiplicative(model: ArModel, err: MultiplicativeError) -> NaiveLimit:
    """Naive AR(1) limits under ``X* = beta0 u X``."""
    _require_p1(model)
    (phi1,) = model.phi
    w = omega2(model.phi0, phi1, model.sigma_eps2, err.sigma_u2)
    phi1_star = phi1 * w
    phi0_star = err.beta0 * model.phi0 / (1 - phi1) * (1 - w * phi1)
    gamma0 = model.sigma_eps2 / (1 - phi1**2)
    mu = model.phi0 / (1 - phi1)
    g0_star = err.beta0**2 * ((err.sigma_u2 + 1) * gamma0 + err.sigma_u2 * mu**2)
    g1_star = err.beta0**2 * phi1 * gamma0
    return NaiveLimit(
        phi0_star=phi0_star,
        phi_star=(phi1_star,),
        var_eps_star=g0_star * (1 - phi1_star**2),
        gamma_star=(g0_star, g1_star),
    )


def naive_limit_arp(
    model: ArModel,
    err: ErrorModel,
    gammas: ArrayLike | None = None,
    mu: float | None = None,
) -> NaiveLimit:
    """Naive AR(p) limits from the true autocovariances.

    Parameters
    ----------
    model : ArModel
        True model; supplies ``p`` and, by default, ``gammas`` and ``mu``.
    err : AdditiveError or MultiplicativeError
    gammas : array_like, optional
        True ``gamma_0..gamma_p`` (longer sequences are truncated).
    mu : float, optional
        True mean.
    """
    p = model.p
    gam = model.acvf(p) if gammas is None else np.asarray(gammas, dtype=float)[: p + 1]
    if gam.size < p + 1:
        raise DataError(f"need gamma_0..gamma_{p}, got {gam.size} values")
    mu = model.mean if mu is None else float(mu)
    Gamma = toeplitz(gam[:p])
    gvec = gam[1:]
    I = np.eye(p)

    if isinstance(err, AdditiveError):
        a2 = err.alpha1**2
        M = a2 * Gamma + err.sigma_e2 * I
        scale = a2  # phi* = a2 M^{-1} gamma
        g0_star = a2 * gam[0] + err.sigma_e2
        g_star = a2 * gvec
        mean_star = err.alpha0 + err.alpha1 * mu
        quad_scale = a2**2
    else:
        b2 = err.beta0**2
        M = Gamma + err.sigma_u2 * (gam[0] + mu**2) * I
        scale = 1.0
        g0_star = b2 * ((err.sigma_u2 + 1) * gam[0] + err.sigma_u2 * mu**2)
        g_star = b2 * gvec
        mean_star = err.beta0 * mu
        quad_scale = b2

    cond = np.linalg.cond(M)
    if not np.isfinite(cond) or cond >= MAX_CONDITION:
        raise ConditioningError("error-inflated autocovariance matrix is singular", cond)
    sol = np.linalg.solve(M, gvec)
    phi_star = scale * sol
    return NaiveLimit(
        phi0_star=float((1 - phi_star.sum()) * mean_star),
        phi_star=tuple(float(v) for v in phi_star),
        var_eps_star=float(g0_star - quad_scale * gvec @ sol),
        gamma_star=(float(g0_star), *(float(v) for v in g_star)),
    )


# --------------------------------------------------------------------------
# Bartlett's formula

GammaSource = Union[ArModel, Sequence[float], NDArray[np.float64], Callable[[int], ArrayLike]]


def autocov_sequence(source: GammaSource, n: int) -> NDArray[np.float64]:
    """First ``n`` autocovariances ``gamma_0..gamma_{n-1}`` from ``source``.

    ``source`` is an :class:`ArModel`, a finite sequence (zero beyond its
    end), or a callable ``f(n)`` returning at least ``n`` values.
    """
    if isinstance(source, ArModel):
        return source.acvf(n - 1)
    if callable(source):
        out = np.asarray(source(n), dtype=float)
        if out.size < n:
            raise DataError("autocovariance callable returned too few values")
        return out[:n]
    arr = np.asarray(source, dtype=float).ravel()
    out = np.zeros(n)
    m = min(n, arr.size)
    out[:m] = arr[:m]
    return out


def bartlett_q(
    gammas: GammaSource,
    eta: float,
    j: int,
    k: int,
    tol: float = 1e-10,
    *,
    max_window: int = 1 << 20,
    return_window: bool = False,
):
    """Asymptotic covariance of ``sqrt(T) gamma_hat_j`` and ``sqrt(T) gamma_hat_k``.

    ``(eta - 3) g_j g_k + sum_i (g_i g_{i-j+k} + g_{i+k} g_{i-j})``. The
    infinite sum is cut at ``|i| <= W`` once twice the absolute tail
    ``sum_{W < i <= 2W} |g_i|`` falls below ``tol * g_0``; ``W`` doubles from
    32 until that holds.
    """
    if j < 0 or k < 0:
        raise DataError("lags must be non-negative")
    W = 32
    while True:
        gam = autocov_sequence(gammas, 2 * W + j + k + 1)
        g0 = gam[0]
        if not g0 > 0:
            raise ModelError("gamma_0 must be positive")
        tail = np.abs(gam[W + 1 : 2 * W + 1]).sum()
        if 2.0 * tail < tol * g0:
            break
        W *= 2
        if W > max_window:
            raise TruncationError(
                f"autocovariances not summable to tolerance {tol} within window {max_window}"
            )

    def g(idx: NDArray[np.int64]) -> NDArray[np.float64]:
        return gam[np.abs(idx)]

    i = np.arange(-W, W + 1)
    value = (eta - 3.0) * gam[j] * gam[k] + float(np.sum(g(i) * g(i - j + k) + g(i + k) * g(i - j)))
    log.debug("bartlett_q(%d, %d): window %d", j, k, W)
    if return_window:
        return value, W
    return value


def bartlett_matrix(gammas: GammaSource, eta: float, p: int, tol: float = 1e-10) -> NDArray[np.float64]:
    """``(p+1) x (p+1)`` matrix of :func:`bartlett_q` values."""
    Q = np.empty((p + 1, p + 1))
    for j in range(p + 1):
        for k in range(j, p + 1):
            Q[j, k] = Q[k, j] = bartlett_q(gammas, eta, j, k, tol)
    return Q


# --------------------------------------------------------------------------
# Additive error: Q1


def q1_element(
    j: int,
    k: int,
    model: ArModel,
    err: AdditiveError,
    gammas: GammaSource | None = None,
    tol: float = 1e-10,
) -> float:
    """Element ``(j, k)`` of ``Q1`` for lags ``0 <= j, k <= p``."""
    src = model if gammas is None else gammas
    j, k = sorted((j, k))
    gam = autocov_sequence(src, 2 * max(j, k) + 1)
    q = bartlett_q(src, model.eta, j, k, tol)
    a2, s = err.alpha1**2, err.sigma_e2
    if j == 0 and k == 0:
        return a2**2 * q + 4 * a2 * gam[0] * s + err.e4 - s**2
    if j == 0:
        return a2**2 * q + 4 * a2 * gam[k] * s
    if j == k:
        return a2**2 * q + 2 * a2 * s * (gam[0] + gam[2 * j]) + s**2
    return a2**2 * q + 2 * a2 * s * (gam[k - j] + gam[j + k])


def q1_matrix(p: int, model: ArModel, err: AdditiveError, gammas: GammaSource | None = None, tol: float = 1e-10):
    Q = np.empty((p + 1, p + 1))
    for j in range(p + 1):
        for k in range(j, p + 1):
            Q[j, k] = Q[k, j] = q1_element(j, k, model, err, gammas, tol)
    return Q


# --------------------------------------------------------------------------
# Multiplicative error: Q2


def _canonical(offsets: Sequence[int]) -> tuple[int, ...]:
    lo = min(offsets)
    return tuple(sorted(o - lo for o in offsets))


@dataclass(frozen=True)
class MomentSet:
    """Central moments of the true process needed by ``Q2``.

    ``moments`` maps a lag pattern to ``E prod_i (X_{t+o_i} - mu)``. Patterns
    are multisets of time offsets shifted so the smallest is zero, e.g.
    ``(0, 0, 0, 1)`` for ``E (X_t - mu)^3 (X_{t+1} - mu)``. ``v`` maps ``p`` to
    ``sum_h E (X_0 - mu)(X_p - mu)(X_h - mu)``.
    """

    gamma0: float
    moments: Mapping[tuple[int, ...], float]
    v: Mapping[int, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        moments = {_canonical(k): float(val) for k, val in self.moments.items()}
        if not all(np.isfinite(list(moments.values()))):
            raise ModelError("moment set contains non-finite values")
        m4 = moments.get((0, 0, 0, 0))
        if m4 is not None and m4 < self.gamma0**2 * (1 - 1e-9):
            raise ModelError("fourth central moment must be at least gamma_0^2")
        object.__setattr__(self, "moments", moments)
        object.__setattr__(self, "v", {int(p): float(val) for p, val in self.v.items()})

    @property
    def m3(self) -> float:
        return self.expect((0, 0, 0))

    @property
    def m4(self) -> float:
        return self.expect((0, 0, 0, 0))

    def expect(self, offsets: Sequence[int]) -> float:
        key = _canonical(offsets)
        try:
            return self.moments[key]
        except KeyError:
            raise MissingMomentError(f"moment not provided for lag pattern {key}") from None

    def v_p(self, p: int) -> float:
        try:
            return self.v[p]
        except KeyError:
            raise MissingMomentError(f"moment not provided: v_{p}") from None


# A polynomial in the centred process Y_t = X_t - mu: {sorted offsets: coefficient}.
_Poly = dict


def _padd(a: _Poly, b: _Poly, c: float = 1.0) -> _Poly:
    out = dict(a)
    for mono, coef in b.items():
        out[mono] = out.get(mono, 0.0) + c * coef
    return out


def _pmul(a: _Poly, b: _Poly) -> _Poly:
    out: _Poly = {}
    for m1, c1 in a.items():
        for m2, c2 in b.items():
            mono = tuple(sorted(m1 + m2))
            out[mono] = out.get(mono, 0.0) + c1 * c2
    return out


def _ppow(a: _Poly, n: int) -> _Poly:
    out: _Poly = {(): 1.0}
    for _ in range(n):
        out = _pmul(out, a)
    return out


def _cond_moment(t: int, m: int, mu: float, s: float, w3: float, w4: float) -> _Poly:
    """``E_u[(Y_t + (u_t - 1) X_t)^m | X]`` as a polynomial in ``Y``."""
    Y = {(t,): 1.0}
    X = {(t,): 1.0, (): mu}
    raw = {0: 1.0, 1: 0.0, 2: s, 3: w3, 4: w4}
    binom = {(1, 0): 1, (1, 1): 1, (2, 0): 1, (2, 1): 2, (2, 2): 1, (3, 0): 1, (3, 1): 3, (3, 2): 3, (3, 3): 1,
             (4, 0): 1, (4, 1): 4, (4, 2): 6, (4, 3): 4, (4, 4): 1}
    out: _Poly = {}
    for r in range(m + 1):
        if raw[r] == 0.0:
            continue
        term = _pmul(_ppow(Y, m - r), _ppow(X, r))
        out = _padd(out, term, binom[(m, r)] * raw[r])
    return out


def _cond_product(offsets: Sequence[int], mu, s, w3, w4) -> _Poly:
    out: _Poly = {(): 1.0}
    for t, m in Counter(offsets).items():
        out = _pmul(out, _cond_moment(t, m, mu, s, w3, w4))
    return out


def _error_covariance(j: int, k: int, mu: float, s: float, w3: float, w4: float) -> _Poly:
    """Sum over lags of ``E_X Cov_u(A_0 A_j, A_h A_{h+k} | X)`` as a polynomial.

    ``A_t = (X*_t - mu*) / beta0 = Y_t + (u_t - 1) X_t``. Conditionally on the
    true path only lags sharing an error term contribute.
    """
    total: _Poly = {}
    for h in sorted({0, j, -k, j - k}):
        left = [0, j]
        right = [h, h + k]
        joint = _cond_product(left + right, mu, s, w3, w4)
        prod = _pmul(_cond_product(left, mu, s, w3, w4), _cond_product(right, mu, s, w3, w4))
        total = _padd(_padd(total, joint), prod, -1.0)
    return total


def _expect(poly: _Poly, gam: NDArray[np.float64], moments: MomentSet) -> float:
    value = 0.0
    for mono, coef in poly.items():
        if coef == 0.0:
            continue
        n = len(mono)
        if n == 0:
            value += coef
        elif n == 1:
            continue
        elif n == 2:
            value += coef * gam[abs(mono[1] - mono[0])]
        else:
            value += coef * moments.expect(mono)
    return value


def q2_element(
    j: int,
    k: int,
    model: ArModel,
    err: MultiplicativeError,
    moments: MomentSet,
    tol: float = 1e-10,
    gammas: GammaSource | None = None,
) -> float:
    """Element ``(j, k)`` of ``Q2`` for lags ``0 <= j, k <= p``.

    Splits the long-run covariance of ``A_t A_{t+j}`` and ``A_s A_{s+k}`` by
    conditioning on the true path:

    * the covariance of the conditional means, which brings in Bartlett's
      ``q_jk`` (scaled by ``1 + sigma_u2`` per zero lag) and, when a lag is
      zero, ``v_k`` and ``sum_h gamma_h`` weighted by ``mu``;
    * the expected conditional covariance, non-zero only at the few lags
      where the two products share an error term. It is expanded
      symbolically and evaluated with ``moments``.

    For ``(0, 0)`` and ``(0, p)`` this equals the usual closed forms in
    ``E u^3``, ``E u^4``, ``E (X - mu)^3``, ``E (X - mu)^4`` and ``v``.
    """
    src = model if gammas is None else gammas
    j, k = sorted((j, k))
    mu = model.mean
    s = err.sigma_u2
    gam = autocov_sequence(src, 2 * max(j, k) + 2)
    q = bartlett_q(src, model.eta, j, k, tol)
    if j == 0 and k == 0:
        lrv = model.long_run_variance if gammas is None else _long_run_sum(src, tol)
        mean_part = (1 + s) ** 2 * q + 4 * s * (1 + s) * mu * moments.v_p(0) + 4 * s**2 * mu**2 * lrv
    elif j == 0:
        mean_part = (1 + s) * q + 2 * s * mu * moments.v_p(k)
    else:
        mean_part = q
    if s == 0:
        return err.beta0**4 * mean_part
    poly = _error_covariance(j, k, mu, s, err.w3, err.w4)
    return err.beta0**4 * (mean_part + _expect(poly, gam, moments))


def _long_run_sum(src: GammaSource, tol: float) -> float:
    n = 64
    while True:
        gam = autocov_sequence(src, 2 * n)
        if 2 * np.abs(gam[n:]).sum() < tol * max(gam[0], 1e-300):
            return float(gam[0] + 2 * gam[1:n].sum())
        n *= 2
        if n > 1 << 20:
            raise TruncationError("autocovariances not summable")


def q2_matrix(p: int, model: ArModel, err: MultiplicativeError, moments: MomentSet, tol: float = 1e-10):
    Q = np.empty((p + 1, p + 1))
    for j in range(p + 1):
        for k in range(j, p + 1):
            Q[j, k] = Q[k, j] = q2_element(j, k, model, err, moments, tol)
    return Q


class _RecordingMoments(MomentSet):
    def __init__(self) -> None:  # bypass dataclass validation
        object.__setattr__(self, "gamma0", 1.0)
        object.__setattr__(self, "moments", {})
        object.__setattr__(self, "v", {})
        object.__setattr__(self, "seen", set())

    def expect(self, offsets):
        self.seen.add(_canonical(offsets))
        return 0.0

    def v_p(self, p):
        return 0.0


def required_patterns(max_lag: int) -> list[tuple[int, ...]]:
    """Lag patterns of third and fourth moments that ``Q2`` needs up to ``max_lag``."""
    rec = _RecordingMoments()
    gam = np.zeros(2 * max_lag + 2)
    for j in range(max_lag + 1):
        for k in range(j, max_lag + 1):
            _expect(_error_covariance(j, k, 1.0, 1.0, 1.0, 1.0), gam, rec)
    rec.seen.update({(0, 0, 0), (0, 0, 0, 0)})
    return sorted(rec.seen, key=lambda m: (len(m), m))


def _isserlis(offsets: Sequence[int], gam: NDArray[np.float64]) -> float:
    if len(offsets) % 2:
        return 0.0
    if len(offsets) == 2:
        return gam[abs(offsets[0] - offsets[1])]
    a, b, c, d = offsets
    g = lambda x, y: gam[abs(x - y)]  # noqa: E731
    return g(a, b) * g(c, d) + g(a, c) * g(b, d) + g(a, d) * g(b, c)


def gaussian_moments(model: ArModel, max_lag: int | None = None) -> MomentSet:
    """Exact moments for a Gaussian AR process (odd moments vanish)."""
    max_lag = model.p if max_lag is None else max_lag
    patterns = required_patterns(max_lag)
    span = max(max(m) for m in patterns)
    gam = model.acvf(span + 1)
    return MomentSet(
        gamma0=float(gam[0]),
        moments={m: _isserlis(m, gam) for m in patterns},
        v={p: 0.0 for p in range(max_lag + 1)},
    )


def estimate_moments(s: Series | ArrayLike, max_lag: int, tol: float = 0.01, max_window: int = 1000) -> MomentSet:
    """Plug-in moment set from a long clean series.

    ``v_p`` sums plug-in third moments over ``h`` within ``window`` lags of
    ``0`` and ``p``, where ``window`` is the first lag whose sample
    autocorrelation drops below ``max(tol, 2 / sqrt(T))`` in absolute value.
    """
    x = as_series(s).values
    T = x.size
    if T < 10 * max(max_lag, 1):
        raise DataError(f"series too short for moments up to lag {max_lag}: T={T}")
    y = x - x.mean()

    def plug(offsets: Sequence[int]) -> float:
        key = _canonical(offsets)
        n = T - key[-1]
        prod = np.ones(n)
        for o in key:
            prod = prod * y[o : o + n]
        return float(prod.mean())

    patterns = required_patterns(max_lag)
    gamma0 = float(y @ y / T)
    thresh = max(tol, 2.0 / np.sqrt(T))
    window = 1
    while window < max_window and abs(float(y[window:] @ y[:-window] / (T - window)) / gamma0) >= thresh:
        window += 1
    v = {p: sum(plug((0, p, h)) for h in range(-window, p + window + 1)) for p in range(max_lag + 1)}
    log.debug("estimate_moments: v window %d", window)
    return MomentSet(gamma0=gamma0, moments={m: plug(m) for m in patterns}, v=v)
