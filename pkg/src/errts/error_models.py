"""Additive and multiplicative measurement-error mechanisms.

Additive:        X*_t = alpha0 + alpha1 X_t + e_t,   E e = 0, Var e = sigma_e2
Multiplicative:  X*_t = beta0 u_t X_t,               E u = 1, Var u = sigma_u2

Both error terms are i.i.d. and independent of the true series.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

from errts.exceptions import DataError, ModelError
from errts.series import Series, as_series

__all__ = [
    "AdditiveError",
    "MultiplicativeError",
    "ErrorModel",
    "TAU_A",
    "scale_from_tau",
    "surrogate_mean",
    "surrogate_var",
    "validate_bounds",
    "contaminate",
    "contaminate_array",
    "draw_u",
    "identity_error",
]

# Asymptomatic infection rate from the meta-analysis used for COVID-19 mortality.
TAU_A = 0.46


def scale_from_tau(tau_a: float = TAU_A) -> float:
    """Scale ``1 / (1 - tau_a)`` linking reported to true rates."""
    if not 0 <= tau_a < 1:
        raise ModelError(f"tau_a must lie in [0, 1), got {tau_a}")
    return 1.0 / (1.0 - tau_a)


@dataclass(frozen=True)
class AdditiveError:
    """``X* = alpha0 + alpha1 X + e``.

    ``e4`` is the fourth moment ``E(e^4)``; it defaults to the Gaussian value
    ``3 sigma_e2^2``.
    """

    alpha0: float = 0.0
    alpha1: float = 1.0
    sigma_e2: float = 0.0
    e4: float | None = None

    kind = "additive"

    def __post_init__(self) -> None:
        if self.alpha1 == 0 or not math.isfinite(self.alpha1):
            raise ModelError("alpha1 must be finite and non-zero")
        if not self.sigma_e2 >= 0:
            raise ModelError(f"sigma_e2 must be non-negative, got {self.sigma_e2}")
        e4 = 3.0 * self.sigma_e2**2 if self.e4 is None else float(self.e4)
        if e4 < self.sigma_e2**2 * (1 - 1e-12):
            raise ModelError("E(e^4) must be at least sigma_e2^2")
        object.__setattr__(self, "e4", e4)

    @property
    def is_identity(self) -> bool:
        return self.alpha0 == 0 and self.alpha1 == 1 and self.sigma_e2 == 0

    @property
    def error_variance(self) -> float:
        return self.sigma_e2

    def with_variance(self, value: float) -> "AdditiveError":
        return AdditiveError(self.alpha0, self.alpha1, value)


def _u_moments(sigma_u2: float, dist: str) -> tuple[float, float]:
    """``E(u^3)`` and ``E(u^4)`` for a mean-one law with variance ``sigma_u2``."""
    s = sigma_u2
    if dist == "lognormal":
        # E u^k = exp(k m + k^2 v / 2) with v = log(1+s), m = -v/2  =>  (1+s)^{k(k-1)/2}
        return (1 + s) ** 3, (1 + s) ** 6
    if dist == "gamma":
        # shape 1/s, scale s: E u^k = prod_{i<k} (1 + i s)
        return (1 + s) * (1 + 2 * s), (1 + s) * (1 + 2 * s) * (1 + 3 * s)
    raise ModelError(f"unknown multiplicative error distribution {dist!r}")


@dataclass(frozen=True)
class MultiplicativeError:
    """``X* = beta0 u X`` with ``u > 0``, ``E u = 1`` and ``Var u = sigma_u2``.

    ``u3`` and ``u4`` (raw moments ``E u^3``, ``E u^4``) default to the values
    implied by ``dist``. The coefficient of variation of ``u`` is
    ``sqrt(sigma_u2)``.
    """

    beta0: float = 1.0
    sigma_u2: float = 0.0
    dist: Literal["lognormal", "gamma"] = "lognormal"
    u3: float | None = None
    u4: float | None = None

    kind = "multiplicative"

    def __post_init__(self) -> None:
        if not self.beta0 > 0 or not math.isfinite(self.beta0):
            raise ModelError("beta0 must be positive")
        if not self.sigma_u2 >= 0:
            raise ModelError(f"sigma_u2 must be non-negative, got {self.sigma_u2}")
        u3, u4 = _u_moments(self.sigma_u2, self.dist)
        u3 = u3 if self.u3 is None else float(self.u3)
        u4 = u4 if self.u4 is None else float(self.u4)
        if u4 < (1 + self.sigma_u2) ** 2 * (1 - 1e-12):
            raise ModelError("E(u^4) must be at least (1 + sigma_u2)^2")
        object.__setattr__(self, "u3", u3)
        object.__setattr__(self, "u4", u4)

    @property
    def is_identity(self) -> bool:
        return self.beta0 == 1 and self.sigma_u2 == 0

    @property
    def error_variance(self) -> float:
        return self.sigma_u2

    @property
    def cv_percent(self) -> float:
        return math.sqrt(self.sigma_u2) * 100.0

    @property
    def w3(self) -> float:
        """Third central moment ``E(u-1)^3``."""
        return self.u3 - 3 * (1 + self.sigma_u2) + 2

    @property
    def w4(self) -> float:
        """Fourth central moment ``E(u-1)^4``."""
        return self.u4 - 4 * self.u3 + 6 * (1 + self.sigma_u2) - 3

    def with_variance(self, value: float) -> "MultiplicativeError":
        return MultiplicativeError(self.beta0, value, self.dist)


ErrorModel = Union[AdditiveError, MultiplicativeError]


def identity_error() -> AdditiveError:
    return AdditiveError()


def surrogate_mean(model: ErrorModel, mu: float) -> float:
    """``E(X*)``: ``alpha0 + alpha1 mu`` or ``beta0 mu``."""
    if isinstance(model, AdditiveError):
        return model.alpha0 + model.alpha1 * mu
    return model.beta0 * mu


def surrogate_var(model: ErrorModel, gamma0: float, mu: float = 0.0) -> float:
    """``Var(X*)`` given the true variance ``gamma0`` and mean ``mu``."""
    if gamma0 < 0:
        raise ModelError("gamma0 must be non-negative")
    if isinstance(model, AdditiveError):
        return model.alpha1**2 * gamma0 + model.sigma_e2
    s = model.sigma_u2
    return model.beta0**2 * ((s + 1) * gamma0 + s * mu**2)


def validate_bounds(model: ErrorModel, observed_var_star: float, mu: float = 0.0) -> bool:
    """Check that the error variance is strictly below what the data allow.

    Additive: ``sigma_e2 < Var(X*)``. Multiplicative:
    ``sigma_u2 < Var(X*) / (beta0^2 mu^2)`` (always true when ``mu == 0``).
    """
    if not observed_var_star > 0:
        raise ModelError("observed variance must be positive")
    if isinstance(model, AdditiveError):
        return model.sigma_e2 < observed_var_star
    if model.sigma_u2 == 0:
        return True
    denom = model.beta0**2 * mu**2
    if denom == 0:
        return True
    return model.sigma_u2 < observed_var_star / denom


def draw_u(rng: np.random.Generator, size, sigma_u2: float, dist: str = "lognormal") -> NDArray[np.float64]:
    """Positive mean-one draws with variance ``sigma_u2``."""
    if sigma_u2 == 0:
        return np.ones(size)
    if dist == "lognormal":
        v = math.log1p(sigma_u2)
        return rng.lognormal(mean=-v / 2, sigma=math.sqrt(v), size=size)
    if dist == "gamma":
        return rng.gamma(shape=1.0 / sigma_u2, scale=sigma_u2, size=size)
    raise ModelError(f"unknown multiplicative error distribution {dist!r}")


def contaminate_array(x: ArrayLike, model: ErrorModel, rng: np.random.Generator) -> NDArray[np.float64]:
    """Apply ``model`` elementwise to an array of any shape."""
    x = np.asarray(x, dtype=float)
    if isinstance(model, AdditiveError):
        out = model.alpha0 + model.alpha1 * x
        if model.sigma_e2 > 0:
            out = out + rng.normal(0.0, math.sqrt(model.sigma_e2), size=x.shape)
        return out
    return model.beta0 * draw_u(rng, x.shape, model.sigma_u2, model.dist) * x


def contaminate(s: Series | ArrayLike, model: ErrorModel, seed: int | np.random.SeedSequence | None = 0) -> Series:
    """Surrogate series ``X*`` generated from ``s`` under ``model``.

    Deterministic given ``seed``; each call owns a private generator.
    """
    s = as_series(s)
    if seed is None:
        raise DataError("contaminate requires an explicit seed")
    rng = np.random.default_rng(seed)
    return Series(contaminate_array(s.values, model, rng), origin=s.origin, diff_order=s.diff_order)
