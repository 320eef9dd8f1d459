"""Simulation of AR(p) processes and the experiments that check closed forms.

Every experiment derives one generator per replicate from
``SeedSequence(seed).spawn(reps)``, so results depend only on ``(seed, reps)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from scipy.signal import lfilter

from errts.error_models import ErrorModel, contaminate_array, identity_error
from errts.estimation import ArModel, fit_ls
from errts.exceptions import DataError, ModelError
from errts.series import Series

__all__ = [
    "SimSpec",
    "ExperimentResult",
    "simulate_ar",
    "simulate_paths",
    "naive_limit_experiment",
    "corrected_experiment",
    "covariance_experiment",
    "replicate_streams",
]


@dataclass(frozen=True)
class SimSpec:
    """Simulation settings; Gaussian innovations only."""

    model: ArModel
    T: int
    burn_in: int = 500
    seed: int = 0
    dist: str = "gaussian"

    def __post_init__(self) -> None:
        self.model.require_stationary()
        if self.T < 1:
            raise DataError("T must be positive")
        if self.burn_in < 0:
            raise DataError("burn_in must be non-negative")
        if self.dist != "gaussian":
            raise ModelError(f"unsupported innovation distribution {self.dist!r}")


@dataclass(frozen=True)
class ExperimentResult:
    """Componentwise mean and standard deviation across replicates."""

    mean: NDArray[np.float64]
    sd: NDArray[np.float64]
    estimates: NDArray[np.float64]
    names: tuple[str, ...]

    @property
    def reps(self) -> int:
        return self.estimates.shape[0]

    @property
    def se(self) -> NDArray[np.float64]:
        return self.sd / np.sqrt(self.reps)


def replicate_streams(seed: int, reps: int) -> list[np.random.Generator]:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(reps)]


def _filter(model: ArModel, eps: NDArray[np.float64], burn_in: int) -> NDArray[np.float64]:
    """Run the AR recursion along the last axis, starting at the stationary mean."""
    mu = model.mean
    a = np.concatenate(([1.0], -model.phi_array))
    # Deviations from mu follow a zero-mean AR recursion; zero initial state = start at mu.
    y = lfilter([1.0], a, eps, axis=-1)
    return y[..., burn_in:] + mu


def simulate_ar(spec: SimSpec) -> Series:
    """One path of length ``spec.T`` after discarding ``spec.burn_in`` values."""
    rng = np.random.default_rng(spec.seed)
    eps = rng.normal(0.0, np.sqrt(spec.model.sigma_eps2), spec.burn_in + spec.T)
    return Series(_filter(spec.model, eps, spec.burn_in))


def simulate_paths(model: ArModel, T: int, rng: np.random.Generator, n: int = 1, burn_in: int = 500):
    """``n`` independent paths as an ``(n, T)`` array."""
    model.require_stationary()
    eps = rng.normal(0.0, np.sqrt(model.sigma_eps2), (n, burn_in + T))
    return _filter(model, eps, burn_in)


def _summarise(estimates: list[NDArray[np.float64]], names) -> ExperimentResult:
    arr = np.asarray(estimates)
    return ExperimentResult(arr.mean(axis=0), arr.std(axis=0, ddof=1), arr, tuple(names))


def naive_limit_experiment(spec: SimSpec, err: ErrorModel | None = None, reps: int = 200, seed: int | None = None):
    """Simulate, contaminate and fit by least squares ignoring the error."""
    if reps < 50:
        raise DataError("reps must be at least 50")
    err = identity_error() if err is None else err
    seed = spec.seed if seed is None else seed
    p = spec.model.p
    out = []
    for rng in replicate_streams(seed, reps):
        x = simulate_paths(spec.model, spec.T, rng, burn_in=spec.burn_in)[0]
        out.append(fit_ls(contaminate_array(x, err, rng), p).model.params)
    return _summarise(out, spec.model.param_names)


def corrected_experiment(spec: SimSpec, err: ErrorModel, reps: int = 200, seed: int | None = None):
    """As :func:`naive_limit_experiment` but fitting with the error correction."""
    from errts.corrected import fit_corrected

    seed = spec.seed if seed is None else seed
    out = []
    for rng in replicate_streams(seed, reps):
        x = simulate_paths(spec.model, spec.T, rng, burn_in=spec.burn_in)[0]
        out.append(fit_corrected(contaminate_array(x, err, rng), spec.model.p, err).model.params)
    return _summarise(out, spec.model.param_names)


def covariance_experiment(
    spec: SimSpec, err: ErrorModel | None = None, reps: int = 5000, seed: int | None = None, batch: int = 250
) -> NDArray[np.float64]:
    """Sample covariance of ``sqrt(T) (gamma*_0, ..., gamma*_p)`` across replicates.

    Paths are generated in batches of ``batch``; each batch owns one stream
    so the result is fixed by ``(seed, reps, batch)``.
    """
    if reps < 1000:
        raise DataError("reps must be at least 1000")
    err = identity_error() if err is None else err
    seed = spec.seed if seed is None else seed
    p, T = spec.model.p, spec.T
    stats = []
    n_batches = -(-reps // batch)
    for b, rng in enumerate(replicate_streams(seed, n_batches)):
        n = min(batch, reps - b * batch)
        x = contaminate_array(simulate_paths(spec.model, T, rng, n, spec.burn_in), err, rng)
        dev = x - x.mean(axis=1, keepdims=True)
        g = np.column_stack([np.einsum("ij,ij->i", dev[:, k:], dev[:, : T - k]) / (T - k) for k in range(p + 1)])
        stats.append(g)
    g = np.vstack(stats) * np.sqrt(T)
    return np.atleast_2d(np.cov(g, rowvar=False))

