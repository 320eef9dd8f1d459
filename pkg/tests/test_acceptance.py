"""Acceptance criteria at their stated tolerances.

Each test records one PASS/FAIL line, printed in the terminal summary.
"""

import json
import subprocess
import sys
import time

import numpy as np
import pytest

from errts.corrected import block_bootstrap, fit_corrected
from errts.error_models import AdditiveError, MultiplicativeError, contaminate_array
from errts.estimation import ArModel, fit_ee, fit_ls
from errts.forecasting import adjust_initials, forecast, monte_carlo_mspe, mspe, prediction_interval
from errts.montecarlo import (
    SimSpec,
    corrected_experiment,
    covariance_experiment,
    naive_limit_experiment,
    replicate_streams,
    simulate_paths,
)
from errts.naive import bartlett_matrix, gaussian_moments, naive_limit_arp, q1_matrix, q2_matrix
from errts.series import autocov_summary, is_stationary

pytestmark = pytest.mark.slow

MODEL_1 = ArModel(0.0, (0.5,), 1.0)
ERR_1 = AdditiveError(alpha0=0.0, alpha1=1.0, sigma_e2=1.0)
MODEL_2 = ArModel(1.0, (0.5,), 1.0)
ERR_2 = MultiplicativeError(beta0=2.0, sigma_u2=0.5, dist="lognormal")


def check(record, name, ok, detail):
    record(name, ok, detail)
    assert ok, detail


def test_01_additive_attenuation(record):
    t0 = time.perf_counter()
    spec = SimSpec(MODEL_1, 20000, seed=101)
    naive = naive_limit_experiment(spec, ERR_1, reps=200).mean[1]
    corr = corrected_experiment(spec, ERR_1, reps=200).mean[1]
    dt = time.perf_counter() - t0
    ok = abs(naive - 2 / 7) <= 0.02 and abs(corr - 0.5) <= 0.02 and dt < 60
    check(record, "1 additive attenuation", ok, f"naive {naive:.4f} (0.2857), corrected {corr:.4f} (0.5), {dt:.1f}s")


def test_02_multiplicative_attenuation(record):
    t0 = time.perf_counter()
    spec = SimSpec(MODEL_2, 20000, seed=102)
    naive = naive_limit_experiment(spec, ERR_2, reps=200).mean[1]
    corr = corrected_experiment(spec, ERR_2, reps=200).mean[1]
    dt = time.perf_counter() - t0
    ok = abs(naive - 1 / 6) <= 0.02 and abs(corr - 0.5) <= 0.03 and dt < 90
    check(record, "2 multiplicative attenuation", ok, f"naive {naive:.4f} (0.1667), corrected {corr:.4f} (0.5), {dt:.1f}s")


def test_03_ar2_naive_limits(record):
    t0 = time.perf_counter()
    model = ArModel(1.0, (0.5, -0.3), 1.0)
    worst = 0.0
    parts = []
    for label, err in (("additive", ERR_1), ("multiplicative", ERR_2)):
        lim = np.asarray(naive_limit_arp(model, err).phi_star)
        emp = naive_limit_experiment(SimSpec(model, 50000, seed=103), err, reps=100).mean[1:3]
        gap = float(np.max(np.abs(emp - lim)))
        worst = max(worst, gap)
        parts.append(f"{label} max gap {gap:.4f}")
    dt = time.perf_counter() - t0
    check(record, "3 AR(2) naive limits", worst <= 0.02 and dt < 180, f"{', '.join(parts)}, {dt:.1f}s")


def test_04_q_matrices(record):
    t0 = time.perf_counter()
    spec = SimSpec(MODEL_2, 2000, seed=104)
    cases = (
        ("Bartlett", None, bartlett_matrix(MODEL_2, 3.0, 1), 0.05),
        ("Q1", ERR_1, q1_matrix(1, MODEL_2, ERR_1), 0.07),
        ("Q2", ERR_2, q2_matrix(1, MODEL_2, ERR_2, gaussian_moments(MODEL_2)), 0.10),
    )
    ok = True
    parts = []
    for label, err, theory, tol in cases:
        emp = covariance_experiment(spec, err, reps=5000)
        rel = float(np.max(np.abs(emp / theory - 1)))
        ok &= rel <= tol
        parts.append(f"{label} {100 * rel:.1f}% (<{100 * tol:.0f}%)")
    dt = time.perf_counter() - t0
    ok &= dt < 300
    check(record, "4 Q matrices", ok, f"{', '.join(parts)}, {dt:.1f}s")


def test_05_estimator_equivalence(record):
    worst = 0.0
    for model in (MODEL_2, ArModel(1.0, (0.5, -0.3), 1.0)):
        for rng in replicate_streams(105, 100):
            x = simulate_paths(model, 10000, rng)[0]
            ls = fit_ls(x, model.p).model.params
            ee = fit_ee(autocov_summary(x, model.p)).model.params
            worst = max(worst, float(np.max(np.abs(ls - ee))))
    check(record, "5 estimator equivalence", worst < 0.01, f"max |LS - EE| {worst:.5f} (<0.01)")


def test_06_mspe_closed_forms(record):
    worst = 0.0
    for model, err in ((MODEL_1, ERR_1), (MODEL_2, ERR_2)):
        for h in range(1, 6):
            mc = monte_carlo_mspe(model, err, h, reps=50000, seed=106 + h)
            worst = max(worst, abs(mc / mspe(model, err, h) - 1))
    exact = all(
        mspe(MODEL_1, AdditiveError(), h) == pytest.approx((1 - 0.25**h) / 0.75, rel=1e-14)
        and mspe(MODEL_2, MultiplicativeError(beta0=2.0), h) == pytest.approx((1 - 0.25**h) / 0.75, rel=1e-14)
        for h in range(1, 6)
    )
    check(record, "6 MSPE closed forms", worst <= 0.05 and exact, f"max rel gap {100 * worst:.2f}% (<5%), zero-error reduction {exact}")


def test_07_interval_coverage(record):
    T, H, n = 500, 5, 5000
    err = AdditiveError(sigma_e2=0.5)
    hits = np.zeros(H)
    for rng in replicate_streams(107, n):
        x = simulate_paths(MODEL_2, T + H, rng)[0]
        obs = contaminate_array(x[:T], err, rng)
        fit = fit_corrected(obs, 1, err)
        model = fit.model
        point = forecast(model, adjust_initials(obs[-1:], err), H)
        pe = np.array([mspe(model, err, h) for h in range(1, H + 1)])
        lo, hi = prediction_interval(point, pe, 0.05)
        hits += (lo <= x[T:]) & (x[T:] <= hi)
    cov = hits / n
    ok = bool(np.all((cov >= 0.92) & (cov <= 0.98)))
    check(record, "7 interval coverage", ok, "coverage h=1..5 " + " ".join(f"{c:.3f}" for c in cov) + " in [0.92, 0.98]")


def test_08_block_bootstrap(record):
    t0 = time.perf_counter()
    T = 2000
    mc_sd = corrected_experiment(SimSpec(MODEL_1, T, seed=108), ERR_1, reps=1000).sd[1]
    ratios = []
    for rng in replicate_streams(1108, 5):
        obs = contaminate_array(simulate_paths(MODEL_1, T, rng)[0], ERR_1, rng)
        boot = block_bootstrap(obs, 1, ERR_1, N=1000, seed=int(rng.integers(2**31)))
        assert boot.block_len == 13
        ratios.append(boot.se[1] / mc_sd)
    dt = time.perf_counter() - t0
    ratio = float(np.mean(ratios))
    ok = abs(ratio - 1) <= 0.20 and dt < 300
    check(
        record,
        "8 block bootstrap",
        ok,
        f"mean SE/MC-SD {ratio:.3f} over 5 datasets (range {min(ratios):.3f}-{max(ratios):.3f}), MC SD {mc_sd:.4f}, {dt:.1f}s",
    )


def test_09_ar2_stationarity_region(record):
    disagree = checked = 0
    for p1 in np.linspace(-2, 2, 41):
        for p2 in np.linspace(-1, 1, 41):
            margin = min(1 - p2 - p1, 1 - p2 + p1, 1 - abs(p2))
            if abs(margin) < 1e-6:
                continue
            checked += 1
            disagree += (margin > 0) != is_stationary((p1, p2))
    check(record, "9 AR(2) stationarity region", disagree == 0, f"{disagree} disagreements over {checked} grid points")


def _sensitivity(kind):
    cmd = [sys.executable, "-m", "errts.cli", "sensitivity", "--error", kind, "--seed", "7"]
    return subprocess.run(cmd, capture_output=True, check=True).stdout


def test_10_pipeline_determinism(record):
    same = True
    statuses = []
    for kind in ("additive", "multiplicative"):
        a, b = _sensitivity(kind), _sensitivity(kind)
        same &= a == b
        statuses += [v["status"] for v in json.loads(a)["variants"]]
    ok = same and all(s == "ok" for s in statuses)
    check(record, "10 pipeline determinism", ok, f"byte-identical {same}, variant statuses {sorted(set(statuses))}")
