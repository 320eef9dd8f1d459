import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from errts.estimation import ArModel, FitMethod, fit_ee, fit_ls, fitted_equivalence_gap
from errts.exceptions import ConditioningError, DataError, ModelError, NonStationaryError
from errts.series import AutocovSummary, autocov_summary

from conftest import simulate


def ee_residuals(fit):
    """Residuals of the three estimating equations at the fitted values."""
    s = fit.summary
    phi = fit.model.phi_array
    r1 = s.toeplitz @ phi - s.gamma_vec
    r2 = fit.model.phi0 - (1 - phi.sum()) * s.mu_hat
    r3 = fit.model.sigma_eps2 - (s.gamma0 - 2 * phi @ s.gamma_vec + phi @ s.toeplitz @ phi)
    return np.concatenate([r1, [r2, r3]])


class TestArModel:
    def test_acvf_ar1(self, ar1):
        g = ar1.acvf(3)
        np.testing.assert_allclose(g, [4 / 3, 2 / 3, 1 / 3, 1 / 6])

    def test_acvf_ar2_satisfies_yule_walker(self, ar2):
        g = ar2.acvf(6)
        phi = ar2.phi_array
        for k in range(1, 7):
            assert g[k] == pytest.approx(phi[0] * g[abs(k - 1)] + phi[1] * g[abs(k - 2)])
        assert g[0] == pytest.approx(phi @ g[1:3] + ar2.sigma_eps2)

    def test_mean_and_long_run_variance(self, ar1):
        assert ar1.mean == 2.0
        assert ar1.long_run_variance == pytest.approx(4.0)

    def test_validation(self):
        with pytest.raises(ModelError):
            ArModel(0, (0.5,), -1)
        with pytest.raises(ModelError):
            ArModel(0, (0.5,), 1, eta=0.5)

    def test_acvf_requires_stationary(self):
        with pytest.raises(NonStationaryError):
            ArModel(0, (1.0,), 1).acvf(2)


class TestFitLs:
    def test_white_noise(self):
        x = np.random.default_rng(0).normal(size=50000)
        m = fit_ls(x, 1).model
        assert abs(m.phi[0]) <= 0.02
        assert 0.97 <= m.sigma_eps2 <= 1.03

    def test_ar1(self, ar1):
        m = fit_ls(simulate(ar1, 50000, 4), 1).model
        assert m.phi[0] == pytest.approx(0.5, abs=0.02)
        assert m.phi0 == pytest.approx(1.0, abs=0.05)

    def test_ar2(self, ar2):
        m = fit_ls(simulate(ar2, 50000, 5), 2).model
        np.testing.assert_allclose(m.phi, [0.5, -0.3], atol=0.02)

    def test_intercept_identity(self, ar1):
        fit = fit_ls(simulate(ar1, 500, 6), 1)
        assert fit.model.phi0 == pytest.approx(fit.summary.mu_hat * (1 - fit.model.phi[0]))
        assert fit.method is FitMethod.LEAST_SQUARES

    def test_constant_rejected(self):
        with pytest.raises(DataError, match="constant"):
            fit_ls(np.ones(50), 1)

    def test_too_short(self):
        with pytest.raises(DataError, match="T >= 10"):
            fit_ls(np.arange(9.0), 2)

    def test_singular_design(self):
        # period-2 series: the two lags are exactly collinear
        with pytest.raises(ConditioningError, match="singular normal equations"):
            fit_ls(np.tile([1.0, -1.0], 20), 2)

    def test_eta_estimate_gaussian(self, ar1):
        eta = fit_ls(simulate(ar1, 50000, 7), 1, estimate_eta=True).model.eta
        assert eta == pytest.approx(3.0, abs=0.15)


class TestFitEe:
    def test_white_noise_summary(self):
        m = fit_ee(AutocovSummary(0.7, (1.0, 0.0, 0.0), 2)).model
        np.testing.assert_allclose(m.phi, 0)
        assert m.phi0 == 0.7
        assert m.sigma_eps2 == 1.0

    def test_hand_evaluation(self):
        m = fit_ee(AutocovSummary(2.0, (4 / 3, 2 / 3), 1)).model
        assert m.phi[0] == pytest.approx(0.5)
        assert m.phi0 == pytest.approx(1.0)
        assert m.sigma_eps2 == pytest.approx(1.0)

    def test_ill_conditioned(self):
        with pytest.raises(ConditioningError, match="condition number"):
            fit_ee(AutocovSummary(0.0, (1.0, 1.0, 1.0), 2))

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 10_000), st.integers(1, 4))
    def test_defining_equations(self, seed, p):
        x = np.random.default_rng(seed).normal(size=200).cumsum() * 0.1 + np.random.default_rng(seed + 1).normal(size=200)
        fit = fit_ee(autocov_summary(x, p))
        np.testing.assert_allclose(ee_residuals(fit), 0, atol=1e-10)


class TestEquivalence:
    def test_gap_t10000(self, ar1):
        assert fitted_equivalence_gap(simulate(ar1, 10000, 8), 1) < 0.01

    def test_gap_t100000(self, ar1):
        assert fitted_equivalence_gap(simulate(ar1, 100000, 9), 1) < 0.003

    def test_gap_white_noise(self):
        assert fitted_equivalence_gap(np.random.default_rng(10).normal(size=10000), 1) < 0.01

    @pytest.mark.slow
    def test_both_estimators_converge(self, ar2):
        errs_ls, errs_ee = [], []
        for seed in range(200):
            x = simulate(ar2, 5000, 1000 + seed)
            errs_ls.append(np.abs(fit_ls(x, 2).model.phi_array - ar2.phi_array))
            errs_ee.append(np.abs(fit_ee(autocov_summary(x, 2)).model.phi_array - ar2.phi_array))
        assert np.mean(errs_ls, axis=0).max() < 0.03
        assert np.mean(errs_ee, axis=0).max() < 0.03
