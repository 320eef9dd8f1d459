import warnings

import numpy as np
import pytest

from errts.corrected import (
    block_bootstrap,
    corrected_moments,
    default_block_len,
    fit_corrected,
    sandwich_cov,
    sandwich_jacobian,
)
from errts.error_models import AdditiveError, MultiplicativeError, contaminate_array
from errts.estimation import ArModel, fit_ee
from errts.exceptions import DataError, ModelError, OvercorrectionError
from errts.naive import bartlett_matrix
from errts.series import AutocovSummary, autocov_summary

from conftest import simulate


def contaminated(model, err, T, seed):
    rng = np.random.default_rng(seed)
    x = simulate(model, T, seed)
    return contaminate_array(x, err, rng)


class TestCorrectedMoments:
    def test_identity(self):
        s = AutocovSummary(1.5, (2.0, 0.7, 0.1), 2)
        assert corrected_moments(s, AdditiveError()) == s
        assert corrected_moments(s, MultiplicativeError()) == s

    def test_additive_hand_value(self):
        s = AutocovSummary(0.0, (11 / 6, 2 / 3), 1)
        out = corrected_moments(s, AdditiveError(sigma_e2=0.5))
        assert out.gamma0 == pytest.approx(4 / 3)
        assert out.gammas[1] == pytest.approx(2 / 3)

    def test_additive_mean(self):
        out = corrected_moments(AutocovSummary(7.0, (5.0, 1.0), 1), AdditiveError(alpha0=1, alpha1=2, sigma_e2=1))
        assert out.mu_hat == pytest.approx(3.0)
        assert out.gammas == pytest.approx((1.0, 0.25))

    def test_multiplicative_rescaling(self):
        out = corrected_moments(AutocovSummary(3.0, (8.0, 4.0), 1), MultiplicativeError(beta0=2))
        assert out.mu_hat == 1.5
        assert out.gammas == (2.0, 1.0)

    def test_multiplicative_uses_corrected_mean(self):
        out = corrected_moments(AutocovSummary(4.0, (10.0, 2.0), 1), MultiplicativeError(beta0=2, sigma_u2=0.25))
        # mu = 2; g0 = 10 / (1.25 * 4) - 0.25 * 4 / 1.25
        assert out.gamma0 == pytest.approx(2.0 - 0.8)

    def test_overcorrection_iff_error_exceeds_variance(self):
        s = AutocovSummary(0.0, (1.0, 0.3), 1)
        corrected_moments(s, AdditiveError(sigma_e2=0.999))
        with pytest.raises(OvercorrectionError, match="overcorrection"):
            corrected_moments(s, AdditiveError(sigma_e2=1.0))


class TestFitCorrected:
    def test_identity_matches_fit_ee(self, ar1):
        x = simulate(ar1, 1000, 1)
        a = fit_corrected(x, 2, AdditiveError()).model
        b = fit_ee(autocov_summary(x, 2)).model
        np.testing.assert_allclose(a.params, b.params)

    def test_composition(self, ar1):
        err = AdditiveError(0.5, 1.3, 0.4)
        x = contaminated(ar1, err, 2000, 2)
        fit = fit_corrected(x, 1, err)
        direct = fit_ee(corrected_moments(autocov_summary(x, 1), err)).model
        np.testing.assert_array_equal(fit.model.params, direct.params)

    def test_additive_recovers_truth(self, ar1):
        err = AdditiveError(sigma_e2=1.0)
        x = contaminated(ar1, err, 50000, 3)
        assert fit_corrected(x, 1, err).model.phi[0] == pytest.approx(0.5, abs=0.02)
        assert fit_ee(autocov_summary(x, 1)).model.phi[0] == pytest.approx(0.2857, abs=0.02)

    def test_multiplicative_recovers_truth(self, ar1):
        err = MultiplicativeError(beta0=1 / (1 - 0.46), sigma_u2=0.3)
        x = contaminated(ar1, err, 50000, 4)
        assert fit_corrected(x, 1, err).model.phi[0] == pytest.approx(0.5, abs=0.03)

    def test_nonstationary_warns(self):
        # near-unit-root AR(2); removing too much variance breaks the lag-2 structure
        x = simulate(ArModel(0, (1.2, -0.3), 1), 200, 0)
        with pytest.warns(RuntimeWarning, match="not stationary"):
            fit = fit_corrected(x, 2, AdditiveError(sigma_e2=0.1 * np.var(x)))
        assert not fit.stationary

    @pytest.mark.slow
    def test_bias_shrinks_with_t(self, ar1):
        err = AdditiveError(sigma_e2=1.0)
        bias = {}
        for T in (2000, 20000):
            est = [fit_corrected(contaminated(ar1, err, T, 100 + s), 1, err).model.phi[0] for s in range(200)]
            bias[T] = np.mean(est) - 0.5
        assert abs(bias[20000]) < abs(bias[2000])


class TestBootstrap:
    def test_full_block_is_degenerate(self, ar1):
        x = simulate(ar1, 100, 6)
        res = block_bootstrap(x, 1, AdditiveError(), b=100, N=20)
        np.testing.assert_allclose(res.variance, 0, atol=1e-24)

    def test_deterministic(self, ar1):
        x = simulate(ar1, 300, 7)
        a = block_bootstrap(x, 1, AdditiveError(sigma_e2=0.2), N=50, seed=3, keep=True)
        b = block_bootstrap(x, 1, AdditiveError(sigma_e2=0.2), N=50, seed=3, keep=True)
        np.testing.assert_array_equal(a.estimates, b.estimates)
        np.testing.assert_array_equal(a.variance, b.variance)

    def test_replicates_keyed_by_index(self, ar1):
        x = simulate(ar1, 300, 8)
        small = block_bootstrap(x, 1, AdditiveError(), N=20, seed=4, keep=True)
        large = block_bootstrap(x, 1, AdditiveError(), N=40, seed=4, keep=True)
        np.testing.assert_array_equal(small.estimates, large.estimates[:20])

    def test_variance_is_population_form(self, ar1):
        x = simulate(ar1, 300, 9)
        res = block_bootstrap(x, 1, AdditiveError(), N=30, keep=True)
        np.testing.assert_allclose(res.variance, res.estimates.var(axis=0))

    def test_default_block_length(self):
        assert default_block_len(2000) == 13
        assert default_block_len(1000) == 10
        assert default_block_len(1) == 1

    def test_argument_checks(self, ar1):
        x = simulate(ar1, 50, 10)
        with pytest.raises(DataError):
            block_bootstrap(x, 1, AdditiveError(), b=51)
        with pytest.raises(DataError):
            block_bootstrap(x, 1, AdditiveError(), N=1)

    def test_too_many_failures(self, ar1):
        x = simulate(ar1, 60, 11)
        with pytest.raises(ModelError, match="replicates failed"):
            block_bootstrap(x, 1, AdditiveError(sigma_e2=0.97 * np.var(x)), N=50)


class TestSandwich:
    def test_white_noise_variance(self):
        x = np.random.default_rng(12).normal(size=4000)
        fit = fit_corrected(x, 1, AdditiveError())
        wn = ArModel(0, (0.0,), 1.0)
        cov = sandwich_cov(fit, bartlett_matrix(wn, 3.0, 1))
        assert cov[0, 0] == pytest.approx(1 / 4000, rel=0.1)

    def test_white_noise_variance_matches_simulation(self):
        est = [fit_corrected(np.random.default_rng(s).normal(size=1000), 1, AdditiveError()).model.phi[0] for s in range(2000)]
        assert np.var(est) == pytest.approx(1 / 1000, rel=0.1)

    def test_linear_in_q(self, ar1):
        fit = fit_corrected(simulate(ar1, 2000, 13), 1, AdditiveError())
        Q = bartlett_matrix(ar1, 3.0, 1)
        np.testing.assert_allclose(sandwich_cov(fit, 3.5 * Q), 3.5 * sandwich_cov(fit, Q), rtol=1e-12)

    def test_jacobian_matches_analytic(self, ar1):
        err = AdditiveError(alpha1=1.5, sigma_e2=0.4)
        fit = fit_corrected(contaminated(ar1, err, 5000, 14), 1, err)
        g0, g1 = fit.surrogate_summary.gammas
        G = sandwich_jacobian(fit)
        # phi1 = g1 / (g0 - sigma_e2)
        d = g0 - err.sigma_e2
        assert G[0, 1] == pytest.approx(1 / d, rel=1e-4)
        assert G[0, 0] == pytest.approx(-g1 / d**2, rel=1e-4)

    def test_rejects_asymmetric_q(self, ar1):
        fit = fit_corrected(simulate(ar1, 200, 15), 1, AdditiveError())
        with pytest.raises(ModelError, match="symmetric"):
            sandwich_cov(fit, [[1.0, 0.5], [0.2, 1.0]])

    def test_rejects_wrong_shape(self, ar1):
        fit = fit_corrected(simulate(ar1, 200, 16), 1, AdditiveError())
        with pytest.raises(ModelError):
            sandwich_cov(fit, np.eye(3))
