import datetime as dt

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from errts.estimation import ArModel
from errts.exceptions import DataError
from errts.series import (
    Series,
    ar_roots,
    autocov_hat,
    autocov_summary,
    difference,
    integrate,
    is_stationary,
    mean_hat,
)

from conftest import simulate

finite = st.floats(-1e6, 1e6, allow_nan=False)


class TestSeries:
    def test_rejects_empty(self):
        with pytest.raises(DataError, match="empty input"):
            Series([])

    def test_rejects_nonfinite(self):
        with pytest.raises(DataError):
            Series([1.0, np.nan])

    def test_values_read_only(self):
        s = Series([1.0, 2.0])
        with pytest.raises(ValueError):
            s.values[0] = 3.0

    def test_dates_follow_origin(self):
        s = Series([1, 2, 3], origin=dt.date(2020, 5, 5))
        assert s.dates()[-1] == dt.date(2020, 5, 7)


class TestMoments:
    def test_mean_constant(self):
        assert mean_hat([1, 1, 1]) == 1.0

    def test_mean_symmetric(self):
        assert mean_hat([0, 2]) == 1.0

    def test_mean_empty(self):
        with pytest.raises(DataError, match="empty input"):
            mean_hat(np.array([]))

    def test_mean_ar1_simulation(self, ar1):
        assert mean_hat(simulate(ar1, 10000, 1)) == pytest.approx(2.0, abs=0.1)

    def test_autocov_constant(self):
        assert autocov_hat([3.0] * 6, 2) == 0.0

    def test_autocov_alternating(self):
        assert autocov_hat([-1, 1, -1, 1], 0) == pytest.approx(1.0)
        # three products of -1 averaged over T - 1 = 3
        assert autocov_hat([-1, 1, -1, 1], 1) == pytest.approx(-1.0)

    def test_autocov_lag_too_large(self):
        with pytest.raises(DataError, match="lag exceeds length"):
            autocov_hat([1, 2, 3], 3)

    def test_autocov_normalisation_is_t_minus_k(self):
        x = np.array([1.0, 3.0, 2.0, 5.0, 4.0])
        d = x - x.mean()
        assert autocov_hat(x, 2) == pytest.approx(np.dot(d[2:], d[:-2]) / 3)

    def test_autocov_ar1_simulation(self, ar1_zero_mean):
        x = simulate(ar1_zero_mean, 20000, 2)
        assert autocov_hat(x, 1) == pytest.approx(2 / 3, abs=0.03)

    def test_summary_alternating(self):
        s = autocov_summary([-1, 1, -1, 1], 1)
        assert s.mu_hat == 0.0
        assert s.gammas == pytest.approx((1.0, -1.0))

    def test_summary_constant(self):
        assert autocov_summary([2.0] * 10, 3).gammas == (0.0, 0.0, 0.0, 0.0)

    def test_summary_ar1_simulation(self, ar1_zero_mean):
        s = autocov_summary(simulate(ar1_zero_mean, 20000, 3), 2)
        assert s.gammas == pytest.approx((4 / 3, 2 / 3, 1 / 3), abs=0.05)

    def test_toeplitz_symmetric(self):
        s = autocov_summary(np.arange(20.0) ** 1.5, 4)
        np.testing.assert_array_equal(s.toeplitz, s.toeplitz.T)

    @given(arrays(float, st.integers(2, 50), elements=finite))
    def test_gamma0_nonnegative(self, x):
        g0 = autocov_hat(x, 0)
        assert g0 >= 0
        if np.ptp(x) == 0:
            assert g0 == 0


class TestDifferencing:
    def test_difference(self):
        d = difference(Series([1, 2, 4]))
        np.testing.assert_array_equal(d.values, [1, 2])
        assert d.diff_order == 1

    def test_difference_constant(self):
        np.testing.assert_array_equal(difference(Series([5.0] * 4)).values, 0)

    def test_difference_too_short(self):
        with pytest.raises(DataError):
            difference(Series([1.0]))

    def test_integrate(self):
        out = integrate(Series([1, 2], diff_order=1), 1.0)
        np.testing.assert_array_equal(out.values, [1, 2, 4])
        assert out.diff_order == 0

    def test_integrate_zeros(self):
        np.testing.assert_array_equal(integrate(Series([0.0] * 3, diff_order=1), 7.0).values, 7.0)

    def test_integrate_needs_difference(self):
        with pytest.raises(DataError):
            integrate(Series([1.0, 2.0]), 0.0)

    def test_origin_round_trip(self):
        s = Series([3.0, 1.0, 4.0], origin=dt.date(2020, 3, 1))
        back = integrate(difference(s), s.values[0])
        assert back.origin == s.origin

    @given(arrays(float, st.integers(2, 200), elements=finite))
    def test_round_trip(self, x):
        s = Series(x)
        back = integrate(difference(s), x[0])
        tol = 1e-12 * len(x) * max(1.0, np.abs(x).max())
        np.testing.assert_allclose(back.values, x, rtol=0, atol=tol)
        assert back.diff_order == 0


class TestStationarity:
    def test_ar1(self):
        assert is_stationary([0.5])
        assert not is_stationary([1.0])

    def test_ar2_examples(self):
        assert is_stationary(ArModel(0, (0.5, 0.3), 1))
        assert not is_stationary((0.5, 0.6))

    def test_roots_are_polynomial_roots(self):
        phi = [0.3, -0.2, 0.1, 0.05]
        np.testing.assert_allclose(np.sort_complex(ar_roots(phi)), np.sort_complex(np.roots([1, *(-np.array(phi))])))

    @settings(max_examples=200)
    @given(st.floats(-2, 2), st.floats(-2, 2))
    def test_ar2_triangle(self, p1, p2):
        margins = (1 - (p1 + p2), 1 - (p2 - p1), 1 - abs(p2))
        if min(abs(m) for m in margins) < 1e-6:
            return
        assert is_stationary((p1, p2)) == (min(margins) > 0)
