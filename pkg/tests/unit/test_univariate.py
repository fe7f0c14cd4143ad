"""
Unit tests for univariate log-ARCH estimation and forecasting
"""

import numpy as np
import pytest

from network_logarch.core.errors import (
    InsufficientObservations,
    InvalidParameter,
    SingularDesign,
)
from network_logarch.services.univariate import (
    estimate_mu_star,
    fit_logarch,
    fit_panel,
    forecast_one_step,
    forecast_panel,
    select_ar_order,
)
from network_logarch.utils.data_loader import floor_log_squared


@pytest.fixture
def log_y2(univariate_series):
    return floor_log_squared(univariate_series, np.array(np.min(univariate_series ** 2)))


class TestEstimateMuStar:
    def test_zero_residuals(self):
        assert estimate_mu_star(np.zeros(10)) == 0.0

    def test_constant_residuals(self):
        assert estimate_mu_star(np.full(5, 2.0)) == pytest.approx(-2.0)

    def test_large_residuals_do_not_overflow(self):
        value = estimate_mu_star([1000.0, 1000.0])
        assert value == pytest.approx(-1000.0)

    def test_empty(self):
        with pytest.raises(InsufficientObservations):
            estimate_mu_star([])


class TestFitLogarch:
    """OLS on the ARMA representation"""

    def test_residual_identity(self, log_y2):
        fit = fit_logarch(log_y2, order=1)
        reconstructed = fit.phi0 + fit.gamma[0] * log_y2[:-1] + fit.residuals
        np.testing.assert_allclose(reconstructed, log_y2[1:], atol=1e-10)

    def test_recovers_gamma(self, log_y2):
        fit = fit_logarch(log_y2, order=1)
        assert fit.gamma[0] == pytest.approx(0.4, abs=0.08)
        assert fit.omega == pytest.approx(fit.phi0 - fit.mu_star)
        assert fit.nobs == log_y2.shape[0] - 1
        assert fit.std_errors.shape == (2,)
        assert np.all(fit.std_errors > 0)

    def test_residuals_have_zero_mean(self, log_y2):
        fit = fit_logarch(log_y2, order=2)
        assert abs(fit.residuals.mean()) < 1e-10
        assert fit.order == 2

    def test_constant_series_is_singular(self):
        with pytest.raises(SingularDesign):
            fit_logarch(np.full(50, -8.0))

    def test_too_short(self):
        with pytest.raises(InsufficientObservations):
            fit_logarch([1.0, 2.0, 3.0], order=1)

    def test_bad_order(self, log_y2):
        with pytest.raises(InvalidParameter):
            fit_logarch(log_y2, order=0)

    def test_non_finite(self):
        with pytest.raises(InvalidParameter):
            fit_logarch([1.0, 2.0, np.inf, 3.0, 1.0, 2.0])


class TestForecastOneStep:
    def test_forecast_formula(self, log_y2):
        fit = fit_logarch(log_y2, order=2)
        expected = fit.phi0 - fit.mu_star + fit.gamma[0] * log_y2[-1] + fit.gamma[1] * log_y2[-2]
        assert forecast_one_step(fit, log_y2) == pytest.approx(expected)

    def test_linear_in_lags(self, log_y2):
        fit = fit_logarch(log_y2, order=2)
        x, z = log_y2[-2:], log_y2[-4:-2]
        mixed = forecast_one_step(fit, 0.3 * x + 0.7 * z)
        assert mixed == pytest.approx(0.3 * forecast_one_step(fit, x) + 0.7 * forecast_one_step(fit, z))

    def test_needs_enough_lags(self, log_y2):
        fit = fit_logarch(log_y2, order=2)
        with pytest.raises(InsufficientObservations):
            forecast_one_step(fit, [1.0])

    def test_panel_helpers(self, network_volpanel):
        fits = fit_panel(network_volpanel)
        forecasts = forecast_panel(fits, network_volpanel)
        assert forecasts.shape == (network_volpanel.n,)
        assert forecasts[2] == pytest.approx(forecast_one_step(fits[2], network_volpanel.values[2]))


class TestSelectArOrder:
    def test_selects_true_order(self, log_y2):
        order, fit = select_ar_order(log_y2, max_order=4)
        assert order == 1
        assert fit.order == 1

    def test_common_sample(self, log_y2):
        _, fit = select_ar_order(log_y2, max_order=3, criterion='aic')
        assert fit.nobs == log_y2.shape[0] - 3

    def test_unknown_criterion(self, log_y2):
        with pytest.raises(InvalidParameter):
            select_ar_order(log_y2, criterion='hqc')
