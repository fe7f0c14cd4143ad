"""
Unit tests for the network log-ARCH estimator and forecaster
"""

import numpy as np
import pytest

from network_logarch.core.errors import (
    InvalidParameter,
    SingularMoment,
    UnstableRho,
)
from network_logarch.core.types import EdgeWeightMatrix, LogVolPanel, NetworkFit, ZeroPolicy
from network_logarch.services.network_model import (
    NetworkGMM,
    fit_network_logarch,
    forecast_network_one_step,
    helmert_transform,
)
from network_logarch.services.univariate import fit_panel, forecast_panel
from network_logarch.utils.data_loader import log_squared
from network_logarch.utils.simulate import InnovationSpec, simulate_network_paths


class TestHelmertTransform:
    """Forward orthogonal deviations"""

    def test_removes_constants(self):
        rng = np.random.Generator(np.random.Philox(1))
        x = rng.normal(size=(4, 30))
        shifted = x + np.array([[3.0], [-7.0], [0.5], [100.0]])
        np.testing.assert_allclose(helmert_transform(shifted), helmert_transform(x), atol=1e-10)

    def test_constant_rows_vanish(self):
        np.testing.assert_allclose(helmert_transform(np.full((2, 10), 5.0)), 0.0, atol=1e-12)

    def test_preserves_demeaned_inner_products(self):
        rng = np.random.Generator(np.random.Philox(2))
        x, y = rng.normal(size=(2, 25))
        zx, zy = helmert_transform(x), helmert_transform(y)
        assert zx @ zy == pytest.approx((x - x.mean()) @ (y - y.mean()), rel=1e-10)

    def test_first_element(self):
        z = helmert_transform(np.array([1.0, 2.0, 3.0]))
        assert z[0] == pytest.approx(np.sqrt(2 / 3) * (1.0 - 2.5))
        assert z.shape == (2,)


class TestFitNetwork:
    """Two-step GMM"""

    def test_recovers_rho(self, knn_weights):
        sim = simulate_network_paths(
            np.full(6, -6.0), 0.4, np.full(6, 0.25), knn_weights, 6000, spec=InnovationSpec(seed=5)
        )
        fit = fit_network_logarch(log_squared(sim.panel), knn_weights)
        assert fit.rho == pytest.approx(0.4, abs=0.1)
        np.testing.assert_allclose(fit.gamma_diag, 0.25, atol=0.12)
        assert fit.rho_se > 0
        assert fit.j_stat >= 0
        assert fit.provenance == 'two-step GMM, forward orthogonal deviations'

    def test_fit_shapes(self, network_volpanel, knn_weights):
        fit = fit_network_logarch(network_volpanel, knn_weights)
        assert isinstance(fit, NetworkFit)
        assert fit.gamma_diag.shape == (6,)
        assert fit.residual_panel.shape == (6, network_volpanel.T - 1)
        assert fit.instrument_depth == 2
        assert fit.normalization == 'row_normalized'
        assert not fit.rho_fixed

    def test_residual_identity(self, network_volpanel, knn_weights):
        fit = fit_network_logarch(network_volpanel, knn_weights)
        Y = network_volpanel.values
        rebuilt = (
            fit.phi0[:, None] + fit.rho * knn_weights.weights @ Y[:, 1:]
            + fit.gamma_diag[:, None] * Y[:, :-1] + fit.residual_panel
        )
        np.testing.assert_allclose(rebuilt, Y[:, 1:], atol=1e-10)
        np.testing.assert_allclose(fit.residual_panel.mean(axis=1), 0.0, atol=1e-10)

    def test_rho_fixed_at_zero_matches_univariate(self, network_volpanel, knn_weights):
        fit = fit_network_logarch(network_volpanel, knn_weights, rho_fixed=0.0)
        fits = fit_panel(network_volpanel)
        np.testing.assert_allclose(fit.gamma_diag, [f.gamma[0] for f in fits], atol=1e-8)
        np.testing.assert_allclose(fit.phi0, [f.phi0 for f in fits], atol=1e-8)
        np.testing.assert_allclose(fit.mu_star, [f.mu_star for f in fits], atol=1e-8)
        network = forecast_network_one_step(fit, knn_weights, network_volpanel.values[:, -1])
        np.testing.assert_allclose(network, forecast_panel(fits, network_volpanel), atol=1e-8)
        assert fit.rho_fixed
        assert np.isnan(fit.rho_se)

    def test_objective_minimized_at_estimate(self, network_volpanel, knn_weights):
        estimator = NetworkGMM(network_volpanel, knn_weights)
        fit = estimator.fit()
        best = estimator.objective(fit.rho, fit.gamma_diag)
        assert best == pytest.approx(fit.j_stat)
        assert estimator.objective(fit.rho + 0.05, fit.gamma_diag) > best
        assert estimator.objective(fit.rho, fit.gamma_diag - 0.05) > best

    def test_objective_at_estimate_not_above_truth(self, network_volpanel, knn_weights):
        # network_panel is simulated with rho=0.3, gamma=0.2
        estimator = NetworkGMM(network_volpanel, knn_weights)
        fit = estimator.fit()
        assert estimator.objective(fit.rho, fit.gamma_diag) <= estimator.objective(0.3, np.full(6, 0.2))

    def test_objective_before_fit(self, network_volpanel, knn_weights):
        with pytest.raises(InvalidParameter):
            NetworkGMM(network_volpanel, knn_weights).objective(0.0, np.zeros(6))

    def test_size_mismatch(self, network_volpanel):
        w = EdgeWeightMatrix([[0.0, 1.0], [1.0, 0.0]], 'knn', 'row_normalized', k=1)
        with pytest.raises(InvalidParameter):
            fit_network_logarch(network_volpanel, w)

    def test_collinear_instruments(self, knn_weights):
        # identical stocks make W Y_{t-1} and the own lags collinear
        row = np.log(np.linspace(1.0, 2.0, 60) ** 2 + np.sin(np.arange(60)) ** 2)
        values = np.tile(row, (6, 1))
        volpanel = LogVolPanel(
            knn_weights.tickers, [f"d{i:03d}" for i in range(60)], values, np.ones(6), ZeroPolicy()
        )
        with pytest.raises(SingularMoment):
            fit_network_logarch(volpanel, knn_weights)


class TestForecastNetwork:
    def test_solves_linear_system(self, network_volpanel, knn_weights):
        fit = fit_network_logarch(network_volpanel, knn_weights)
        last = network_volpanel.values[:, -1]
        forecast = forecast_network_one_step(fit, knn_weights, last)
        system = np.eye(6) - fit.rho * knn_weights.weights
        residual = system @ forecast - (fit.gamma_diag * last + fit.phi0 - fit.mu_star)
        assert np.max(np.abs(residual)) <= 1e-10

    def test_two_stock_example(self):
        w = EdgeWeightMatrix([[0.0, 1.0], [1.0, 0.0]], 'knn', 'row_normalized', k=1)
        fit = NetworkFit(
            rho=0.5, gamma_diag=np.zeros(2), phi0=[1.0, 3.0], mu_star=np.zeros(2),
            residual_panel=np.zeros((2, 3)), w_ref='x', normalization='row_normalized', instrument_depth=2,
        )
        forecast = forecast_network_one_step(fit, w, [-9.0, -7.0])
        np.testing.assert_allclose(forecast, [10 / 3, 14 / 3], atol=1e-12)

    def test_unstable_rho(self, network_volpanel, knn_weights):
        fit = fit_network_logarch(network_volpanel, knn_weights)
        unstable = NetworkFit(
            rho=1.2, gamma_diag=fit.gamma_diag, phi0=fit.phi0, mu_star=fit.mu_star,
            residual_panel=fit.residual_panel, w_ref='x', normalization='raw', instrument_depth=2,
        )
        with pytest.raises(UnstableRho):
            forecast_network_one_step(unstable, knn_weights, network_volpanel.values[:, -1])

    def test_raw_weights_limit(self, network_volpanel):
        raw = EdgeWeightMatrix(2.0 * (1 - np.eye(6)), 'inverse_distance', 'raw')
        fit = fit_network_logarch(network_volpanel, raw, rho_fixed=0.0)
        moved = NetworkFit(
            rho=0.15, gamma_diag=fit.gamma_diag, phi0=fit.phi0, mu_star=fit.mu_star,
            residual_panel=fit.residual_panel, w_ref='x', normalization='raw', instrument_depth=0,
        )
        # spectral radius of raw is 10, so |rho| must stay below 0.1
        with pytest.raises(UnstableRho):
            forecast_network_one_step(moved, raw, network_volpanel.values[:, -1])

    def test_wrong_length(self, network_volpanel, knn_weights):
        fit = fit_network_logarch(network_volpanel, knn_weights)
        with pytest.raises(InvalidParameter):
            forecast_network_one_step(fit, knn_weights, np.zeros(5))
