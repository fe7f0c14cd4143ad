"""
Unit tests for distances, edge weights and graph export
"""

import networkx as nx
import numpy as np
import pytest

from network_logarch.core.errors import (
    BadK,
    CoincidentSeries,
    DegenerateSeries,
    InsufficientObservations,
    InvalidParameter,
)
from network_logarch.core.types import DistanceMatrix, ReturnPanel
from network_logarch.services.network_builder import (
    build_edge_weights,
    compute_distance,
    dist_correlation,
    dist_euclidean,
    dist_logarch,
    distance_to_csv,
    export_graph,
    weights_from_distance,
    weights_inverse_distance,
    weights_knn,
)
from network_logarch.utils.simulate import synthetic_dates


class TestDistances:
    """The three dissimilarity measures"""

    def test_euclidean(self, small_panel):
        d = dist_euclidean(small_panel)
        expected = np.sqrt(np.sum((small_panel.returns[0] - small_panel.returns[1]) ** 2))
        assert d.d[0, 1] == pytest.approx(expected)
        assert d.kind == 'euclidean'
        assert np.all(np.diag(d.d) == 0)

    def test_correlation(self, small_panel):
        d = dist_correlation(small_panel)
        rho = np.corrcoef(small_panel.returns)[0, 2]
        assert d.d[0, 2] == pytest.approx(np.sqrt(2 * (1 - rho)))
        assert np.all(d.d <= 2)

    def test_correlation_perfectly_correlated(self):
        panel = ReturnPanel(['A', 'B'], synthetic_dates(4), [[0.1, 0.2, -0.1, 0.0], [0.2, 0.4, -0.2, 0.0]])
        assert dist_correlation(panel).d[0, 1] == pytest.approx(0.0, abs=1e-7)

    def test_correlation_constant_series(self):
        panel = ReturnPanel(['A', 'B'], synthetic_dates(4), [[0.1, 0.1, 0.1, 0.1], [0.2, 0.4, -0.2, 0.0]])
        with pytest.raises(DegenerateSeries):
            dist_correlation(panel)

    def test_logarch_distance(self, network_volpanel):
        d = dist_logarch(network_volpanel, max_order=3)
        assert d.kind == 'logarch_ar'
        assert set(d.ar_orders) == set(network_volpanel.tickers)
        assert all(1 <= p <= 3 for p in d.ar_orders.values())
        np.testing.assert_allclose(d.d, d.d.T)

    def test_logarch_distance_needs_data(self, network_volpanel):
        from network_logarch.core.types import LogVolPanel

        short = LogVolPanel(
            network_volpanel.tickers, network_volpanel.dates[:50],
            network_volpanel.values[:, :50], network_volpanel.floors, network_volpanel.zero_policy,
        )
        with pytest.raises(InsufficientObservations):
            dist_logarch(short, max_order=5)

    def test_compute_distance_by_name(self, network_panel):
        assert compute_distance(network_panel, 'euclidean').kind == 'euclidean'
        assert compute_distance(network_panel, 'logarch', max_order=2).kind == 'logarch_ar'
        with pytest.raises(InvalidParameter):
            compute_distance(network_panel, 'manhattan')


class TestInverseDistance:
    def test_row_normalized(self, ring_distance):
        w = weights_inverse_distance(ring_distance)
        np.testing.assert_allclose(w.weights.sum(axis=1), 1.0, atol=1e-12)
        assert w.weights[0, 1] / w.weights[0, 2] == pytest.approx(2.0)
        assert w.normalization == 'row_normalized'

    def test_raw(self, ring_distance):
        w = weights_inverse_distance(ring_distance, normalize=False)
        assert w.weights[0, 3] == pytest.approx(1.0 / 3.0)
        assert w.normalization == 'raw'

    def test_coincident_stocks(self):
        d = DistanceMatrix([[0, 0, 1], [0, 0, 1], [1, 1, 0]], 'euclidean', ['A', 'B', 'C'])
        with pytest.raises(CoincidentSeries) as exc_info:
            weights_inverse_distance(d)
        assert 'A' in str(exc_info.value) and 'B' in str(exc_info.value)


class TestKnn:
    def test_neighbours(self, ring_distance):
        w = weights_knn(ring_distance, 2)
        assert np.flatnonzero(w.weights[0]).tolist() == [1, 2]
        assert np.all(w.weights[w.weights > 0] == 0.5)
        assert np.all(np.count_nonzero(w.weights, axis=1) == 2)

    def test_ties_broken_by_ticker_order(self, ring_distance):
        # stock 2 sees 1 and 3 at the same distance
        w = weights_knn(ring_distance, 1)
        assert np.flatnonzero(w.weights[2]).tolist() == [1]

    def test_ties_do_not_depend_on_column_order(self):
        d = np.array([[0.0, 1.0, 1.0], [1.0, 0.0, 2.0], [1.0, 2.0, 0.0]])
        w = weights_knn(DistanceMatrix(d, 'euclidean', ['ZZZ', 'MMM', 'AAA']), 1)
        assert w.weights[0, 2] == 1.0
        order = [2, 1, 0]
        reordered = weights_knn(DistanceMatrix(d[np.ix_(order, order)], 'euclidean', ['AAA', 'MMM', 'ZZZ']), 1)
        np.testing.assert_array_equal(reordered.weights, w.weights[np.ix_(order, order)])

    def test_asymmetric(self, ring_distance):
        w = weights_knn(ring_distance, 1)
        assert w.weights[0, 1] > 0
        assert w.weights[1, 0] > 0
        assert w.weights[2, 1] > 0 and w.weights[1, 2] == 0

    @pytest.mark.parametrize('k', [0, 6, 10, -1])
    def test_bad_k(self, ring_distance, k):
        with pytest.raises(BadK):
            weights_knn(ring_distance, k)

    def test_full_neighbourhood(self, ring_distance):
        w = weights_knn(ring_distance, 5)
        np.testing.assert_allclose(w.weights, (1 - np.eye(6)) / 5)


class TestWeightsByName:
    def test_knn_needs_k(self, ring_distance):
        with pytest.raises(BadK):
            weights_from_distance(ring_distance, 'knn')

    def test_unknown_weighting(self, ring_distance):
        with pytest.raises(InvalidParameter):
            weights_from_distance(ring_distance, 'gaussian')

    def test_build_edge_weights(self, network_panel):
        w = build_edge_weights(network_panel, 'correlation', 'knn', k=3)
        assert w.kind == 'knn'
        assert w.tickers == network_panel.tickers


class TestExport:
    def test_graphml(self, knn_weights):
        graph = nx.parse_graphml(export_graph(knn_weights))
        assert graph.is_directed()
        assert graph.number_of_nodes() == 6
        assert graph.number_of_edges() == 12
        assert graph['AAA']['BBB']['weight'] == pytest.approx(0.5)

    def test_distance_csv(self, ring_distance):
        text = distance_to_csv(ring_distance)
        lines = text.strip().splitlines()
        assert lines[0] == 'ticker,AAA,BBB,CCC,DDD,EEE,FFF'
        assert lines[1].startswith('AAA,0.0,1.0,2.0')

    def test_graphml_with_array_labels(self, knn_weights):
        labels = np.array(['S1', 'S2', 'S3', 'S4', 'S5', 'S6'])
        graph = nx.parse_graphml(export_graph(knn_weights, labels))
        assert sorted(graph.nodes) == sorted(labels.tolist())
        assert graph.number_of_edges() == 12
