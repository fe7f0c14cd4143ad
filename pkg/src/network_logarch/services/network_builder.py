"""
Network Builder
Pairwise dissimilarities between stocks and the edge weight matrices built
from them: 3 distances x (inverse distance, k-nearest neighbours).
"""

import logging
from typing import Optional, Sequence

import networkx as nx
import numpy as np
import pandas as pd
from scipy.spatial.distance import pdist, squareform

from network_logarch.core.errors import (
    BadK,
    CoincidentSeries,
    DegenerateSeries,
    InsufficientObservations,
    InvalidParameter,
    SingularDesign,
    SingularRegression,
)
from network_logarch.core.types import DistanceMatrix, EdgeWeightMatrix, LogVolPanel, ReturnPanel
from network_logarch.services.univariate import select_ar_order
from network_logarch.utils.data_loader import log_squared

logger = logging.getLogger(__name__)

# Constants
DISTANCES = ('euclidean', 'correlation', 'logarch')
WEIGHTINGS = ('invdist', 'knn')
MIN_OBS_PER_COEFFICIENT: int = 10


def dist_euclidean(panel: ReturnPanel) -> DistanceMatrix:
    """d_ij = sqrt(sum_t (y_t(s_i) - y_t(s_j))^2)"""
    d = squareform(pdist(panel.returns, metric='euclidean'))
    return DistanceMatrix(d, 'euclidean', panel.tickers)


def dist_correlation(panel: ReturnPanel) -> DistanceMatrix:
    """
    d_ij = sqrt(2 (1 - rho_ij)) with rho_ij the Pearson correlation

    Raises:
        DegenerateSeries: If some stock has zero sample variance
    """
    constant = [t for t, row in zip(panel.tickers, panel.returns) if np.ptp(row) == 0]
    if constant:
        raise DegenerateSeries(f"Constant return series: {', '.join(constant)}")
    one_minus_rho = np.clip(pdist(panel.returns, metric='correlation'), 0.0, 2.0)
    return DistanceMatrix(squareform(np.sqrt(2.0 * one_minus_rho)), 'correlation', panel.tickers)


def dist_logarch(volpanel: LogVolPanel, max_order: int = 5, criterion: str = 'bic') -> DistanceMatrix:
    """
    AR-coefficient distance on the ln Y^2 series

    Each stock gets an AR(P_i) with P_i chosen by the criterion over
    1..max_order. Coefficient vectors are zero-padded to a common length,
    which equals padding each pair to max(P_i, P_j).

    Raises:
        InsufficientObservations: If T - max_order < 10 * max_order
        SingularRegression: If some AR design is rank deficient
    """
    if max_order < 1:
        raise InvalidParameter(f"max_order must be positive, got {max_order}")
    if volpanel.T - max_order < MIN_OBS_PER_COEFFICIENT * max_order:
        raise InsufficientObservations(
            f"{volpanel.T} observations are too few for AR orders up to {max_order}"
        )
    coefficients = np.zeros((volpanel.n, max_order))
    orders = {}
    for i, (ticker, row) in enumerate(zip(volpanel.tickers, volpanel.values)):
        try:
            order, fit = select_ar_order(row, max_order, criterion)
        except SingularDesign as e:
            raise SingularRegression(f"AR regression for {ticker} is rank deficient") from e
        coefficients[i, :order] = fit.gamma
        orders[ticker] = order
    logger.debug("Selected AR orders: %s", orders)
    d = squareform(pdist(coefficients, metric='euclidean'))
    return DistanceMatrix(d, 'logarch_ar', volpanel.tickers, orders)


def weights_inverse_distance(d: DistanceMatrix, normalize: bool = True) -> EdgeWeightMatrix:
    """
    w_ij = 1 / d_ij off the diagonal, optionally divided by the row sum

    Raises:
        CoincidentSeries: If two distinct stocks are at distance zero
    """
    n = d.d.shape[0]
    off_diagonal = ~np.eye(n, dtype=bool)
    coincident = np.argwhere((d.d == 0) & off_diagonal)
    if coincident.size:
        i, j = coincident[0]
        raise CoincidentSeries(f"Stocks {d.tickers[i]} and {d.tickers[j]} are at distance zero")
    w = np.zeros((n, n))
    w[off_diagonal] = 1.0 / d.d[off_diagonal]
    if normalize:
        w = w / w.sum(axis=1, keepdims=True)
    return EdgeWeightMatrix(
        w, 'inverse_distance', 'row_normalized' if normalize else 'raw', tickers=d.tickers
    )


def weights_knn(d: DistanceMatrix, k: int) -> EdgeWeightMatrix:
    """
    w_ij = 1/k if s_j is among the k nearest neighbours of s_i

    Ties in distance go to the alphabetically smaller ticker, so the
    result does not depend on column order. The matrix is generally asymmetric.

    Raises:
        BadK: If k is outside 1..n-1
    """
    n = d.d.shape[0]
    if not isinstance(k, (int, np.integer)) or not 1 <= k <= n - 1:
        raise BadK(f"k must be in 1..{n - 1}, got {k}")
    ticker_rank = np.argsort(np.argsort(np.asarray(d.tickers, dtype=str)))
    w = np.zeros((n, n))
    for i in range(n):
        order = np.lexsort((ticker_rank, d.d[i]))
        neighbours = order[order != i][:k]
        w[i, neighbours] = 1.0 / k
    return EdgeWeightMatrix(w, 'knn', 'row_normalized', k=int(k), tickers=d.tickers)


def compute_distance(
    panel: ReturnPanel,
    distance: str,
    volpanel: Optional[LogVolPanel] = None,
    max_order: int = 5,
    criterion: str = 'bic',
) -> DistanceMatrix:
    """
    Dissimilarity matrix by name: 'euclidean', 'correlation' or 'logarch'

    The AR distance works on ln Y^2; volpanel is derived from panel when omitted.
    """
    if distance not in DISTANCES:
        raise InvalidParameter(f"distance must be one of {DISTANCES}, got {distance!r}")
    if distance == 'euclidean':
        return dist_euclidean(panel)
    if distance == 'correlation':
        return dist_correlation(panel)
    return dist_logarch(volpanel or log_squared(panel), max_order, criterion)


def weights_from_distance(
    d: DistanceMatrix, weighting: str, k: Optional[int] = None, normalize: bool = True
) -> EdgeWeightMatrix:
    """Edge weights by name: 'invdist' or 'knn'"""
    if weighting not in WEIGHTINGS:
        raise InvalidParameter(f"weighting must be one of {WEIGHTINGS}, got {weighting!r}")
    if weighting == 'knn':
        if k is None:
            raise BadK("knn weighting needs k")
        return weights_knn(d, k)
    return weights_inverse_distance(d, normalize)


def build_edge_weights(
    panel: ReturnPanel,
    distance: str,
    weighting: str,
    k: Optional[int] = None,
    normalize: bool = True,
    volpanel: Optional[LogVolPanel] = None,
    max_order: int = 5,
    criterion: str = 'bic',
) -> EdgeWeightMatrix:
    """
    Build W from a return panel for one of the twelve network configurations

    Args:
        panel: Returns used to measure similarity (the estimation window)
        distance: 'euclidean', 'correlation' or 'logarch'
        weighting: 'invdist' or 'knn'
        k: neighbour count for knn
        normalize: row-normalize inverse-distance weights
        volpanel: ln Y^2 panel for the AR distance
    """
    d = compute_distance(panel, distance, volpanel, max_order, criterion)
    return weights_from_distance(d, weighting, k, normalize)


def export_graph(w: EdgeWeightMatrix, tickers: Optional[Sequence[str]] = None) -> str:
    """GraphML text of the directed weighted graph; an edge exists iff w_ij > 0"""
    if tickers is None:
        tickers = w.tickers or range(w.n)
    labels = list(tickers)
    graph = nx.DiGraph(kind=w.kind, normalization=w.normalization)
    graph.add_nodes_from(str(label) for label in labels)
    for i, j in zip(*np.nonzero(w.weights)):
        graph.add_edge(str(labels[i]), str(labels[j]), weight=float(w.weights[i, j]))
    return '\n'.join(nx.generate_graphml(graph))


def distance_to_csv(d: DistanceMatrix) -> str:
    """CSV dump with tickers as header and index"""
    frame = pd.DataFrame(d.d, index=list(d.tickers), columns=list(d.tickers))
    frame.index.name = 'ticker'
    return frame.to_csv()
