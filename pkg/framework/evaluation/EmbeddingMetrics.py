"""
Embedding quality metrics: neighborhood mean average precision and average distortion
"""
from typing import Iterable, List, Optional, Tuple

import numpy as np

from framework.models.EmbeddingModels import EmbeddingState
from framework.models.EvaluationModels import EvalReport
from framework.models.GraphModels import FluidGraph
from framework.softmanifold.SoftManifoldGeometry import pairwiseSemimetric
from logs.logger import get_logger
from utils.constants import SUPPORTED_METRICS

logger = get_logger(__name__)


def perNodeAveragePrecision(positions: np.ndarray, fg: FluidGraph) -> List[float]:
    """
    Average precision of recovering N(i) from manifold distances, per node

    For neighbor j the retrieved set R_ij holds every node z != i with
    d_S(u_i, u_z) <= d_S(u_i, u_j), ties included.
    """
    distances = pairwiseSemimetric(positions)
    precisions = []
    for i in range(fg.n_nodes):
        neighbors = np.asarray(fg.nbhd.neighbors(i))
        others = np.ones(fg.n_nodes, dtype=bool)
        others[i] = False
        isNeighbor = np.zeros(fg.n_nodes, dtype=bool)
        isNeighbor[neighbors] = True

        row = distances[i]
        scores = []
        for j in neighbors:
            retrieved = others & (row <= row[j])
            scores.append(np.count_nonzero(retrieved & isNeighbor) / np.count_nonzero(retrieved))
        precisions.append(float(np.mean(scores)))
    return precisions


def meanAveragePrecision(state: EmbeddingState, fg: FluidGraph) -> float:
    """mAP over all nodes, in [0, 1]"""
    return float(np.mean(perNodeAveragePrecision(state.positions, fg)))


def distortionPairs(fg: FluidGraph) -> Tuple[np.ndarray, np.ndarray, int]:
    """Pairs i < j with a finite, positive graph distance, plus the number left out"""
    first, second = np.triu_indices(fg.n_nodes, k=1)
    graphDistSq = fg.d_g_sq[first, second]
    usable = np.isfinite(graphDistSq) & (graphDistSq > 0.0)
    return first[usable], second[usable], int(np.count_nonzero(~usable))


def averageDistortion(state: EmbeddingState, fg: FluidGraph) -> float:
    """
    Mean of |1 - d_S / (s d_G)| over node pairs, s being the state's graph scale

    Pairs at zero or infinite graph distance are left out with a warning and
    the mean is taken over the remaining pairs.
    """
    value, _ = _averageDistortion(state.positions, fg, state.graph_scale)
    return value


def _averageDistortion(positions: np.ndarray, fg: FluidGraph, scale: float = 1.0) -> Tuple[float, int]:
    first, second, excluded = distortionPairs(fg)
    if excluded:
        logger.warning(f"Average distortion leaves out {excluded} pairs with zero or infinite graph distance")
    if first.size == 0:
        return float('nan'), excluded
    manifold = pairwiseSemimetric(positions)[first, second]
    graph = scale * np.sqrt(fg.d_g_sq[first, second])
    return float(np.mean(np.abs(1.0 - manifold / graph))), excluded


def evaluateEmbedding(state: EmbeddingState, fg: FluidGraph,
                      metrics: Optional[Iterable[str]] = None) -> EvalReport:
    """
    Compute the requested metrics

    Args:
        state: Embedding
        fg: Fluid graph the embedding was fitted to
        metrics: Subset of ("map", "ad"); all when None

    Returns:
        EvalReport: Metric values (nan for metrics not requested)
    """
    requested = list(SUPPORTED_METRICS if metrics is None else metrics)
    unknown = [name for name in requested if name not in SUPPORTED_METRICS]
    if unknown:
        raise ValueError(f"unknown metrics {unknown}; supported: {list(SUPPORTED_METRICS)}")
    if state.n_nodes != fg.n_nodes:
        raise ValueError(f"embedding has {state.n_nodes} nodes but the graph has {fg.n_nodes}")

    report = EvalReport(
        map_score=float('nan'),
        ad_score=float('nan'),
        config_echo={'metrics': requested, 'transform': str(fg.transform), 'dim': state.dim}
    )
    if 'map' in requested:
        report.per_node_ap = perNodeAveragePrecision(state.positions, fg)
        report.map_score = float(np.mean(report.per_node_ap))
    if 'ad' in requested:
        report.ad_score, report.excluded_pairs = _averageDistortion(state.positions, fg, state.graph_scale)
    return report
