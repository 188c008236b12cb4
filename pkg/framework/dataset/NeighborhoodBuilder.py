"""
k-nearest-neighbor graphs over partially observed feature rows

Distances only use features observed at both rows and are normalized by
the overlap count, so a pair sharing few features is not favored over a
pair sharing many. Pairs with no overlap are infinitely far apart.
"""
import numpy as np

from framework.models.DatasetModels import FeatureMatrix, Neighborhoods
from logs.logger import get_logger

logger = get_logger(__name__)

# rows x nodes x features cells evaluated per block
_BLOCK_CELLS = 2_000_000


def maskedDistanceMatrix(fm: FeatureMatrix) -> np.ndarray:
    """
    Overlap-normalized Euclidean distances between all rows

    Args:
        fm: Feature matrix

    Returns:
        np.ndarray: N x N matrix, sqrt(sum of squared mutual differences / overlap),
            +inf where two rows share no observed feature
    """
    values = np.where(fm.observed, fm.values, 0.0)
    observed = fm.observed.astype(float)
    n = fm.n_nodes
    distances = np.empty((n, n), dtype=float)
    blockRows = max(1, _BLOCK_CELLS // max(1, n * fm.n_features))

    for start in range(0, n, blockRows):
        stop = min(n, start + blockRows)
        mutual = observed[start:stop, None, :] * observed[None, :, :]
        diff = values[start:stop, None, :] - values[None, :, :]
        sumSq = np.sum(mutual * diff * diff, axis=2)
        overlap = mutual.sum(axis=2)
        with np.errstate(divide='ignore', invalid='ignore'):
            block = np.sqrt(sumSq / overlap)
        block[overlap == 0] = np.inf
        distances[start:stop] = block

    np.fill_diagonal(distances, 0.0)
    return distances


def knnNeighborhoods(fm: FeatureMatrix, k: int) -> Neighborhoods:
    """
    Build N(i) as the k nearest rows under the masked distance

    Ties are broken by node index. A node with fewer than k finite-distance
    peers keeps only those (warning); a node with none is linked to the
    lowest-index other node so that every neighborhood is non-empty.

    Args:
        fm: Feature matrix
        k: Neighborhood size, 1 <= k < N

    Returns:
        Neighborhoods: Ordered neighbor lists
    """
    n = fm.n_nodes
    if not 1 <= k < n:
        raise ValueError(f"k must satisfy 1 <= k < N (k={k}, N={n})")

    distances = maskedDistanceMatrix(fm)
    indices = np.arange(n)
    adjacency = {}
    truncated = []

    for i in range(n):
        row = distances[i]
        candidates = indices[(indices != i) & np.isfinite(row)]
        ordered = candidates[np.lexsort((candidates, row[candidates]))]
        if ordered.size < k:
            truncated.append(i)
            if ordered.size == 0:
                ordered = indices[indices != i][:1]
                logger.warning(f"Node {i} shares no observed feature with any node; "
                               f"linked to node {int(ordered[0])}")
            else:
                logger.warning(f"Node {i} has only {ordered.size} finite-distance peers; "
                               f"neighborhood truncated below k={k}")
        adjacency[i] = [int(j) for j in ordered[:k]]

    return Neighborhoods(adjacency=adjacency, k=k, truncated=truncated)
