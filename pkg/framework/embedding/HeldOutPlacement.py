"""
Out-of-sample placement of held-out nodes against a fixed embedding

Held-out nodes take no part in graph construction or embedding. Afterwards
each one is linked to its k nearest embedded rows, gets fluid-graph
distances to every embedded node through those links, and is placed by
minimizing its own distortion terms while the embedding stays fixed.
"""
from typing import List

import numpy as np

from config.RunConfig import GraphConfig
from framework.dataset.NeighborhoodBuilder import maskedDistanceMatrix
from framework.embedding.SoftManifoldEmbedder import projectRows
from framework.fluidgraph.FluidGraphBuilder import edgeProbabilities
from framework.models.DatasetModels import FeatureMatrix, Neighborhoods
from framework.models.EmbeddingModels import EmbeddingState
from framework.models.GraphModels import FluidGraph
from framework.softmanifold.SoftManifoldGeometry import semimetricDistance, semimetricGradient
from logs.logger import get_logger
from utils.constants import HOLDOUT_PLACEMENT_STEPS, STEP_GROWTH, STEP_SHRINK

logger = get_logger(__name__)


def heldOutNeighbors(distances: np.ndarray, node: int, embeddedRows: np.ndarray, k: int) -> List[int]:
    """
    The k embedded rows nearest to a held-out node, ties by row index

    A node sharing no observed feature with any embedded row is linked to the
    first embedded row.
    """
    row = distances[node, embeddedRows]
    finite = np.flatnonzero(np.isfinite(row))
    if finite.size == 0:
        logger.warning(f"Held-out node {node} shares no observed feature with any embedded node; "
                       f"linked to node {int(embeddedRows[0])}")
        return [int(embeddedRows[0])]
    ordered = finite[np.lexsort((embeddedRows[finite], row[finite]))]
    return [int(embeddedRows[local]) for local in ordered[:k]]


def heldOutDistances(fm: FeatureMatrix, embeddedRows: np.ndarray, heldOut: np.ndarray, fg: FluidGraph,
                     graphConfig: GraphConfig) -> np.ndarray:
    """
    Squared graph distances from every held-out node to every embedded node

    A held-out node reaches the embedded graph only through its own edges:
    d(h, t) = min over neighbors j of (|h j| + d_G(j, t)), with neighbors kept
    at their direct edge length.

    Args:
        fm: Feature matrix over all rows (embedded and held out)
        embeddedRows: Rows of fm that fg was built on, in fg's node order
        heldOut: Rows of fm to place
        fg: Fluid graph of the embedded rows
        graphConfig: Graph settings used to build fg

    Returns:
        np.ndarray: len(heldOut) x len(embeddedRows) squared distances, inf when unreachable
    """
    embeddedRows = np.asarray(embeddedRows, dtype=int)
    local = {int(row): index for index, row in enumerate(embeddedRows)}
    distances = maskedDistanceMatrix(fm)
    adjacency = {int(h): heldOutNeighbors(distances, int(h), embeddedRows, graphConfig.k) for h in heldOut}
    p = edgeProbabilities(fm, Neighborhoods(adjacency=adjacency, k=graphConfig.k), graphConfig, distances)

    graphLengths = np.sqrt(fg.d_g_sq)
    result = np.empty((len(heldOut), embeddedRows.size))
    for position, h in enumerate(heldOut):
        neighbors = [local[j] for j in adjacency[int(h)]]
        edgeLengths = np.sqrt([fg.transform.apply(p[(int(h), j)]) for j in adjacency[int(h)]])
        lengths = np.min(edgeLengths[:, None] + graphLengths[neighbors], axis=0)
        lengths[neighbors] = edgeLengths
        result[position] = lengths ** 2
    return result


def placeNode(anchors: np.ndarray, targetsSq: np.ndarray, start: np.ndarray, epsD: float, lr: float,
              steps: int = HOLDOUT_PLACEMENT_STEPS) -> np.ndarray:
    """
    Minimize sum | d_S(u, anchor)^2 / (target + eps_d) - 1 | over one free point u

    Steps that raise the loss are undone and the step size halved.

    Args:
        anchors: M x dim fixed positions
        targetsSq: Squared target distance per anchor (already scaled)
        start: Starting point
        epsD: Distortion smoothing
        lr: Largest step size
        steps: Iterations

    Returns:
        np.ndarray: Placed point
    """
    scale = targetsSq + epsD

    def loss(u: np.ndarray) -> float:
        return float(np.sum(np.abs(semimetricDistance(u, anchors) ** 2 / scale - 1.0)))

    point = projectRows(np.asarray(start, dtype=float)[None, :])[0]
    current = loss(point)
    step = lr
    for _ in range(steps):
        distance = semimetricDistance(point, anchors)
        outer = np.sign(distance ** 2 / scale - 1.0) * 2.0 * distance / scale
        gradFirst, _ = semimetricGradient(np.broadcast_to(point, anchors.shape), anchors)
        gradient = np.sum(outer[:, None] * gradFirst, axis=0)
        if not np.all(np.isfinite(gradient)) or not np.any(gradient):
            break
        candidate = projectRows((point - step * gradient)[None, :])[0]
        candidateLoss = loss(candidate)
        if candidateLoss <= current:
            point, current = candidate, candidateLoss
            step = min(lr, step * STEP_GROWTH)
        else:
            step *= STEP_SHRINK
    return point


def placeHeldOutNodes(fm: FeatureMatrix, embeddedRows: np.ndarray, heldOut: np.ndarray, state: EmbeddingState,
                      fg: FluidGraph, graphConfig: GraphConfig) -> np.ndarray:
    """
    Positions for held-out rows against a fixed embedding

    Each node starts at the mean position of its embedded neighbors and then
    fits its scaled graph distances to every reachable embedded node.

    Returns:
        np.ndarray: len(heldOut) x dim positions inside the ball
    """
    embeddedRows = np.asarray(embeddedRows, dtype=int)
    heldOut = np.asarray(heldOut, dtype=int)
    if heldOut.size == 0:
        return np.zeros((0, state.dim))

    targetsSq = state.graph_scale ** 2 * heldOutDistances(fm, embeddedRows, heldOut, fg, graphConfig)
    placed = np.empty((heldOut.size, state.dim))
    for position in range(heldOut.size):
        reachable = np.isfinite(targetsSq[position])
        nearest = np.argsort(targetsSq[position], kind='stable')[:graphConfig.k]
        start = state.positions[nearest].mean(axis=0)
        placed[position] = placeNode(state.positions[reachable], targetsSq[position, reachable], start,
                                     state.config.eps_d, state.config.lr)
    logger.info(f"Placed {heldOut.size} held-out nodes against {embeddedRows.size} embedded nodes")
    return placed
