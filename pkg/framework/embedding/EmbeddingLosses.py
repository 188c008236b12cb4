"""
Distortion and geometry losses of the soft-manifold embedding

    L   = L_d + kappa * L_g
    L_d = sum over pairs | d_S(u_i, u_j)^2 / (s^2 d_G(i, j)^2 + eps_d) - 1 |
    L_g = sum over nodes | A_manifold(i) / (A_graph(i) + eps_g) - 1 |

s is the graph scale of the embedding (1 reproduces d_G itself). Connected
components share no pair and no neighborhood, and each measures phi* on its
own nodes, so L splits into independent per-component sums.

SoftManifoldObjective precomputes the pair and neighborhood index arrays
once per graph, so every loss accepts positions stacked along leading axes
(shape (..., N, dim)). Finite-difference gradients use that to evaluate all
perturbed copies in one vectorized call.
"""
from typing import Callable, Optional, Tuple, Union

import numpy as np

from config.RunConfig import EmbedConfig
from config.SoftManifoldEnums import PairScope
from framework.embedding.NeighborhoodAreas import graphNeighborhoodArea, maxSectorArea, orderedNeighbors
from framework.models.EmbeddingModels import EmbeddingState, LossRecord
from framework.models.GraphModels import FluidGraph
from framework.softmanifold.SoftManifoldGeometry import pairwiseSemimetric, semimetricDistance, semimetricGradient
from utils.constants import PHI_STAR_FLOOR

# perturbed-copy x evaluated-term cells per finite-difference block
_FD_BLOCK_CELLS = 4_000_000

PhiStarLike = Union[float, np.ndarray]


def phiStar(positions: np.ndarray) -> float:
    """Largest pairwise semimetric distance, clamped into (0, pi]"""
    if positions.shape[0] < 2:
        return np.pi
    largest = float(pairwiseSemimetric(positions).max())
    return float(np.clip(largest, PHI_STAR_FLOOR, np.pi))


class SoftManifoldObjective:
    """Loss terms and gradients for one fluid graph and one set of hyperparameters"""

    def __init__(self, fg: FluidGraph, cfg: EmbedConfig, scale: float = 1.0):
        if not scale > 0.0:
            raise ValueError(f"graph scale must be positive, got {scale}")
        self.fg = fg
        self.cfg = cfg
        self.scale = float(scale)
        self.nNodes = fg.n_nodes
        self.components = fg.componentLabels()
        self.nComponents = int(self.components.max()) + 1 if self.nNodes else 0
        self._buildPairs()
        self._buildSlots()

    def _buildPairs(self) -> None:
        if self.cfg.pair_scope is PairScope.NEIGHBORS:
            pairs = sorted({(min(i, j), max(i, j)) for i, j in self.fg.nbhd.edges()})
            first = np.array([i for i, _ in pairs], dtype=int)
            second = np.array([j for _, j in pairs], dtype=int)
        else:
            first, second = np.triu_indices(self.nNodes, k=1)
        finite = np.isfinite(self.fg.d_g_sq[first, second])
        self.pairFirst = first[finite]
        self.pairSecond = second[finite]
        self.targets = self.scale ** 2 * self.fg.d_g_sq[self.pairFirst, self.pairSecond]
        self.pairComponent = self.components[self.pairFirst]

    def _buildSlots(self) -> None:
        nodes, first, second, theta = [], [], [], []
        graphArea = np.zeros(self.nNodes)
        spreading = np.zeros(self.nNodes, dtype=bool)
        for i in range(self.nNodes):
            neighbors = orderedNeighbors(i, self.fg)
            if len(neighbors) < 2:
                continue
            spreading[i] = True
            graphArea[i] = graphNeighborhoodArea(i, self.fg)
            for position, j in enumerate(neighbors):
                nodes.append(i)
                first.append(j)
                second.append(neighbors[(position + 1) % len(neighbors)])
                theta.append(2.0 * np.pi / len(neighbors))

        self.slotNode = np.array(nodes, dtype=int)
        self.slotFirst = np.array(first, dtype=int)
        self.slotSecond = np.array(second, dtype=int)
        self.slotTheta = np.array(theta, dtype=float)
        self.graphArea = graphArea
        self.spreading = spreading
        self.constantGeometry = float(self.nNodes - spreading.sum())
        self.incidence = np.zeros((len(nodes), self.nNodes))
        self.incidence[np.arange(len(nodes)), self.slotNode] = 1.0

    @property
    def nPairs(self) -> int:
        return int(self.pairFirst.size)

    def distortionTerms(self, positions: np.ndarray, pairMask: Optional[np.ndarray] = None) -> np.ndarray:
        """Per-pair |ratio - 1| for stacked positions, shape (..., pairs)"""
        first, second, targets = self.pairFirst, self.pairSecond, self.targets
        if pairMask is not None:
            first, second, targets = first[pairMask], second[pairMask], targets[pairMask]
        distance = semimetricDistance(positions[..., first, :], positions[..., second, :])
        ratio = distance ** 2 / (targets + self.cfg.eps_d)
        return np.abs(ratio - 1.0)

    def distortion(self, positions: np.ndarray, pairMask: Optional[np.ndarray] = None) -> np.ndarray:
        """L_d for stacked positions (..., N, dim); pairMask selects a mini-batch"""
        return np.sum(self.distortionTerms(positions, pairMask), axis=-1)

    def componentPhiStar(self, positions: np.ndarray) -> np.ndarray:
        """phi* of every connected component, measured on that component's nodes only"""
        values = np.full(self.nComponents, np.pi)
        if self.nComponents == 1:
            values[0] = phiStar(positions)
            return values
        distances = pairwiseSemimetric(positions)
        for component in range(self.nComponents):
            members = np.flatnonzero(self.components == component)
            if members.size >= 2:
                largest = float(distances[np.ix_(members, members)].max())
                values[component] = np.clip(largest, PHI_STAR_FLOOR, np.pi)
        return values

    def _capAreas(self, phiStarValue: PhiStarLike) -> PhiStarLike:
        phi = np.asarray(phiStarValue, dtype=float)
        if phi.ndim == 0:
            return maxSectorArea(float(phi))
        return maxSectorArea(phi)[self.components]

    def manifoldAreas(self, positions: np.ndarray, phiStarValue: PhiStarLike) -> np.ndarray:
        """
        Normalized sector areas per node, shape (..., N); 0 for single-neighbor nodes

        phiStarValue is one angle for every node or one per connected component.
        """
        centre = positions[..., self.slotNode, :]
        polarFirst = np.clip(semimetricDistance(centre, positions[..., self.slotFirst, :]), 0.0, np.pi)
        polarSecond = np.clip(semimetricDistance(centre, positions[..., self.slotSecond, :]), 0.0, np.pi)
        sectors = self.slotTheta * np.abs(np.cos(polarFirst) - np.cos(polarSecond))
        return (sectors @ self.incidence) / self._capAreas(phiStarValue)

    def geometryTerms(self, positions: np.ndarray, phiStarValue: Optional[PhiStarLike] = None) -> np.ndarray:
        """Per-node L_g terms, shape (..., N); phi* defaults to the per-component value at `positions`"""
        if phiStarValue is None:
            phiStarValue = self.componentPhiStar(positions)
        areas = self.manifoldAreas(positions, phiStarValue)
        terms = np.abs(areas / (self.graphArea + self.cfg.eps_g) - 1.0)
        # single-neighbor nodes contribute the constant |0 / (0 + eps_g) - 1| = 1
        return np.where(self.spreading, terms, 1.0)

    def geometry(self, positions: np.ndarray, phiStarValue: Optional[PhiStarLike] = None) -> np.ndarray:
        """L_g for stacked positions; phi* defaults to the value at `positions` (2-D only)"""
        return np.sum(self.geometryTerms(positions, phiStarValue), axis=-1)

    def componentLosses(self, positions: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """L_d and L_g split by connected component, two arrays of length nComponents"""
        lossD = np.bincount(self.pairComponent, weights=self.distortionTerms(positions),
                            minlength=self.nComponents)
        lossG = np.bincount(self.components, weights=self.geometryTerms(positions),
                            minlength=self.nComponents)
        return lossD, lossG

    def record(self, epoch: int, lossD: np.ndarray, lossG: np.ndarray) -> LossRecord:
        """Trace entry from per-component losses"""
        totalD, totalG = float(np.sum(lossD)), float(np.sum(lossG))
        return LossRecord(epoch=epoch, loss_distortion=totalD, loss_geometry=totalG,
                          loss_total=totalD + self.cfg.kappa * totalG)

    def lossRecord(self, positions: np.ndarray, epoch: int) -> LossRecord:
        return self.record(epoch, *self.componentLosses(positions))

    def distortionGradient(self, positions: np.ndarray, pairMask: Optional[np.ndarray] = None) -> np.ndarray:
        """Analytic gradient of L_d with respect to every position"""
        first, second, targets = self.pairFirst, self.pairSecond, self.targets
        if pairMask is not None:
            first, second, targets = first[pairMask], second[pairMask], targets[pairMask]
        u1, u2 = positions[first], positions[second]
        distance = semimetricDistance(u1, u2)
        scale = targets + self.cfg.eps_d
        outer = np.sign(distance ** 2 / scale - 1.0) * 2.0 * distance / scale
        grad1, grad2 = semimetricGradient(u1, u2)

        gradient = np.zeros_like(positions)
        np.add.at(gradient, first, outer[:, None] * grad1)
        np.add.at(gradient, second, outer[:, None] * grad2)
        return gradient

    def finiteDifferenceGradient(self, loss: Callable[[np.ndarray], np.ndarray], positions: np.ndarray,
                                 step: float, termsPerCopy: int) -> np.ndarray:
        """
        Central-difference gradient of a stacked loss function

        Args:
            loss: Maps (B, N, dim) positions to (B,) losses
            positions: N x dim evaluation point
            step: Difference step h
            termsPerCopy: Work per copy, used to size the evaluation blocks

        Returns:
            np.ndarray: N x dim gradient
        """
        nNodes, dim = positions.shape
        coordinates = nNodes * dim
        block = max(1, _FD_BLOCK_CELLS // max(1, 2 * termsPerCopy * dim))
        gradient = np.zeros(coordinates)

        for start in range(0, coordinates, block):
            indices = np.arange(start, min(coordinates, start + block))
            copies = np.repeat(positions[None, :, :], 2 * indices.size, axis=0)
            flat = copies.reshape(copies.shape[0], -1)
            flat[np.arange(indices.size), indices] += step
            flat[indices.size + np.arange(indices.size), indices] -= step
            values = loss(copies)
            gradient[indices] = (values[:indices.size] - values[indices.size:]) / (2.0 * step)

        return gradient.reshape(nNodes, dim)

    def gradient(self, positions: np.ndarray, pairMask: Optional[np.ndarray] = None) -> np.ndarray:
        """
        Gradient of L = L_d + kappa L_g at `positions`

        phi* is held at its value at `positions` while differentiating L_g.
        """
        if self.cfg.analytic_gradients:
            gradient = self.distortionGradient(positions, pairMask)
        else:
            pairCount = self.nPairs if pairMask is None else int(pairMask.sum())
            gradient = self.finiteDifferenceGradient(
                lambda stacked: self.distortion(stacked, pairMask), positions, self.cfg.fd_step,
                max(1, pairCount)
            )

        if self.cfg.kappa > 0 and self.slotNode.size:
            phiStarValue = self.componentPhiStar(positions)
            gradient = gradient + self.cfg.kappa * self.finiteDifferenceGradient(
                lambda stacked: self.geometry(stacked, phiStarValue), positions, self.cfg.fd_step,
                self.slotNode.size + self.nNodes
            )
        return gradient


def lossDistortion(state: EmbeddingState, fg: FluidGraph) -> float:
    """L_d over every pair in scope for the state's configuration and graph scale"""
    return float(SoftManifoldObjective(fg, state.config, state.graph_scale).distortion(state.positions))


def lossGeometry(state: EmbeddingState, fg: FluidGraph, phiStarValue: Optional[PhiStarLike] = None) -> float:
    """L_g, with phi* measured per component on the state's positions unless given"""
    return float(SoftManifoldObjective(fg, state.config, state.graph_scale).geometry(state.positions, phiStarValue))


def totalLoss(state: EmbeddingState, fg: FluidGraph) -> float:
    """L_d + kappa * L_g"""
    objective = SoftManifoldObjective(fg, state.config, state.graph_scale)
    return objective.lossRecord(state.positions, state.epoch).loss_total
