"""
Gradient descent embedding of a fluid graph onto the soft manifold
"""
from typing import List, Optional

import numpy as np
from sklearn.decomposition import PCA
from sklearn.impute import SimpleImputer

from config.RunConfig import EmbedConfig
from config.SoftManifoldEnums import InitStrategy
from framework.embedding.ComponentLayout import ComponentLayout
from framework.embedding.EmbeddingLosses import SoftManifoldObjective
from framework.models.DatasetModels import ConductivityTensor, FeatureMatrix, Neighborhoods
from framework.models.EmbeddingModels import EmbeddingState
from framework.models.GraphModels import FluidGraph
from framework.models.ManifoldModels import ManifoldPoint
from logs.logger import get_logger
from utils.constants import MAX_BALL_RADIUS, RANDOM_BALL_RADIUS, STEP_GROWTH, STEP_SHRINK

logger = get_logger(__name__)


def projectToBall(u: np.ndarray, maxRadius: float = MAX_BALL_RADIUS) -> ManifoldPoint:
    """
    Radially pull a vector back inside the ball

    Args:
        u: Vector
        maxRadius: Largest allowed norm, in (0, 1)

    Returns:
        ManifoldPoint: u if |u| <= maxRadius, else u rescaled to norm maxRadius
    """
    return ManifoldPoint(projectRows(np.asarray(u, dtype=float)[None, :], maxRadius)[0])


def projectRows(positions: np.ndarray, maxRadius: float = MAX_BALL_RADIUS) -> np.ndarray:
    """projectToBall applied to every row of an N x dim array"""
    if not 0.0 < maxRadius < 1.0:
        raise ValueError(f"max_radius must lie in (0, 1), got {maxRadius}")
    norms = np.linalg.norm(positions, axis=1)
    outside = norms > maxRadius
    projected = positions.copy()
    projected[outside] *= (maxRadius / norms[outside])[:, None]
    return projected


class PairBatchSampler:
    """
    Mini-batch membership of every node pair, keyed by the pair's row ids

    Pair {a, b} joins the batch of an epoch when the draw of a Philox stream
    keyed by (seed, id_a, id_b) at counter `epoch` falls below
    batch_pairs / nPairs. The draws follow the rows, not their positions in
    the matrix, so renumbering the nodes leaves every batch unchanged.
    """

    def __init__(self, seed: int, rowIds: List[str], first: np.ndarray, second: np.ndarray, batchPairs: int):
        self.nPairs = int(first.size)
        self.enabled = 0 < batchPairs < self.nPairs
        self.fraction = batchPairs / self.nPairs if self.nPairs else 0.0
        self.keys = [self.pairKey(seed, rowIds[a], rowIds[b]) for a, b in zip(first, second)] if self.enabled else []

    @staticmethod
    def pairKey(seed: int, idA: str, idB: str) -> np.ndarray:
        """128-bit Philox key of an unordered pair of row ids"""
        entropy = [seed]
        for rowId in sorted((idA, idB)):
            raw = rowId.encode('utf-8')
            entropy += [len(raw), int.from_bytes(raw, 'little')]
        return np.random.SeedSequence(entropy).generate_state(2, np.uint64)

    def mask(self, epoch: int) -> Optional[np.ndarray]:
        """Pairs in the epoch's batch; None means every pair"""
        if not self.enabled:
            return None
        draws = np.fromiter(
            (np.random.Generator(np.random.Philox(key=key, counter=epoch)).random() for key in self.keys),
            dtype=float, count=self.nPairs
        )
        return draws < self.fraction


class SoftManifoldEmbedder:
    """Runs the embedding optimization for one EmbedConfig"""

    def __init__(self, cfg: EmbedConfig):
        self.cfg = cfg

    def layout(self, fm: FeatureMatrix, fg: FluidGraph) -> ComponentLayout:
        return ComponentLayout.build(fg.componentLabels(), fm.row_ids, self.cfg.dim)

    def graphScale(self, fg: FluidGraph, layout: ComponentLayout) -> float:
        """
        Factor s applied to graph distances

        A configured graph_scale wins. Otherwise the largest finite graph
        distance is mapped onto the reach of a component region, since the
        semimetric never exceeds sqrt(2).
        """
        if self.cfg.graph_scale is not None:
            return self.cfg.graph_scale
        if fg.d_g_star <= 0.0:
            return 1.0
        return layout.reach() / fg.d_g_star

    def initialPositions(self, fm: FeatureMatrix, fg: FluidGraph) -> np.ndarray:
        """Starting positions for the configured InitStrategy, placed into the component regions"""
        if self.cfg.init is InitStrategy.RANDOM_BALL:
            positions = self._randomBall(fg.n_nodes)
        else:
            positions = self._changeOfVariables(fm, fg)
        return self.layout(fm, fg).place(positions)

    def _randomBall(self, nNodes: int) -> np.ndarray:
        rng = np.random.default_rng(self.cfg.seed)
        directions = rng.standard_normal((nNodes, self.cfg.dim))
        directions /= np.linalg.norm(directions, axis=1, keepdims=True)
        radii = RANDOM_BALL_RADIUS * rng.uniform(0.0, 1.0, nNodes) ** (1.0 / self.cfg.dim)
        return directions * radii[:, None]

    def _changeOfVariables(self, fm: FeatureMatrix, fg: FluidGraph) -> np.ndarray:
        """
        u_i = x_i / sqrt(2 s_i + |x_i|^2) on mean-completed features

        The completion only shapes the starting point; the losses never see it.
        s_i is the mean transition probability out of node i. Features are
        reduced to `dim` coordinates with PCA or zero-padded up to it.
        """
        withGaps = np.where(fm.observed, fm.values, np.nan)
        completed = SimpleImputer(strategy='mean', keep_empty_features=True).fit_transform(withGaps)

        dim = self.cfg.dim
        if completed.shape[1] > dim:
            components = min(dim, completed.shape[0])
            completed = PCA(n_components=components, svd_solver='full').fit_transform(completed)
        coordinates = np.zeros((fm.n_nodes, dim))
        coordinates[:, :completed.shape[1]] = completed

        sOverV = np.array([fg.meanTransitionProbability(i) for i in range(fg.n_nodes)])
        scale = np.sqrt(2.0 * sOverV + np.sum(coordinates ** 2, axis=1))
        return projectRows(coordinates / scale[:, None])

    def learningRate(self, epoch: int) -> float:
        return self.cfg.lr / (1.0 + self.cfg.lr_decay * (epoch - 1))

    def embed(self, fm: FeatureMatrix, fg: FluidGraph) -> EmbeddingState:
        """
        Optimize node positions for cfg.epochs epochs

        Every connected component is optimized on its own: it keeps to its
        region of the ball, and a step that raises its loss is undone and its
        step size halved (regrowing by STEP_GROWTH up to the scheduled rate on
        each kept step). The recorded loss therefore never increases.

        A non-finite loss or gradient stops the run; the returned state then
        holds the last finite positions and a diagnostic message.

        Args:
            fm: Feature matrix (initialization and pair ids)
            fg: Fluid graph with the target distances

        Returns:
            EmbeddingState: Final positions and the per-epoch loss trace
        """
        layout = self.layout(fm, fg)
        scale = self.graphScale(fg, layout)
        objective = SoftManifoldObjective(fg, self.cfg, scale)
        sampler = PairBatchSampler(self.cfg.seed, fm.row_ids, objective.pairFirst, objective.pairSecond,
                                   self.cfg.batch_pairs)
        components = objective.components
        kappa = self.cfg.kappa

        positions = self.initialPositions(fm, fg)
        lossD, lossG = objective.componentLosses(positions)
        current = lossD + kappa * lossG
        trace = [objective.record(0, lossD, lossG)]
        state = EmbeddingState(positions=positions, epoch=0, loss_trace=trace, config=self.cfg,
                               rng_seed=self.cfg.seed, graph_scale=scale)
        if not np.isfinite(trace[0].loss_total):
            state.diagnostic = "initial loss is not finite"
            logger.error(f"Embedding aborted: {state.diagnostic}")
            return state

        if layout.nComponents > 1:
            logger.warning(f"Embedding {layout.nComponents} connected components independently, "
                           f"each in its own region of radius {layout.radius:.4g}")
        logger.info(f"Embedding {fg.n_nodes} nodes in dim {self.cfg.dim} for {self.cfg.epochs} epochs "
                    f"({objective.nPairs} pairs, init {self.cfg.init}, graph scale {scale:.6g}, "
                    f"initial loss {trace[0].loss_total:.6g})")

        multiplier = np.ones(layout.nComponents)
        for epoch in range(1, self.cfg.epochs + 1):
            gradient = objective.gradient(positions, sampler.mask(epoch))
            if not np.all(np.isfinite(gradient)):
                state.diagnostic = f"non-finite gradient at epoch {epoch}"
                break

            steps = self.learningRate(epoch) * multiplier[components]
            candidate = layout.project(positions - steps[:, None] * gradient)
            candidateD, candidateG = objective.componentLosses(candidate)
            candidateTotal = candidateD + kappa * candidateG
            if not np.all(np.isfinite(candidateTotal)):
                state.diagnostic = f"non-finite loss at epoch {epoch}"
                break

            kept = candidateTotal <= current
            positions = np.where(kept[components][:, None], candidate, positions)
            lossD = np.where(kept, candidateD, lossD)
            lossG = np.where(kept, candidateG, lossG)
            current = np.where(kept, candidateTotal, current)
            multiplier = np.where(kept, np.minimum(1.0, multiplier * STEP_GROWTH), multiplier * STEP_SHRINK)

            record = objective.record(epoch, lossD, lossG)
            trace.append(record)
            state.positions = positions
            state.epoch = epoch
            if epoch % self.cfg.log_interval == 0 or epoch == self.cfg.epochs:
                logger.info(f"Epoch {epoch}/{self.cfg.epochs}: L_d={record.loss_distortion:.6g} "
                            f"L_g={record.loss_geometry:.6g} L={record.loss_total:.6g}")

        if state.diagnostic:
            logger.error(f"Embedding stopped early, keeping epoch {state.epoch}: {state.diagnostic}")
        return state


def embed(fm: FeatureMatrix, K: ConductivityTensor, nbhd: Neighborhoods, fg: FluidGraph,
          cfg: EmbedConfig) -> EmbeddingState:
    """
    Embed a fluid graph with the given hyperparameters

    K and nbhd are already folded into fg; they are accepted so callers can
    pass the full graph-construction output.
    """
    if fg.nbhd is not nbhd and fg.nbhd.adjacency != nbhd.adjacency:
        raise ValueError("neighborhoods do not match the fluid graph")
    if K.n_features != fm.n_features:
        raise ValueError("conductivity tensor does not match the feature matrix")
    return SoftManifoldEmbedder(cfg).embed(fm, fg)
