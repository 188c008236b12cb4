"""
Loads the configured features, builds the fluid graph, embeds it and writes
graph.json, embedding.json and loss_trace.csv
"""
from typing import Dict

from config.RunConfig import RunConfig
from framework.dataset.FeatureSource import loadFeatureMatrix
from framework.embedding.SoftManifoldEmbedder import embed
from framework.fluidgraph.FluidGraphBuilder import buildFluidGraphFromFeatures
from logs.logger import get_logger
from storage.EmbeddingArtifactHandler import EmbeddingArtifactHandler
from storage.GraphArtifactHandler import GraphArtifactHandler
from utils.exceptions import EmbeddingDivergedError

logger = get_logger(__name__)


class EmbedAction:
    """Handles the complete embed workflow"""

    def __init__(self, config: RunConfig):
        """
        Args:
            config: Validated run configuration (flags already applied)
        """
        self.config = config
        self.graphStore = GraphArtifactHandler(config.output_dir)
        self.embeddingStore = EmbeddingArtifactHandler(config.output_dir)

    def execute(self) -> Dict[str, str]:
        """
        Run the pipeline and persist its artifacts

        Returns:
            Dict[str, str]: Artifact name to written path

        Raises:
            EmbeddingDivergedError: The loss became non-finite (artifacts of the
                last finite state are still written)
        """
        fm = loadFeatureMatrix(self.config.input)
        nbhd, K, fg = buildFluidGraphFromFeatures(fm, self.config.graph)
        state = embed(fm, K, nbhd, fg, self.config.embed)

        written = {
            'graph': self.graphStore.saveGraph(fg),
            'embedding': self.embeddingStore.saveEmbedding(state),
            'loss_trace': self.embeddingStore.saveLossTrace(state),
        }
        if state.diagnostic:
            raise EmbeddingDivergedError(state.diagnostic, state)

        logger.info(f"Embedding finished after {state.epoch} epochs, final loss {state.finalLoss:.6g}")
        return written
