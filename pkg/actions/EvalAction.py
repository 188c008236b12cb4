from typing import Sequence

from framework.evaluation.EmbeddingMetrics import evaluateEmbedding
from logs.logger import get_logger
from storage.EmbeddingArtifactHandler import EmbeddingArtifactHandler
from storage.GraphArtifactHandler import GraphArtifactHandler
from storage.ResultsHandler import ResultsHandler
from utils.constants import SUPPORTED_METRICS
from utils.exceptions import ConfigError, DataValidationError

logger = get_logger(__name__)


class EvalAction:
    """Scores a saved embedding against a saved graph and writes eval.csv"""

    def __init__(self, embeddingPath: str, graphPath: str, metrics: Sequence[str], outputDir: str):
        unknown = [name for name in metrics if name not in SUPPORTED_METRICS]
        if not metrics or unknown:
            raise ConfigError(f"--metrics must be a non-empty subset of {list(SUPPORTED_METRICS)}, got {list(metrics)}")
        self.embeddingPath = embeddingPath
        self.graphPath = graphPath
        self.metrics = list(dict.fromkeys(metrics))
        self.results = ResultsHandler(outputDir)

    def execute(self) -> str:
        """
        Returns:
            str: Path of eval.csv

        Raises:
            DataValidationError: Unreadable artifacts or node-count mismatch
        """
        state = EmbeddingArtifactHandler.loadEmbedding(self.embeddingPath)
        fg = GraphArtifactHandler.loadGraph(self.graphPath)
        if state.n_nodes != fg.n_nodes:
            raise DataValidationError(
                f"embedding has {state.n_nodes} nodes but the graph has {fg.n_nodes}"
            )

        report = evaluateEmbedding(state, fg, self.metrics)
        logger.info(f"Evaluation: mAP={report.map_score:.6g} AD={report.ad_score:.6g}")
        return self.results.saveEval(report, self.metrics)
