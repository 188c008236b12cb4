import numpy as np
import pandas as pd
from pydantic import ValidationError

from config.RunConfig import EmbedConfig
from framework.models.EmbeddingModels import EmbeddingState, LossRecord
from storage.BaseArtifactHandler import BaseArtifactHandler
from utils.exceptions import DataValidationError

EMBEDDING_FILE = "embedding.json"
LOSS_TRACE_FILE = "loss_trace.csv"
LOSS_TRACE_COLUMNS = ['epoch', 'loss_distortion', 'loss_geometry', 'loss_total']


class EmbeddingArtifactHandler(BaseArtifactHandler):
    """Reads and writes embedding.json and loss_trace.csv"""

    def saveEmbedding(self, state: EmbeddingState) -> str:
        payload = {
            'dim': state.dim,
            'seed': state.rng_seed,
            'epoch': state.epoch,
            'config': state.config.model_dump(mode='json'),
            'positions': state.positions.tolist(),
            'loss_trace': [record.asRow() for record in state.loss_trace],
            'diagnostic': state.diagnostic,
            'graph_scale': state.graph_scale,
        }
        return self.writeJson(EMBEDDING_FILE, payload)

    def saveLossTrace(self, state: EmbeddingState) -> str:
        frame = pd.DataFrame([record.asRow() for record in state.loss_trace], columns=LOSS_TRACE_COLUMNS)
        return self.writeFrame(LOSS_TRACE_FILE, frame)

    @classmethod
    def loadEmbedding(cls, path: str) -> EmbeddingState:
        """
        Rebuild an EmbeddingState from embedding.json

        Raises:
            DataValidationError: Missing fields, bad shapes or points outside the ball
        """
        payload = cls.readJson(path)
        try:
            config = EmbedConfig.model_validate(payload['config'])
            positions = np.asarray(payload['positions'], dtype=float)
            trace = [LossRecord(int(row[0]), float(row[1]), float(row[2]), float(row[3]))
                     for row in payload['loss_trace']]
            dim = int(payload['dim'])
            seed = int(payload['seed'])
            graphScale = float(payload.get('graph_scale', 1.0))
        except (KeyError, TypeError, ValueError, IndexError, ValidationError) as e:
            raise DataValidationError(f"{path} is not an embedding artifact: {e}") from e

        if not (np.isfinite(graphScale) and graphScale > 0.0):
            raise DataValidationError(f"{path}: graph_scale must be a positive number")
        if positions.ndim != 2 or positions.shape[1] != dim:
            raise DataValidationError(f"{path}: positions do not have dimension {dim}")
        if not np.all(np.isfinite(positions)) or np.any(np.linalg.norm(positions, axis=1) >= 1.0):
            raise DataValidationError(f"{path}: positions must be finite and inside the unit ball")

        return EmbeddingState(
            positions=positions,
            epoch=int(payload.get('epoch', trace[-1].epoch if trace else 0)),
            loss_trace=trace,
            config=config,
            rng_seed=seed,
            diagnostic=payload.get('diagnostic'),
            graph_scale=graphScale
        )
