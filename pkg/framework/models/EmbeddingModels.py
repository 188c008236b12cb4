from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from config.RunConfig import EmbedConfig
from framework.models.ManifoldModels import ManifoldPoint


@dataclass
class LossRecord:
    """One loss_trace entry"""
    epoch: int
    loss_distortion: float
    loss_geometry: float
    loss_total: float

    def asRow(self) -> list:
        return [self.epoch, self.loss_distortion, self.loss_geometry, self.loss_total]


@dataclass
class EmbeddingState:
    """Node positions on the soft manifold plus the optimization record"""
    positions: np.ndarray
    epoch: int
    loss_trace: List[LossRecord]
    config: EmbedConfig
    rng_seed: int
    diagnostic: Optional[str] = None
    # the embedding reproduces graph_scale * d_G
    graph_scale: float = 1.0

    @property
    def n_nodes(self) -> int:
        return int(self.positions.shape[0])

    @property
    def dim(self) -> int:
        return int(self.positions.shape[1])

    @property
    def finalLoss(self) -> float:
        return self.loss_trace[-1].loss_total if self.loss_trace else float('nan')

    def points(self) -> List[ManifoldPoint]:
        return [ManifoldPoint(row) for row in self.positions]


@dataclass
class NeighborhoodGeometry:
    """Local-geometry summary of one node on both sides of the embedding"""
    node: int
    theta: float
    graph_area_norm: float
    manifold_area_norm: float
    neighbors: List[int] = field(default_factory=list)
