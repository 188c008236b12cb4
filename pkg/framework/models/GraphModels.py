from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np
from scipy.sparse.csgraph import connected_components

from config.SoftManifoldEnums import DistanceTransform
from framework.models.DatasetModels import Neighborhoods


@dataclass
class DiffusionParams:
    """Signed velocities and diffusion rates entering the transition probability"""
    v_plus: float
    v_minus: float
    b_plus: float
    b_minus: float

    def __post_init__(self):
        if not (self.b_plus > 0 and self.b_minus > 0):
            raise ValueError(f"diffusion rates must be positive, got {self.b_plus}, {self.b_minus}")

    @property
    def reducedPlus(self) -> float:
        """v+ / 2B+"""
        return self.v_plus / (2.0 * self.b_plus)

    @property
    def reducedMinus(self) -> float:
        """v- / 2B-"""
        return self.v_minus / (2.0 * self.b_minus)


@dataclass
class FluidGraph:
    """
    Transition probabilities on the k-NN edges plus the dense squared
    graph-distance matrix (inf between disconnected components, 0 on the diagonal)
    """
    n_nodes: int
    nbhd: Neighborhoods
    p: Dict[Tuple[int, int], float]
    edge_d_sq: Dict[Tuple[int, int], float]
    d_g_sq: np.ndarray
    d_g_star: float
    transform: DistanceTransform
    n_components: int = 1

    def graphDistance(self, i: int, j: int) -> float:
        return float(np.sqrt(self.d_g_sq[i, j]))

    def componentLabels(self) -> np.ndarray:
        """Connected-component index of every node; finite graph distance means same component"""
        _, labels = connected_components(np.isfinite(self.d_g_sq).astype(float), directed=False)
        return labels

    def finitePairMask(self) -> np.ndarray:
        """Boolean N x N mask of off-diagonal pairs with a finite graph distance"""
        mask = np.isfinite(self.d_g_sq)
        np.fill_diagonal(mask, False)
        return mask

    def meanTransitionProbability(self, i: int) -> float:
        """Mean of p_ij over j in N(i)"""
        neighbors = self.nbhd.neighbors(i)
        return float(np.mean([self.p[(i, j)] for j in neighbors]))
