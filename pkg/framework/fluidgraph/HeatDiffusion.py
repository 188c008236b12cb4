from typing import Dict, Tuple

import numpy as np
from scipy.special import softmax

from framework.models.DatasetModels import FeatureMatrix, Neighborhoods
from logs.logger import get_logger
from utils.constants import HEAT_SIGMA_FLOOR, PROBABILITY_FLOOR

logger = get_logger(__name__)


def heatBandwidth(fm: FeatureMatrix) -> float:
    """Variance of all observed scaled feature values, floored"""
    return max(float(np.var(fm.values[fm.observed])), HEAT_SIGMA_FLOOR)


def heatTransitionProbabilities(fm: FeatureMatrix, nbhd: Neighborhoods,
                                distances: np.ndarray) -> Dict[Tuple[int, int], float]:
    """
    Heat-kernel transition probabilities exp(-d_ij / 2 sigma), normalized over N(i)

    Args:
        fm: Feature matrix (sets the bandwidth sigma)
        nbhd: Neighborhoods
        distances: Masked distance matrix used to build nbhd

    Returns:
        Dict[Tuple[int, int], float]: p_ij per directed edge, clipped into (0, 1)
    """
    sigma = heatBandwidth(fm)
    probabilities = {}
    for i in sorted(nbhd.adjacency):
        neighbors = nbhd.neighbors(i)
        logits = -distances[i, neighbors] / (2.0 * sigma)
        # zero-overlap fallback neighbors have no finite logit
        logits = np.where(np.isfinite(logits), logits, np.finfo(float).min)
        weights = softmax(logits)
        for j, weight in zip(neighbors, weights):
            probabilities[(i, j)] = float(np.clip(weight, PROBABILITY_FLOOR, 1.0 - PROBABILITY_FLOOR))
    logger.debug(f"Heat kernel bandwidth sigma={sigma:.6g}")
    return probabilities
