from collections import Counter
from typing import Optional

import numpy as np

from framework.models.EvaluationModels import PredictionResult
from framework.softmanifold.SoftManifoldGeometry import pairwiseSemimetric
from logs.logger import get_logger
from utils.exceptions import DataValidationError

logger = get_logger(__name__)

UNKNOWN_LABEL = -1


def predictLabels(positions: np.ndarray, trainLabels: np.ndarray, kVote: int,
                  trueLabels: Optional[np.ndarray] = None) -> PredictionResult:
    """
    k-nearest-neighbor label vote under the manifold semimetric

    Ties in the vote go to the label whose voters are closer in total, then
    to the smaller label id.

    Args:
        positions: N x dim embedding
        trainLabels: Known label per node, -1 where hidden or unknown
        kVote: Number of labeled voters per query
        trueLabels: Ground truth used to score the hidden nodes (optional)

    Returns:
        PredictionResult: Predicted label per unlabeled node and overall accuracy
            over the unlabeled nodes whose truth is known (None if there are none)
    """
    if kVote < 1:
        raise ValueError(f"k_vote must be at least 1, got {kVote}")
    trainLabels = np.asarray(trainLabels, dtype=int)
    labeled = np.flatnonzero(trainLabels != UNKNOWN_LABEL)
    queries = np.flatnonzero(trainLabels == UNKNOWN_LABEL)
    if labeled.size == 0:
        raise DataValidationError("label prediction needs at least one labeled node")

    distances = pairwiseSemimetric(positions)
    predictions = {}
    for node in queries:
        row = distances[node, labeled]
        voters = labeled[np.lexsort((labeled, row))][:kVote]
        votes = Counter(trainLabels[voters].tolist())
        spread = {}
        for voter in voters:
            label = int(trainLabels[voter])
            spread[label] = spread.get(label, 0.0) + distances[node, voter]
        winner = min(votes, key=lambda label: (-votes[label], spread[label], label))
        predictions[int(node)] = int(winner)

    accuracy = None
    if trueLabels is not None:
        trueLabels = np.asarray(trueLabels, dtype=int)
        scored = [node for node in predictions if trueLabels[node] != UNKNOWN_LABEL]
        if scored:
            accuracy = float(np.mean([predictions[node] == trueLabels[node] for node in scored]))
    logger.debug(f"Predicted {len(predictions)} labels from {labeled.size} labeled nodes, accuracy {accuracy}")
    return PredictionResult(predictions=predictions, accuracy=accuracy)
