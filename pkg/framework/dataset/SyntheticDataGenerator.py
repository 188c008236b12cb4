import numpy as np

from framework.models.DatasetModels import FeatureMatrix
from logs.logger import get_logger
from parsers.FeatureCSVParser import scaleFeatures
from utils.exceptions import DataValidationError

logger = get_logger(__name__)


def generateSynthetic(nNodes: int, nFeatures: int, nClasses: int, noise: float, seed: int) -> FeatureMatrix:
    """
    Gaussian clusters around class centroids drawn uniformly from the unit cube

    Every class gets at least one row when nClasses <= nNodes. The result is
    fully observed and min-max scaled like a loaded CSV.

    Args:
        nNodes: Number of rows
        nFeatures: Number of features
        nClasses: Number of classes
        noise: Standard deviation of the per-row Gaussian offset
        seed: RNG seed

    Returns:
        FeatureMatrix: Labeled synthetic features
    """
    if nNodes < 1 or nFeatures < 1 or nClasses < 1:
        raise DataValidationError("synthetic sizes must be positive")
    if nClasses > nNodes:
        raise DataValidationError(f"n_classes ({nClasses}) exceeds n_nodes ({nNodes})")
    if noise < 0:
        raise DataValidationError(f"noise must be non-negative, got {noise}")

    rng = np.random.default_rng(seed)
    centroids = rng.uniform(0.0, 1.0, size=(nClasses, nFeatures))
    labels = rng.permutation(np.arange(nNodes) % nClasses)
    values = centroids[labels] + noise * rng.standard_normal((nNodes, nFeatures))
    observed = np.ones_like(values, dtype=bool)

    logger.info(f"Generated synthetic dataset: {nNodes} nodes, {nFeatures} features, "
                f"{nClasses} classes, noise {noise}, seed {seed}")
    return FeatureMatrix(
        values=scaleFeatures(values, observed),
        observed=observed,
        row_ids=[f"s{index}" for index in range(nNodes)],
        labels=labels.astype(int)
    )
