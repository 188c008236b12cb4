import math

import numpy as np

from framework.models.DatasetModels import FeatureMatrix
from logs.logger import get_logger
from utils.exceptions import DataValidationError

logger = get_logger(__name__)


def missingCount(fm: FeatureMatrix, fraction: float) -> int:
    """Number of additional entries a masking run removes: floor(fraction * observed)"""
    # tolerance keeps exact products like 0.29 * 100 from flooring to 28
    return int(math.floor(fraction * fm.observedCount + 1e-9))


def applyMissingMask(fm: FeatureMatrix, fraction: float, seed: int) -> FeatureMatrix:
    """
    Hide a random fraction of the observed entries

    Entries are visited in a seeded random order and removed unless they are
    the last observed feature of their row.

    Args:
        fm: Feature matrix to mask
        fraction: Share of observed entries to hide, in [0, 1)
        seed: RNG seed

    Returns:
        FeatureMatrix: Copy with the extended mask

    Raises:
        DataValidationError: fraction out of range, or more removals requested
            than rows can give up without losing their last feature
    """
    if not 0.0 <= fraction < 1.0:
        raise DataValidationError(f"missing fraction {fraction} outside [0, 1)")

    target = missingCount(fm, fraction)
    observed = fm.observed.copy()
    if target == 0:
        return fm.withMask(observed)

    removable = fm.observedCount - int(observed.any(axis=1).sum())
    if target > removable:
        raise DataValidationError(
            f"cannot hide {target} entries: only {removable} can go without emptying a row"
        )

    rows, columns = np.nonzero(observed)
    order = np.random.default_rng(seed).permutation(rows.size)
    remaining = observed.sum(axis=1)
    removed = 0
    for position in order:
        row = rows[position]
        if remaining[row] <= 1:
            continue
        observed[row, columns[position]] = False
        remaining[row] -= 1
        removed += 1
        if removed == target:
            break

    logger.debug(f"Masked {removed} of {fm.observedCount} observed entries (seed {seed})")
    return fm.withMask(observed)
