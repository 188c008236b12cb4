import numpy as np

from framework.models.DatasetModels import ConductivityTensor, FeatureMatrix, Neighborhoods
from logs.logger import get_logger

logger = get_logger(__name__)


def buildConductivity(fm: FeatureMatrix, nbhd: Neighborhoods, base: float) -> ConductivityTensor:
    """
    Per-feature conductivities on the neighborhood edges

    K_ij:[f] is `base` when feature f is observed at both i and j and 0
    otherwise, so diffusion is blocked through missing features.

    Args:
        fm: Feature matrix
        nbhd: Neighborhoods whose edges get materialized
        base: Conductivity of a mutually observed feature, > 0

    Returns:
        ConductivityTensor: Entries for every (i, j) with j in N(i)
    """
    if not base > 0:
        raise ValueError(f"base conductivity must be positive, got {base}")

    entries = {}
    for i, j in nbhd.edges():
        mutual = fm.observed[i] & fm.observed[j]
        entries[(i, j)] = np.where(mutual, float(base), 0.0)

    blocked = sum(1 for vector in entries.values() if not vector.any())
    if blocked:
        logger.warning(f"{blocked} edges share no observed feature; diffusion blocked on them")
    return ConductivityTensor(entries=entries, n_features=fm.n_features, symmetric=nbhd.isSymmetric())
