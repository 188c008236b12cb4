"""
Closed-form fluid-diffusion transition probabilities

A unit of fluid at node i leaves towards neighbor j with a probability set
by the transport velocity towards j against the mean velocity towards the
rest of N(i), each scaled by its diffusion rate:

    p_ij = T(v+ / 2B+) / (T(v+ / 2B+) + T(-v- / 2B-)),   T(z) = |z| e^z csch|z|

T is evaluated in log space so large reduced velocities do not overflow.
"""
from typing import Union

import numpy as np
from scipy.special import expit

from config.SoftManifoldEnums import VelocitySign
from framework.models.DatasetModels import ConductivityTensor, FeatureMatrix, Neighborhoods
from framework.models.GraphModels import DiffusionParams
from utils.constants import CSCH_CUTOFF, DIFFUSION_RATE_FLOOR, PROBABILITY_FLOOR
from utils.exceptions import DataValidationError

ArrayLike = Union[float, np.ndarray]


def mutualFeatures(fm: FeatureMatrix, i: int, j: int) -> np.ndarray:
    return fm.observed[i] & fm.observed[j]


def velocity(i: int, j: int, fm: FeatureMatrix, K: ConductivityTensor,
             sign: VelocitySign = VelocitySign.MAGNITUDE) -> float:
    """
    Transport velocity between two samples

    Args:
        i, j: Edge endpoints, (i, j) materialized in K
        fm: Feature matrix
        K: Conductivity tensor
        sign: MAGNITUDE for |v_ij|, SIGNED for -|v_ij|

    Returns:
        float: ||K_ij: * (x_i - x_j)||_2 / sqrt(m_ij) over mutually observed
            features, 0 when the rows share none
    """
    conductivity = K.edge(i, j)
    mutual = mutualFeatures(fm, i, j)
    overlap = int(mutual.sum())
    if overlap == 0:
        return 0.0
    weighted = conductivity[mutual] * (fm.values[i, mutual] - fm.values[j, mutual])
    return sign.applySign(float(np.linalg.norm(weighted) / np.sqrt(overlap)))


def diffusionRate(i: int, j: int, fm: FeatureMatrix, b0: float) -> float:
    """B_ij = b0 * (mutually observed features / n) + floor"""
    if not b0 > 0:
        raise ValueError(f"b0 must be positive, got {b0}")
    overlap = int(mutualFeatures(fm, i, j).sum())
    return b0 * overlap / fm.n_features + DIFFUSION_RATE_FLOOR


def vbPlusMinus(i: int, j: int, fm: FeatureMatrix, K: ConductivityTensor, nbhd: Neighborhoods,
                b0: float, sign: VelocitySign = VelocitySign.MAGNITUDE) -> DiffusionParams:
    """
    Velocity and diffusion rate towards j and their means over the rest of N(i)

    A node with a single neighbor gets the symmetric fallback (v-, B-) = (v+, B+).

    Args:
        i: Source node
        j: Target node, must be in N(i)
        fm: Feature matrix
        K: Conductivity tensor
        nbhd: Neighborhoods
        b0: Diffusion-rate scale
        sign: Velocity sign convention

    Returns:
        DiffusionParams: (v+, v-, B+, B-)
    """
    neighbors = nbhd.neighbors(i)
    if j not in neighbors:
        raise ValueError(f"node {j} is not a neighbor of node {i}")

    vPlus = velocity(i, j, fm, K, sign)
    bPlus = diffusionRate(i, j, fm, b0)
    others = [m for m in neighbors if m != j]
    if not others:
        return DiffusionParams(v_plus=vPlus, v_minus=vPlus, b_plus=bPlus, b_minus=bPlus)

    vMinus = float(np.mean([velocity(i, m, fm, K, sign) for m in others]))
    bMinus = float(np.mean([diffusionRate(i, m, fm, b0) for m in others]))
    return DiffusionParams(v_plus=vPlus, v_minus=vMinus, b_plus=bPlus, b_minus=bMinus)


def xCschX(z: ArrayLike) -> ArrayLike:
    """|z| csch|z|, equal to its limit 1 for |z| below the cutoff"""
    a = np.abs(np.asarray(z, dtype=float))
    safe = np.where(a < CSCH_CUTOFF, 1.0, a)
    # 2a e^-a / (1 - e^-2a) == a / sinh(a) without overflow
    value = 2.0 * safe * np.exp(-safe) / -np.expm1(-2.0 * safe)
    value = np.where(a < CSCH_CUTOFF, 1.0, value)
    return float(value) if value.ndim == 0 else value


def logFluxTerm(z: ArrayLike) -> ArrayLike:
    """log(|z| e^z csch|z|)"""
    z = np.asarray(z, dtype=float)
    a = np.abs(z)
    safe = np.where(a < CSCH_CUTOFF, 1.0, a)
    logTerm = np.log(2.0 * safe) + (z - safe) - np.log(-np.expm1(-2.0 * safe))
    logTerm = np.where(a < CSCH_CUTOFF, z, logTerm)
    return float(logTerm) if logTerm.ndim == 0 else logTerm


def transitionProbability(dp: DiffusionParams) -> float:
    """
    Probability that fluid at i diffuses to j

    Args:
        dp: Velocities and diffusion rates of the edge

    Returns:
        float: p_ij, kept inside (0, 1) by a 1e-12 margin

    Raises:
        DataValidationError: Non-finite intermediate values
    """
    reducedPlus = dp.reducedPlus
    reducedMinus = dp.reducedMinus
    if not (np.isfinite(reducedPlus) and np.isfinite(reducedMinus)):
        raise DataValidationError(f"non-finite reduced velocity in {dp}")

    logRatio = logFluxTerm(reducedPlus) - logFluxTerm(-reducedMinus)
    probability = float(expit(logRatio))
    if not np.isfinite(probability):
        raise DataValidationError(f"non-finite transition probability for {dp}")
    return float(np.clip(probability, PROBABILITY_FLOOR, 1.0 - PROBABILITY_FLOOR))
