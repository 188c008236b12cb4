"""
Enums for graph construction, embedding and experiment bookkeeping
"""
from enum import Enum

import numpy as np


class DistanceTransform(Enum):
    """
    How an edge transition probability becomes a squared graph distance
    """
    LITERAL = "paper_literal"         # d_G^2 = p_ij
    NEG_LOG = "neg_log"               # d_G^2 = -ln p_ij

    def apply(self, probabilities: np.ndarray) -> np.ndarray:
        """Map transition probabilities to squared graph distances"""
        probabilities = np.asarray(probabilities, dtype=float)
        if self is DistanceTransform.NEG_LOG:
            return -np.log(probabilities)
        return probabilities.copy()

    def __str__(self) -> str:
        return self.value


class TransitionKernel(Enum):
    """Diffusion model used for edge transition probabilities"""
    FLUID = "fluid"
    HEAT = "heat"

    def __str__(self) -> str:
        return self.value


class VelocitySign(Enum):
    """
    Sign convention for the transport velocity v_ij

    MAGNITUDE keeps v_ij >= 0; SIGNED uses the negative magnitude.
    """
    MAGNITUDE = "magnitude"
    SIGNED = "signed"

    def applySign(self, magnitude: float) -> float:
        return -magnitude if self is VelocitySign.SIGNED else magnitude

    def __str__(self) -> str:
        return self.value


class InitStrategy(Enum):
    """Initial placement of embedded nodes"""
    CHANGE_OF_VARIABLES = "change_of_variables"
    RANDOM_BALL = "random_ball"

    def __str__(self) -> str:
        return self.value


class PairScope(Enum):
    """Node pairs summed by the distortion loss"""
    ALL_PAIRS = "all_pairs"
    NEIGHBORS = "neighbors"

    def __str__(self) -> str:
        return self.value


class RunStatus(Enum):
    """Outcome of one experiment cell-trial"""
    OK = "ok"
    FAILED = "failed"
    DIVERGED = "diverged"

    @property
    def isUsable(self) -> bool:
        """Whether the row's metrics enter the aggregates"""
        return self is RunStatus.OK

    def __str__(self) -> str:
        return self.value
