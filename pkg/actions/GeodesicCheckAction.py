"""
Calibrates the semimetric against the variational geodesic length

Besides the random interior pairs the check always includes a coincident
pair (degenerate row) and a near-antipodal pair on a diameter close to the
boundary, whose geodesic length approaches pi.
"""
from typing import Dict, List, Tuple

import numpy as np

from framework.models.EvaluationModels import CalibrationRow
from framework.softmanifold.GeodesicOracle import geodesicLengthOracle
from framework.softmanifold.SoftManifoldGeometry import semimetricDistance
from logs.logger import get_logger
from scheduler.ExperimentJobRunner import ExperimentJob, runJobs
from storage.ResultsHandler import ResultsHandler, calibrationSummary
from utils.constants import GEODESIC_SEGMENTS
from utils.exceptions import ConfigError

logger = get_logger(__name__)

ANTIPODAL_RADIUS = 0.999
SAMPLE_RADIUS = 0.99


def samplePairs(nPairs: int, seed: int, dim: int = 2) -> List[Tuple[np.ndarray, np.ndarray]]:
    """Injected coincident and antipodal pairs followed by nPairs seeded uniform interior pairs"""
    rng = np.random.default_rng(seed)
    point = np.zeros(dim)
    point[0] = 0.3
    antipode = np.zeros(dim)
    antipode[0] = ANTIPODAL_RADIUS
    pairs = [(point, point.copy()), (-antipode, antipode)]

    for _ in range(nPairs):
        directions = rng.standard_normal((2, dim))
        directions /= np.linalg.norm(directions, axis=1, keepdims=True)
        radii = SAMPLE_RADIUS * rng.uniform(0.0, 1.0, 2) ** (1.0 / dim)
        pairs.append((directions[0] * radii[0], directions[1] * radii[1]))
    return pairs


def calibratePair(pairId: int, u1: np.ndarray, u2: np.ndarray, nSegments: int) -> CalibrationRow:
    oracle = geodesicLengthOracle(u1, u2, nSegments)
    return CalibrationRow.build(
        pairId=pairId,
        chord=float(np.linalg.norm(u1 - u2)),
        semimetric=semimetricDistance(u1, u2),
        oracleLength=oracle.length,
        converged=oracle.converged
    )


class GeodesicCheckAction:
    """Handles the geodesic-check workflow"""

    def __init__(self, nPairs: int, seed: int, outputDir: str, nSegments: int = GEODESIC_SEGMENTS,
                 threads: int = 1):
        if nPairs < 1:
            raise ConfigError(f"--pairs must be at least 1, got {nPairs}")
        self.nPairs = nPairs
        self.seed = seed
        self.nSegments = nSegments
        self.threads = threads
        self.results = ResultsHandler(outputDir)

    def execute(self) -> Dict[str, str]:
        pairs = samplePairs(self.nPairs, self.seed)
        jobs = [
            ExperimentJob(key=(pairId,), run=lambda p=pairId, a=u1, b=u2: calibratePair(p, a, b, self.nSegments))
            for pairId, (u1, u2) in enumerate(pairs)
        ]
        rows = runJobs(jobs, self.threads)

        summary = calibrationSummary(rows)
        logger.info(f"Geodesic calibration: {summary}")
        return {
            'calibration': self.results.saveCalibration(rows),
            'summary': self.results.saveCalibrationSummary(summary),
        }
