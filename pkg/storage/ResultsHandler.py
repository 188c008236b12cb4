from typing import List, Sequence

import numpy as np
import pandas as pd

from framework.evaluation.ExperimentRunner import resultsFrame
from framework.models.EvaluationModels import CalibrationRow, EvalReport, ExperimentRow
from storage.BaseArtifactHandler import BaseArtifactHandler

RESULTS_FILE = "results.csv"
AGGREGATES_FILE = "aggregates.csv"
EVAL_FILE = "eval.csv"
CALIBRATION_FILE = "geodesic_calibration.csv"
CALIBRATION_SUMMARY_FILE = "geodesic_summary.txt"
CALIBRATION_COLUMNS = ['pair_id', 'chord', 'semimetric', 'oracle_length', 'ratio', 'converged', 'degenerate']


class ResultsHandler(BaseArtifactHandler):
    """Tabular outputs of the eval, simulate and geodesic-check commands"""

    def saveResults(self, rows: List[ExperimentRow]) -> str:
        return self.writeFrame(RESULTS_FILE, resultsFrame(rows))

    def saveAggregates(self, aggregates: pd.DataFrame) -> str:
        return self.writeFrame(AGGREGATES_FILE, aggregates)

    def saveEval(self, report: EvalReport, metrics: Sequence[str]) -> str:
        """One-row eval.csv holding only the requested metric columns"""
        values = {'map': report.map_score, 'ad': report.ad_score}
        frame = pd.DataFrame([{name: values[name] for name in metrics}], columns=list(metrics))
        return self.writeFrame(EVAL_FILE, frame)

    def saveCalibration(self, rows: List[CalibrationRow]) -> str:
        frame = pd.DataFrame(
            [[row.pair_id, row.chord, row.semimetric, row.oracle_length, row.ratio,
              row.converged, row.degenerate] for row in rows],
            columns=CALIBRATION_COLUMNS
        )
        return self.writeFrame(CALIBRATION_FILE, frame)

    def saveCalibrationSummary(self, summary: str) -> str:
        return self.writeText(CALIBRATION_SUMMARY_FILE, summary + "\n")


def calibrationSummary(rows: List[CalibrationRow]) -> str:
    """min / median / max oracle-to-semimetric ratio over the non-degenerate rows"""
    ratios = np.array([row.ratio for row in rows if not row.degenerate and np.isfinite(row.ratio)])
    unconverged = sum(1 for row in rows if not row.converged)
    if ratios.size == 0:
        return f"pairs={len(rows)} ratio: no non-degenerate pairs unconverged={unconverged}"
    return (f"pairs={len(rows)} ratio min={ratios.min():.6f} median={np.median(ratios):.6f} "
            f"max={ratios.max():.6f} unconverged={unconverged}")
