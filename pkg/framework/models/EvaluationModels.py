from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from config.SoftManifoldEnums import RunStatus

RESULT_COLUMNS = [
    'missing_fraction', 'holdout_fraction', 'trial', 'map', 'ad', 'accuracy',
    'final_loss', 'epochs', 'status', 'seed'
]


@dataclass
class EvalReport:
    """Embedding quality metrics"""
    map_score: float
    ad_score: float
    per_node_ap: List[float] = field(default_factory=list)
    config_echo: Dict[str, Any] = field(default_factory=dict)
    excluded_pairs: int = 0


@dataclass
class PredictionResult:
    """k-NN label prediction on the manifold"""
    predictions: Dict[int, int]
    accuracy: Optional[float]


@dataclass
class ExperimentRow:
    """One (missing fraction, holdout fraction, trial) outcome"""
    missing_index: int
    holdout_index: int
    missing_fraction: float
    holdout_fraction: float
    trial: int
    seed: int
    status: RunStatus
    map: float = float('nan')
    ad: float = float('nan')
    accuracy: float = float('nan')
    final_loss: float = float('nan')
    epochs: int = 0
    message: Optional[str] = None

    @property
    def sortKey(self):
        return (self.missing_index, self.holdout_index, self.trial)

    def asRecord(self) -> Dict[str, Any]:
        return {
            'missing_fraction': self.missing_fraction,
            'holdout_fraction': self.holdout_fraction,
            'trial': self.trial,
            'map': self.map,
            'ad': self.ad,
            'accuracy': self.accuracy,
            'final_loss': self.final_loss,
            'epochs': self.epochs,
            'status': self.status.value,
            'seed': self.seed,
        }


@dataclass
class CalibrationRow:
    """Semimetric vs. oracle geodesic length for one point pair"""
    pair_id: int
    chord: float
    semimetric: float
    oracle_length: float
    ratio: float
    converged: bool
    degenerate: bool

    @classmethod
    def build(cls, pairId: int, chord: float, semimetric: float, oracleLength: float,
              converged: bool) -> 'CalibrationRow':
        degenerate = semimetric == 0.0
        ratio = float('nan') if degenerate else oracleLength / semimetric
        return cls(pairId, chord, semimetric, oracleLength, ratio, converged, degenerate)
