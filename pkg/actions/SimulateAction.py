from typing import Dict

from config.RunConfig import RunConfig
from framework.dataset.FeatureSource import loadFeatureMatrix
from framework.evaluation.ExperimentRunner import runExperiment
from logs.logger import get_logger
from storage.ResultsHandler import ResultsHandler
from utils.exceptions import ConfigError

logger = get_logger(__name__)


class SimulateAction:
    """Runs the missing-data experiment grid and writes results.csv and aggregates.csv"""

    def __init__(self, config: RunConfig):
        if config.experiment is None:
            raise ConfigError("simulate needs an 'experiment' section in the config")
        self.config = config
        self.results = ResultsHandler(config.output_dir)

    def execute(self) -> Dict[str, str]:
        fm = loadFeatureMatrix(self.config.input)
        rows, aggregates = runExperiment(fm, self.config)
        return {
            'results': self.results.saveResults(rows),
            'aggregates': self.results.saveAggregates(aggregates),
        }
