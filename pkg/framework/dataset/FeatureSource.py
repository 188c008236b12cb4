from config.RunConfig import InputConfig
from framework.dataset.SyntheticDataGenerator import generateSynthetic
from framework.models.DatasetModels import FeatureMatrix
from parsers.FeatureCSVParser import loadCsv


def loadFeatureMatrix(inputConfig: InputConfig) -> FeatureMatrix:
    """Materialize the configured input (CSV file or synthetic generator)"""
    if inputConfig.path is not None:
        return loadCsv(inputConfig.path, hasLabels=inputConfig.has_labels, hasHeader=inputConfig.has_header)
    synthetic = inputConfig.synthetic
    return generateSynthetic(
        nNodes=synthetic.n_nodes,
        nFeatures=synthetic.n_features,
        nClasses=synthetic.n_classes,
        noise=synthetic.noise,
        seed=synthetic.seed
    )
