"""
Run configuration models

A run is described by one JSON file validated against RunConfig. The file
must declare "config_version": 1; unknown keys are rejected. Example:

    {
      "config_version": 1,
      "input": {"synthetic": {"n_nodes": 50, "n_features": 10, "n_classes": 3,
                              "noise": 0.05, "seed": 1}},
      "graph": {"k": 5, "base_conductivity": 1.0, "b0": 1.0,
                "distance_transform": "neg_log"},
      "embed": {"dim": 2, "epochs": 500, "lr": 0.01, "seed": 0},
      "eval": {"k_vote": 5},
      "experiment": {"missing_fractions": [0.0, 0.5],
                     "holdout_fractions": [0.2], "trials": 20},
      "output_dir": "output"
    }

CLI flags (--seed, --threads, --out) are applied on top with applyOverrides().
"""
import json
import os
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from config.SoftManifoldEnums import DistanceTransform, InitStrategy, PairScope, TransitionKernel, VelocitySign
from logs.logger import get_logger
from utils.constants import (
    CONFIG_VERSION, DEFAULT_EPS_D, DEFAULT_EPS_G, DEFAULT_K_VOTE, DEFAULT_KAPPA, FD_STEP
)
from utils.exceptions import ConfigError

logger = get_logger(__name__)


class _StrictModel(BaseModel):
    model_config = ConfigDict(extra='forbid')


class SyntheticInputConfig(_StrictModel):
    """Parameters of the Gaussian-cluster generator"""
    n_nodes: int = Field(50, ge=2)
    n_features: int = Field(10, ge=1)
    n_classes: int = Field(3, ge=1)
    noise: float = Field(0.05, ge=0.0)
    seed: int = Field(1, ge=0)

    @model_validator(mode='after')
    def checkClassCount(self) -> 'SyntheticInputConfig':
        if self.n_classes > self.n_nodes:
            raise ValueError(f"n_classes ({self.n_classes}) exceeds n_nodes ({self.n_nodes})")
        return self


class InputConfig(_StrictModel):
    """Feature source: a CSV file or the synthetic generator"""
    path: Optional[str] = None
    has_labels: bool = False
    has_header: bool = False
    synthetic: Optional[SyntheticInputConfig] = None

    @model_validator(mode='after')
    def checkSource(self) -> 'InputConfig':
        if (self.path is None) == (self.synthetic is None):
            raise ValueError("input needs exactly one of 'path' or 'synthetic'")
        if self.path is not None and not os.path.isfile(self.path):
            raise ValueError(f"input path does not exist: {self.path}")
        return self


class GraphConfig(_StrictModel):
    """Neighborhood and fluid-graph construction"""
    k: int = Field(5, ge=1)
    base_conductivity: float = Field(1.0, gt=0.0)
    b0: float = Field(1.0, gt=0.0)
    distance_transform: DistanceTransform = DistanceTransform.LITERAL
    kernel: TransitionKernel = TransitionKernel.FLUID
    velocity_sign: VelocitySign = VelocitySign.MAGNITUDE


class EmbedConfig(_StrictModel):
    """Hyperparameters of the soft-manifold embedding"""
    dim: int = Field(2, ge=2)
    kappa: float = Field(DEFAULT_KAPPA, ge=0.0)
    eps_d: float = Field(DEFAULT_EPS_D, gt=0.0)
    eps_g: float = Field(DEFAULT_EPS_G, gt=0.0)
    lr: float = Field(0.01, gt=0.0)
    lr_decay: float = Field(0.0, ge=0.0)
    epochs: int = Field(500, ge=0)
    batch_pairs: int = Field(0, ge=0)  # 0 = full sum over pairs
    seed: int = Field(0, ge=0)
    init: InitStrategy = InitStrategy.CHANGE_OF_VARIABLES
    pair_scope: PairScope = PairScope.ALL_PAIRS
    analytic_gradients: bool = True
    fd_step: float = Field(FD_STEP, gt=0.0)
    log_interval: int = Field(50, ge=1)
    graph_scale: Optional[float] = Field(None, gt=0.0)  # None = fit the graph diameter to the ball


class EvalConfig(_StrictModel):
    k_vote: int = Field(DEFAULT_K_VOTE, ge=1)


class ExperimentGrid(_StrictModel):
    """Missing-data experiment grid; every cell runs `trials` seeded repetitions"""
    missing_fractions: List[float] = Field(default_factory=lambda: [0.0])
    holdout_fractions: List[float] = Field(default_factory=lambda: [0.0])
    trials: int = Field(100, ge=1)
    base_seed: int = Field(0, ge=0)

    @field_validator('missing_fractions', 'holdout_fractions')
    @classmethod
    def checkFractions(cls, values: List[float]) -> List[float]:
        if not values:
            raise ValueError("fraction list must not be empty")
        for value in values:
            if not 0.0 <= value < 1.0:
                raise ValueError(f"fraction {value} outside [0, 1)")
        if list(values) != sorted(values):
            raise ValueError("fractions must be sorted ascending")
        return values


class RunConfig(_StrictModel):
    """Top-level run description"""
    config_version: int
    input: InputConfig
    graph: GraphConfig = Field(default_factory=GraphConfig)
    embed: EmbedConfig = Field(default_factory=EmbedConfig)
    eval: EvalConfig = Field(default_factory=EvalConfig)
    experiment: Optional[ExperimentGrid] = None
    output_dir: str = "output"
    threads: int = Field(1, ge=1)

    @field_validator('config_version')
    @classmethod
    def checkVersion(cls, value: int) -> int:
        if value != CONFIG_VERSION:
            raise ValueError(f"unsupported config_version {value}, expected {CONFIG_VERSION}")
        return value


def loadRunConfig(path: str) -> RunConfig:
    """
    Read and validate a run configuration file

    Args:
        path: JSON config file

    Returns:
        RunConfig: Validated configuration

    Raises:
        ConfigError: File missing, not JSON, or failing validation
    """
    try:
        with open(path, 'r', encoding='utf-8') as handle:
            text = handle.read()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e

    try:
        config = RunConfig.model_validate(json.loads(text))
    except json.JSONDecodeError as e:
        raise ConfigError(f"config {path} is not valid JSON: {e}") from e
    except ValidationError as e:
        raise ConfigError(f"invalid config {path}: {e}") from e

    logger.info(f"Loaded run config from {path}")
    return config


def applyOverrides(config: RunConfig, seed: Optional[int] = None, threads: Optional[int] = None,
                   outputDir: Optional[str] = None) -> RunConfig:
    """Apply CLI flag values on top of a loaded config (flags win)"""
    if seed is not None and seed < 0:
        raise ConfigError("--seed must be non-negative")
    if threads is not None and threads < 1:
        raise ConfigError("--threads must be at least 1")

    updates = {}
    if seed is not None:
        updates['embed'] = config.embed.model_copy(update={'seed': seed})
        if config.experiment is not None:
            updates['experiment'] = config.experiment.model_copy(update={'base_seed': seed})
    if threads is not None:
        updates['threads'] = threads
    if outputDir is not None:
        updates['output_dir'] = outputDir
    return config.model_copy(update=updates)
