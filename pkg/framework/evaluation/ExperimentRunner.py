"""
Missing-data experiment harness

Every (missing fraction, holdout fraction, trial) cell hides a seeded share
of the observed features and sets aside a seeded share of the labeled nodes.
The rest are turned into a fluid graph, embedded and scored; the held-out
nodes are then placed against that fixed embedding and classified. Cells
are independent: each derives its own seed from the grid's base seed and
its indices, so any cell can be re-run alone.
"""
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd

from config.RunConfig import RunConfig
from config.SoftManifoldEnums import RunStatus
from framework.dataset.MissingDataHandler import applyMissingMask
from framework.embedding.HeldOutPlacement import placeHeldOutNodes
from framework.embedding.SoftManifoldEmbedder import SoftManifoldEmbedder
from framework.evaluation.EmbeddingMetrics import averageDistortion, meanAveragePrecision
from framework.evaluation.NodePredictor import UNKNOWN_LABEL, predictLabels
from framework.fluidgraph.FluidGraphBuilder import buildFluidGraphFromFeatures
from framework.models.DatasetModels import FeatureMatrix
from framework.models.EmbeddingModels import EmbeddingState
from framework.models.EvaluationModels import RESULT_COLUMNS, ExperimentRow, PredictionResult
from framework.models.GraphModels import FluidGraph
from logs.logger import get_logger
from scheduler.ExperimentJobRunner import ExperimentJob, runJobs
from utils.exceptions import ConfigError

logger = get_logger(__name__)

AGGREGATE_METRICS = ('map', 'ad', 'accuracy', 'final_loss')


def deriveCellSeed(baseSeed: int, missingIndex: int, holdoutIndex: int, trial: int) -> int:
    """Seed of one cell-trial, a hash of the base seed and the cell indices"""
    entropy = np.random.SeedSequence([baseSeed, missingIndex, holdoutIndex, trial])
    return int(entropy.generate_state(1)[0])


def holdoutNodes(labels: Optional[np.ndarray], fraction: float, seed: int) -> np.ndarray:
    """floor(fraction * labeled) seeded labeled nodes, sorted ascending"""
    if labels is None:
        return np.zeros(0, dtype=int)
    labeled = np.flatnonzero(labels != UNKNOWN_LABEL)
    count = int(np.floor(fraction * labeled.size + 1e-9))
    if not count:
        return np.zeros(0, dtype=int)
    rng = np.random.default_rng(np.random.SeedSequence([seed, 1]))
    return np.sort(rng.choice(labeled, size=count, replace=False))


def predictHeldOut(masked: FeatureMatrix, embeddedRows: np.ndarray, heldOut: np.ndarray, state: EmbeddingState,
                   fg: FluidGraph, config: RunConfig) -> PredictionResult:
    """
    Place held-out rows against the fixed embedding and vote their labels

    Only the embedded labeled nodes vote; only held-out nodes are scored.
    """
    placed = placeHeldOutNodes(masked, embeddedRows, heldOut, state, fg, config.graph)
    positions = np.vstack([state.positions, placed])
    embeddedLabels = masked.labels[embeddedRows]
    voterLabels = np.concatenate([embeddedLabels, np.full(heldOut.size, UNKNOWN_LABEL)])
    truth = np.concatenate([np.full(embeddedRows.size, UNKNOWN_LABEL), masked.labels[heldOut]])
    return predictLabels(positions, voterLabels, config.eval.k_vote, trueLabels=truth)


def runCell(fm: FeatureMatrix, config: RunConfig, missingIndex: int, holdoutIndex: int,
            trial: int) -> ExperimentRow:
    """
    Run one cell-trial; failures are reported in the row, never raised

    Held-out nodes are left out of graph construction and embedding; they
    are placed against the finished embedding and then classified.

    Args:
        fm: Full feature matrix before masking
        config: Run configuration with an experiment grid
        missingIndex: Index into missing_fractions
        holdoutIndex: Index into holdout_fractions
        trial: Trial number

    Returns:
        ExperimentRow: Metrics and status of the cell-trial
    """
    grid = config.experiment
    missingFraction = grid.missing_fractions[missingIndex]
    holdoutFraction = grid.holdout_fractions[holdoutIndex]
    seed = deriveCellSeed(grid.base_seed, missingIndex, holdoutIndex, trial)
    row = ExperimentRow(
        missing_index=missingIndex, holdout_index=holdoutIndex,
        missing_fraction=missingFraction, holdout_fraction=holdoutFraction,
        trial=trial, seed=seed, status=RunStatus.OK
    )

    try:
        masked = applyMissingMask(fm, missingFraction, seed)
        heldOut = holdoutNodes(fm.labels, holdoutFraction, seed)
        embeddedRows = np.setdiff1d(np.arange(fm.n_nodes), heldOut)
        embedded = masked.subset(embeddedRows)
        _, _, fg = buildFluidGraphFromFeatures(embedded, config.graph)
        embedConfig = config.embed.model_copy(update={'seed': seed})
        state = SoftManifoldEmbedder(embedConfig).embed(embedded, fg)

        row.epochs = state.epoch
        row.final_loss = state.finalLoss
        row.map = meanAveragePrecision(state, fg)
        row.ad = averageDistortion(state, fg)
        if heldOut.size:
            prediction = predictHeldOut(masked, embeddedRows, heldOut, state, fg, config)
            if prediction.accuracy is not None:
                row.accuracy = prediction.accuracy
        if state.diagnostic:
            row.status = RunStatus.DIVERGED
            row.message = state.diagnostic
    except Exception as e:
        logger.error(f"Cell (missing={missingFraction}, holdout={holdoutFraction}, trial={trial}) failed: {e}")
        row.status = RunStatus.FAILED
        row.message = str(e)
    return row


def aggregateResults(rows: List[ExperimentRow], config: RunConfig) -> pd.DataFrame:
    """
    Per-cell mean and population variance of each metric over the OK trials

    Every grid cell gets a row; cells without a usable trial get NaN statistics.
    """
    grid = config.experiment
    usable = pd.DataFrame(
        [{'missing_index': row.missing_index, 'holdout_index': row.holdout_index,
          **{name: getattr(row, name) for name in AGGREGATE_METRICS}}
         for row in rows if row.status.isUsable],
        columns=['missing_index', 'holdout_index', *AGGREGATE_METRICS]
    )
    grouped = usable.groupby(['missing_index', 'holdout_index'])

    records = []
    for missingIndex, missingFraction in enumerate(grid.missing_fractions):
        for holdoutIndex, holdoutFraction in enumerate(grid.holdout_fractions):
            record = {
                'missing_index': missingIndex,
                'holdout_index': holdoutIndex,
                'missing_fraction': missingFraction,
                'holdout_fraction': holdoutFraction,
            }
            key = (missingIndex, holdoutIndex)
            cell = grouped.get_group(key) if key in grouped.groups else usable.iloc[0:0]
            record['trials_ok'] = len(cell)
            for name in AGGREGATE_METRICS:
                values = cell[name].to_numpy(dtype=float)
                values = values[np.isfinite(values)]
                record[f'{name}_mean'] = float(np.mean(values)) if values.size else float('nan')
                record[f'{name}_var'] = float(np.var(values, ddof=0)) if values.size else float('nan')
            records.append(record)
    return pd.DataFrame.from_records(records)


def resultsFrame(rows: List[ExperimentRow]) -> pd.DataFrame:
    return pd.DataFrame([row.asRecord() for row in rows], columns=RESULT_COLUMNS)


def runExperiment(fm: FeatureMatrix, config: RunConfig) -> Tuple[List[ExperimentRow], pd.DataFrame]:
    """
    Run the whole grid

    Args:
        fm: Feature matrix before masking
        config: Run configuration; its experiment grid must be set

    Returns:
        Tuple[List[ExperimentRow], pd.DataFrame]: Rows sorted by cell indices and trial, and the aggregates
    """
    grid = config.experiment
    if grid is None:
        raise ConfigError("simulate needs an 'experiment' section in the config")

    jobs = [
        ExperimentJob(
            key=(missingIndex, holdoutIndex, trial),
            run=lambda m=missingIndex, h=holdoutIndex, t=trial: runCell(fm, config, m, h, t)
        )
        for missingIndex in range(len(grid.missing_fractions))
        for holdoutIndex in range(len(grid.holdout_fractions))
        for trial in range(grid.trials)
    ]
    rows = sorted(runJobs(jobs, config.threads), key=lambda row: row.sortKey)

    failures = sum(1 for row in rows if not row.status.isUsable)
    logger.info(f"Experiment finished: {len(rows)} cell-trials, {failures} failed or diverged")
    return rows, aggregateResults(rows, config)
