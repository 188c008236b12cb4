"""
CSV ingestion for feature matrices with missing entries

Empty cells mark missing values. With has_labels the last column holds the
class label (an empty label cell means "unknown", stored as -1).
"""
from typing import List, Optional

import numpy as np
import pandas as pd

from framework.models.DatasetModels import FeatureMatrix
from logs.logger import get_logger
from utils.exceptions import DataValidationError

logger = get_logger(__name__)


def loadCsv(path: str, hasLabels: bool = False, hasHeader: bool = False) -> FeatureMatrix:
    """
    Load a feature CSV and min-max scale the observed values

    Args:
        path: CSV file path
        hasLabels: Whether the last column is a class label
        hasHeader: Whether the first row is a header

    Returns:
        FeatureMatrix: Scaled features with the observation mask set from non-empty cells

    Raises:
        DataValidationError: Malformed rows, non-numeric cells, or all-missing rows
    """
    frame = _readFrame(path)
    if hasHeader:
        frame = frame.iloc[1:].reset_index(drop=True)
    if frame.empty:
        raise DataValidationError(f"{path} contains no data rows")

    # short rows come back padded with NaN; empty cells stay ''
    width = frame.shape[1]
    shortRows = np.flatnonzero(frame.isna().any(axis=1).to_numpy())
    if shortRows.size:
        lineNo = int(shortRows[0]) + (2 if hasHeader else 1)
        present = int(frame.iloc[shortRows[0]].notna().sum())
        raise DataValidationError(f"{path}: row {lineNo} has {present} columns, expected {width}")

    labels = None
    if hasLabels:
        if width < 2:
            raise DataValidationError(f"{path}: a labeled file needs at least one feature column")
        labels = _parseLabels(frame.iloc[:, -1].tolist(), path)
        frame = frame.iloc[:, :-1]

    stripped = frame.apply(lambda column: column.str.strip())
    observed = (stripped != '').to_numpy()
    try:
        numeric = stripped.replace('', np.nan).apply(pd.to_numeric, errors='raise')
    except (ValueError, TypeError) as e:
        raise DataValidationError(f"{path}: non-numeric observed cell ({e})") from e

    values = numeric.to_numpy(dtype=float)
    if not np.all(np.isfinite(values[observed])):
        raise DataValidationError(f"{path}: observed cells must be finite numbers")

    emptyRows = np.flatnonzero(~observed.any(axis=1))
    if emptyRows.size:
        raise DataValidationError(f"{path}: rows with every feature missing: {emptyRows.tolist()}")

    fm = FeatureMatrix(
        values=scaleFeatures(np.where(observed, values, 0.0), observed),
        observed=observed,
        row_ids=[str(index) for index in range(len(frame))],
        labels=labels
    )
    fm.validate()
    logger.info(f"Loaded {fm.n_nodes}x{fm.n_features} feature matrix from {path} "
                f"({observed.size - fm.observedCount} missing cells)")
    return fm


def scaleFeatures(values: np.ndarray, observed: np.ndarray) -> np.ndarray:
    """
    Min-max scale every column to [0, 1] using observed entries only

    Constant columns map to 0; unobserved entries are set to 0.

    Args:
        values: N x n raw values
        observed: N x n observation mask

    Returns:
        np.ndarray: Scaled copy of values
    """
    scaled = np.zeros_like(values, dtype=float)
    for column in range(values.shape[1]):
        mask = observed[:, column]
        if not mask.any():
            continue
        columnValues = values[mask, column]
        low, high = columnValues.min(), columnValues.max()
        if high > low:
            scaled[mask, column] = (columnValues - low) / (high - low)
    return scaled


def _readFrame(path: str) -> pd.DataFrame:
    """Every cell as text; a row longer than the first is a parse error"""
    try:
        return pd.read_csv(path, header=None, dtype=str, keep_default_na=False, skip_blank_lines=True)
    except OSError as e:
        raise DataValidationError(f"cannot read {path}: {e}") from e
    except pd.errors.EmptyDataError as e:
        raise DataValidationError(f"{path} contains no data rows") from e
    except pd.errors.ParserError as e:
        raise DataValidationError(f"{path}: ragged rows ({e})") from e


def _parseLabels(cells: List[str], path: str) -> np.ndarray:
    """Integer labels stay as given; any other label text is coded by sorted order"""
    texts = [str(cell).strip() for cell in cells]
    present = [text for text in texts if text]
    numericLabels = _asIntegers(present)
    if numericLabels is not None:
        lookup = dict(zip(present, numericLabels))
    else:
        codes, uniques = pd.factorize(pd.Series(present), sort=True)
        lookup = dict(zip(present, codes.tolist()))
        logger.info(f"{path}: coded {len(uniques)} text labels by sorted order")
    labels = np.array([lookup[text] if text else -1 for text in texts], dtype=int)
    if np.any(labels[labels != -1] < 0):
        raise DataValidationError(f"{path}: labels must be non-negative integers")
    return labels


def _asIntegers(texts: List[str]) -> Optional[List[int]]:
    try:
        return [int(text) for text in texts]
    except ValueError:
        return None
