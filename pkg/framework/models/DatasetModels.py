from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from utils.exceptions import DataValidationError


@dataclass
class FeatureMatrix:
    """
    N x n feature values with an explicit observation mask

    Unobserved entries carry no meaning; every consumer reads values through
    `observed`. Labels use -1 for "unknown".
    """
    values: np.ndarray
    observed: np.ndarray
    row_ids: List[str]
    labels: Optional[np.ndarray] = None

    @property
    def n_nodes(self) -> int:
        return int(self.values.shape[0])

    @property
    def n_features(self) -> int:
        return int(self.values.shape[1])

    @property
    def observedCount(self) -> int:
        return int(self.observed.sum())

    def validate(self) -> None:
        """Check the matrix invariants, raising DataValidationError on the first violation"""
        if self.values.ndim != 2 or self.values.shape != self.observed.shape:
            raise DataValidationError("values and observed mask must be matching 2-D arrays")
        if len(self.row_ids) != self.n_nodes:
            raise DataValidationError("row_ids length does not match the number of rows")
        if not np.all(np.isfinite(self.values[self.observed])):
            raise DataValidationError("observed values must be finite")
        emptyRows = np.flatnonzero(~self.observed.any(axis=1))
        if emptyRows.size:
            raise DataValidationError(f"rows without any observed feature: {emptyRows.tolist()}")
        if self.labels is not None and len(self.labels) != self.n_nodes:
            raise DataValidationError("labels length does not match the number of rows")

    def subset(self, rows: np.ndarray) -> 'FeatureMatrix':
        """Copy of the given rows, in the given order, ids and labels included"""
        rows = np.asarray(rows, dtype=int)
        return FeatureMatrix(
            values=self.values[rows].copy(),
            observed=self.observed[rows].copy(),
            row_ids=[self.row_ids[i] for i in rows],
            labels=None if self.labels is None else self.labels[rows].copy()
        )

    def withMask(self, observed: np.ndarray) -> 'FeatureMatrix':
        """Copy of this matrix carrying a different observation mask"""
        return FeatureMatrix(
            values=self.values.copy(),
            observed=observed.copy(),
            row_ids=list(self.row_ids),
            labels=None if self.labels is None else self.labels.copy()
        )


@dataclass
class ConductivityTensor:
    """Per-edge, per-feature conductivities K_ij: (only materialized edges are stored)"""
    entries: Dict[Tuple[int, int], np.ndarray]
    n_features: int
    symmetric: bool = False

    def edge(self, i: int, j: int) -> np.ndarray:
        try:
            return self.entries[(i, j)]
        except KeyError:
            raise ValueError(f"edge ({i}, {j}) is not materialized in the conductivity tensor")


@dataclass
class Neighborhoods:
    """Ordered neighbor lists N(i)"""
    adjacency: Dict[int, List[int]]
    k: int
    truncated: List[int] = field(default_factory=list)

    @property
    def n_nodes(self) -> int:
        return len(self.adjacency)

    def neighbors(self, i: int) -> List[int]:
        return self.adjacency[i]

    def edges(self) -> Iterator[Tuple[int, int]]:
        """Directed edges (i, j), j in N(i), in node then neighbor order"""
        for i in sorted(self.adjacency):
            for j in self.adjacency[i]:
                yield i, j

    def isSymmetric(self) -> bool:
        return all(i in self.adjacency.get(j, ()) for i, j in self.edges())
