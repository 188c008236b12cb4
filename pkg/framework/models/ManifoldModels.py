from dataclasses import dataclass, field
from typing import Optional

import numpy as np


@dataclass
class ManifoldPoint:
    """A point strictly inside the open unit ball"""
    coordinates: np.ndarray

    def __post_init__(self):
        self.coordinates = np.asarray(self.coordinates, dtype=float)
        if not np.all(np.isfinite(self.coordinates)):
            raise ValueError("manifold point coordinates must be finite")
        if np.linalg.norm(self.coordinates) >= 1.0:
            raise ValueError("manifold point must lie strictly inside the unit ball")

    def __array__(self, dtype=None):
        return self.coordinates if dtype is None else self.coordinates.astype(dtype)

    @property
    def dim(self) -> int:
        return int(self.coordinates.shape[0])


@dataclass
class TransformState:
    """Feature vector, its s/|v| proxy and the radial deviation y"""
    x: np.ndarray
    s_over_v: float
    y: float


@dataclass
class GeodesicCurve:
    """Sampled planar curve (hypocycloid trace or discrete geodesic) and its metric length"""
    rho: Optional[float]
    samples: np.ndarray
    length: float


@dataclass
class GeodesicResult:
    """Outcome of the variational geodesic-length oracle"""
    length: float
    energy: float
    iterations: int
    converged: bool
    curve: GeodesicCurve = field(repr=False, default=None)
