"""
Separate regions of the ball for the connected components of a graph

A connected graph owns the whole ball. Otherwise the component centres sit
on a ring of radius 1/2 in the first two coordinates, and every component
is confined to a small ball around its centre. The regions are small enough
that any two points of one region are closer, in the semimetric, than any
two points of different regions, so no component crowds another's
neighborhoods. Components take their ring slot in order of their smallest
row id, which keeps the layout independent of node numbering.
"""
from dataclasses import dataclass
from typing import List

import numpy as np

from framework.softmanifold.SoftManifoldGeometry import semimetricDistance
from utils.constants import MAX_BALL_RADIUS, REGION_FILL, REGION_RING_RADIUS, REGION_SPREAD


@dataclass
class ComponentLayout:
    """Region centre per component and the common region radius"""
    labels: np.ndarray
    centres: np.ndarray
    radius: float

    @classmethod
    def build(cls, labels: np.ndarray, rowIds: List[str], dim: int) -> 'ComponentLayout':
        """
        Lay out one region per component

        Args:
            labels: Component index of every node
            rowIds: Row identifiers, used to order the components
            dim: Embedding dimension, at least 2

        Returns:
            ComponentLayout: Centres and radius of the regions
        """
        labels = np.asarray(labels, dtype=int)
        nComponents = int(labels.max()) + 1 if labels.size else 0
        centres = np.zeros((nComponents, dim))
        if nComponents <= 1:
            return cls(labels=labels, centres=centres, radius=MAX_BALL_RADIUS)

        smallestId = [min(rowIds[i] for i in np.flatnonzero(labels == c)) for c in range(nComponents)]
        slots = np.empty(nComponents, dtype=int)
        slots[sorted(range(nComponents), key=lambda c: smallestId[c])] = np.arange(nComponents)
        angles = 2.0 * np.pi * slots / nComponents
        centres[:, 0] = REGION_RING_RADIUS * np.cos(angles)
        centres[:, 1] = REGION_RING_RADIUS * np.sin(angles)
        radius = REGION_FILL * REGION_RING_RADIUS * np.sin(np.pi / nComponents)
        return cls(labels=labels, centres=centres, radius=float(radius))

    @property
    def nComponents(self) -> int:
        return int(self.centres.shape[0])

    @property
    def nodeCentres(self) -> np.ndarray:
        return self.centres[self.labels]

    def project(self, positions: np.ndarray) -> np.ndarray:
        """Pull every row radially back into its component's region"""
        centres = self.nodeCentres
        local = positions - centres
        norms = np.linalg.norm(local, axis=1)
        outside = norms > self.radius
        local[outside] *= (self.radius / norms[outside])[:, None]
        return centres + local

    def place(self, positions: np.ndarray) -> np.ndarray:
        """
        Move each component's starting layout into its region

        The layout is centred on the region and shrunk to REGION_SPREAD of the
        region radius; a single connected component keeps it unchanged.
        """
        if self.nComponents <= 1:
            return positions
        placed = np.empty_like(positions)
        for component in range(self.nComponents):
            members = np.flatnonzero(self.labels == component)
            local = positions[members] - positions[members].mean(axis=0)
            spread = float(np.linalg.norm(local, axis=1).max())
            if spread > 0.0:
                local *= REGION_SPREAD * self.radius / spread
            placed[members] = self.centres[component] + local
        return placed

    def reach(self) -> float:
        """Semimetric length of a region diameter shrunk to REGION_SPREAD"""
        centre = self.centres[0]
        norm = np.linalg.norm(centre)
        direction = centre / norm if norm > 0.0 else np.eye(centre.size)[0]
        offset = REGION_SPREAD * self.radius * direction
        return float(semimetricDistance(centre - offset, centre + offset))
