"""
Local neighborhood areas on the graph and on the manifold

Around node i the neighbors are laid out at equal angles theta_i = 2 pi / |N(i)|,
in ascending order of graph distance. On the graph side consecutive neighbors
span triangles; on the manifold side they span spherical sectors whose polar
angles are the semimetric distances to i. Both areas are normalized by the
largest area the neighborhood could span, making them comparable.
"""
from typing import List

import numpy as np

from framework.models.EmbeddingModels import NeighborhoodGeometry
from framework.models.GraphModels import FluidGraph
from framework.softmanifold.SoftManifoldGeometry import semimetricDistance


def triangleArea(d1: float, d2: float, theta: float) -> float:
    """Area of the triangle with sides d1, d2 enclosing angle theta"""
    if d1 < 0 or d2 < 0:
        raise ValueError("triangle sides must be non-negative")
    return 0.5 * d1 * d2 * np.sin(theta)


def sphericalSectorArea(theta: float, phiA: float, phiB: float) -> float:
    """Unit-sphere sector of azimuth width theta between polar angles phiA and phiB"""
    return theta * abs(np.cos(phiA) - np.cos(phiB))


def maxSectorArea(phiStar: float) -> float:
    """Spherical cap of polar angle phi*: 2 pi (1 - cos phi*)"""
    return 2.0 * np.pi * (1.0 - np.cos(phiStar))


def orderedNeighbors(i: int, fg: FluidGraph) -> List[int]:
    """N(i) sorted ascending by graph distance, ties by node index"""
    neighbors = np.asarray(fg.nbhd.neighbors(i))
    order = np.lexsort((neighbors, fg.d_g_sq[i, neighbors]))
    return [int(j) for j in neighbors[order]]


def graphNeighborhoodArea(i: int, fg: FluidGraph) -> float:
    """
    Normalized triangle-fan area of N(i) on the graph

    The fan sums triangles between cyclically consecutive neighbors; the
    maximum places every neighbor at d_G*. Both share the sin(theta) factor,
    so two neighbors (theta = pi) still give a finite ratio.

    Args:
        i: Node
        fg: Fluid graph

    Returns:
        float: Area ratio in [0, 1]; 0 for a single neighbor
    """
    neighbors = orderedNeighbors(i, fg)
    count = len(neighbors)
    if count < 2 or fg.d_g_star <= 0.0:
        return 0.0
    theta = 2.0 * np.pi / count
    distances = np.sqrt(fg.d_g_sq[i, neighbors])
    fan = sum(triangleArea(a, b, theta) for a, b in zip(distances, np.roll(distances, -1)))
    fullFan = count * triangleArea(fg.d_g_star, fg.d_g_star, theta)
    return float(np.clip(fan / fullFan, 0.0, 1.0))


def manifoldNeighborhoodArea(i: int, positions: np.ndarray, fg: FluidGraph, phiStar: float) -> float:
    """
    Normalized spherical-sector area of N(i) on the manifold

    Args:
        i: Node
        positions: N x dim embedding
        fg: Fluid graph (supplies the neighbor order)
        phiStar: Polar angle of the largest manifold distance, in (0, pi]

    Returns:
        float: Sector area over the cap area of phi*; 0 for a single neighbor
    """
    if not 0.0 < phiStar <= np.pi:
        raise ValueError(f"phi_star must lie in (0, pi], got {phiStar}")
    neighbors = orderedNeighbors(i, fg)
    count = len(neighbors)
    if count < 2:
        return 0.0
    theta = 2.0 * np.pi / count
    polar = np.clip(semimetricDistance(positions[i][None, :], positions[neighbors]), 0.0, np.pi)
    cosines = np.cos(polar)
    sectors = theta * np.abs(cosines - np.roll(cosines, -1))
    return float(np.sum(sectors) / maxSectorArea(phiStar))


def neighborhoodGeometry(i: int, positions: np.ndarray, fg: FluidGraph, phiStar: float) -> NeighborhoodGeometry:
    neighbors = orderedNeighbors(i, fg)
    return NeighborhoodGeometry(
        node=i,
        theta=2.0 * np.pi / len(neighbors),
        graph_area_norm=graphNeighborhoodArea(i, fg),
        manifold_area_norm=manifoldNeighborhoodArea(i, positions, fg, phiStar),
        neighbors=neighbors
    )
