"""
Variational geodesic lengths on the soft manifold

Geodesics between two points lie in the plane through the origin spanned by
them. The oracle discretizes a curve in that plane as a polyline, minimizes
its energy

    E = sum |G_k+1 - G_k|^2 / ((1 - |m_k|^2) dt),   m_k = (G_k + G_k+1) / 2

by projected gradient descent from the straight chord traversed at
constant metric speed, and reports the metric length of the minimizer. It is slow and only used for calibration and tests.
"""
from typing import Tuple

import numpy as np
from scipy.integrate import cumulative_trapezoid

from framework.models.ManifoldModels import GeodesicCurve, GeodesicResult
from framework.softmanifold.SoftManifoldGeometry import PointLike, curveLength
from logs.logger import get_logger
from utils.constants import (
    GEODESIC_DISK_RADIUS, GEODESIC_MAX_ITERATIONS, GEODESIC_MIN_SEGMENTS, GEODESIC_PATIENCE, GEODESIC_SEGMENTS,
    GEODESIC_TOLERANCE
)

logger = get_logger(__name__)

_INITIAL_STEP = 1e-3
_FLAT_ACCEPTS = 3
_CHORD_GRID = 4097


def planeBasis(u1: np.ndarray, u2: np.ndarray) -> np.ndarray:
    """Orthonormal 2 x dim basis of a plane through the origin containing u1 and u2"""
    first = (u2 - u1) / np.linalg.norm(u2 - u1)
    offset = u1 - np.dot(u1, first) * first
    if np.linalg.norm(offset) > 1e-12:
        second = offset / np.linalg.norm(offset)
    else:
        # chord passes through the origin; any orthogonal direction spans a valid plane
        axis = np.zeros_like(first)
        axis[int(np.argmin(np.abs(first)))] = 1.0
        second = axis - np.dot(axis, first) * first
        second /= np.linalg.norm(second)
    return np.vstack([first, second])


def polylineEnergy(curve: np.ndarray, dt: float) -> float:
    steps = np.diff(curve, axis=0)
    midpoints = 0.5 * (curve[1:] + curve[:-1])
    weight = 1.0 - np.sum(midpoints ** 2, axis=1)
    return float(np.sum(np.sum(steps ** 2, axis=1) / (weight * dt)))


def polylineEnergyGradient(curve: np.ndarray, dt: float) -> np.ndarray:
    """Gradient of polylineEnergy with respect to every vertex"""
    steps = np.diff(curve, axis=0)
    midpoints = 0.5 * (curve[1:] + curve[:-1])
    weight = 1.0 - np.sum(midpoints ** 2, axis=1)
    stepSq = np.sum(steps ** 2, axis=1)

    stretch = 2.0 * steps / (weight * dt)[:, None]
    bend = (stepSq / (weight ** 2 * dt))[:, None] * midpoints

    gradient = np.zeros_like(curve)
    gradient[1:] += stretch + bend
    gradient[:-1] += -stretch + bend
    return gradient


def projectToDisk(curve: np.ndarray, radius: float = GEODESIC_DISK_RADIUS) -> np.ndarray:
    norms = np.linalg.norm(curve, axis=1)
    scale = np.where(norms > radius, radius / np.maximum(norms, 1e-300), 1.0)
    return curve * scale[:, None]


def constantSpeedChord(start: np.ndarray, end: np.ndarray, nSegments: int) -> np.ndarray:
    """
    Vertices on the straight chord spaced by equal metric length

    A curve's energy is lowest at constant metric speed, so starting here
    leaves the descent only the bending of the curve to resolve.
    """
    grid = np.linspace(0.0, 1.0, _CHORD_GRID)
    points = start + grid[:, None] * (end - start)
    density = np.linalg.norm(end - start) / np.sqrt(np.maximum(1.0 - np.sum(points ** 2, axis=1), 1e-300))
    arc = cumulative_trapezoid(density, grid, initial=0.0)
    targets = np.linspace(0.0, arc[-1], nSegments + 1)
    t = np.interp(targets, arc, grid)
    curve = start + t[:, None] * (end - start)
    curve[0], curve[-1] = start, end
    return curve


def _minimizeEnergy(start: np.ndarray, end: np.ndarray, nSegments: int, tolerance: float,
                    patience: int, maxIterations: int) -> Tuple[np.ndarray, float, int, bool]:
    dt = 1.0 / nSegments
    curve = constantSpeedChord(start, end, nSegments)
    energy = polylineEnergy(curve, dt)
    chord = np.linalg.norm(end - start)
    step = _INITIAL_STEP
    stalled = 0
    flat = 0

    for iteration in range(1, maxIterations + 1):
        gradient = polylineEnergyGradient(curve, dt)
        gradient[0] = 0.0
        gradient[-1] = 0.0
        # scale-free first-order measure: zero exactly at a stationary curve
        if np.linalg.norm(gradient) * chord <= tolerance * energy:
            return curve, energy, iteration, True

        candidate = projectToDisk(curve - step * gradient)
        candidate[0], candidate[-1] = start, end
        candidateEnergy = polylineEnergy(candidate, dt)

        if candidateEnergy < energy:
            decrease = energy - candidateEnergy
            curve, energy = candidate, candidateEnergy
            step *= 1.5
            stalled = 0
            # the step grows on each accept; several flat accepts in a row mean a minimum
            flat = flat + 1 if decrease <= tolerance * energy else 0
            if flat >= _FLAT_ACCEPTS:
                return curve, energy, iteration, True
        else:
            step *= 0.5
            stalled += 1
            if stalled >= patience:
                # no step helps any more; a flat last accept means we sit at the minimum
                return curve, energy, iteration, flat > 0

    return curve, energy, maxIterations, False


def geodesicLengthOracle(u1: PointLike, u2: PointLike, nSegments: int = GEODESIC_SEGMENTS,
                         tolerance: float = GEODESIC_TOLERANCE, patience: int = GEODESIC_PATIENCE,
                         maxIterations: int = GEODESIC_MAX_ITERATIONS) -> GeodesicResult:
    """
    Approximate the intrinsic distance between two interior points

    Args:
        u1, u2: Interior points of the same dimension
        nSegments: Polyline segments, at least 8
        tolerance: Relative energy decrease, and relative gradient norm, below which
            the descent has converged
        patience: Consecutive non-decreasing iterations before giving up
        maxIterations: Hard iteration cap

    Returns:
        GeodesicResult: Metric length of the best curve found and a convergence flag
    """
    if nSegments < GEODESIC_MIN_SEGMENTS:
        raise ValueError(f"n_segments must be at least {GEODESIC_MIN_SEGMENTS}, got {nSegments}")
    u1 = np.asarray(u1, dtype=float)
    u2 = np.asarray(u2, dtype=float)
    if u1.shape != u2.shape:
        raise ValueError(f"point dimensions differ: {u1.shape} vs {u2.shape}")
    if u1.ndim != 1 or u1.size < 2:
        raise ValueError("geodesic oracle needs points of dimension at least 2")

    if np.array_equal(u1, u2):
        samples = np.zeros((2, 2))
        return GeodesicResult(length=0.0, energy=0.0, iterations=0, converged=True,
                              curve=GeodesicCurve(rho=None, samples=samples, length=0.0))

    basis = planeBasis(u1, u2)
    start, end = basis @ u1, basis @ u2
    curve, energy, iterations, converged = _minimizeEnergy(
        start, end, nSegments, tolerance, patience, maxIterations
    )
    if not converged:
        logger.warning(f"Geodesic oracle stopped after {iterations} iterations without converging")

    length = curveLength(curve)
    return GeodesicResult(length=length, energy=energy, iterations=iterations, converged=converged,
                          curve=GeodesicCurve(rho=None, samples=curve, length=length))
