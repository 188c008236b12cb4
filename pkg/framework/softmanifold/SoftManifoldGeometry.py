"""
Geometry of the soft manifold: the open unit ball whose metric degenerates
towards the boundary through the weight r(u) = (1 - |u|^2) / 2

Distances inside the ball are approximated by the semimetric

    d(u1, u2) = |u1 - u2| / (sqrt|u1 - u2| + sqrt r(u1) + sqrt r(u2))

which behaves like the chord near the centre and like sqrt|u1 - u2| near a
shared boundary point. Array functions accept stacked points along leading axes.
"""
from typing import Tuple, Union

import numpy as np
from scipy.spatial.distance import pdist, squareform

from framework.models.ManifoldModels import GeodesicCurve, ManifoldPoint, TransformState

PointLike = Union[ManifoldPoint, np.ndarray, list, tuple]


def r(u: PointLike) -> Union[float, np.ndarray]:
    """Half the squared distance-to-boundary factor, (1 - |u|^2) / 2, never below 0"""
    u = np.asarray(u, dtype=float)
    value = np.maximum(0.5 * (1.0 - np.sum(u * u, axis=-1)), 0.0)
    return float(value) if value.ndim == 0 else value


def semimetricDistance(u1: PointLike, u2: PointLike) -> Union[float, np.ndarray]:
    """
    Semimetric distance between points of the closed ball

    Args:
        u1, u2: Points (or stacks of points with matching leading shape)

    Returns:
        Distance, 0 exactly when the points coincide
    """
    u1 = np.asarray(u1, dtype=float)
    u2 = np.asarray(u2, dtype=float)
    chord = np.linalg.norm(u1 - u2, axis=-1)
    denominator = np.sqrt(chord) + np.sqrt(r(u1)) + np.sqrt(r(u2))
    with np.errstate(divide='ignore', invalid='ignore'):
        value = np.where(chord > 0.0, chord / denominator, 0.0)
    return float(value) if value.ndim == 0 else value


def pairwiseSemimetric(positions: np.ndarray) -> np.ndarray:
    """N x N symmetric matrix of semimetric distances with a zero diagonal"""
    positions = np.asarray(positions, dtype=float)
    chord = squareform(pdist(positions))
    rootR = np.sqrt(r(positions))
    denominator = np.sqrt(chord) + rootR[:, None] + rootR[None, :]
    with np.errstate(divide='ignore', invalid='ignore'):
        return np.where(chord > 0.0, chord / denominator, 0.0)


def semimetricGradient(u1: np.ndarray, u2: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Gradients of the semimetric with respect to both endpoints

    Coincident endpoints get a zero gradient (the distance is not differentiable there).

    Args:
        u1, u2: Stacks of interior points, shape (..., dim)

    Returns:
        Tuple[np.ndarray, np.ndarray]: d/du1 and d/du2, each shaped like the inputs
    """
    delta = u1 - u2
    chord = np.linalg.norm(delta, axis=-1)
    rootChord = np.sqrt(chord)
    root1 = np.sqrt(r(u1))
    root2 = np.sqrt(r(u2))
    total = rootChord + root1 + root2

    safeChord = np.where(chord > 0.0, chord, 1.0)
    direction = delta / safeChord[..., None]
    along = ((total - 0.5 * rootChord) / total ** 2)[..., None] * direction
    # zero only on the boundary itself, which the optimizer never reaches
    radial1 = (chord / (2.0 * np.maximum(root1, 1e-300) * total ** 2))[..., None] * u1
    radial2 = (chord / (2.0 * np.maximum(root2, 1e-300) * total ** 2))[..., None] * u2

    moving = (chord > 0.0)[..., None]
    grad1 = np.where(moving, along + radial1, 0.0)
    grad2 = np.where(moving, -along + radial2, 0.0)
    return grad1, grad2


def changeOfVariables(x: np.ndarray, sOverV: float) -> ManifoldPoint:
    """
    Map a feature vector into the unit ball: u = x / sqrt(2 s/|v| + |x|^2)

    Args:
        x: Feature vector
        sOverV: Non-negative proxy for s(x, t) / |v(x, K)|

    Returns:
        ManifoldPoint: Image of x, strictly inside the ball when sOverV > 0
    """
    x = np.asarray(x, dtype=float)
    if sOverV < 0:
        raise ValueError(f"s_over_v must be non-negative, got {sOverV}")
    scale = 2.0 * sOverV + float(np.dot(x, x))
    if scale <= 0.0:
        raise ValueError("change of variables undefined for x = 0 with s_over_v = 0")
    return ManifoldPoint(x / np.sqrt(scale))


def yCoordinate(x: np.ndarray, sOverV: float) -> float:
    """Radial deviation y = sqrt(2 s/|v| + |x|^2) - 1 (0 on the half-sphere)"""
    x = np.asarray(x, dtype=float)
    return float(np.sqrt(2.0 * sOverV + np.dot(x, x)) - 1.0)


def transformState(x: np.ndarray, sOverV: float) -> TransformState:
    return TransformState(x=np.asarray(x, dtype=float), s_over_v=float(sOverV), y=yCoordinate(x, sOverV))


def hypocycloid(rho: float, t: Union[float, np.ndarray]) -> Tuple[np.ndarray, np.ndarray]:
    """
    Trace of a point on a circle of radius rho rolling inside the unit circle

    These curves solve the geodesic equations of the soft-manifold metric in
    the plane; rho = 1/2 degenerates to the diameter.

    Args:
        rho: Rolling radius in (0, 1/2]
        t: Curve parameter (scalar or array)

    Returns:
        Tuple[np.ndarray, np.ndarray]: (w1, w2)
    """
    if not 0.0 < rho <= 0.5:
        raise ValueError(f"rho must lie in (0, 1/2], got {rho}")
    t = np.asarray(t, dtype=float)
    slow = t * np.sqrt(rho / (1.0 - rho))
    fast = t * np.sqrt((1.0 - rho) / rho)
    w1 = (1.0 - rho) * np.cos(slow) + rho * np.cos(fast)
    w2 = (1.0 - rho) * np.sin(slow) - rho * np.sin(fast)
    return w1, w2


def curveLength(samples: np.ndarray) -> float:
    """Metric length sum |dw| / sqrt(1 - |midpoint|^2) of a sampled planar curve"""
    samples = np.asarray(samples, dtype=float)
    steps = np.diff(samples, axis=0)
    midpoints = 0.5 * (samples[1:] + samples[:-1])
    weight = np.sqrt(np.maximum(1.0 - np.sum(midpoints ** 2, axis=1), 1e-300))
    return float(np.sum(np.linalg.norm(steps, axis=1) / weight))


def sampleHypocycloid(rho: float, tGrid: np.ndarray) -> GeodesicCurve:
    w1, w2 = hypocycloid(rho, tGrid)
    samples = np.column_stack([w1, w2])
    return GeodesicCurve(rho=rho, samples=samples, length=curveLength(samples))


def cuspPeriod(rho: float) -> float:
    """Parameter spacing between consecutive boundary cusps of the hypocycloid"""
    return 2.0 * np.pi * np.sqrt(rho * (1.0 - rho))
