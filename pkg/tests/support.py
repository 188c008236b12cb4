"""
Builders shared by the test modules
"""
import json
import math
import os
from typing import Dict, List, Optional

import numpy as np

from config.SoftManifoldEnums import DistanceTransform
from framework.models.DatasetModels import FeatureMatrix, Neighborhoods
from framework.models.GraphModels import FluidGraph


def featureMatrix(values, observed=None, labels=None) -> FeatureMatrix:
    values = np.asarray(values, dtype=float)
    observed = np.ones_like(values, dtype=bool) if observed is None else np.asarray(observed, dtype=bool)
    return FeatureMatrix(
        values=np.where(observed, values, 0.0),
        observed=observed,
        row_ids=[str(index) for index in range(values.shape[0])],
        labels=None if labels is None else np.asarray(labels, dtype=int)
    )


def fluidGraph(adjacency: Dict[int, List[int]], dGSq: np.ndarray,
               transform: DistanceTransform = DistanceTransform.NEG_LOG) -> FluidGraph:
    """FluidGraph with hand-picked squared distances (probabilities are placeholders)"""
    dGSq = np.asarray(dGSq, dtype=float)
    nbhd = Neighborhoods(adjacency=adjacency, k=max(len(v) for v in adjacency.values()))
    offDiagonal = ~np.eye(dGSq.shape[0], dtype=bool) & np.isfinite(dGSq)
    return FluidGraph(
        n_nodes=dGSq.shape[0],
        nbhd=nbhd,
        p={edge: 0.5 for edge in nbhd.edges()},
        edge_d_sq={edge: float(dGSq[edge]) for edge in nbhd.edges()},
        d_g_sq=dGSq,
        d_g_star=float(np.sqrt(dGSq[offDiagonal].max())),
        transform=transform
    )


def randomBallPoints(rng: np.random.Generator, count: int, dim: int, radius: float) -> np.ndarray:
    directions = rng.standard_normal((count, dim))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    return directions * (radius * rng.uniform(0.0, 1.0, count) ** (1.0 / dim))[:, None]


def scalarSemimetric(u1, u2) -> float:
    """Plain-Python semimetric used as an independent oracle"""
    chord = math.sqrt(sum((a - b) ** 2 for a, b in zip(u1, u2)))
    if chord == 0.0:
        return 0.0
    r1 = 0.5 * (1.0 - sum(a * a for a in u1))
    r2 = 0.5 * (1.0 - sum(b * b for b in u2))
    return chord / (math.sqrt(chord) + math.sqrt(r1) + math.sqrt(r2))


def runConfigPayload(outputDir: str, nNodes: int = 12, epochs: int = 5, experiment: Optional[dict] = None,
                     **graph) -> dict:
    payload = {
        "config_version": 1,
        "input": {"synthetic": {"n_nodes": nNodes, "n_features": 4, "n_classes": 2, "noise": 0.05, "seed": 3}},
        "graph": {"k": 3, "distance_transform": "neg_log", **graph},
        "embed": {"dim": 2, "epochs": epochs, "lr": 0.01, "seed": 5, "log_interval": 1000},
        "eval": {"k_vote": 3},
        "output_dir": outputDir,
    }
    if experiment is not None:
        payload["experiment"] = experiment
    return payload


def writeConfig(directory: str, payload: dict, name: str = "run.json") -> str:
    path = os.path.join(directory, name)
    with open(path, "w", encoding="utf-8") as stream:
        json.dump(payload, stream)
    return path
