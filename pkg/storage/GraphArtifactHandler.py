from collections import OrderedDict

import numpy as np

from config.SoftManifoldEnums import DistanceTransform
from framework.fluidgraph.FluidGraphBuilder import assembleDistances
from framework.models.DatasetModels import Neighborhoods
from framework.models.GraphModels import FluidGraph
from storage.BaseArtifactHandler import BaseArtifactHandler
from utils.exceptions import DataValidationError

GRAPH_FILE = "graph.json"


class GraphArtifactHandler(BaseArtifactHandler):
    """Reads and writes graph.json"""

    def saveGraph(self, fg: FluidGraph) -> str:
        payload = {
            'n': fg.n_nodes,
            'k': fg.nbhd.k,
            'transform': str(fg.transform),
            'd_star': fg.d_g_star,
            'edges': [
                {'i': i, 'j': j, 'p': fg.p[(i, j)], 'd2': fg.edge_d_sq[(i, j)]}
                for i, j in fg.nbhd.edges()
            ],
        }
        return self.writeJson(GRAPH_FILE, payload)

    @classmethod
    def loadGraph(cls, path: str) -> FluidGraph:
        """
        Rebuild a FluidGraph from graph.json

        Non-edge distances are recomputed from the stored edge probabilities.

        Raises:
            DataValidationError: Missing fields or inconsistent edges
        """
        payload = cls.readJson(path)
        try:
            nNodes = int(payload['n'])
            transform = DistanceTransform(payload['transform'])
            edges = payload['edges']
            k = int(payload.get('k', 0))
        except (KeyError, TypeError, ValueError) as e:
            raise DataValidationError(f"{path} is not a graph artifact: {e}") from e

        adjacency = OrderedDict((i, []) for i in range(nNodes))
        probabilities = {}
        for edge in edges:
            i, j = int(edge['i']), int(edge['j'])
            if not (0 <= i < nNodes and 0 <= j < nNodes) or i == j:
                raise DataValidationError(f"{path}: invalid edge ({i}, {j}) for {nNodes} nodes")
            adjacency[i].append(j)
            probabilities[(i, j)] = float(edge['p'])
        empty = [i for i, neighbors in adjacency.items() if not neighbors]
        if empty:
            raise DataValidationError(f"{path}: nodes without neighbors: {empty}")

        nbhd = Neighborhoods(adjacency=dict(adjacency), k=k or max(len(v) for v in adjacency.values()))
        fg = assembleDistances(nNodes, nbhd, probabilities, transform)
        if not np.isclose(fg.d_g_star, float(payload.get('d_star', fg.d_g_star)), rtol=1e-9, atol=0.0):
            raise DataValidationError(f"{path}: stored d_star does not match the edges")
        return fg
