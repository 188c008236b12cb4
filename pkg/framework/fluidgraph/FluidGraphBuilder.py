"""
Fluid graph assembly

Edge transition probabilities become squared graph distances through the
configured DistanceTransform. Pairs that are not neighbors get the
shortest-path distance over the undirected edge metric sqrt(d_G^2); pairs in
different connected components stay infinitely far apart.
"""
from typing import Dict, Optional, Tuple

import numpy as np
from scipy.sparse.csgraph import connected_components, csgraph_from_dense, shortest_path

from config.RunConfig import GraphConfig
from config.SoftManifoldEnums import DistanceTransform, TransitionKernel, VelocitySign
from framework.dataset.ConductivityBuilder import buildConductivity
from framework.dataset.NeighborhoodBuilder import knnNeighborhoods, maskedDistanceMatrix
from framework.fluidgraph.FluidDiffusion import transitionProbability, vbPlusMinus
from framework.fluidgraph.HeatDiffusion import heatTransitionProbabilities
from framework.models.DatasetModels import ConductivityTensor, FeatureMatrix, Neighborhoods
from framework.models.GraphModels import FluidGraph
from logs.logger import get_logger

logger = get_logger(__name__)

EdgeMap = Dict[Tuple[int, int], float]


def fluidTransitionProbabilities(fm: FeatureMatrix, K: ConductivityTensor, nbhd: Neighborhoods,
                                 b0: float, sign: VelocitySign = VelocitySign.MAGNITUDE) -> EdgeMap:
    """p_ij for every directed neighborhood edge"""
    return {
        (i, j): transitionProbability(vbPlusMinus(i, j, fm, K, nbhd, b0, sign))
        for i, j in nbhd.edges()
    }


def assembleDistances(nNodes: int, nbhd: Neighborhoods, p: EdgeMap,
                      transform: DistanceTransform) -> FluidGraph:
    """
    Turn edge probabilities into the dense squared graph-distance matrix

    The undirected edge length is the mean of sqrt(d_G^2) over the directions
    present. Edge pairs keep that direct length even if a path is shorter.

    Args:
        nNodes: Number of nodes
        nbhd: Neighborhoods the probabilities live on
        p: Transition probability per directed edge
        transform: Probability to squared-distance mapping

    Returns:
        FluidGraph: Assembled graph
    """
    edgeDistSq = {edge: float(transform.apply(probability)) for edge, probability in p.items()}

    lengthSum = np.zeros((nNodes, nNodes))
    lengthCount = np.zeros((nNodes, nNodes))
    for (i, j), distSq in edgeDistSq.items():
        length = np.sqrt(distSq)
        for a, b in ((i, j), (j, i)):
            lengthSum[a, b] += length
            lengthCount[a, b] += 1

    isEdge = lengthCount > 0
    lengths = np.full((nNodes, nNodes), np.inf)
    lengths[isEdge] = lengthSum[isEdge] / lengthCount[isEdge]

    graph = csgraph_from_dense(lengths, null_value=np.inf)
    nComponents, componentLabels = connected_components(graph, directed=False)
    if nComponents > 1:
        sizes = np.bincount(componentLabels).tolist()
        logger.warning(f"Graph is disconnected: {nComponents} components of sizes {sizes}; "
                       f"cross-component pairs are left out of the losses and metrics")

    pathLengths = shortest_path(graph, method='D', directed=False)
    pathLengths[isEdge] = lengths[isEdge]
    dGSq = pathLengths ** 2
    np.fill_diagonal(dGSq, 0.0)

    offDiagonal = ~np.eye(nNodes, dtype=bool) & np.isfinite(dGSq)
    dGStar = float(np.sqrt(dGSq[offDiagonal].max())) if offDiagonal.any() else 0.0

    return FluidGraph(
        n_nodes=nNodes,
        nbhd=nbhd,
        p=dict(p),
        edge_d_sq=edgeDistSq,
        d_g_sq=dGSq,
        d_g_star=dGStar,
        transform=transform,
        n_components=int(nComponents)
    )


def graphDistanceMatrix(fm: FeatureMatrix, K: ConductivityTensor, nbhd: Neighborhoods,
                        transform: DistanceTransform, b0: float = 1.0,
                        sign: VelocitySign = VelocitySign.MAGNITUDE,
                        kernel: TransitionKernel = TransitionKernel.FLUID) -> FluidGraph:
    """
    Compute edge transition probabilities and all-pairs squared graph distances

    Args:
        fm: Feature matrix
        K: Conductivity tensor over the neighborhood edges
        nbhd: Neighborhoods
        transform: LITERAL (d_G^2 = p) or NEG_LOG (d_G^2 = -ln p)
        b0: Diffusion-rate scale for the fluid kernel
        sign: Velocity sign convention for the fluid kernel
        kernel: FLUID or HEAT transition probabilities

    Returns:
        FluidGraph: Graph with probabilities and distances
    """
    if kernel is TransitionKernel.HEAT:
        p = heatTransitionProbabilities(fm, nbhd, maskedDistanceMatrix(fm))
    else:
        p = fluidTransitionProbabilities(fm, K, nbhd, b0, sign)

    fg = assembleDistances(fm.n_nodes, nbhd, p, transform)
    logger.info(f"Built {kernel} graph: {fm.n_nodes} nodes, {len(p)} edges, "
                f"transform {transform}, d_G* = {fg.d_g_star:.6g}")
    return fg


def buildFluidGraphFromFeatures(fm: FeatureMatrix, graphConfig: GraphConfig):
    """
    Neighborhoods, conductivities and fluid graph for one feature matrix

    Returns:
        Tuple[Neighborhoods, ConductivityTensor, FluidGraph]
    """
    nbhd = knnNeighborhoods(fm, graphConfig.k)
    K = buildConductivity(fm, nbhd, graphConfig.base_conductivity)
    fg = graphDistanceMatrix(
        fm, K, nbhd,
        transform=graphConfig.distance_transform,
        b0=graphConfig.b0,
        sign=graphConfig.velocity_sign,
        kernel=graphConfig.kernel
    )
    return nbhd, K, fg


def edgeProbabilities(fm: FeatureMatrix, nbhd: Neighborhoods, graphConfig: GraphConfig,
                      distances: Optional[np.ndarray] = None) -> EdgeMap:
    """
    Transition probabilities on the edges of nbhd under the configured kernel

    nbhd may list only some nodes; only their edges are evaluated.

    Args:
        fm: Feature matrix the node indices refer to
        nbhd: Neighborhoods to evaluate
        graphConfig: Kernel and diffusion settings
        distances: Masked distance matrix of fm, computed when not given

    Returns:
        EdgeMap: p_ij per directed edge of nbhd
    """
    if graphConfig.kernel is TransitionKernel.HEAT:
        return heatTransitionProbabilities(fm, nbhd, maskedDistanceMatrix(fm) if distances is None else distances)
    K = buildConductivity(fm, nbhd, graphConfig.base_conductivity)
    return fluidTransitionProbabilities(fm, K, nbhd, graphConfig.b0, graphConfig.velocity_sign)
