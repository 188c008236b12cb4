import math
import unittest
from unittest import mock

import numpy as np

from config.RunConfig import EmbedConfig, GraphConfig
from config.SoftManifoldEnums import DistanceTransform, InitStrategy, PairScope
from framework.dataset.SyntheticDataGenerator import generateSynthetic
from framework.embedding.ComponentLayout import ComponentLayout
from framework.embedding.EmbeddingLosses import (
    SoftManifoldObjective, lossDistortion, lossGeometry, phiStar, totalLoss
)
from framework.embedding.NeighborhoodAreas import (
    graphNeighborhoodArea, manifoldNeighborhoodArea, maxSectorArea, neighborhoodGeometry, orderedNeighbors,
    sphericalSectorArea, triangleArea
)
from framework.embedding.SoftManifoldEmbedder import (
    PairBatchSampler, SoftManifoldEmbedder, embed, projectRows, projectToBall
)
from framework.fluidgraph.FluidGraphBuilder import buildFluidGraphFromFeatures
from framework.models.DatasetModels import Neighborhoods
from framework.models.EmbeddingModels import EmbeddingState
from framework.softmanifold.SoftManifoldGeometry import pairwiseSemimetric
from tests.support import featureMatrix, fluidGraph, randomBallPoints, scalarSemimetric
from utils.constants import MAX_BALL_RADIUS, PHI_STAR_FLOOR, REGION_SPREAD

STAR = {0: [1, 2, 3], 1: [0], 2: [0], 3: [0]}


def starGraph(distancesSq, others=4.0):
    """Node 0 linked to 1..3 with the given squared distances; leaves at `others` from each other"""
    dGSq = np.full((4, 4), others)
    np.fill_diagonal(dGSq, 0.0)
    for leaf, value in enumerate(distancesSq, start=1):
        dGSq[0, leaf] = dGSq[leaf, 0] = value
    return fluidGraph(STAR, dGSq)


def syntheticGraph(nNodes=12, k=3, seed=3):
    fm = generateSynthetic(nNodes, 4, 2, 0.05, seed=seed)
    nbhd, K, fg = buildFluidGraphFromFeatures(fm, GraphConfig(k=k, distance_transform=DistanceTransform.NEG_LOG))
    return fm, nbhd, K, fg


def stateFor(positions, cfg, scale=1.0):
    return EmbeddingState(positions=np.asarray(positions, dtype=float), epoch=0, loss_trace=[], config=cfg,
                          rng_seed=cfg.seed, graph_scale=scale)


def bruteDistortion(positions, fg, epsD, scale=1.0):
    total = 0.0
    for i in range(fg.n_nodes):
        for j in range(i + 1, fg.n_nodes):
            if math.isfinite(fg.d_g_sq[i, j]):
                target = scale ** 2 * fg.d_g_sq[i, j]
                total += abs(scalarSemimetric(positions[i], positions[j]) ** 2 / (target + epsD) - 1.0)
    return total


def brutePhiStar(positions, fg, node):
    """Largest distance between nodes connected to `node`, in the same clamp as phiStar"""
    members = [j for j in range(fg.n_nodes) if math.isfinite(fg.d_g_sq[node, j])]
    largest = max((scalarSemimetric(positions[a], positions[b]) for a in members for b in members if a != b),
                  default=math.pi)
    return min(max(largest, PHI_STAR_FLOOR), math.pi)


def bruteGraphArea(fg, node):
    neighbors = sorted(fg.nbhd.neighbors(node), key=lambda j: (fg.d_g_sq[node, j], j))
    count = len(neighbors)
    theta = 2.0 * math.pi / count
    lengths = [math.sqrt(fg.d_g_sq[node, j]) for j in neighbors]
    fan = sum(0.5 * lengths[a] * lengths[(a + 1) % count] * math.sin(theta) for a in range(count))
    return fan / (0.5 * count * fg.d_g_star ** 2 * math.sin(theta))


def bruteManifoldArea(positions, fg, node, phi):
    neighbors = sorted(fg.nbhd.neighbors(node), key=lambda j: (fg.d_g_sq[node, j], j))
    count = len(neighbors)
    theta = 2.0 * math.pi / count
    polar = [min(scalarSemimetric(positions[node], positions[j]), math.pi) for j in neighbors]
    sectors = sum(theta * abs(math.cos(polar[a]) - math.cos(polar[(a + 1) % count])) for a in range(count))
    return sectors / (2.0 * math.pi * (1.0 - math.cos(phi)))


def bruteGeometry(positions, fg, epsG):
    total = 0.0
    for i in range(fg.n_nodes):
        if len(fg.nbhd.neighbors(i)) < 2:
            total += 1.0
            continue
        manifoldArea = bruteManifoldArea(positions, fg, i, brutePhiStar(positions, fg, i))
        total += abs(manifoldArea / (bruteGraphArea(fg, i) + epsG) - 1.0)
    return total


def assertRelativelyClose(test, actual, expected, tolerance=1e-10):
    test.assertLessEqual(abs(actual - expected), tolerance * max(1.0, abs(expected)))


def instances(count=20):
    """Seeded graphs of 6 to 12 nodes"""
    for seed in range(count):
        nNodes = 6 + seed % 7
        _, _, _, fg = syntheticGraph(nNodes, 2 + seed % 2, seed)
        yield seed, fg


class AreaTest(unittest.TestCase):

    def testTriangleArea(self):
        self.assertAlmostEqual(triangleArea(1.0, 1.0, math.pi / 3), math.sqrt(3) / 4, places=12)
        self.assertAlmostEqual(triangleArea(2.0, 3.0, math.pi), 0.0, places=12)
        self.assertEqual(triangleArea(0.0, 3.0, 1.0), 0.0)
        with self.assertRaises(ValueError):
            triangleArea(-1.0, 1.0, 1.0)

    def testSectorAreas(self):
        self.assertAlmostEqual(sphericalSectorArea(math.pi / 3, 0.0, math.pi / 2), math.pi / 3, places=12)
        self.assertAlmostEqual(sphericalSectorArea(math.pi / 3, math.pi / 2, 0.0), math.pi / 3, places=12)
        self.assertAlmostEqual(maxSectorArea(math.pi), 4 * math.pi, places=12)

    def testGraphAreaWorkedExample(self):
        fg = starGraph([1.0, 1.0, 4.0])
        self.assertEqual(fg.d_g_star, 2.0)
        self.assertAlmostEqual(graphNeighborhoodArea(0, fg), 5.0 / 12.0, places=12)

    def testGraphAreaOfFullNeighborhood(self):
        self.assertAlmostEqual(graphNeighborhoodArea(0, starGraph([4.0, 4.0, 4.0])), 1.0, places=12)

    def testGraphAreaIsBuiltFromTriangles(self):
        fg = starGraph([1.0, 2.0, 3.0])
        with mock.patch('framework.embedding.NeighborhoodAreas.triangleArea', wraps=triangleArea) as spy:
            area = graphNeighborhoodArea(0, fg)
        self.assertEqual(spy.call_count, 4)
        theta = 2 * math.pi / 3
        lengths = [1.0, math.sqrt(2.0), math.sqrt(3.0)]
        fan = sum(triangleArea(lengths[a], lengths[(a + 1) % 3], theta) for a in range(3))
        self.assertAlmostEqual(area, fan / (3 * triangleArea(2.0, 2.0, theta)), places=12)

    def testTwoNeighborGraphAreaStaysFinite(self):
        fg = fluidGraph({0: [1, 2], 1: [0], 2: [0]}, np.array([[0.0, 1.0, 4.0], [1.0, 0.0, 9.0], [4.0, 9.0, 0.0]]))
        # fan 2 * (1 * 2) over 2 * 3^2
        self.assertAlmostEqual(graphNeighborhoodArea(0, fg), 2.0 / 9.0, places=9)

    def testSingleNeighborHasNoArea(self):
        fg = starGraph([1.0, 1.0, 4.0])
        self.assertEqual(graphNeighborhoodArea(1, fg), 0.0)
        self.assertEqual(manifoldNeighborhoodArea(1, np.zeros((4, 2)), fg, 1.0), 0.0)

    def testNeighborOrderBreaksTiesByIndex(self):
        fg = starGraph([4.0, 1.0, 1.0])
        self.assertEqual(orderedNeighbors(0, fg), [2, 3, 1])

    def testEquidistantNeighborsSpanNoSector(self):
        fg = starGraph([1.0, 1.0, 4.0])
        angles = np.array([0.0, 2.0, 4.0])
        positions = np.vstack([[0.0, 0.0], 0.5 * np.column_stack([np.cos(angles), np.sin(angles)])])
        self.assertAlmostEqual(manifoldNeighborhoodArea(0, positions, fg, 1.0), 0.0, places=12)

    def testManifoldAreaMatchesDirectSum(self):
        fg = starGraph([1.0, 2.0, 3.0])
        positions = np.array([[0.0, 0.0], [0.2, 0.0], [0.0, -0.5], [-0.8, 0.1]])
        polar = [scalarSemimetric(positions[0], positions[j]) for j in (1, 2, 3)]
        theta = 2 * math.pi / 3
        sectors = sum(theta * abs(math.cos(polar[a]) - math.cos(polar[(a + 1) % 3])) for a in range(3))
        expected = sectors / (2 * math.pi * (1 - math.cos(0.9)))
        self.assertAlmostEqual(manifoldNeighborhoodArea(0, positions, fg, 0.9), expected, places=12)

    def testPhiStarRange(self):
        fg = starGraph([1.0, 1.0, 4.0])
        for value in (0.0, 3.5):
            with self.assertRaises(ValueError):
                manifoldNeighborhoodArea(0, np.zeros((4, 2)), fg, value)

    def testNeighborhoodGeometry(self):
        fg = starGraph([1.0, 1.0, 4.0])
        positions = randomBallPoints(np.random.default_rng(2), 4, 2, 0.8)
        summary = neighborhoodGeometry(0, positions, fg, phiStar(positions))
        self.assertAlmostEqual(summary.theta, 2 * math.pi / 3, places=15)
        self.assertEqual(summary.neighbors, [1, 2, 3])
        self.assertAlmostEqual(summary.graph_area_norm, 5.0 / 12.0, places=12)
        self.assertGreaterEqual(summary.manifold_area_norm, 0.0)

    def testAreasStayInRangeOnSyntheticGraph(self):
        _, _, _, fg = syntheticGraph(20, 4)
        positions = randomBallPoints(np.random.default_rng(0), 20, 2, 0.9)
        for i in range(20):
            self.assertTrue(0.0 <= graphNeighborhoodArea(i, fg) <= 1.0)
            self.assertGreaterEqual(manifoldNeighborhoodArea(i, positions, fg, phiStar(positions)), 0.0)

    def testGraphAreaMatchesBruteForceFan(self):
        for seed, fg in instances():
            for i in range(fg.n_nodes):
                if len(fg.nbhd.neighbors(i)) < 2:
                    continue
                with self.subTest(seed=seed, node=i):
                    self.assertAlmostEqual(graphNeighborhoodArea(i, fg), bruteGraphArea(fg, i), places=12)

    def testManifoldAreaMatchesBruteForceSectors(self):
        for seed, fg in instances():
            positions = randomBallPoints(np.random.default_rng(100 + seed), fg.n_nodes, 2 + seed % 2, 0.95)
            for i in range(fg.n_nodes):
                if len(fg.nbhd.neighbors(i)) < 2:
                    continue
                phi = brutePhiStar(positions, fg, i)
                with self.subTest(seed=seed, node=i):
                    self.assertAlmostEqual(manifoldNeighborhoodArea(i, positions, fg, phi),
                                           bruteManifoldArea(positions, fg, i, phi), places=10)


class LossTest(unittest.TestCase):

    def testMatchingDistancesGiveZeroDistortion(self):
        positions = randomBallPoints(np.random.default_rng(1), 5, 2, 0.9)
        adjacency = {i: [j for j in range(5) if j != i] for i in range(5)}
        fg = fluidGraph(adjacency, pairwiseSemimetric(positions) ** 2)
        cfg = EmbedConfig(eps_d=1e-12)
        self.assertLess(lossDistortion(stateFor(positions, cfg), fg), 1e-6)

    def testDoubledDistanceGivesUnitDistortion(self):
        positions = np.array([[0.3, 0.0], [-0.2, 0.4]])
        target = scalarSemimetric(positions[0], positions[1]) ** 2 / 2.0
        fg = fluidGraph({0: [1], 1: [0]}, np.array([[0.0, target], [target, 0.0]]))
        cfg = EmbedConfig(eps_d=1e-14)
        self.assertAlmostEqual(lossDistortion(stateFor(positions, cfg), fg), 1.0, places=10)

    def testDistortionMatchesBruteForce(self):
        cfg = EmbedConfig()
        for seed, fg in instances():
            positions = randomBallPoints(np.random.default_rng(seed), fg.n_nodes, 2, 0.95)
            scale = 1.0 if seed % 2 else 0.3
            with self.subTest(seed=seed):
                assertRelativelyClose(self, lossDistortion(stateFor(positions, cfg, scale), fg),
                                      bruteDistortion(positions, fg, cfg.eps_d, scale))

    def testGeometryMatchesBruteForce(self):
        cfg = EmbedConfig()
        for seed, fg in instances():
            positions = randomBallPoints(np.random.default_rng(50 + seed), fg.n_nodes, 3, 0.95)
            with self.subTest(seed=seed):
                assertRelativelyClose(self, lossGeometry(stateFor(positions, cfg), fg),
                                      bruteGeometry(positions, fg, cfg.eps_g))

    def testGeometryMeasuresPhiStarPerComponent(self):
        dGSq = np.array([[0.0, 1.0, 2.0, np.inf, np.inf, np.inf],
                         [1.0, 0.0, 1.0, np.inf, np.inf, np.inf],
                         [2.0, 1.0, 0.0, np.inf, np.inf, np.inf],
                         [np.inf, np.inf, np.inf, 0.0, 1.0, 2.0],
                         [np.inf, np.inf, np.inf, 1.0, 0.0, 1.0],
                         [np.inf, np.inf, np.inf, 2.0, 1.0, 0.0]])
        fg = fluidGraph({0: [1, 2], 1: [0, 2], 2: [1, 0], 3: [4, 5], 4: [3, 5], 5: [4, 3]}, dGSq)
        positions = np.array([[0.1, 0.0], [0.3, 0.1], [0.2, 0.4], [-0.5, -0.1], [-0.2, -0.6], [-0.7, 0.3]])
        objective = SoftManifoldObjective(fg, EmbedConfig())
        phi = objective.componentPhiStar(positions)
        self.assertEqual(objective.nComponents, 2)
        self.assertAlmostEqual(phi[0], float(pairwiseSemimetric(positions[:3]).max()), places=12)
        self.assertAlmostEqual(phi[1], float(pairwiseSemimetric(positions[3:]).max()), places=12)
        self.assertAlmostEqual(lossGeometry(stateFor(positions, EmbedConfig()), fg),
                               bruteGeometry(positions, fg, EmbedConfig().eps_g), places=10)

    def testComponentLossesSumToTrace(self):
        _, _, _, fg = syntheticGraph(12, 2, 5)
        objective = SoftManifoldObjective(fg, EmbedConfig(kappa=0.7), 0.4)
        positions = randomBallPoints(np.random.default_rng(8), 12, 2, 0.9)
        lossD, lossG = objective.componentLosses(positions)
        self.assertEqual(lossD.shape, (objective.nComponents,))
        self.assertAlmostEqual(float(lossD.sum()), float(objective.distortion(positions)), places=10)
        self.assertAlmostEqual(float(lossG.sum()), float(objective.geometry(positions)), places=10)
        record = objective.lossRecord(positions, 3)
        self.assertEqual(record.epoch, 3)
        self.assertAlmostEqual(record.loss_total, float(lossD.sum() + 0.7 * lossG.sum()), places=10)

    def testSingleNeighborNodesContributeOne(self):
        fg = starGraph([1.0, 1.0, 4.0])
        positions = randomBallPoints(np.random.default_rng(3), 4, 2, 0.8)
        objective = SoftManifoldObjective(fg, EmbedConfig())
        self.assertEqual(objective.constantGeometry, 3.0)
        self.assertGreaterEqual(objective.geometry(positions), 3.0)

    def testTotalLoss(self):
        _, _, _, fg = syntheticGraph()
        positions = randomBallPoints(np.random.default_rng(4), 12, 2, 0.9)
        for kappa in (0.0, 2.0):
            state = stateFor(positions, EmbedConfig(kappa=kappa))
            expected = lossDistortion(state, fg) + kappa * lossGeometry(state, fg)
            self.assertAlmostEqual(totalLoss(state, fg), expected, places=10)

    def testNeighborScopeUsesEdgesOnly(self):
        _, nbhd, _, fg = syntheticGraph()
        objective = SoftManifoldObjective(fg, EmbedConfig(pair_scope=PairScope.NEIGHBORS))
        expected = {(min(i, j), max(i, j)) for i, j in nbhd.edges()}
        self.assertEqual(set(zip(objective.pairFirst.tolist(), objective.pairSecond.tolist())), expected)
        self.assertEqual(SoftManifoldObjective(fg, EmbedConfig()).nPairs, 12 * 11 // 2)

    def testPairMaskSelectsBatch(self):
        _, _, _, fg = syntheticGraph()
        objective = SoftManifoldObjective(fg, EmbedConfig())
        positions = randomBallPoints(np.random.default_rng(5), 12, 2, 0.9)
        mask = np.zeros(objective.nPairs, dtype=bool)
        mask[::3] = True
        complement = objective.distortion(positions, ~mask)
        self.assertAlmostEqual(objective.distortion(positions, mask) + complement,
                               objective.distortion(positions), places=10)

    def testDisconnectedPairsAreSkipped(self):
        dGSq = np.array([[0.0, 1.0, np.inf], [1.0, 0.0, np.inf], [np.inf, np.inf, 0.0]])
        fg = fluidGraph({0: [1], 1: [0], 2: [0]}, dGSq)
        self.assertEqual(SoftManifoldObjective(fg, EmbedConfig()).nPairs, 1)


class GradientTest(unittest.TestCase):

    def testAnalyticDistortionGradientMatchesFiniteDifferences(self):
        _, _, _, fg = syntheticGraph(8, 3)
        cfg = EmbedConfig(kappa=0.0)
        objectives = [SoftManifoldObjective(fg, cfg), SoftManifoldObjective(fg, cfg, 0.4)]
        rng = np.random.default_rng(12)
        checked = 0
        while checked < 100:
            objective = objectives[checked % 2]
            positions = randomBallPoints(rng, 8, 2, 0.9)
            distances = pairwiseSemimetric(positions)[objective.pairFirst, objective.pairSecond]
            ratios = distances ** 2 / (objective.targets + cfg.eps_d)
            chords = np.linalg.norm(positions[objective.pairFirst] - positions[objective.pairSecond], axis=1)
            if chords.min() < 0.1 or np.min(np.abs(ratios - 1.0)) < 1e-3:
                continue
            analytic = objective.distortionGradient(positions)
            numeric = objective.finiteDifferenceGradient(objective.distortion, positions, 1e-6, objective.nPairs)
            relative = np.linalg.norm(analytic - numeric) / np.linalg.norm(numeric)
            with self.subTest(state=checked):
                self.assertLess(relative, 1e-4)
            checked += 1

    def testFiniteDifferencePathMatchesAnalyticPath(self):
        _, _, _, fg = syntheticGraph(8, 3)
        positions = randomBallPoints(np.random.default_rng(7), 8, 2, 0.6)
        analytic = SoftManifoldObjective(fg, EmbedConfig(kappa=0.0)).gradient(positions)
        numeric = SoftManifoldObjective(fg, EmbedConfig(kappa=0.0, analytic_gradients=False)).gradient(positions)
        self.assertLess(np.linalg.norm(analytic - numeric) / np.linalg.norm(analytic), 1e-4)

    def testStackedFiniteDifferencesMatchOneAtATime(self):
        _, _, _, fg = syntheticGraph(8, 3)
        objective = SoftManifoldObjective(fg, EmbedConfig())
        positions = randomBallPoints(np.random.default_rng(9), 8, 2, 0.8)
        fixedPhi = phiStar(positions)

        def geometry(stacked):
            return objective.geometry(stacked, fixedPhi)

        stacked = objective.finiteDifferenceGradient(geometry, positions, 1e-5, objective.slotNode.size)
        step = 1e-5
        for node in range(8):
            for axis in range(2):
                plus, minus = positions.copy(), positions.copy()
                plus[node, axis] += step
                minus[node, axis] -= step
                numeric = (float(geometry(plus)) - float(geometry(minus))) / (2 * step)
                self.assertAlmostEqual(stacked[node, axis], numeric, delta=1e-9)


class ComponentLayoutTest(unittest.TestCase):

    def testConnectedGraphOwnsTheBall(self):
        layout = ComponentLayout.build(np.zeros(5, dtype=int), [str(i) for i in range(5)], 3)
        self.assertEqual(layout.nComponents, 1)
        self.assertEqual(layout.radius, MAX_BALL_RADIUS)
        positions = randomBallPoints(np.random.default_rng(1), 5, 3, 0.9)
        np.testing.assert_array_equal(layout.place(positions), positions)
        offset = REGION_SPREAD * MAX_BALL_RADIUS
        self.assertAlmostEqual(layout.reach(), scalarSemimetric([-offset, 0, 0], [offset, 0, 0]), places=12)

    def testRegionsSeparateEveryComponent(self):
        rng = np.random.default_rng(4)
        for nComponents in (2, 3, 5, 8):
            labels = np.arange(6 * nComponents) % nComponents
            layout = ComponentLayout.build(labels, [f"n{i:03d}" for i in range(labels.size)], 3)
            offsets = randomBallPoints(rng, labels.size, 3, 0.999 * layout.radius)
            positions = layout.nodeCentres + offsets
            np.testing.assert_allclose(layout.project(positions), positions, atol=1e-15)
            distances = pairwiseSemimetric(positions)
            same = labels[:, None] == labels[None, :]
            np.fill_diagonal(same, False)
            cross = labels[:, None] != labels[None, :]
            with self.subTest(components=nComponents):
                self.assertTrue(np.all(np.linalg.norm(positions, axis=1) < 1.0))
                self.assertLess(distances[same].max(), distances[cross].min())

    def testRingSlotsFollowSmallestRowId(self):
        labels = np.array([1, 0, 1, 0])
        layout = ComponentLayout.build(labels, ["a", "d", "b", "c"], 2)
        # component 1 holds "a" and takes the first slot on the ring
        np.testing.assert_allclose(layout.centres[1], [0.5, 0.0], atol=1e-15)
        np.testing.assert_allclose(layout.centres[0], [-0.5, 0.0], atol=1e-15)
        swapped = ComponentLayout.build(1 - labels, ["a", "d", "b", "c"], 2)
        np.testing.assert_allclose(swapped.nodeCentres, layout.nodeCentres, atol=1e-15)

    def testProjectAndPlaceKeepNodesInTheirRegion(self):
        labels = np.array([0, 0, 1, 1, 1])
        layout = ComponentLayout.build(labels, [str(i) for i in range(5)], 2)
        far = np.array([[0.9, 0.0], [-0.9, 0.0], [0.0, 0.9], [0.4, -0.4], [-0.5, 0.0]])
        for positions in (layout.project(far), layout.place(far)):
            offsets = np.linalg.norm(positions - layout.nodeCentres, axis=1)
            self.assertTrue(np.all(offsets <= layout.radius + 1e-15))
        placed = layout.place(far)
        for component in (0, 1):
            members = labels == component
            np.testing.assert_allclose(placed[members].mean(axis=0), layout.centres[component], atol=1e-15)
            spread = np.linalg.norm(placed[members] - layout.centres[component], axis=1).max()
            self.assertAlmostEqual(spread, REGION_SPREAD * layout.radius, places=15)


class ProjectToBallTest(unittest.TestCase):

    def testInsidePointUnchanged(self):
        u = np.array([0.3, 0.0])
        np.testing.assert_array_equal(projectToBall(u, 0.999999).coordinates, u)

    def testOutsidePointRescaled(self):
        point = projectToBall(np.array([2.0, 0.0, 0.0]), 0.999999)
        self.assertAlmostEqual(np.linalg.norm(point.coordinates), 0.999999, places=15)

    def testOrigin(self):
        np.testing.assert_array_equal(projectToBall(np.zeros(2)).coordinates, np.zeros(2))

    def testRadiusRange(self):
        for radius in (0.0, 1.0):
            with self.assertRaises(ValueError):
                projectRows(np.zeros((1, 2)), radius)


class EmbedTest(unittest.TestCase):

    def setUp(self):
        self.fm, self.nbhd, self.K, self.fg = syntheticGraph()

    def testZeroEpochsKeepsInitialization(self):
        cfg = EmbedConfig(epochs=0)
        embedder = SoftManifoldEmbedder(cfg)
        state = embedder.embed(self.fm, self.fg)
        np.testing.assert_array_equal(state.positions, embedder.initialPositions(self.fm, self.fg))
        self.assertEqual(state.epoch, 0)
        self.assertEqual([record.epoch for record in state.loss_trace], [0])

    def testChangeOfVariablesInitialization(self):
        positions = SoftManifoldEmbedder(EmbedConfig(dim=3)).initialPositions(self.fm, self.fg)
        self.assertEqual(positions.shape, (12, 3))
        self.assertTrue(np.all(np.linalg.norm(positions, axis=1) < 1.0))

    def testInitializationPadsLowDimensionalFeatures(self):
        fm = featureMatrix([[0.1, 0.5], [0.9, np.nan], [0.4, 0.3]], [[True, True], [True, False], [True, True]])
        fg = fluidGraph({0: [1], 1: [2], 2: [0]}, np.array([[0, 1, 1], [1, 0, 1], [1, 1, 0]], dtype=float))
        positions = SoftManifoldEmbedder(EmbedConfig(dim=4)).initialPositions(fm, fg)
        np.testing.assert_array_equal(positions[:, 2:], np.zeros((3, 2)))
        self.assertTrue(np.all(np.linalg.norm(positions, axis=1) < 1.0))

    def testRandomBallInitialization(self):
        cfg = EmbedConfig(init=InitStrategy.RANDOM_BALL, seed=4)
        first = SoftManifoldEmbedder(cfg).initialPositions(self.fm, self.fg)
        second = SoftManifoldEmbedder(cfg).initialPositions(self.fm, self.fg)
        np.testing.assert_array_equal(first, second)
        self.assertTrue(np.all(np.linalg.norm(first, axis=1) <= 0.5))

    def testDeterministicForFixedSeed(self):
        cfg = EmbedConfig(epochs=15, batch_pairs=20, seed=2)
        first = embed(self.fm, self.K, self.nbhd, self.fg, cfg)
        second = embed(self.fm, self.K, self.nbhd, self.fg, cfg)
        np.testing.assert_array_equal(first.positions, second.positions)
        self.assertEqual([r.asRow() for r in first.loss_trace], [r.asRow() for r in second.loss_trace])

    def testTraceAndPositionInvariants(self):
        state = embed(self.fm, self.K, self.nbhd, self.fg, EmbedConfig(epochs=10, lr=0.05))
        self.assertEqual([record.epoch for record in state.loss_trace], list(range(11)))
        self.assertTrue(all(math.isfinite(value) for record in state.loss_trace for value in record.asRow()))
        self.assertTrue(np.all(np.linalg.norm(state.positions, axis=1) <= 1.0 - 1e-6 + 1e-15))
        self.assertIsNone(state.diagnostic)
        self.assertEqual(len(state.points()), 12)

    def testFiniteDifferenceRun(self):
        cfg = EmbedConfig(epochs=3, analytic_gradients=False)
        state = embed(self.fm, self.K, self.nbhd, self.fg, cfg)
        self.assertEqual(state.epoch, 3)
        self.assertTrue(math.isfinite(state.finalLoss))

    def testPairBatchSampler(self):
        objective = SoftManifoldObjective(self.fg, EmbedConfig())
        sampler = PairBatchSampler(6, self.fm.row_ids, objective.pairFirst, objective.pairSecond, 30)
        mask = sampler.mask(4)
        np.testing.assert_array_equal(mask, sampler.mask(4))
        self.assertFalse(np.array_equal(mask, sampler.mask(5)))
        self.assertTrue(0 < mask.sum() < objective.nPairs)
        for batchPairs in (0, objective.nPairs, 100):
            disabled = PairBatchSampler(6, self.fm.row_ids, objective.pairFirst, objective.pairSecond, batchPairs)
            self.assertIsNone(disabled.mask(1))

    def testPairKeyIgnoresIdOrder(self):
        np.testing.assert_array_equal(PairBatchSampler.pairKey(3, "s1", "s7"),
                                      PairBatchSampler.pairKey(3, "s7", "s1"))
        self.assertFalse(np.array_equal(PairBatchSampler.pairKey(3, "s1", "s7"),
                                        PairBatchSampler.pairKey(4, "s1", "s7")))
        self.assertFalse(np.array_equal(PairBatchSampler.pairKey(3, "s1", "s7"),
                                        PairBatchSampler.pairKey(3, "s1", "s8")))

    def testBatchFollowsRowIdsNotRowOrder(self):
        ids = ["a", "b", "c", "d"]
        first, second = np.triu_indices(4, k=1)
        original = PairBatchSampler(9, ids, first, second, 3)
        order = [2, 0, 3, 1]
        renamed = PairBatchSampler(9, [ids[i] for i in order], first, second, 3)
        for epoch in range(1, 6):
            chosen = {frozenset((ids[a], ids[b])) for a, b, keep in zip(first, second, original.mask(epoch)) if keep}
            renamedChosen = {frozenset((ids[order[a]], ids[order[b]]))
                             for a, b, keep in zip(first, second, renamed.mask(epoch)) if keep}
            self.assertEqual(chosen, renamedChosen)

    def testRelabeledNodesGiveTheSameRun(self):
        cfg = EmbedConfig(epochs=10, batch_pairs=20, seed=2)
        perm = np.random.default_rng(0).permutation(12)
        permuted = self.fm.subset(perm)
        _, _, permutedGraph = buildFluidGraphFromFeatures(
            permuted, GraphConfig(k=3, distance_transform=DistanceTransform.NEG_LOG)
        )
        state = SoftManifoldEmbedder(cfg).embed(self.fm, self.fg)
        relabeled = SoftManifoldEmbedder(cfg).embed(permuted, permutedGraph)
        for record, other in zip(state.loss_trace, relabeled.loss_trace):
            with self.subTest(epoch=record.epoch):
                np.testing.assert_allclose(other.asRow(), record.asRow(), rtol=1e-8, atol=1e-10)
        self.assertEqual(len(state.loss_trace), len(relabeled.loss_trace))
        np.testing.assert_allclose(relabeled.positions, state.positions[perm], atol=1e-8)

    def testLossTraceNeverIncreases(self):
        for cfg in (EmbedConfig(epochs=30, lr=0.5), EmbedConfig(epochs=30, lr=0.05, batch_pairs=20, seed=1)):
            state = SoftManifoldEmbedder(cfg).embed(self.fm, self.fg)
            totals = [record.loss_total for record in state.loss_trace]
            with self.subTest(lr=cfg.lr):
                self.assertTrue(all(later <= earlier * (1 + 1e-12) for earlier, later in zip(totals, totals[1:])))
                self.assertLessEqual(totals[-1], totals[0])

    def testAutomaticGraphScale(self):
        embedder = SoftManifoldEmbedder(EmbedConfig(epochs=0))
        layout = embedder.layout(self.fm, self.fg)
        expected = layout.reach() / self.fg.d_g_star
        self.assertAlmostEqual(embedder.graphScale(self.fg, layout), expected, places=15)
        state = embedder.embed(self.fm, self.fg)
        self.assertAlmostEqual(state.graph_scale, expected, places=15)
        self.assertAlmostEqual(state.finalLoss, totalLoss(state, self.fg), places=10)

    def testConfiguredGraphScaleWins(self):
        embedder = SoftManifoldEmbedder(EmbedConfig(graph_scale=0.25))
        self.assertEqual(embedder.graphScale(self.fg, embedder.layout(self.fm, self.fg)), 0.25)

    def testDisconnectedComponentsEmbedSeparately(self):
        fm = featureMatrix([[0.0, 0.1], [0.05, 0.0], [0.1, 0.1], [0.9, 1.0], [1.0, 0.9], [0.95, 0.95]])
        _, _, fg = buildFluidGraphFromFeatures(fm, GraphConfig(k=2, distance_transform=DistanceTransform.NEG_LOG))
        cfg = EmbedConfig(epochs=40, lr=0.05, seed=3)
        embedder = SoftManifoldEmbedder(cfg)
        layout = embedder.layout(fm, fg)
        self.assertEqual(layout.nComponents, 2)
        initial = embedder.initialPositions(fm, fg)
        state = embedder.embed(fm, fg)
        self.assertIsNone(state.diagnostic)

        offsets = np.linalg.norm(state.positions - layout.nodeCentres, axis=1)
        self.assertTrue(np.all(offsets <= layout.radius + 1e-12))
        distances = pairwiseSemimetric(state.positions)
        same = layout.labels[:, None] == layout.labels[None, :]
        offDiagonal = ~np.eye(6, dtype=bool)
        self.assertLess(distances[same & offDiagonal].max(), distances[~same].min())

        objective = SoftManifoldObjective(fg, cfg, state.graph_scale)
        startD, startG = objective.componentLosses(initial)
        endD, endG = objective.componentLosses(state.positions)
        self.assertTrue(np.all(endD + cfg.kappa * endG <= startD + cfg.kappa * startG))

    def testLearningRateDecay(self):
        embedder = SoftManifoldEmbedder(EmbedConfig(lr=0.1, lr_decay=0.5))
        self.assertAlmostEqual(embedder.learningRate(1), 0.1, places=15)
        self.assertAlmostEqual(embedder.learningRate(3), 0.05, places=15)

    def testNonFiniteGradientStopsRun(self):
        cfg = EmbedConfig(epochs=5)
        initial = SoftManifoldEmbedder(cfg).initialPositions(self.fm, self.fg)
        with mock.patch.object(SoftManifoldObjective, 'gradient', return_value=np.full((12, 2), np.nan)):
            state = SoftManifoldEmbedder(cfg).embed(self.fm, self.fg)
        self.assertIn("non-finite gradient at epoch 1", state.diagnostic)
        self.assertEqual(state.epoch, 0)
        np.testing.assert_array_equal(state.positions, initial)

    def testMismatchedNeighborhoodsRejected(self):
        other = Neighborhoods({i: [(i + 1) % 12] for i in range(12)}, k=1)
        with self.assertRaises(ValueError):
            embed(self.fm, self.K, other, self.fg, EmbedConfig(epochs=0))

    def testTwoNodeGraphConverges(self):
        fm = featureMatrix([[0.0, 1.0], [1.0, 0.0]])
        fg = fluidGraph({0: [1], 1: [0]}, np.array([[0.0, 0.5], [0.5, 0.0]]), DistanceTransform.LITERAL)
        cfg = EmbedConfig(init=InitStrategy.RANDOM_BALL, lr=0.02, lr_decay=0.005, epochs=3000, seed=1,
                          graph_scale=1.0)
        state = SoftManifoldEmbedder(cfg).embed(fm, fg)
        distanceSq = scalarSemimetric(state.positions[0], state.positions[1]) ** 2
        self.assertAlmostEqual(distanceSq / 0.5, 1.0, delta=0.05)


if __name__ == '__main__':
    unittest.main()
