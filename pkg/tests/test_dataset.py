import os
import tempfile
import unittest

import numpy as np

from framework.dataset.ConductivityBuilder import buildConductivity
from framework.dataset.MissingDataHandler import applyMissingMask
from framework.dataset.NeighborhoodBuilder import knnNeighborhoods, maskedDistanceMatrix
from framework.dataset.SyntheticDataGenerator import generateSynthetic
from framework.models.DatasetModels import Neighborhoods
from parsers.FeatureCSVParser import loadCsv
from tests.support import featureMatrix
from utils.exceptions import DataValidationError


class LoadCsvTest(unittest.TestCase):

    def setUp(self):
        self.directory = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.directory.cleanup()

    def writeCsv(self, text: str) -> str:
        path = os.path.join(self.directory.name, "features.csv")
        with open(path, "w", encoding="utf-8") as stream:
            stream.write(text)
        return path

    def testEmptyCellBecomesMissing(self):
        fm = loadCsv(self.writeCsv("1,2\n3,\n5,6\n"))
        self.assertEqual(fm.values.shape, (3, 2))
        self.assertEqual(int((~fm.observed).sum()), 1)
        self.assertFalse(fm.observed[1, 1])

    def testMinMaxScaling(self):
        fm = loadCsv(self.writeCsv("0,7\n5,7\n10,7\n"))
        np.testing.assert_allclose(fm.values[:, 0], [0.0, 0.5, 1.0])
        np.testing.assert_array_equal(fm.values[:, 1], [0.0, 0.0, 0.0])

    def testScalingIgnoresMissingEntries(self):
        fm = loadCsv(self.writeCsv("0,1\n,2\n4,3\n"))
        np.testing.assert_allclose(fm.values[[0, 2], 0], [0.0, 1.0])
        self.assertTrue(np.all((fm.values[fm.observed] >= 0.0) & (fm.values[fm.observed] <= 1.0)))

    def testHeaderAndLabels(self):
        fm = loadCsv(self.writeCsv("a,b,label\n1,2,0\n3,4,1\n5,6,\n"), hasLabels=True, hasHeader=True)
        self.assertEqual(fm.n_features, 2)
        np.testing.assert_array_equal(fm.labels, [0, 1, -1])

    def testTextLabelsAreCodedInSortedOrder(self):
        fm = loadCsv(self.writeCsv("1,cat\n2,ant\n3,cat\n"), hasLabels=True)
        np.testing.assert_array_equal(fm.labels, [1, 0, 1])

    def testColumnCountMismatch(self):
        with self.assertRaises(DataValidationError):
            loadCsv(self.writeCsv("1,2\n3\n"))

    def testLongerRowIsRejected(self):
        with self.assertRaises(DataValidationError):
            loadCsv(self.writeCsv("1,2\n3,4,5\n"))

    def testShortRowReportsItsLine(self):
        with self.assertRaisesRegex(DataValidationError, "row 3 has 1 columns, expected 2"):
            loadCsv(self.writeCsv("a,b\n1,2\n3\n"), hasHeader=True)

    def testQuotedCellsAndBlankLines(self):
        fm = loadCsv(self.writeCsv("\"0\",1\n\n\"10\", 3\n"))
        self.assertEqual(fm.values.shape, (2, 2))
        np.testing.assert_allclose(fm.values[:, 0], [0.0, 1.0])
        self.assertTrue(fm.observed.all())

    def testMissingFileIsDataError(self):
        with self.assertRaises(DataValidationError):
            loadCsv(os.path.join(self.directory.name, "absent.csv"))

    def testAllMissingRow(self):
        with self.assertRaises(DataValidationError):
            loadCsv(self.writeCsv("1,2\n,\n"))

    def testNonNumericCell(self):
        with self.assertRaises(DataValidationError):
            loadCsv(self.writeCsv("1,2\nx,4\n"))


class ApplyMissingMaskTest(unittest.TestCase):

    def setUp(self):
        self.fm = featureMatrix(np.random.default_rng(0).uniform(size=(10, 10)))

    def testZeroFractionKeepsMask(self):
        masked = applyMissingMask(self.fm, 0.0, seed=3)
        np.testing.assert_array_equal(masked.observed, self.fm.observed)

    def testExactCount(self):
        masked = applyMissingMask(self.fm, 0.25, seed=7)
        self.assertEqual(self.fm.observedCount - masked.observedCount, 25)

    def testDeterministic(self):
        first = applyMissingMask(self.fm, 0.25, seed=7)
        second = applyMissingMask(self.fm, 0.25, seed=7)
        np.testing.assert_array_equal(first.observed, second.observed)

    def testRerunWithZeroFractionChangesNothing(self):
        masked = applyMissingMask(self.fm, 0.3, seed=1)
        again = applyMissingMask(masked, 0.0, seed=2)
        np.testing.assert_array_equal(masked.observed, again.observed)

    def testNeverEmptiesARow(self):
        masked = applyMissingMask(self.fm, 0.85, seed=11)
        self.assertTrue(np.all(masked.observed.any(axis=1)))
        self.assertEqual(self.fm.observedCount - masked.observedCount, 85)

    def testInputIsNotModified(self):
        before = self.fm.observed.copy()
        applyMissingMask(self.fm, 0.5, seed=4)
        np.testing.assert_array_equal(self.fm.observed, before)

    def testUnsatisfiableFraction(self):
        single = featureMatrix(np.zeros((5, 1)))
        with self.assertRaises(DataValidationError):
            applyMissingMask(single, 0.5, seed=0)

    def testFractionOutOfRange(self):
        with self.assertRaises(DataValidationError):
            applyMissingMask(self.fm, 1.0, seed=0)


class GenerateSyntheticTest(unittest.TestCase):

    def testZeroNoiseRowsOfAClassCoincide(self):
        fm = generateSynthetic(12, 3, 3, 0.0, seed=2)
        for label in range(3):
            rows = fm.values[fm.labels == label]
            np.testing.assert_array_equal(rows, np.repeat(rows[:1], len(rows), axis=0))

    def testSingleClass(self):
        fm = generateSynthetic(8, 3, 1, 0.1, seed=2)
        self.assertTrue(np.all(fm.labels == fm.labels[0]))

    def testEveryClassPresent(self):
        fm = generateSynthetic(7, 2, 7, 0.1, seed=5)
        self.assertEqual(sorted(fm.labels.tolist()), list(range(7)))

    def testDeterministic(self):
        first = generateSynthetic(20, 4, 2, 0.1, seed=9)
        second = generateSynthetic(20, 4, 2, 0.1, seed=9)
        np.testing.assert_array_equal(first.values, second.values)
        np.testing.assert_array_equal(first.labels, second.labels)

    def testClustersAreTighterThanTheirSeparation(self):
        fm = generateSynthetic(50, 10, 3, 0.05, seed=1)
        distances = np.linalg.norm(fm.values[:, None, :] - fm.values[None, :, :], axis=2)
        same = fm.labels[:, None] == fm.labels[None, :]
        offDiagonal = ~np.eye(50, dtype=bool)
        within = distances[same & offDiagonal].mean()
        between = distances[~same].mean()
        self.assertLess(within, between)

    def testScaledToUnitInterval(self):
        fm = generateSynthetic(30, 5, 3, 0.2, seed=4)
        self.assertGreaterEqual(fm.values.min(), 0.0)
        self.assertLessEqual(fm.values.max(), 1.0)

    def testTooManyClasses(self):
        with self.assertRaises(DataValidationError):
            generateSynthetic(3, 2, 4, 0.1, seed=0)


class ConductivityTest(unittest.TestCase):

    def testFullyObservedPairIsAllBase(self):
        fm = featureMatrix([[0.0, 1.0, 0.5], [1.0, 0.0, 0.2]])
        K = buildConductivity(fm, Neighborhoods({0: [1], 1: [0]}, k=1), base=1.0)
        np.testing.assert_array_equal(K.edge(0, 1), [1.0, 1.0, 1.0])
        self.assertTrue(K.symmetric)

    def testMissingFeatureBlocksDiffusion(self):
        observed = [[True, True, True, True], [True, True, True, False]]
        fm = featureMatrix(np.ones((2, 4)), observed)
        K = buildConductivity(fm, Neighborhoods({0: [1], 1: [0]}, k=1), base=2.0)
        np.testing.assert_array_equal(K.edge(0, 1), [2.0, 2.0, 2.0, 0.0])

    def testNoSharedFeatures(self):
        fm = featureMatrix(np.ones((2, 2)), [[True, False], [False, True]])
        K = buildConductivity(fm, Neighborhoods({0: [1], 1: [0]}, k=1), base=1.0)
        np.testing.assert_array_equal(K.edge(0, 1), [0.0, 0.0])

    def testMaskingRuleOnRandomData(self):
        rng = np.random.default_rng(8)
        fm = applyMissingMask(featureMatrix(rng.uniform(size=(15, 6))), 0.4, seed=8)
        nbhd = knnNeighborhoods(fm, 4)
        K = buildConductivity(fm, nbhd, base=0.7)
        for (i, j), vector in K.entries.items():
            self.assertIn(j, nbhd.neighbors(i))
            positive = vector > 0
            self.assertTrue(np.all(fm.observed[i, positive] & fm.observed[j, positive]))
            self.assertTrue(np.all(vector >= 0))

    def testOnlyNeighborhoodEdgesMaterialized(self):
        fm = featureMatrix(np.random.default_rng(1).uniform(size=(6, 2)))
        nbhd = knnNeighborhoods(fm, 2)
        K = buildConductivity(fm, nbhd, base=1.0)
        self.assertEqual(set(K.entries), set(nbhd.edges()))
        with self.assertRaises(ValueError):
            K.edge(0, 0)


class NeighborhoodTest(unittest.TestCase):

    def testMaskedDistanceIsOverlapNormalized(self):
        observed = [[True, True], [True, True], [True, False]]
        fm = featureMatrix([[0.0, 0.0], [1.0, 1.0], [0.5, 0.0]], observed)
        distances = maskedDistanceMatrix(fm)
        self.assertAlmostEqual(distances[0, 1], 1.0, places=12)
        self.assertAlmostEqual(distances[0, 2], 0.5, places=12)
        self.assertEqual(distances[1, 1], 0.0)

    def testZeroOverlapIsInfinite(self):
        fm = featureMatrix(np.ones((2, 2)), [[True, False], [False, True]])
        self.assertTrue(np.isinf(maskedDistanceMatrix(fm)[0, 1]))

    def testIdenticalRowsOrderedByIndex(self):
        fm = featureMatrix(np.full((3, 2), 0.4))
        nbhd = knnNeighborhoods(fm, 2)
        self.assertEqual(nbhd.adjacency, {0: [1, 2], 1: [0, 2], 2: [0, 1]})

    def testRowsOnALine(self):
        fm = featureMatrix([[0.0], [0.1], [1.0]])
        nbhd = knnNeighborhoods(fm, 1)
        self.assertEqual(nbhd.adjacency, {0: [1], 1: [0], 2: [1]})

    def testZeroOverlapPeerAvoided(self):
        observed = [[True, False], [False, True], [True, True]]
        fm = featureMatrix([[0.1, 0.0], [0.0, 0.9], [0.5, 0.2]], observed)
        nbhd = knnNeighborhoods(fm, 1)
        self.assertEqual(nbhd.neighbors(0), [2])
        self.assertEqual(nbhd.neighbors(1), [2])

    def testTruncatedNeighborhoodWarns(self):
        observed = [[True, False], [False, True], [True, True]]
        fm = featureMatrix([[0.1, 0.0], [0.0, 0.9], [0.5, 0.2]], observed)
        with self.assertLogs('framework.dataset.NeighborhoodBuilder', level='WARNING'):
            nbhd = knnNeighborhoods(fm, 2)
        self.assertEqual(nbhd.neighbors(0), [2])
        self.assertIn(0, nbhd.truncated)
        self.assertEqual(nbhd.neighbors(2), [0, 1])

    def testIsolatedNodeStillGetsANeighbor(self):
        observed = [[True, False], [False, True], [False, True]]
        fm = featureMatrix([[0.3, 0.0], [0.0, 0.5], [0.0, 0.6]], observed)
        with self.assertLogs('framework.dataset.NeighborhoodBuilder', level='WARNING'):
            nbhd = knnNeighborhoods(fm, 1)
        self.assertEqual(nbhd.neighbors(0), [1])

    def testInvariants(self):
        fm = featureMatrix(np.random.default_rng(3).uniform(size=(20, 3)))
        nbhd = knnNeighborhoods(fm, 4)
        distances = maskedDistanceMatrix(fm)
        for i in range(20):
            neighbors = nbhd.neighbors(i)
            self.assertNotIn(i, neighbors)
            self.assertEqual(len(neighbors), 4)
            self.assertEqual(list(distances[i, neighbors]), sorted(distances[i, neighbors]))

    def testPermutationEquivariance(self):
        rng = np.random.default_rng(12)
        values = rng.uniform(size=(15, 4))
        permutation = rng.permutation(15)
        original = knnNeighborhoods(featureMatrix(values), 3)
        permuted = knnNeighborhoods(featureMatrix(values[permutation]), 3)
        for newIndex, oldIndex in enumerate(permutation):
            expected = [int(np.flatnonzero(permutation == j)[0]) for j in original.neighbors(oldIndex)]
            self.assertEqual(permuted.neighbors(newIndex), expected)

    def testInvalidK(self):
        fm = featureMatrix(np.zeros((3, 1)))
        with self.assertRaises(ValueError):
            knnNeighborhoods(fm, 3)
        with self.assertRaises(ValueError):
            knnNeighborhoods(fm, 0)


if __name__ == '__main__':
    unittest.main()
