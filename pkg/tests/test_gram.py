# Copyright 2024 by the corrlab authors.
# Licensed under the Apache 2.0 License.
"""Tests for the correlation map and Gram matrix validation.
"""

import unittest

import numpy as np

from corrlab.base import ValidationError
from corrlab.algebra import TracialAlgebra, random_unitary, trace
from corrlab.gram import UnitaryTuple, GramMatrix, compute_gram, gram_array, \
     validate_gram, require_valid, convex_combine, max_entry_distance, \
     frobenius_distance, identity_tuple, single_block_tuple
from utils import make_rng, random_tuple, random_algebra, all_ones


class TestGramMap(unittest.TestCase):
    def test_random_tuples_give_correlation_matrices(self):
        rng = make_rng(10)
        for _ in range(200):
            n = int(rng.integers(1, 9))
            alg = TracialAlgebra.single(int(rng.integers(1, 7)))
            g = compute_gram(random_tuple(alg, n, rng))
            report = validate_gram(g)
            self.assertTrue(report.passes, report)
            self.assertGreaterEqual(report.min_eigenvalue, -1e-8)
            self.assertEqual(g.flags, ())

    def test_multi_block_tuples(self):
        rng = make_rng(11)
        for _ in range(20):
            alg = random_algebra(rng)
            t = random_tuple(alg, 5, rng)
            self.assertTrue(validate_gram(compute_gram(t)).passes)

    def test_invariance_under_left_multiplication_and_conjugation(self):
        rng = make_rng(12)
        for _ in range(20):
            alg = random_algebra(rng)
            t = random_tuple(alg, 6, rng)
            w = random_unitary(alg, rng)
            g = compute_gram(t)
            left = compute_gram(t.map(lambda u: w @ u))
            conj = compute_gram(t.map(lambda u: w @ u @ w.adjoint()))
            np.testing.assert_allclose(left.entries, g.entries, rtol=0, atol=1e-10)
            np.testing.assert_allclose(conj.entries, g.entries, rtol=0, atol=1e-10)

    def test_convex_combination(self):
        rng = make_rng(13)
        for lam in (0.0, 0.25, 0.5, 0.9, 1.0):
            t1 = random_tuple(TracialAlgebra.single(3), 4, rng)
            t2 = random_tuple(TracialAlgebra([1, 2]), 4, rng)
            combined = compute_gram(convex_combine(t1, t2, lam))
            expected = lam * compute_gram(t1).entries + \
                (1.0 - lam) * compute_gram(t2).entries
            np.testing.assert_allclose(combined.entries, expected, rtol=0,
                                       atol=1e-12)
        with self.assertRaises(ValidationError):
            convex_combine(t1, random_tuple(TracialAlgebra.single(2), 3, rng), 0.5)

    def test_identity_tuple(self):
        g = compute_gram(identity_tuple(TracialAlgebra.single(4), 3))
        np.testing.assert_allclose(g.entries, all_ones(3), atol=1e-15)

    def test_entries_are_one_based_and_ordered(self):
        t = single_block_tuple([np.eye(2), np.diag([1.0, -1.0]),
                                np.diag([1j, 1j])])
        g = compute_gram(t)
        self.assertAlmostEqual(g.entry(1, 1), 1.0)
        self.assertAlmostEqual(g.entry(2, 1), 0.0)
        # a[i][j] = tau(U_j* U_i)
        self.assertAlmostEqual(g.entry(3, 1), 1j)
        self.assertAlmostEqual(g.entry(1, 3), -1j)
        self.assertEqual(g.leading(2).n, 2)

    def test_non_unitary_entry_is_rejected_with_index(self):
        t = single_block_tuple([np.eye(2), np.eye(2), np.diag([1.0, 0.9])])
        with self.assertRaises(ValidationError) as cm:
            compute_gram(t)
        self.assertEqual(cm.exception.index, 3)
        self.assertIn('Entry 3', str(cm.exception))

    def test_near_unitary_entry_is_flagged(self):
        t = single_block_tuple([np.eye(2), (1.0 + 5e-10) * np.eye(2)])
        with self.assertLogs('corrlab.gram', level='WARNING'):
            g = compute_gram(t)
        self.assertEqual(len(g.flags), 1)
        self.assertIn('entry 2', g.flags[0])

    def test_zero_weight_block_is_flagged(self):
        alg = TracialAlgebra([1, 1], [1.0, 0.0])
        t = UnitaryTuple(alg, [alg.identity(), alg.from_diagonals([[1], [-1]])])
        with self.assertLogs('corrlab.gram', level='WARNING'):
            g = compute_gram(t)
        np.testing.assert_allclose(g.entries, all_ones(2), atol=1e-15)
        self.assertTrue(any('not faithful' in f for f in g.flags))

    def test_empty_tuple(self):
        with self.assertRaises(ValidationError):
            UnitaryTuple(TracialAlgebra.single(2), [])

    def test_gram_array_matches_traces(self):
        rng = make_rng(14)
        alg = TracialAlgebra([2, 3], [0.3, 0.7])
        t = random_tuple(alg, 3, rng)
        a = gram_array(alg, t.unitaries)
        for i in range(3):
            for j in range(3):
                self.assertAlmostEqual(a[i, j], trace(alg, t[j].adjoint() @ t[i]),
                                       places=12)


class TestValidation(unittest.TestCase):
    def test_not_positive(self):
        report = validate_gram(np.array([[1.0, 2.0], [2.0, 1.0]]))
        self.assertFalse(report.passes)
        self.assertAlmostEqual(report.min_eigenvalue, -1.0)
        with self.assertRaises(ValidationError):
            require_valid(np.array([[1.0, 2.0], [2.0, 1.0]]))

    def test_not_hermitian_or_unit_diagonal(self):
        report = validate_gram(np.array([[1.0, 0.5j], [0.5j, 1.0]]))
        self.assertFalse(report.passes)
        self.assertAlmostEqual(report.hermiticity_defect, 1.0)
        report = validate_gram(np.diag([1.0, 2.0]))
        self.assertFalse(report.passes)
        self.assertAlmostEqual(report.diagonal_defect, 1.0)

    def test_tolerance(self):
        a = np.eye(2)
        a[0, 0] += 1e-7
        self.assertFalse(validate_gram(a, 1e-8).passes)
        self.assertTrue(validate_gram(a, 1e-6).passes)

    def test_report_as_dict(self):
        d = validate_gram(all_ones(3)).as_dict()
        self.assertEqual(d['n'], 3)
        self.assertTrue(d['passes'])

    def test_gram_shape(self):
        with self.assertRaises(ValidationError):
            GramMatrix(np.ones((2, 3)))
        with self.assertRaises(ValidationError):
            validate_gram(np.ones(3))
        with self.assertRaises(ValidationError):
            validate_gram(np.zeros((0, 0)))

    def test_distances(self):
        a = np.eye(2)
        b = np.array([[1.0, 0.5], [0.5, 1.0]])
        self.assertAlmostEqual(max_entry_distance(a, GramMatrix(b)), 0.5)
        self.assertAlmostEqual(frobenius_distance(a, b), np.sqrt(0.5))


if __name__ == '__main__':
    unittest.main()
