# Copyright 2024 by the corrlab authors.
# Licensed under the Apache 2.0 License.
"""Tests for the lemma functional, the four-value certificate and the
determinant obstruction.
"""

import unittest

import numpy as np

from corrlab.base import ValidationError
from corrlab.algebra import TracialAlgebra, BlockOperator, is_unitary, \
     random_unitary, random_symmetry
from corrlab.gram import UnitaryTuple, compute_gram
from corrlab.witness import WitnessSpec, build_witness_tuple, \
     build_symmetries, limit_gram
from corrlab.certificate import lemma_value, lemma_identity_defect, \
     certificate, det_obstruction, phase_excluded, factorization_defect
from utils import KAPPA, SQRT2, make_rng, all_ones, diag_operator


def _equality_partner(alg, u):
    return (1.0 / SQRT2) * (u + alg.scalar(1j))


class TestLemma(unittest.TestCase):
    def test_value_never_exceeds_two(self):
        rng = make_rng(20)
        for _ in range(500):
            alg = TracialAlgebra.single(int(rng.integers(1, 9)))
            u = random_unitary(alg, rng)
            v = random_unitary(alg, rng)
            self.assertLessEqual(lemma_value(alg, u, v), 2.0 + 1e-12)
            self.assertLess(lemma_identity_defect(alg, u, v), 1e-10)

    def test_symmetries_reach_two(self):
        rng = make_rng(21)
        for _ in range(200):
            alg = TracialAlgebra.single(int(rng.integers(1, 9)))
            s = random_symmetry(alg, rng)
            v = _equality_partner(alg, s)
            self.assertAlmostEqual(lemma_value(alg, s, v), 2.0, delta=1e-10)

    def test_partner_of_a_non_symmetry_is_not_unitary(self):
        rng = make_rng(22)
        for _ in range(200):
            d = int(rng.integers(1, 9))
            alg = TracialAlgebra.single(d)
            phi = rng.uniform(0.2, np.pi - 0.2) * rng.choice([-1.0, 1.0])
            spectrum = rng.choice([-1.0, 1.0], size=d).astype(np.complex128)
            spectrum[0] = np.exp(1j * phi)
            w = random_unitary(alg, rng).blocks[0]
            u = BlockOperator([(w * spectrum[np.newaxis, :]) @ w.conj().T])
            self.assertTrue(is_unitary(alg, u))
            self.assertFalse(is_unitary(alg, _equality_partner(alg, u), 1e-3))

    def test_known_values(self):
        alg = TracialAlgebra.single(3)
        one = alg.identity()
        i = alg.scalar(1j)
        self.assertAlmostEqual(lemma_value(alg, one, one), SQRT2)
        self.assertAlmostEqual(lemma_value(alg, i, i), 2 * SQRT2 - 1)
        self.assertAlmostEqual(lemma_value(alg, one, _equality_partner(alg, one)),
                               2.0)

    def test_multi_block_and_non_unitary_input(self):
        rng = make_rng(23)
        alg = TracialAlgebra([1, 2, 3], [0.2, 0.3, 0.5])
        s = random_symmetry(alg, rng)
        self.assertAlmostEqual(lemma_value(alg, s, _equality_partner(alg, s)),
                               2.0, delta=1e-10)
        with self.assertRaises(ValidationError):
            lemma_value(TracialAlgebra.single(2), diag_operator(1.0, 0.5),
                        diag_operator(1.0, 1.0))


class TestCertificate(unittest.TestCase):
    def test_limit_matrix_is_certified(self):
        report = certificate(limit_gram(KAPPA), KAPPA)
        self.assertTrue(report.passes)
        for c in report.c:
            self.assertAlmostEqual(c, 2.0, delta=1e-12)
        self.assertAlmostEqual(report.deficiency, 0.0, delta=1e-11)
        self.assertIsNotNone(report.implication)
        self.assertEqual(report.as_dict()['c'], list(report.c))

    def test_all_ones_is_not_certified(self):
        report = certificate(all_ones(8), 0.0)
        self.assertFalse(report.passes)
        for c in report.c:
            self.assertAlmostEqual(c, SQRT2)
        self.assertAlmostEqual(report.deficiency, 4 * (2 - SQRT2))
        self.assertIsNone(report.implication)

    def test_witness_is_certified_at_its_rational_phase(self):
        for d in (8, 32, 128):
            spec = WitnessSpec(KAPPA, d)
            g = compute_gram(build_witness_tuple(spec))
            report = certificate(g, spec.m / (2.0 * d))
            self.assertTrue(report.passes, report)
            # the irrational phase is missed by the rational one
            self.assertFalse(certificate(g, KAPPA).passes)

    def test_longer_matrices_use_the_leading_block(self):
        g = compute_gram(build_witness_tuple(WitnessSpec(KAPPA, 8, n=10)))
        self.assertTrue(certificate(g, WitnessSpec(KAPPA, 8).m / 16.0).passes)

    def test_bad_inputs(self):
        with self.assertRaises(ValidationError):
            certificate(all_ones(7), KAPPA)
        bad = np.eye(8, dtype=np.complex128)
        bad[0, 1] = bad[1, 0] = 2.0
        with self.assertRaises(ValidationError):
            certificate(bad, KAPPA)


class TestDeterminant(unittest.TestCase):
    def test_identities(self):
        alg = TracialAlgebra.single(3)
        dets = det_obstruction([alg.identity()] * 4, alg)
        self.assertEqual(len(dets), 1)
        self.assertAlmostEqual(dets[0], 1.0)

    def test_clock_flip_products(self):
        for d in (2, 4):
            q = build_symmetries(d, 1)
            (det,) = det_obstruction(q.as_list(), q.alg)
            self.assertAlmostEqual(det, -1.0, places=10)
            # agrees with the determinant of the scalar product
            self.assertAlmostEqual(det, q.phase ** d, places=10)

    def test_multi_block(self):
        rng = make_rng(24)
        alg = TracialAlgebra([1, 2])
        syms = [random_symmetry(alg, rng) for _ in range(4)]
        for det in det_obstruction(syms, alg):
            self.assertAlmostEqual(abs(det), 1.0, places=10)
            self.assertAlmostEqual(det.imag, 0.0, places=10)

    def test_non_symmetry_is_reported_with_index(self):
        alg = TracialAlgebra.single(2)
        with self.assertRaises(ValidationError) as cm:
            det_obstruction([alg.identity(), alg.identity(),
                             diag_operator(1j, 1.0)], alg)
        self.assertEqual(cm.exception.index, 3)

    def test_phase_exclusion(self):
        for d in range(1, 1025):
            self.assertTrue(phase_excluded(TracialAlgebra.single(d), KAPPA), d)
        self.assertFalse(phase_excluded(TracialAlgebra.single(2), 0.25))
        self.assertTrue(phase_excluded(TracialAlgebra([1, 2]), 0.25))
        self.assertFalse(phase_excluded(TracialAlgebra([2, 4]), 0.25))

    def test_witness_factorizes(self):
        spec = WitnessSpec(KAPPA, 16)
        t = build_witness_tuple(spec)
        report = factorization_defect(t, spec.m / 32.0)
        for e in report.symmetry_defects:
            self.assertLess(e, 1e-10)
        self.assertLess(report.product_defect, 1e-10)
        with self.assertRaises(ValidationError):
            factorization_defect(UnitaryTuple(t.alg, t.unitaries[:3]), KAPPA)


if __name__ == '__main__':
    unittest.main()
