# Copyright 2024 by the corrlab authors.
# Licensed under the Apache 2.0 License.
"""
The correlation map from unitary tuples to Gram matrices

    a[i][j] = tau(U_j* U_i)

together with validation of candidate correlation matrices and exact convex
combinations via weighted direct sums. Storage is 0-based; every report and
error message uses 1-based indices.
"""

import logging
from collections import namedtuple

import numpy as np
import scipy.linalg

from corrlab.base import ValidationError
from corrlab.algebra import TracialAlgebra, BlockOperator, direct_sum, \
     unitarity_defects

logger = logging.getLogger(__name__)

TUPLE_UNITARY_TOL = 1e-8   # per unit of block dimension
NEAR_UNITARY_TOL = 1e-10   # per unit of block dimension; above it, flag
DEFAULT_GRAM_TOL = 1e-8


class UnitaryTuple:
    """An ordered list of n >= 1 operators of one algebra. Unitarity is
    checked by check() and compute_gram(), not at construction, so that
    near-unitary optimizer output can still be inspected.
    """
    def __init__(self, alg, unitaries):
        unitaries = tuple(unitaries)
        if len(unitaries) == 0:
            raise ValidationError("A unitary tuple needs n >= 1 entries")
        for (i, u) in enumerate(unitaries):
            alg.check(u, 'entry %d' % (i + 1))
        self.alg = alg
        self.unitaries = unitaries

    @property
    def n(self):
        return len(self.unitaries)

    def __len__(self):
        return len(self.unitaries)

    def __getitem__(self, i):
        return self.unitaries[i]

    def __iter__(self):
        return iter(self.unitaries)

    def defects(self):
        """Worst unitarity defect of each entry, divided by the block
        dimension it occurs in.
        """
        return [max(e / d for (e, d) in
                    zip(unitarity_defects(self.alg, u), self.alg.dims))
                for u in self.unitaries]

    def check(self, tol=TUPLE_UNITARY_TOL):
        """Raise ValidationError naming the first entry whose scaled defect
        exceeds tol. Returns the list of scaled defects.
        """
        defects = self.defects()
        for (i, e) in enumerate(defects):
            if e > tol:
                raise ValidationError("Entry %d of the tuple is not unitary (defect %.3g per dimension, tolerance %.3g)" %
                                      (i + 1, e, tol), index=i + 1)
        return defects

    def map(self, fn):
        """Apply fn to every entry, keeping the algebra."""
        return UnitaryTuple(self.alg, [fn(u) for u in self.unitaries])

    def __repr__(self):
        return 'UnitaryTuple(n=%d, alg=%r)' % (self.n, self.alg)


class GramMatrix:
    """n x n complex matrix with a[i][j] = tau(U_j* U_i). flags records
    warnings raised while computing it (near-unitary inputs, non-faithful
    trace).
    """
    __slots__ = ('entries', 'flags')

    def __init__(self, entries, flags=()):
        a = np.array(entries, dtype=np.complex128)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
            raise ValidationError("A Gram matrix must be a non-empty square matrix, got shape %s" %
                                  (a.shape,))
        a.setflags(write=False)
        self.entries = a
        self.flags = tuple(flags)

    @property
    def n(self):
        return self.entries.shape[0]

    def entry(self, i, j):
        """a[i][j] with 1-based indices."""
        return complex(self.entries[i - 1, j - 1])

    def leading(self, k):
        return GramMatrix(self.entries[:k, :k], self.flags)

    def __repr__(self):
        return 'GramMatrix(n=%d%s)' % (self.n, ', flagged' if self.flags else '')


def gram_array(alg, unitaries):
    """Unchecked Gram computation: sum over blocks of
    (lambda_k / d_k) * M_k M_k^H, where row i of M_k is block k of U_i
    flattened. Entry (i, j) is the Frobenius product of U_i and U_j.
    """
    n = len(unitaries)
    a = np.zeros((n, n), dtype=np.complex128)
    for (k, c) in enumerate(alg.trace_weights):
        if c == 0.0:
            continue
        m = np.stack([u.blocks[k].ravel() for u in unitaries])
        a += c * (m @ m.conj().T)
    return a


def compute_gram(t):
    """Gram matrix of a unitary tuple. Entries that are unitary only up to
    a defect between NEAR_UNITARY_TOL and TUPLE_UNITARY_TOL (per unit of
    block dimension) are accepted but flagged.
    """
    defects = t.check(TUPLE_UNITARY_TOL)
    flags = []
    for (i, e) in enumerate(defects):
        if e > NEAR_UNITARY_TOL:
            flags.append("entry %d is only near-unitary (defect %.3g per dimension)" %
                         (i + 1, e))
    flags.extend(t.alg.validate())
    for f in flags:
        logger.warning("compute_gram: %s", f)
    return GramMatrix(gram_array(t.alg, t.unitaries), flags)


ValidationReport = namedtuple('ValidationReport',
                              ['n', 'hermiticity_defect', 'diagonal_defect',
                               'min_eigenvalue', 'tol', 'passes'])

def _report_as_dict(self):
    return {'n': self.n,
            'hermiticity_defect': self.hermiticity_defect,
            'diagonal_defect': self.diagonal_defect,
            'min_eigenvalue': self.min_eigenvalue,
            'tol': self.tol,
            'passes': self.passes}

ValidationReport.as_dict = _report_as_dict


def _as_array(g):
    if isinstance(g, GramMatrix):
        return g.entries
    a = np.asarray(g, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise ValidationError("Expected a non-empty square matrix, got shape %s" %
                              (a.shape,))
    return a


def validate_gram(g, tol=DEFAULT_GRAM_TOL):
    """Check the correlation-matrix invariants: Hermitian, unit diagonal,
    positive semidefinite. The eigenvalues are taken of the Hermitian part
    (a + a^H) / 2 so that tiny asymmetry does not spoil the PSD test.
    """
    a = _as_array(g)
    herm = float(np.max(np.abs(a - a.conj().T)))
    diag = float(np.max(np.abs(np.diag(a) - 1.0)))
    eigs = scipy.linalg.eigvalsh((a + a.conj().T) / 2.0)
    min_eig = float(eigs[0])
    passes = herm <= tol and diag <= tol and min_eig >= -tol
    return ValidationReport(a.shape[0], herm, diag, min_eig, tol, passes)


def require_valid(g, tol=DEFAULT_GRAM_TOL, what='Gram matrix'):
    report = validate_gram(g, tol)
    if not report.passes:
        raise ValidationError("%s is not a correlation matrix: hermiticity defect %.3g, diagonal defect %.3g, min eigenvalue %.3g (tolerance %.3g)" %
                              (what, report.hermiticity_defect,
                               report.diagonal_defect, report.min_eigenvalue,
                               tol))
    return report


def convex_combine(t1, t2, lam):
    """Entrywise direct sum of two tuples with weight lam on t1, so that
    Gram(result) = lam * Gram(t1) + (1 - lam) * Gram(t2).
    """
    if t1.n != t2.n:
        raise ValidationError("Cannot combine tuples of lengths %d and %d" %
                              (t1.n, t2.n))
    alg = None
    ops = []
    for (u1, u2) in zip(t1, t2):
        (alg, u) = direct_sum(t1.alg, u1, t2.alg, u2, lam)
        ops.append(u)
    return UnitaryTuple(alg, ops)


def max_entry_distance(g, h):
    return float(np.max(np.abs(_as_array(g) - _as_array(h))))


def frobenius_distance(g, h):
    return float(np.linalg.norm(_as_array(g) - _as_array(h)))


def identity_tuple(alg, n):
    return UnitaryTuple(alg, [alg.identity()] * n)


def single_block_tuple(blocks):
    """Tuple on a single block from plain square matrices."""
    blocks = [np.asarray(b) for b in blocks]
    alg = TracialAlgebra.single(blocks[0].shape[0])
    return UnitaryTuple(alg, [BlockOperator([b]) for b in blocks])
