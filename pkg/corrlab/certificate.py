# Copyright 2024 by the corrlab authors.
# Licensed under the Apache 2.0 License.
"""
Certificates that a correlation matrix is not realizable in finite dimensions.

For unitaries U, V in an algebra with a tracial state,

    sqrt(2) Re tau(U* V) - Im tau(U - sqrt(2) V)
        = 2 - 1/2 tau(X* X),   X = U + i I - sqrt(2) V

so the left-hand side (lemma_value) is at most 2, with equality iff
V = (U + i I) / sqrt(2). When the trace is faithful, V is then unitary only
if U is a symmetry. certificate() evaluates this functional on four pairs of
the witness layout directly from Gram entries; if all four values equal 2
for a matrix realized in finite dimensions, e^{2 pi i kappa} I is a product
of four symmetries, which the determinant rules out for irrational kappa.
"""

import logging
import math
from collections import namedtuple

import numpy as np
import scipy.linalg

from corrlab.base import ValidationError
from corrlab.algebra import inner, trace, hs_distance, unitarity_defect, \
     is_symmetry, self_adjoint_defect
from corrlab.gram import require_valid, _as_array

logger = logging.getLogger(__name__)

SQRT2 = math.sqrt(2.0)
DEFAULT_CERT_TOL = 1e-9
LEMMA_UNITARY_TOL = 1e-8
CERT_GRAM_TOL = 1e-8
SYMMETRY_TOL = 1e-8

IMPLICATION = ("All four values equal 2. If this matrix were the Gram matrix "
               "of unitaries V1..V8 in a finite-dimensional algebra with a "
               "faithful trace, then V1*V2, V2*V3, V3*V4 and "
               "e^{-2 pi i kappa} V1*V4 would be symmetries whose product "
               "(last factor adjointed) is e^{2 pi i kappa} I. A product of "
               "symmetries has determinant +1 or -1 in every block, so this "
               "is impossible for irrational kappa.")


def _check_pair(alg, u, v, tol):
    for (what, x) in (('U', u), ('V', v)):
        alg.check(x, what)
        e = unitarity_defect(alg, x)
        if e > tol:
            raise ValidationError("%s is not unitary (defect %.3g, tolerance %.3g)" %
                                  (what, e, tol))


def lemma_value(alg, u, v, tol=LEMMA_UNITARY_TOL):
    """sqrt(2) Re tau(U* V) - Im tau(U - sqrt(2) V) for unitaries U, V.
    Never exceeds 2; equals 2 exactly when V = (U + iI) / sqrt(2).
    """
    _check_pair(alg, u, v, tol)
    return SQRT2 * inner(alg, v, u).real - \
        (trace(alg, u) - SQRT2 * trace(alg, v)).imag


def lemma_identity_defect(alg, u, v):
    """|1/2 tau(X* X) - (2 + Re tau(-iU + sqrt(2) iV - sqrt(2) U*V))| with
    X = U + iI - sqrt(2) V. Zero up to round-off for unitary U and V.
    """
    alg.check(u, 'U')
    alg.check(v, 'V')
    x = u + alg.scalar(1j) - SQRT2 * v
    lhs = 0.5 * hs_distance(alg, x, alg.zeros()) ** 2
    rhs = 2.0 + (trace(alg, -1j * u + (SQRT2 * 1j) * v) -
                 SQRT2 * inner(alg, v, u)).real
    return abs(lhs - rhs)


CertificateReport = namedtuple('CertificateReport',
                               ['kappa', 'c', 'deficiency', 'passes', 'tol',
                                'implication'])
CertificateReport.__doc__ = """The four certificate values c1..c4 of a Gram
matrix at phase kappa. deficiency is sum(2 - c_j); implication is the
non-realizability argument when passes, otherwise None.
"""

def _certificate_as_dict(self):
    return {'kappa': self.kappa,
            'c': list(self.c),
            'deficiency': self.deficiency,
            'passes': self.passes,
            'tol': self.tol,
            'implication': self.implication}

CertificateReport.as_dict = _certificate_as_dict


def certificate(g, kappa, tol=DEFAULT_CERT_TOL):
    """Evaluate the four certificate values on the leading 8 x 8 block of g.
    The matrix must be a correlation matrix (checked at 1e-8).
    """
    a = _as_array(g)
    if a.shape[0] < 8:
        raise ValidationError("Certificates need an n x n Gram matrix with n >= 8, got n = %d" %
                              a.shape[0])
    require_valid(a, CERT_GRAM_TOL)

    def e(i, j):
        return a[i - 1, j - 1]
    c = []
    for j in (1, 2, 3):
        c.append(SQRT2 * e(j + 4, j + 1).real -
                 (e(j + 1, j) - SQRT2 * e(j + 4, j)).imag)
    phase = np.exp(2j * np.pi * kappa)
    c.append(SQRT2 * (phase * e(8, 4)).real -
             (phase.conjugate() * e(4, 1) - SQRT2 * e(8, 1)).imag)
    c = tuple(float(x) for x in c)
    passes = all(abs(x - 2.0) <= tol for x in c)
    report = CertificateReport(float(kappa), c, float(sum(2.0 - x for x in c)),
                               passes, tol, IMPLICATION if passes else None)
    logger.debug("certificate at kappa=%r: c=%s passes=%s", kappa, c, passes)
    return report


def det_obstruction(symmetries, alg, tol=SYMMETRY_TOL):
    """Per-block determinant of the product of the given symmetries,
    computed as the product of their determinants. Each value is +1 or -1
    up to round-off.
    """
    dets = np.ones(alg.num_blocks, dtype=np.complex128)
    for (i, s) in enumerate(symmetries):
        alg.check(s, 'entry %d' % (i + 1))
        if not is_symmetry(alg, s, tol):
            raise ValidationError("Entry %d is not a symmetry (self-adjoint defect %.3g, unitarity defect %.3g)" %
                                  (i + 1, self_adjoint_defect(alg, s),
                                   unitarity_defect(alg, s)), index=i + 1)
        dets *= [scipy.linalg.det(b) for b in s.blocks]
    return [complex(d) for d in dets]


def _half_integer_distance(x):
    """Distance from x mod 1 to {0, 1/2}."""
    f = math.fmod(2.0 * x, 1.0)
    if f < 0:
        f += 1.0
    return min(f, 1.0 - f) / 2.0


def phase_excluded(alg, kappa, tol=SYMMETRY_TOL):
    """True when no product of symmetries in alg can equal
    e^{2 pi i kappa} I: in some block of dimension d the scalar has
    determinant e^{2 pi i kappa d}, which is +1 or -1 only when
    d kappa mod 1 lies in {0, 1/2}.
    """
    return any(_half_integer_distance(d * kappa) > tol for d in alg.dims)


FactorizationReport = namedtuple('FactorizationReport',
                                 ['symmetry_defects', 'product_defect'])


def factorization_defect(t, kappa):
    """For a tuple V1..V8, how far W1 = V1*V2, W2 = V2*V3, W3 = V3*V4 and
    W4 = e^{-2 pi i kappa} V1*V4 are from symmetries (operator norm), and
    how far W1 W2 W3 W4* is from e^{2 pi i kappa} I.
    """
    if t.n < 4:
        raise ValidationError("Factorization needs at least 4 unitaries, got %d" % t.n)
    alg = t.alg
    (v1, v2, v3, v4) = t.unitaries[:4]
    phase = complex(np.exp(2j * np.pi * kappa))
    w = [v1.adjoint() @ v2, v2.adjoint() @ v3, v3.adjoint() @ v4,
         phase.conjugate() * (v1.adjoint() @ v4)]
    defects = [max(self_adjoint_defect(alg, x), unitarity_defect(alg, x))
               for x in w]
    product = w[0] @ w[1] @ w[2] @ w[3].adjoint()
    residual = product - alg.scalar(phase)
    product_defect = max(float(np.linalg.norm(b, 2)) for b in residual.blocks)
    return FactorizationReport(defects, product_defect)
