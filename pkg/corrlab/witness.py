# Copyright 2024 by the corrlab authors.
# Licensed under the Apache 2.0 License.
"""
Exact finite-dimensional symmetry quadruples and the eight-unitary witness.

On C^d with basis e_0..e_{d-1} let

    D = diag(w^j),  w = exp(2 pi i / d)     (clock)
    J : e_j -> e_{-j}                       (flip)
    K : e_j -> e_{a-j},  a = -m mod d       (shifted flip)

Then J D J = D*, K D K = w^a D*, and with theta = pi m / d the four
symmetries

    S1 = e^{i theta} D K,  S2 = K,  S3 = D* J,  S4 = J

multiply to exactly e^{i theta} I. The witness tuple built from them has a
Gram matrix converging, as d grows with gcd(m, d) = 1 and theta -> 2 pi kappa,
to a matrix no finite-dimensional tuple realizes when kappa is irrational.

The limit is computed exactly by WordSum, a small symbolic algebra over words
e^{i p theta} D^q P where P is the index map j -> s j + k a.
"""

import logging
import math
from collections import namedtuple

import numpy as np

from corrlab.base import ValidationError
from corrlab.algebra import TracialAlgebra, BlockOperator
from corrlab.gram import UnitaryTuple, GramMatrix, compute_gram, \
     max_entry_distance

logger = logging.getLogger(__name__)

MIN_WITNESS_N = 8
SQRT2 = math.sqrt(2.0)


def _check_dm(d, m):
    if int(d) != d or d < 2:
        raise ValidationError("Symmetry quadruples need dimension d >= 2, got %r" % d)
    if int(m) != m or not 0 <= m < 2 * d:
        raise ValidationError("Phase index m must satisfy 0 <= m < 2d = %d, got %r" %
                              (2 * d, m))


def _check_kappa(kappa):
    if not math.isfinite(kappa):
        raise ValidationError("Target phase kappa must be finite, got %r" % kappa)


def _index_map(d, s, c):
    """Permutation matrix of e_j -> e_{(s j + c) mod d}."""
    j = np.arange(d)
    p = np.zeros((d, d))
    p[(s * j + c) % d, j] = 1.0
    return p


def build_clock_flip(d, m):
    """Return (D, J, K) as plain d x d arrays."""
    _check_dm(d, m)
    omega = np.exp(2j * np.pi * np.arange(d) / d)
    return (np.diag(omega), _index_map(d, -1, 0), _index_map(d, -1, (d - m) % d))


class SymmetryQuadruple:
    """Four symmetries on one block of dimension d with
    S1 S2 S3 S4 = e^{i theta} I, theta = pi m / d.
    """
    def __init__(self, d, m, s1, s2, s3, s4):
        self.d = d
        self.m = m
        self.s1 = s1
        self.s2 = s2
        self.s3 = s3
        self.s4 = s4

    @property
    def theta(self):
        return math.pi * self.m / self.d

    @property
    def kappa(self):
        """theta / 2 pi, the rational phase this quadruple realizes exactly."""
        return self.m / (2.0 * self.d)

    @property
    def phase(self):
        return complex(np.exp(1j * self.theta))

    @property
    def alg(self):
        return TracialAlgebra.single(self.d)

    def as_list(self):
        return [self.s1, self.s2, self.s3, self.s4]

    def product(self):
        return self.s1 @ self.s2 @ self.s3 @ self.s4

    def __repr__(self):
        return 'SymmetryQuadruple(d=%d, m=%d)' % (self.d, self.m)


def build_symmetries(d, m):
    (D, J, K) = build_clock_flip(d, m)
    phase = np.exp(1j * np.pi * m / d)
    omega = np.diag(D)
    s1 = phase * (omega[:, np.newaxis] * K)
    s3 = omega.conj()[:, np.newaxis] * J
    return SymmetryQuadruple(d, m, BlockOperator([s1]), BlockOperator([K]),
                             BlockOperator([s3]), BlockOperator([J]))


def choose_parameters(kappa, d):
    """The m in [0, 2d) coprime to d whose angle pi m / d is closest to
    2 pi kappa on the circle; ties go to the smaller m.

    Distances are measured in units of pi / d, where the target is
    2 kappa d mod 2d, so exact ties stay exact.
    """
    _check_kappa(kappa)
    if int(d) != d or d < 2:
        raise ValidationError("Dimension must be >= 2, got %r" % d)
    period = 2 * d
    target = math.fmod(2.0 * kappa * d, period)
    if target < 0:
        target += period
    m = np.arange(period)
    gap = np.abs(m - target)
    gap = np.minimum(gap, period - gap)
    gap[np.gcd(m, d) != 1] = np.inf
    best = float(np.min(gap))
    # lowest m within round-off of the optimum
    return int(np.flatnonzero(gap <= best + 1e-9 * max(1.0, best))[0])


class WitnessSpec:
    """Parameters of a witness tuple: irrational target phase kappa, tuple
    length n >= 8, block dimension d >= 2 and optionally an explicit phase
    index m (otherwise choose_parameters(kappa, d)).
    """
    def __init__(self, kappa, d, n=MIN_WITNESS_N, m=None):
        if n < MIN_WITNESS_N:
            raise ValidationError("A witness tuple has n >= %d entries, got %d" %
                                  (MIN_WITNESS_N, n))
        if d < 2:
            raise ValidationError("Witness dimension must be >= 2, got %d" % d)
        if m is not None:
            _check_dm(d, m)
        self.kappa = float(kappa)
        _check_kappa(self.kappa)
        self.d = int(d)
        self.n = int(n)
        self.m = choose_parameters(self.kappa, self.d) if m is None else int(m)

    def __repr__(self):
        return 'WitnessSpec(kappa=%r, d=%d, n=%d, m=%d)' % (self.kappa, self.d,
                                                           self.n, self.m)


def _witness_words(s1, s2, s3, s4, one, n):
    """The witness recipe, shared by the numeric and the symbolic builds:
    products use @, scalars use *.
    """
    r = 1.0 / SQRT2
    half_i = (1j * r) * one
    u = [one,
         s1,
         s1 @ s2,
         s1 @ s2 @ s3,
         r * s1 + half_i,
         s1 @ (r * s2 + half_i),
         s1 @ s2 @ (r * s3 + half_i),
         r * s4 + half_i]
    return u + [one] * (n - MIN_WITNESS_N)


def build_witness_tuple(spec):
    """U1..U8 of the witness plus U_k = I for k > 8, on a single block."""
    q = build_symmetries(spec.d, spec.m)
    words = _witness_words(q.s1, q.s2, q.s3, q.s4, q.alg.identity(), spec.n)
    logger.debug("built witness tuple for %r", spec)
    return UnitaryTuple(q.alg, words)


Word = namedtuple('Word', ['p', 'q', 's', 'k'])
Word.__doc__ = """e^{i p theta} D^q P, with P the index map j -> s j + k a."""


class WordSum:
    """Finite linear combination of words. Products are reduced with

        P_{s,c} D^q = w^{-s q c} D^{s q} P_{s,c}

    and w^a = e^{-2 i theta}, which keeps every coefficient a power of
    e^{i theta} times a constant.
    """
    __slots__ = ('terms',)

    def __init__(self, terms=None):
        self.terms = {}
        for (w, z) in (terms or {}).items():
            if z != 0:
                self.terms[w] = complex(z)

    @staticmethod
    def word(p=0, q=0, s=1, k=0, coef=1.0):
        return WordSum({Word(p, q, s, k): coef})

    @staticmethod
    def scalar(z):
        return WordSum.word(coef=z)

    @staticmethod
    def clock():
        return WordSum.word(q=1)

    @staticmethod
    def flip():
        return WordSum.word(s=-1)

    @staticmethod
    def shifted_flip():
        return WordSum.word(s=-1, k=1)

    @staticmethod
    def phase(power=1):
        return WordSum.word(p=power)

    def __add__(self, other):
        terms = dict(self.terms)
        for (w, z) in other.terms.items():
            terms[w] = terms.get(w, 0.0) + z
        return WordSum(terms)

    def __neg__(self):
        return WordSum({w: -z for (w, z) in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, WordSum):
            return WordSum({w: z * complex(other) for (w, z) in self.terms.items()})
        terms = {}
        for (w1, z1) in self.terms.items():
            for (w2, z2) in other.terms.items():
                w = Word(w1.p + w2.p + 2 * w1.s * w2.q * w1.k,
                         w1.q + w1.s * w2.q,
                         w1.s * w2.s,
                         w1.k + w1.s * w2.k)
                terms[w] = terms.get(w, 0.0) + z1 * z2
        return WordSum(terms)

    __matmul__ = __mul__

    def __rmul__(self, z):
        return self * z

    def adjoint(self):
        return WordSum({Word(-w.p + 2 * w.q * w.k, -w.s * w.q, w.s, -w.s * w.k):
                        z.conjugate() for (w, z) in self.terms.items()})

    def limit_trace(self, kappa):
        """Normalized trace as d -> infinity with theta -> 2 pi kappa: only
        scalar words survive. Reflections fix at most two basis vectors,
        translations by nonzero multiples of a fix none, and nonzero clock
        powers have vanishing trace.
        """
        total = 0j
        for (w, z) in self.terms.items():
            if w.s == 1 and w.q == 0 and w.k == 0:
                total += z * np.exp(2j * np.pi * kappa * w.p)
        return complex(total)

    def trace(self, d, m):
        """Exact normalized trace at finite (d, m)."""
        theta = np.pi * m / d
        a = (-m) % d
        omega = np.exp(2j * np.pi * np.arange(d) / d)
        total = 0j
        for (w, z) in self.terms.items():
            c = (w.k * a) % d
            if w.s == 1:
                value = 1.0 if (c == 0 and w.q % d == 0) else 0.0
            else:
                j = np.arange(d)
                fixed = j[(2 * j - c) % d == 0]
                value = np.sum(omega[fixed] ** (w.q % d)) / d
            total += z * np.exp(1j * theta * w.p) * value
        return complex(total)

    def __repr__(self):
        return 'WordSum(%s)' % ', '.join('%r: %r' % (tuple(w), z) for (w, z)
                                         in sorted(self.terms.items()))


def symbolic_witness(n=MIN_WITNESS_N):
    """The witness tuple as WordSums."""
    e = WordSum.phase()
    D = WordSum.clock()
    J = WordSum.flip()
    K = WordSum.shifted_flip()
    s1 = e @ D @ K
    s3 = D.adjoint() @ J
    return _witness_words(s1, K, s3, J, WordSum.scalar(1.0), n)


def _word_gram(n, trace_fn):
    u = symbolic_witness(n)
    a = np.empty((n, n), dtype=np.complex128)
    for i in range(n):
        for j in range(n):
            a[i, j] = trace_fn(u[j].adjoint() @ u[i])
    return a


def limit_gram(kappa, n=MIN_WITNESS_N):
    """The d -> infinity limit of the witness Gram matrices at phase kappa."""
    _check_kappa(kappa)
    if n < MIN_WITNESS_N:
        raise ValidationError("The witness limit needs n >= %d, got %d" %
                              (MIN_WITNESS_N, n))
    return GramMatrix(_word_gram(n, lambda x: x.limit_trace(kappa)))


def exact_gram(spec):
    """Gram matrix of build_witness_tuple(spec) evaluated by word traces
    instead of matrix products.
    """
    return GramMatrix(_word_gram(spec.n, lambda x: x.trace(spec.d, spec.m)))


ConvergencePoint = namedtuple('ConvergencePoint', ['d', 'm', 'kappa_d', 'error'])


def convergence_sweep(kappa, dims, n=MIN_WITNESS_N):
    """Max entrywise distance between the witness Gram matrix at each d and
    the limit matrix.
    """
    limit = limit_gram(kappa, n)
    points = []
    for d in dims:
        spec = WitnessSpec(kappa, d, n)
        g = compute_gram(build_witness_tuple(spec))
        err = max_entry_distance(g, limit)
        logger.info("witness d=%d m=%d: distance to limit %.3g", d, spec.m, err)
        points.append(ConvergencePoint(d, spec.m, spec.m / (2.0 * d), err))
    return points
