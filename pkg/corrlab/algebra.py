# Copyright 2024 by the corrlab authors.
# Licensed under the Apache 2.0 License.
"""
Finite-dimensional von Neumann algebras with a tracial state, represented as
a direct sum of full matrix blocks M_{d_1} + ... + M_{d_r} with weights
lambda_k >= 0 summing to one. The tracial state is

    tau(x) = sum_k lambda_k * trace(x_k) / d_k

Operators are BlockOperator values: one dense complex d_k x d_k matrix per
block. Both types are immutable; every operation returns a new value.
"""

import logging

import numpy as np
import scipy.linalg

from corrlab.base import ConformanceError, ValidationError

logger = logging.getLogger(__name__)

WEIGHT_SUM_TOL = 1e-12
WEIGHT_NORMALIZE_TOL = 1e-9
UNITARY_TOL = 1e-10  # per unit of block dimension


def _frozen(a):
    a = np.array(a, dtype=np.complex128)
    a.setflags(write=False)
    return a


class BlockOperator:
    """One complex matrix per block, in the block order of the owning
    algebra. Supports +, -, @ (block product), scalar * and adjoint().
    """
    __slots__ = ('blocks',)

    def __init__(self, blocks):
        blocks = tuple(_frozen(b) for b in blocks)
        for (k, b) in enumerate(blocks):
            if b.ndim != 2 or b.shape[0] != b.shape[1]:
                raise ConformanceError("Block %d of operator is not a square matrix (shape %s)" %
                                       (k + 1, b.shape))
        self.blocks = blocks

    @property
    def shape(self):
        return tuple(b.shape[0] for b in self.blocks)

    def _check_same(self, other):
        if not isinstance(other, BlockOperator):
            raise ConformanceError("Expected a BlockOperator, got %r" % (other,))
        if self.shape != other.shape:
            raise ConformanceError("Operator shapes differ: %s vs %s" %
                                   (self.shape, other.shape))

    def adjoint(self):
        return BlockOperator(b.conj().T for b in self.blocks)

    def __add__(self, other):
        self._check_same(other)
        return BlockOperator(a + b for (a, b) in zip(self.blocks, other.blocks))

    def __sub__(self, other):
        self._check_same(other)
        return BlockOperator(a - b for (a, b) in zip(self.blocks, other.blocks))

    def __neg__(self):
        return BlockOperator(-b for b in self.blocks)

    def __matmul__(self, other):
        self._check_same(other)
        return BlockOperator(a @ b for (a, b) in zip(self.blocks, other.blocks))

    def __mul__(self, z):
        if isinstance(z, BlockOperator):
            return NotImplemented
        return BlockOperator(complex(z) * b for b in self.blocks)

    __rmul__ = __mul__

    def allclose(self, other, atol=1e-12):
        self._check_same(other)
        return all(np.allclose(a, b, rtol=0.0, atol=atol)
                   for (a, b) in zip(self.blocks, other.blocks))

    def repeat(self, k):
        """The block-diagonal embedding x -> x + ... + x (k copies) inside
        each block, i.e. kron(I_k, x_b). Leaves every normalized trace
        unchanged.
        """
        eye = np.eye(k)
        return BlockOperator(np.kron(eye, b) for b in self.blocks)

    def __repr__(self):
        return 'BlockOperator(shape=%s)' % (self.shape,)


class TracialAlgebra:
    """Direct sum of matrix blocks with a weighted tracial state.

    Weights that sum to one within WEIGHT_SUM_TOL are kept as given, so
    they survive a file round trip unchanged. Weights off by more than that
    but within WEIGHT_NORMALIZE_TOL are renormalized; otherwise construction
    fails. When weights are omitted they are taken proportional to the block
    dimensions (the restriction of the normalized trace of
    M_{d_1 + ... + d_r}).
    """
    __slots__ = ('dims', 'weights')

    def __init__(self, dims, weights=None):
        dims = tuple(int(d) for d in dims)
        if len(dims) == 0:
            raise ValidationError("An algebra needs at least one block")
        for (k, d) in enumerate(dims):
            if d < 1:
                raise ValidationError("Block %d has dimension %d, expected >= 1" %
                                      (k + 1, d), index=k + 1)
        if weights is None:
            weights = np.array(dims, dtype=float) / sum(dims)
        weights = np.asarray(weights, dtype=float)
        if weights.shape != (len(dims),):
            raise ValidationError("Got %d weights for %d blocks" %
                                  (weights.size, len(dims)))
        if not np.all(np.isfinite(weights)) or (weights < 0).any():
            raise ValidationError("Block weights must be finite and >= 0, got %s" %
                                  list(weights))
        total = weights.sum()
        if abs(total - 1.0) > WEIGHT_NORMALIZE_TOL:
            raise ValidationError("Block weights sum to %r, expected 1" % total)
        if abs(total - 1.0) > WEIGHT_SUM_TOL:
            weights = weights / total
        self.dims = dims
        self.weights = tuple(float(w) for w in weights)

    @staticmethod
    def single(d):
        return TracialAlgebra([d], [1.0])

    @property
    def num_blocks(self):
        return len(self.dims)

    @property
    def is_faithful(self):
        return all(w > 0.0 for w in self.weights)

    @property
    def trace_weights(self):
        """lambda_k / d_k, the factor applied to the matrix trace of block k."""
        return tuple(w / d for (w, d) in zip(self.weights, self.dims))

    def validate(self):
        """Return a list of warnings. A zero-weight block makes the state
        non-faithful, so a vanishing tau(x*x) no longer forces x = 0.
        """
        warnings = []
        for (k, w) in enumerate(self.weights):
            if w == 0.0:
                warnings.append("block %d (dim %d) has zero weight; the trace is not faithful" %
                                (k + 1, self.dims[k]))
        return warnings

    def check(self, x, what='operator'):
        if not isinstance(x, BlockOperator):
            raise ConformanceError("%s is not a BlockOperator: %r" % (what, x))
        if x.shape != self.dims:
            raise ConformanceError("%s has block shape %s, algebra has %s" %
                                   (what, x.shape, self.dims))

    def identity(self):
        return BlockOperator(np.eye(d) for d in self.dims)

    def zeros(self):
        return BlockOperator(np.zeros((d, d)) for d in self.dims)

    def scalar(self, z):
        return complex(z) * self.identity()

    def from_diagonals(self, diagonals):
        return BlockOperator(np.diag(np.asarray(v, dtype=np.complex128))
                             for v in diagonals)

    def __eq__(self, other):
        return isinstance(other, TracialAlgebra) and \
            self.dims == other.dims and self.weights == other.weights

    def __hash__(self):
        return hash((self.dims, self.weights))

    def __repr__(self):
        return 'TracialAlgebra(dims=%s, weights=%s)' % (list(self.dims),
                                                        list(self.weights))


def adjoint(x):
    return x.adjoint()

def multiply(x, y):
    return x @ y

def scale(z, x):
    return complex(z) * x


def trace(alg, x):
    """tau(x) = sum_k lambda_k * trace(x_k) / d_k."""
    alg.check(x)
    return complex(sum(c * np.trace(b)
                       for (c, b) in zip(alg.trace_weights, x.blocks)))


def inner(alg, x, y):
    """tau(y* x), computed blockwise as a Frobenius product (no matrix
    product needed).
    """
    alg.check(x)
    alg.check(y)
    return complex(sum(c * np.vdot(b, a) for (c, a, b) in
                       zip(alg.trace_weights, x.blocks, y.blocks)))


def unitarity_defects(alg, x):
    """Operator-norm deviation ||x_k* x_k - I|| for every block."""
    alg.check(x)
    return [float(np.linalg.norm(b.conj().T @ b - np.eye(b.shape[0]), 2))
            for b in x.blocks]


def unitarity_defect(alg, x):
    return max(unitarity_defects(alg, x))


def is_unitary(alg, x, tol=None):
    """True iff every block satisfies ||x_k* x_k - I|| <= tol. Without tol
    the threshold is UNITARY_TOL * d_k, since round-off grows with d.
    """
    if tol is not None and tol <= 0:
        raise ValidationError("Unitarity tolerance must be > 0, got %r" % tol)
    defects = unitarity_defects(alg, x)
    if tol is None:
        return all(e <= UNITARY_TOL * d for (e, d) in zip(defects, alg.dims))
    return max(defects) <= tol


def self_adjoint_defect(alg, x):
    alg.check(x)
    return max(float(np.linalg.norm(b - b.conj().T, 2)) for b in x.blocks)


def is_symmetry(alg, x, tol=1e-8):
    """Self-adjoint unitary (a symmetry) within tol in operator norm."""
    return self_adjoint_defect(alg, x) <= tol and unitarity_defect(alg, x) <= tol


def hs_distance(alg, x, y):
    """sqrt(Re tau((x-y)*(x-y))), the 2-norm of the tracial state."""
    z = x - y
    alg.check(z)
    value = sum(c * np.vdot(b, b).real for (c, b) in zip(alg.trace_weights, z.blocks))
    return float(np.sqrt(max(value, 0.0)))


def direct_sum(alg1, x1, alg2, x2, lam):
    """Concatenate the blocks of (alg1, x1) and (alg2, x2), weighting the
    first algebra by lam and the second by 1 - lam, so that
    tau(x1 + x2) = lam * tau(x1) + (1 - lam) * tau(x2).
    """
    lam = float(lam)
    if not 0.0 <= lam <= 1.0:
        raise ValidationError("Direct sum weight must lie in [0, 1], got %r" % lam)
    alg1.check(x1, 'first operand')
    alg2.check(x2, 'second operand')
    alg = TracialAlgebra(alg1.dims + alg2.dims,
                         [lam * w for w in alg1.weights] +
                         [(1.0 - lam) * w for w in alg2.weights])
    return (alg, BlockOperator(x1.blocks + x2.blocks))


def nearest_unitary(x):
    """Polar retraction: the unitary factor of the polar decomposition of
    each block, the nearest unitary in Frobenius norm.
    """
    return BlockOperator(scipy.linalg.polar(b)[0] for b in x.blocks)


def _haar_block(d, rng):
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2.0)
    (q, r) = np.linalg.qr(z)
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases[np.newaxis, :]


def random_unitary(alg, rng):
    """Orthonormalized complex Gaussian blocks (Haar distributed)."""
    return BlockOperator(_haar_block(d, rng) for d in alg.dims)


def random_symmetry(alg, rng, signs=None):
    """W diag(s) W* with a random +-1 spectrum s and a Haar unitary W."""
    blocks = []
    for (k, d) in enumerate(alg.dims):
        s = signs[k] if signs is not None else rng.choice([-1.0, 1.0], size=d)
        w = _haar_block(d, rng)
        blocks.append((w * np.asarray(s)[np.newaxis, :]) @ w.conj().T)
    return BlockOperator(blocks)
