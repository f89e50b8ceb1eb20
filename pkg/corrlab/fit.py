# Copyright 2024 by the corrlab authors.
# Licensed under the Apache 2.0 License.
"""
Numerical membership search: find unitaries U_1..U_n in a fixed
finite-dimensional tracial algebra whose Gram matrix is as close as possible
to a target, by Riemannian descent on the product of unitary groups.

The objective is f = sum_ij |tau(U_j* U_i) - g_ij|^2. Gradients are taken
with respect to the real inner product Re tau(Y* X), projected onto the
tangent space U skew(U* G). Each iteration first tries a damped Gauss-Newton
(Levenberg-Marquardt) direction in the tangent space, solved in the span of
the pair derivatives, and falls back to the negative gradient when that
direction does not decrease the objective. Steps are chosen by back-tracking
Armijo search and retracted with the polar decomposition. The fitter reports
the best residual it finds; a positive residual is evidence, never a proof,
that the target is out of reach at that dimension.

Restarts run concurrently in a thread pool capped by CORRLAB_THREADS.
"""

import logging
import os
from collections import namedtuple
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from corrlab.base import ValidationError
from corrlab.algebra import TracialAlgebra, BlockOperator, random_unitary
from corrlab.gram import UnitaryTuple, GramMatrix, gram_array, require_valid, \
     compute_gram, _as_array
from corrlab.certificate import certificate

logger = logging.getLogger(__name__)

DEFAULT_MAX_ITER = 5000
DEFAULT_GRAD_TOL = 1e-8
DEFAULT_RESTARTS = 8
INITIAL_DAMPING = 1.0
MIN_DAMPING = 1e-10
MAX_DAMPING = 1e8
EIG_CUTOFF = 1e-10
TARGET_TOL = 1e-6
THREADS_ENV = 'CORRLAB_THREADS'
SEED_MASK = (1 << 64) - 1


def worker_count():
    """Worker cap from CORRLAB_THREADS, or None for the executor default."""
    value = os.environ.get(THREADS_ENV)
    if value is None or value.strip() == '':
        return None
    try:
        n = int(value)
    except ValueError:
        logger.warning("Ignoring %s=%r: not an integer", THREADS_ENV, value)
        return None
    if n < 1:
        logger.warning("Ignoring %s=%r: must be positive", THREADS_ENV, value)
        return None
    return n


class LineSearch:
    """Back-tracking Armijo search along a tangent direction. The first
    trial step has length initial_step; later searches start from
    2 * (f0 - previous f0) / df0 scaled by optimism. A step that does not
    decrease the objective is rejected.
    """
    def __init__(self, contraction=0.5, optimism=2.0, sufficient_decrease=1e-4,
                 max_backtracks=40, initial_step=1.0):
        self.contraction = contraction
        self.optimism = optimism
        self.sufficient_decrease = sufficient_decrease
        self.max_backtracks = max_backtracks
        self.initial_step = initial_step
        self._oldf0 = None

    def reset(self):
        self._oldf0 = None

    def params(self):
        return {'contraction': self.contraction, 'optimism': self.optimism,
                'sufficient_decrease': self.sufficient_decrease,
                'max_backtracks': self.max_backtracks,
                'initial_step': self.initial_step}

    def search(self, cost, retract, x, d, norm_d, f0, df0):
        """Return (step length, new point, new cost)."""
        alpha = None
        if self._oldf0 is not None:
            alpha = 2.0 * (f0 - self._oldf0) / df0 * self.optimism
        if alpha is None or not np.isfinite(alpha) or alpha <= 0:
            alpha = self.initial_step / norm_d
        (alpha, newx, newf) = self.backtrack(cost, retract, x, d, f0, df0,
                                             alpha)
        self._oldf0 = f0
        return (alpha * norm_d, newx, newf)

    def backtrack(self, cost, retract, x, d, f0, df0, alpha):
        """Shrink alpha until the Armijo condition holds. Returns
        (alpha, new point, new cost), with alpha 0.0 and the old point when
        no trial step decreases the objective.
        """
        alpha = float(alpha)
        newx = retract(x, d, alpha)
        newf = cost(newx)
        count = 1
        while newf > f0 + self.sufficient_decrease * alpha * df0 and \
              count <= self.max_backtracks:
            alpha *= self.contraction
            newx = retract(x, d, alpha)
            newf = cost(newx)
            count += 1
        if newf > f0:
            return (0.0, x, f0)
        return (alpha, newx, newf)


# The descent works on stacked blocks: for block k an array of shape
# (n, d_k, d_k) holding block k of every U_i.

def _stack(t):
    return [np.stack([u.blocks[k] for u in t.unitaries])
            for k in range(t.alg.num_blocks)]


def _unstack(alg, stacks):
    n = stacks[0].shape[0]
    return UnitaryTuple(alg, [BlockOperator(s[i] for s in stacks)
                              for i in range(n)])


def _gram_of(alg, stacks):
    n = stacks[0].shape[0]
    a = np.zeros((n, n), dtype=np.complex128)
    for (c, s) in zip(alg.trace_weights, stacks):
        if c == 0.0:
            continue
        m = s.reshape(n, -1)
        a += c * (m @ m.conj().T)
    return a


def _cost(alg, g, stacks):
    r = _gram_of(alg, stacks) - g
    return float(np.vdot(r, r).real)


def _egrad(alg, g, stacks):
    n = stacks[0].shape[0]
    r = _gram_of(alg, stacks) - g
    coef = 2.0 * (r + r.conj().T)
    grads = []
    for (c, s) in zip(alg.trace_weights, stacks):
        if c == 0.0:
            grads.append(np.zeros_like(s))
        else:
            grads.append((coef @ s.reshape(n, -1)).reshape(s.shape))
    return grads


def _dagger(s):
    return np.conj(np.swapaxes(s, -1, -2))


def _skew(a):
    return 0.5 * (a - _dagger(a))


def _rgrad(stacks, egrads):
    return [x @ _skew(_dagger(x) @ gr) for (x, gr) in zip(stacks, egrads)]


def _pair_rows(s, lower):
    """Derivatives of Re a_ij and Im a_ij (i > j) with respect to the skew
    generators Omega of U -> U(1 + Omega), for one block. Returns an array of
    shape (2m, n, d, d): row l is nonzero only in slots i and j.
    """
    (i, j) = lower
    m = len(i)
    h = _dagger(s[i]) @ s[j]
    rows = np.zeros((2 * m,) + s.shape, dtype=np.complex128)
    pairs = np.arange(m)
    for (offset, k) in ((0, _skew(h)), (m, _skew(1j * h))):
        rows[offset + pairs, i] = k
        rows[offset + pairs, j] = -k
    return rows


def _gauss_newton(alg, g, stacks, damping):
    """Levenberg-Marquardt direction for the off-diagonal residuals, as
    ambient stacks U_i Omega_i, or None when no pair has a derivative.
    The normal matrix uses the tau metric on the generators and is inverted
    on its numerically nonzero eigenspace.
    """
    n = stacks[0].shape[0]
    if n < 2:
        return None
    lower = np.tril_indices(n, -1)
    r = (_gram_of(alg, stacks) - g)[lower]
    rvec = np.concatenate([r.real, r.imag])
    rows = []
    flat = []
    for (c, s) in zip(alg.trace_weights, stacks):
        if c == 0.0:
            rows.append(None)
            continue
        k = _pair_rows(s, lower)
        rows.append(k)
        flat.append(np.sqrt(c) * k.reshape(k.shape[0], -1))
    f = np.concatenate(flat, axis=1)
    (evals, evecs) = np.linalg.eigh((f @ f.conj().T).real)
    if not evals[-1] > 0.0:
        return None
    keep = evals > EIG_CUTOFF * evals[-1]
    (evals, evecs) = (evals[keep], evecs[:, keep])
    coef = evecs @ ((evecs.T @ rvec) / (evals + damping))
    return [np.zeros_like(s) if k is None
            else s @ -np.tensordot(coef, k, axes=1)
            for (k, s) in zip(rows, stacks)]


def _slope(alg, g, stacks, d):
    """Directional derivative of the objective along ambient stacks d."""
    n = stacks[0].shape[0]
    r = _gram_of(alg, stacks) - g
    da = np.zeros((n, n), dtype=np.complex128)
    for (c, s, p) in zip(alg.trace_weights, stacks, d):
        if c == 0.0:
            continue
        sf = s.reshape(n, -1)
        pf = p.reshape(n, -1)
        da += c * (pf @ sf.conj().T + sf @ pf.conj().T)
    return float(2.0 * np.vdot(r, da).real)


def _norm(alg, vecs):
    return float(np.sqrt(sum(c * np.vdot(v, v).real
                             for (c, v) in zip(alg.trace_weights, vecs))))


def _polar(s):
    (u, _, vh) = np.linalg.svd(s)
    return u @ vh


def _retract(x, d, alpha):
    return [_polar(a + alpha * b) for (a, b) in zip(x, d)]


def _check_target(t, g):
    a = _as_array(g)
    if a.shape[0] != t.n:
        raise ValidationError("Target is %d x %d but the tuple has %d entries" %
                              (a.shape[0], a.shape[0], t.n))
    return a


def objective(t, g):
    """Squared Frobenius misfit between the Gram matrix of t and g. t need
    not be unitary.
    """
    a = _check_target(t, g)
    r = gram_array(t.alg, t.unitaries) - a
    return float(np.vdot(r, r).real)


def euclidean_gradient(t, g):
    """Gradient of objective() with respect to each U_i under the real inner
    product Re tau(Y* X). Blocks of zero weight get a zero gradient.
    """
    a = _check_target(t, g)
    return _unstack(t.alg, _egrad(t.alg, a, _stack(t))).unitaries


def riemannian_gradient(t, g):
    """Projection of the euclidean gradient onto the tangent space at t,
    U_i skew(U_i* G_i).
    """
    a = _check_target(t, g)
    x = _stack(t)
    return _unstack(t.alg, _rgrad(x, _egrad(t.alg, a, x))).unitaries


class FitProblem:
    """Target Gram matrix plus the algebra to search in. The target must be
    a correlation matrix within 1e-6.
    """
    def __init__(self, target, shape, n=None, seed=0,
                 max_iter=DEFAULT_MAX_ITER, grad_tol=DEFAULT_GRAD_TOL,
                 restarts=DEFAULT_RESTARTS):
        if not isinstance(target, GramMatrix):
            target = GramMatrix(target)
        require_valid(target, TARGET_TOL, what='Fit target')
        if n is not None and n != target.n:
            raise ValidationError("Tuple length %d does not match the %d x %d target" %
                                  (n, target.n, target.n))
        if not isinstance(shape, TracialAlgebra):
            shape = TracialAlgebra.single(shape)
        if max_iter < 0 or restarts < 1 or grad_tol < 0:
            raise ValidationError("Need max_iter >= 0, restarts >= 1 and grad_tol >= 0, got %r, %r, %r" %
                                  (max_iter, restarts, grad_tol))
        self.target = target
        self.shape = shape
        self.n = target.n
        self.seed = int(seed)
        self.max_iter = int(max_iter)
        self.grad_tol = float(grad_tol)
        self.restarts = int(restarts)

    def rng(self, restart):
        return np.random.default_rng(
            np.random.SeedSequence([self.seed & SEED_MASK, restart]))

    def config(self):
        return {'n': self.n, 'dims': list(self.shape.dims),
                'weights': list(self.shape.weights), 'seed': self.seed,
                'max_iter': self.max_iter, 'grad_tol': self.grad_tol,
                'restarts': self.restarts}

    def __repr__(self):
        return 'FitProblem(n=%d, shape=%r, seed=%d)' % (self.n, self.shape,
                                                        self.seed)


class FitResult:
    def __init__(self, tuple_, residual, iterations, grad_norm, converged,
                 restart, line_search, certificate_at_kappa=None):
        self.tuple = tuple_
        self.residual = residual
        self.iterations = iterations
        self.grad_norm = grad_norm
        self.converged = converged
        self.restart = restart
        self.line_search = line_search
        self.certificate_at_kappa = certificate_at_kappa

    def gram(self):
        return compute_gram(self.tuple)

    def as_dict(self):
        return {'residual': self.residual, 'iterations': self.iterations,
                'grad_norm': self.grad_norm, 'converged': self.converged,
                'restart': self.restart, 'line_search': self.line_search,
                'certificate': (self.certificate_at_kappa.as_dict()
                                if self.certificate_at_kappa else None)}

    def __repr__(self):
        return 'FitResult(residual=%.3g, iterations=%d, converged=%s)' % \
            (self.residual, self.iterations, self.converged)


def _descend(problem, stacks, restart):
    """One descent run from the given stacked unitaries. Returns a FitResult
    without certificate.
    """
    alg = problem.shape
    g = problem.target.entries
    search = LineSearch()
    cost = lambda x: _cost(alg, g, x)
    x = stacks
    fx = cost(x)
    iterations = 0
    grad_norm = float('inf')
    damping = INITIAL_DAMPING
    gradient_steps = 0
    while True:
        xi = _rgrad(x, _egrad(alg, g, x))
        grad_norm = _norm(alg, xi)
        if grad_norm <= problem.grad_tol or iterations >= problem.max_iter:
            break
        iterations += 1
        step = 0.0
        d = _gauss_newton(alg, g, x, damping * np.sqrt(fx))
        if d is not None:
            slope = _slope(alg, g, x, d)
            if slope < 0.0:
                (step, newx, newf) = search.backtrack(cost, _retract, x, d,
                                                      fx, slope, 1.0)
        if step == 1.0:
            damping = max(damping * 0.5, MIN_DAMPING)
        else:
            damping = min(damping * 4.0, MAX_DAMPING)
        if step > 0.0:
            (x, fx) = (newx, newf)
            continue
        gradient_steps += 1
        d = [-v for v in xi]
        (step, x, fx) = search.search(cost, _retract, x, d, grad_norm, fx,
                                      -grad_norm ** 2)
        if step == 0.0:
            # retry once from the initial step length before giving up
            search.reset()
            (step, x, fx) = search.search(cost, _retract, x, d, grad_norm, fx,
                                          -grad_norm ** 2)
            if step == 0.0:
                logger.debug("restart %d stalled at iteration %d (f=%.3g)",
                             restart, iterations, fx)
                break
    converged = grad_norm <= problem.grad_tol
    t = _unstack(alg, [_polar(s) for s in x])
    residual = float(np.sqrt(max(fx, 0.0)))
    logger.debug("restart %d: residual %.3g after %d iterations (%d gradient steps), |grad| %.3g",
                 restart, residual, iterations, gradient_steps, grad_norm)
    params = search.params()
    params['damping'] = damping
    return FitResult(t, residual, iterations, grad_norm, converged, restart,
                     params)


def _initial_stacks(problem, restart, initial):
    if restart == 0 and initial is not None:
        if initial.alg.dims != problem.shape.dims or initial.n != problem.n:
            raise ValidationError("Warm start has shape %s x %d, problem needs %s x %d" %
                                  (initial.alg.dims, initial.n,
                                   problem.shape.dims, problem.n))
        return [_polar(s) for s in _stack(initial)]
    rng = problem.rng(restart)
    t = UnitaryTuple(problem.shape, [random_unitary(problem.shape, rng)
                                     for _ in range(problem.n)])
    return _stack(t)


def _run_restart(problem, restart, initial):
    return _descend(problem, _initial_stacks(problem, restart, initial), restart)


def fit(problem, initial=None, kappa=None):
    """Multi-restart descent. Restart r starts from Haar-random unitaries
    drawn from the stream (seed, r); a warm-start tuple replaces restart 0.
    The best restart by (residual, restart index) is returned. If kappa is
    given and n >= 8, the certificate of the achieved Gram matrix is
    attached.
    """
    workers = worker_count()
    with ThreadPoolExecutor(max_workers=workers) as executor:
        futures = [executor.submit(_run_restart, problem, r, initial)
                   for r in range(problem.restarts)]
        results = [f.result() for f in futures]
    best = min(results, key=lambda res: (res.residual, res.restart))
    if not best.converged:
        logger.warning("fit %r did not converge: residual %.3g, |grad| %.3g after %d iterations",
                       problem, best.residual, best.grad_norm, best.iterations)
    else:
        logger.info("fit %r: residual %.3g (restart %d)", problem,
                    best.residual, best.restart)
    if kappa is not None and problem.n >= 8:
        best.certificate_at_kappa = certificate(compute_gram(best.tuple), kappa)
    return best


SweepPoint = namedtuple('SweepPoint', ['d', 'residual', 'iterations',
                                       'grad_norm', 'converged', 'result'])


def iter_sweep(target, dims, seed=0, kappa=None, **options):
    """Yield one SweepPoint per dimension in dims. Each fit is warm-started
    from the previous solution embedded block-diagonally (U -> U + ... + U),
    which keeps the Gram matrix, so residuals never increase as long as
    each dimension divides the next. options are passed to FitProblem.
    """
    dims = list(dims)
    if len(dims) == 0:
        raise ValidationError("A residual sweep needs at least one dimension")
    previous = None
    for d in dims:
        if previous is not None and previous.tuple.alg.dims == (d,):
            logger.debug("sweep: dimension %d repeated, reusing its result", d)
            result = previous
        else:
            problem = FitProblem(target, TracialAlgebra.single(d), seed=seed,
                                 **options)
            initial = None
            if previous is not None:
                d_prev = previous.tuple.alg.dims[0]
                if d % d_prev == 0:
                    k = d // d_prev
                    initial = UnitaryTuple(problem.shape,
                                           [u.repeat(k) for u in previous.tuple])
                else:
                    logger.warning("sweep: %d does not divide %d, cold start",
                                   d_prev, d)
            result = fit(problem, initial=initial, kappa=kappa)
        logger.info("sweep d=%d: residual %.3g", d, result.residual)
        yield SweepPoint(d, result.residual, result.iterations,
                         result.grad_norm, result.converged, result)
        previous = result


def residual_sweep(target, dims, seed=0, **options):
    return list(iter_sweep(target, dims, seed, **options))
