# Copyright 2024 by the corrlab authors.
# Licensed under the Apache 2.0 License.
"""
JSON codecs for unitary tuples and Gram matrices.

A complex d x d matrix is stored row-major as a flat list of d^2 pairs
[re, im]. A tuple (operator) file looks like::

    {"algebra": {"blocks": [{"dim": d1, "weight": w1}, ...]},
     "operators": [[block_1, block_2, ...], ...], ...}

and a Gram file like::

    {"n": n, "entries": [[re, im], ...], "flags": [...], ...}

with a[i][j] = tau(U_j* U_i) at position i * n + j (0-based); "flags" is
only present when the matrix was flagged. Any other top-level keys (config,
fit, validation) are carried through load and save unchanged. Output uses
sorted keys and repr() floats, so loading and saving a file reproduces it
byte for byte.
"""
import json
import logging

import numpy as np

from corrlab.base import FormatError, OutputThing, FunctionFilter, filtermethod
from corrlab.algebra import TracialAlgebra, BlockOperator
from corrlab.gram import UnitaryTuple, GramMatrix
from corrlab.adapters.generic import write_text_atomic

logger = logging.getLogger(__name__)

_TUPLE_KEYS = ('algebra', 'operators')
_GRAM_KEYS = ('n', 'entries', 'flags')


def encode_matrix(a):
    a = np.asarray(a, dtype=np.complex128)
    return [[float(z.real), float(z.imag)] for z in a.ravel()]


def decode_matrix(cells, d, what='matrix'):
    """Inverse of encode_matrix for a d x d matrix."""
    try:
        a = np.array(cells, dtype=float)
    except (TypeError, ValueError) as e:
        raise FormatError("%s is not a list of [re, im] pairs: %s" % (what, e)) from e
    if a.shape != (d * d, 2):
        raise FormatError("%s must hold %d [re, im] pairs, got shape %s" %
                          (what, d * d, a.shape))
    # set the parts separately; re + 1j * im loses the sign of zeros
    out = np.empty((d, d), dtype=np.complex128)
    out.real = a[:, 0].reshape(d, d)
    out.imag = a[:, 1].reshape(d, d)
    return out


def _extra(obj, keys):
    return {k: v for (k, v) in obj.items() if k not in keys}


def _check_object(obj, keys, what):
    if not isinstance(obj, dict):
        raise FormatError("Expected a JSON object for a %s file, got %s" %
                          (what, type(obj).__name__))
    missing = [k for k in keys if k not in obj]
    if missing:
        raise FormatError("%s file is missing %s" % (what, ', '.join(missing)))


def tuple_to_json(t, extra=None):
    obj = dict(extra or {})
    obj.update({'algebra': {'blocks': [{'dim': d, 'weight': w} for (d, w) in
                                       zip(t.alg.dims, t.alg.weights)]},
                'operators': [[encode_matrix(b) for b in u.blocks] for u in t]})
    return obj


def tuple_from_json(obj):
    """Return (UnitaryTuple, extra keys). Unitarity is not checked here."""
    _check_object(obj, _TUPLE_KEYS, 'Tuple')
    try:
        blocks = obj['algebra']['blocks']
        dims = [b['dim'] for b in blocks]
        alg = TracialAlgebra(dims, [b['weight'] for b in blocks])
        ops = []
        for (i, op) in enumerate(obj['operators']):
            if len(op) != alg.num_blocks:
                raise FormatError("Operator %d has %d blocks, the algebra has %d" %
                                  (i + 1, len(op), alg.num_blocks))
            ops.append(BlockOperator(decode_matrix(cells, d, 'operator %d block %d' %
                                                   (i + 1, k + 1))
                                     for (k, (cells, d)) in
                                     enumerate(zip(op, alg.dims))))
    except (KeyError, TypeError, ValueError) as e:
        raise FormatError("Malformed tuple file: %s" % e) from e
    return (UnitaryTuple(alg, ops), _extra(obj, _TUPLE_KEYS))


def gram_to_json(g, extra=None):
    obj = dict(extra or {})
    obj.update({'n': g.n, 'entries': encode_matrix(g.entries)})
    if g.flags:
        obj['flags'] = list(g.flags)
    return obj


def gram_from_json(obj):
    """Return (GramMatrix, extra keys). The matrix is not validated here."""
    _check_object(obj, ('n', 'entries'), 'Gram')
    n = obj['n']
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise FormatError("Gram file has n = %r, expected a positive integer" % (n,))
    try:
        g = GramMatrix(decode_matrix(obj['entries'], n, 'Gram matrix'),
                       obj.get('flags', ()))
    except TypeError as e:
        raise FormatError("Malformed Gram file: %s" % e) from e
    return (g, _extra(obj, _GRAM_KEYS))


def dumps(obj):
    return json.dumps(obj, indent=1, sort_keys=True) + '\n'


def read_json(filename):
    """Parse a JSON file. A missing or unreadable file and bad JSON are both
    FormatErrors.
    """
    try:
        with open(filename, 'r') as f:
            text = f.read()
    except OSError as e:
        raise FormatError("cannot read %s: %s" % (filename, e)) from e
    try:
        return json.loads(text)
    except ValueError as e:
        raise FormatError("%s is not valid JSON: %s" % (filename, e)) from e


def write_json(filename, obj):
    write_text_atomic(filename, dumps(obj))


def load_tuple(filename):
    return tuple_from_json(read_json(filename))


def save_tuple(filename, t, extra=None):
    write_json(filename, tuple_to_json(t, extra))


def load_gram(filename):
    return gram_from_json(read_json(filename))


def save_gram(filename, g, extra=None):
    write_json(filename, gram_to_json(g, extra))


@filtermethod(OutputThing)
def to_json(this):
    """Convert the events in the stream (namedtuples) to one-line JSON
    strings; complex values become [re, im].
    """
    def encode(x):
        if isinstance(x, complex):
            return [x.real, x.imag]
        raise TypeError("%r is not JSON serializable" % (x,))

    def on_next(self, x):
        self._dispatch_next(json.dumps(x._asdict(), default=encode,
                                       sort_keys=True))

    return FunctionFilter(this, on_next=on_next, name='to_json')
