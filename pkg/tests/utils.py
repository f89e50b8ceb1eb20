# Copyright 2024 by the corrlab authors.
# Licensed under the Apache 2.0 License.
"""Common utilities for the tests
"""
import math
import unittest

import numpy as np

from corrlab.base import InputThing, FatalError
from corrlab.algebra import TracialAlgebra, BlockOperator, random_unitary
from corrlab.gram import UnitaryTuple

KAPPA = math.sqrt(2.0) - 1.0
SQRT2 = math.sqrt(2.0)


def make_rng(seed=2024):
    return np.random.default_rng(seed)


def random_tuple(alg, n, rng):
    return UnitaryTuple(alg, [random_unitary(alg, rng) for _ in range(n)])


def random_algebra(rng, max_blocks=3, max_dim=4):
    k = int(rng.integers(1, max_blocks + 1))
    dims = [int(d) for d in rng.integers(1, max_dim + 1, size=k)]
    w = rng.random(k) + 0.1
    return TracialAlgebra(dims, w / w.sum())


def diag_operator(*entries):
    return BlockOperator([np.diag(np.asarray(entries, dtype=np.complex128))])


def all_ones(n):
    return np.ones((n, n), dtype=np.complex128)


class CaptureInputThing(InputThing):
    """Capture the sequence of events in a list for later use.
    """
    def __init__(self, expecting_error=False):
        self.events = []
        self.completed = False
        self.expecting_error = expecting_error
        self.errored = False
        self.error = None

    def on_next(self, x):
        self.events.append(x)

    def on_completed(self):
        self.completed = True

    def on_error(self, e):
        if self.expecting_error:
            self.errored = True
            self.error = e
        else:
            raise FatalError("Should not get on_error, got on_error(%s)" % e)


class ValidationInputThing(InputThing):
    """Compare the values in an event stream to the expected values, using
    the test case for the assertions.
    """
    def __init__(self, expected_stream, test_case,
                 extract_value_fn=lambda event: event):
        self.expected_stream = expected_stream
        self.next_idx = 0
        self.test_case = test_case
        self.extract_value_fn = extract_value_fn
        self.completed = False

    def on_next(self, x):
        tc = self.test_case
        tc.assertLess(self.next_idx, len(self.expected_stream),
                      "Got an event after reaching the end of the expected stream")
        tc.assertEqual(self.extract_value_fn(x),
                       self.expected_stream[self.next_idx],
                       "Values for element %d of event stream mismatch" %
                       self.next_idx)
        self.next_idx += 1

    def on_completed(self):
        self.test_case.assertEqual(self.next_idx, len(self.expected_stream),
                                   "Got on_completed() before end of stream")
        self.completed = True

    def on_error(self, exc):
        self.test_case.fail("Got an unexpected on_error call with parameter: %s" %
                            exc)


class NumericTestCase(unittest.TestCase):
    def assertOperatorClose(self, x, y, atol=1e-12, msg=None):
        self.assertEqual(x.shape, y.shape, msg)
        for (a, b) in zip(x.blocks, y.blocks):
            np.testing.assert_allclose(a, b, rtol=0, atol=atol, err_msg=msg or '')
