# Copyright 2024 by the corrlab authors.
# Licensed under the Apache 2.0 License.
"""
corrlab: correlation matrices of unitary tuples in finite-dimensional
tracial von Neumann algebras, and the witness showing that the set of such
matrices is not closed once there are eight or more unitaries.

The numerical modules are:

 * `algebra`     - weighted direct sums of matrix blocks, block operators,
                   the tracial state, unitarity and distances
 * `gram`        - the correlation (Gram) map, validation, convex combinations
 * `witness`     - exact clock/flip symmetry quadruples, the eight-unitary
                   witness tuple and its exact large-dimension limit
 * `certificate` - the self-adjointness functional, the four certificate
                   values and the determinant obstruction
 * `fit`         - numerical membership tests by descent on products of unitary groups

The plumbing lives in:

 * `base`      - error hierarchy and the push-based dataflow core
 * `adapters`  - JSON/CSV (and optional pandas) readers and writers
 * `filters`   - linq-style stages for dataflows
 * `pipeline`  - the sweep and end-to-end reproduction dataflows
 * `cli`       - the command line
"""

__version__ = "1.0.0"
