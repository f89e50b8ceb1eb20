# Copyright 2024 by the corrlab authors.
# Licensed under the Apache 2.0 License.
"""
Linq-style filters. Each function appears as a method on the OutputThing
base class, so stages chain::

    from_iterable(points).map(certify).output()

The @filtermethod decorator also defines a standalone "thunk" version that
takes every argument except the upstream OutputThing.
"""

from . import map
from . import output
