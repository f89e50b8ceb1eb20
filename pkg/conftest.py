# Copyright 2024 by the corrlab authors.
# Licensed under the Apache 2.0 License.
# The test modules import their helpers as "from utils import ...", the same
# way they do when run standalone by tests/runtests.sh.
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(os.path.abspath(__file__)),
                                'tests'))
