# Copyright 2024 by the corrlab authors.
# Licensed under the Apache 2.0 License.
from sys import stdout
import traceback as tb

from corrlab.base import OutputThing, XformOrDropFilter, filtermethod

class Output(XformOrDropFilter):
    def __init__(self, previous_in_chain, file=None):
        super().__init__(previous_in_chain)
        self.file = file

    def _filter(self, x):
        print(x, file=self.file or stdout, flush=True)
        return x

    def on_error(self, e):
        if hasattr(e, '__traceback__'):
            tb.print_exception(type(e), e, e.__traceback__,
                               file=self.file or stdout)
        else:
            print(e, file=self.file or stdout)
        self._dispatch_error(e)

    def __str__(self):
        if self.file is None:
            return 'output()'
        else:
            return 'output(%s)' % str(self.file)


@filtermethod(OutputThing)
def output(this, file=None):
    """Print each element of the sequence (to stdout by default) and pass it
    on. Errors are printed with their traceback, then passed on as well.
    """
    return Output(this, file=file)
