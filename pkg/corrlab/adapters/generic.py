# Copyright 2024 by the corrlab authors.
# Licensed under the Apache 2.0 License.
"""
Generic reader and writer classes, to be subclassed for specific adapters,
plus the atomic-file helpers they share.
"""
import logging
import os
import tempfile

from corrlab.base import OutputThing, InputThing, DirectOutputThingMixin, \
     FatalError

logger = logging.getLogger(__name__)


class EventRowMapping:
    """Interface that converts between events and "rows"
    """
    def event_to_row(self, event):
        """Convert an event to the row representation (usually a
        list of values).
        """
        raise NotImplementedError

    def row_to_event(self, row):
        """Convert a row to an event.
        """
        raise NotImplementedError


class DirectReader(OutputThing, DirectOutputThingMixin):
    """A reader that can be run in the current thread (does not block
    indefinitely). Reads rows from the iterable, converts them to events
    using the mapping and passes them on.
    """
    def __init__(self, iterable, mapper, name=None):
        super().__init__()
        self.iterable = iterable
        self.mapper = mapper
        self.name = name

    def _observe(self):
        try:
            row = self.iterable.__next__()
            self._dispatch_next(self.mapper.row_to_event(row))
        except StopIteration:
            self._close()
            self._dispatch_completed()
        except FatalError:
            self._close()
            raise
        except Exception as e:
            self._close()
            self._dispatch_error(e)

    def _close(self):
        """Called when the iteration stops, at the end of the rows or on an
        error. Subclasses release their resources here.
        """
        pass

    def __str__(self):
        return self.name or super().__str__()


class ListWriter(InputThing):
    """Terminal input thing that collects the events of a stream. A stage
    error is kept and re-raised by result(), so the code that ran the
    scheduler sees it.
    """
    def __init__(self):
        self.events = []
        self.error = None
        self.completed = False

    def on_next(self, x):
        self.events.append(x)

    def on_error(self, e):
        logger.debug("ListWriter got error %r", e)
        self.error = e
        self.completed = True

    def on_completed(self):
        self.completed = True

    def result(self):
        if self.error is not None:
            raise self.error
        return self.events


def open_atomic(filename, newline=None):
    """Open a temporary text file next to filename. Returns (file, tmpname);
    pass both to commit_atomic() or discard_atomic().
    """
    directory = os.path.dirname(os.path.abspath(filename))
    (fd, tmpname) = tempfile.mkstemp(prefix='.' + os.path.basename(filename) + '.',
                                     suffix='.tmp', dir=directory)
    return (os.fdopen(fd, 'w', newline=newline), tmpname)


def commit_atomic(f, tmpname, filename):
    f.flush()
    os.fsync(f.fileno())
    f.close()
    os.replace(tmpname, filename)
    logger.info("wrote %s", filename)


def discard_atomic(f, tmpname):
    f.close()
    try:
        os.remove(tmpname)
    except OSError:
        pass


def write_text_atomic(filename, text):
    (f, tmpname) = open_atomic(filename)
    try:
        f.write(text)
    except BaseException:
        discard_atomic(f, tmpname)
        raise
    commit_atomic(f, tmpname, filename)
