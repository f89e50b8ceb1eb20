# Copyright 2024 by the corrlab authors.
# Licensed under the Apache 2.0 License.
"""
Base functionality for corrlab: the error hierarchy shared by every module and
the small push-based dataflow core used to run sweeps and the end-to-end
pipeline.

The key abstractions are:

 * CorrlabError - base class of all library errors. The numerical modules
                  raise its subclasses (ConformanceError, ValidationError,
                  ConvergenceError, FormatError); the command line maps each
                  of them to an exit code.
 * OutputThing  - emits a stream of events (sweep points, pipeline rows) on
                  a single output.
 * InputThing   - receives a stream of events through on_next(), on_error()
                  and on_completed().
 * Filter       - both an InputThing and an OutputThing with one input and one
                  output; used to turn a dimension into a witness row, a row
                  into a certified row, and so on.
 * Scheduler    - wraps an asyncio event loop and pulls events out of
                  IterableAsOutputThing sources until every stream completes.

Errors raised by a stage are not fatal: they are dispatched downstream through
on_error() so a terminal InputThing can hold on to them and the caller can
re-raise them. Only FatalError subclasses (broken wiring, scheduler failures)
terminate the event loop.
"""

import logging
from collections import namedtuple

logger = logging.getLogger(__name__)


class CorrlabError(Exception):
    """Base class for every error raised by corrlab."""
    pass


class ConformanceError(CorrlabError):
    """An operator does not match the block structure of its algebra, or two
    operands have different shapes.
    """
    pass


class ValidationError(CorrlabError):
    """A value violates one of its invariants: a non-unitary tuple entry,
    weights that do not sum to one, a matrix that is not a correlation matrix,
    parameters out of range. If the problem is tied to a tuple position,
    index holds it (1-based, as in all reports).
    """
    def __init__(self, msg, index=None):
        super().__init__(msg)
        self.index = index


class ConvergenceError(CorrlabError):
    """A numerical search ran out of iterations. Only raised by strict callers;
    the fitter itself reports non-convergence in its result.
    """
    pass


class FormatError(CorrlabError):
    """An input file could not be decoded (malformed JSON, wrong layout,
    missing CSV header).
    """
    pass


class FatalError(CorrlabError):
    """Base class for out-of-band errors that should terminate the event loop,
    e.g. dispatching on a closed stream. Errors in the data being processed
    are never fatal.
    """
    pass

class StreamClosedError(FatalError):
    """An event was dispatched after the stream had completed or errored."""
    pass

class ExcInDispatch(FatalError):
    """Dispatching an event raised something other than a FatalError."""
    pass

class ScheduleError(FatalError):
    pass


class InputThing:
    """Receives a stream through on_next(), on_error() and on_completed()."""
    def on_next(self, x):
        pass

    def on_error(self, e):
        pass

    def on_completed(self):
        pass


class OutputThing:
    """Base class for event sources. The public interface is connect(); the
    underscore methods are used by subclasses and the scheduler. A stream
    ends with exactly one on_completed() or on_error().
    """
    def __init__(self):
        self.__connections__ = []
        self.__closed__ = False

    def connect(self, input_thing):
        """Connect an InputThing. Returns a function that removes the
        connection.
        """
        if not isinstance(input_thing, InputThing):
            raise FatalError("Cannot connect %r to %s: not an InputThing" %
                             (input_thing, self))
        # copy-on-write so a disconnect during dispatch is safe
        self.__connections__ = self.__connections__ + [input_thing]

        def disconnect():
            self.__connections__ = [c for c in self.__connections__
                                    if c is not input_thing]
        return disconnect

    def _has_connections(self):
        return len(self.__connections__) > 0

    def _dispatch(self, kind, *args):
        if self.__closed__:
            raise StreamClosedError("OutputThing %s already had an on_completed or on_error event" %
                                    self)
        for c in self.__connections__:
            try:
                getattr(c, 'on_' + kind)(*args)
            except FatalError:
                raise
            except Exception as e:
                raise ExcInDispatch("Unexpected exception when dispatching %s%s to InputThing %s from OutputThing %s" %
                                    (kind, repr(args), c, self)) from e

    def _dispatch_next(self, x):
        self._dispatch('next', x)

    def _dispatch_completed(self):
        self._dispatch('completed')
        self._close_stream()

    def _dispatch_error(self, e):
        self._dispatch('error', e)
        self._close_stream()

    def _close_stream(self):
        self.__closed__ = True
        self.__connections__ = []

    def __str__(self):
        return self.__class__.__name__ + '()'


class Filter(OutputThing, InputThing):
    """One input, one output. By default every notification is passed on
    unchanged.
    """
    def __init__(self, previous_in_chain):
        super().__init__()
        self.disconnect_from_upstream = previous_in_chain.connect(self)

    def on_next(self, x):
        self._dispatch_next(x)

    def on_error(self, e):
        self._dispatch_error(e)

    def on_completed(self):
        self._dispatch_completed()


class XformOrDropFilter(Filter):
    """Filter whose subclasses implement _filter(x), returning the event to
    pass on or None to drop it. A non-fatal exception in _filter() is sent
    downstream as on_error() and the filter disconnects from upstream.
    """
    def on_next(self, x):
        try:
            x_prime = self._filter(x)
        except FatalError:
            raise
        except Exception as e:
            logger.exception("Got an exception on %s._filter(%s)", self, x)
            self.on_error(e)
            self.disconnect_from_upstream()
        else:
            if x_prime is not None:
                self._dispatch_next(x_prime)

    def _filter(self, x):
        return x


class FunctionFilter(Filter):
    """Filter built from plain functions. Each function takes the filter as
    its first argument::

        on_next(self, x)
        on_completed(self)
        on_error(self, e)

    Missing functions pass the notification downstream.
    """
    def __init__(self, previous_in_chain, on_next=None, on_completed=None,
                 on_error=None, name=None):
        super().__init__(previous_in_chain)
        self._on_next = on_next
        self._on_error = on_error
        self._on_completed = on_completed
        self.name = name

    def on_next(self, x):
        if self._on_next is None:
            self._dispatch_next(x)
            return
        try:
            self._on_next(self, x)
        except FatalError:
            raise
        except Exception as e:
            logger.exception("Got an exception on %s.on_next(%s)", self, x)
            self.on_error(e)
            self.disconnect_from_upstream()

    def on_error(self, e):
        if self._on_error:
            self._on_error(self, e)
        else:
            self._dispatch_error(e)

    def on_completed(self):
        if self._on_completed:
            self._on_completed(self)
        else:
            self._dispatch_completed()

    def __str__(self):
        return self.name or (self.__class__.__name__ + '()')


class _ThunkBuilder:
    """Functional-style counterpart of a filter method: calling it with the
    filter arguments returns a function of the upstream OutputThing.
    """
    def __init__(self, func):
        self.func = func
        self.__name__ = func.__name__

    def __call__(self, *args, **kwargs):
        def apply(this):
            return self.func(this, *args, **kwargs)
        apply.__name__ = self.__name__
        return apply

    def __repr__(self):
        return "_ThunkBuilder(%s)" % self.__name__


def filtermethod(base, alias=None):
    """Decorator that installs a linq-style filter function as a method of
    base (usually OutputThing) under its own name and each alias, so that
    stages chain fluently::

        from_iterable(points).map(certify).csv_writer(path, mapper)

    The decorated name is rebound to a thunk builder for the functional
    style.
    """
    def inner(func):
        names = [func.__name__]
        if alias:
            names += alias if isinstance(alias, list) else [alias]
        thunk = _ThunkBuilder(func)
        for name in names:
            setattr(base, name, func)
            func.__globals__[name] = thunk
        return thunk
    return inner


class DirectOutputThingMixin:
    """OutputThings scheduled directly: the scheduler calls _observe() to get
    one event at a time.
    """
    def _observe(self):
        raise NotImplementedError


class IterableAsOutputThing(OutputThing, DirectOutputThingMixin):
    """Turn any iterable (typically a generator of sweep points) into an
    OutputThing. An exception raised while producing the next element is
    dispatched as on_error() and ends the stream.
    """
    def __init__(self, iterable, name=None):
        super().__init__()
        self.iterator = iter(iterable)
        self.name = name

    def _observe(self):
        try:
            event = next(self.iterator)
        except StopIteration:
            self._close()
            self._dispatch_completed()
        except FatalError:
            self._close()
            raise
        except Exception as e:
            logger.debug("source %s failed: %r", self, e)
            self._close()
            self._dispatch_error(e)
        else:
            self._dispatch_next(event)

    def _close(self):
        """Hook for subclasses that hold resources (open files)."""
        pass

    def __str__(self):
        return self.name or super().__str__()


# Events carried by the sweep and pipeline dataflows. c, cert_d and
# cert_kappa are 4-tuples of certificate values, or None when not computed.
SweepRow = namedtuple('SweepRow', ['d', 'residual', 'iterations', 'grad_norm',
                                   'c'])
PipelineRow = namedtuple('PipelineRow', ['d', 'm', 'kappa_d', 'distance',
                                         'cert_d', 'cert_kappa', 'det',
                                         'excluded'])


def from_iterable(i, name=None):
    return IterableAsOutputThing(i, name=name)

def from_list(l, name=None):
    return IterableAsOutputThing(list(l), name=name)


class Scheduler:
    """Wrap an asyncio event loop and pull events from direct OutputThings
    until none of them has downstream connections left.
    """
    def __init__(self, event_loop):
        self.event_loop = event_loop
        self.active_schedules = {}  # output thing -> loop handle
        self.fatal_error = None
        def exception_handler(loop, context):
            assert loop is self.event_loop
            self.fatal_error = context.get('exception') or \
                ScheduleError(context.get('message', 'unknown loop error'))
            self.stop()
        self.event_loop.set_exception_handler(exception_handler)

    def _remove_from_active_schedules(self, output_thing):
        del self.active_schedules[output_thing]
        if len(self.active_schedules) == 0:
            logger.debug("No more active schedules, will exit event loop")
            self.stop()

    def schedule_recurring(self, output_thing):
        """Call output_thing._observe() repeatedly on the event loop until it
        has no more connections (its stream completed or errored). Returns a
        function that removes the schedule.
        """
        def cancel():
            try:
                handle = self.active_schedules[output_thing]
            except KeyError:
                raise ScheduleError("Attempt to de-schedule OutputThing %s, which does not have an active schedule" %
                                    output_thing)
            handle.cancel()
            self._remove_from_active_schedules(output_thing)
        def run():
            output_thing._observe()
            if not output_thing._has_connections():
                if output_thing in self.active_schedules:
                    self._remove_from_active_schedules(output_thing)
            elif output_thing in self.active_schedules:
                self.active_schedules[output_thing] = \
                    self.event_loop.call_soon(run)
        self.active_schedules[output_thing] = self.event_loop.call_soon(run)
        return cancel

    def run_forever(self):
        """Run the event loop until every schedule is done or stop() is
        called. A fatal error inside the loop is re-raised as ScheduleError.
        """
        self.event_loop.run_forever()
        if self.fatal_error is not None:
            raise ScheduleError("Scheduler aborted due to fatal error") \
                from self.fatal_error

    def stop(self):
        for handle in self.active_schedules.values():
            handle.cancel()
        self.active_schedules = {}
        self.event_loop.stop()
