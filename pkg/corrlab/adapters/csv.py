# Copyright 2024 by the corrlab authors.
# Licensed under the Apache 2.0 License.
"""Adapters for reading/writing sweep and pipeline event streams to CSV
(spreadsheet) files.

Floats are written with repr(), the shortest string that round-trips, so a
file re-read and re-written is byte-identical.
"""
import csv as csvlib
import logging

from corrlab.base import InputThing, OutputThing, FormatError, \
     SweepRow, PipelineRow, filtermethod
from corrlab.adapters.generic import EventRowMapping, DirectReader, ListWriter, \
     open_atomic, commit_atomic, discard_atomic

logger = logging.getLogger(__name__)


class EventSpreadsheetMapping(EventRowMapping):
    """Define the mapping between an event record and a spreadsheet.
    """
    def get_header_row(self):
        """Return a list of header row column names.
        """
        raise NotImplementedError


def _cert_cells(c):
    return ['', '', '', ''] if c is None else [repr(float(x)) for x in c]


def _cert_from_cells(cells):
    if all(x == '' for x in cells):
        return None
    return tuple(float(x) for x in cells)


def _bool_from_cell(cell):
    if cell not in ('True', 'False'):
        raise FormatError("Expected True or False, got %r" % cell)
    return cell == 'True'


class SweepRowMapping(EventSpreadsheetMapping):
    """Residual sweep rows: the best residual per dimension and the
    certificate of the achieved Gram matrix (blank when not computed).
    """
    def get_header_row(self):
        return ['d', 'residual', 'iterations', 'grad_norm',
                'c1', 'c2', 'c3', 'c4']

    def event_to_row(self, event):
        return [event.d, repr(float(event.residual)), event.iterations,
                repr(float(event.grad_norm))] + _cert_cells(event.c)

    def row_to_event(self, row):
        if len(row) != 8:
            raise FormatError("Sweep rows have 8 columns, got %d: %s" %
                              (len(row), row))
        try:
            return SweepRow(int(row[0]), float(row[1]), int(row[2]),
                            float(row[3]), _cert_from_cells(row[4:8]))
        except ValueError as e:
            raise FormatError("Bad sweep row %s: %s" % (row, e)) from e


class PipelineRowMapping(EventSpreadsheetMapping):
    """Rows of the end-to-end check: distance to the limit matrix, the
    certificate at the realized phase m / 2d and at kappa, the determinant
    of the symmetry product and whether e^{2 pi i kappa} I is excluded.
    """
    def get_header_row(self):
        return ['d', 'm', 'kappa_d', 'distance',
                'c1_d', 'c2_d', 'c3_d', 'c4_d',
                'c1', 'c2', 'c3', 'c4',
                'det_re', 'det_im', 'phase_excluded']

    def event_to_row(self, event):
        return [event.d, event.m, repr(float(event.kappa_d)),
                repr(float(event.distance))] + \
            _cert_cells(event.cert_d) + _cert_cells(event.cert_kappa) + \
            [repr(float(event.det.real)), repr(float(event.det.imag)),
             str(bool(event.excluded))]

    def row_to_event(self, row):
        if len(row) != 15:
            raise FormatError("Pipeline rows have 15 columns, got %d: %s" %
                              (len(row), row))
        try:
            return PipelineRow(int(row[0]), int(row[1]), float(row[2]),
                               float(row[3]), _cert_from_cells(row[4:8]),
                               _cert_from_cells(row[8:12]),
                               complex(float(row[12]), float(row[13])),
                               _bool_from_cell(row[14]))
        except ValueError as e:
            raise FormatError("Bad pipeline row %s: %s" % (row, e)) from e


default_event_mapper = SweepRowMapping()


class CsvWriter(OutputThing, InputThing):
    """Write the stream into a temporary file, renamed over filename on
    on_completed(). On on_error() the temporary file is removed and the
    target is left untouched.
    """
    def __init__(self, previous_in_chain, filename,
                 mapper=default_event_mapper):
        super().__init__()
        self.filename = filename
        self.mapper = mapper
        (self.file, self.tmpname) = open_atomic(filename, newline='')
        self.writer = csvlib.writer(self.file)
        self.writer.writerow(self.mapper.get_header_row())
        self.rows = 0
        self.dispose = previous_in_chain.connect(self)

    def on_next(self, x):
        self.writer.writerow(self.mapper.event_to_row(x))
        self.rows += 1
        self._dispatch_next(x)

    def on_completed(self):
        commit_atomic(self.file, self.tmpname, self.filename)
        logger.debug("%s: %d rows", self, self.rows)
        self._dispatch_completed()

    def on_error(self, e):
        discard_atomic(self.file, self.tmpname)
        logger.warning("%s: stream failed, nothing written (%s)", self, e)
        self._dispatch_error(e)

    def __str__(self):
        return 'csv_writer(%s)' % self.filename

@filtermethod(OutputThing)
def csv_writer(this, filename, mapper=default_event_mapper):
    """Write an event stream to a csv file. mapper is an
    instance of EventSpreadsheetMapping.
    """
    return CsvWriter(this, filename, mapper)


class CsvReader(DirectReader):
    def __init__(self, filename, mapper=default_event_mapper,
                 has_header_row=True):
        """Creates an output thing that reads a row at a time from a csv
        file and converts the rows into events using the specified mapping.
        """
        self.filename = filename
        try:
            self.file = open(filename, 'r', newline='')
        except OSError as e:
            raise FormatError("cannot read %s: %s" % (filename, e)) from e
        reader = csvlib.reader(self.file)
        if has_header_row:
            # swallow up the header row so it is not passed as data
            try:
                header_row = reader.__next__()
            except (StopIteration, csvlib.Error) as e:
                self.file.close()
                raise FormatError("Problem in reading header row of csv file %s" %
                                  filename) from e
            logger.debug("header row of %s: %s", filename, ', '.join(header_row))
            expected = mapper.get_header_row()
            if header_row != expected:
                self.file.close()
                raise FormatError("csv file %s has header %s, expected %s" %
                                  (filename, header_row, expected))
        super().__init__(reader, mapper, name='CsvReader(%s)' % filename)

    def _close(self):
        self.file.close()


def read_rows(filename, mapper=default_event_mapper):
    """Read a whole file through a CsvReader without a scheduler."""
    reader = CsvReader(filename, mapper)
    collector = ListWriter()
    reader.connect(collector)
    while reader._has_connections():
        reader._observe()
    return collector.result()
