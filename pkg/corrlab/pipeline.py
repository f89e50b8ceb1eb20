# Copyright 2024 by the corrlab authors.
# Licensed under the Apache 2.0 License.
"""
End-to-end flows, run as push dataflows on a Scheduler:

 * pipeline_check() - for each dimension d, build the witness tuple, compare
   its Gram matrix with the limit matrix, certify it at m / 2d and at kappa,
   take the determinant of the symmetry product and ask whether
   e^{2 pi i kappa} I is excluded. Rows go to an optional CSV file.
 * run_sweep() - the warm-started residual sweep of fit.iter_sweep(), one
   CSV row per dimension, with an optional golden-baseline comparison.

A stage that raises does not stop the loop: the error travels downstream as
on_error(), the CSV writer drops its temporary file, and the collector at the
end re-raises it to the caller.
"""

import asyncio
import logging
import math
import os.path
from collections import namedtuple

import corrlab.filters
from corrlab import __version__
from corrlab.base import Scheduler, from_iterable, PipelineRow, SweepRow, \
     ValidationError
from corrlab.witness import WitnessSpec, build_witness_tuple, \
     build_symmetries, limit_gram, MIN_WITNESS_N
from corrlab.gram import compute_gram, max_entry_distance
from corrlab.certificate import certificate, det_obstruction, phase_excluded
from corrlab.fit import iter_sweep
from corrlab.adapters.generic import ListWriter
from corrlab.adapters.csv import PipelineRowMapping, SweepRowMapping, \
     read_rows
from corrlab.adapters.json import write_json, to_json

logger = logging.getLogger(__name__)

DEFAULT_KAPPA = math.sqrt(2.0) - 1.0
DEFAULT_DIMS = (64, 128, 256, 512)
CERT_CHECK_TOL = 1e-9
DET_CHECK_TOL = 1e-8
MONOTONE_SLACK = 1e-12
BASELINE_FACTOR = 1.05


def sidecar_name(csv_path):
    return csv_path + '.config.json'


def run_flow(source, stages, name='source'):
    """Run source through stages (functions of the upstream OutputThing,
    e.g. filter thunks) on a fresh event loop and return the collected
    events. A stage error is re-raised here.
    """
    loop = asyncio.new_event_loop()
    try:
        scheduler = Scheduler(loop)
        head = from_iterable(source, name=name)
        tail = head
        for stage in stages:
            tail = stage(tail)
        collector = ListWriter()
        tail.connect(collector)
        scheduler.schedule_recurring(head)
        scheduler.run_forever()
    finally:
        loop.close()
    return collector.result()


def _writer_stages(csv_path, mapper, progress):
    stages = []
    if csv_path is not None:
        stages.append(lambda upstream: upstream.csv_writer(csv_path, mapper))
    if progress is not None:
        stages.append(to_json())
        stages.append(corrlab.filters.output.output(progress))
    return stages


def pipeline_row(kappa, d, n=MIN_WITNESS_N, limit=None):
    """One row of the end-to-end check at dimension d."""
    if limit is None:
        limit = limit_gram(kappa, n)
    spec = WitnessSpec(kappa, d, n)
    g = compute_gram(build_witness_tuple(spec))
    kappa_d = spec.m / (2.0 * d)
    quad = build_symmetries(d, spec.m)
    (det,) = det_obstruction(quad.as_list(), quad.alg)
    row = PipelineRow(d, spec.m, kappa_d, max_entry_distance(g, limit),
                      certificate(g, kappa_d).c, certificate(g, kappa).c,
                      det, phase_excluded(quad.alg, kappa))
    logger.info("pipeline d=%d m=%d: distance %.3g, det %s", d, spec.m,
                row.distance, row.det)
    return row


PipelineReport = namedtuple('PipelineReport', ['kappa', 'n', 'rows', 'checks',
                                               'passes'])

def _pipeline_as_dict(self):
    return {'kappa': self.kappa, 'n': self.n, 'checks': dict(self.checks),
            'passes': self.passes,
            'rows': [{'d': r.d, 'm': r.m, 'kappa_d': r.kappa_d,
                      'distance': r.distance, 'cert_d': list(r.cert_d),
                      'cert_kappa': list(r.cert_kappa),
                      'det': [r.det.real, r.det.imag],
                      'phase_excluded': r.excluded} for r in self.rows]}

PipelineReport.as_dict = _pipeline_as_dict


def check_rows(rows):
    """Evaluate the end-to-end invariants on pipeline rows."""
    distances = [r.distance for r in rows]
    return {
        'convergence_nonincreasing':
            all(b <= a + MONOTONE_SLACK for (a, b) in zip(distances, distances[1:])),
        'certificate_at_kappa_d':
            all(abs(c - 2.0) <= CERT_CHECK_TOL for r in rows for c in r.cert_d),
        'det_plus_minus_one':
            all(min(abs(r.det - 1.0), abs(r.det + 1.0)) <= DET_CHECK_TOL
                for r in rows),
        'phase_excluded': all(r.excluded for r in rows),
    }


def pipeline_check(kappa=DEFAULT_KAPPA, dims=DEFAULT_DIMS, n=MIN_WITNESS_N,
                   csv_path=None, config=None, progress=None):
    """Run the witness sweep over dims and check its invariants. When
    csv_path is given the rows are written there and config (plus the
    package version) to the sidecar file.
    """
    dims = list(dims)
    if len(dims) == 0:
        raise ValidationError("The pipeline needs at least one dimension")
    limit = limit_gram(kappa, n)
    stages = [corrlab.filters.map.map(lambda d: pipeline_row(kappa, d, n, limit))]
    stages += _writer_stages(csv_path, PipelineRowMapping(), progress)
    rows = run_flow(dims, stages, name='pipeline dims')
    checks = check_rows(rows)
    for (name, ok) in sorted(checks.items()):
        if not ok:
            logger.warning("pipeline check %s failed", name)
    if csv_path is not None:
        _write_sidecar(csv_path, config)
    return PipelineReport(kappa, n, rows, checks, all(checks.values()))


def _write_sidecar(csv_path, config):
    cfg = dict(config or {})
    cfg.setdefault('version', __version__)
    write_json(sidecar_name(csv_path), {'config': cfg})


def _sweep_row(point):
    c = None
    if point.result.certificate_at_kappa is not None:
        c = point.result.certificate_at_kappa.c
    return SweepRow(point.d, point.residual, point.iterations, point.grad_norm, c)


def run_sweep(target, dims, seed=0, kappa=None, csv_path=None, config=None,
              progress=None, **options):
    """Residual sweep as a dataflow. Returns (rows, results), where rows are
    SweepRows and results the FitResults per dimension.
    """
    results = []
    def keep(point):
        results.append(point.result)
        return _sweep_row(point)
    stages = [corrlab.filters.map.map(keep)]
    stages += _writer_stages(csv_path, SweepRowMapping(), progress)
    rows = run_flow(iter_sweep(target, dims, seed, kappa=kappa, **options),
                    stages, name='residual sweep')
    if csv_path is not None:
        _write_sidecar(csv_path, config)
    return (rows, results)


def nonincreasing(rows, slack=1e-9):
    residuals = [r.residual for r in rows]
    return all(b <= a + slack for (a, b) in zip(residuals, residuals[1:]))


def compare_to_baseline(rows, baseline_rows, factor=BASELINE_FACTOR):
    """Messages for every dimension whose residual exceeds factor times the
    baseline residual at the same dimension.
    """
    baseline = {r.d: r.residual for r in baseline_rows}
    problems = []
    for r in rows:
        if r.d in baseline and r.residual > factor * baseline[r.d] + 1e-12:
            problems.append("d=%d: residual %r exceeds %.2f x baseline %r" %
                            (r.d, r.residual, factor, baseline[r.d]))
    return problems


def apply_baseline(rows, baseline_path, factor=BASELINE_FACTOR):
    """Write rows as the baseline if baseline_path does not exist, otherwise
    compare against it. Returns the list of regressions (empty if fine).
    """
    if not os.path.exists(baseline_path):
        run_flow(rows, _writer_stages(baseline_path, SweepRowMapping(), None),
                 name='baseline rows')
        logger.info("recorded new baseline %s", baseline_path)
        return []
    problems = compare_to_baseline(rows, read_rows(baseline_path,
                                                   SweepRowMapping()), factor)
    for p in problems:
        logger.warning("baseline regression: %s", p)
    return problems
