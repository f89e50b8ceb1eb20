# Copyright 2024 by the corrlab authors.
# Licensed under the Apache 2.0 License.
"""Run the command line entry point on temporary files and check outputs
and exit codes.
"""

import io
import json
import os
import unittest
from contextlib import redirect_stdout, redirect_stderr
from tempfile import TemporaryDirectory

import numpy as np

from corrlab import __version__
from corrlab.cli import run, EXIT_OK, EXIT_ERROR, EXIT_VALIDATION, \
     EXIT_CONVERGENCE, EXIT_USAGE, EXIT_NOINPUT
from corrlab.gram import GramMatrix, single_block_tuple
from corrlab.adapters.json import read_json, save_tuple, save_gram
from utils import KAPPA, all_ones


def _corrlab(*argv):
    out = io.StringIO()
    err = io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = run([str(a) for a in argv])
    return (code, out.getvalue(), err.getvalue())


class TestCommands(unittest.TestCase):
    def setUp(self):
        self._tmp = TemporaryDirectory()
        self.tmp = self._tmp.name

    def tearDown(self):
        self._tmp.cleanup()

    def path(self, name):
        return os.path.join(self.tmp, name)

    def test_witness_then_gram(self):
        w = self.path('w.json')
        (code, out, _) = _corrlab('witness', '--kappa', KAPPA, '--dim', 8,
                                  '--out', w)
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(json.loads(out)['m'], 7)
        config = read_json(w)['config']
        self.assertEqual(config['dim'], 8)
        self.assertEqual(config['version'], __version__)
        g = self.path('g.json')
        (code, out, _) = _corrlab('gram', '--in', w, '--out', g)
        self.assertEqual(code, EXIT_OK)
        self.assertTrue(json.loads(out)['passes'])
        (code, out, _) = _corrlab('certify', '--gram', g, '--kappa', 7 / 16.0)
        self.assertEqual(code, EXIT_OK)
        self.assertTrue(json.loads(out)['passes'])

    def test_witness_with_limit(self):
        w = self.path('w.json')
        g = self.path('limit.json')
        (code, _, _) = _corrlab('witness', '--kappa', KAPPA, '--dim', 16,
                                '--n', 10, '--out', w, '--limit', g)
        self.assertEqual(code, EXIT_OK)
        saved = read_json(g)
        self.assertEqual(saved['n'], 10)
        self.assertEqual(len(saved['entries']), 100)
        self.assertEqual(len(read_json(w)['operators']), 10)

    def test_limit_then_certify(self):
        g = self.path('limit.json')
        (code, _, _) = _corrlab('limit', '--kappa', KAPPA, '--out', g)
        self.assertEqual(code, EXIT_OK)
        c = self.path('cert.json')
        (code, out, _) = _corrlab('certify', '--gram', g, '--kappa', KAPPA,
                                  '--out', c)
        self.assertEqual(code, EXIT_OK)
        report = read_json(c)
        self.assertTrue(report['passes'])
        self.assertEqual(json.loads(out)['c'], report['c'])
        self.assertIsNotNone(report['implication'])
        (code, out, _) = _corrlab('validate', '--gram', g)
        self.assertEqual(code, EXIT_OK)

    def test_non_unitary_tuple(self):
        t = self.path('t.json')
        save_tuple(t, single_block_tuple([np.eye(2), np.diag([1.0, 0.5])]))
        (code, _, err) = _corrlab('gram', '--in', t)
        self.assertEqual(code, EXIT_VALIDATION)
        self.assertIn('Entry 2', err)

    def test_invalid_gram(self):
        g = self.path('bad.json')
        save_gram(g, GramMatrix(np.array([[1.0, 2.0], [2.0, 1.0]])))
        (code, out, _) = _corrlab('validate', '--gram', g)
        self.assertEqual(code, EXIT_VALIDATION)
        self.assertFalse(json.loads(out)['passes'])
        (code, _, _) = _corrlab('fit', '--gram', g, '--dim', 2,
                                '--out', self.path('r.json'))
        self.assertEqual(code, EXIT_VALIDATION)

    def test_usage_errors(self):
        (code, _, err) = _corrlab('witness', '--kappa', KAPPA, '--dim', 8,
                                  '--out', self.path('w.json'), '--bogus')
        self.assertEqual(code, EXIT_USAGE)
        self.assertIn('--bogus', err)
        (code, _, _) = _corrlab()
        self.assertEqual(code, EXIT_USAGE)
        (code, _, _) = _corrlab('sweep', '--gram', 'g.json', '--dims', 'a,b',
                                '--csv', 'x.csv')
        self.assertEqual(code, EXIT_USAGE)
        g = self.path('ones.json')
        save_gram(g, GramMatrix(all_ones(3)))
        (code, _, err) = _corrlab('fit', '--gram', g, '--out', self.path('r.json'))
        self.assertEqual(code, EXIT_USAGE)
        self.assertIn('--dim or --blocks', err)

    def test_stdout_carries_config(self):
        w = self.path('w.json')
        g = self.path('limit.json')
        runs = [('witness', '--kappa', KAPPA, '--dim', 8, '--out', w),
                ('gram', '--in', w),
                ('limit', '--kappa', KAPPA, '--out', g),
                ('validate', '--gram', g, '--tol', 1e-7),
                ('certify', '--gram', g, '--kappa', KAPPA),
                ('fit', '--gram', g, '--dim', 2, '--restarts', 1,
                 '--max-iter', 5, '--out', self.path('r.json')),
                ('sweep', '--gram', g, '--dims', '2', '--restarts', 1,
                 '--max-iter', 5, '--csv', self.path('s.csv')),
                ('pipeline', '--dims', '64')]
        for argv in runs:
            (code, out, _) = _corrlab(*argv)
            self.assertEqual(code, EXIT_OK, argv)
            config = json.loads(out)['config']
            self.assertEqual(config['command'], argv[0])
            self.assertEqual(config['version'], __version__)
        self.assertEqual(config['dims'], [64])
        self.assertIsNone(config['csv'])

    def test_write_failure_is_not_an_input_error(self):
        missing = os.path.join(self.tmp, 'no_such_dir', 'w.json')
        (code, _, err) = _corrlab('witness', '--kappa', KAPPA, '--dim', 8,
                                  '--out', missing)
        self.assertEqual(code, EXIT_ERROR)
        self.assertIn('cannot write output', err)
        (code, _, err) = _corrlab('validate', '--gram', missing)
        self.assertEqual(code, EXIT_NOINPUT)
        self.assertIn('cannot read input', err)

    def test_version(self):
        (code, out, _) = _corrlab('--version')
        self.assertEqual(code, EXIT_OK)
        self.assertIn(__version__, out)

    def test_unreadable_input(self):
        (code, _, _) = _corrlab('validate', '--gram', self.path('missing.json'))
        self.assertEqual(code, EXIT_NOINPUT)
        bad = self.path('bad.json')
        with open(bad, 'w') as f:
            f.write('not json')
        (code, _, _) = _corrlab('certify', '--gram', bad, '--kappa', KAPPA)
        self.assertEqual(code, EXIT_NOINPUT)
        (code, _, _) = _corrlab('gram', '--in', bad)
        self.assertEqual(code, EXIT_NOINPUT)

    def test_bad_parameters(self):
        (code, _, err) = _corrlab('witness', '--kappa', KAPPA, '--dim', 1,
                                  '--out', self.path('w.json'))
        self.assertEqual(code, EXIT_VALIDATION)
        self.assertFalse(os.path.exists(self.path('w.json')))
        (code, _, err) = _corrlab('witness', '--kappa', 'nan', '--dim', 8,
                                  '--out', self.path('w.json'))
        self.assertEqual(code, EXIT_VALIDATION)
        self.assertIn('finite', err)

    def test_fit(self):
        g = self.path('ones.json')
        save_gram(g, GramMatrix(all_ones(3)))
        r = self.path('r.json')
        (code, out, _) = _corrlab('fit', '--gram', g, '--dim', 1, '--seed', 11,
                                  '--restarts', 2, '--grad-tol', 1e-10,
                                  '--out', r)
        self.assertEqual(code, EXIT_OK)
        self.assertLess(json.loads(out)['residual'], 1e-6)
        saved = read_json(r)
        self.assertEqual(saved['config']['seed'], 11)
        self.assertEqual(saved['algebra']['blocks'], [{'dim': 1, 'weight': 1.0}])
        self.assertEqual(len(saved['operators']), 3)

    def test_fit_blocks(self):
        g = self.path('ones.json')
        save_gram(g, GramMatrix(all_ones(2)))
        r = self.path('r.json')
        (code, _, _) = _corrlab('fit', '--gram', g, '--blocks', '1,2',
                                '--weights', '0.5,0.5', '--restarts', 1,
                                '--max-iter', 50, '--out', r)
        self.assertEqual(code, EXIT_OK)
        blocks = read_json(r)['algebra']['blocks']
        self.assertEqual([b['weight'] for b in blocks], [0.5, 0.5])
        (code, _, _) = _corrlab('fit', '--gram', g, '--dim', 2,
                                '--weights', '1.0', '--out', r)
        self.assertEqual(code, EXIT_VALIDATION)

    def test_fit_strict(self):
        g = self.path('limit.json')
        _corrlab('limit', '--kappa', KAPPA, '--out', g)
        (code, _, err) = _corrlab('fit', '--gram', g, '--dim', 2, '--restarts', 1,
                                  '--max-iter', 0, '--strict',
                                  '--out', self.path('r.json'))
        self.assertEqual(code, EXIT_CONVERGENCE)
        self.assertIn('did not converge', err)

    def test_sweep_with_baseline(self):
        g = self.path('limit.json')
        _corrlab('limit', '--kappa', KAPPA, '--out', g)
        csv = self.path('sweep.csv')
        baseline = self.path('baseline.csv')
        argv = ['sweep', '--gram', g, '--dims', '2,4', '--restarts', 1,
                '--max-iter', 40, '--csv', csv, '--baseline', baseline]
        (code, out, _) = _corrlab(*argv)
        self.assertEqual(code, EXIT_OK)
        summary = json.loads(out)
        self.assertEqual(summary['dims'], [2, 4])
        self.assertTrue(summary['nonincreasing'])
        self.assertTrue(os.path.exists(baseline))
        self.assertTrue(os.path.exists(csv + '.config.json'))
        # same seed, same residuals: no regression
        (code, out, _) = _corrlab(*argv)
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(json.loads(out)['baseline_regressions'], [])

    def test_pipeline(self):
        csv = self.path('pipeline.csv')
        (code, out, _) = _corrlab('pipeline', '--dims', '64,128', '--csv', csv)
        self.assertEqual(code, EXIT_OK)
        summary = json.loads(out)
        self.assertTrue(summary['passes'])
        self.assertTrue(all(summary['checks'].values()))
        self.assertTrue(os.path.exists(csv))
        config = read_json(csv + '.config.json')['config']
        self.assertEqual(config['dims'], [64, 128])


if __name__ == '__main__':
    unittest.main()
