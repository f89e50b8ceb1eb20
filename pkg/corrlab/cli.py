# Copyright 2024 by the corrlab authors.
# Licensed under the Apache 2.0 License.
"""
Command line interface::

    corrlab witness  --kappa K --dim D [--n N] [--m M] --out w.json
                     [--limit g.json]
    corrlab gram     --in w.json [--out g.json] [--tol T]
    corrlab limit    --kappa K [--n N] --out g.json
    corrlab validate --gram g.json [--tol T]
    corrlab certify  --gram g.json --kappa K [--tol T] [--out c.json]
    corrlab fit      --gram g.json (--dim D | --blocks 2,3 [--weights .4,.6])
                     [--seed S] [--restarts R] [--kappa K] --out r.json [--strict]
    corrlab sweep    --gram g.json --dims 2,4,8,16 [--seed S] --csv s.csv
                     [--baseline b.csv] [--strict]
    corrlab pipeline [--kappa K] [--dims 64,128,256,512] [--csv p.csv]

Every JSON output carries a "config" object with all resolved flags, the
seed and the package version; CSV outputs get it in a .config.json sidecar.

Exit codes: 0 success, 2 validation failure, 3 non-convergence with
--strict, 64 usage error, 66 unreadable or malformed input, 1 other errors.
"""

import argparse
import logging
import sys

from corrlab import __version__
from corrlab.base import CorrlabError, ValidationError, ConvergenceError, \
     FormatError
from corrlab.algebra import TracialAlgebra
from corrlab.gram import compute_gram, validate_gram, DEFAULT_GRAM_TOL
from corrlab.witness import WitnessSpec, build_witness_tuple, limit_gram, \
     MIN_WITNESS_N
from corrlab.certificate import certificate, DEFAULT_CERT_TOL
from corrlab.fit import FitProblem, fit, DEFAULT_MAX_ITER, DEFAULT_GRAD_TOL, \
     DEFAULT_RESTARTS
from corrlab.pipeline import pipeline_check, run_sweep, apply_baseline, \
     nonincreasing, DEFAULT_KAPPA, DEFAULT_DIMS
from corrlab.adapters.json import load_tuple, save_tuple, load_gram, \
     save_gram, write_json, dumps

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_VALIDATION = 2
EXIT_CONVERGENCE = 3
EXIT_USAGE = 64
EXIT_NOINPUT = 66


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, '%s: error: %s\n' % (self.prog, message))


def _int_list(text):
    try:
        values = [int(x) for x in text.split(',') if x.strip() != '']
    except ValueError:
        raise argparse.ArgumentTypeError("expected comma-separated integers, got %r" % text)
    if len(values) == 0:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _float_list(text):
    try:
        return [float(x) for x in text.split(',') if x.strip() != '']
    except ValueError:
        raise argparse.ArgumentTypeError("expected comma-separated numbers, got %r" % text)


def _config(args):
    cfg = {k: v for (k, v) in vars(args).items() if k != 'func'}
    cfg['version'] = __version__
    return cfg


def _emit(obj, out=None):
    if out:
        write_json(out, obj)
    sys.stdout.write(dumps(obj))


def _emit_report(report, args):
    obj = report.as_dict()
    obj['config'] = _config(args)
    sys.stdout.write(dumps(obj))


def cmd_witness(args):
    spec = WitnessSpec(args.kappa, args.dim, args.n, args.m)
    t = build_witness_tuple(spec)
    save_tuple(args.out, t, {'config': _config(args),
                             'witness': {'kappa': spec.kappa, 'd': spec.d,
                                         'm': spec.m, 'n': spec.n}})
    if args.limit:
        save_gram(args.limit, limit_gram(spec.kappa, spec.n),
                  {'config': _config(args)})
    sys.stdout.write(dumps({'out': args.out, 'd': spec.d, 'm': spec.m,
                            'n': spec.n, 'kappa_d': spec.m / (2.0 * spec.d),
                            'config': _config(args)}))
    return EXIT_OK


def cmd_gram(args):
    (t, _) = load_tuple(args.input)
    g = compute_gram(t)
    report = validate_gram(g, args.tol)
    if args.out:
        save_gram(args.out, g, {'config': _config(args),
                                'validation': report.as_dict()})
    _emit_report(report, args)
    return EXIT_OK if report.passes else EXIT_VALIDATION


def cmd_limit(args):
    g = limit_gram(args.kappa, args.n)
    save_gram(args.out, g, {'config': _config(args)})
    sys.stdout.write(dumps({'out': args.out, 'n': g.n,
                            'config': _config(args)}))
    return EXIT_OK


def cmd_validate(args):
    (g, _) = load_gram(args.gram)
    report = validate_gram(g, args.tol)
    _emit_report(report, args)
    return EXIT_OK if report.passes else EXIT_VALIDATION


def cmd_certify(args):
    (g, _) = load_gram(args.gram)
    report = certificate(g, args.kappa, args.tol)
    obj = report.as_dict()
    obj['config'] = _config(args)
    _emit(obj, args.out)
    return EXIT_OK


def _shape(args):
    if args.blocks is not None:
        return TracialAlgebra(args.blocks, args.weights)
    if args.weights is not None:
        raise ValidationError("--weights needs --blocks")
    return TracialAlgebra.single(args.dim)


def cmd_fit(args):
    (target, _) = load_gram(args.gram)
    problem = FitProblem(target, _shape(args), n=args.n, seed=args.seed,
                         max_iter=args.max_iter, grad_tol=args.grad_tol,
                         restarts=args.restarts)
    result = fit(problem, kappa=args.kappa)
    save_tuple(args.out, result.tuple, {'config': _config(args),
                                        'fit': result.as_dict()})
    obj = result.as_dict()
    obj['config'] = _config(args)
    sys.stdout.write(dumps(obj))
    if args.strict and not result.converged:
        raise ConvergenceError("fit did not converge: residual %.3g, |grad| %.3g after %d iterations" %
                               (result.residual, result.grad_norm,
                                result.iterations))
    return EXIT_OK


def cmd_sweep(args):
    (target, _) = load_gram(args.gram)
    kappa = args.kappa if target.n >= MIN_WITNESS_N else None
    (rows, results) = run_sweep(target, args.dims, args.seed, kappa=kappa,
                                csv_path=args.csv, config=_config(args),
                                progress=sys.stderr if args.progress else None,
                                max_iter=args.max_iter, grad_tol=args.grad_tol,
                                restarts=args.restarts)
    summary = {'dims': [r.d for r in rows],
               'residuals': [r.residual for r in rows],
               'nonincreasing': nonincreasing(rows),
               'config': _config(args)}
    problems = []
    if args.baseline:
        problems = apply_baseline(rows, args.baseline)
        summary['baseline_regressions'] = problems
    sys.stdout.write(dumps(summary))
    if problems:
        raise ValidationError("residuals regressed against %s: %s" %
                              (args.baseline, '; '.join(problems)))
    if args.strict and not all(r.converged for r in results):
        unconverged = [r.tuple.alg.dims[0] for r in results if not r.converged]
        raise ConvergenceError("sweep did not converge at d = %s" % unconverged)
    return EXIT_OK


def cmd_pipeline(args):
    report = pipeline_check(args.kappa, args.dims, args.n, csv_path=args.csv,
                            config=_config(args),
                            progress=sys.stderr if args.progress else None)
    sys.stdout.write(dumps({'checks': report.checks, 'passes': report.passes,
                            'csv': args.csv, 'config': _config(args)}))
    return EXIT_OK if report.passes else EXIT_VALIDATION


def build_parser():
    parser = _Parser(prog='corrlab',
                     description="Finite-dimensional correlation matrices: witness construction, certificates and fitting.")
    parser.add_argument('--version', action='version',
                        version='%(prog)s ' + __version__)
    parser.add_argument('-v', '--verbose', action='count', default=0,
                        help="-v for INFO, -vv for DEBUG logging")
    sub = parser.add_subparsers(dest='command', metavar='command')
    sub.required = True

    p = sub.add_parser('witness', help="build the witness tuple at dimension d")
    p.add_argument('--kappa', type=float, required=True)
    p.add_argument('--dim', type=int, required=True)
    p.add_argument('--n', type=int, default=MIN_WITNESS_N)
    p.add_argument('--m', type=int, default=None,
                   help="phase index (default: closest coprime to 2 kappa d)")
    p.add_argument('--out', required=True)
    p.add_argument('--limit', default=None,
                   help="also write the limit Gram matrix to this file")
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser('gram', help="Gram matrix of a tuple file")
    p.add_argument('--in', dest='input', required=True)
    p.add_argument('--out', default=None)
    p.add_argument('--tol', type=float, default=DEFAULT_GRAM_TOL)
    p.set_defaults(func=cmd_gram)

    p = sub.add_parser('limit', help="limit Gram matrix of the witness")
    p.add_argument('--kappa', type=float, required=True)
    p.add_argument('--n', type=int, default=MIN_WITNESS_N)
    p.add_argument('--out', required=True)
    p.set_defaults(func=cmd_limit)

    p = sub.add_parser('validate', help="check a Gram matrix file")
    p.add_argument('--gram', required=True)
    p.add_argument('--tol', type=float, default=DEFAULT_GRAM_TOL)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser('certify', help="certificate values of a Gram matrix")
    p.add_argument('--gram', required=True)
    p.add_argument('--kappa', type=float, required=True)
    p.add_argument('--tol', type=float, default=DEFAULT_CERT_TOL)
    p.add_argument('--out', default=None)
    p.set_defaults(func=cmd_certify)

    def fit_options(p):
        p.add_argument('--gram', required=True)
        p.add_argument('--seed', type=int, default=0)
        p.add_argument('--restarts', type=int, default=DEFAULT_RESTARTS)
        p.add_argument('--max-iter', type=int, default=DEFAULT_MAX_ITER)
        p.add_argument('--grad-tol', type=float, default=DEFAULT_GRAD_TOL)
        p.add_argument('--kappa', type=float, default=DEFAULT_KAPPA,
                       help="phase for the certificate of the fitted Gram matrix")
        p.add_argument('--strict', action='store_true',
                       help="exit 3 when a fit does not converge")

    p = sub.add_parser('fit', help="fit unitaries to a Gram matrix")
    fit_options(p)
    p.add_argument('--dim', type=int, default=None)
    p.add_argument('--blocks', type=_int_list, default=None)
    p.add_argument('--weights', type=_float_list, default=None)
    p.add_argument('--n', type=int, default=None)
    p.add_argument('--out', required=True)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser('sweep', help="warm-started residual sweep over dimensions")
    fit_options(p)
    p.add_argument('--dims', type=_int_list, required=True)
    p.add_argument('--csv', required=True)
    p.add_argument('--baseline', default=None,
                   help="golden residual file: written if absent, else residuals must stay within 1.05x")
    p.add_argument('--progress', action='store_true')
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser('pipeline', help="end-to-end witness check")
    p.add_argument('--kappa', type=float, default=DEFAULT_KAPPA)
    p.add_argument('--dims', type=_int_list, default=list(DEFAULT_DIMS))
    p.add_argument('--n', type=int, default=MIN_WITNESS_N)
    p.add_argument('--csv', default=None)
    p.add_argument('--progress', action='store_true')
    p.set_defaults(func=cmd_pipeline)
    return parser


def _configure_logging(verbose):
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbose, logging.DEBUG)
    logging.basicConfig(level=level,
                        format='%(asctime)s %(name)s %(levelname)s %(message)s')


def run(argv):
    """Parse argv, run the subcommand and return the exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == 'fit' and args.dim is None and args.blocks is None:
            parser.error("fit needs --dim or --blocks")
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    _configure_logging(args.verbose)
    try:
        return args.func(args)
    except ValidationError as e:
        sys.stderr.write('corrlab: validation failed: %s\n' % e)
        return EXIT_VALIDATION
    except ConvergenceError as e:
        sys.stderr.write('corrlab: %s\n' % e)
        return EXIT_CONVERGENCE
    except FormatError as e:
        sys.stderr.write('corrlab: cannot read input: %s\n' % e)
        return EXIT_NOINPUT
    except OSError as e:
        # reads raise FormatError, so this is a failed write
        sys.stderr.write('corrlab: cannot write output: %s\n' % e)
        return EXIT_ERROR
    except CorrlabError as e:
        logger.exception("%s failed", args.command)
        sys.stderr.write('corrlab: %s\n' % e)
        return EXIT_ERROR


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == '__main__':
    main()
