#!/usr/bin/env python3

import argparse
import logging
import math
import os
import sys

from cli.runner import RunConfig, run, write_report
from analysis.exponents import ProblemParams
from config.settings import LOG_LEVEL, OUTPUT_DIR, SEED, validate_config
from utils.errors import ConfigError, HardyPLaplaceError, NumericError


def setup_environment(level: str = LOG_LEVEL):

    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    if not validate_config():
        raise ConfigError("invalid HARDY_PLAPLACE_* settings (see warnings above)")


def _problem_flags(parser, mu=True, eps=True, nonlinear=False):
    parser.add_argument('--p', type=float, required=True, help='exponent p > 1')
    parser.add_argument('--N', type=int, required=True, help='dimension N >= 2')
    if mu:
        parser.add_argument('--mu', type=float, default=0.0, help='Hardy potential coefficient')
    if eps:
        parser.add_argument('--eps', type=float, default=0.0, help='logarithmic remainder coefficient')
    if nonlinear:
        parser.add_argument('--q', type=float, required=True, help='power of the nonlinearity')
        parser.add_argument('--sigma', type=float, required=True, help='weight exponent of the nonlinearity')
        parser.add_argument('--C', type=float, default=1.0, help='nonlinearity coefficient')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='hardy-plaplace',
        description='Existence/nonexistence and Hardy inequality checks for -Delta_p u - mu u^(p-1)/|x|^p')
    parser.add_argument('--out', default=None, help='output file (directory for figures)')
    parser.add_argument('--format', choices=('json', 'csv'), default='json')
    parser.add_argument('--seed', type=int, default=SEED)
    parser.add_argument('--log-level', default=LOG_LEVEL)
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('classify', help='verdict for (q, sigma)')
    _problem_flags(p, eps=False, nonlinear=True)
    p.add_argument('--json', action='store_true', help='print the JSON report')

    p = sub.add_parser('region', help='critical line sigma = Lambda*(q)')
    _problem_flags(p, eps=False)
    p.add_argument('--qmin', type=float)
    p.add_argument('--qmax', type=float)
    p.add_argument('--step', type=float)

    p = sub.add_parser('sinp', help='generalized sine')
    p.add_argument('--p', type=float, required=True)
    p.add_argument('--psi', type=float)

    p = sub.add_parser('barrier', help='sign of r^gamma (log r)^beta (log log r)^tau')
    _problem_flags(p)
    p.add_argument('--gamma', type=float, help='defaults to gamma* = (p-N)/p')
    p.add_argument('--beta', type=float)
    p.add_argument('--tau', type=float)
    p.add_argument('--rmin', type=float, help='inner sample radius')
    p.add_argument('--rmax', type=float, help='outer sample radius')
    p.add_argument('--log-rmin', type=float)
    p.add_argument('--log-rmax', type=float)

    p = sub.add_parser('prufer', help='large sub-solution through the Prufer phase')
    _problem_flags(p)
    p.add_argument('--R', type=float)
    p.add_argument('--tend', type=float, help='final log r')
    p.add_argument('--case', choices=('i', 'ii', 'iii', 'iv'))
    p.add_argument('--delta', type=float, help='sandwich width for case iv')

    p = sub.add_parser('hardy', help='Hardy inequality checks')
    _problem_flags(p)
    p.add_argument('--mode', choices=('rayleigh', 'improved', 'sharpness', 'witness'))
    p.add_argument('--rho-in', type=float)
    p.add_argument('--R-out', type=float)
    p.add_argument('--n-grid', type=int)
    p.add_argument('--draws', type=int)
    p.add_argument('--family', choices=('eps_above_Cstar', 'mu_above_CH', 'critical'))
    p.add_argument('--excess', type=float)
    p.add_argument('--log-R', type=float, nargs='+')

    p = sub.add_parser('suite', help='verification battery')
    p.add_argument('--quick', action='store_true')
    p.add_argument('--threads', type=int)

    p = sub.add_parser('figures', help='data behind the (q, sigma) picture')
    p.add_argument('--p', type=float, required=True)
    p.add_argument('--N', type=int, required=True)
    p.add_argument('--mu', type=float, nargs='+', default=[0.0])
    p.add_argument('--qmin', type=float)
    p.add_argument('--qmax', type=float)
    p.add_argument('--step', type=float)
    return parser


def _log_radius(r):
    if r is None:
        return None
    if not r > 0:
        raise ConfigError(f"radii must be positive, got {r}")
    return math.log(r)


def config_from_args(args) -> RunConfig:
    """Translate parsed flags into a RunConfig; unset flags keep the defaults"""
    command = args.command
    if command == 'suite':
        params = ProblemParams(2.0, 3)
    elif command == 'sinp':
        params = ProblemParams(args.p, 2)
    else:
        params = ProblemParams(args.p, args.N, mu=getattr(args, 'mu', 0.0) if command != 'figures' else 0.0,
                               eps=getattr(args, 'eps', 0.0), q=getattr(args, 'q', 0.0),
                               sigma=getattr(args, 'sigma', 0.0), C=getattr(args, 'C', 1.0))

    knobs = {
        'classify': lambda: {},
        'region': lambda: {'qmin': args.qmin, 'qmax': args.qmax, 'step': args.step},
        'sinp': lambda: {'psi': args.psi},
        'barrier': lambda: {'gamma': args.gamma, 'beta': args.beta, 'tau': args.tau,
                            'log_rmin': args.log_rmin if args.rmin is None else _log_radius(args.rmin),
                            'log_rmax': args.log_rmax if args.rmax is None else _log_radius(args.rmax)},
        'prufer': lambda: {'R': args.R, 't_end': args.tend, 'case': args.case, 'delta': args.delta},
        'hardy': lambda: {'mode': args.mode, 'rho_in': args.rho_in, 'R_out': args.R_out,
                          'n_grid': args.n_grid, 'draws': args.draws, 'family': args.family,
                          'excess': args.excess,
                          'log_R': tuple(args.log_R) if args.log_R else None},
        'suite': lambda: {'quick': args.quick, 'threads': args.threads},
        'figures': lambda: {'mu_list': tuple(args.mu), 'qmin': args.qmin, 'qmax': args.qmax,
                            'step': args.step},
    }[command]()
    output = args.out
    if command == 'figures' and output is None:
        output = os.path.join(OUTPUT_DIR, 'figures')
    return RunConfig(command, params, knobs, output, args.format, args.seed)


def print_report(report):

    print("\n" + "=" * 50)
    print(f"{report.config.command.upper()}: {report.anchor}")
    print("=" * 50)
    if report.config.command == 'suite':
        for row in report.results['checks']:
            mark = "✓" if row['pass'] else "✗"
            print(f"{mark} {row['name']:<24} {row['detail']}")
        print("-" * 50)
        print(f"{report.results['n_passed']}/{report.results['n_checks']} checks passed")
    if report.passed is True:
        print(f"✓ pass ({report.wall_time:.2f}s)")
    elif report.passed is False:
        print(f"✗ fail ({report.wall_time:.2f}s)")
    else:
        print(f"✓ done ({report.wall_time:.2f}s)")


def main(argv=None) -> int:

    args = build_parser().parse_args(argv)
    try:
        setup_environment(args.log_level.upper())
        config = config_from_args(args)
        report = run(config)
    except ConfigError as e:
        print(f"✗ Configuration error: {e}", file=sys.stderr)
        return e.exit_code
    except NumericError as e:
        print(f"✗ {type(e).__name__}: {e}", file=sys.stderr)
        return e.exit_code
    except HardyPLaplaceError as e:
        print(f"✗ Error: {e}", file=sys.stderr)
        return e.exit_code
    except Exception as e:
        logging.getLogger(__name__).debug("run failed outside the toolkit errors", exc_info=True)
        print(f"✗ Numerical failure ({type(e).__name__}): {e}", file=sys.stderr)
        return NumericError.exit_code

    if config.output or config.command != 'classify' or getattr(args, 'json', False):
        write_report(report)
    else:
        print(f"Verdict: {report.results['verdict']}")
    print_report(report)
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
