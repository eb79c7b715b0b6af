"""
Run configuration, command dispatch and reports.

Every command is a small tool: a name, a function from RunConfig to
(results, pass, frames) and an anchor naming the statement the run checks.
"""

import logging
import math
import os
import time
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Dict, Optional, Tuple

import numpy as np
import pandas as pd

from analysis.barriers import BarrierClass, RadialProfile, classify_barrier, barrier_expectation
from analysis.exponents import (ProblemParams, Verdict, classify, critical_line, gamma_roots,
                                hardy_constants, is_double_root, region_polyline,
                                critical_exponent)
from analysis.hardy import (FAMILY_CASES, certified_radius, energy_form, improved_hardy_check,
                            near_extremal_test_function, nonexistence_witness, rayleigh_min,
                            sharpness_family)
from analysis.prufer import (AsymptoticCase, eps_sandwich_run, fit_asymptotics,
                             integrate_large_subsolution)
from analysis.specfun import eval_sp, get_gensine, quarter_pi_p
from cli.figures import region_dataset
from config.settings import (BARRIER_SAMPLES, DEFAULT_T_END, RANDOM_DRAWS, RAYLEIGH_GRID,
                             SCHEMA_VERSION, SEED, THREADS)
from utils.data_export import dumps_report, write_csv, write_json
from utils.errors import ConfigError

logger = logging.getLogger(__name__)

COMMANDS = ('classify', 'region', 'sinp', 'barrier', 'prufer', 'hardy', 'suite', 'figures')
FORMATS = ('json', 'csv')
HARDY_MODES = ('rayleigh', 'improved', 'sharpness', 'witness')

DEFAULT_KNOBS: Dict[str, Dict[str, Any]] = {
    'classify': {},
    'region': {'qmin': -3.0, 'qmax': 6.0, 'step': 0.05},
    'sinp': {'psi': 1.0},
    'barrier': {'gamma': None, 'beta': 0.0, 'tau': 0.0, 'log_rmin': 4.0, 'log_rmax': 4096.0,
                'n_samples': BARRIER_SAMPLES},
    'prufer': {'R': 1.0, 't_end': DEFAULT_T_END, 'case': 'i', 'delta': 0.05},
    'hardy': {'mode': 'rayleigh', 'rho_in': 1.0, 'R_out': 1e7, 'n_grid': RAYLEIGH_GRID,
              'draws': RANDOM_DRAWS, 'family': 'eps_above_Cstar', 'excess': 0.1,
              'log_R': tuple(k * math.log(10.0) for k in (3, 6, 12))},
    'suite': {'quick': False, 'threads': THREADS},
    'figures': {'mu_list': (0.0,), 'qmin': -3.0, 'qmax': 6.0, 'step': 0.05},
}

POSITIVE_KNOBS = ('step', 'n_samples', 'R', 't_end', 'delta', 'rho_in', 'R_out', 'n_grid',
                  'draws', 'excess', 'threads')

PRUFER_TOLERANCE = {'i': 0.02, 'ii': 0.10, 'iii': 0.05}


@dataclass
class RunConfig:
    command: str
    params: ProblemParams
    knobs: Dict[str, Any] = field(default_factory=dict)
    output: Optional[str] = None
    format: str = 'json'
    seed: int = SEED

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}; expected one of {COMMANDS}")
        if self.format not in FORMATS:
            raise ConfigError(f"unknown format {self.format!r}; expected json or csv")
        merged = dict(DEFAULT_KNOBS[self.command])
        unknown = sorted(set(self.knobs) - set(merged))
        if unknown:
            raise ConfigError(f"knobs {unknown} do not apply to {self.command}")
        merged.update({k: v for k, v in self.knobs.items() if v is not None})
        for name in POSITIVE_KNOBS:
            value = merged.get(name)
            if isinstance(value, (int, float)) and not isinstance(value, bool) and not value > 0:
                raise ConfigError(f"{name} must be positive, got {value}")
        self.knobs = merged
        if self.command == 'hardy' and self.knobs['mode'] not in HARDY_MODES:
            raise ConfigError(f"unknown hardy mode {self.knobs['mode']!r}; expected one of {HARDY_MODES}")
        if self.output:
            parent = os.path.dirname(os.path.abspath(self.output))
            while not os.path.exists(parent):
                parent = os.path.dirname(parent)
            if not os.access(parent, os.W_OK):
                raise ConfigError(f"output path {self.output} is not writable")

    def to_dict(self) -> dict:
        return {'command': self.command, 'params': asdict(self.params), 'knobs': dict(self.knobs),
                'output': self.output, 'format': self.format, 'seed': self.seed}


@dataclass
class RunReport:
    config: RunConfig
    results: Dict[str, Any]
    anchor: str
    passed: Optional[bool] = None
    wall_time: float = 0.0
    frames: Dict[str, pd.DataFrame] = field(default_factory=dict, repr=False)

    @property
    def exit_code(self) -> int:
        return 1 if self.passed is False else 0

    def to_dict(self) -> dict:
        """Report payload; wall time is left out so equal configs give equal files"""
        return {'config': self.config.to_dict(), 'results': self.results, 'anchor': self.anchor,
                'pass': self.passed, 'schema_version': SCHEMA_VERSION,
                'columns': {name: list(frame.columns) for name, frame in self.frames.items()}}


Outcome = Tuple[Dict[str, Any], Optional[bool], Dict[str, pd.DataFrame]]


@dataclass(frozen=True)
class Command:
    name: str
    func: Callable[[RunConfig], Outcome]
    anchor: str


def _classify(config: RunConfig) -> Outcome:
    params = config.params
    p, N, mu = params.p, params.N, params.mu
    c_h, c_star, m_star = hardy_constants(p, N)
    verdict = classify(params)
    results = {'verdict': verdict.value, 'C_H': c_h, 'C_star': c_star, 'm_star': m_star,
               'q_star': critical_exponent(p, N)}
    if verdict != Verdict.NONEXISTENCE_ALL_Q:
        g_minus, g_plus = gamma_roots(p, N, mu)
        results.update({'gamma_minus': g_minus, 'gamma_plus': g_plus,
                        'lambda_star': critical_line(p, N, mu, params.q)})
    return results, None, {}


def _region(config: RunConfig) -> Outcome:
    params, knobs = config.params, config.knobs
    frame = region_polyline(params.p, params.N, params.mu, (knobs['qmin'], knobs['qmax']),
                            knobs['step'])
    return {'n_points': len(frame), 'kink': [params.p - 1, params.p]}, None, {'region': frame}


def _sinp(config: RunConfig) -> Outcome:
    p = config.params.p
    gs = get_gensine(p)
    s, ds = eval_sp(gs, config.knobs['psi'])
    quarter, _ = quarter_pi_p(gs)
    results = {'psi': config.knobs['psi'], 'S_p': s, 'S_p_prime': ds, 'pi_p': gs.pi_p,
               'quarter_pi_p': quarter,
               'first_integral_residual': abs(ds) ** p + abs(s) ** p / (p - 1) - 1.0}
    return results, None, {}


def _barrier(config: RunConfig) -> Outcome:
    params, knobs = config.params, config.knobs
    p, N = params.p, params.N
    c_h, _, _ = hardy_constants(p, N)
    gamma_star = (p - N) / p
    gamma = gamma_star if knobs['gamma'] is None else knobs['gamma']
    profile = RadialProfile(gamma, knobs['beta'], knobs['tau'])
    report = classify_barrier(profile, params, knobs['log_rmin'], knobs['log_rmax'],
                              int(knobs['n_samples']))
    results = {'profile': asdict(profile), 'classification': report.classification.value,
               'threshold_log_r': report.threshold_log_r}
    passed = None
    if math.isclose(gamma, gamma_star, abs_tol=1e-14) and is_double_root(params.mu, c_h):
        expected = barrier_expectation(p, N, params.eps, knobs['beta'], knobs['tau'])
        results['expected'] = expected.value
        if expected != BarrierClass.INDETERMINATE:
            passed = report.classification == expected
    return results, passed, {'residual': report.to_frame()}


def _prufer(config: RunConfig) -> Outcome:
    params, knobs = config.params, config.knobs
    case = AsymptoticCase(knobs['case'])
    if case == AsymptoticCase.CRITICAL_EPS:
        sandwich = eps_sandwich_run(params, knobs['delta'], t_end=knobs['t_end'])
        fit = sandwich.fit
        results = {'case': case.value, 'quantity': fit.quantity, 'window': list(fit.window),
                   'fitted_exponent': fit.fitted_exponent,
                   'predicted_exponent': fit.predicted_exponent, 'delta': sandwich.delta,
                   'barrier_log_r': sandwich.t_delta, 'sandwich_holds': sandwich.holds}
        return results, sandwich.holds and sandwich.exponent_within, {
            'trajectory': sandwich.run.to_frame()}

    run_ = integrate_large_subsolution(params, knobs['R'], knobs['t_end'])
    fit = fit_asymptotics(run_, case)
    passed = fit.rel_err <= PRUFER_TOLERANCE[case.value]
    results = {'case': case.value, 'closed_form': run_.closed_form, 'quantity': fit.quantity,
               'window': list(fit.window), 'fitted_exponent': fit.fitted_exponent,
               'predicted_exponent': fit.predicted_exponent, 'rel_err': fit.rel_err}
    if case == AsymptoticCase.SUBCRITICAL and run_.trajectory is not None:
        rho_fit = fit_asymptotics(run_, case, quantity="log_rho")
        results['log_rho_fit'] = {'fitted_exponent': rho_fit.fitted_exponent,
                                  'predicted_exponent': rho_fit.predicted_exponent,
                                  'rel_err': rho_fit.rel_err}
        passed = passed and rho_fit.rel_err <= PRUFER_TOLERANCE[case.value]
    return results, passed, {'trajectory': run_.to_frame()}


def _hardy(config: RunConfig) -> Outcome:
    params, knobs = config.params, config.knobs
    p, N = params.p, params.N
    c_h, c_star, _ = hardy_constants(p, N)
    mode = knobs['mode']

    if mode == 'rayleigh':
        quotient, minimizer = rayleigh_min(p, N, knobs['rho_in'], knobs['R_out'], int(knobs['n_grid']))
        results = {'mode': mode, 'quotient': quotient, 'C_H': c_h}
        if p == 2:
            results['annulus_value'] = c_h + math.pi ** 2 / math.log(knobs['R_out'] / knobs['rho_in']) ** 2
        frame = pd.DataFrame({'r': minimizer.grid, 'v': minimizer.values})
        return results, quotient >= c_h - 1e-9, {'minimizer': frame}

    if mode == 'improved':
        radius = certified_radius(p, N)
        rng = np.random.default_rng(config.seed)
        # doubled constant: mu when C_H > 0, eps in the critical case
        excess = (params.replace(mu=0.0, eps=2 * c_star) if p == N
                  else params.replace(mu=2 * c_h, eps=c_star))
        rows = []
        for draw in range(int(knobs['draws'])):
            v = near_extremal_test_function(rng, p, N, radius.rho)
            margin = improved_hardy_check(p, N, radius.rho, v)
            scale = energy_form(v, params.replace(mu=0.0, eps=0.0)).dirichlet
            control = energy_form(v, excess).total
            rows.append({'draw': draw, 'margin': margin, 'control': control, 'scale': scale})
        frame = pd.DataFrame(rows)
        worst = float((frame['margin'] / frame['scale']).min())
        control_max = float((frame['control'] / frame['scale']).max())
        results = {'mode': mode, 'log_rho': radius.log_rho, 'C_H': c_h, 'C_star': c_star,
                   'draws': len(frame), 'min_relative_margin': worst,
                   'max_relative_control': control_max}
        return results, worst >= -1e-10 and control_max < 0, {'margins': frame}

    if mode == 'sharpness':
        family = knobs['family']
        if family not in FAMILY_CASES:
            raise ConfigError(f"unknown family {family!r}; expected one of {FAMILY_CASES}")
        rho = None
        if family == 'critical':
            rho = max(certified_radius(p, N).rho, math.exp(math.e))
        frame = sharpness_family(p, N, family, knobs['log_R'], excess=knobs['excess'], rho=rho)
        forms = frame['form'].to_numpy()
        if family == 'critical':
            passed = bool(np.all(forms >= -1e-10 * np.maximum(1.0, np.abs(frame['ramp']))))
        else:
            passed = bool(np.all(np.diff(forms) < 0))
        return {'mode': mode, 'family': family, 'forms': forms.tolist()}, passed, {'sharpness': frame}

    certificate = nonexistence_witness(p, N, params.mu, params.eps)
    expected = (params.mu > c_h and not is_double_root(params.mu, c_h)) or (
        is_double_root(params.mu, c_h) and params.eps > c_star and not is_double_root(params.eps, c_star))
    results = {'mode': mode, 'found': certificate is not None, 'expected': expected}
    if certificate is not None:
        results.update({'log_R': certificate.family.log_R, 'scale': certificate.scale,
                        'form': certificate.form})
    return results, (certificate is not None) == expected, {}


def _suite(config: RunConfig) -> Outcome:
    from cli.suite import run_suite

    checks = run_suite(quick=bool(config.knobs['quick']), threads=int(config.knobs['threads']),
                       seed=config.seed)
    frame = pd.DataFrame([{'name': c.name, 'pass': c.passed, 'detail': c.detail} for c in checks])
    results = {'checks': frame.to_dict(orient='records'),
               'n_passed': int(frame['pass'].sum()), 'n_checks': len(frame)}
    return results, bool(frame['pass'].all()), {'suite': frame}


def _figures(config: RunConfig) -> Outcome:
    params, knobs = config.params, config.knobs
    bundle = region_dataset(params.p, params.N, knobs['mu_list'], (knobs['qmin'], knobs['qmax']),
                             knobs['step'])
    results = {'mu_list': list(knobs['mu_list']),
               'rows': {name: len(frame) for name, frame in bundle.items()}}
    return results, None, bundle


HARDY_ANCHORS = {
    'rayleigh': "inf of int |v'|^p r^(N-1) over int |v|^p r^(N-1-p) on r > rho equals C_H",
    'improved': ("int |grad v|^p - C_H |v|^p/|x|^p >= C* int |v|^p/(|x|^p (log |x|)^m*) "
                 "for v supported beyond the certified radius"),
    'sharpness': "raising mu above C_H or eps above C* makes the form negative on cutoff families",
    'witness': "a test function with negative form rules out positive super-solutions",
}

COMMAND_TABLE = {
    'classify': Command('classify', _classify,
                        "mu < C_H: no positive super-solution iff sigma <= Lambda*(q); "
                        "mu = C_H: sigma = Lambda*(q) only for q >= -1; mu > C_H: none for any q"),
    'region': Command('region', _region,
                      "Lambda*(q) = min{gamma_-(q-p+1) + p, gamma_+(q-p+1) + p} with (p-1, p) excluded"),
    'sinp': Command('sinp', _sinp,
                    "S_p solves |S'|^p + |S|^p/(p-1) = 1, S(0) = 0, with "
                    "pi_p = 2 pi (p-1)^(1/p) / (p sin(pi/p))"),
    'barrier': Command('barrier', _barrier,
                       "r^gamma* (log r)^beta (log log r)^tau is a super- or sub-solution "
                       "according to beta, tau and eps"),
    'prufer': Command('prufer', _prufer,
                      "large sub-solutions grow like r^gamma_+ (mu < C_H), "
                      "r^gamma* (log r)^(2/p) (mu = C_H), (log r)^beta_+ (p = N)"),
    'hardy': Command('hardy', _hardy, "Hardy inequalities for the p-Laplacian"),
    'suite': Command('suite', _suite, "every statement above, one check each"),
    'figures': Command('figures', _figures,
                       "nonexistence below Lambda*(q), existence above, per mu"),
}


def run(config: RunConfig) -> RunReport:
    """
    Dispatch a run to the owning module.

    Args:
        config: RunConfig

    Returns:
        RunReport: pass is None for purely informational commands
    """
    command = COMMAND_TABLE[config.command]
    anchor = HARDY_ANCHORS[config.knobs['mode']] if config.command == 'hardy' else command.anchor
    start = time.perf_counter()
    results, passed, frames = command.func(config)
    elapsed = time.perf_counter() - start
    logger.info("%s finished in %.3fs (pass=%s)", config.command, elapsed, passed)
    return RunReport(config, results, anchor, None if passed is None else bool(passed), elapsed,
                     frames)


def write_report(report: RunReport) -> Optional[str]:
    """
    Write the report where its config points.

    json: the report payload. csv (or an output ending in .csv): the tables, one
    file per table when there are several. Without an output path the payload
    goes to stdout.
    """
    config = report.config
    if config.command == 'figures' and config.output:
        for name, frame in report.frames.items():
            write_csv(frame, os.path.join(config.output, f"region_{name}.csv"),
                      schema=f"region_{name}")
        return config.output
    if not config.output:
        print(dumps_report(report.to_dict()))
        return None
    as_csv = config.format == 'csv' or config.output.endswith('.csv')
    if as_csv and report.frames:
        stem, ext = os.path.splitext(config.output)
        ext = ext or '.csv'
        if len(report.frames) == 1:
            (name, frame), = report.frames.items()
            write_csv(frame, stem + ext, schema=name)
        else:
            for name, frame in report.frames.items():
                write_csv(frame, f"{stem}_{name}{ext}", schema=name)
        print(dumps_report(report.to_dict()))
        return config.output
    return write_json(report.to_dict(), config.output)
