"""
Verification battery behind `suite`.

Each check returns (pass, detail). Checks run in a thread pool capped by
HARDY_PLAPLACE_THREADS; results come back ordered by name.
"""

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, Tuple

import numpy as np

from analysis.barriers import (RadialProfile, classify_barrier, cutoff_remainder_decay,
                               leading_log_coefficient, normalized_residual, barrier_cells)
from analysis.exponents import (ProblemParams, Verdict, beta_roots, classify, gamma_roots,
                                hardy_constants, homogeneous_symbol, critical_exponent)
from analysis.hardy import (certified_radius, energy_form, improved_hardy_check,
                            near_extremal_test_function, nonexistence_witness, picone_check,
                            random_test_function, rayleigh_min, sharpness_family)
from analysis.prufer import (AsymptoticCase, eps_sandwich_run, fit_asymptotics,
                             integrate_large_subsolution, perturbation_rate,
                             reconstruction_residual)
from analysis.specfun import eval_sp, get_gensine, pi_p, pi_p_quadrature
from config.settings import LONG_T_END, RANDOM_DRAWS, THREADS

logger = logging.getLogger(__name__)

CheckResult = Tuple[bool, str]


@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: bool
    detail: str
    wall_time: float


def check_sinp(quick: bool, seed: int) -> CheckResult:
    ps = (1.5, 2.0, 3.0) if quick else (1.3, 1.5, 2.0, 3.0, 5.0, 10.0)
    identity, period_gap = 0.0, 0.0
    for p in ps:
        gs = get_gensine(p)
        s, ds = eval_sp(gs, np.linspace(0.0, 2 * gs.pi_p, 10_000))
        identity = max(identity, float(np.max(np.abs(np.abs(ds) ** p + np.abs(s) ** p / (p - 1) - 1))))
        period_gap = max(period_gap, abs(pi_p(p) - pi_p_quadrature(p)))
    psi = np.linspace(-10.0, 10.0, 10_000)
    sine_gap = float(np.max(np.abs(eval_sp(get_gensine(2.0), psi)[0] - np.sin(psi))))
    pi_gap = abs(pi_p(2.0) - math.pi)
    passed = identity <= 1e-8 and sine_gap <= 1e-9 and pi_gap <= 1e-12 and period_gap <= 1e-9
    return passed, (f"first integral {identity:.1e}, |S_2 - sin| {sine_gap:.1e}, "
                    f"|pi_2 - pi| {pi_gap:.1e}, pi_p quadrature gap {period_gap:.1e}")


def check_exponents(quick: bool, seed: int) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst_residual, worst_formula = 0.0, 0.0
    for _ in range(20 if quick else 100):
        N = int(rng.integers(3, 8))
        c_h = ((N - 2) / 2) ** 2
        mu = float(rng.uniform(-2.0, c_h - 0.01))
        g_minus, g_plus = gamma_roots(2.0, N, mu)
        disc = math.sqrt((N - 2) ** 2 - 4 * mu)
        worst_formula = max(worst_formula, abs(g_minus - (-(N - 2) - disc) / 2),
                            abs(g_plus - (-(N - 2) + disc) / 2))
        worst_residual = max(worst_residual, *(abs(homogeneous_symbol(g, 2.0, N) - mu)
                                               for g in (g_minus, g_plus)))
    double_ok = True
    for p, N in ((1.5, 3), (2.0, 3), (3.0, 2), (4.0, 2)):
        c_h, c_star, _ = hardy_constants(p, N)
        g_minus, g_plus = gamma_roots(p, N, c_h)
        b_minus, b_plus = beta_roots(p, N, c_star)
        double_ok &= g_minus == g_plus == (p - N) / p and b_minus == b_plus == 1.0 / p
    passed = worst_residual <= 1e-12 and worst_formula <= 1e-12 and double_ok
    return passed, (f"root residual {worst_residual:.1e}, quadratic formula gap {worst_formula:.1e}, "
                    f"double roots {'ok' if double_ok else 'wrong'}")


def check_classifier(quick: bool, seed: int) -> CheckResult:
    failures = []
    for p in (1.5, 2.0, 3.0):
        for N in (2, 3, 5):
            q_star = critical_exponent(p, N)
            if q_star is None:
                for q in (-2.0, 0.0, 1.5, 5.0):
                    if classify(ProblemParams(p, N, q=q)) != Verdict.NONEXISTENCE:
                        failures.append(f"p=N={N} q={q}")
                continue
            below = classify(ProblemParams(p, N, q=q_star - 1e-6))
            above = classify(ProblemParams(p, N, q=q_star + 1e-6))
            expected = ((Verdict.NONEXISTENCE, Verdict.EXISTENCE) if p < N
                        else (Verdict.EXISTENCE, Verdict.NONEXISTENCE))
            if (below, above) != expected:
                failures.append(f"p={p} N={N}: {below.value}/{above.value} around q*={q_star:.6g}")
    return not failures, "; ".join(failures) or "verdict flips at q* in every case"


def check_barrier_table(quick: bool, seed: int) -> CheckResult:
    mismatches, cells, worst_exact = [], 0, 0.0
    for p in (1.5, 2.0, 3.0):
        for N in (2, 3, 5):
            c_h, c_star, _ = hardy_constants(p, N)
            gamma_star = (p - N) / p
            for eps in (0.0, 0.5 * c_star, c_star):
                params = ProblemParams(p, N, mu=c_h, eps=eps)
                for beta, tau, expected in barrier_cells(p, N, eps):
                    cells += 1
                    report = classify_barrier(RadialProfile(gamma_star, beta, tau), params)
                    if report.classification != expected:
                        mismatches.append(f"p={p} N={N} eps={eps:.4g} beta={beta:.4g} tau={tau:.4g}")
            mu = 0.5 * c_h if c_h > 0 else -0.5
            for gamma in gamma_roots(p, N, mu):
                for t in (1.0, 10.0, 100.0):
                    n, _ = normalized_residual(RadialProfile(gamma), ProblemParams(p, N, mu=mu), t)
                    worst_exact = max(worst_exact, abs(n))
    passed = not mismatches and worst_exact <= 1e-8
    detail = f"{cells - len(mismatches)}/{cells} cells, exact solutions {worst_exact:.1e}"
    if mismatches:
        detail += "; " + "; ".join(mismatches[:5])
    return passed, detail


def check_expansion(quick: bool, seed: int) -> CheckResult:
    worst = 0.0
    for p, N, beta in ((2.0, 3, 0.3), (3.0, 2, 0.3), (1.5, 3, 0.5), (4.0, 2, 0.25)):
        gamma_star = (p - N) / p
        predicted = beta * (p - 1) * (2 - beta * p) / 2 * abs(gamma_star) ** (p - 2)
        estimate = leading_log_coefficient(RadialProfile(gamma_star, beta), ProblemParams(p, N))
        worst = max(worst, abs(estimate - predicted) / abs(predicted))
    return worst <= 0.01, f"worst relative gap {worst:.2e}"


def check_prufer_subcritical(quick: bool, seed: int) -> CheckResult:
    details, passed = [], True
    for p, N, mu in ((3.0, 2, 0.02), (2.0, 3, 0.1)):
        run = integrate_large_subsolution(ProblemParams(p, N, mu=mu), 1.0, 25.0)
        for quantity in ("log_u", "log_rho"):
            fit = fit_asymptotics(run, AsymptoticCase.SUBCRITICAL, quantity)
            passed &= fit.rel_err <= 0.02
            details.append(f"p={p} N={N} {quantity}: {fit.fitted_exponent:.4f} vs {fit.predicted_exponent:.4f}")
    return passed, "; ".join(details)


def check_prufer_critical(quick: bool, seed: int) -> CheckResult:
    t_end = 1e3 if quick else LONG_T_END
    run = integrate_large_subsolution(ProblemParams(2.0, 3, mu=0.25), 1.0, t_end)
    fit = fit_asymptotics(run, AsymptoticCase.CRITICAL)
    rate = perturbation_rate(run)
    passed = fit.rel_err <= 0.10 and rate.rel_err <= 0.10
    return passed, (f"log exponent {fit.fitted_exponent:.4f} vs {fit.predicted_exponent:.4f}, "
                    f"omega log r {rate.fitted:.4f} vs {rate.predicted:.4f}")


def check_prufer_logarithmic(quick: bool, seed: int) -> CheckResult:
    _, c_star, _ = hardy_constants(2.0, 2)
    run = integrate_large_subsolution(ProblemParams(2.0, 2, eps=0.5 * c_star), math.exp(2.0), 1e3)
    fit = fit_asymptotics(run, AsymptoticCase.CRITICAL_P_EQ_N)
    c_h3, c_star3, _ = hardy_constants(3.0, 2)
    sandwich = eps_sandwich_run(ProblemParams(3.0, 2, mu=c_h3, eps=0.5 * c_star3), 0.05)
    passed = fit.rel_err <= 0.05 and sandwich.holds
    return passed, (f"p=N=2 exponent {fit.fitted_exponent:.4f} vs {fit.predicted_exponent:.4f}; "
                    f"p=3 N=2 sandwich {'holds' if sandwich.holds else 'broken'} "
                    f"from log r={sandwich.t_delta:g}")


def check_closed_forms(quick: bool, seed: int) -> CheckResult:
    worst = 0.0
    for p, N in ((2.0, 3), (2.0, 2), (3.0, 3)):
        run = integrate_large_subsolution(ProblemParams(p, N), 1.0, 25.0)
        worst = max(worst, reconstruction_residual(run).max_normalized_residual)
    r = np.exp(np.linspace(0.5, 20.0, 50))
    run = integrate_large_subsolution(ProblemParams(2.0, 3), 1.0, 25.0)
    formula_gap = float(np.max(np.abs(np.expm1(run.sample(np.log(r))[2]) - np.expm1(np.log1p(-1.0 / r)))
                               / (1.0 - 1.0 / r)))
    return worst <= 1e-6 and formula_gap <= 1e-6, (f"residual {worst:.1e}, "
                                                    f"gap to 1 - R/r {formula_gap:.1e}")


def check_hardy(quick: bool, seed: int) -> CheckResult:
    details, passed = [], True
    quotient, _ = rayleigh_min(2.0, 3, 1.0, 1e7, 512)
    near, _ = rayleigh_min(2.0, 3, 1.0, 1e2, 128)
    far, _ = rayleigh_min(2.0, 3, 1.0, 1e4, 128)
    passed &= 0.25 <= quotient <= 0.30 and near >= far
    details.append(f"rayleigh {quotient:.4f}, monotone {near:.4f} >= {far:.4f}")

    rng = np.random.default_rng(seed)
    rho = certified_radius(2.0, 3).rho
    c_h, c_star, _ = hardy_constants(2.0, 3)
    excess = ProblemParams(2.0, 3, mu=2 * c_h, eps=c_star)
    worst, control = math.inf, -math.inf
    for _ in range(20 if quick else RANDOM_DRAWS):
        v = near_extremal_test_function(rng, 2.0, 3, rho)
        scale = energy_form(v, ProblemParams(2.0, 3)).dirichlet
        worst = min(worst, improved_hardy_check(2.0, 3, rho, v) / scale)
        control = max(control, energy_form(v, excess).total / scale)
    passed &= worst >= -1e-10 and control < 0
    details.append(f"improved margin {worst:.2e}, at 2 C_H {control:.2e}")

    log_R = [k * math.log(10.0) for k in (3, 6, 12)]
    for case in ("eps_above_Cstar", "mu_above_CH"):
        forms = sharpness_family(2.0, 3, case, log_R)['form'].to_numpy()
        passed &= bool(np.all(np.diff(forms) < 0))
        details.append(f"{case} {forms[0]:.3g} -> {forms[-1]:.3g}")

    c_h, c_star, _ = hardy_constants(2.0, 3)
    mu_witness = nonexistence_witness(2.0, 3, c_h + 0.05)
    eps_witness = nonexistence_witness(2.0, 3, c_h, c_star + 0.05)
    none_witness = nonexistence_witness(2.0, 3, c_h - 0.05)
    passed &= mu_witness is not None and eps_witness is not None and none_witness is None
    details.append(f"witnesses {mu_witness is not None}/{eps_witness is not None}/{none_witness is None}")
    return passed, "; ".join(details)


def check_picone(quick: bool, seed: int) -> CheckResult:
    rng = np.random.default_rng(seed + 1)
    gap, lowest = 0.0, math.inf
    for _ in range(20 if quick else RANDOM_DRAWS):
        p = float(rng.uniform(1.2, 4.0))
        gamma = float(rng.uniform(-2.0, 2.0))
        phi = RadialProfile(gamma, float(rng.uniform(0.0, 1.0)))
        report = picone_check(random_test_function(rng, math.e), phi, p, n_samples=8)
        gap = max(gap, report.max_identity_gap)
        lowest = min(lowest, report.min_L)
    return gap <= 1e-9 and lowest >= -1e-12, f"|L - R| {gap:.1e}, min L {lowest:.1e}"


def check_cutoff_remainder(quick: bool, seed: int) -> CheckResult:
    g_minus, _ = gamma_roots(2.0, 3, 0.1)
    cases = ((RadialProfile(g_minus), ProblemParams(2.0, 3)),
             (RadialProfile(-0.5, 0.5, -0.25), ProblemParams(2.0, 3)),
             (RadialProfile(0.0, 0.5, -0.25), ProblemParams(2.0, 2)))
    details, passed = [], True
    for profile, params in cases:
        fit = cutoff_remainder_decay(profile, params)
        integrals = fit.table['integral'].to_numpy()
        passed &= bool(np.all(integrals > 0) and np.all(np.diff(integrals) < 0))
        details.append(f"case {fit.case}: slope {fit.fitted_exponent:.3f} vs {fit.predicted_exponent:.3f}")
    return passed, "; ".join(details)


CHECKS: List[Tuple[str, Callable[[bool, int], CheckResult]]] = [
    ("01_sinp", check_sinp),
    ("02_exponents", check_exponents),
    ("03_classifier", check_classifier),
    ("04_barrier_table", check_barrier_table),
    ("05_expansion", check_expansion),
    ("06_prufer_subcritical", check_prufer_subcritical),
    ("07_prufer_critical", check_prufer_critical),
    ("08_prufer_logarithmic", check_prufer_logarithmic),
    ("09_hardy", check_hardy),
    ("10_picone", check_picone),
    ("11_cutoff_remainder", check_cutoff_remainder),
    ("12_closed_forms", check_closed_forms),
]


def _timed(name: str, check: Callable[[bool, int], CheckResult], quick: bool, seed: int) -> SuiteResult:
    start = time.perf_counter()
    try:
        passed, detail = check(quick, seed)
    except Exception as e:
        logger.exception("check %s raised", name)
        passed, detail = False, f"{type(e).__name__}: {e}"
    return SuiteResult(name, bool(passed), detail, time.perf_counter() - start)


def run_suite(quick: bool = False, threads: int = THREADS, seed: int = 0) -> List[SuiteResult]:
    """
    Run every check, in parallel up to `threads` workers.

    Returns:
        list: SuiteResult ordered by check name
    """
    workers = max(1, min(threads, len(CHECKS)))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_timed, name, check, quick, seed) for name, check in CHECKS]
        results = [f.result() for f in futures]
    return sorted(results, key=lambda r: r.name)
