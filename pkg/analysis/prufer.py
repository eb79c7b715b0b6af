"""
Generalized Prufer transformation of the radial equation

    -(r^(N-1)|u'|^(p-2)u')' = r^(N-1) V(r) u^(p-1),   V = mu/r^p + eps/(r^p log^m* r).

With r^(N-1) Phi(u') = rho Phi(S_p'(psi)) and u = rho^(1/(p-1)) S_p(psi) Q^(-1/p),
Q = V r^(p(N-1)/(p-1)), the phase decouples. In t = log r and g = r^p V = mu + eps/t^m*:

    psi_t      = g^(1/p) + W(t) S_p Phi(S_p'),   W = (N-p)/(p-1) + g_t/(p g)
    (log rho)_t = W(t) |S_p|^p

and r u'/u = g^(1/p) S_p'/S_p along the trajectory.
"""

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np
import pandas as pd

from analysis.exponents import ProblemParams, is_double_root, beta_roots, gamma_roots, hardy_constants
from analysis.specfun import GenSine, arcsin_p, eval_sp, get_gensine, quarter_pi_p
from config.settings import DEFAULT_T_END, FIT_SAMPLES, SIGN_TOL, THRESHOLD_SCAN
from utils.dual import Dual2, abs_pow, phi_p
from utils.dual import exp as dual_exp
from utils.dual import log as dual_log
from utils.errors import (DeltaOutOfRange, DomainError, NonpositivePotential, NotConverged,
                          WindowTooShort)
from utils.ode import OdeProblem, Trajectory, integrate_ode

logger = logging.getLogger(__name__)


class AsymptoticCase(str, enum.Enum):
    SUBCRITICAL = "i"        # 0 < mu < C_H, eps = 0
    CRITICAL = "ii"          # mu = C_H, eps = 0, p != N
    CRITICAL_P_EQ_N = "iii"  # p = N, mu = 0, 0 < eps < C*
    CRITICAL_EPS = "iv"      # mu = C_H, 0 < eps < C*, p != N


@dataclass(frozen=True)
class PruferFixedPoints:
    psi_minus: float
    psi_plus: float
    psi_star: Optional[float] = None


def _potential(params: ProblemParams, t):
    """g = r^p V(r) as a function of t"""
    _, _, m_star = hardy_constants(params.p, params.N)
    g = params.mu + (params.eps * np.power(t, -float(m_star)) if params.eps else 0.0)
    if np.any(np.asarray(g) <= 0):
        raise NonpositivePotential(
            f"V <= 0 at log r = {t} (mu={params.mu}, eps={params.eps}); the phase needs V > 0"
        )
    return g


def _weight(params: ProblemParams, t, g):
    p, N = params.p, params.N
    w = (N - p) / (p - 1)
    if params.eps:
        _, _, m_star = hardy_constants(p, N)
        w = w - m_star * params.eps * np.power(t, -float(m_star) - 1) / (p * g)
    return w


def prufer_rhs(params: ProblemParams, t: float, psi: float,
               gs: Optional[GenSine] = None) -> Tuple[float, float]:
    """
    Phase and amplitude rates in t = log r.

    Returns:
        tuple: (dpsi/dt, dlog(rho)/dt)
    """
    gs = gs or get_gensine(params.p)
    p = params.p
    g = float(_potential(params, t))
    w = float(_weight(params, t, g))
    s, ds = eval_sp(gs, psi)
    flux = s * phi_p(ds, p)
    return g ** (1.0 / p) + w * flux, w * abs(s) ** p


def _angle_for_exponent(gs: GenSine, p: float, mu: float, gamma: float) -> float:
    """Stationary angle with r u'/u = gamma: S'/S = gamma/mu^(1/p)"""
    s = (abs(gamma) ** p / mu + 1.0 / (p - 1)) ** (-1.0 / p)
    angle = arcsin_p(gs, s)
    return angle if gamma > 0 else gs.pi_p - angle


def _angle_for_log_exponent(gs: GenSine, N: int, beta: float) -> float:
    """p = N stationary angle in log log r: S = ((N-1)(1-beta))^(1/N), S' = beta^(1/N)"""
    return arcsin_p(gs, ((N - 1) * (1.0 - beta)) ** (1.0 / N))


def fixed_points(params: ProblemParams, gs: Optional[GenSine] = None) -> PruferFixedPoints:
    """
    Zeros of the autonomous phase equation.

    For eps = 0, 0 < mu <= C_H the angles belong to r^gamma_- and r^gamma_+; they lie in
    (0, pi_p/2) for p > N and in (pi_p/2, pi_p) for p < N. For p = N, mu = 0 and
    0 < eps <= C* the phase is autonomous in log log r and the angles belong to beta_-+.
    """
    p, N, mu, eps = params.p, params.N, params.mu, params.eps
    gs = gs or get_gensine(p)
    c_h, c_star, _ = hardy_constants(p, N)

    if p == N:
        if mu != 0 or not eps > 0:
            raise DomainError(f"p = N fixed points need mu = 0 and eps > 0, got mu={mu}, eps={eps}")
        b_minus, b_plus = beta_roots(p, N, eps)
        psi_minus = _angle_for_log_exponent(gs, N, b_minus)
        psi_plus = _angle_for_log_exponent(gs, N, b_plus)
        star = psi_plus if is_double_root(eps, c_star) else None
        return PruferFixedPoints(psi_minus, psi_plus, star)

    if eps != 0:
        raise DomainError(f"the phase equation is autonomous only for eps = 0, got eps={eps}")
    if not mu > 0:
        raise NonpositivePotential(f"fixed points need mu > 0, got mu={mu}")
    g_minus, g_plus = gamma_roots(p, N, mu)
    if is_double_root(mu, c_h):
        first, complement = quarter_pi_p(gs)
        star = first if p > N else complement
        return PruferFixedPoints(star, star, star)
    return PruferFixedPoints(_angle_for_exponent(gs, p, mu, g_minus),
                             _angle_for_exponent(gs, p, mu, g_plus))


def _exp(x):
    return dual_exp(x) if isinstance(x, Dual2) else np.exp(x)


def _log(x):
    return dual_log(x) if isinstance(x, Dual2) else np.log(x)


def _closed_form(params: ProblemParams, t0: float) -> Tuple[str, Callable]:
    """Large sub-solution for mu <= 0, eps = 0 as log u(t)"""
    p, N = params.p, params.N
    if p == N and params.mu == 0:
        return "log r - log R", lambda t: _log(t - t0)
    _, g_plus = gamma_roots(p, N, params.mu)
    if g_plus == 0:
        k = (N - p) / (p - 1)
        return f"1 - (R/r)^{k:g}", lambda t: _log(1.0 - _exp(-k * (t - t0)))
    return (f"r^{g_plus:g} - R^{g_plus:g}",
            lambda t: _log(_exp(g_plus * t) - math.exp(g_plus * t0)))


@dataclass
class PruferRun:
    """Accepted steps of a phase integration, or a closed-form large sub-solution"""

    params: ProblemParams
    t0: float
    t_end: float
    t: np.ndarray
    psi: np.ndarray
    log_rho: np.ndarray
    log_u: np.ndarray
    trajectory: Optional[Trajectory] = field(default=None, repr=False)
    closed_form: Optional[str] = None
    _log_u_fn: Optional[Callable] = field(default=None, repr=False)

    @property
    def R(self) -> float:
        return math.exp(self.t0)

    def sample(self, ts) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(psi, log rho, log u) on ts from the dense interpolant"""
        ts = np.asarray(ts, dtype=float)
        if self.trajectory is None:
            nan = np.full_like(ts, np.nan)
            with np.errstate(divide='ignore', invalid='ignore'):
                return nan, nan, self._log_u_fn(ts)
        psi, log_rho = self.trajectory(ts)
        return psi, log_rho, reconstruct_log_u(self.params, ts, psi, log_rho)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({'t': self.t, 'psi': self.psi, 'log_rho': self.log_rho,
                             'log_u': self.log_u})


def reconstruct_log_u(params: ProblemParams, t, psi, log_rho, gs: Optional[GenSine] = None):
    """log u = log rho/(p-1) + log S_p(psi) - log(g)/p + t (p-N)/(p-1)"""
    p, N = params.p, params.N
    gs = gs or get_gensine(p)
    t = np.asarray(t, dtype=float)
    s, _ = eval_sp(gs, np.asarray(psi, dtype=float))
    g = _potential(params, t)
    with np.errstate(divide='ignore', invalid='ignore'):
        return np.asarray(log_rho) / (p - 1) + np.log(s) - np.log(g) / p + t * (p - N) / (p - 1)


def _integrate_phase(params: ProblemParams, t0: float, psi0: float, t_end: float) -> PruferRun:
    gs = get_gensine(params.p)
    _potential(params, np.array([t0, t_end]))

    def rhs(t, y):
        return prufer_rhs(params, t, y[0], gs)

    traj = integrate_ode(OdeProblem(rhs, t0, (psi0, 0.0), t_end))
    psi, log_rho = traj.y
    log_u = reconstruct_log_u(params, traj.t, psi, log_rho, gs)
    logger.debug("phase run p=%g N=%d mu=%g eps=%g: %d steps, psi(end)=%.12g",
                 params.p, params.N, params.mu, params.eps, traj.t.size, psi[-1])
    return PruferRun(params, t0, t_end, traj.t, psi, log_rho, log_u, trajectory=traj)


def integrate_large_subsolution(params: ProblemParams, R: float = 1.0,
                                t_end: float = DEFAULT_T_END) -> PruferRun:
    """
    Large sub-solution with u(R) = 0: psi(log R) = 0, log rho(log R) = 0.

    For mu <= 0 and eps = 0 the potential is not positive and the closed forms
    r^gamma_+ - R^gamma_+, 1 - (R/r)^((N-p)/(p-1)) (mu = 0, p < N) or
    log r - log R (mu = 0, p = N) are returned instead.

    Args:
        params: ProblemParams (p, N, mu, eps)
        R: inner radius
        t_end: final log r

    Returns:
        PruferRun
    """
    if not R > 0:
        raise DomainError(f"R must be positive, got {R}")
    t0 = math.log(R)
    if not t0 < t_end:
        raise DomainError(f"need log R < t_end, got {t0} >= {t_end}")
    if params.mu <= 0 and params.eps == 0:
        label, fn = _closed_form(params, t0)
        ts = np.linspace(t0, t_end, FIT_SAMPLES)
        with np.errstate(divide='ignore', invalid='ignore'):
            log_u = fn(ts)
        nan = np.full_like(ts, np.nan)
        return PruferRun(params, t0, t_end, ts, nan, nan, log_u, closed_form=label, _log_u_fn=fn)
    if params.eps > 0 and not t0 > 1:
        raise DomainError(f"eps > 0 needs R > e, got R={R}")
    return _integrate_phase(params, t0, 0.0, t_end)


@dataclass(frozen=True)
class ReconstructionCheck:
    max_normalized_residual: float
    max_flux_mismatch: float


def reconstruction_residual(run: PruferRun, n_samples: int = 200, h: float = 1e-3) -> ReconstructionCheck:
    """
    Substitute the reconstructed u back into the radial equation.

    The residual is normalized by u^(p-1)/r^p; the flux mismatch compares
    g^(1/p) S'/S with the derivative of the reconstructed log u.
    """
    params = run.params
    p, N = params.p, params.N
    lo, hi = run.t0 + 1.0, run.t_end - 2 * h
    if not lo < hi:
        raise WindowTooShort(f"run on [{run.t0}, {run.t_end}] is too short to sample")
    ts = np.linspace(lo, hi, n_samples)

    if run.trajectory is None:
        worst = 0.0
        for t in ts:
            d = run._log_u_fn(Dual2.variable(t))
            a, a_t = d.d1, d.d2
            n = (-phi_p(a, p) * ((p - 1) * a + N - p)
                 - (p - 1) * abs(a) ** (p - 2) * a_t - params.mu)
            worst = max(worst, abs(n))
        return ReconstructionCheck(worst, 0.0)

    gs = get_gensine(p)

    def log_derivative(t):
        psi, _ = run.trajectory(t)
        s, ds = eval_sp(gs, psi)
        return _potential(params, t) ** (1.0 / p) * ds / s

    a = log_derivative(ts)
    a_t = (log_derivative(ts + h) - log_derivative(ts - h)) / (2 * h)
    g = _potential(params, ts)
    n = (-np.sign(a) * np.abs(a) ** (p - 1) * ((p - 1) * a + N - p)
         - (p - 1) * np.abs(a) ** (p - 2) * a_t - g)
    _, _, log_u_plus = run.sample(ts + h)
    _, _, log_u_minus = run.sample(ts - h)
    mismatch = np.abs((log_u_plus - log_u_minus) / (2 * h) - a)
    return ReconstructionCheck(float(np.max(np.abs(n))), float(np.max(mismatch)))


@dataclass(frozen=True)
class AsymptoticFit:
    quantity: str
    window: Tuple[float, float]
    fitted_exponent: float
    predicted_exponent: float

    @property
    def rel_err(self) -> float:
        return abs(self.fitted_exponent - self.predicted_exponent) / max(1.0, abs(self.predicted_exponent))


def _fit_window(run: PruferRun) -> np.ndarray:
    lo, hi = 0.5 * run.t_end, run.t_end
    if not lo > run.t0:
        raise WindowTooShort(f"fit window [{lo}, {hi}] starts before log R = {run.t0}")
    return np.linspace(lo, hi, FIT_SAMPLES)


def fit_asymptotics(run: PruferRun, case: AsymptoticCase, quantity: str = "log_u") -> AsymptoticFit:
    """
    Least-squares growth exponent of the run on [t_end/2, t_end].

    case i:   d log u/d log r -> gamma_+  (quantity "log_rho": -> gamma_+(p-1) + N - p)
    case ii:  d log(u r^-gamma*)/d log log r -> 2/p
    case iii: d log u/d log log r -> beta_+
    case iv:  d log(u r^-gamma*)/d log log r -> beta_+
    """
    params = run.params
    p, N = params.p, params.N
    case = AsymptoticCase(case)
    ts = _fit_window(run)
    _, log_rho, log_u = run.sample(ts)
    gamma_star = (p - N) / p

    if case == AsymptoticCase.SUBCRITICAL:
        _, g_plus = gamma_roots(p, N, params.mu)
        if quantity == "log_rho":
            fitted = np.polyfit(ts, log_rho, 1)[0]
            predicted = g_plus * (p - 1) + N - p
            label = "dlog rho/dlog r"
        else:
            fitted = np.polyfit(ts, log_u, 1)[0]
            predicted = g_plus
            label = "dlog u/dlog r"
    elif case == AsymptoticCase.CRITICAL:
        fitted = np.polyfit(np.log(ts), log_u - gamma_star * ts, 1)[0]
        predicted = 2.0 / p
        label = "dlog(u r^-gamma*)/dlog log r"
    else:
        _, b_plus = beta_roots(p, N, params.eps)
        shift = 0.0 if case == AsymptoticCase.CRITICAL_P_EQ_N else gamma_star
        fitted = np.polyfit(np.log(ts), log_u - shift * ts, 1)[0]
        predicted = b_plus
        label = "dlog(u r^-gamma*)/dlog log r"
    fit = AsymptoticFit(label, (float(ts[0]), float(ts[-1])), float(fitted), float(predicted))
    logger.debug("asymptotic fit case %s: %s", case.value, fit)
    return fit


def limit_angle(params: ProblemParams) -> float:
    """Limit of psi for the large sub-solution"""
    p, N = params.p, params.N
    if params.eps > 0 and p != N:
        first, complement = quarter_pi_p(get_gensine(p))
        return first if p > N else complement
    return fixed_points(params).psi_plus


@dataclass(frozen=True)
class RateFit:
    law: str
    fitted: float
    predicted: float
    n_samples: int

    @property
    def rel_err(self) -> float:
        return abs(self.fitted - self.predicted) / max(1e-300, abs(self.predicted))


def perturbation_rate(run: PruferRun, omega_max: float = 0.1, omega_min: float = 1e-8,
                      n_samples: int = 4000) -> RateFit:
    """
    Decay law of omega = psi - psi_limit.

    power (0 < mu < C_H):       log|omega| against log r, rate -(gamma_+ p + N - p)
    log_power (p = N, eps > 0):  log|omega| against log log r, rate N(1 - beta_+) - 1
    inverse_log (mu = C_H):      omega log r -> -(2/p)(p-1)/|p-N|
    """
    params = run.params
    p, N = params.p, params.N
    if run.trajectory is None:
        raise NotConverged("closed-form runs carry no phase")
    c_h, _, _ = hardy_constants(p, N)
    if params.eps > 0 and p != N:
        raise DomainError("the eps > 0, p != N phase is bracketed by eps_sandwich_run, not fitted")
    limit = limit_angle(params)
    ts = np.geomspace(run.t0 + 1.0, run.t_end, n_samples) if run.t0 + 1.0 > 0 else \
        np.linspace(run.t0 + 1.0, run.t_end, n_samples)
    psi, _ = run.trajectory(ts)
    omega = psi - limit

    if p != N and params.eps == 0 and is_double_root(params.mu, c_h):
        tail = ts >= 0.5 * run.t_end
        if tail.sum() < 10:
            raise NotConverged("too few samples in the second half of the run")
        return RateFit("inverse_log", float(np.mean(omega[tail] * ts[tail])),
                       -(2.0 / p) * (p - 1) / abs(p - N), int(tail.sum()))

    keep = (np.abs(omega) < omega_max) & (np.abs(omega) > omega_min)
    if keep.sum() < 10:
        raise NotConverged(f"only {int(keep.sum())} samples with {omega_min} < |omega| < {omega_max}")
    if p == N:
        _, b_plus = beta_roots(p, N, params.eps)
        fitted = np.polyfit(np.log(ts[keep]), np.log(np.abs(omega[keep])), 1)[0]
        return RateFit("log_power", float(fitted), N * (1 - b_plus) - 1, int(keep.sum()))
    _, g_plus = gamma_roots(p, N, params.mu)
    fitted = np.polyfit(ts[keep], np.log(np.abs(omega[keep])), 1)[0]
    return RateFit("power", float(fitted), -(g_plus * p + N - p), int(keep.sum()))


def _comparison_sine(params: ProblemParams, beta: float, t):
    """S_p and S_p' of the comparison angle of r^gamma* (log r)^beta, numpy version"""
    p, N = params.p, params.N
    c_h, _, _ = hardy_constants(p, N)
    t = np.asarray(t, dtype=float)
    u = (c_h + params.eps / t ** 2) ** (1.0 / p)
    a = (p - N) / p + beta / t
    denom = (np.abs(a) ** p + u ** p / (p - 1)) ** (1.0 / p)
    return u / denom, a / denom


def comparison_angle(params: ProblemParams, beta: float, t, gs: Optional[GenSine] = None):
    """Phase of r^gamma* (log r)^beta: S_p'/S_p = (gamma* + beta/t)/g^(1/p)"""
    gs = gs or get_gensine(params.p)
    s, ds = _comparison_sine(params, beta, t)
    angle = arcsin_p(gs, s)
    return np.where(ds > 0, angle, gs.pi_p - angle) if np.ndim(angle) else \
        (angle if ds > 0 else gs.pi_p - angle)


def comparison_residual(params: ProblemParams, beta: float, t: float) -> Tuple[float, float]:
    """
    psi_beta' minus the phase rate at psi_beta, and the size of the rate terms.

    Nonnegative residual makes psi_beta an upper barrier for the phase.
    """
    p, N = params.p, params.N
    c_h, _, _ = hardy_constants(p, N)
    tt = Dual2.variable(t)
    u = (c_h + params.eps * tt ** -2) ** (1.0 / p)
    a = (p - N) / p + beta / tt
    denom = (abs_pow(a, p) + u ** p / (p - 1)) ** (1.0 / p)
    s = u / denom
    ds = a.value / denom.value
    psi_t = s.d1 / ds
    g = u.value ** p
    w = float(_weight(params, t, g))
    drift = w * s.value * phi_p(ds, p)
    rate = u.value + drift
    return psi_t - rate, abs(u.value) + abs(drift)


@dataclass
class SandwichReport:
    fit: AsymptoticFit
    run: PruferRun
    t_delta: float
    lower: np.ndarray
    upper: np.ndarray
    holds: bool
    delta: float

    @property
    def exponent_within(self) -> bool:
        return (self.fit.predicted_exponent - self.delta - 1e-9 <= self.fit.fitted_exponent
                <= self.fit.predicted_exponent + self.delta + 1e-9)


def _scan_barrier_radius(params: ProblemParams, b: float, B: float, t_end: float,
                         n_samples: int = 400) -> float:
    k_lo, k_hi = THRESHOLD_SCAN
    for k in range(k_lo, k_hi + 1):
        t_k = 2.0 ** k
        if not t_k < t_end:
            break
        ok = True
        for t in np.geomspace(t_k, t_end, n_samples):
            upper, scale_b = comparison_residual(params, b, t)
            lower, scale_B = comparison_residual(params, B, t)
            if upper < -SIGN_TOL * scale_b or lower > SIGN_TOL * scale_B:
                ok = False
                break
        if ok:
            return t_k
    raise NotConverged(f"comparison angles for beta in ({b}, {B}) never order before log r = {t_end}")


def eps_sandwich_run(params: ProblemParams, delta: float, t_end: float = 1e3,
                     tol: float = 1e-9) -> SandwichReport:
    """
    Phase trapped between the angles of r^gamma* (log r)^(beta_+ +- delta).

    Args:
        params: mu = C_H, 0 < eps < C*, p != N
        delta: 0 < delta < min(beta_+ - 1/p, 2/p - beta_+)
        t_end: final log r
        tol: slack allowed in the pointwise ordering

    Returns:
        SandwichReport
    """
    p, N = params.p, params.N
    c_h, c_star, _ = hardy_constants(p, N)
    if p == N or not is_double_root(params.mu, c_h) or not 0 < params.eps < c_star:
        raise DomainError(f"sandwich runs need mu = C_H, 0 < eps < C*, p != N; got {params}")
    _, b_plus = beta_roots(p, N, params.eps)
    bound = min(b_plus - 1.0 / p, 2.0 / p - b_plus)
    if not 0 < delta < bound:
        raise DeltaOutOfRange(f"delta={delta} outside (0, {bound})")
    b, B = b_plus - delta, b_plus + delta

    t_delta = _scan_barrier_radius(params, b, B, t_end)
    gs = get_gensine(p)
    psi0 = 0.5 * (comparison_angle(params, b, t_delta, gs) + comparison_angle(params, B, t_delta, gs))
    run = _integrate_phase(params, t_delta, float(psi0), t_end)
    upper = comparison_angle(params, b, run.t, gs)
    lower = comparison_angle(params, B, run.t, gs)
    holds = bool(np.all(lower - tol <= run.psi) and np.all(run.psi <= upper + tol))
    fit = fit_asymptotics(run, AsymptoticCase.CRITICAL_EPS)
    logger.debug("sandwich p=%g N=%d eps=%g delta=%g from log r=%g: holds=%s", p, N,
                 params.eps, delta, t_delta, holds)
    return SandwichReport(fit, run, t_delta, lower, upper, holds, delta)
