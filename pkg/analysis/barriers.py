"""
Explicit radial barriers u = r^gamma (log r)^beta (log log r)^tau.

Everything is evaluated in t = log r. With a = d(log u)/dt the operator reduces to

    r^p/u^(p-1) * (-Delta_p u) = -Phi(a)((p-1)a + N - p) - (p-1)|a|^(p-2) a_t,

so a and a_t are the first and second derivatives of log u in t, obtained with
Dual2. The normalized residual subtracts mu and eps/t^m*.
"""

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from analysis.exponents import (ProblemParams, Verdict, beta_roots, classify, critical_line,
                                gamma_roots, hardy_constants)
from config.settings import BARRIER_SAMPLES, SIGN_TOL, THRESHOLD_SCAN
from utils.dual import Dual2, log, phi_p
from utils.errors import ConvergenceFailure, DomainError, NotInExistenceRegion
from utils.quadrature import quad_adaptive

logger = logging.getLogger(__name__)


class BarrierClass(str, enum.Enum):
    SUB = "SubSolution"
    SUPER = "SuperSolution"
    INDETERMINATE = "Indeterminate"


@dataclass(frozen=True)
class RadialProfile:
    """scale * r^gamma (log r)^beta (log log r)^tau"""

    gamma: float
    beta: float = 0.0
    tau: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        if not self.scale > 0:
            raise DomainError(f"profile scale must be positive, got {self.scale}")

    @property
    def min_log_r(self) -> float:
        """Lower end of the domain in t = log r (exclusive)"""
        if self.tau != 0:
            return math.e
        if self.beta != 0:
            return 0.0
        return -math.inf

    def check_domain(self, t: float):
        if not t > self.min_log_r:
            raise DomainError(f"log r = {t} outside profile domain (log r > {self.min_log_r})")

    def log_u(self, t):
        """log u as a function of t; accepts floats, arrays or Dual2"""
        if isinstance(t, Dual2):
            out = math.log(self.scale) + self.gamma * t
            if self.beta != 0:
                out = out + self.beta * log(t)
            if self.tau != 0:
                out = out + self.tau * log(log(t))
            return out
        t = np.asarray(t, dtype=float)
        out = math.log(self.scale) + self.gamma * t
        if self.beta != 0:
            out = out + self.beta * np.log(t)
        if self.tau != 0:
            out = out + self.tau * np.log(np.log(t))
        return out

    def log_derivatives(self, t: float) -> Tuple[float, float, float]:
        """(log u, a, a_t) at t"""
        d = self.log_u(Dual2.variable(t))
        return d.value, d.d1, d.d2


def _operator_terms(a: float, a_t: float, p: float, N: int) -> Tuple[float, float]:
    if a == 0:
        raise DomainError("u' vanishes: the residual needs u_r of one sign")
    phi_a = phi_p(a, p)
    return -phi_a * ((p - 1) * a + N - p), -(p - 1) * abs(a) ** (p - 2) * a_t


def normalized_residual(profile: RadialProfile, params: ProblemParams, t: float):
    """
    Residual multiplied by r^p/u^(p-1), and the magnitude of its largest term.

    Returns:
        tuple: (normalized residual, scale of terms)
    """
    profile.check_domain(t)
    _, _, m_star = hardy_constants(params.p, params.N)
    _, a, a_t = profile.log_derivatives(t)
    first, second = _operator_terms(a, a_t, params.p, params.N)
    log_term = params.eps / t ** m_star if params.eps else 0.0
    terms = (first, second, params.mu, log_term)
    return first + second - params.mu - log_term, max(abs(x) for x in terms)


def radial_p_laplace_residual(profile: RadialProfile, params: ProblemParams, r: float) -> float:
    """
    Left-hand side of the radial equation for u = profile at radius r:

        -r^(1-N)(r^(N-1)|u'|^(p-2)u')' - mu/r^p u^(p-1) - eps/(r^p log^m* r) u^(p-1)
    """
    if not r > 0:
        raise DomainError(f"radius must be positive, got {r}")
    t = math.log(r)
    n, _ = normalized_residual(profile, params, t)
    return n * math.exp((params.p - 1) * float(profile.log_u(t)) - params.p * t)


def nonlinear_residual(profile: RadialProfile, params: ProblemParams, t: float):
    """
    Normalized residual of -Delta_p u - mu/r^p u^(p-1) - C/r^sigma u^q (eps ignored).

    Returns:
        tuple: (normalized residual, scale of terms)
    """
    n, scale = normalized_residual(profile, params.replace(eps=0.0), t)
    p = params.p
    exponent = (params.q - p + 1) * float(profile.log_u(t)) + (p - params.sigma) * t
    with np.errstate(over='ignore'):
        forcing = params.C * float(np.exp(exponent))
    return n - forcing, max(scale, forcing)


@dataclass
class ResidualReport:
    log_r: np.ndarray
    residual: np.ndarray
    normalized: np.ndarray
    classification: BarrierClass
    threshold_log_r: float
    tolerance: np.ndarray = field(repr=False, default=None)

    @property
    def r_samples(self) -> np.ndarray:
        with np.errstate(over='ignore'):
            return np.exp(self.log_r)

    @property
    def threshold_radius(self) -> float:
        with np.errstate(over='ignore'):
            return float(np.exp(self.threshold_log_r))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({'log_r': self.log_r, 'r': self.r_samples,
                             'residual': self.residual, 'normalized': self.normalized})


def sample_grid(log_r_min: float, log_r_max: float, n_samples: int) -> np.ndarray:
    """Samples in t = log r, geometric when the range is positive"""
    if not log_r_min < log_r_max:
        raise DomainError(f"need log_r_min < log_r_max, got {log_r_min}, {log_r_max}")
    if log_r_min > 0:
        return np.geomspace(log_r_min, log_r_max, n_samples)
    return np.linspace(log_r_min, log_r_max, n_samples)


def _threshold_candidates(log_r_min: float, log_r_max: float) -> List[float]:
    k_lo, k_hi = THRESHOLD_SCAN
    scanned = [2.0 ** k for k in range(k_lo, k_hi + 1)]
    return [log_r_min] + [t for t in scanned if log_r_min < t < log_r_max]


def _classify_samples(ts, values, tols, log_r_min, log_r_max, min_tail=8):
    for threshold in _threshold_candidates(log_r_min, log_r_max):
        tail = ts >= threshold
        if tail.sum() < min_tail:
            break
        v, tol = values[tail], tols[tail]
        if np.all(np.abs(v) <= tol):
            return BarrierClass.INDETERMINATE, threshold
        if np.all(v >= -tol):
            return BarrierClass.SUPER, threshold
        if np.all(v <= tol):
            return BarrierClass.SUB, threshold
    return BarrierClass.INDETERMINATE, log_r_max


def classify_barrier(profile: RadialProfile, params: ProblemParams, log_r_min: float = 4.0,
                     log_r_max: float = 4096.0, n_samples: int = BARRIER_SAMPLES) -> ResidualReport:
    """
    Sign of the residual beyond a scanned threshold radius.

    The threshold is the first t in {log_r_min} + {2^k} beyond which the
    normalized residual keeps one sign (up to SIGN_TOL times the size of its
    terms). A residual that stays within tolerance is Indeterminate.

    Args:
        profile: RadialProfile
        params: ProblemParams (p, N, mu, eps)
        log_r_min, log_r_max: sample range in t = log r
        n_samples: number of samples

    Returns:
        ResidualReport
    """
    ts = sample_grid(max(log_r_min, np.nextafter(profile.min_log_r, np.inf)), log_r_max,
                     n_samples)
    values, tols, raw = [], [], []
    for t in ts:
        n, scale = normalized_residual(profile, params, t)
        values.append(n)
        tols.append(SIGN_TOL * scale)
        raw.append(n * math.exp(min(700.0, (params.p - 1) * float(profile.log_u(t))
                                    - params.p * t)))
    values, tols = np.array(values), np.array(tols)
    verdict, threshold = _classify_samples(ts, values, tols, ts[0], log_r_max)
    logger.debug("barrier %s: %s beyond log r = %g", profile, verdict.value, threshold)
    return ResidualReport(ts, np.array(raw), values, verdict, threshold, tols)


def _leading_sign(*coefficients: float) -> BarrierClass:
    for c in coefficients:
        if abs(c) > 1e-12:
            return BarrierClass.SUPER if c > 0 else BarrierClass.SUB
    return BarrierClass.INDETERMINATE


def barrier_expectation(p: float, N: int, eps: float, beta: float, tau: float) -> BarrierClass:
    """
    Expected class of r^gamma* (log r)^beta (log log r)^tau at mu = C_H for large r.

    The sign is that of the first nonvanishing coefficient of the expansion in
    1/log^2 r, 1/(log^2 r log log r), 1/(log^2 r (log log r)^2), 1/log^3 r.
    Exact solutions (all coefficients zero) are Indeterminate.
    """
    if p == N:
        if tau != 0:
            return BarrierClass.INDETERMINATE
        return _leading_sign((N - 1) * beta ** (N - 1) * (1 - beta) - eps)
    leading = beta * (p - 1) * (2 - beta * p) / 2 * abs((p - N) / p) ** (p - 2)
    third = p * (p - 1) * (p - 2) / (3 * (N - p)) * beta ** 2 * (beta * p - 3)
    return _leading_sign(leading - eps, tau * (1 - beta * p), tau * (2 - tau * p),
                         third if tau == 0 else 0.0)


def barrier_cells(p: float, N: int, eps: float) -> List[Tuple[float, float, BarrierClass]]:
    """
    Representative (beta, tau, expected class) cells of the mu = C_H barrier table.

    Closed-interval endpoints that make the profile an exact solution are left out.
    """
    sub, sup = BarrierClass.SUB, BarrierClass.SUPER
    _, c_star, _ = hardy_constants(p, N)
    if p == N:
        b_lo, b_hi = beta_roots(p, N, eps)
        if b_lo == b_hi:
            return [(b_lo - 0.3, 0.0, sub), (b_hi + 0.3, 0.0, sub)]
        return [(b_lo - 0.3, 0.0, sub), (0.5 * (b_lo + b_hi), 0.0, sup), (b_hi + 0.3, 0.0, sub)]
    if eps == 0:
        return [(-0.5 / p, 0.0, sub), (1.0 / p, 0.0, sup), (2.5 / p, 0.0, sub),
                (2.0 / p, 0.5, sub)]
    if math.isclose(eps, c_star, rel_tol=1e-12):
        return [(1.0 / p - 0.1, 0.0, sub), (1.0 / p + 0.1, 0.0, sub), (1.0 / p, -0.5, sub),
                (1.0 / p, 1.0 / p, sup), (1.0 / p, 2.0 / p + 0.5, sub)]
    b_lo, b_hi = beta_roots(p, N, eps)
    cells = [(b_lo - 0.05, 0.0, sub), (0.5 * (b_lo + b_hi), 0.0, sup), (b_hi + 0.05, 0.0, sub),
             (b_lo, -0.5, sub), (b_lo, 0.5, sup), (b_hi, -0.5, sup), (b_hi, 0.5, sub)]
    if p != 2:
        # u_{beta+-,0}: decided by the third-order term
        endpoint = sup if (p < 2 or p > N) else sub
        cells += [(b_lo, 0.0, endpoint), (b_hi, 0.0, endpoint)]
    return cells


def expansion_terms(profile: RadialProfile, p: float, N: int, t: float) -> float:
    """Truncated asymptotic expansion of r^p/u^(p-1) (-Delta_p u) for u = r^gamma* (log r)^beta (log log r)^tau"""
    gamma_star = (p - N) / p
    beta, tau = profile.beta, profile.tau
    bracket = gamma_star ** 2 + beta * (p - 1) * (2 - beta * p) / (2 * t ** 2)
    if tau != 0:
        lam = math.log(t)
        bracket += tau * (p - 1) * (1 - beta * p) / (t ** 2 * lam)
        bracket += tau * (p - 1) * (2 - tau * p) / (2 * t ** 2 * lam ** 2)
    bracket += p * (p - 1) * (p - 2) / (3 * (N - p)) * beta ** 2 * (beta * p - 3) / t ** 3
    return abs(gamma_star) ** (p - 2) * bracket


def expansion_check(profile: RadialProfile, params: ProblemParams, r: Optional[float] = None,
                    log_r: Optional[float] = None) -> float:
    """
    Exact minus truncated expansion of the normalized p-Laplacian of the profile.

    Give either r or log_r (log_r for radii beyond floating point range).
    """
    p, N = params.p, params.N
    if p == N:
        raise DomainError("the expansion is stated for p != N")
    t = math.log(r) if log_r is None else log_r
    profile.check_domain(t)
    _, a, a_t = profile.log_derivatives(t)
    first, second = _operator_terms(a, a_t, p, N)
    return (first + second) - expansion_terms(profile, p, N, t)


def leading_log_coefficient(profile: RadialProfile, params: ProblemParams,
                            log_r_pair: Tuple[float, float] = (20.0, 40.0)) -> float:
    """
    Richardson estimate of lim t^2 (normalized p-Laplacian - C_H) from t and 2t.
    """
    t1, t2 = log_r_pair
    c_h, _, _ = hardy_constants(params.p, params.N)
    values = []
    for t in (t1, t2):
        _, a, a_t = profile.log_derivatives(t)
        first, second = _operator_terms(a, a_t, params.p, params.N)
        values.append((first + second - c_h) * t ** 2)
    # c(t) = c0 + c1/t + ...; with t2 = 2 t1 the 1/t term cancels
    ratio = t2 / t1
    return (ratio * values[1] - values[0]) / (ratio - 1)


def _binomial_series(alpha: float, n_terms: int) -> np.ndarray:
    coeffs = np.empty(n_terms)
    c = 1.0
    for k in range(n_terms):
        coeffs[k] = c
        c *= (alpha - k) / (k + 1)
    return coeffs


def _hardy_defect_over_x2(x, p: float):
    """((1+x)^(p-1)(1-(p-1)x) - 1)/x^2 without cancellation for small x"""
    x = np.asarray(x, dtype=float)
    n_terms = 12
    binom = _binomial_series(p - 1, n_terms + 1)
    # coefficient of x^k is C(p-1,k) - (p-1) C(p-1,k-1), k >= 2
    coeffs = binom[2:] - (p - 1) * binom[1:-1]
    series = np.polynomial.polynomial.polyval(x, coeffs)
    with np.errstate(divide='ignore', invalid='ignore'):
        direct = ((1 + x) ** (p - 1) * (1 - (p - 1) * x) - 1) / x ** 2
    return np.where(np.abs(x) < 1e-3, series, direct)


def scaled_log_residual(p: float, N: int, eps: float, beta: float, tau: float, t):
    """
    t^m* times the normalized residual of r^gamma* (log r)^beta (log log r)^tau at mu = C_H.

    Stays accurate for astronomically large t (log log r in the hundreds).
    """
    t = np.asarray(t, dtype=float)
    lam = np.log(t)
    t_delta = beta + (tau / lam if tau else 0.0)
    minus_t2_at = beta + (tau * (lam + 1) / lam ** 2 if tau else 0.0)
    if p == N:
        ta = t_delta
        return (-(N - 1) * np.abs(ta) ** N
                + (N - 1) * np.abs(ta) ** (N - 2) * minus_t2_at - eps)
    gamma_star = (p - N) / p
    x = t_delta / (t * gamma_star)
    g = abs(gamma_star) ** (p - 2)
    hardy_part = g * t_delta ** 2 * _hardy_defect_over_x2(x, p)
    return hardy_part + (p - 1) * g * np.abs(1 + x) ** (p - 2) * minus_t2_at - eps


@dataclass
class ExistenceCertificate:
    profile: RadialProfile
    report: ResidualReport
    eps_margin: Optional[float] = None


def _supersolution_shape(params: ProblemParams) -> Tuple[RadialProfile, Optional[float]]:
    p, N, mu, q, sigma = params.p, params.N, params.mu, params.q, params.sigma
    c_h, _, _ = hardy_constants(p, N)
    slope = q - p + 1
    if mu < c_h and not math.isclose(mu, c_h, rel_tol=1e-12, abs_tol=1e-12):
        g_minus, g_plus = gamma_roots(p, N, mu)
        lo, hi = g_minus, g_plus
        if slope > 0:
            hi = min(g_plus, (sigma - p) / slope)
        elif slope < 0:
            lo = max(g_minus, (sigma - p) / slope)
        gamma = 0.5 * (lo + hi)
        if gamma == 0:
            gamma = 0.25 * lo + 0.75 * hi
        return RadialProfile(gamma), None

    lam = critical_line(p, N, mu, q)
    on_line = abs(sigma - lam) <= 1e-12 * max(1.0, abs(lam))
    if p == N:
        beta = 0.5 * (N / (N - 1 - q) + 1.0) if on_line else 0.5
        return RadialProfile(0.0, beta), (N - 1) * beta ** (N - 1) * (1 - beta)
    gamma_star = (p - N) / p
    beta = 0.5 * (-2.0 / slope + 2.0 / p) if on_line else 1.0 / p
    margin = abs(gamma_star) ** (p - 2) * beta * (p - 1) * (2 - beta * p) / 2
    return RadialProfile(gamma_star, beta), margin


def existence_supersolution(params: ProblemParams, n_samples: int = 200,
                            max_doublings: int = 60) -> ExistenceCertificate:
    """
    Positive super-solution of -Delta_p u - mu/|x|^p u^(p-1) >= C/|x|^sigma u^q near infinity.

    The shape (power, or power times a log) comes from the position of (q, sigma)
    relative to the critical line; the amplitude is scanned over powers of two
    and the radius over r = e^(2^k) until the nonlinear residual is nonnegative
    on the verification grid.

    Raises:
        NotInExistenceRegion: (q, sigma) is not an existence point
        ConvergenceFailure: no amplitude and radius pass the check
    """
    if classify(params) != Verdict.EXISTENCE:
        raise NotInExistenceRegion(
            f"(q, sigma) = ({params.q}, {params.sigma}) is not in the existence region "
            f"for p={params.p}, N={params.N}, mu={params.mu}"
        )
    shape, margin = _supersolution_shape(params)
    slope = params.q - params.p + 1
    direction = -1.0 if slope > 0 else 1.0
    k_lo, k_hi = THRESHOLD_SCAN
    for j in range(max_doublings + 1):
        scale = 2.0 ** (direction * j)
        profile = RadialProfile(shape.gamma, shape.beta, shape.tau, scale)
        for k in range(k_lo, k_hi + 1):
            ts = np.geomspace(2.0 ** k, 2.0 ** (k_hi + 2), n_samples)
            values, tols = [], []
            for t in ts:
                n, mag = nonlinear_residual(profile, params, t)
                values.append(n)
                tols.append(SIGN_TOL * mag)
            values, tols = np.array(values), np.array(tols)
            if np.all(values >= -tols) and np.any(values > tols):
                raw = values * np.exp(np.minimum(700.0, (params.p - 1) * profile.log_u(ts)
                                                 - params.p * ts))
                report = ResidualReport(ts, raw, values, BarrierClass.SUPER, float(ts[0]), tols)
                logger.debug("super-solution %s certified beyond log r = %g", profile, ts[0])
                return ExistenceCertificate(profile, report, margin)
        if slope == 0:
            break
    raise ConvergenceFailure(
        f"no super-solution certified for {params} after {max_doublings} amplitude doublings"
    )


@dataclass
class DecayFit:
    case: str
    table: pd.DataFrame
    fitted_exponent: float
    predicted_exponent: float


def _decay_case(profile: RadialProfile, p: float, N: int) -> str:
    gamma_star = (p - N) / p
    if profile.beta == 0 and profile.tau == 0 and profile.gamma <= gamma_star + 1e-14:
        return "i"
    if (p != N and math.isclose(profile.gamma, gamma_star) and math.isclose(profile.beta, 1 / p)
            and profile.tau < 0):
        return "ii"
    if (p == N and profile.gamma == 0 and math.isclose(profile.beta, (N - 1) / N)
            and profile.tau < 0):
        return "iii"
    raise DomainError(f"profile {profile} matches none of the cutoff decay cases")


def picone_remainder_log_cutoff(profile: RadialProfile, p: float, N: int, log_R: float,
                                alpha: float) -> float:
    """
    int over R < r < R^2 of R(theta^alpha v, v) r^(N-1) dr, theta = log(R^2/r)/log R.

    With w = theta^alpha v the remainder is (v/r)^p times
    |theta^alpha a + alpha theta^(alpha-1) b|^p - (theta^(alpha p) a + alpha p theta^(alpha p-1) b) Phi(a)
    where a = r v'/v and b = r theta' = -1/log R; integrated in t = log r.
    """
    L = log_R
    b = -1.0 / L

    def integrand(t):
        _, a, _ = profile.log_derivatives(t)
        theta = max(0.0, (2 * L - t) / L)
        phi_a = phi_p(a, p)
        grad = theta ** alpha * a + alpha * theta ** (alpha - 1) * b
        bracket = abs(grad) ** p - (theta ** (alpha * p) * a
                                    + alpha * p * theta ** (alpha * p - 1) * b) * phi_a
        weight = math.exp(p * float(profile.log_u(t)) + (N - p) * t)
        return bracket * weight

    return quad_adaptive(integrand, L, 2 * L, tol=1e-300, rel_tol=1e-10)


def cutoff_remainder_decay(profile: RadialProfile, params: ProblemParams,
                      log10_R_list: Sequence[float] = tuple(2.0 ** k for k in range(1, 6)),
                      alpha: Optional[float] = None) -> DecayFit:
    """
    Decay of the Picone remainder of the logarithmic cutoff family along R.

    Args:
        profile: one of the three admissible profiles
        params: ProblemParams (p, N)
        log10_R_list: values of log10 R
        alpha: cutoff power (1 for p >= 2, above 2/p otherwise)

    Returns:
        DecayFit: table with columns log10_R, integral, bound; fitted vs predicted exponent
    """
    p, N = params.p, params.N
    case = _decay_case(profile, p, N)
    if alpha is None:
        alpha = 1.0 if p >= 2 else 2.0 / p + 0.25
    log_R = np.asarray(log10_R_list, dtype=float) * math.log(10.0)
    integrals = np.array([picone_remainder_log_cutoff(profile, p, N, L, alpha) for L in log_R])
    if case == "i":
        predicted = profile.gamma * p + N - p
        bound = np.exp(predicted * log_R) / log_R ** p
        abscissa = log_R
    else:
        predicted = profile.tau * p
        bound = np.log(log_R) ** predicted
        abscissa = np.log(np.log(log_R))
    fitted = float(np.polyfit(abscissa, np.log(integrals), 1)[0])
    table = pd.DataFrame({'log10_R': np.asarray(log10_R_list, dtype=float),
                          'integral': integrals, 'bound': bound})
    return DecayFit(case, table, fitted, predicted)
