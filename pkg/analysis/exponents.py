"""
Exponent algebra and the existence/nonexistence classifier.

For -Delta_p u - mu/|x|^p u^(p-1) = C/|x|^sigma u^q in an exterior domain the
nonexistence set in the (q, sigma) plane is bounded by the critical line

    Lambda*(q) = min{gamma_-(q-p+1) + p, gamma_+(q-p+1) + p},

where gamma_- <= gamma_+ are the exponents of the power solutions r^gamma of the
homogeneous equation.
"""

import enum
import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import pandas as pd

from config.settings import DOUBLE_ROOT_TOL, ROOT_TOL
from utils.errors import ConfigError, EpsOutOfRange, HomogeneousCase, NoRealRoots
from utils.roots import expand_bracket, find_root, make_bracket

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ProblemParams:
    """(p, N, mu, eps) of the Hardy-type operator plus the nonlinearity C u^q / |x|^sigma"""

    p: float
    N: int
    mu: float = 0.0
    eps: float = 0.0
    q: float = 0.0
    sigma: float = 0.0
    C: float = 1.0

    def __post_init__(self):
        if not self.p > 1:
            raise ConfigError(f"p must exceed 1, got {self.p}")
        if int(self.N) != self.N or self.N < 2:
            raise ConfigError(f"N must be an integer >= 2, got {self.N}")
        if not self.C > 0:
            raise ConfigError(f"C must be positive, got {self.C}")
        if self.eps < 0:
            raise ConfigError(f"eps must be nonnegative, got {self.eps}")

    def replace(self, **changes) -> "ProblemParams":
        values = {**self.__dict__, **changes}
        return ProblemParams(**values)

    @property
    def critical_case(self) -> bool:
        return self.p == self.N


class Verdict(str, enum.Enum):
    NONEXISTENCE = "Nonexistence"
    EXISTENCE = "Existence"
    EXCLUDED_POINT = "ExcludedPoint"
    NONEXISTENCE_ALL_Q = "NonexistenceAllQ"


def hardy_constants(p: float, N: int) -> Tuple[float, float, int]:
    """
    Returns:
        tuple: (C_H, C_star, m_star)
    """
    gamma_star = (p - N) / p
    c_h = abs(gamma_star) ** p
    if p == N:
        return c_h, ((N - 1) / N) ** N, int(N)
    return c_h, (p - 1) / (2 * p) * abs(gamma_star) ** (p - 2), 2


def homogeneous_symbol(gamma: float, p: float, N: int) -> float:
    """-|g|^(p-2) g ((p-1) g + N - p): the value mu for which r^g solves the equation"""
    return -abs(gamma) ** (p - 2) * gamma * ((p - 1) * gamma + N - p) if gamma != 0 else 0.0


def is_double_root(mu: float, c_h: float) -> bool:
    return abs(mu - c_h) <= DOUBLE_ROOT_TOL * max(1.0, c_h)


def gamma_roots(p: float, N: int, mu: float) -> Tuple[float, float]:
    """
    The two real roots gamma_- <= gamma_+ of homogeneous_symbol(gamma) = mu.

    The symbol is unimodal with maximum C_H at gamma* = (p-N)/p, so each root is
    bracketed on one side of gamma* by widening geometrically.
    """
    c_h, _, _ = hardy_constants(p, N)
    gamma_star = (p - N) / p
    if is_double_root(mu, c_h):
        return gamma_star, gamma_star
    if mu > c_h:
        raise NoRealRoots(f"mu={mu} exceeds C_H={c_h} for p={p}, N={N}")
    if mu == 0:
        # exact zeros 0 and (p-N)/(p-1)
        lo, hi = sorted((0.0, (p - N) / (p - 1)))
        return lo, hi

    def g(gamma):
        return homogeneous_symbol(gamma, p, N) - mu

    width = 1.0 + abs(mu)
    left = expand_bracket(g, gamma_star - width, gamma_star, keep='hi')
    right = expand_bracket(g, gamma_star, gamma_star + width, keep='lo')
    roots = [find_root(g, left, tol=ROOT_TOL), find_root(g, right, tol=ROOT_TOL)]
    logger.debug("gamma roots p=%g N=%d mu=%g: %r", p, N, mu, roots)
    return roots[0], roots[1]


def beta_roots(p: float, N: int, eps: float) -> Tuple[float, float]:
    """Roots beta_- <= beta_+ of the logarithmic-correction equation for 0 <= eps <= C*"""
    _, c_star, _ = hardy_constants(p, N)
    if eps < 0 or (eps > c_star and not is_double_root(eps, c_star)):
        raise EpsOutOfRange(f"eps={eps} outside [0, C*={c_star}] for p={p}, N={N}")
    if p != N:
        if is_double_root(eps, c_star):
            return 1.0 / p, 1.0 / p
        disc = math.sqrt(max(0.0, 1.0 - eps / c_star))
        return (1.0 - disc) / p, (1.0 + disc) / p

    peak = (N - 1) / N
    if is_double_root(eps, c_star):
        return peak, peak

    def g(beta):
        return (N - 1) * beta ** (N - 1) * (1.0 - beta) - eps

    lower = find_root(g, make_bracket(g, 0.0, peak), tol=ROOT_TOL)
    upper = find_root(g, make_bracket(g, peak, 1.0), tol=ROOT_TOL)
    return lower, upper


@dataclass(frozen=True)
class ExponentData:
    C_H: float
    C_star: float
    m_star: int
    gamma_minus: float
    gamma_star: float
    gamma_plus: float
    beta_minus: Optional[float] = None
    beta_plus: Optional[float] = None

    @classmethod
    def from_params(cls, params: ProblemParams) -> "ExponentData":
        p, N = params.p, params.N
        c_h, c_star, m_star = hardy_constants(p, N)
        g_minus, g_plus = gamma_roots(p, N, params.mu)
        b_minus = b_plus = None
        if 0 <= params.eps <= c_star or is_double_root(params.eps, c_star):
            b_minus, b_plus = beta_roots(p, N, params.eps)
        return cls(c_h, c_star, m_star, g_minus, (p - N) / p, g_plus, b_minus, b_plus)

    def critical_line(self, p: float, q: float) -> float:
        return min(self.gamma_minus * (q - p + 1) + p, self.gamma_plus * (q - p + 1) + p)


def critical_line(p: float, N: int, mu: float, q: float) -> float:
    """Lambda*(q, mu)"""
    g_minus, g_plus = gamma_roots(p, N, mu)
    return min(g_minus * (q - p + 1) + p, g_plus * (q - p + 1) + p)


def critical_exponent(p: float, N: int) -> Optional[float]:
    """Critical exponent q* = N(p-1)/(N-p) of the mu = 0, sigma = 0 problem (None for p = N)"""
    if p == N:
        return None
    return N * (p - 1) / (N - p)


def classify(params: ProblemParams, tol: float = 1e-12) -> Verdict:
    """
    Existence or nonexistence of positive super-solutions near infinity.

    Args:
        params: ProblemParams; eps and C do not enter
        tol: relative tolerance for sigma = Lambda*(q)

    Returns:
        Verdict
    """
    p, N, mu, q, sigma = params.p, params.N, params.mu, params.q, params.sigma
    c_h, _, _ = hardy_constants(p, N)
    if mu > c_h and not is_double_root(mu, c_h):
        return Verdict.NONEXISTENCE_ALL_Q
    if q == p - 1 and sigma == p:
        return Verdict.EXCLUDED_POINT

    lam = critical_line(p, N, mu, q)
    slack = tol * max(1.0, abs(lam))
    if not is_double_root(mu, c_h):
        return Verdict.NONEXISTENCE if sigma <= lam + slack else Verdict.EXISTENCE
    if sigma < lam - slack:
        return Verdict.NONEXISTENCE
    if abs(sigma - lam) <= slack and q >= -1:
        return Verdict.NONEXISTENCE
    return Verdict.EXISTENCE


def nonlinear_exponent(params: ProblemParams) -> float:
    """Exponent (sigma-p)/(q-p+1) of the lower bound u >= c |x|^exponent"""
    denom = params.q - (params.p - 1)
    if denom == 0:
        raise HomogeneousCase(f"q = p-1 = {params.q}: the nonlinearity is homogeneous")
    return (params.sigma - params.p) / denom


def region_polyline(p: float, N: int, mu: float, q_range: Tuple[float, float],
                    step: float) -> pd.DataFrame:
    """
    Boundary sigma = Lambda*(q) sampled on [qmin, qmax] with the kink (p-1, p) as an exact vertex.

    Returns:
        pd.DataFrame: columns q, lambda_star
    """
    qmin, qmax = q_range
    if not step > 0:
        raise ConfigError(f"step must be positive, got {step}")
    if not qmin < qmax:
        raise ConfigError(f"need qmin < qmax, got {qmin} >= {qmax}")
    g_minus, g_plus = gamma_roots(p, N, mu)
    n = int(math.floor((qmax - qmin) / step + 1e-9))
    qs = qmin + step * np.arange(n + 1)
    qs = np.unique(np.concatenate([qs, [qmax, p - 1]]))
    shifted = qs - p + 1
    lam = np.minimum(g_minus * shifted + p, g_plus * shifted + p)
    lam[qs == p - 1] = p
    return pd.DataFrame({'q': qs, 'lambda_star': lam})


def region_annotations(p: float, N: int, mu: float) -> pd.DataFrame:
    """
    Labeled points of the (q, sigma) picture: axis intercepts of both branches,
    the kink, and for mu = C_H the q = -1 endpoint of the included half-line.

    Returns:
        pd.DataFrame: columns label, q, sigma, on_boundary, marker
    """
    c_h, _, _ = hardy_constants(p, N)
    g_minus, g_plus = gamma_roots(p, N, mu)
    rows = [{'label': 'kink (p-1, p)', 'q': p - 1, 'sigma': p, 'on_boundary': True,
             'marker': 'excluded'}]
    for name, gamma, side in (('gamma_-', g_minus, 1.0), ('gamma_+', g_plus, -1.0)):
        sigma0 = p - (p - 1) * gamma
        rows.append({'label': f'sigma-intercept p-(p-1){name}', 'q': 0.0, 'sigma': sigma0,
                     'on_boundary': side * (0.0 - (p - 1)) >= 0, 'marker': 'point'})
        if gamma != 0:
            q0 = (p - 1) - p / gamma
            rows.append({'label': f'q-intercept (p-1)-p/{name}', 'q': q0, 'sigma': 0.0,
                         'on_boundary': side * (q0 - (p - 1)) >= 0, 'marker': 'point'})
    if is_double_root(mu, c_h):
        rows.append({'label': 'q >= -1 included', 'q': -1.0,
                     'sigma': g_plus * (-1.0 - p + 1) + p, 'on_boundary': True,
                     'marker': 'endpoint'})
    return pd.DataFrame(rows)
