"""
Hardy inequalities for the p-Laplacian on exterior domains, checked on radial functions.

All integrals are radial: the area of the unit sphere multiplies every term and is
omitted. For v = v(r),

    E_{mu,eps}(v) = int |v'|^p r^(N-1) - mu int v^p r^(N-1-p) - eps int v^p r^(N-1-p)/log^m* r.

Functions of the cutoff families phi * theta_R^alpha live on radii far beyond floating
point range, so their forms are evaluated through the Picone representation

    E(eta phi) = int [B(eta, eta_t, a) + n_phi eta^p] phi^p r^(N-p) dt,   t = log r,

with B the Bregman remainder of |.|^p, a = r phi'/phi and n_phi the normalized
residual of phi.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import linalg, optimize

from analysis.barriers import BarrierClass, RadialProfile, classify_barrier, scaled_log_residual
from analysis.exponents import ProblemParams, hardy_constants, is_double_root
from config.settings import QUAD_TOL, RAYLEIGH_GRID, RAYLEIGH_MAX_ITER, THRESHOLD_SCAN
from utils.dual import phi_p
from utils.errors import ConfigError, ConvergenceFailure, DomainError
from utils.quadrature import quad_adaptive

logger = logging.getLogger(__name__)

_GL4_X, _GL4_W = np.polynomial.legendre.leggauss(4)


@dataclass(frozen=True)
class RadialTestFunction:
    """Continuous piecewise-linear v(r) vanishing at both ends of its grid"""

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, 'grid', grid)
        object.__setattr__(self, 'values', values)
        if grid.ndim != 1 or grid.size < 3 or grid.size != values.size:
            raise DomainError("need matching 1-d grid and values with >= 3 nodes")
        if not (grid[0] > 0 and np.all(np.diff(grid) > 0)):
            raise DomainError("grid must be positive and strictly increasing")
        if not np.all(np.isfinite(values)):
            raise DomainError("test function values must be finite")
        if values[0] != 0 or values[-1] != 0:
            raise DomainError(f"test function must vanish at both ends, got {values[0]}, {values[-1]}")

    @classmethod
    def hat(cls, a: float, b: float, n_nodes: int = 3) -> "RadialTestFunction":
        """Peak 1 at the midpoint of [a, b], linear on both sides"""
        grid = np.linspace(a, b, n_nodes if n_nodes % 2 else n_nodes + 1)
        mid = 0.5 * (a + b)
        return cls(grid, 1.0 - np.abs(grid - mid) / (mid - a))

    @classmethod
    def from_function(cls, f, grid) -> "RadialTestFunction":
        grid = np.asarray(grid, dtype=float)
        values = np.asarray(f(grid), dtype=float)
        values[0] = values[-1] = 0.0
        return cls(grid, values)

    @property
    def derivative(self) -> np.ndarray:
        """Slope on each cell"""
        return np.diff(self.values) / np.diff(self.grid)

    def __call__(self, r):
        return np.interp(r, self.grid, self.values)

    def derivative_at(self, r):
        idx = np.clip(np.searchsorted(self.grid, r, side='right') - 1, 0, self.grid.size - 2)
        return self.derivative[idx]

    def scaled(self, factor: float) -> "RadialTestFunction":
        return RadialTestFunction(self.grid, factor * self.values)


@dataclass(frozen=True)
class FormEvaluation:
    dirichlet: float
    hardy_term: float
    log_term: float

    @property
    def total(self) -> float:
        return self.dirichlet - self.hardy_term - self.log_term


def dirichlet_energy(v: RadialTestFunction, p: float, N: int) -> float:
    """int |v'|^p r^(N-1) dr, exact per cell"""
    return float(np.sum(np.abs(v.derivative) ** p * np.diff(v.grid ** N) / N))


def energy_form(v: RadialTestFunction, params: ProblemParams) -> FormEvaluation:
    """
    E_{mu,eps}(v) term by term.

    Args:
        v: RadialTestFunction
        params: ProblemParams (p, N, mu, eps)

    Returns:
        FormEvaluation
    """
    p, N = params.p, params.N
    _, _, m_star = hardy_constants(p, N)
    a, b = float(v.grid[0]), float(v.grid[-1])
    dirichlet = dirichlet_energy(v, p, N)

    def mass(r):
        return abs(float(v(r))) ** p * r ** (N - 1 - p)

    hardy = 0.0
    if params.mu != 0:
        hardy = params.mu * quad_adaptive(mass, a, b, tol=QUAD_TOL, rel_tol=1e-12, points=v.grid)
    log_term = 0.0
    if params.eps != 0:
        if not a > 1:
            raise DomainError(f"log term needs support in r > 1, got r >= {a}")
        log_term = params.eps * quad_adaptive(lambda r: mass(r) / math.log(r) ** m_star, a, b,
                                              tol=QUAD_TOL, rel_tol=1e-12, points=v.grid)
    return FormEvaluation(dirichlet, hardy, log_term)


def rayleigh_quotient(v: RadialTestFunction, p: float, N: int) -> float:
    """int |v'|^p r^(N-1) / int |v|^p r^(N-1-p)"""
    form = energy_form(v, ProblemParams(p, N, mu=1.0))
    return form.dirichlet / form.hardy_term


def _cell_data(grid: np.ndarray, p: float, N: int):
    h = np.diff(grid)
    stiffness = np.diff(grid ** N) / (N * h ** p)
    lam = 0.5 * (_GL4_X + 1.0)
    nodes = grid[:-1, None] + h[:, None] * lam[None, :]
    weights = 0.5 * h[:, None] * _GL4_W[None, :] * nodes ** (N - 1 - p)
    return stiffness, lam, weights


def _rayleigh_eigh(grid: np.ndarray, scale: np.ndarray, N: int) -> Tuple[float, np.ndarray]:
    n = grid.size
    stiffness, lam, weights = _cell_data(grid, 2.0, N)
    K = np.zeros((n, n))
    M = np.zeros((n, n))
    for j in range(n - 1):
        c = stiffness[j]
        K[j:j + 2, j:j + 2] += c * np.array([[1.0, -1.0], [-1.0, 1.0]])
        basis = np.vstack([1.0 - lam, lam])
        M[j:j + 2, j:j + 2] += (basis * weights[j]) @ basis.T
    S = np.diag(scale[1:-1])
    K_int = S @ K[1:-1, 1:-1] @ S
    M_int = S @ M[1:-1, 1:-1] @ S
    vals, vecs = linalg.eigh(K_int, M_int, subset_by_index=[0, 0])
    w = np.concatenate(([0.0], vecs[:, 0], [0.0]))
    return float(vals[0]), w


def _rayleigh_lbfgs(grid: np.ndarray, scale: np.ndarray, p: float, N: int,
                    max_iter: int) -> Tuple[float, np.ndarray]:
    stiffness, lam, weights = _cell_data(grid, p, N)
    s_int = scale[1:-1]

    def objective(w_int):
        v = np.concatenate(([0.0], s_int * w_int, [0.0]))
        diff = np.diff(v)
        phi_diff = np.sign(diff) * np.abs(diff) ** (p - 1)
        D = np.sum(stiffness * np.abs(diff) ** p)
        grad_D = np.zeros_like(v)
        grad_D[:-1] -= p * stiffness * phi_diff
        grad_D[1:] += p * stiffness * phi_diff

        at_nodes = v[:-1, None] * (1.0 - lam[None, :]) + v[1:, None] * lam[None, :]
        M = np.sum(weights * np.abs(at_nodes) ** p)
        flux = p * weights * np.sign(at_nodes) * np.abs(at_nodes) ** (p - 1)
        grad_M = np.zeros_like(v)
        grad_M[:-1] += np.sum(flux * (1.0 - lam[None, :]), axis=1)
        grad_M[1:] += np.sum(flux * lam[None, :], axis=1)

        Q = D / M
        grad = (grad_D - Q * grad_M) / M
        return Q, grad[1:-1] * s_int

    t = np.log(grid)
    w0 = np.sin(math.pi * (t - t[0]) / (t[-1] - t[0]))[1:-1]
    result = optimize.minimize(objective, w0, jac=True, method='L-BFGS-B',
                               options={'maxiter': max_iter, 'ftol': 1e-13, 'gtol': 1e-10})
    if result.status == 1:
        raise ConvergenceFailure(f"Rayleigh quotient minimization stopped after {result.nit} "
                                 f"iterations: {result.message}")
    logger.debug("L-BFGS-B p=%g N=%d: Q=%.12g after %d iterations (%s)", p, N, result.fun,
                 result.nit, result.message)
    return float(result.fun), np.concatenate(([0.0], result.x, [0.0]))


def rayleigh_min(p: float, N: int, rho_in: float, R_out: float, n_grid: int = RAYLEIGH_GRID,
                 method: str = "auto",
                 max_iter: int = RAYLEIGH_MAX_ITER) -> Tuple[float, RadialTestFunction]:
    """
    Smallest Hardy quotient over piecewise-linear functions on log-spaced nodes in [rho_in, R_out].

    Values are rescaled by r^gamma* before solving so every cell carries comparable weight.
    p = 2 is a generalized symmetric eigenproblem; other p minimize the quotient with L-BFGS-B.

    Returns:
        tuple: (quotient, minimizer normalized to max |v| = 1)
    """
    if n_grid < 16:
        raise ConfigError(f"n_grid must be at least 16, got {n_grid}")
    if not 0 < rho_in < R_out:
        raise ConfigError(f"need 0 < rho_in < R_out, got {rho_in}, {R_out}")
    if method not in ("auto", "eigh", "lbfgs"):
        raise ConfigError(f"unknown method {method!r}")
    grid = np.geomspace(rho_in, R_out, n_grid + 1)
    scale = grid ** ((p - N) / p)
    if method == "eigh" or (method == "auto" and p == 2):
        if p != 2:
            raise ConfigError("the eigenproblem formulation needs p = 2")
        quotient, w = _rayleigh_eigh(grid, scale, N)
    else:
        quotient, w = _rayleigh_lbfgs(grid, scale, p, N, max_iter)
    v = scale * w
    v = v / v[np.argmax(np.abs(v))]
    v[0] = v[-1] = 0.0
    return quotient, RadialTestFunction(grid, v)


@dataclass(frozen=True)
class CertifiedRadius:
    log_rho: float
    profile: RadialProfile

    @property
    def rho(self) -> float:
        return math.exp(self.log_rho)


def certified_radius(p: float, N: int) -> CertifiedRadius:
    """
    Radius beyond which a positive super-solution of the critical equation
    (mu = C_H, eps = C*) is certified, so that E_{C_H,C*} >= 0 on test functions supported there.
    """
    c_h, c_star, _ = hardy_constants(p, N)
    beta = (N - 1) / N if p == N else 1.0 / p
    profile = RadialProfile((p - N) / p, beta, 1.0 / p)
    _, k_hi = THRESHOLD_SCAN
    report = classify_barrier(profile, ProblemParams(p, N, mu=c_h, eps=c_star),
                              log_r_min=4.0, log_r_max=2.0 ** k_hi)
    if report.classification != BarrierClass.SUPER:
        raise ConvergenceFailure(f"no super-solution certified for p={p}, N={N}")
    return CertifiedRadius(report.threshold_log_r, profile)


def random_test_function(rng: np.random.Generator, rho: float) -> RadialTestFunction:
    """Nonnegative piecewise-linear draw supported in [rho e^a, rho e^b], 0 <= a < b <= 4"""
    a = rng.uniform(0.0, 1.0)
    b = a + rng.uniform(0.5, 3.0)
    n_nodes = int(rng.integers(4, 33))
    grid = rho * np.exp(np.linspace(a, b, n_nodes))
    values = np.concatenate(([0.0], rng.uniform(0.0, 1.0, n_nodes - 2), [0.0]))
    return RadialTestFunction(grid, values)


def near_extremal_test_function(rng: np.random.Generator, p: float, N: int, rho: float,
                                log_log_span: Optional[float] = None,
                                nodes_per_unit: float = 4.0) -> RadialTestFunction:
    """
    r^gamma* (log r)^beta times a perturbed bump in log log r, beta = 1/p ((N-1)/N for p = N).

    These sit next to the optimizers of the improved inequality, so E_{C_H,C*} is a
    small fraction of the Dirichlet energy and any excess in mu or eps shows up.
    The support starts at max(rho, e) and spans up to log log r + log_log_span;
    log r stays below 600/N so r^N and |v'|^p remain representable.
    """
    t_cap = 600.0 / N
    t_start = max(math.log(rho), 1.0) + rng.uniform(0.0, 0.5)
    if not t_start + 1.0 < t_cap:
        raise DomainError(f"no room for a test function beyond rho = {rho} with N = {N}")
    s_start = math.log(t_start)
    if log_log_span is None:
        log_log_span = rng.uniform(2.0, max(2.0, math.log(t_cap) - s_start))
    t_end = min(t_start * math.exp(log_log_span), t_cap)
    n_nodes = int(np.clip(nodes_per_unit * (t_end - t_start), 64, 2000))
    ts = np.linspace(t_start, t_end, n_nodes)

    x = (np.log(ts) - s_start) / (math.log(t_end) - s_start)
    wobble = 1.0 + sum(c * np.sin((k + 1) * math.pi * x)
                       for k, c in enumerate(rng.uniform(-0.1, 0.1, 3)))
    beta = (N - 1) / N if p == N else 1.0 / p
    log_phi = (p - N) / p * (ts - t_start) + beta * np.log(ts / t_start)
    values = np.sin(math.pi * x) * wobble * np.exp(log_phi)
    values[0] = values[-1] = 0.0
    return RadialTestFunction(np.exp(ts), values)


def improved_hardy_check(p: float, N: int, rho: float, v: RadialTestFunction) -> float:
    """
    E_{C_H,C*}(v) for v supported in |x| >= rho.

    Nonnegative whenever rho is at least the certified radius.
    """
    if v.grid[0] < rho * (1 - 1e-12):
        raise DomainError(f"test function support starts at {v.grid[0]} < rho = {rho}")
    c_h, c_star, _ = hardy_constants(p, N)
    return energy_form(v, ProblemParams(p, N, mu=c_h, eps=c_star)).total


@dataclass(frozen=True)
class CutoffFamily:
    """
    theta_R: 0 below 3rho/2, linear in r up to 1 at 2rho, 1 up to R, log(R^2/r)/log R up to R^2.

    R is carried as log R because the interesting R overflow floating point.
    """

    rho: float
    log_R: float
    alpha: float = 1.0

    def __post_init__(self):
        if not math.log(2 * self.rho) < self.log_R:
            raise DomainError(f"need 2 rho < R, got rho={self.rho}, log R={self.log_R}")
        if not self.alpha >= 1:
            raise DomainError(f"alpha must be at least 1, got {self.alpha}")

    @property
    def R(self) -> float:
        return math.exp(self.log_R) if self.log_R <= 709.0 else math.inf

    def theta(self, r):
        r = np.asarray(r, dtype=float)
        t = np.log(r)
        ramp = np.clip((r - 1.5 * self.rho) / (0.5 * self.rho), 0.0, 1.0)
        tail = np.clip((2 * self.log_R - t) / self.log_R, 0.0, 1.0)
        return np.where(t <= self.log_R, ramp, tail)


def default_alpha(p: float) -> float:
    return 1.0 if p >= 2 else 2.0 / p + 0.25


def _bregman_over_y2(y, p: float):
    """(|1+y|^p - 1 - p y)/y^2, accurate for tiny y"""
    y = np.asarray(y, dtype=float)
    coeffs, c = [], 1.0
    for k in range(12):
        c *= (p - k) / (k + 1)
        if k >= 1:
            coeffs.append(c)
    series = np.polynomial.polynomial.polyval(y, coeffs)
    with np.errstate(divide='ignore', invalid='ignore'):
        direct = (np.abs(1 + y) ** p - 1 - p * y) / y ** 2
    return np.where(np.abs(y) < 1e-3, series, direct)


def _picone_density(eta: float, eta_t: float, a: float, p: float) -> float:
    """|eta_t + eta a|^p - (p eta^(p-1) eta_t + eta^p a) Phi(a)"""
    phi_a = phi_p(a, p)
    return abs(eta_t + eta * a) ** p - (p * eta ** (p - 1) * eta_t + eta ** p * a) * phi_a


@dataclass(frozen=True)
class FamilyForm:
    ramp: float
    plateau: float
    tail: float

    @property
    def total(self) -> float:
        return self.ramp + self.plateau + self.tail


def family_form(params: ProblemParams, family: CutoffFamily, phi: RadialProfile) -> FamilyForm:
    """
    E_{mu,eps}(theta_R^alpha phi) for phi = r^gamma* (log r)^beta (log log r)^tau.

    When beta p + 1 = m* (the critical logarithmic profiles) the plateau and tail are
    integrated in log log r and r-independent scaled variables, so log log R may be
    in the hundreds. Otherwise log R must stay moderate.
    """
    p, N = params.p, params.N
    c_h, _, m_star = hardy_constants(p, N)
    gamma_star = (p - N) / p
    if not math.isclose(phi.gamma, gamma_star, abs_tol=1e-14):
        raise DomainError(f"family profiles use gamma* = {gamma_star}, got {phi.gamma}")
    beta, tau, alpha = phi.beta, phi.tau, family.alpha
    log_regime = math.isclose(beta * p + 1, m_star)
    mu_excess = c_h - params.mu
    rho, L = family.rho, family.log_R

    def scaled_n(t):
        """t^m* n_phi"""
        out = scaled_log_residual(p, N, params.eps, beta, tau, t)
        if mu_excess != 0:
            out = out + mu_excess * np.power(t, float(m_star))
        return float(out)

    def weight(t):
        w = t ** (beta * p) if beta else 1.0
        return w * math.log(t) ** (tau * p) if tau else w

    def ramp_integrand(t):
        r = math.exp(t)
        theta = (r - 1.5 * rho) / (0.5 * rho)
        if theta <= 0:
            return 0.0
        eta = theta ** alpha
        eta_t = alpha * theta ** (alpha - 1) * r / (0.5 * rho)
        _, a, _ = phi.log_derivatives(t) if (beta or tau) else (0.0, gamma_star, 0.0)
        n = scaled_n(t) / t ** m_star
        return (_picone_density(eta, eta_t, a, p) + n * eta ** p) * weight(t)

    t_lo, t_hi = math.log(1.5 * rho), math.log(2 * rho)
    ramp = quad_adaptive(ramp_integrand, t_lo, t_hi, tol=QUAD_TOL, rel_tol=1e-10)

    if log_regime:
        S = math.log(L)
        s0 = math.log(t_hi)
        plateau = quad_adaptive(lambda s: scaled_n(math.exp(s)) * s ** (tau * p) if tau
                                else scaled_n(math.exp(s)), s0, S, tol=QUAD_TOL, rel_tol=1e-10)

        def tail_integrand(x):
            theta = 2.0 - x
            if theta <= 0:
                return 0.0
            t = x * L
            lam = S + math.log(x)
            t_delta = beta + (tau / lam if tau else 0.0)
            eta = theta ** alpha
            if p == N:
                ta = t_delta
                y = -alpha * x / (theta * ta)
                bregman = eta ** p * abs(ta) ** p * float(_bregman_over_y2(y, p)) * y ** 2
            else:
                a = gamma_star + t_delta / t
                ty = -alpha * x / (theta * a)
                y = ty / t
                bregman = eta ** p * abs(a) ** p * float(_bregman_over_y2(y, p)) * ty ** 2
            value = bregman + scaled_n(t) * eta ** p
            return value * (lam ** (tau * p) if tau else 1.0) / x

        tail = quad_adaptive(tail_integrand, 1.0, 2.0, tol=QUAD_TOL, rel_tol=1e-10)
    else:
        plateau = quad_adaptive(lambda t: scaled_n(t) / t ** m_star * weight(t), t_hi, L,
                                tol=QUAD_TOL, rel_tol=1e-10)

        def tail_integrand(x):
            theta = 2.0 - x
            if theta <= 0:
                return 0.0
            t = x * L
            eta = theta ** alpha
            eta_t = -alpha * theta ** (alpha - 1) / L
            _, a, _ = phi.log_derivatives(t) if (beta or tau) else (0.0, gamma_star, 0.0)
            n = scaled_n(t) / t ** m_star
            return (_picone_density(eta, eta_t, a, p) + n * eta ** p) * weight(t) * L

        tail = quad_adaptive(tail_integrand, 1.0, 2.0, tol=QUAD_TOL, rel_tol=1e-10)
    return FamilyForm(ramp, plateau, tail)


FAMILY_CASES = ("eps_above_Cstar", "mu_above_CH", "critical")


def family_setup(p: float, N: int, case: str, excess: float = 0.1,
                 tau: Optional[float] = None) -> Tuple[ProblemParams, RadialProfile, float]:
    """
    Parameters, profile phi and inner radius rho of a sharpness family.

    eps_above_Cstar: mu = C_H, eps = C* + excess, phi = r^gamma* (log r)^beta (log log r)^tau
    mu_above_CH:     mu = C_H + excess, eps = 0, phi = r^gamma*
    critical:        mu = C_H, eps = C*, same phi as the eps case
    """
    c_h, c_star, _ = hardy_constants(p, N)
    gamma_star = (p - N) / p
    beta = (N - 1) / N if p == N else 1.0 / p
    if tau is None:
        tau = -1.0 / (2 * p)
    if case == "mu_above_CH":
        return ProblemParams(p, N, mu=c_h + excess), RadialProfile(gamma_star), 1.0
    if case == "eps_above_Cstar":
        params = ProblemParams(p, N, mu=c_h, eps=c_star + excess)
    elif case == "critical":
        params = ProblemParams(p, N, mu=c_h, eps=c_star)
    else:
        raise ConfigError(f"unknown family case {case!r}; expected one of {FAMILY_CASES}")
    if not -1.0 / p < tau < 0:
        raise ConfigError(f"tau must lie in (-1/p, 0), got {tau}")
    return params, RadialProfile(gamma_star, beta, tau), math.exp(math.e)


def sharpness_family(p: float, N: int, case: str, log_R_list: Sequence[float],
                     excess: float = 0.1, tau: Optional[float] = None,
                     alpha: Optional[float] = None, rho: Optional[float] = None) -> pd.DataFrame:
    """
    E on phi theta_R^alpha along increasing R.

    Returns:
        pd.DataFrame: columns log_R, log_log_R, ramp, plateau, tail, form
    """
    params, phi, default_rho = family_setup(p, N, case, excess, tau)
    rho = default_rho if rho is None else rho
    alpha = default_alpha(p) if alpha is None else alpha
    rows = []
    for log_R in log_R_list:
        form = family_form(params, CutoffFamily(rho, float(log_R), alpha), phi)
        rows.append({'log_R': float(log_R), 'log_log_R': math.log(log_R), 'ramp': form.ramp,
                     'plateau': form.plateau, 'tail': form.tail, 'form': form.total})
    return pd.DataFrame(rows)


@dataclass(frozen=True)
class PiconeReport:
    max_violation: float
    max_identity_gap: float
    min_L: float


def picone_terms(w, w_r, phi, phi_r, p: float):
    """Pointwise L(w, phi) and R(w, phi); w >= 0, phi > 0"""
    w, w_r, phi, phi_r = (np.asarray(x, dtype=float) for x in (w, w_r, phi, phi_r))
    ratio = w / phi
    phi_flux = np.sign(phi_r) * np.abs(phi_r) ** (p - 1)
    L = (np.abs(w_r) ** p + (p - 1) * ratio ** p * np.abs(phi_r) ** p
         - p * ratio ** (p - 1) * w_r * phi_flux)
    quotient_r = p * ratio ** (p - 1) * w_r - (p - 1) * ratio ** p * phi_r
    R = np.abs(w_r) ** p - quotient_r * phi_flux
    scale = (np.abs(w_r) ** p + (p - 1) * ratio ** p * np.abs(phi_r) ** p
             + p * ratio ** (p - 1) * np.abs(w_r) * np.abs(phi_r) ** (p - 1))
    return L, R, scale


def picone_check(w: RadialTestFunction, phi: RadialProfile, p: float,
                 n_samples: int = 64) -> PiconeReport:
    """
    Compare the two forms of the Picone remainder at interior points of every cell.

    Violations are relative to the local size of the terms.
    """
    if np.any(w.values < 0):
        raise DomainError("Picone's identity is stated for w >= 0")
    grid = w.grid
    frac = (np.arange(n_samples) + 0.5) / n_samples
    r = (grid[:-1, None] + np.diff(grid)[:, None] * frac[None, :]).ravel()
    t = np.log(r)
    phi.check_domain(float(t.min()))
    log_phi = phi.log_u(t)
    a = np.array([phi.log_derivatives(x)[1] for x in t])
    phi_val = np.exp(log_phi)
    L, R, scale = picone_terms(w(r), w.derivative_at(r), phi_val, phi_val * a / r, p)
    scale = np.where(scale > 0, scale, 1.0)
    gap = np.abs(L - R) / scale
    negative = np.maximum(-L, 0.0) / scale
    return PiconeReport(float(max(gap.max(), negative.max())), float(gap.max()),
                        float((L / scale).min()))


@dataclass
class NonexistenceCertificate:
    params: ProblemParams
    family: CutoffFamily
    profile: RadialProfile
    scale: float
    form: float
    test_function: Optional[RadialTestFunction] = None


def _discretize_family(family: CutoffFamily, phi: RadialProfile, N: int,
                       n_ramp: int = 64, n_per_unit: int = 16) -> Optional[RadialTestFunction]:
    t_lo, t_mid = math.log(1.5 * family.rho), math.log(2 * family.rho)
    t_end = 2 * family.log_R
    if N * t_end > 700:
        return None
    ts = np.concatenate([np.linspace(t_lo, t_mid, n_ramp),
                         np.linspace(t_mid, t_end, max(16, int(n_per_unit * (t_end - t_mid))))])
    grid = np.exp(np.unique(ts))
    eta = family.theta(grid) ** family.alpha
    return RadialTestFunction.from_function(lambda r: eta * np.exp(phi.log_u(np.log(r))), grid)


def nonexistence_witness(p: float, N: int, mu: float, eps: float = 0.0,
                         tau_p: float = -0.01) -> Optional[NonexistenceCertificate]:
    """
    Test function with negative E_{mu,eps}; None where the form is nonnegative
    or the search over the family finds no negative value.

    mu > C_H uses r^gamma* theta_R^alpha with log R = 2^k log 10; mu = C_H, eps > C*
    uses the logarithmic profile with tau close to 0 and log log R = 2^j. The witness is
    scaled so that its form is -2.
    """
    c_h, c_star, _ = hardy_constants(p, N)
    alpha = default_alpha(p)
    mu_double = is_double_root(mu, c_h)
    if mu > c_h and not mu_double:
        params = ProblemParams(p, N, mu=mu, eps=eps)
        phi, rho = RadialProfile((p - N) / p), 1.0
        candidates = [2.0 ** k * math.log(10.0) for k in range(1, 15)]
    elif mu_double and eps > c_star and not is_double_root(eps, c_star):
        params = ProblemParams(p, N, mu=c_h, eps=eps)
        beta = (N - 1) / N if p == N else 1.0 / p
        phi, rho = RadialProfile((p - N) / p, beta, tau_p / p), math.exp(math.e)
        candidates = [math.exp(2.0 ** j) for j in range(1, 10)] + [math.exp(700.0)]
    else:
        return None

    for log_R in candidates:
        family = CutoffFamily(rho, log_R, alpha)
        value = family_form(params, family, phi).total
        logger.debug("witness search p=%g N=%d log R=%.6g: E=%.6g", p, N, log_R, value)
        if value < 0:
            scale = (2.0 / -value) ** (1.0 / p)
            test_function = _discretize_family(family, phi, N)
            if test_function is not None:
                test_function = test_function.scaled(scale)
            return NonexistenceCertificate(params, family, phi, scale, -2.0, test_function)
    logger.warning("no negative cutoff form for p=%g N=%d mu=%g eps=%g up to log R = %.3g",
                   p, N, mu, eps, candidates[-1])
    return None
