"""
Generalized sine S_p.

S_p solves |w'|^p + |w|^p/(p-1) = 1 with w(0) = 0, w'(0) = 1. On the first quarter
[0, pi_p/2] it is the inverse of

    psi(w) = int_0^w dt / (1 - t^p/(p-1))^(1/p),

and it extends to the real line by S_p(psi) = S_p(pi_p - psi) on [pi_p/2, pi_p],
odd reflection on (pi_p, 2 pi_p] and 2 pi_p periodicity.

The quarter table is built on the desingularized variable v in [0, 1] with
w = (p-1)^(1/p) (1 - (1-v)^k), k = p/(p-1), for which the integrand is bounded.
"""

import functools
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from config.settings import GENSINE_NODES, GENSINE_TOL
from utils.errors import BuildError, DomainError
from utils.quadrature import quad_adaptive
from utils.roots import find_root, make_bracket

logger = logging.getLogger(__name__)

_GL_X, _GL_W = np.polynomial.legendre.leggauss(10)


def _check_p(p):
    if not p > 1:
        raise DomainError(f"generalized sine needs p > 1, got p={p}")


def pi_p(p: float) -> float:
    """Period constant: S_p has period 2 pi_p and pi_2 = pi"""
    _check_p(p)
    return 2.0 * (p - 1) ** (1.0 / p) * math.pi / (p * math.sin(math.pi / p))


def _integrand(v, p):
    """Desingularized integrand h(v); psi = (p-1)^(1/p) int_0^v h"""
    v = np.asarray(v, dtype=float)
    k = p / (p - 1)
    w = np.clip(1.0 - v, 0.0, 1.0)
    wk = w ** k
    with np.errstate(divide='ignore', invalid='ignore'):
        one_minus_sp = -np.expm1(p * np.log1p(-wk))
        h = k * w ** (k - 1) * one_minus_sp ** (-1.0 / p)
    limit = k * p ** (-1.0 / p)
    return np.where(w > 0, h, limit)


def pi_p_quadrature(p: float, tol: float = 1e-13) -> float:
    """pi_p from the defining integral, independent of the closed form"""
    _check_p(p)
    half = (p - 1) ** (1.0 / p) * quad_adaptive(lambda v: float(_integrand(v, p)), 0.0, 1.0,
                                                tol=tol)
    return 2.0 * half


@dataclass(frozen=True)
class GenSine:
    p: float
    half_period: float
    amplitude: float
    v_of_psi: CubicHermiteSpline = field(repr=False, compare=False)
    psi_of_v: CubicHermiteSpline = field(repr=False, compare=False)

    @property
    def pi_p(self) -> float:
        return 2.0 * self.half_period

    @property
    def k(self) -> float:
        return self.p / (self.p - 1)

    def quarter(self, psi):
        """S_p on [0, pi_p/2] from the table"""
        v = np.clip(self.v_of_psi(np.clip(psi, 0.0, self.half_period)), 0.0, 1.0)
        return self.amplitude * (1.0 - (1.0 - v) ** self.k)

    def __call__(self, psi):
        return eval_sp(self, psi)


def build_gensine(p: float, tol: float = GENSINE_TOL, n_nodes: int = GENSINE_NODES) -> GenSine:
    """
    Tabulate the first quarter of S_p.

    Args:
        p: exponent > 1
        tol: allowed gap between the tabulated and closed-form quarter period
        n_nodes: table size

    Returns:
        GenSine
    """
    _check_p(p)
    amplitude = (p - 1) ** (1.0 / p)
    v_nodes = np.linspace(0.0, 1.0, n_nodes)
    lo, hi = v_nodes[:-1], v_nodes[1:]
    mid, rad = 0.5 * (lo + hi), 0.5 * (hi - lo)
    x = mid[:, None] + rad[:, None] * _GL_X[None, :]
    panels = (rad[:, None] * _GL_W[None, :] * _integrand(x, p)).sum(axis=1)
    psi_nodes = amplitude * np.concatenate(([0.0], np.cumsum(panels)))

    half_period = 0.5 * pi_p(p)
    gap = abs(psi_nodes[-1] - half_period)
    if not np.all(np.isfinite(psi_nodes)) or gap > tol:
        raise BuildError(f"quarter table for p={p} misses pi_p/2 by {gap:.3e} (tol {tol:.1e})")
    psi_nodes *= half_period / psi_nodes[-1]

    dpsi_dv = amplitude * _integrand(v_nodes, p)
    gs = GenSine(
        p=p,
        half_period=half_period,
        amplitude=amplitude,
        v_of_psi=CubicHermiteSpline(psi_nodes, v_nodes, 1.0 / dpsi_dv),
        psi_of_v=CubicHermiteSpline(v_nodes, psi_nodes, dpsi_dv),
    )
    logger.debug("built S_p table p=%g nodes=%d gap=%.2e", p, n_nodes, gap)
    return gs


@functools.lru_cache(maxsize=32)
def get_gensine(p: float) -> GenSine:
    """Shared read-only table per exponent"""
    return build_gensine(p)


def eval_sp(gs: GenSine, psi):
    """
    S_p and S_p' at psi (scalar or array).

    S_p' comes from the first integral |S'|^p = 1 - |S|^p/(p-1) with the sign of
    the quadrant.
    """
    scalar = np.isscalar(psi)
    psi = np.asarray(psi, dtype=float)
    H = gs.half_period
    theta = np.mod(psi, 4.0 * H)

    q1 = theta <= H
    q2 = (theta > H) & (theta <= 2 * H)
    q3 = (theta > 2 * H) & (theta <= 3 * H)
    arg = np.select([q1, q2, q3], [theta, 2 * H - theta, theta - 2 * H], 4 * H - theta)
    mag = gs.quarter(arg)
    s = np.where(q1 | q2, mag, -mag)
    sign = np.where(q1 | ~(q2 | q3), 1.0, -1.0)
    ds = sign * np.maximum(0.0, 1.0 - np.abs(s) ** gs.p / (gs.p - 1)) ** (1.0 / gs.p)
    if scalar:
        return float(s), float(ds)
    return s, ds


def arcsin_p(gs: GenSine, s):
    """Inverse of S_p on [0, pi_p/2]; s in [0, (p-1)^(1/p)]"""
    ratio = np.clip(np.asarray(s, dtype=float) / gs.amplitude, 0.0, 1.0)
    v = 1.0 - (1.0 - ratio) ** (1.0 / gs.k)
    out = gs.psi_of_v(v)
    return float(out) if np.ndim(out) == 0 else out


def quarter_pi_p(gs: GenSine, tol: float = 1e-14):
    """
    The angle (pi/4)_p where S_p = S_p' = ((p-1)/p)^(1/p), and its complement.

    Returns:
        tuple: ((pi/4)_p, pi_p - (pi/4)_p)
    """
    target = ((gs.p - 1) / gs.p) ** (1.0 / gs.p)

    def f(psi):
        return float(gs.quarter(psi)) - target

    quarter = find_root(f, make_bracket(f, 0.0, gs.half_period), tol=tol)
    return quarter, gs.pi_p - quarter
