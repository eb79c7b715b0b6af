"""
Adaptive explicit ODE integration.

integrate_ode wraps the Dormand-Prince 5(4) pair of scipy; rk4_fixed is a plain
fixed-step RK4 kept as an independent oracle for cross-checks.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.integrate import solve_ivp

from config.settings import ODE_ATOL, ODE_RTOL
from utils.errors import DomainError, StepUnderflow

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class OdeProblem:
    rhs: Callable[[float, np.ndarray], np.ndarray]
    t0: float
    y0: tuple
    t_end: float
    rel_tol: float = ODE_RTOL
    abs_tol: float = ODE_ATOL

    def __post_init__(self):
        if not self.t0 < self.t_end:
            raise DomainError(f"need t0 < t_end, got {self.t0} >= {self.t_end}")
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise DomainError(f"tolerances must be positive: rtol={self.rel_tol}, atol={self.abs_tol}")


@dataclass
class Trajectory:
    """Accepted steps of an integration plus the dense interpolant"""

    t: np.ndarray
    y: np.ndarray
    sol: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, repr=False)

    def __call__(self, t):
        if self.sol is None:
            return np.array([np.interp(t, self.t, row) for row in self.y])
        return self.sol(t)

    @property
    def final(self) -> np.ndarray:
        return self.y[:, -1]


def integrate_ode(prob: OdeProblem, max_step: float = np.inf) -> Trajectory:
    """
    Integrate prob.rhs from t0 to t_end with an embedded 5(4) Runge-Kutta pair.

    Args:
        prob: OdeProblem
        max_step: optional cap on the step length

    Returns:
        Trajectory: accepted steps (t, y) with dense output
    """
    result = solve_ivp(prob.rhs, (prob.t0, prob.t_end), np.asarray(prob.y0, dtype=float),
                       method="RK45", rtol=prob.rel_tol, atol=prob.abs_tol,
                       dense_output=True, max_step=max_step)
    if result.status == -1:
        if "step size" in result.message.lower():
            raise StepUnderflow(f"step size collapsed near t={result.t[-1]}: {result.message}")
        raise DomainError(f"integration failed near t={result.t[-1]}: {result.message}")
    logger.debug("RK45: %d accepted steps, %d rhs evaluations", result.t.size, result.nfev)
    return Trajectory(t=result.t, y=result.y, sol=result.sol)


def rk4_fixed(prob: OdeProblem, n_steps: int) -> Trajectory:
    """Classical RK4 with n_steps equal steps"""
    ts = np.linspace(prob.t0, prob.t_end, n_steps + 1)
    h = ts[1] - ts[0]
    ys = np.empty((len(prob.y0), n_steps + 1))
    y = np.asarray(prob.y0, dtype=float)
    ys[:, 0] = y
    for i, t in enumerate(ts[:-1]):
        k1 = np.asarray(prob.rhs(t, y))
        k2 = np.asarray(prob.rhs(t + h / 2, y + h / 2 * k1))
        k3 = np.asarray(prob.rhs(t + h / 2, y + h / 2 * k2))
        k4 = np.asarray(prob.rhs(t + h, y + h * k3))
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        ys[:, i + 1] = y
    return Trajectory(t=ts, y=ys)
