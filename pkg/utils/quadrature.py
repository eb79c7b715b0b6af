"""
Adaptive Gauss-Kronrod quadrature (QUADPACK through scipy)
"""

import logging
import warnings
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from config.settings import QUAD_LIMIT, QUAD_TOL
from utils.errors import DomainError, MaxRefinementExceeded

logger = logging.getLogger(__name__)


def quad_adaptive(f: Callable[[float], float], a: float, b: float, tol: float = QUAD_TOL,
                  rel_tol: float = 0.0, points: Optional[Sequence[float]] = None,
                  limit: int = QUAD_LIMIT) -> float:
    """
    Integral of f over [a, b].

    Args:
        f: integrand
        a, b: finite limits, a < b
        tol: absolute error target
        rel_tol: relative error target (0 means absolute only)
        points: interior breakpoints where f is not smooth

    Returns:
        float: the integral estimate
    """
    if not (np.isfinite(a) and np.isfinite(b)) or not a < b:
        raise DomainError(f"quad_adaptive needs finite a < b, got [{a}, {b}]")
    kwargs = {}
    if points is not None:
        inner = sorted(x for x in points if a < x < b)
        if inner:
            kwargs["points"] = inner
            limit = max(limit, 4 * len(inner) + 50)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        value, abserr, info, *rest = quad(f, a, b, epsabs=tol, epsrel=rel_tol,
                                          limit=limit, full_output=1, **kwargs)
    message = rest[0] if rest else ""
    if "maximum number of subdivisions" in message:
        raise MaxRefinementExceeded(
            f"quadrature on [{a}, {b}] hit {limit} subdivisions (error estimate {abserr:.3e})"
        )
    if message:
        logger.warning("quadrature on [%g, %g]: %s (error estimate %.3e)",
                       a, b, message.splitlines()[0], abserr)
    return value
