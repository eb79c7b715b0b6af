"""
Bracketed scalar root finding (Brent's method via scipy)
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional

from scipy.optimize import brentq

from config.settings import ROOT_TOL
from utils.errors import InvalidBracket

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Bracket:
    """Interval [lo, hi] with the function values at its ends"""

    lo: float
    hi: float
    f_lo: float
    f_hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise InvalidBracket(f"bracket needs lo < hi, got [{self.lo}, {self.hi}]")
        if not (math.isfinite(self.f_lo) and math.isfinite(self.f_hi)):
            raise InvalidBracket(f"non-finite values at bracket ends: {self.f_lo}, {self.f_hi}")
        if self.f_lo * self.f_hi > 0:
            raise InvalidBracket(
                f"no sign change on [{self.lo}, {self.hi}]: f={self.f_lo}, {self.f_hi}"
            )


def make_bracket(f: Callable[[float], float], lo: float, hi: float) -> Bracket:
    return Bracket(lo, hi, f(lo), f(hi))


def expand_bracket(f: Callable[[float], float], lo: float, hi: float,
                   factor: float = 2.0, max_iter: int = 60,
                   keep: Optional[str] = None) -> Bracket:
    """
    Widen [lo, hi] geometrically until f changes sign.

    Args:
        f: scalar function
        lo, hi: starting interval
        factor: growth factor of the width per iteration
        max_iter: number of widenings before giving up
        keep: None widens around the midpoint; 'lo' or 'hi' pins that end

    Returns:
        Bracket: a valid bracket
    """
    if keep not in (None, 'lo', 'hi'):
        raise InvalidBracket(f"keep must be None, 'lo' or 'hi', got {keep!r}")
    start = (lo, hi)
    for _ in range(max_iter):
        fa, fb = f(lo), f(hi)
        if fa * fb <= 0:
            return Bracket(lo, hi, fa, fb)
        width = factor * (hi - lo)
        if keep == 'lo':
            hi = lo + width
        elif keep == 'hi':
            lo = hi - width
        else:
            mid = 0.5 * (lo + hi)
            lo, hi = mid - 0.5 * width, mid + 0.5 * width
    raise InvalidBracket(f"no sign change found from {start} after {max_iter} widenings")


def find_root(f: Callable[[float], float], bracket: Bracket, tol: float = ROOT_TOL) -> float:
    """
    Root of f inside a sign-changing bracket.

    Args:
        f: continuous scalar function
        bracket: Bracket with f_lo * f_hi <= 0
        tol: absolute tolerance on the root location

    Returns:
        float: x in [lo, hi] with f(x) ~ 0
    """
    if bracket.f_lo == 0:
        return bracket.lo
    if bracket.f_hi == 0:
        return bracket.hi
    root, info = brentq(f, bracket.lo, bracket.hi, xtol=tol,
                        maxiter=500, full_output=True)
    logger.debug("brentq: root=%r iterations=%d", root, info.iterations)
    return root
