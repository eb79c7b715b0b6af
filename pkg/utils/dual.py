"""
Second-order forward-mode differentiation with dual numbers.

A Dual2 carries (value, d1, d2) of a function of one scalar variable. Arithmetic
applies the product and chain rules through second order, so evaluating a
closed-form expression on Dual2.variable(x) yields f(x), f'(x), f''(x) exactly
up to rounding.
"""

import math
from dataclasses import dataclass
from typing import Callable, Tuple, Union

from utils.errors import DomainError

Number = Union[int, float]


@dataclass(frozen=True)
class Dual2:
    value: float
    d1: float = 0.0
    d2: float = 0.0
    nonsmooth: bool = False

    # numpy scalars must defer to our reflected operators
    __array_ufunc__ = None

    @classmethod
    def variable(cls, x: Number) -> "Dual2":
        return cls(float(x), 1.0, 0.0)

    @classmethod
    def constant(cls, c: Number) -> "Dual2":
        return cls(float(c), 0.0, 0.0)

    @staticmethod
    def lift(other) -> "Dual2":
        return other if isinstance(other, Dual2) else Dual2.constant(other)

    def _chain(self, g: float, g1: float, g2: float, nonsmooth: bool = False) -> "Dual2":
        return Dual2(g, g1 * self.d1, g2 * self.d1 * self.d1 + g1 * self.d2,
                     self.nonsmooth or nonsmooth)

    def __add__(self, other):
        o = Dual2.lift(other)
        return Dual2(self.value + o.value, self.d1 + o.d1, self.d2 + o.d2,
                     self.nonsmooth or o.nonsmooth)

    __radd__ = __add__

    def __neg__(self):
        return Dual2(-self.value, -self.d1, -self.d2, self.nonsmooth)

    def __sub__(self, other):
        return self + (-Dual2.lift(other))

    def __rsub__(self, other):
        return Dual2.lift(other) + (-self)

    def __mul__(self, other):
        o = Dual2.lift(other)
        return Dual2(self.value * o.value,
                     self.d1 * o.value + self.value * o.d1,
                     self.d2 * o.value + 2.0 * self.d1 * o.d1 + self.value * o.d2,
                     self.nonsmooth or o.nonsmooth)

    __rmul__ = __mul__

    def reciprocal(self) -> "Dual2":
        b = self.value
        if b == 0:
            raise DomainError("division by a dual number with zero value")
        return Dual2(1.0 / b, -self.d1 / b ** 2,
                     -self.d2 / b ** 2 + 2.0 * self.d1 ** 2 / b ** 3, self.nonsmooth)

    def __truediv__(self, other):
        return self * Dual2.lift(other).reciprocal()

    def __rtruediv__(self, other):
        return Dual2.lift(other) * self.reciprocal()

    def __pow__(self, s):
        if isinstance(s, Dual2):
            return exp(s * log(self))
        x = self.value
        if float(s).is_integer():
            n = int(s)
            if n == 0:
                return Dual2.constant(1.0)
            g1 = n * x ** (n - 1)
            g2 = n * (n - 1) * x ** (n - 2) if n != 1 else 0.0
            return self._chain(x ** n, g1, g2)
        if x <= 0:
            raise DomainError(f"non-integer power {s} of non-positive value {x}; use abs_pow")
        return self._chain(x ** s, s * x ** (s - 1), s * (s - 1) * x ** (s - 2))


def log(x: Dual2) -> Dual2:
    x = Dual2.lift(x)
    if x.value <= 0:
        raise DomainError(f"log of non-positive value {x.value}")
    return x._chain(math.log(x.value), 1.0 / x.value, -1.0 / x.value ** 2)


def exp(x: Dual2) -> Dual2:
    x = Dual2.lift(x)
    e = math.exp(x.value)
    return x._chain(e, e, e)


def sqrt(x: Dual2) -> Dual2:
    x = Dual2.lift(x)
    if x.value <= 0:
        raise DomainError(f"sqrt needs a positive value, got {x.value}")
    r = math.sqrt(x.value)
    return x._chain(r, 0.5 / r, -0.25 / (r * x.value))


def abs_pow(x: Dual2, s: float) -> Dual2:
    """|x|^s with g' = s sign(x)|x|^(s-1); at x = 0 and s < 2, d2 is set to 0 and flagged"""
    x = Dual2.lift(x)
    v = x.value
    a = abs(v)
    if a == 0:
        if s < 1:
            raise DomainError(f"|x|^{s} is not differentiable at 0")
        g1 = 1.0 if s == 1 and v >= 0 else 0.0
        if s < 2:
            return x._chain(0.0, g1, 0.0, nonsmooth=True)
        return x._chain(0.0, 0.0, 2.0 if s == 2 else 0.0)
    sign = math.copysign(1.0, v)
    return x._chain(a ** s, s * sign * a ** (s - 1), s * (s - 1) * a ** (s - 2))


def phi_p(x: Union[Dual2, Number], p: float) -> Union[Dual2, float]:
    """
    Signed power |x|^(p-2) x.

    Plain numbers give a float. At x = 0 a Dual2 is flagged nonsmooth unless
    p = 2 or p > 3, where both derivatives exist.
    """
    if not isinstance(x, Dual2):
        return math.copysign(abs(x) ** (p - 1), x)
    v = x.value
    if v == 0:
        if p == 2:
            return x._chain(0.0, 1.0, 0.0)
        if p > 3:
            return x._chain(0.0, 0.0, 0.0)
        return x._chain(0.0, 0.0, 0.0, nonsmooth=True)
    sign = math.copysign(1.0, v)
    a = abs(v)
    return x._chain(sign * a ** (p - 1), (p - 1) * a ** (p - 2),
                    sign * (p - 1) * (p - 2) * a ** (p - 3))


def dual2_eval(f: Callable[[Dual2], Dual2], x: Number) -> Tuple[float, float, float]:
    """Value, first and second derivative of f at x"""
    out = Dual2.lift(f(Dual2.variable(x)))
    return out.value, out.d1, out.d2
