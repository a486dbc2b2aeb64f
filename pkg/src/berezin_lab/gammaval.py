"""Pole-aware Gamma arithmetic for coefficient formulas.

A ``GammaValue`` models the leading behavior c * eps^(zero - pole) of a
product of Gamma factors as a regularizing offset eps -> 0 is added to the
arguments.  Near a pole, Gamma(-m + eps) ~ (-1)^m / (m! eps); all factors
use this unit-rate convention in their own argument, which is enough to
cancel poles against zeros order by order and to read off finite limits
up to the direction of approach.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import isfinite, log

import numpy as np
from scipy.special import gammaln, gammasgn

from .errors import InvalidParams, UncancelledPole

_INT_TOL = 1e-9


@dataclass(frozen=True)
class GammaValue:
    """Leading coefficient (sign, log magnitude) and net pole/zero orders."""

    log_abs: float
    sign: int
    pole_order: int = 0
    zero_order: int = 0

    def __post_init__(self) -> None:
        if self.sign not in (-1, 1):
            raise InvalidParams("sign must be +1 or -1")
        if self.pole_order < 0 or self.zero_order < 0:
            raise InvalidParams("orders must be nonnegative")
        if self.pole_order and self.zero_order:
            raise InvalidParams("orders must be reduced; use _make")

    @property
    def is_pole(self) -> bool:
        return self.pole_order > 0

    @property
    def is_zero(self) -> bool:
        return self.zero_order > 0

    def __mul__(self, other: "GammaValue") -> "GammaValue":
        return _make(
            self.log_abs + other.log_abs,
            self.sign * other.sign,
            self.pole_order + other.pole_order,
            self.zero_order + other.zero_order,
        )

    def __truediv__(self, other: "GammaValue") -> "GammaValue":
        return self * other.reciprocal()

    def reciprocal(self) -> "GammaValue":
        return _make(-self.log_abs, self.sign, self.zero_order, self.pole_order)

    def to_float(self) -> float:
        """Collapse to a float: poles raise, zeros are exactly 0."""
        if self.is_pole:
            raise UncancelledPole(f"net pole of order {self.pole_order}")
        if self.is_zero:
            return 0.0
        return self.sign * float(np.exp(self.log_abs))


def _make(log_abs: float, sign: int, pole: int, zero: int) -> GammaValue:
    net = pole - zero
    return GammaValue(log_abs, sign, max(net, 0), max(-net, 0))


def one() -> GammaValue:
    return GammaValue(0.0, 1)


def from_real(x: float) -> GammaValue:
    """Wrap a plain real number; an exact zero becomes a first-order zero."""
    if not isfinite(x):
        raise InvalidParams(f"cannot wrap non-finite value {x!r}")
    if x == 0.0:
        return GammaValue(0.0, 1, zero_order=1)
    return GammaValue(log(abs(x)), 1 if x > 0 else -1)


def nearest_nonpositive_int(x: float, tol: float = _INT_TOL):
    """The nonpositive integer within ``tol`` of x, or None."""
    m = round(x)
    if m <= 0 and abs(x - m) <= tol:
        return int(m)
    return None


def gamma_value(x: float, tol: float = _INT_TOL) -> GammaValue:
    """Gamma(x) as a GammaValue; at x = -m it is the unit-rate pole."""
    m = nearest_nonpositive_int(x, tol)
    if m is not None:
        mm = -m
        return GammaValue(-float(gammaln(mm + 1)), 1 if mm % 2 == 0 else -1, pole_order=1)
    return GammaValue(float(gammaln(x)), int(gammasgn(x)))


def pochhammer_value(a: float, m: int, tol: float = _INT_TOL) -> GammaValue:
    """Rising factorial (a)_m = a (a+1) ... (a+m-1), factor by factor.

    Factors within ``tol`` of zero are counted as unit-rate zeros, so the
    result composes correctly with Gamma poles.
    """
    if m < 0:
        raise InvalidParams("Pochhammer length must be nonnegative")
    out = one()
    for i in range(m):
        out = out * from_real_snapped(a + i, tol)
    return out


def from_real_snapped(x: float, tol: float = _INT_TOL) -> GammaValue:
    """As ``from_real`` but values within ``tol`` of 0 count as zeros."""
    if abs(x) <= tol:
        return GammaValue(0.0, 1, zero_order=1)
    return from_real(x)
