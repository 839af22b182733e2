"""Closed intervals with dyadic endpoints.

Addition, subtraction and multiplication are exact.  Division, inverse
and square root round their endpoints outward to a caller-supplied number
of mantissa bits.
"""

from __future__ import annotations

from fractions import Fraction
from math import isqrt

from .dyadic import Dyadic, rational_to_dyadic

__all__ = [
    "Interval",
    "EMPTY",
    "DomainError",
    "iv_neg",
    "iv_add",
    "iv_sub",
    "iv_mul",
    "iv_div",
    "iv_inv",
    "iv_sqrt",
    "iv_abs",
    "iv_rel_compose",
    "iv_intersect",
    "iv_hull",
    "iv_subset",
    "iv_contains_zero",
    "sqrt_down",
    "sqrt_up",
]

ZERO = Dyadic(0)
ONE = Dyadic(1)


class DomainError(ArithmeticError):
    """A theorem precondition does not hold (0 in a divisor, negative sqrt...)."""


class Interval:
    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi=None):
        lo = Dyadic.coerce(lo)
        hi = lo if hi is None else Dyadic.coerce(hi)
        if hi < lo:
            raise ValueError(f"inverted interval [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    def __setattr__(self, name, value):
        raise AttributeError("Interval is immutable")

    def __copy__(self):
        return self

    def __deepcopy__(self, memo):
        return self

    def __eq__(self, other):
        if not isinstance(other, Interval):
            return NotImplemented
        return self.lo == other.lo and self.hi == other.hi

    def __hash__(self):
        return hash((self.lo, self.hi))

    def __repr__(self):
        return f"[{self.lo}, {self.hi}]"

    def __contains__(self, x) -> bool:
        if isinstance(x, Dyadic):
            return self.lo <= x <= self.hi
        x = Fraction(x)
        return self.lo.to_fraction() <= x <= self.hi.to_fraction()

    def mag(self) -> Dyadic:
        """Largest absolute value in the interval."""
        return max(-self.lo, self.hi)

    def mig(self) -> Dyadic:
        """Smallest absolute value in the interval."""
        if self.lo.sign() > 0:
            return self.lo
        if self.hi.sign() < 0:
            return -self.hi
        return ZERO

    def width(self) -> Dyadic:
        return self.hi - self.lo

    def is_point(self) -> bool:
        return self.lo == self.hi

    def bits(self) -> int:
        return self.lo.bits() + self.hi.bits()


class _Empty:
    __slots__ = ()

    def __repr__(self):
        return "EMPTY"

    def __bool__(self):
        return False


EMPTY = _Empty()


def iv_neg(a: Interval) -> Interval:
    return Interval(-a.hi, -a.lo)


def iv_add(a: Interval, b: Interval) -> Interval:
    return Interval(a.lo + b.lo, a.hi + b.hi)


def iv_sub(a: Interval, b: Interval) -> Interval:
    return iv_add(a, iv_neg(b))


def iv_mul(a: Interval, b: Interval) -> Interval:
    ps = (a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi)
    return Interval(min(ps), max(ps))


def _outward(lo: Fraction, hi: Fraction, precision: int) -> Interval:
    return Interval(rational_to_dyadic(lo, "down", precision),
                    rational_to_dyadic(hi, "up", precision))


def iv_div(a: Interval, b: Interval, precision: int) -> Interval:
    if iv_contains_zero(b):
        raise DomainError("division by an interval containing zero")
    qs = [x.to_fraction() / y.to_fraction()
          for x in (a.lo, a.hi) for y in (b.lo, b.hi)]
    return _outward(min(qs), max(qs), precision)


def iv_inv(b: Interval, precision: int) -> Interval:
    if iv_contains_zero(b):
        raise DomainError("inverse of an interval containing zero")
    return _outward(1 / b.hi.to_fraction(), 1 / b.lo.to_fraction(), precision)


def _isqrt_scaled(x: Dyadic, precision: int) -> tuple[int, int, bool]:
    # x = M * 2**(2k) with M an integer of at least 2*precision+2 bits
    m, e = x.m, x.e
    k = (e - 2 * precision - 2 + m.bit_length()) // 2
    k = min(k, e // 2)
    big = m << (e - 2 * k)
    r = isqrt(big)
    return r, k, r * r == big


def sqrt_down(x: Dyadic, precision: int) -> Dyadic:
    if x.sign() < 0:
        raise DomainError("square root of a negative number")
    if x.is_zero():
        return ZERO
    r, k, _ = _isqrt_scaled(x, precision)
    return rational_to_dyadic(Dyadic(r, k), "down", precision)


def sqrt_up(x: Dyadic, precision: int) -> Dyadic:
    if x.sign() < 0:
        raise DomainError("square root of a negative number")
    if x.is_zero():
        return ZERO
    r, k, exact = _isqrt_scaled(x, precision)
    if not exact:
        r += 1
    return rational_to_dyadic(Dyadic(r, k), "up", precision)


def iv_sqrt(a: Interval, precision: int) -> Interval:
    if a.lo.sign() < 0:
        raise DomainError("square root of an interval with negative values")
    return Interval(sqrt_down(a.lo, precision), sqrt_up(a.hi, precision))


def iv_abs(a: Interval) -> Interval:
    if a.lo.sign() >= 0:
        return a
    if a.hi.sign() <= 0:
        return iv_neg(a)
    return Interval(ZERO, max(-a.lo, a.hi))


def iv_rel_compose(a: Interval, b: Interval) -> Interval:
    """Enclosure of ``x + y + x*y`` for ``x`` in ``a``, ``y`` in ``b``."""
    minus_one = Dyadic(-1)
    if a.lo < minus_one or b.lo < minus_one:
        raise DomainError("relative composition needs both intervals >= -1")
    return Interval(a.lo + b.lo + a.lo * b.lo, a.hi + b.hi + a.hi * b.hi)


def iv_intersect(a: Interval, b: Interval):
    lo = max(a.lo, b.lo)
    hi = min(a.hi, b.hi)
    if hi < lo:
        return EMPTY
    return Interval(lo, hi)


def iv_hull(a: Interval, b: Interval) -> Interval:
    return Interval(min(a.lo, b.lo), max(a.hi, b.hi))


def iv_subset(a: Interval, b: Interval) -> bool:
    return b.lo <= a.lo and a.hi <= b.hi


def iv_contains_zero(a: Interval) -> bool:
    return a.lo.sign() <= 0 <= a.hi.sign()
