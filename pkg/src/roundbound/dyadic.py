"""Exact dyadic fractions ``m * 2**e`` and number-literal parsing.

Exact rationals are plain :class:`fractions.Fraction` values; they only
show up for user constants such as ``1.3`` that have no finite binary
expansion.  Interval endpoints are always :class:`Dyadic`.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Union

__all__ = [
    "Dyadic",
    "NumberSyntaxError",
    "parse_number",
    "rational_to_dyadic",
    "is_dyadic",
    "floor_log2",
    "ceil_log2",
    "round_scaled",
]


def _trailing_zeros(n: int) -> int:
    return (n & -n).bit_length() - 1


class Dyadic:
    """An exact number ``mantissa * 2**exponent`` kept in canonical form.

    The mantissa is odd, or zero with exponent 0, so two dyadics are equal
    exactly when their fields are equal.
    """

    __slots__ = ("m", "e")

    def __init__(self, mantissa: int, exponent: int = 0):
        mantissa = int(mantissa)
        exponent = int(exponent)
        if mantissa == 0:
            exponent = 0
        else:
            tz = _trailing_zeros(mantissa)
            if tz:
                mantissa >>= tz
                exponent += tz
        object.__setattr__(self, "m", mantissa)
        object.__setattr__(self, "e", exponent)

    def __setattr__(self, name, value):
        raise AttributeError("Dyadic is immutable")

    def __copy__(self):
        return self

    def __deepcopy__(self, memo):
        return self

    # construction helpers

    @classmethod
    def from_fraction(cls, x: Fraction) -> "Dyadic":
        """Exact conversion; raises ``ValueError`` when ``x`` is not dyadic."""
        x = Fraction(x)
        den = x.denominator
        if den & (den - 1):
            raise ValueError(f"{x} is not a dyadic fraction")
        return cls(x.numerator, -(den.bit_length() - 1))

    @classmethod
    def coerce(cls, x: Union["Dyadic", int, Fraction]) -> "Dyadic":
        if isinstance(x, Dyadic):
            return x
        if isinstance(x, int):
            return cls(x, 0)
        return cls.from_fraction(x)

    # views

    @property
    def mantissa(self) -> int:
        return self.m

    @property
    def exponent(self) -> int:
        return self.e

    def to_fraction(self) -> Fraction:
        if self.e >= 0:
            return Fraction(self.m << self.e)
        return Fraction(self.m, 1 << -self.e)

    def as_ratio(self) -> tuple[int, int]:
        """``(num, den)`` with ``den`` a positive power of two."""
        if self.e >= 0:
            return self.m << self.e, 1
        return self.m, 1 << -self.e

    def bits(self) -> int:
        """Number of significant bits of the mantissa."""
        return abs(self.m).bit_length()

    def sign(self) -> int:
        return (self.m > 0) - (self.m < 0)

    def is_zero(self) -> bool:
        return self.m == 0

    # arithmetic (exact, closed)

    def __add__(self, other: "Dyadic") -> "Dyadic":
        if not isinstance(other, Dyadic):
            return NotImplemented
        if self.m == 0:
            return other
        if other.m == 0:
            return self
        if self.e <= other.e:
            return Dyadic(self.m + (other.m << (other.e - self.e)), self.e)
        return Dyadic((self.m << (self.e - other.e)) + other.m, other.e)

    def __neg__(self) -> "Dyadic":
        return Dyadic(-self.m, self.e)

    def __sub__(self, other: "Dyadic") -> "Dyadic":
        if not isinstance(other, Dyadic):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other: "Dyadic") -> "Dyadic":
        if not isinstance(other, Dyadic):
            return NotImplemented
        return Dyadic(self.m * other.m, self.e + other.e)

    def __abs__(self) -> "Dyadic":
        return self if self.m >= 0 else -self

    def shift(self, k: int) -> "Dyadic":
        """Multiply by ``2**k``."""
        return Dyadic(self.m, self.e + k)

    # comparisons

    def cmp(self, other: "Dyadic") -> int:
        if self.m == other.m and self.e == other.e:
            return 0
        sa, sb = self.sign(), other.sign()
        if sa != sb:
            return -1 if sa < sb else 1
        e = min(self.e, other.e)
        a = self.m << (self.e - e)
        b = other.m << (other.e - e)
        return (a > b) - (a < b)

    def __eq__(self, other):
        if isinstance(other, Dyadic):
            return self.m == other.m and self.e == other.e
        if isinstance(other, (int, Fraction)):
            return self.to_fraction() == other
        return NotImplemented

    def __hash__(self):
        return hash((self.m, self.e))

    def __lt__(self, other):
        if not isinstance(other, Dyadic):
            return NotImplemented
        return self.cmp(other) < 0

    def __le__(self, other):
        if not isinstance(other, Dyadic):
            return NotImplemented
        return self.cmp(other) <= 0

    def __gt__(self, other):
        if not isinstance(other, Dyadic):
            return NotImplemented
        return self.cmp(other) > 0

    def __ge__(self, other):
        if not isinstance(other, Dyadic):
            return NotImplemented
        return self.cmp(other) >= 0

    def __repr__(self):
        return f"Dyadic({self.m}, {self.e})"

    def __str__(self):
        return f"{self.m}b{self.e}"

    def __reduce__(self):
        return (Dyadic, (self.m, self.e))

    def to_decimal(self, digits: int = 17) -> str:
        """Short decimal rendering, prefixed with ``~`` when inexact."""
        f = self.to_fraction()
        if f.denominator == 1:
            return str(f.numerator)
        # exact decimal expansion exists for every dyadic; use it when short
        k = -self.e
        exact = f * 10 ** k
        s = str(abs(exact.numerator)).rjust(k + 1, "0")
        text = s[:-k].lstrip("0") or "0"
        frac = s[-k:].rstrip("0")
        sign = "-" if f < 0 else ""
        if len(frac) <= digits:
            return f"{sign}{text}.{frac}"
        return "~" + format(float(f), f".{digits}g")


# -- integer helpers shared by the rounding code ----------------------------

def floor_log2(num: int, den: int = 1) -> int:
    """``floor(log2(|num/den|))`` for a nonzero rational."""
    num = abs(num)
    k = num.bit_length() - den.bit_length()
    # now 2**(k-1) < num/den < 2**(k+1)
    if k >= 0:
        if num < (den << k):
            k -= 1
    elif (num << -k) < den:
        k -= 1
    return k


def ceil_log2(num: int, den: int = 1) -> int:
    """``ceil(log2(|num/den|))`` for a nonzero rational."""
    k = floor_log2(num, den)
    num = abs(num)
    exact = num == (den << k) if k >= 0 else (num << -k) == den
    return k if exact else k + 1


def round_scaled(num: int, den: int, direction: str) -> int:
    """Round the rational ``num/den`` (``den > 0``) to an integer.

    ``direction`` is one of the eleven mode names of :mod:`formats`.
    """
    q, r = divmod(num, den)
    if r == 0:
        return q
    lo, hi = q, q + 1
    positive = num > 0
    if direction == "dn":
        return lo
    if direction == "up":
        return hi
    if direction == "zr":
        return lo if positive else hi
    if direction == "aw":
        return hi if positive else lo
    if direction == "od":
        return lo if lo & 1 else hi
    twice = 2 * r
    if twice < den:
        return lo
    if twice > den:
        return hi
    if direction == "ne":
        return lo if lo & 1 == 0 else hi
    if direction == "no":
        return lo if lo & 1 else hi
    if direction == "nz":
        return lo if positive else hi
    if direction == "na":
        return hi if positive else lo
    if direction == "nd":
        return lo
    if direction == "nu":
        return hi
    raise ValueError(f"unknown rounding direction {direction!r}")


# -- literals ----------------------------------------------------------------

class NumberSyntaxError(ValueError):
    def __init__(self, message: str, position: int = 0):
        super().__init__(f"{message} (at offset {position})")
        self.position = position


_NUMBER_RE = re.compile(
    r"""
    (?P<sign>[+-]?)
    (?P<int>[0-9]*)
    (?:\.(?P<frac>[0-9]*))?
    (?:(?P<kind>[eEbB])(?P<exp>[+-]?[0-9]+))?
    \Z""",
    re.VERBOSE,
)


def parse_number(text: str) -> Fraction:
    """Exact value of a literal such as ``-0.1``, ``1e-6`` or ``1b-26``."""
    m = _NUMBER_RE.match(text.strip())
    if not m or not (m.group("int") or m.group("frac")):
        raise NumberSyntaxError(f"malformed number {text!r}", 0)
    digits = (m.group("int") or "") + (m.group("frac") or "")
    value = Fraction(int(digits), 10 ** len(m.group("frac") or ""))
    kind = (m.group("kind") or "").lower()
    if kind:
        exp = int(m.group("exp"))
        base = 10 if kind == "e" else 2
        value *= Fraction(base) ** exp
    return -value if m.group("sign") == "-" else value


def is_dyadic(x: Fraction) -> bool:
    d = Fraction(x).denominator
    return d & (d - 1) == 0


def rational_to_dyadic(x, direction: str, precision: int) -> Dyadic:
    """Round ``x`` to a dyadic with at most ``precision`` mantissa bits.

    ``direction`` is ``"down"``/``"up"`` (or any rounding-mode name).
    """
    if precision < 2:
        raise ValueError("precision must be at least 2")
    direction = {"down": "dn", "up": "up"}.get(direction, direction)
    if isinstance(x, Dyadic):
        if x.bits() <= precision:
            return x
        num, den = x.as_ratio()
    else:
        x = Fraction(x)
        num, den = x.numerator, x.denominator
    if num == 0:
        return Dyadic(0)
    e = floor_log2(num, den) - precision + 1
    if e >= 0:
        scaled = round_scaled(num, den << e, direction)
    else:
        scaled = round_scaled(num << -e, den, direction)
    return Dyadic(scaled, e)
