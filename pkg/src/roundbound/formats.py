"""Rounding operators: fixed- and floating-point formats in eleven directions.

A float format rounds to ``{m * 2**e | e >= min_exp, |m| < 2**precision}``
and a fixed format to the multiples of ``2**min_exp``.  Overflow is not
modelled.  The ``*_rel`` operators are under-specified: only a bound on
their relative error is known.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

from .dyadic import Dyadic, ceil_log2, floor_log2, round_scaled
from .interval import EMPTY, Interval, iv_add, iv_mul, iv_sub

__all__ = [
    "DIRECTIONS",
    "NEAREST",
    "NAMED_FLOATS",
    "Format",
    "RelOp",
    "Undefined",
    "float_format",
    "fixed_format",
    "round_value",
    "round_interval",
    "representable_clip",
    "is_representable",
    "abs_error_enclosure",
    "rel_error_enclosure",
    "underspecified_rel_op",
]

DIRECTIONS = ("zr", "aw", "dn", "up", "od", "ne", "no", "nz", "na", "nd", "nu")
NEAREST = frozenset(("ne", "no", "nz", "na", "nd", "nu"))

# (precision, smallest exponent of a subnormal ulp)
NAMED_FLOATS = {
    "ieee_32": (24, -149),
    "ieee_64": (53, -1074),
    "ieee_128": (113, -16494),
    "x86_80": (64, -16445),
}


class Undefined(Exception):
    """The requested error operator is not defined for these inputs."""


@dataclass(frozen=True)
class Format:
    kind: str  # "float" or "fixed"
    direction: str
    min_exp: int
    precision: Optional[int] = None
    name: Optional[str] = field(default=None, compare=False)

    def __post_init__(self):
        if self.direction not in DIRECTIONS:
            raise ValueError(f"unknown rounding direction {self.direction!r}")
        if self.kind == "float" and (self.precision is None or self.precision < 1):
            raise ValueError("float formats need a positive precision")

    def __str__(self):
        if self.kind == "fixed":
            return f"fixed<{self.min_exp},{self.direction}>"
        if self.name:
            return f"float<{self.name},{self.direction}>"
        return f"float<{self.precision},{self.min_exp},{self.direction}>"

    @property
    def is_float(self) -> bool:
        return self.kind == "float"


@dataclass(frozen=True)
class RelOp:
    """``add_rel``/``sub_rel``/``mul_rel``: result within a relative error."""

    kind: str  # "add", "sub" or "mul"
    precision: int
    min_exp: Optional[int] = None

    def __str__(self):
        tail = "" if self.min_exp is None else f",{self.min_exp}"
        return f"{self.kind}_rel<{self.precision}{tail}>"

    def epsilon(self) -> Dyadic:
        return Dyadic(1, -self.precision)


def float_format(precision_or_name, min_exp_or_dir, direction=None) -> Format:
    if direction is None:
        name, direction = precision_or_name, min_exp_or_dir
        p, e = NAMED_FLOATS[name]
        return Format("float", direction, e, p, name)
    return Format("float", direction, int(min_exp_or_dir), int(precision_or_name))


def fixed_format(lsb: int, direction: str) -> Format:
    return Format("fixed", direction, int(lsb))


# -- rounding ----------------------------------------------------------------

def _ratio(x) -> tuple[int, int]:
    if isinstance(x, Dyadic):
        return x.as_ratio()
    x = Fraction(x)
    return x.numerator, x.denominator


def _target_exponent(num: int, den: int, fmt: Format) -> int:
    if fmt.kind == "fixed":
        return fmt.min_exp
    return max(fmt.min_exp, floor_log2(num, den) - fmt.precision + 1)


def round_value(x: Union[Dyadic, Fraction, int], fmt: Format) -> Dyadic:
    """Correctly rounded value of ``x`` in ``fmt``."""
    num, den = _ratio(x)
    if num == 0:
        return Dyadic(0)
    e = _target_exponent(num, den, fmt)
    if e >= 0:
        m = round_scaled(num, den << e, fmt.direction)
    else:
        m = round_scaled(num << -e, den, fmt.direction)
    return Dyadic(m, e)


def is_representable(x: Union[Dyadic, Fraction, int], fmt: Format) -> bool:
    d = x if isinstance(x, Dyadic) else None
    if d is None:
        f = Fraction(x)
        if f.denominator & (f.denominator - 1):
            return False
        d = Dyadic.from_fraction(f)
    if d.is_zero():
        return True
    if d.e < fmt.min_exp:
        return False
    if fmt.kind == "fixed":
        return True
    return d.bits() <= fmt.precision


def round_interval(j: Interval, fmt: Union[Format, RelOp]) -> Interval:
    """Enclosure of ``rnd(x)`` for every ``x`` in ``j`` (rounding is monotone)."""
    if isinstance(fmt, RelOp):
        value, _ = _relop_from_interval(fmt, j)
        return value
    return Interval(round_value(j.lo, fmt), round_value(j.hi, fmt))


def representable_clip(j: Interval, fmt: Format):
    """Tightest interval around the representable numbers of ``j``."""
    if isinstance(fmt, RelOp):
        raise Undefined("under-specified operators have no representable set")
    lo = round_value(j.lo, Format(fmt.kind, "up", fmt.min_exp, fmt.precision))
    hi = round_value(j.hi, Format(fmt.kind, "dn", fmt.min_exp, fmt.precision))
    if hi < lo:
        return EMPTY
    return Interval(lo, hi)


# -- error enclosures ------------------------------------------------------

def _signed(u: Dyadic, direction: str, sign: int) -> Interval:
    """Error interval of width ``u`` for a directed mode; ``sign`` of the argument."""
    z = Dyadic(0)
    if direction == "dn":
        return Interval(-u, z)
    if direction == "up":
        return Interval(z, u)
    if direction == "zr" and sign:
        return Interval(-u, z) if sign > 0 else Interval(z, u)
    if direction == "aw" and sign:
        return Interval(z, u) if sign > 0 else Interval(-u, z)
    return Interval(-u, u)


def _info_sign(info, on: str) -> int:
    """Known sign of the rounded argument, or 0."""
    if info is None or info[0] != "BND":
        return 0
    j = info[1]
    if on == "argument":
        if j.lo.sign() >= 0:
            return 1
        if j.hi.sign() <= 0:
            return -1
        return 0
    if j.lo.sign() > 0:
        return 1
    if j.hi.sign() < 0:
        return -1
    return 0


def _info_mag(info) -> Dyadic:
    kind, j = info
    if kind == "ABS":
        return j.hi
    return j.mag()


def abs_error_enclosure(fmt, info=None, on: str = "argument") -> Interval:
    """Interval containing ``rnd(x) - x`` for every ``x`` compatible with ``info``.

    ``info`` is ``None`` or a pair ``("BND"|"ABS", interval)`` describing
    either the argument ``x`` (``on="argument"``) or the rounded value
    (``on="result"``).
    """
    if isinstance(fmt, RelOp):
        if info is None or info[0] != "BND" or on != "argument":
            raise Undefined("relative operators need a range of their argument")
        eps = fmt.epsilon()
        _relop_from_interval(fmt, info[1])
        return iv_mul(info[1], Interval(-eps, eps))
    if fmt.kind == "fixed":
        u = Dyadic(1, fmt.min_exp)
    else:
        if info is None:
            raise Undefined("float formats have no absolute error bound without a range")
        mag = _info_mag(info)
        if mag.is_zero() and on == "argument":
            return Interval(0, 0)
        if mag.is_zero():
            big = fmt.min_exp
        else:
            num, den = mag.as_ratio()
            big = ceil_log2(num, den) - fmt.precision
            if on == "result":
                big += 1
        u = Dyadic(1, max(fmt.min_exp, big))
    if fmt.direction in NEAREST:
        h = u.shift(-1)
        return Interval(-h, h)
    return _signed(u, fmt.direction, _info_sign(info, on))


def rel_error_enclosure(fmt, info, on: str = "argument") -> Interval:
    """Interval containing ``(rnd(x) - x) / x`` for every compatible ``x``."""
    if isinstance(fmt, RelOp):
        eps = fmt.epsilon()
        if fmt.min_exp is not None:
            if info is None or _info_mig(info) < Dyadic(1, fmt.min_exp):
                raise Undefined("result may fall below the minimum exponent")
        return Interval(-eps, eps)
    if fmt.kind != "float" or info is None:
        raise Undefined("relative error needs a float format and a range")
    mig = _info_mig(info)
    threshold = Dyadic(1, fmt.min_exp + fmt.precision - (1 if on == "argument" else 0))
    if mig.is_zero() or mig < threshold:
        raise Undefined("range reaches zero or subnormal numbers")
    if fmt.direction in NEAREST:
        eps = Dyadic(1, -fmt.precision)
        return Interval(-eps, eps)
    eps = Dyadic(1, 1 - fmt.precision)
    sign = _info_sign(info, "argument") if info[0] == "BND" else 0
    d = fmt.direction
    if d == "zr":
        return Interval(-eps, Dyadic(0))
    if d == "aw":
        return Interval(Dyadic(0), eps)
    if d == "dn" and sign:
        return Interval(-eps, Dyadic(0)) if sign > 0 else Interval(Dyadic(0), eps)
    if d == "up" and sign:
        return Interval(Dyadic(0), eps) if sign > 0 else Interval(-eps, Dyadic(0))
    return Interval(-eps, eps)


def _info_mig(info) -> Dyadic:
    kind, j = info
    if kind == "ABS":
        return j.lo
    return j.mig()


def _relop_from_interval(op: RelOp, exact: Interval):
    if op.min_exp is not None and exact.mig() < Dyadic(1, op.min_exp):
        raise Undefined("result may fall below the minimum exponent")
    eps = op.epsilon()
    one = Dyadic(1)
    return iv_mul(exact, Interval(one - eps, one + eps)), Interval(-eps, eps)


def underspecified_rel_op(kind: str, precision: int, min_exp: Optional[int],
                          a: Interval, b: Interval):
    """Value and relative-error enclosures of ``kind_rel<precision, min_exp>(a, b)``.

    Returns ``None`` when a minimum exponent is given and the exact result
    may be smaller than ``2**min_exp``: no fact is produced then.
    """
    exact = {"add": iv_add, "sub": iv_sub, "mul": iv_mul}[kind](a, b)
    try:
        return _relop_from_interval(RelOp(kind, precision, min_exp), exact)
    except Undefined:
        return None
