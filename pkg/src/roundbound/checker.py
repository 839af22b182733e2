"""Independent certificate checker.

Nothing here calls the prover.  Every lemma is re-validated with exact
rational arithmetic against a small table of side conditions, with a
rounding routine of its own.  Rewrite lemmas are re-instantiated from the
rule table and the recorded substitution.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from math import floor
from typing import Callable, Dict, List, Optional, Tuple

from .certificate import Block, Certificate, CertificateSyntaxError, Lemma, parse_certificate
from .expr import Expr, ExprTable
from .formats import DIRECTIONS, NAMED_FLOATS, NEAREST, Format, RelOp
from .poly import ring_equal
from .rules import METAVARS, RULES_BY_NAME, compiled, instantiate

__all__ = ["Report", "Checker", "check", "check_text", "round_rational"]

_ARITY = {"neg": 1, "abs": 1, "sqrt": 1, "add": 2, "sub": 2, "mul": 2, "div": 2, "fma": 3}


class _Fail(Exception):
    pass


class StructuralError(Exception):
    pass


@dataclass
class Report:
    valid: bool
    structural: bool = False
    message: str = ""
    lemmas: int = 0
    assumed: List[int] = field(default_factory=list)

    @property
    def verdict(self) -> str:
        if self.structural:
            return f"structural error: {self.message}"
        if not self.valid:
            return f"invalid: {self.message}"
        if self.assumed:
            n = len(self.assumed)
            return f"valid modulo {n} assumed identit{'y' if n == 1 else 'ies'}"
        return "valid"


# -- arithmetic helpers ----------------------------------------------------------

def _floor_log2(x: Fraction) -> int:
    k = x.numerator.bit_length() - x.denominator.bit_length()
    if Fraction(2) ** k > x:
        k -= 1
    return k


def _pow2(k: int) -> Fraction:
    return Fraction(2) ** k


def round_rational(x: Fraction, kind: str, precision: Optional[int], min_exp: int,
                   direction: str) -> Fraction:
    """Round ``x`` to a fixed or float format."""
    if x == 0:
        return x
    if kind == "float":
        t = max(min_exp, _floor_log2(abs(x)) - precision + 1)
    else:
        t = min_exp
    s = x / _pow2(t)
    q = floor(s)
    r = s - q
    if r == 0:
        return x
    up = q + 1
    pos = x > 0
    d = direction
    if d in NEAREST:
        if r != Fraction(1, 2):
            pick = q if r < Fraction(1, 2) else up
        elif d == "ne":
            pick = q if q % 2 == 0 else up
        elif d == "no":
            pick = q if q % 2 else up
        elif d == "nz":
            pick = q if pos else up
        elif d == "na":
            pick = up if pos else q
        elif d == "nd":
            pick = q
        else:
            pick = up
    elif d == "dn":
        pick = q
    elif d == "up":
        pick = up
    elif d == "zr":
        pick = q if pos else up
    elif d == "aw":
        pick = up if pos else q
    else:  # od
        pick = q if q % 2 else up
    return pick * _pow2(t)


def _rnd(x: Fraction, fmt: Format, direction: Optional[str] = None) -> Fraction:
    return round_rational(x, fmt.kind, fmt.precision, fmt.min_exp, direction or fmt.direction)


def _mul(a, b):
    ps = [x * y for x in a for y in b]
    return min(ps), max(ps)


def _absiv(j):
    lo, hi = j
    if lo >= 0:
        return j
    if hi <= 0:
        return -hi, -lo
    return Fraction(0), max(-lo, hi)


def _mig(j):
    return _absiv(j)[0]


def _inter(a, b):
    lo, hi = max(a[0], b[0]), min(a[1], b[1])
    return (lo, hi) if lo <= hi else None


def _err_abs(fmt: Format, info, on: str):
    """Enclosure of ``rnd(x) - x`` given a BND/ABS range of ``x`` or ``rnd(x)``."""
    if fmt.kind == "fixed":
        u = _pow2(fmt.min_exp)
    else:
        if info is None:
            raise _Fail("float rounding error needs a range")
        kind, j = info
        m = j[1] if kind == "ABS" else max(-j[0], j[1])
        if m == 0:
            if on == "argument":
                return Fraction(0), Fraction(0)
            k = fmt.min_exp
        else:
            e = _floor_log2(m)
            if _pow2(e) != m:
                e += 1
            k = max(fmt.min_exp, e - fmt.precision + (1 if on == "result" else 0))
        u = _pow2(k)
    if fmt.direction in NEAREST:
        return -u / 2, u / 2
    sign = 0
    if info is not None and info[0] == "BND":
        lo, hi = info[1]
        if on == "argument":
            sign = 1 if lo >= 0 else (-1 if hi <= 0 else 0)
        else:
            sign = 1 if lo > 0 else (-1 if hi < 0 else 0)
    z = Fraction(0)
    d = fmt.direction
    if d == "dn" or (d == "zr" and sign > 0) or (d == "aw" and sign < 0):
        return -u, z
    if d == "up" or (d == "zr" and sign < 0) or (d == "aw" and sign > 0):
        return z, u
    return -u, u


def _err_rel(fmt: Format, info, on: str):
    if fmt.kind != "float":
        raise _Fail("relative error of a fixed format")
    kind, j = info
    mig = j[0] if kind == "ABS" else _mig(j)
    need = _pow2(fmt.min_exp + fmt.precision - (1 if on == "argument" else 0))
    if mig <= 0 or mig < need:
        raise _Fail("range reaches zero or subnormal numbers")
    z = Fraction(0)
    if fmt.direction in NEAREST:
        eps = _pow2(-fmt.precision)
        return -eps, eps
    eps = _pow2(1 - fmt.precision)
    d = fmt.direction
    sign = 0
    if kind == "BND":
        sign = 1 if j[0] > 0 else -1
    if d == "zr" or (d == "dn" and sign > 0) or (d == "up" and sign < 0):
        return -eps, z
    if d == "aw" or (d == "up" and sign > 0) or (d == "dn" and sign < 0):
        return z, eps
    return -eps, eps


# -- side conditions ------------------------------------------------------------------

def _need(cond, msg="side condition fails"):
    if not cond:
        raise _Fail(msg)


def _encl(lem_value, lo, hi):
    _need(lem_value[0] <= lo and hi <= lem_value[1], "value does not enclose the bound")


class _Lem:
    """A lemma with its subject resolved and value converted to rationals."""

    __slots__ = ("raw", "kind", "subject", "value")

    def __init__(self, raw: Lemma, subject: Expr):
        self.raw = raw
        self.kind = raw.kind
        self.subject = subject
        v = raw.value
        if raw.kind in ("BND", "ABS"):
            self.value = (v.lo.to_fraction(), v.hi.to_fraction())
        elif raw.kind in ("LE", "GE"):
            self.value = v.to_fraction()
        else:
            self.value = v


def _ops(ops, *spec):
    _need(len(ops) == len(spec), "wrong number of operands")
    for o, (kind, e) in zip(ops, spec):
        _need(o.kind == kind and o.subject is e, "operand does not match the theorem")
    return [o.value for o in ops]


def _op(e: Expr, op: str):
    _need(e.op == op, f"subject is not a {op} node")
    return e.args


def _rounded(e: Expr, relative: bool):
    """``(r, a)`` for subjects ``r - a`` (or ``(r - a) / a``) with ``r = round(a)``."""
    if relative:
        num, den = _op(e, "div")
        r, a = _op(num, "sub")
        _need(a is den, "malformed relative error")
    else:
        r, a = _op(e, "sub")
    _need(r.op == "round" and r.args[0] is a, "subject is not a rounding error")
    return r, a


def _sqrt_ok(iv, j):
    lo, hi = iv
    _need(j[0] >= 0, "square root of a possibly negative range")
    _need(lo <= 0 or lo * lo <= j[0], "lower square root bound too high")
    _need(hi >= 0 and j[1] <= hi * hi, "upper square root bound too low")


def _div(j, k):
    _need(k[0] > 0 or k[1] < 0, "divisor range contains zero")
    qs = [x / y for x in j for y in k]
    return min(qs), max(qs)


_ARITH = {
    "add": lambda j, k: (j[0] + k[0], j[1] + k[1]),
    "sub": lambda j, k: (j[0] - k[1], j[1] - k[0]),
    "mul": _mul,
    "div": _div,
}


def _c_bin(op):
    def check(ck, lem, e, ops):
        a, b = _op(e, op)
        j, k = _ops(ops, ("BND", a), ("BND", b))
        _encl(lem.value, *_ARITH[op](j, k))
    return check


def _c_hyp(ck, lem, e, ops):
    _need(not ops)
    try:
        kind, sub, lo, hi = ck.seq.hyps[int(lem.raw.params.get("hyp", ""))]
    except (ValueError, IndexError):
        raise _Fail("no such hypothesis") from None
    _need(ck.exprs[sub] is e, "hypothesis is about another expression")
    if kind == "in":
        _need(lem.kind == "BND")
        _encl(lem.value, lo, hi)
    elif kind == "le":
        _need(lem.kind == "LE" and lem.value >= hi)
    else:
        _need(lem.kind == "GE" and lem.value <= lo)


def _c_tile(ck, lem, e, ops):
    _need(not ops and lem.kind == "BND")
    t = ck.tiles.get(e.uid)
    _need(t is not None, "not inside a tile of this expression")
    _encl(lem.value, *t)


def _c_constant(ck, lem, e, ops):
    _need(not ops and e.op == "const")
    _encl(lem.value, e.value, e.value)


def _c_neg(ck, lem, e, ops):
    (j,) = _ops(ops, ("BND", _op(e, "neg")[0]))
    _encl(lem.value, -j[1], -j[0])


def _c_abs(ck, lem, e, ops):
    (j,) = _ops(ops, ("BND", _op(e, "abs")[0]))
    _encl(lem.value, *_absiv(j))


def _c_abs_to_bnd(ck, lem, e, ops):
    (k,) = _ops(ops, ("ABS", _op(e, "abs")[0]))
    _encl(lem.value, *k)


def _c_sqrt(ck, lem, e, ops):
    (j,) = _ops(ops, ("BND", _op(e, "sqrt")[0]))
    _sqrt_ok(lem.value, j)


def _c_sub_refl(ck, lem, e, ops):
    a, b = _op(e, "sub")
    _need(a is b and not ops)
    _encl(lem.value, 0, 0)


def _c_div_refl(ck, lem, e, ops):
    a, b = _op(e, "div")
    _need(a is b)
    (k,) = _ops(ops, ("ABS", a))
    _need(k[0] > 0, "divisor may be zero")
    _encl(lem.value, 1, 1)


def _c_square(ck, lem, e, ops):
    a, b = _op(e, "mul")
    _need(a is b)
    (j,) = _ops(ops, ("BND", a))
    m = _absiv(j)
    _encl(lem.value, m[0] * m[0], m[1] * m[1])


def _c_fma(ck, lem, e, ops):
    a, b, c = _op(e, "fma")
    j, k, l = _ops(ops, ("BND", a), ("BND", b), ("BND", c))
    p = _mul(j, k)
    _encl(lem.value, p[0] + l[0], p[1] + l[1])


def _c_compose(ck, lem, e, ops):
    s, p = _op(e, "add")
    a, b = _op(s, "add")
    _need(p.op == "mul" and p.args[0] is a and p.args[1] is b, "not of the form a+b+a*b")
    j, k = _ops(ops, ("BND", a), ("BND", b))
    # x + y + xy = (1 + x)(1 + y) - 1
    lo, hi = _mul((1 + j[0], 1 + j[1]), (1 + k[0], 1 + k[1]))
    _encl(lem.value, lo - 1, hi - 1)


def _format_of(e: Expr, relop: bool):
    _need(e.op == "round", "subject is not rounded")
    _need(isinstance(e.fmt, RelOp) == relop, "wrong kind of rounding operator")
    return e.fmt


def _c_rnd_bnd(ck, lem, e, ops):
    fmt = _format_of(e, False)
    (j,) = _ops(ops, ("BND", e.args[0]))
    _encl(lem.value, _rnd(j[0], fmt), _rnd(j[1], fmt))


def _clip(e, ops):
    fmt = _format_of(e, False)
    (j,) = _ops(ops, ("BND", e))
    return _rnd(j[0], fmt, "up"), _rnd(j[1], fmt, "dn")


def _c_rnd_clip(ck, lem, e, ops):
    lo, hi = _clip(e, ops)
    _need(lo <= hi, "no representable number in range")
    _encl(lem.value, lo, hi)


def _c_absurd_clip(ck, lem, e, ops):
    lo, hi = _clip(e, ops)
    _need(lo > hi, "the range contains representable numbers")


def _relop_range(fmt: RelOp, j):
    if fmt.min_exp is not None:
        _need(_mig(j) >= _pow2(fmt.min_exp), "range may fall below the minimum exponent")


def _c_rel_round(ck, lem, e, ops):
    fmt = _format_of(e, True)
    inner = e.args[0]
    _need(inner.op == fmt.kind, "relative operator over the wrong operation")
    (j,) = _ops(ops, ("BND", inner))
    _relop_range(fmt, j)
    eps = _pow2(-fmt.precision)
    _encl(lem.value, *_mul(j, (1 - eps, 1 + eps)))


def _c_err(on, kind, relative=False):
    def check(ck, lem, e, ops):
        r, a = _rounded(e, relative)
        fmt = _format_of(r, False)
        if kind is None:
            _need(fmt.kind == "fixed" and not ops)
            info = None
        else:
            (v,) = _ops(ops, (kind, a if on == "argument" else r))
            info = (kind, v)
        bound = _err_rel(fmt, info, on) if relative else _err_abs(fmt, info, on)
        _encl(lem.value, *bound)
    return check


def _c_err_exact(ck, lem, e, ops):
    r, a = _rounded(e, False)
    fmt = _format_of(r, False)
    f, q = _ops(ops, ("FIX", a), ("FLT", a))
    _need(f >= fmt.min_exp, "argument may be finer than the format")
    if fmt.kind == "float":
        _need(q <= fmt.precision, "argument may need more bits than the format")
    _encl(lem.value, 0, 0)


def _c_rel_err_abs(ck, lem, e, ops):
    r, a = _rounded(e, False)
    fmt = _format_of(r, True)
    (j,) = _ops(ops, ("BND", a))
    _relop_range(fmt, j)
    eps = _pow2(-fmt.precision)
    _encl(lem.value, *_mul(j, (-eps, eps)))


def _c_rel_err_rel(ck, lem, e, ops):
    r, a = _rounded(e, True)
    fmt = _format_of(r, True)
    if fmt.min_exp is None:
        _need(not ops)
    else:
        (j,) = _ops(ops, ("BND", a))
        _relop_range(fmt, j)
    eps = _pow2(-fmt.precision)
    _encl(lem.value, -eps, eps)


def _c_bnd_of_abs(ck, lem, e, ops):
    (k,) = _ops(ops, ("ABS", e))
    _encl(lem.value, -k[1], k[1])


def _abs_parts(e, ops):
    j, k = _ops(ops, ("BND", e), ("ABS", e))
    return [p for p in (_inter(j, k), _inter(j, (-k[1], -k[0]))) if p is not None]


def _c_bnd_abs_refine(ck, lem, e, ops):
    parts = _abs_parts(e, ops)
    _need(parts, "the ranges are incompatible")
    _encl(lem.value, min(p[0] for p in parts), max(p[1] for p in parts))


def _c_absurd_abs(ck, lem, e, ops):
    _need(not _abs_parts(e, ops), "the ranges are compatible")


def _c_refine(side):
    def check(ck, lem, e, ops):
        j, u = _ops(ops, ("BND", e), (side.upper(), e))
        if side == "le":
            _need(j[0] <= u)
            _encl(lem.value, j[0], min(j[1], u))
        else:
            _need(j[1] >= u)
            _encl(lem.value, max(j[0], u), j[1])
    return check


def _c_absurd(ck, lem, e, ops):
    _need(len(ops) == 2 and all(o.subject is e for o in ops), "operands are about other terms")
    x, y = sorted(ops, key=lambda o: o.kind)
    kinds = (x.kind, y.kind)
    if kinds in (("BND", "BND"), ("ABS", "ABS")):
        _need(_inter(x.value, y.value) is None, "the ranges intersect")
    elif kinds == ("BND", "LE"):
        _need(x.value[0] > y.value, "the ranges intersect")
    elif kinds == ("BND", "GE"):
        _need(x.value[1] < y.value, "the ranges intersect")
    elif kinds == ("GE", "LE"):
        _need(x.value > y.value, "the ranges intersect")
    else:
        raise _Fail("no contradiction between these predicates")


def _c_intersect(ck, lem, e, ops):
    _need(lem.kind in ("BND", "ABS"))
    j, k = _ops(ops, (lem.kind, e), (lem.kind, e))
    i = _inter(j, k)
    _need(i is not None, "the ranges are disjoint")
    _encl(lem.value, *i)


def _c_rewrite(ck, lem, e, ops):
    rule = RULES_BY_NAME.get(lem.raw.params.get("rule", ""))
    _need(rule is not None, "unknown rewriting rule")
    env = {}
    for item in lem.raw.params.get("env", "").split(","):
        name, _, ref = item.partition(":")
        _need(name in METAVARS and ref.isdigit() and int(ref) < len(ck.exprs),
              "malformed substitution")
        env[name] = ck.exprs[int(ref)]
    lhs, rhs, guards = compiled(rule)
    try:
        _need(instantiate(lhs, env, ck.table) is e, "rule does not rewrite this term")
        target = instantiate(rhs, env, ck.table)
        inst = [(g[0],) + tuple(instantiate(x, env, ck.table) for x in g[1:]) for g in guards]
    except KeyError:
        raise _Fail("substitution misses a metavariable") from None
    spec = [("BND", target)]
    for g in inst:
        if g[0] == "ne":
            _need(g[1] is not g[2], "syntactic guard fails")
        else:
            spec.append(("ABS" if g[0] == "nz" else "BND", g[1]))
    vals = _ops(ops, *spec)
    for g, v in zip([g for g in inst if g[0] != "ne"], vals[1:]):
        _need(v[0] > 0 if g[0] in ("nz", "gt0") else v[0] >= 0, f"guard {g[0]} fails")
    _encl(lem.value, *vals[0])


def _c_user(ck, lem, e, ops):
    try:
        lhs, rhs = ck.identities[int(lem.raw.params.get("identity", ""))]
    except (ValueError, KeyError):
        raise _Fail("no such identity") from None
    _need(lhs is e, "identity does not rewrite this term")
    (j,) = _ops(ops, ("BND", rhs))
    _encl(lem.value, *j)
    n = int(lem.raw.params["identity"])
    if n not in ck.verified:
        ck.used_assumed.add(n)


def _c_abs_of_bnd(ck, lem, e, ops):
    (j,) = _ops(ops, ("BND", e))
    _encl(lem.value, *_absiv(j))


def _c_abs_same(op):
    def check(ck, lem, e, ops):
        (k,) = _ops(ops, ("ABS", _op(e, op)[0]))
        _encl(lem.value, *k)
    return check


def _c_abs_sqrt(ck, lem, e, ops):
    (k,) = _ops(ops, ("ABS", _op(e, "sqrt")[0]))
    _sqrt_ok(lem.value, k)


def _c_abs_bin(op):
    def check(ck, lem, e, ops):
        a, b = _op(e, op)
        j, k = _ops(ops, ("ABS", a), ("ABS", b))
        if op in ("add", "sub"):
            lo, hi = max(0, j[0] - k[1], k[0] - j[1]), j[1] + k[1]
        elif op == "mul":
            lo, hi = j[0] * k[0], j[1] * k[1]
        else:
            _need(k[0] > 0, "divisor may be zero")
            lo, hi = j[0] / k[1], j[1] / k[0]
        _encl(lem.value, lo, hi)
    return check


def _c_fix_const(ck, lem, e, ops):
    _need(not ops and e.op == "const")
    _need((e.value / _pow2(lem.value)).denominator == 1, "constant is not a multiple")


def _c_flt_const(ck, lem, e, ops):
    _need(not ops and e.op == "const")
    v = e.value
    _need(v.denominator & (v.denominator - 1) == 0, "constant is not dyadic")
    m = abs(v.numerator)
    while m and m % 2 == 0:
        m //= 2
    _need(m.bit_length() <= lem.value, "constant needs more bits")


def _c_fix_rnd(ck, lem, e, ops):
    fmt = _format_of(e, False)
    _need(not ops and lem.value <= fmt.min_exp)


def _c_flt_rnd(ck, lem, e, ops):
    fmt = _format_of(e, False)
    _need(not ops and fmt.kind == "float" and lem.value >= fmt.precision)


def _c_fixflt_bin(kind, op):
    def check(ck, lem, e, ops):
        a, b = _op(e, op)
        f, g = _ops(ops, (kind, a), (kind, b))
        if kind == "FIX":
            _need(lem.value <= (f + g if op == "mul" else min(f, g)))
        else:
            _need(lem.value >= f + g)
    return check


def _c_fixflt_neg(kind):
    def check(ck, lem, e, ops):
        (f,) = _ops(ops, (kind, _op(e, "neg")[0]))
        _need(lem.value <= f if kind == "FIX" else lem.value >= f)
    return check


def _c_fix_of_flt(ck, lem, e, ops):
    q, k = _ops(ops, ("FLT", e), ("ABS", e))
    _need(k[0] > 0 and _pow2(lem.value + q - 1) <= k[0], "magnitude too small")


def _c_flt_of_fix(ck, lem, e, ops):
    f, k = _ops(ops, ("FIX", e), ("ABS", e))
    _need(k[1] < _pow2(lem.value + f), "magnitude too large")


_KIND = {}
_TABLE: Dict[str, Callable] = {}


def _reg(kind, **fns):
    for name, fn in fns.items():
        _TABLE[name] = fn
        _KIND[name] = kind


_reg("BND", hyp=_c_hyp, tile=_c_tile, constant=_c_constant, neg=_c_neg, abs=_c_abs,
     abs_to_bnd=_c_abs_to_bnd, sqrt=_c_sqrt, sub_refl=_c_sub_refl, div_refl=_c_div_refl,
     square=_c_square, fma=_c_fma, compose=_c_compose, rnd_bnd=_c_rnd_bnd,
     rnd_clip=_c_rnd_clip, rel_round=_c_rel_round, err_fix=_c_err("argument", None),
     err_bnd_arg=_c_err("argument", "BND"), err_bnd_res=_c_err("result", "BND"),
     err_abs_arg=_c_err("argument", "ABS"), err_abs_res=_c_err("result", "ABS"),
     err_exact=_c_err_exact, rel_err_abs=_c_rel_err_abs, rel_err_rel=_c_rel_err_rel,
     relerr_bnd_arg=_c_err("argument", "BND", True),
     relerr_bnd_res=_c_err("result", "BND", True),
     relerr_abs_arg=_c_err("argument", "ABS", True),
     relerr_abs_res=_c_err("result", "ABS", True),
     bnd_of_abs=_c_bnd_of_abs, bnd_abs_refine=_c_bnd_abs_refine,
     refine_le=_c_refine("le"), refine_ge=_c_refine("ge"), rewrite=_c_rewrite,
     user=_c_user)
_reg("BND", **{op: _c_bin(op) for op in _ARITH})
_reg("ABS", abs_of_bnd=_c_abs_of_bnd, abs_neg=_c_abs_same("neg"), abs_abs=_c_abs_same("abs"),
     abs_sqrt=_c_abs_sqrt, abs_add=_c_abs_bin("add"), abs_sub=_c_abs_bin("sub"),
     abs_mul=_c_abs_bin("mul"), abs_div=_c_abs_bin("div"))
_reg("FIX", fix_const=_c_fix_const, fix_rnd=_c_fix_rnd, fix_add=_c_fixflt_bin("FIX", "add"),
     fix_sub=_c_fixflt_bin("FIX", "sub"), fix_mul=_c_fixflt_bin("FIX", "mul"),
     fix_neg=_c_fixflt_neg("FIX"), fix_of_flt=_c_fix_of_flt)
_reg("FLT", flt_const=_c_flt_const, flt_rnd=_c_flt_rnd, flt_mul=_c_fixflt_bin("FLT", "mul"),
     flt_neg=_c_fixflt_neg("FLT"), flt_of_fix=_c_flt_of_fix)
_reg("FALSE", absurd=_c_absurd, absurd_clip=_c_absurd_clip, absurd_abs=_c_absurd_abs)
# hypotheses and intersections carry whatever predicate they restate
_KIND["hyp"] = None
_KIND["intersect"] = None
_TABLE["intersect"] = _c_intersect

THEOREM_NAMES = frozenset(_TABLE)


# -- expressions ---------------------------------------------------------------------

_FLOAT_RE = re.compile(r"^float<(-?\d+),(-?\d+),(\w+)>$")
_NAMED_RE = re.compile(r"^float<(\w+),(\w+)>$")
_FIXED_RE = re.compile(r"^fixed<(-?\d+),(\w+)>$")
_REL_RE = re.compile(r"^(add|sub|mul)_rel<(\d+)(?:,(-?\d+))?>$")
_CONST_RE = re.compile(r"^(-?\d+)(?:/(\d+))?$")


def _parse_format(text: str):
    m = _FLOAT_RE.match(text)
    if m and m.group(3) in DIRECTIONS and int(m.group(1)) >= 1:
        return Format("float", m.group(3), int(m.group(2)), int(m.group(1)))
    m = _NAMED_RE.match(text)
    if m and m.group(1) in NAMED_FLOATS and m.group(2) in DIRECTIONS:
        p, emin = NAMED_FLOATS[m.group(1)]
        return Format("float", m.group(2), emin, p)
    m = _FIXED_RE.match(text)
    if m and m.group(2) in DIRECTIONS:
        return Format("fixed", m.group(2), int(m.group(1)))
    m = _REL_RE.match(text)
    if m and int(m.group(2)) >= 1:
        return RelOp(m.group(1), int(m.group(2)),
                     None if m.group(3) is None else int(m.group(3)))
    raise StructuralError(f"unknown rounding operator {text!r}")


def _build_exprs(cert: Certificate) -> Tuple[ExprTable, List[Expr]]:
    table = ExprTable()
    nodes: List[Expr] = []
    for i, (op, args, payload) in enumerate(cert.exprs):
        if any(a >= i or a < 0 for a in args):
            raise StructuralError(f"expression {i} refers forward or to itself")
        kids = [nodes[a] for a in args]
        if op == "var":
            if not re.match(r"^[A-Za-z_]\w*$", payload):
                raise StructuralError(f"bad variable name {payload!r}")
            n = table.var(payload)
        elif op == "const":
            m = _CONST_RE.match(payload)
            if not m or m.group(2) == "0":
                raise StructuralError(f"bad constant {payload!r}")
            n = table.const(Fraction(int(m.group(1)), int(m.group(2) or 1)))
        elif op == "round":
            n = table.round(_parse_format(payload), kids[0])
        elif op in _ARITY:
            if len(kids) != _ARITY[op]:
                raise StructuralError(f"expression {i}: {op} takes {_ARITY[op]} operands")
            n = table.op(op, *kids)
        else:
            raise StructuralError(f"expression {i}: unknown operator {op!r}")
        if n.uid != len(table.nodes) - 1 or n in nodes:
            raise StructuralError(f"expression {i} duplicates an earlier one")
        nodes.append(n)
    for i, name in cert.aliases.items():
        if not 0 <= i < len(nodes):
            raise StructuralError(f"alias of unknown expression {i}")
    return table, nodes


# -- checking ------------------------------------------------------------------------

class Checker:
    """Validate a parsed certificate.

    After :meth:`run`, ``context`` maps lemma ids to their scope and
    ``consumers`` to the lemmas and witnesses that use them; the widening
    pass relies on both.
    """

    def __init__(self, cert: Certificate):
        self.cert = cert
        self.table, self.exprs = _build_exprs(cert)
        self.identities: Dict[int, Tuple[Expr, Expr]] = {}
        self.verified: set = set()
        self.used_assumed: set = set()
        for n, lhs, rhs, _ in cert.identities:
            if n in self.identities or not (0 <= lhs < len(self.exprs) and 0 <= rhs < len(self.exprs)):
                raise StructuralError(f"bad identity {n}")
            l, r = self.exprs[lhs], self.exprs[rhs]
            self.identities[n] = (l, r)
            try:
                if ring_equal(l, r):
                    self.verified.add(n)
            except Exception:  # noqa: BLE001 - rounded or irrational terms: not verifiable
                pass
        self.lemmas: Dict[int, Lemma] = {}
        self.context: Dict[int, Tuple[int, Dict[int, tuple]]] = {}
        self.consumers: Dict[int, List] = {}
        self.seq = None
        self.tiles: Dict[int, tuple] = {}

    # structure --------------------------------------------------------------
    def _scan(self, si: int, block: Block, visible: set, tiles, last: List[int]):
        seq = self.cert.sequents[si]
        visible = set(visible)
        for lem in block.lemmas:
            if lem.id <= last[0]:
                raise StructuralError(f"lemma {lem.id}: ids must increase")
            last[0] = lem.id
            if lem.theorem not in _TABLE and lem.theorem != "hyp":
                raise StructuralError(f"lemma {lem.id}: unknown theorem {lem.theorem!r}")
            want = _KIND.get(lem.theorem)
            if want is not None and lem.kind != want:
                raise StructuralError(f"lemma {lem.id}: {lem.theorem} proves {want}, not {lem.kind}")
            if not 0 <= lem.subject < len(self.exprs):
                raise StructuralError(f"lemma {lem.id}: unknown expression {lem.subject}")
            for o in lem.ops:
                if o not in visible:
                    raise StructuralError(f"lemma {lem.id}: operand {o} is not an earlier "
                                          f"lemma in scope")
                self.consumers.setdefault(o, []).append(("lemma", lem.id))
            visible.add(lem.id)
            self.lemmas[lem.id] = lem
            self.context[lem.id] = (si, dict(tiles))
        for g, lid in block.witnesses:
            if lid not in visible or not 0 <= g < len(seq.goals):
                raise StructuralError(f"witness {g}: bad goal or lemma reference")
            self.consumers.setdefault(lid, []).append(("witness", si, g))
        if block.absurd is not None and block.absurd not in visible:
            raise StructuralError(f"absurd {block.absurd}: unknown lemma")
        if block.split is not None:
            if not 0 <= block.split.axis < len(self.exprs):
                raise StructuralError("split on an unknown expression")
            for iv, sub in block.split.tiles:
                t = dict(tiles)
                t[self.exprs[block.split.axis].uid] = (iv.lo.to_fraction(), iv.hi.to_fraction())
                self._scan(si, sub, visible, t, last)

    def structure(self):
        last = [0]
        for si, seq in enumerate(self.cert.sequents):
            for kind, e, lo, hi in seq.hyps + seq.goals:
                if not 0 <= e < len(self.exprs):
                    raise StructuralError("hypothesis or goal on an unknown expression")
            _check_tree(seq.tree, len(seq.goals))
            self._scan(si, seq.proof, set(), {}, last)

    # semantics --------------------------------------------------------------
    def lemma_error(self, lid: int) -> Optional[str]:
        lem = self.lemmas[lid]
        si, tiles = self.context[lid]
        self.seq = self.cert.sequents[si]
        self.tiles = tiles
        e = self.exprs[lem.subject]
        try:
            L = _Lem(lem, e)
            if L.kind == "ABS":
                _need(L.value[0] >= 0, "negative magnitude")
            ops = [_Lem(self.lemmas[o], self.exprs[self.lemmas[o].subject]) for o in lem.ops]
            _TABLE.get(lem.theorem, _c_hyp)(self, L, e, ops)
        except _Fail as exc:
            return f"lemma {lid} ({lem.theorem}): {exc}"
        except (ZeroDivisionError, ValueError) as exc:
            return f"lemma {lid} ({lem.theorem}): {exc}"
        return None

    def witness_error(self, si: int, g: int, lid: int) -> Optional[str]:
        kind, e, lo, hi = self.cert.sequents[si].goals[g]
        lem = self.lemmas[lid]
        if lem.kind != "BND" or lem.subject != e:
            return f"witness for goal {g}: lemma {lid} is not an enclosure of the goal"
        a, b = lem.value.lo.to_fraction(), lem.value.hi.to_fraction()
        if kind == "query":
            if lo is None or hi is None or not (lo.to_fraction() <= a and b <= hi.to_fraction()):
                return f"witness for goal {g}: lemma {lid} is outside the reported answer"
            return None
        if (lo is not None and a < lo) or (hi is not None and b > hi):
            return f"witness for goal {g}: lemma {lid} does not imply the goal"
        return None

    def _block(self, si: int, block: Block, tiles) -> Optional[str]:
        seq = self.cert.sequents[si]
        if block.absurd is not None:
            if self.lemmas[block.absurd].kind != "FALSE":
                return f"absurd {block.absurd}: lemma is not a contradiction"
            return None
        if block.split is not None:
            axis = self.exprs[block.split.axis]
            rng = tiles.get(axis.uid)
            if rng is None:
                rng = _hyp_range(seq, block.split.axis)
                if rng is None:
                    return "split on an expression without an enclosure hypothesis"
            ts = [(iv.lo.to_fraction(), iv.hi.to_fraction()) for iv, _ in block.split.tiles]
            if ts[0][0] > rng[0] or ts[-1][1] < rng[1] or any(
                    x[1] < y[0] for x, y in zip(ts, ts[1:])):
                return "the tiles do not cover the range of the split"
            for (iv, sub), t in zip(block.split.tiles, ts):
                sub_tiles = dict(tiles)
                sub_tiles[axis.uid] = t
                err = self._block(si, sub, sub_tiles)
                if err:
                    return err
            return None
        done = set()
        for g, lid in block.witnesses:
            err = self.witness_error(si, g, lid)
            if err:
                return err
            done.add(g)
        if not _tree_holds(seq.tree, done):
            return "the witnessed goals do not establish the goal formula"
        return None

    def run(self) -> Report:
        try:
            self.structure()
        except StructuralError as exc:
            return Report(False, True, str(exc))
        for lid in sorted(self.lemmas):
            err = self.lemma_error(lid)
            if err:
                return Report(False, False, err, len(self.lemmas))
        for si, seq in enumerate(self.cert.sequents):
            err = self._block(si, seq.proof, {})
            if err:
                return Report(False, False, f"sequent {si}: {err}", len(self.lemmas))
        return Report(True, False, "", len(self.lemmas), sorted(self.used_assumed))


def _hyp_range(seq, e: int):
    lo = hi = None
    for kind, sub, a, b in seq.hyps:
        if kind == "in" and sub == e:
            lo = a if lo is None else max(lo, a)
            hi = b if hi is None else min(hi, b)
    return None if lo is None else (lo, hi)


def _check_tree(t, n: int):
    if t == "false":
        return
    if isinstance(t, int):
        if not 0 <= t < n:
            raise StructuralError(f"goal tree refers to unknown goal {t}")
        return
    _check_tree(t[1], n)
    _check_tree(t[2], n)


def _tree_holds(t, done) -> bool:
    if t == "false":
        return False
    if isinstance(t, int):
        return t in done
    if t[0] == "and":
        return _tree_holds(t[1], done) and _tree_holds(t[2], done)
    return _tree_holds(t[1], done) or _tree_holds(t[2], done)


def check(cert: Certificate) -> Report:
    try:
        return Checker(cert).run()
    except StructuralError as exc:
        return Report(False, True, str(exc))


def check_text(text: str, script_source: Optional[str] = None) -> Report:
    """Parse and check a certificate; optionally tie it to a script's text."""
    try:
        cert = parse_certificate(text)
    except CertificateSyntaxError as exc:
        return Report(False, True, str(exc))
    if script_source is not None:
        from .certificate import script_hash
        if cert.script_sha256 != script_hash(script_source):
            return Report(False, False, "the certificate was produced for another script")
    return check(cert)
