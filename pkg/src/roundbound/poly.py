"""Normalisation of expressions to quotients of polynomials.

Used to check that user rewrite hints are algebraic identities and to
spot divisors that vanish identically.  Rounded values, square roots and
absolute values are treated as opaque atoms.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Tuple

from .expr import Expr

Monomial = Tuple[Tuple[int, int], ...]
Poly = Dict[Monomial, Fraction]


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    d = dict(a)
    for atom, k in b:
        d[atom] = d.get(atom, 0) + k
    return tuple(sorted(d.items()))


def poly_add(p: Poly, q: Poly, sign: int = 1) -> Poly:
    r = dict(p)
    for m, c in q.items():
        v = r.get(m, 0) + sign * c
        if v:
            r[m] = v
        else:
            r.pop(m, None)
    return r


def poly_mul(p: Poly, q: Poly) -> Poly:
    r: Poly = {}
    for m1, c1 in p.items():
        for m2, c2 in q.items():
            m = _mono_mul(m1, m2)
            v = r.get(m, 0) + c1 * c2
            if v:
                r[m] = v
            else:
                r.pop(m, None)
    return r


def _const(c) -> Poly:
    c = Fraction(c)
    return {(): c} if c else {}


def to_fraction(e: Expr) -> Tuple[Poly, Poly]:
    """``(numerator, denominator)`` polynomials equal to ``e`` wherever defined."""
    memo: Dict[int, Tuple[Poly, Poly]] = {}
    for n in e.walk():
        if n.op == "const":
            r = (_const(n.value), _const(1))
        elif n.op in ("var", "round", "sqrt", "abs"):
            r = ({((n.uid, 1),): Fraction(1)}, _const(1))
        else:
            a = [memo[x.uid] for x in n.args]
            if n.op == "neg":
                r = ({m: -c for m, c in a[0][0].items()}, a[0][1])
            elif n.op in ("add", "sub"):
                (p1, q1), (p2, q2) = a
                sign = 1 if n.op == "add" else -1
                r = (poly_add(poly_mul(p1, q2), poly_mul(p2, q1), sign), poly_mul(q1, q2))
            elif n.op == "mul":
                r = (poly_mul(a[0][0], a[1][0]), poly_mul(a[0][1], a[1][1]))
            elif n.op == "div":
                r = (poly_mul(a[0][0], a[1][1]), poly_mul(a[0][1], a[1][0]))
            elif n.op == "fma":
                (p1, q1), (p2, q2), (p3, q3) = a
                pq = poly_mul(p1, p2)
                qq = poly_mul(q1, q2)
                r = (poly_add(poly_mul(pq, q3), poly_mul(p3, qq)), poly_mul(qq, q3))
            else:
                raise ValueError(n.op)
        memo[n.uid] = r
    return memo[e.uid]


def ring_equal(a: Expr, b: Expr) -> bool:
    """Whether ``a`` and ``b`` are equal as rational functions of their atoms."""
    (p1, q1), (p2, q2) = to_fraction(a), to_fraction(b)
    if not q1 or not q2:
        return False
    return not poly_add(poly_mul(p1, q2), poly_mul(p2, q1), -1)


def is_identically_zero(e: Expr) -> bool:
    p, q = to_fraction(e)
    return not p or not q
