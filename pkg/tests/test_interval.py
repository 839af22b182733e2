"""Containment trials for every interval operator against exact rationals.

Draw intervals, draw points inside them, and check that the exact image
lies in the computed interval.  The acceptance module runs the same
checks with 10**5 trials per operator.
"""

import random
from fractions import Fraction
from math import isqrt

import pytest

from roundbound.dyadic import Dyadic
from roundbound.formats import DIRECTIONS, fixed_format, float_format, round_interval
from roundbound.interval import (EMPTY, DomainError, Interval, iv_abs, iv_add, iv_div, iv_hull,
                                 iv_intersect, iv_inv, iv_mul, iv_neg, iv_rel_compose,
                                 iv_sqrt, iv_sub)

from conftest import ref_round

TRIALS = 10 ** 4
PREC = 24


def rand_dyadic(rng, lo_exp=-12, hi_exp=12):
    return Dyadic(rng.randint(-(2 ** 20), 2 ** 20), rng.randint(lo_exp, hi_exp) - 20)


def rand_interval(rng, positive=False, nonzero=False):
    while True:
        a, b = sorted((rand_dyadic(rng), rand_dyadic(rng)))
        if rng.random() < 0.1:
            b = a
        if positive:
            a, b = sorted((abs(a), abs(b)))
        iv = Interval(a, b)
        if nonzero and iv.lo.sign() <= 0 <= iv.hi.sign():
            continue
        return iv


def rand_small(rng):
    a, b = sorted(Dyadic(rng.randint(-2 ** 20, 2 ** 20), -21) for _ in range(2))
    return Interval(a, b)


def point(rng, iv: Interval) -> Fraction:
    lo, hi = iv.lo.to_fraction(), iv.hi.to_fraction()
    r = rng.random()
    if r < 0.1:
        return lo
    if r < 0.2:
        return hi
    return lo + (hi - lo) * Fraction(rng.getrandbits(30), 2 ** 30)


def inside(x: Fraction, iv: Interval) -> bool:
    return iv.lo.to_fraction() <= x <= iv.hi.to_fraction()


def _sqrt_ok(r, x):
    # compare squares: s in sqrt(a) iff lo**2 <= x <= hi**2 for lo, hi >= 0
    lo, hi = r.lo.to_fraction(), r.hi.to_fraction()
    return 0 <= lo and lo * lo <= x <= hi * hi and r.lo.bits() <= PREC and r.hi.bits() <= PREC


_FMTS = [float_format(24, -149, d) for d in DIRECTIONS] + [fixed_format(-10, d) for d in DIRECTIONS]

# name -> (operand generators, interval op, containment test on points)
OPERATORS = {
    "neg": ((rand_interval,), iv_neg, lambda r, x: inside(-x, r)),
    "abs": ((rand_interval,), iv_abs, lambda r, x: inside(abs(x), r)),
    "inv": ((lambda g: rand_interval(g, nonzero=True),), lambda a: iv_inv(a, PREC),
            lambda r, x: inside(1 / x, r)),
    "sqrt": ((lambda g: rand_interval(g, positive=True),), lambda a: iv_sqrt(a, PREC), _sqrt_ok),
    "add": ((rand_interval, rand_interval), iv_add, lambda r, x, y: inside(x + y, r)),
    "sub": ((rand_interval, rand_interval), iv_sub, lambda r, x, y: inside(x - y, r)),
    "mul": ((rand_interval, rand_interval), iv_mul, lambda r, x, y: inside(x * y, r)),
    "div": ((rand_interval, lambda g: rand_interval(g, nonzero=True)),
            lambda a, b: iv_div(a, b, PREC), lambda r, x, y: inside(x / y, r)),
    "rel_compose": ((rand_small, rand_small), iv_rel_compose,
                    lambda r, x, y: inside(x + y + x * y, r)),
}


def containment_violations(name: str, trials: int) -> int:
    """Number of points whose exact image escapes the computed interval."""
    rng = random.Random(name)
    if name == "round":
        bad = 0
        for i in range(trials):
            fmt = _FMTS[i % len(_FMTS)]
            a = rand_interval(rng)
            bad += not inside(ref_round(point(rng, a), fmt), round_interval(a, fmt))
        return bad
    if name == "hull_intersect":
        bad = 0
        for _ in range(trials):
            a, b = rand_interval(rng), rand_interval(rng)
            x = point(rng, a)
            m = iv_intersect(a, b)
            bad += not inside(x, iv_hull(a, b))
            if inside(x, b):
                bad += m is EMPTY or not inside(x, m)
            elif m is not EMPTY:
                bad += inside(x, m)
        return bad
    gens, op, ok = OPERATORS[name]
    bad = 0
    for _ in range(trials):
        ivs = [g(rng) for g in gens]
        r = op(*ivs)
        bad += not ok(r, *(point(rng, iv) for iv in ivs))
    return bad


ALL_OPERATORS = sorted(OPERATORS) + ["round", "hull_intersect"]


@pytest.mark.parametrize("name", ALL_OPERATORS)
def test_containment(name):
    assert containment_violations(name, TRIALS) == 0


def test_sqrt_exact_on_squares():
    for n in range(200):
        assert iv_sqrt(Interval(n * n), PREC) == Interval(n)
    big = 10 ** 30
    assert iv_sqrt(Interval(big * big), 128) == Interval(big)
    assert isqrt(big * big) == big


def test_division_tight_when_exact():
    assert iv_div(Interval(1, 2), Interval(4), PREC) == Interval(Dyadic(1, -2), Dyadic(1, -1))


def test_domain_errors():
    z = Interval(-1, 1)
    with pytest.raises(DomainError):
        iv_div(Interval(1), z, PREC)
    with pytest.raises(DomainError):
        iv_inv(z, PREC)
    with pytest.raises(DomainError):
        iv_sqrt(z, PREC)
    with pytest.raises(DomainError):
        iv_rel_compose(Interval(-2, 0), Interval(0))
    with pytest.raises(ValueError):
        Interval(2, 1)
