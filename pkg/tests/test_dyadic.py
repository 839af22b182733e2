from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from roundbound.dyadic import (Dyadic, NumberSyntaxError, ceil_log2, floor_log2, is_dyadic,
                               parse_number, rational_to_dyadic)

ints = st.integers(-(2 ** 80), 2 ** 80)
exps = st.integers(-200, 200)
dyadics = st.builds(Dyadic, ints, exps)
rationals = st.fractions().filter(lambda f: f != 0)


@given(dyadics)
def test_canonical(d):
    assert d.m % 2 == 1 or (d.m == 0 and d.e == 0)
    assert Dyadic(d.m << 5, d.e - 5) == d


@given(dyadics, dyadics)
def test_arithmetic_matches_fractions(a, b):
    fa, fb = a.to_fraction(), b.to_fraction()
    assert (a + b).to_fraction() == fa + fb
    assert (a - b).to_fraction() == fa - fb
    assert (a * b).to_fraction() == fa * fb
    assert (-a).to_fraction() == -fa
    assert (a < b) == (fa < fb)
    assert (a == b) == (fa == fb)


def test_examples():
    assert Dyadic(3, -1) + Dyadic(1, 0) == Dyadic(5, -1)
    assert Dyadic(1, -26) * Dyadic(1, -26) == Dyadic(1, -52)
    assert Dyadic(13, -3) > Dyadic(3, -1)


@given(rationals)
def test_log2(x):
    n, d = x.numerator, x.denominator
    k = floor_log2(n, d)
    assert Fraction(2) ** k <= abs(x) < Fraction(2) ** (k + 1)
    c = ceil_log2(n, d)
    assert Fraction(2) ** (c - 1) < abs(x) <= Fraction(2) ** c


@given(rationals, st.integers(2, 70))
def test_rational_to_dyadic_brackets(x, p):
    lo = rational_to_dyadic(x, "down", p)
    hi = rational_to_dyadic(x, "up", p)
    assert lo.to_fraction() <= x <= hi.to_fraction()
    assert lo.bits() <= p and hi.bits() <= p
    if is_dyadic(x) and Dyadic.from_fraction(x).bits() <= p:
        assert lo == hi


@pytest.mark.parametrize("text,value", [
    ("0", 0),
    ("-3", -3),
    ("0.1", Fraction(1, 10)),
    ("1.3", Fraction(13, 10)),
    ("1e-6", Fraction(1, 10 ** 6)),
    ("2.5E3", 2500),
    ("1b-26", Fraction(1, 2 ** 26)),
    ("8388676b-24", Fraction(8388676, 2 ** 24)),
    ("-3b2", -12),
    ("+.5", Fraction(1, 2)),
])
def test_parse_number(text, value):
    assert parse_number(text) == value


@pytest.mark.parametrize("text", ["", "b3", "1..2", "1e", "0x10", "1b2.5"])
def test_parse_number_rejects(text):
    with pytest.raises(NumberSyntaxError):
        parse_number(text)


def test_from_fraction_rejects_non_dyadic():
    with pytest.raises(ValueError):
        Dyadic.from_fraction(Fraction(1, 3))


def test_to_decimal():
    assert Dyadic(3, -2).to_decimal() == "0.75"
    assert Dyadic(5, 0).to_decimal() == "5"
    assert Dyadic(-1, -1).to_decimal() == "-0.5"
    assert Dyadic(1, -60).to_decimal().startswith("~")
