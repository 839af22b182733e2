from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from roundbound.bisect import (dichotomy_cut, even_cuts, point_tiles, shortest_dyadic,
                               tiles_from_cuts)
from roundbound.dyadic import Dyadic
from roundbound.interval import Interval
from roundbound.session import prove_script

from conftest import load

fracs = st.fractions(min_value=-1000, max_value=1000, max_denominator=10 ** 6)


@given(fracs, fracs)
def test_shortest_dyadic(a, b):
    a, b = min(a, b), max(a, b)
    if a == b and a.denominator & (a.denominator - 1):
        with pytest.raises(ValueError):
            shortest_dyadic(a, b)
        return
    d = shortest_dyadic(a, b)
    assert a <= d.to_fraction() <= b
    # no multiple of a coarser power of two fits in [a, b]
    if d.m != 0:
        step = Fraction(2) ** (d.e + 1)
        k = -(-a // step)
        assert k * step > b


def _covers(iv, tiles):
    assert tiles[0].lo == iv.lo and tiles[-1].hi == iv.hi
    for t, u in zip(tiles, tiles[1:]):
        assert u.lo <= t.hi


@given(st.integers(-2 ** 20, 2 ** 20), st.integers(1, 2 ** 20), st.integers(1, 9))
def test_even_cuts_cover(lo, width, n):
    iv = Interval(Dyadic(lo, -10), Dyadic(lo + width, -10))
    tiles = tiles_from_cuts(iv, even_cuts(iv, n))
    _covers(iv, tiles)
    assert len(tiles) <= n


@given(st.integers(-2 ** 20, 2 ** 20), st.integers(1, 2 ** 20))
def test_dichotomy_cut_inside(lo, width):
    iv = Interval(Dyadic(lo, -10), Dyadic(lo + width, -10))
    c = dichotomy_cut(iv)
    assert iv.lo < c < iv.hi


def test_point_tiles():
    iv = Interval(0, 3)
    warnings = []
    tiles = point_tiles(iv, [Fraction(1, 3), Fraction(2), Fraction(5)], 24, warnings, "x")
    _covers(iv, tiles)
    assert len(tiles) == 3
    assert tiles[0].hi.to_fraction() >= Fraction(1, 3) >= tiles[1].lo.to_fraction()
    assert warnings and "outside" in warnings[0]


def test_cancellation_needs_hint():
    src = load("cancellation.g")
    assert prove_script(src).proved
    assert not prove_script(src.replace("|z| $ x;", "")).proved


def test_even_split_hint():
    src = "{ x in [0, 1] -> x * (1 - x) in [0, 0.3] }\n"
    assert not prove_script(src).proved
    assert prove_script(src + "$ x in 16;").proved
