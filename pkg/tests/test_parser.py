from fractions import Fraction

import pytest

from roundbound.expr import ExprTable
from roundbound.formats import RelOp, fixed_format, float_format
from roundbound.logic import Impl
from roundbound.parser import ParseError, lint, parse, parse_expression, script_text

from conftest import SCRIPTS


@pytest.mark.parametrize("path", sorted(SCRIPTS.glob("*.g")), ids=lambda p: p.name)
def test_round_trip(path):
    first = parse(path.read_text())
    text = script_text(first)
    second = parse(text)
    assert script_text(second) == text
    assert len(second.hints) == len(first.hints)


def test_hash_consing():
    t = ExprTable()
    a = parse_expression("x * (y + 1)", t)
    b = parse_expression("x*(y+1)", t)
    assert a is b
    assert parse_expression("(y + 1)", t) is a.args[1]


def test_formats():
    s = parse("""
        @f = float<24, -149, ne>;
        @g = float<ieee_64, up>;
        @h = fixed<-10, zr>;
        @i = int<na>;
        @m = mul_rel<40>;
        @n = add_rel<30, -100>;
        { f(x) + g(x) + h(x) + i(x) in ? }
    """)
    r = s.rounding_aliases
    assert r["f"] == float_format("ieee_32", "ne")
    assert r["g"] == float_format(53, -1074, "up")
    assert r["h"] == fixed_format(-10, "zr")
    assert r["i"] == fixed_format(0, "na")
    assert r["m"] == RelOp("mul", 40, None)
    assert r["n"] == RelOp("add", 30, -100)


def test_rounded_definition_wraps_every_operator():
    s = parse("@rnd = float<ieee_32, ne>; y rnd= a * b + c; { y in ? }")
    y = s.aliases["y"]
    assert y.op == "round" and y.args[0].op == "add"
    assert y.args[0].args[0].op == "round"


def test_fma():
    s = parse("@rnd = float<ieee_32, ne>; y = rnd(fma(a, b, c)); { y in ? }")
    assert s.aliases["y"].args[0].op == "fma"


def test_numbers_exact():
    s = parse("{ x in [1b-2, 1.3] -> x + 0.1 in ? }")
    assert isinstance(s.proposition, Impl)
    assert s.proposition.left.hi == Fraction(13, 10)


@pytest.mark.parametrize("src,fragment,line", [
    ("{ x in [2, 1] }", "lower bound exceeds", 1),
    ("a = 1;\na = 2;\n{ a in ? }", "aliased more than once", 2),
    ("b = a * 2;\na = 1;\n{ b in ? }", "after being used as a free variable", 2),
    ("@r = float<ieee_32, xx>; { x in ? }", "unknown rounding direction", 1),
    ("@r = bogus<3>; { x in ? }", "unknown rounding operator", 1),
    ("x = 1;", "missing proposition", 1),
    ("{ x + in ? }", "in expression", 1),
    ("{ x in [0,1] }\nx $ x in 0;", "positive integer", 2),
    ("{ x ^ 2 in ? }", "unexpected character", 1),
])
def test_errors(src, fragment, line):
    with pytest.raises(ParseError) as info:
        parse(src)
    assert fragment in info.value.message
    assert info.value.line == line


def test_lint_duplicate_alias():
    s = parse("a = x + 1;\nb = x + 1;\n{ a in ? }")
    assert any("two different names" in w for w in lint(s))


def test_lint_assumed_rewrite():
    s = parse("{ x in [1,2] -> x * x in ? }\nx * x -> x + x;")
    assert not s.rewrites[0].verified
    assert any("the rewriting is assumed" in w for w in lint(s))


def test_lint_zero_divisor():
    s = parse("{ x in [1,2] -> x in ? }\nx -> x * (y - y) / (y - y);")
    assert any("trivially zero" in w for w in lint(s))


def test_lint_useless_approx():
    s = parse("@rnd = float<ieee_32, ne>; a = rnd(x);\n{ x in [1,2] -> a in ? }\na ~ x;")
    assert any("useless" in w for w in lint(s))


def test_ring_verified_hints():
    s = parse(open(SCRIPTS / "exponential.g").read())
    assert [h.verified for h in s.rewrites] == [True, True]
    assert not [w for w in lint(s) if "assumed" in w]
