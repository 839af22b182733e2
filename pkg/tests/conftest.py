"""Shared fixtures and reference oracles for the test suite.

The oracles here deliberately avoid the package's own rounding code:
``ref_round`` locates the two neighbouring representable numbers by
scanning binades, then picks one by comparing distances.
"""

from __future__ import annotations

import random
from fractions import Fraction
from pathlib import Path

import pytest

from roundbound.expr import NotRational
from roundbound.formats import RelOp

SCRIPTS = Path(__file__).resolve().parents[1] / "demos" / "scripts"


def load(name: str) -> str:
    return (SCRIPTS / name).read_text()


# -- reference rounding ------------------------------------------------------------

def _spacing(x: Fraction, fmt) -> Fraction:
    if fmt.kind == "fixed":
        return Fraction(2) ** fmt.min_exp
    a = abs(x)
    k = 0
    while Fraction(2) ** k > a:
        k -= 1
    while Fraction(2) ** (k + 1) <= a:
        k += 1
    return Fraction(2) ** max(fmt.min_exp, k - fmt.precision + 1)


def ref_round(x: Fraction, fmt) -> Fraction:
    """Round by distance comparison between the two neighbours of ``x``."""
    x = Fraction(x)
    if x == 0:
        return x
    u = _spacing(x, fmt)
    lo = (x // u) * u
    if lo == x:
        return x
    hi = lo + u
    d = fmt.direction
    toward_zero, away = (lo, hi) if x > 0 else (hi, lo)
    if d == "dn":
        return lo
    if d == "up":
        return hi
    if d == "zr":
        return toward_zero
    if d == "aw":
        return away
    if d == "od":
        return lo if (lo / u) % 2 == 1 else hi
    dl, dh = x - lo, hi - x
    if dl < dh:
        return lo
    if dh < dl:
        return hi
    return {
        "ne": lo if (lo / u) % 2 == 0 else hi,
        "no": lo if (lo / u) % 2 == 1 else hi,
        "nz": toward_zero,
        "na": away,
        "nd": lo,
        "nu": hi,
    }[d]


def _sqrt(x: Fraction) -> Fraction:
    from math import isqrt
    if x < 0:
        return Fraction(0)
    n, d = isqrt(x.numerator), isqrt(x.denominator)
    if n * n != x.numerator or d * d != x.denominator:
        raise NotRational(str(x))
    return Fraction(n, d)


def ref_eval(e, env, relop_error=None) -> Fraction:
    """Exact value with ``ref_round`` roundings and total division."""
    memo = {}
    for n in e.walk():
        if n.op == "const":
            v = n.value
        elif n.op == "var":
            v = Fraction(env[n.name])
        else:
            a = [memo[x.uid] for x in n.args]
            if n.op == "round":
                if isinstance(n.fmt, RelOp):
                    v = a[0] * (1 + (relop_error(n) if relop_error else 0))
                else:
                    v = ref_round(a[0], n.fmt)
            else:
                v = {
                    "neg": lambda: -a[0],
                    "abs": lambda: abs(a[0]),
                    "sqrt": lambda: _sqrt(a[0]),
                    "add": lambda: a[0] + a[1],
                    "sub": lambda: a[0] - a[1],
                    "mul": lambda: a[0] * a[1],
                    "div": lambda: a[0] / a[1] if a[1] else Fraction(0),
                    "fma": lambda: a[0] * a[1] + a[2],
                }[n.op]()
        memo[n.uid] = v
    return memo[e.uid]


# -- random values --------------------------------------------------------------

def rand_in(rng: random.Random, lo: Fraction, hi: Fraction, bits: int = 40) -> Fraction:
    """A random rational in ``[lo, hi]``, hitting endpoints now and then."""
    r = rng.random()
    if r < 0.05:
        return Fraction(lo)
    if r < 0.1:
        return Fraction(hi)
    t = Fraction(rng.getrandbits(bits), 1 << bits)
    return lo + (hi - lo) * t


def holds(atom, v: Fraction) -> bool:
    if atom.kind == "in":
        return atom.lo <= v <= atom.hi
    if atom.kind == "le":
        return v <= atom.hi
    if atom.kind == "ge":
        return v >= atom.lo
    return True


def sample_sequent(sequent, rng, count, draw, kinds=("in", "le", "ge")):
    """Up to ``count`` valuations from ``draw`` that satisfy every hypothesis.

    ``kinds`` restricts which hypotheses are enforced.
    """
    hyps = [h for h in sequent.hypotheses if h.kind in kinds]
    out = []
    tries = 0
    while len(out) < count and tries < 50 * count:
        tries += 1
        env = draw(rng)
        try:
            if all(holds(h, ref_eval(h.expr, env)) for h in hyps):
                out.append(env)
        except NotRational:
            pass
    return out


def draw_exponential(rng):
    """Valuations for the exponential script, built to meet its hypotheses."""
    from roundbound.formats import float_format
    f32 = float_format("ieee_32", "ne")
    l2 = Fraction(12566158, 2 ** 48)
    s = Fraction(8572288, 2 ** 23) + Fraction(13833605, 2 ** 44)
    n = Fraction(rng.randint(-10176, 10176))
    R = rand_in(rng, Fraction(0), Fraction(217, 10000))
    r2 = ref_round(-n * l2, f32)
    return {
        "n": n,
        "r1": R - r2,
        "R0": R - rand_in(rng, Fraction(-1, 2 ** 34), Fraction(1, 2 ** 34)),
        "S0": s - rand_in(rng, Fraction(-1, 2 ** 41), Fraction(1, 2 ** 41)),
        "Z": rand_in(rng, Fraction(-55, 2 ** 39), Fraction(55, 2 ** 39)),
    }


def draw_box(ranges):
    """Draw each named variable uniformly from its range."""
    def draw(rng):
        return {k: rand_in(rng, Fraction(lo), Fraction(hi)) for k, (lo, hi) in ranges.items()}
    return draw


@pytest.fixture
def rng():
    return random.Random(20240611)


def fact_holds(fact, env) -> bool:
    """Whether an engine fact is true for the concrete valuation ``env``."""
    v = ref_eval(fact.expr, env)
    k, val = fact.kind, fact.value
    if k == "BND":
        return val.lo.to_fraction() <= v <= val.hi.to_fraction()
    if k == "ABS":
        return val.lo.to_fraction() <= abs(v) <= val.hi.to_fraction()
    if k == "FIX":
        return (v / Fraction(2) ** val).denominator == 1
    if k == "FLT":
        if v == 0:
            return True
        # strip factors of two and count significant bits
        n, d = abs(v).numerator, abs(v).denominator
        if d & (d - 1):
            return False
        while n % 2 == 0:
            n //= 2
        return n.bit_length() <= val
    if k == "LE":
        return v <= val.to_fraction()
    if k == "GE":
        return v >= val.to_fraction()
    raise AssertionError(f"unknown fact kind {k}")


def uses_inequality(fact, sequent, memo=None) -> bool:
    """Whether ``fact`` was derived from a one-sided hypothesis."""
    memo = {} if memo is None else memo
    key = id(fact)
    if key not in memo:
        if fact.theorem == "hyp":
            memo[key] = sequent.hypotheses[fact.params["index"]].kind != "in"
        else:
            memo[key] = any(uses_inequality(o, sequent, memo) for o in fact.operands)
    return memo[key]


# -- certificate corruption --------------------------------------------------------

def _inequality_lemmas(checker):
    """Lemma ids whose truth may rest on a one-sided hypothesis."""
    out = set()
    for lid in sorted(checker.lemmas):
        lem = checker.lemmas[lid]
        if lem.kind in ("LE", "GE") or any(o in out for o in lem.ops):
            out.add(lid)
    return out


def corruption_trials(cert, draw, rng, count=100):
    """Corrupt one BND/ABS endpoint at a time so that it excludes a real value.

    Returns ``(lemma id, report)`` pairs; a sound checker must reject
    every corrupted certificate at the corrupted lemma.
    """
    import copy

    from roundbound.bisect import shortest_dyadic
    from roundbound.checker import Checker, check
    from roundbound.interval import Interval

    checker = Checker(cert)
    checker.structure()
    exprs = checker.exprs
    skip = _inequality_lemmas(checker)
    envs = {}
    for si, seq in enumerate(cert.sequents):
        hyps = [(exprs[e], lo, hi) for kind, e, lo, hi in seq.hyps if kind == "in"]
        found = []
        for _ in range(4000):
            env = draw(rng)
            try:
                if all(lo <= ref_eval(e, env) <= hi for e, lo, hi in hyps):
                    found.append(env)
            except NotRational:
                continue
            if len(found) >= 200:
                break
        envs[si] = found
    candidates = [lem for lem in checker.lemmas.values()
                  if lem.kind in ("BND", "ABS") and not lem.value.is_point()
                  and lem.id not in skip]
    assert candidates, "no lemma to corrupt"
    out = []
    attempts = 0
    while len(out) < count:
        attempts += 1
        assert attempts < 100 * count, "could not place corruptions"
        lem = rng.choice(candidates)
        si, tiles = checker.context[lem.id]
        pool = [env for env in envs[si]
                if all(lo <= ref_eval(exprs[a], env) <= hi for a, (lo, hi) in tiles.items())]
        if not pool:
            continue
        v = ref_eval(exprs[lem.subject], rng.choice(pool))
        if lem.kind == "ABS":
            v = abs(v)
        lo, hi = lem.value.lo.to_fraction(), lem.value.hi.to_fraction()
        assert lo <= v <= hi, (lem, v)
        raise_lo = v < hi and (v == lo or rng.random() < 0.5)
        if raise_lo:
            new = Interval(shortest_dyadic((v + hi) / 2, hi), lem.value.hi)
        else:
            new = Interval(lem.value.lo, shortest_dyadic(lo, (lo + v) / 2))
        bad = copy.deepcopy(cert)
        target = next(x for x in bad.lemmas() if x.id == lem.id)
        target.value = new
        out.append((lem.id, check(bad)))
    return out
