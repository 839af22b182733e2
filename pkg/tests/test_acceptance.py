"""Acceptance criteria 1 to 10, one test each.

Every test prints a ``criterion N: PASS|FAIL`` line, even under pytest's
output capture.  Run this file directly to see only those lines.
"""

import random
import sys
import time
from fractions import Fraction

import pytest

from roundbound.certificate import widen
from roundbound.checker import check
from roundbound.cli import main
from roundbound.formats import DIRECTIONS
from roundbound.interval import Interval
from roundbound.logic import decompose, prop_text
from roundbound.parser import parse
from roundbound.rules import RULES
from roundbound.session import prove_script, render_report

from conftest import (SCRIPTS, corruption_trials, draw_box, draw_exponential, load, ref_eval,
                      sample_sequent)
from test_formats import INPUTS, enclosure_violations, round_mismatches
from test_interval import ALL_OPERATORS, containment_violations
from test_rules import rule_violations


def report(capsys, n, ok, detail):
    with capsys.disabled():
        print(f"\ncriterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def _query_answers(result):
    out = {}
    for r in result.sequents:
        for a in r.sequent.goal_atoms():
            if a.kind == "query":
                out[result.script.text(a.expr)] = r.answer(a)
    return out


def test_criterion_1_two_sequents(capsys):
    t0 = time.perf_counter()
    result = prove_script(load("two_sequents.g"))
    elapsed = time.perf_counter() - t0
    ans = _query_answers(result).get("x + y")
    text = render_report(result)
    ok = (result.proved and ans == Interval(3, 5) and "x + y in [3, 5]" in text
          and elapsed < 1)
    report(capsys, 1, ok, f"x + y in {ans}, {elapsed:.2f} s")


def test_criterion_2_empty_goal(tmp_path, capsys):
    p = tmp_path / "empty.g"
    p.write_text("{ 13/10 in [1.3,1.3] }\n")
    code = main([str(p)])
    err = capsys.readouterr().err
    ok = code == 2 and "no representable subset" in err
    report(capsys, 2, ok, f"exit {code}: {err.strip()}")


def test_criterion_3_bisection(capsys):
    src = load("cancellation.g")
    t0 = time.perf_counter()
    with_hint = prove_script(src)
    elapsed = time.perf_counter() - t0
    without = prove_script(src.replace("|z| $ x;", ""))
    (r,) = with_hint.sequents
    goal = r.sequent.goal_atoms()[0]
    ok = (with_hint.proved and not without.proved and elapsed < 5
          and prop_text(goal) == "|z| <= 1b-26")
    report(capsys, 3, ok, f"with hint: proved on {len(list(r.tree.leaves()))} tiles "
                          f"in {elapsed:.2f} s; without hint: "
                          f"{'proved' if without.proved else 'unproved'}")


def test_criterion_4_decomposition(capsys):
    script = parse(load("two_sequents.g"))
    got = [(sorted(prop_text(h) for h in s.hypotheses), prop_text(s.goal))
           for s in decompose(script.proposition)]
    want = [
        (sorted(["x <= 1", "x - 2 in [-2, 0]"]), "(x + 1 in [0, 2] \\/ x + y in ?)"),
        (sorted(["x <= 1", "x - 2 in [-2, 0]", "y in [3, 4]"]), "x + y in ?"),
    ]
    report(capsys, 4, got == want, f"{len(got)} sequents")


def test_criterion_5_exponential(capsys):
    t0 = time.perf_counter()
    result = prove_script(load("exponential.g"))
    answers = _query_answers(result)
    e_iv, err_iv = answers.get("e"), answers.get("e - E0")
    cert = result.certificate()
    verdict = check(cert).verdict
    elapsed = time.perf_counter() - t0
    statuses = [s for *_, s in cert.identities]
    rng = random.Random(5)
    seq = result.sequents[0].sequent
    envs = sample_sequent(seq, rng, 10 ** 4, draw_exponential)
    e_expr = result.script.aliases["e"]
    err_expr = next(a.expr for r in result.sequents for a in r.sequent.goal_atoms()
                    if result.script.text(a.expr) == "e - E0")
    outside = 0
    for env in envs:
        for expr, iv in ((e_expr, e_iv), (err_expr, err_iv)):
            v = ref_eval(expr, env)
            outside += not (iv.lo.to_fraction() <= v <= iv.hi.to_fraction())
    ok = (result.proved and e_iv is not None and err_iv is not None and len(envs) == 10 ** 4
          and outside == 0 and verdict == "valid" and len(statuses) == 2 and elapsed < 60)
    report(capsys, 5, ok,
           f"e in [{e_iv.lo.to_decimal(8)}, {e_iv.hi.to_decimal(8)}], "
           f"e - E0 in [{float(err_iv.lo.to_fraction()):.3g}, {float(err_iv.hi.to_fraction()):.3g}]; "
           f"{len(envs)} samples, {outside} outside; hints {statuses}; "
           f"certificate {verdict}; {elapsed:.1f} s")


def test_criterion_6_interval_kernel(capsys):
    bad = {name: containment_violations(name, 10 ** 5) for name in ALL_OPERATORS}
    total = sum(bad.values())
    report(capsys, 6, total == 0,
           f"{len(bad)} operators x 10^5 trials, {total} violations")


def test_criterion_7_rounding_model(capsys):
    mism = sum(len(round_mismatches(d)) for d in DIRECTIONS)
    viol = n_abs = n_rel = 0
    for d in DIRECTIONS:
        bad, a, r = enclosure_violations(d)
        viol += len(bad)
        n_abs += a
        n_rel += r
    report(capsys, 7, mism == 0 and viol == 0,
           f"{len(INPUTS)} inputs x 11 directions: {mism} rounding mismatches; "
           f"{n_abs} absolute and {n_rel} relative enclosure checks, {viol} violations")


def test_criterion_8_rewrite_rules(capsys):
    bad = {r.name: len(rule_violations(r, 10 ** 4)) for r in RULES}
    total = sum(bad.values())
    report(capsys, 8, total == 0, f"{len(RULES)} rules x 10^4 valuations, {total} violations")


PROVED_CASES = {
    "two_sequents.g": draw_box({"x": (0, 1), "y": (-10, 10)}),
    "cancellation.g": draw_box({"x_": (-1, 4)}),
    "small_integers.g": draw_box({"a_": (-1001, 1001), "b_": (-1001, 1001)}),
    "exponential.g": draw_exponential,
    "{ x in [1,2] -> 1 / x in [0.5, 1] }": draw_box({"x": (1, 2)}),
    "{ x in [0, 1] -> x * (1 - x) in [0, 0.3] }\n$ x in 16;": draw_box({"x": (0, 1)}),
    "@rnd = float<ieee_64, ne>;\ny = rnd(x * x);\n"
    "{ x in [1, 2] -> (y - x * x) / (x * x) in [-1b-53, 1b-53] }": draw_box({"x": (1, 2)}),
    "{ x in [-2,-1] -> sqrt(x * x) + x + x in [-2,-1] }\nsqrt(x * x) + x -> 0;":
        draw_box({"x": (-2, -1)}),
    "@fx = fixed<-10, dn>;\ny = fx(x * x);\n{ x in [0,1] -> y - x * x in [-1b-10, 0] }":
        draw_box({"x": (0, 1)}),
}


def test_criterion_9_certificates(capsys):
    lines = []
    ok = True
    for name, draw in PROVED_CASES.items():
        src = load(name) if name.endswith(".g") else name
        result = prove_script(src)
        raw = result.certificate(widened=False)
        wide = widen(raw)
        a = check(raw).valid
        b = check(wide).valid
        c = wide.endpoint_bits() <= raw.endpoint_bits()
        trials = corruption_trials(wide, draw, random.Random(name), 100)
        d = sum(not rep.valid and not rep.structural
                and f"lemma {lid} " in rep.message for lid, rep in trials)
        ok &= result.proved and a and b and c and d == 100
        label = name if name.endswith(".g") else name.splitlines()[-1][:40]
        lines.append(f"{label}: raw {a}, widened {b}, bits {raw.endpoint_bits()}"
                     f"->{wide.endpoint_bits()}, rejected {d}/100")
    report(capsys, 9, ok, "; ".join(lines))


def test_criterion_10_exactness(capsys):
    result = prove_script(load("small_integers.g"))
    answers = _query_answers(result)
    cert = result.certificate()
    exact = sum(lem.theorem == "err_exact" for lem in cert.lemmas())
    ok = (result.proved and all(v == Interval(0, 0) for v in answers.values())
          and len(answers) == 3 and exact == 3)
    report(capsys, 10, ok, ", ".join(f"{k} in {v}" for k, v in answers.items())
           + f"; {exact} exactness lemmas")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
