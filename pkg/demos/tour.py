"""A short tour: prove the two-sequent script, inspect the answer, check a certificate."""

from pathlib import Path

from roundbound.checker import check
from roundbound.dyadic import Dyadic
from roundbound.formats import float_format, round_value
from roundbound.interval import Interval, iv_add, iv_mul
from roundbound.session import certificate_text, prove_script, render_report

HERE = Path(__file__).parent / "scripts"

# dyadics are exact: m * 2**e with an odd mantissa
d = Dyadic(12, -3)
print(d, d.to_fraction())          # 3b-1 3/2
print(Dyadic(1, -2) + Dyadic(3, -4))

# intervals with dyadic endpoints
a = Interval(1, 2)
b = Interval(Dyadic(-1, -1), 3)
print(iv_add(a, b), iv_mul(a, b))

# single precision, round to nearest even
binary32 = float_format(24, -149, "ne")
print(round_value(Dyadic(16777217), binary32))   # 2**24 + 1 is not representable

# a whole script: hypotheses, a disjunctive goal and an enclosure query
src = (HERE / "two_sequents.g").read_text()
result = prove_script(src)
print(render_report(result))

# the certificate is plain text, checked with exact rationals only
text = certificate_text(result)
print(text.splitlines()[0], "...", len(text.splitlines()), "lines")
print(check(result.certificate()).verdict)
