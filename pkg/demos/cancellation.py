"""Bisection in action.

z = x * (rnd(x - 1) - (x - 1)) is tiny, but interval arithmetic on the
whole domain cannot see that rnd(y) - y shrinks near x = 1.  Splitting
the domain of x gives every tile its own, much tighter, rounding error.
"""

from pathlib import Path

from roundbound.session import prove_script, render_report

src = (Path(__file__).parent / "scripts" / "cancellation.g").read_text()

plain = src.replace("|z| $ x;", "")
print(render_report(prove_script(plain)))   # unproved without the split

result = prove_script(src)
print(render_report(result))

(seq,) = result.sequents
leaves = list(seq.tree.leaves())
print(len(leaves), "tiles")
for leaf in leaves:
    ((expr, iv),) = leaf.box.values()
    status = "contradiction" if leaf.outcome.absurd is not None else "bound holds"
    print(f"  {result.script.text(expr)} in {iv}: {status}")
