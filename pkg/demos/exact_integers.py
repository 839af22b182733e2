"""Exact operations: when the exact result is representable, the error is zero.

Products and sums of integers below 1000 fit in 24 bits, so rounding
them to single precision changes nothing, and the prover says so.
"""

from pathlib import Path

from roundbound.session import prove_script, render_report

src = (Path(__file__).parent / "scripts" / "small_integers.g").read_text()
result = prove_script(src)
print(render_report(result))

lemmas = list(result.certificate().lemmas())
print(sum(l.theorem == "err_exact" for l in lemmas), "exactness lemmas out of", len(lemmas))

# widen the domain and the products no longer fit
wide = src.replace("[-1000, 1000]", "[-10000, 10000]")
print(render_report(prove_script(wide)))
