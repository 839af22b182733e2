"""Range and absolute error of a single-precision exponential kernel.

Two rewriting hints relate the computed value e to the ideal E0.  Both
are checked by ring normalisation, so the certificate is unconditional.
"""

from pathlib import Path

from roundbound.checker import check
from roundbound.session import prove_script, render_report

src = (Path(__file__).parent / "scripts" / "exponential.g").read_text()
result = prove_script(src)
print(render_report(result))

# how each hint was justified
for lhs, rhs, verified in result.user_rules():
    print(result.script.text(lhs), "->", result.script.text(rhs), ":",
          "ring identity" if verified else "assumed")

cert = result.certificate(widened=False)
wide = result.certificate()
print("endpoint bits before widening:", cert.endpoint_bits())
print("endpoint bits after widening: ", wide.endpoint_bits())
print(check(wide).verdict)
