"""Moments of q-MKZ and its Durrmeyer variant against their second-moment envelopes."""

import numpy as np

from mkzlab import OperatorFamily, constant_qseq, moment_report
from mkzlab.operators import durrmeyer_e2_envelope, qmkz_e2_envelope

xs = np.linspace(0, 0.99, 12)

print("q-MKZ reproduces 1 and x; M(e2) sits between x^2 and x^2 + x/[n-1]")
for q in (0.5, 0.9, 1.0):
    fam = OperatorFamily("q-mkz", constant_qseq(q))
    for n in (3, 10, 25):
        r = moment_report(fam, n, xs)
        width = np.max(r.upper - r.lower)
        print(f"  q={q:<4} n={n:<3} |M(e0)-1|={r.e0_err:.1e} |M(e1)-x|={r.e1_err:.1e}"
              f"  envelope width {width:.4f}  ok={r.ok()}")

print("\nDurrmeyer variant: M(e2) - x^2 against its own envelope")
for q in (0.5, 0.9):
    fam = OperatorFamily("durrmeyer-q-mkz", constant_qseq(q))
    r = moment_report(fam, 10, xs)
    excess = r.moments[2] - xs**2
    print(f"  q={q}: max excess {excess.max():.4f}, ok={r.ok()}")

# the envelopes shrink like 1/[n-1]_q, which stalls when q < 1 stays fixed
for q in (0.5, 1.0):
    print(f"\nupper envelope at x=1/2, q={q}:",
          [round(float(qmkz_e2_envelope(n, q, 0.5)[1] - 0.25), 5) for n in (5, 50, 500)])
print("Durrmeyer envelope at x=1/2, q=0.9:",
      [round(float(durrmeyer_e2_envelope(n, 0.9, 0.5)[1]), 5) for n in (5, 50, 500)])
