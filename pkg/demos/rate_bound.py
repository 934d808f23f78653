"""Error norm of the Durrmeyer variant against 2 omega(f, phi(y))."""

from mkzlab import OperatorFamily, abshalf, constant_qseq, e2, modulus_of_continuity, rate_report, sinpi
from mkzlab.approx_lab import default_x_grid

xs = default_x_grid(41)
fam = OperatorFamily("durrmeyer-q-mkz", constant_qseq(0.9))
ys = [0.5, 0.75, 0.9]

print("omega(f, d) for the bundled functions")
for f in (e2, sinpi, abshalf):
    print(f"  {f.name:<8}", [round(modulus_of_continuity(f, d), 4) for d in (0.05, 0.1, 0.3)])

for f in (abshalf, sinpi, e2):
    rep = rate_report(fam, f, ys, xs, mu=lambda y: (1 - y) ** 0.5)
    print(f"\n{f.name}: all margins >= 0 -> {rep.ok()}")
    for y, lhs, p, rhs, ratio in zip(ys, rep.lhs, rep.phi, rep.rhs, rep.mu_ratio):
        print(f"  y={y:<5} lhs={lhs:.4f}  phi={p:.4f}  2omega={rhs:.4f}  lhs/sqrt(1-y)={ratio:.4f}")
