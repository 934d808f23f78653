"""Abel-summed Korovkin error norms for q-MKZ along the cube sequence."""

import numpy as np

from mkzlab import OperatorFamily, abshalf, e0, e1, e2, gen_cube_qseq, korovkin_runs, sinpi

xs = np.linspace(0, 0.99, 41)
fam = OperatorFamily("q-mkz", gen_cube_qseq())
runs = korovkin_runs(fam, [e0, e1, e2, sinpi, abshalf], [0.5, 0.9, 0.99], xs)

print("sup_x (1-y) sum_n |L_n f(x) - f(x)| y^n, summed from n = 3")
print(f"{'f':<8}" + "".join(f"y={y:<10}" for y in (0.5, 0.9, 0.99)))
for name, run in runs.items():
    print(f"{name:<8}" + "".join(f"{v:<12.2e}" for v in run.values))

print("\ne0 and e1 are reproduced exactly; e2 carries the whole Korovkin signal")
for name in ("sinpi", "abshalf"):
    r = runs[name]
    print(f"{name}: from y=0.9 on decreasing {r.values[1] > r.values[2]}, horizons {r.horizons}")
