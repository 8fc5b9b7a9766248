"""
Growth of the Dirichlet kernel
==============================

L_p norms of D_N = Σ_{n≤N} z^n for every N from 16 to 4096, computed in one
pass by growing the partial sums on a shared grid.
"""

import math

from dhardy import asymptotics as asy
from dhardy import norms

Ns = list(range(16, 4097))
sweep = asy.sweep_norms("integers", ["1", "4/3", "2", "4"], Ns)

# p > 1: power law with exponent 1/p'
for p in ("4/3", "2", "4"):
    pts = [(r["N"], r["value"]) for r in sweep[p]]
    fit = asy.fit_power_law(pts)
    print(f"p={p:>3}  exponent {fit.exponent:.4f}  target {1 / norms.conjugate(norms.parse_p(p)):.4f}")

# p = 1: the Lebesgue constants grow like (4/π²) log N
fit = asy.classify_growth([(r["N"], r["value"]) for r in sweep["1"]])
print(f"p=  1  {fit.model}, slope {fit.slope:.4f} (4/pi^2 = {4 / math.pi ** 2:.4f})")

# the local slope drifts toward 1/4 only slowly at p = 4/3
vals = {r["N"]: r["value"] for r in sweep["4/3"]}
for N in (16, 64, 256, 1024, 2048):
    print(N, round(math.log(vals[2 * N] / vals[N], 2), 4))
