"""
Fundamental functions on small pools
====================================

Exhaustive φ values on a pool of ordinary indices, and the signed variants
that bracket them. Rudin-Shapiro signs keep the sup norm near √N.
"""

import math

from dhardy import freq as fq
from dhardy import fundamental as fu

f = fq.log_integers(12)
pool = range(2, 13)
for p in (1, 2, 4, math.inf):
    sp = fu.SpaceSpec(p, f)
    row = []
    for which in ("l-eps", "l", "u", "u-eps"):
        signs = "real" if which.endswith("eps") else "ones"
        row.append(fu.phi(sp, pool, 4, which, signs).value)
    print(f"p={p!s:>3}  " + "  ".join(f"{v:.4f}" for v in row))

# randomized search gives one-sided bounds at larger N
sp = fu.SpaceSpec(4, fq.log_integers(64))
b = fu.phi(sp, range(2, 65), 24, "u", mode="randomized", seed=1, iters=500)
print(b.lower, b.upper, b.witness[:6])

for k in (2, 6, 10):
    b = fu.rudin_shapiro_witness(k)
    print(2 ** k, round(b.upper, 4), round(2 * math.sqrt(2 ** k), 4))
