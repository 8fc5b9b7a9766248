"""
Additive energy and even moments
================================

For an indicator polynomial the 2k-th moment is the k-th additive energy
of its frequency set. Integers and log-primes sit at opposite extremes.
"""

from dhardy import dpoly as dp
from dhardy import energy as en
from dhardy import freq as fq
from dhardy import norms

for N in (4, 8, 16, 32):
    ints = en.additive_energy(fq.integers(N), range(1, N + 1), 2).value
    prm = en.additive_energy(fq.log_primes(N), range(1, N + 1), 2).value
    print(f"N={N:>2}  E_2 integers {ints:>6} = {(2 * N ** 3 + N) // 3:>6}   "
          f"E_2 primes {prm:>5} = {2 * N * N - N:>5}")

# the same numbers through the norm engines
d = dp.indicator(fq.log_primes(5), range(1, 6))
for method in ("exact-even", "torus-fft", "besicovitch"):
    est = norms.norm(d, 4, method)
    print(f"{method:<12} {est.value:.10f}  {est.certainty}")

# E_6 of {1..100} exceeds 64 bits; counts stay exact integers
print(en.additive_energy(fq.integers(100), range(1, 101), 6).value)
