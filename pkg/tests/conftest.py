"""Shared brute-force oracles.

These deliberately avoid the package's algorithms: energies are counted by
enumerating tuples, norms by dense Riemann sums and grid maxima.
"""

import itertools
import math
from collections import Counter

import numpy as np
import pytest


def energy_bruteforce(values, k, combine=sum):
    """E_k by enumerating every 2k-tuple of ``values``.

    ``combine`` reduces a k-tuple to a comparable exact value (``sum`` for
    additive frequencies, ``math.prod`` for λ = log m).
    """
    count = 0
    for left in itertools.product(values, repeat=k):
        s = combine(left)
        for right in itertools.product(values, repeat=k):
            if combine(right) == s:
                count += 1
    return count


def energy_counter(values, k, combine=sum):
    """E_k as Σ r_k(σ)², with r_k from enumerating k-tuples."""
    r = Counter(combine(t) for t in itertools.product(values, repeat=k))
    return sum(c * c for c in r.values())


def circle_mean(int_exps, coeffs, p, nodes):
    """(1/M) Σ_j |Σ a_n e^{-i n θ_j}|^p on M equispaced nodes."""
    theta = 2 * np.pi * np.arange(nodes) / nodes
    vals = np.exp(-1j * np.outer(theta, np.asarray(int_exps))) @ np.asarray(coeffs, dtype=complex)
    return float(np.mean(np.abs(vals) ** p))


def circle_norm(int_exps, coeffs, p, nodes=None):
    """Exact for even p once nodes exceed p/2 times the degree span."""
    if nodes is None:
        nodes = 4 * (max(int_exps) + 1) * max(1, int(math.ceil(p)))
    return circle_mean(int_exps, coeffs, p, nodes) ** (1.0 / p)


def grid_sup(int_exps, coeffs, nodes=1 << 16):
    theta = 2 * np.pi * np.arange(nodes) / nodes
    exps = np.asarray(int_exps)
    best = 0.0
    for s in range(0, nodes, 4096):
        v = np.exp(-1j * np.outer(theta[s:s + 4096], exps)) @ np.asarray(coeffs, dtype=complex)
        best = max(best, float(np.abs(v).max()))
    return best


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
