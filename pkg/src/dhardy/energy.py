"""
Additive energy and k-fold sum spectra.

For a polynomial D = Σ a_n e^{-λ_n s} the k-fold spectrum is the map

    σ  ↦  c_k(σ) = Σ_{λ_{i1}+...+λ_{ik} = σ} a_{i1}···a_{ik},

i.e. the coefficients of D^k. Summing |c_k(σ)|² gives ‖D‖_{2k}^{2k}; for an
indicator it is the k-th additive energy E_k of the frequency set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from operator import add, mul
from typing import Iterable

import numpy as np

from . import freq as fq
from .dpoly import DirichletPolynomial, indicator
from .freq import Frequency, SumKey

METHODS = ("mitm", "iterated")


@dataclass(frozen=True)
class EnergyCount:
    """Exact E_k of a finite set (``approximate`` only for real frequencies)."""

    value: int
    k: int
    n: int
    method: str = "mitm"
    approximate: bool = False

    def __post_init__(self):
        if self.n and not (self.n ** self.k <= self.value <= self.n ** (2 * self.k)):
            raise ArithmeticError(f"E_{self.k}={self.value} violates n^k <= E_k <= n^2k for n={self.n}")

    def as_dict(self):
        return {"count": str(self.value), "k": self.k, "n": self.n,
                "method": self.method, "approximate": self.approximate}


@dataclass
class SumSpectrum:
    """Map from raw sum keys to c_k(σ).

    Raw keys are the exact sum (integer kind), the sum scaled by the common
    denominator (rational kind), the product Π m (log-integer kind), or a
    τ-bucket index (real kind).
    """

    kind: str
    k: int
    coeffs: dict
    scale: int = 1
    tol: float = 0.0
    approximate: bool = False
    totals: dict = field(default_factory=dict, repr=False)

    def __len__(self):
        return len(self.coeffs)

    def key(self, raw) -> SumKey:
        if self.kind == fq.RATIONAL:
            v = Fraction(raw, self.scale)
            return SumKey(self.kind, v, v)
        if self.kind == fq.REAL:
            return SumKey(self.kind, raw, self.totals.get(raw))
        return SumKey(self.kind, raw, raw)

    def items(self):
        for raw, c in self.coeffs.items():
            yield self.key(raw), c

    def as_dict(self) -> dict:
        """``{exact sum value: c}``; for log-integer kinds the key is Π m."""
        return {self.key(r).value: c for r, c in self.coeffs.items()}

    def norm_sq(self):
        """Σ_σ |c_k(σ)|², exact when all coefficients are integers."""
        vals = list(self.coeffs.values())
        if all(isinstance(v, int) for v in vals):
            return sum(v * v for v in vals)
        arr = np.array(vals, dtype=complex)
        return float(np.sum(arr.real ** 2 + arr.imag ** 2))


def _raw_terms(freq: Frequency, indices):
    """Per-index raw keys and the combining operation."""
    if freq.kind == fq.LOG_INTEGER:
        return [freq.exact(i) for i in indices], mul, 1
    if freq.kind in (fq.INTEGER, fq.RATIONAL):
        ints, scale = freq.integer_scale
        return [ints[i - 1] for i in indices], add, scale
    return [float(freq.values[i - 1]) for i in indices], add, 1


def _convolve(d1: dict, d2: dict, op) -> dict:
    out: dict = {}
    get = out.get
    for k1, v1 in d1.items():
        for k2, v2 in d2.items():
            k = op(k1, k2)
            out[k] = get(k, 0) + v1 * v2
    return out


def _convolve_real(d1, t1, d2, t2, tol):
    """Bucketed convolution; returns (coeffs, totals, ambiguous)."""
    out, tot = {}, {}
    amb = False
    for k1, v1 in d1.items():
        for k2, v2 in d2.items():
            s = t1[k1] + t2[k2]
            b = math.floor(s / tol)
            err = 8 * np.finfo(float).eps * abs(s)
            if math.floor((s - err) / tol) != b or math.floor((s + err) / tol) != b:
                amb = True
            out[b] = out.get(b, 0) + v1 * v2
            tot.setdefault(b, s)
    return out, tot, amb


def _base_spectrum(poly: DirichletPolynomial):
    idx = [i for i, _ in poly.items]
    keys, op, scale = _raw_terms(poly.freq, idx)
    coeffs: dict = {}
    for key, (_, a) in zip(keys, poly.items):
        coeffs[key] = coeffs.get(key, 0) + a
    return coeffs, op, scale


def sum_spectrum(poly: DirichletPolynomial, k: int, method: str = "mitm") -> SumSpectrum:
    """k-fold spectrum of ``poly``.

    ``method="mitm"`` builds order k from half orders (binary powering);
    ``method="iterated"`` folds in one factor at a time and serves as the
    reference route.
    """
    if k < 1:
        raise ValueError("spectrum order k must be >= 1")
    if method not in METHODS:
        raise ValueError(f"unknown spectrum method {method!r}")
    f = poly.freq
    base, op, scale = _base_spectrum(poly)
    if f.kind == fq.REAL:
        return _real_spectrum(poly, base, k, method)
    if method == "iterated":
        cur = dict(base)
        for _ in range(k - 1):
            cur = _convolve(cur, base, op)
    else:
        cur = _power(base, k, op, {})
    return SumSpectrum(f.kind, k, cur, scale)


def _power(base, k, op, memo):
    if k == 1:
        return base
    if k in memo:
        return memo[k]
    hi = _power(base, (k + 1) // 2, op, memo)
    lo = _power(base, k // 2, op, memo)
    memo[k] = _convolve(hi, lo, op)
    return memo[k]


def _real_spectrum(poly, base, k, method):
    tol = poly.freq.tol
    b1, t1, amb = {}, {}, False
    for s, c in base.items():
        b = math.floor(s / tol)
        b1[b] = b1.get(b, 0) + c
        t1.setdefault(b, s)
    if method == "iterated":
        cur, tot = b1, t1
        for _ in range(k - 1):
            cur, tot, a = _convolve_real(cur, tot, b1, t1, tol)
            amb |= a
    else:
        memo = {1: (b1, t1)}

        def pw(j):
            nonlocal amb
            if j not in memo:
                h, ht = pw((j + 1) // 2)
                l, lt = pw(j // 2)
                c, t, a = _convolve_real(h, ht, l, lt, tol)
                amb |= a
                memo[j] = (c, t)
            return memo[j]

        cur, tot = pw(k)
    return SumSpectrum(fq.REAL, k, cur, 1, tol, amb, tot)


def representation_counts(freq: Frequency, A: Iterable[int], k: int, method: str = "mitm") -> SumSpectrum:
    """r_k(σ): number of ordered k-tuples from A with sum σ."""
    return sum_spectrum(indicator(freq, A), k, method)


def additive_energy(freq: Frequency, A: Iterable[int], k: int, method: str = "mitm") -> EnergyCount:
    """E_k({λ_n : n ∈ A}) = Σ_σ r_k(σ)²."""
    A = sorted(set(A))
    if k < 1:
        raise ValueError("energy order k must be >= 1")
    if not A:
        return EnergyCount(0, k, 0, method)
    spec = representation_counts(freq, A, k, method)
    return EnergyCount(int(spec.norm_sq()), k, len(A), method, spec.approximate)
