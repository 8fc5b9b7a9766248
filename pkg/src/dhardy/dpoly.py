"""
Dirichlet polynomials Σ_{n∈A} a_n e^{-λ_n s} and their constructions.

Evaluation is always on the imaginary axis, s = it, where the polynomial
is the almost periodic function t ↦ Σ a_n e^{-iλ_n t}.
"""

from __future__ import annotations

import cmath
import functools
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping

import numpy as np
import sympy

from . import freq as fq
from .freq import Frequency

UNIMODULAR_TOL = 1e-12


def _canon(a):
    """Store integer-valued coefficients as ints so exact engines stay exact."""
    if isinstance(a, bool):
        return int(a)
    if isinstance(a, int):
        return a
    z = complex(a)
    if z.imag == 0:
        x = z.real
        if x.is_integer() and abs(x) < 2 ** 53:
            return int(x)
        return x
    return z


@dataclass(frozen=True)
class DirichletPolynomial:
    """Sparse polynomial over a frequency; zero coefficients are never stored."""

    freq: Frequency
    items: tuple = ()

    def __post_init__(self):
        n = len(self.freq)
        cleaned = {}
        for i, a in self.items:
            i = int(i)
            if not 1 <= i <= n:
                raise IndexError(f"coefficient index {i} outside frequency range 1..{n}")
            a = _canon(a)
            if a != 0:
                cleaned[i] = cleaned.get(i, 0) + a
        items = tuple(sorted((i, _canon(a)) for i, a in cleaned.items() if a != 0))
        object.__setattr__(self, "items", items)

    @classmethod
    def from_coeffs(cls, freq: Frequency, coeffs: Mapping[int, complex] | Iterable) -> "DirichletPolynomial":
        pairs = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
        return cls(freq, tuple(pairs))

    def __len__(self):
        return len(self.items)

    @property
    def coeffs(self) -> dict:
        return dict(self.items)

    @cached_property
    def indices(self) -> np.ndarray:
        return np.array([i for i, _ in self.items], dtype=int)

    @cached_property
    def coeff_array(self) -> np.ndarray:
        return np.array([complex(a) for _, a in self.items], dtype=complex)

    @cached_property
    def lambdas(self) -> np.ndarray:
        if not self.items:
            return np.zeros(0)
        return self.freq.values[self.indices - 1]

    @property
    def is_integral(self):
        """All coefficients are (Gaussian-free) Python ints."""
        return all(isinstance(a, int) for _, a in self.items)

    def l1(self) -> float:
        return float(np.sum(np.abs(self.coeff_array)))

    def l2_squared(self):
        if self.is_integral:
            return sum(a * a for _, a in self.items)
        return float(np.sum(np.abs(self.coeff_array) ** 2))

    def lq(self, q: float) -> float:
        a = np.abs(self.coeff_array)
        if math.isinf(q):
            return float(a.max(initial=0.0))
        return float(np.sum(a ** q) ** (1.0 / q))

    def scale(self, c) -> "DirichletPolynomial":
        return DirichletPolynomial(self.freq, tuple((i, c * a) for i, a in self.items))

    def __mul__(self, c):
        return self.scale(c)

    __rmul__ = __mul__

    def evaluate(self, t):
        """Σ a_n e^{-iλ_n t} at a scalar or array of real t."""
        scalar = np.ndim(t) == 0
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if not self.items:
            out = np.zeros(t.shape, dtype=complex)
        else:
            out = np.empty(t.shape, dtype=complex)
            flat_t, flat_o = t.ravel(), out.reshape(-1)
            step = max(1, 2 ** 22 // len(self.items))
            for s in range(0, flat_t.size, step):
                ph = np.exp(-1j * np.outer(flat_t[s:s + step], self.lambdas))
                flat_o[s:s + step] = (ph * self.coeff_array).sum(axis=1)
        return complex(out[0]) if scalar else out

    __call__ = evaluate


def zero(freq: Frequency) -> DirichletPolynomial:
    return DirichletPolynomial(freq, ())


# ---------------------------------------------------------------- sign patterns

@dataclass(frozen=True)
class SignPattern:
    """Unimodular coefficients ε_j on an index set."""

    values: tuple
    tag: str = "sampled-unimodular"

    def __post_init__(self):
        vals = tuple(sorted((int(i), _canon(e)) for i, e in (
            self.values.items() if isinstance(self.values, Mapping) else self.values)))
        for i, e in vals:
            if abs(abs(complex(e)) - 1.0) > UNIMODULAR_TOL:
                raise ValueError(f"sign at index {i} has modulus {abs(e)}, not 1")
        object.__setattr__(self, "values", vals)

    def as_dict(self):
        return dict(self.values)

    @classmethod
    def ones(cls, A: Iterable[int]) -> "SignPattern":
        return cls(tuple((i, 1) for i in A), "all-ones")

    @classmethod
    def real(cls, A: Iterable[int], signs: Iterable[int]) -> "SignPattern":
        return cls(tuple(zip(A, signs)), "real-signs")


def root_of_unity(j: int, q: int):
    """exp(2πij/q), returned as an exact int for ±1."""
    j %= q
    if j == 0:
        return 1
    if 2 * j == q:
        return -1
    if 4 * j == q:
        return 1j
    if 4 * j == 3 * q:
        return -1j
    return cmath.exp(2j * math.pi * j / q)


def sign_alphabet(spec: str | None) -> tuple[list, str]:
    """Finite sign alphabet for ``"ones"``, ``"real"`` or ``"roots:q"``."""
    spec = (spec or "ones").strip().lower()
    if spec in ("ones", "1", "all-ones"):
        return [1], "all-ones"
    if spec in ("real", "pm1", "±1", "real-signs"):
        return [1, -1], "real-signs"
    if spec.startswith("roots"):
        _, _, q = spec.partition(":")
        q = int(q or 8)
        if q < 1:
            raise ValueError("roots:q needs q >= 1")
        return [root_of_unity(j, q) for j in range(q)], f"{q}-th-roots"
    raise ValueError(f"unknown sign set {spec!r}")


def indicator(freq: Frequency, A: Iterable[int], eps: SignPattern | Mapping | None = None) -> DirichletPolynomial:
    """Signed indicator Σ_{j∈A} ε_j e^{-λ_j s}; all-ones when ``eps`` is None."""
    A = sorted(set(int(a) for a in A))
    if eps is None:
        return DirichletPolynomial(freq, tuple((j, 1) for j in A))
    e = eps.as_dict() if isinstance(eps, SignPattern) else dict(eps)
    missing = [j for j in A if j not in e]
    if missing:
        raise KeyError(f"sign pattern missing index {missing[0]}")
    for j in A:
        if abs(abs(complex(e[j])) - 1.0) > UNIMODULAR_TOL:
            raise ValueError(f"sign at index {j} is not unimodular")
    return DirichletPolynomial(freq, tuple((j, e[j]) for j in A))


# ---------------------------------------------------------------- Bohr lift

@dataclass(frozen=True)
class TorusPolynomial:
    """Polynomial Σ c_α z^α in finitely many torus variables."""

    coeffs: tuple
    nvars: int = 0

    def __post_init__(self):
        items = self.coeffs.items() if isinstance(self.coeffs, Mapping) else self.coeffs
        acc = {}
        for alpha, c in items:
            alpha = tuple(int(x) for x in alpha)
            if any(x < 0 for x in alpha):
                raise ValueError(f"negative exponent in multi-index {alpha}")
            while alpha and alpha[-1] == 0:
                alpha = alpha[:-1]
            acc[alpha] = acc.get(alpha, 0) + c
        acc = {a: _canon(c) for a, c in acc.items() if c != 0}
        nv = max((len(a) for a in acc), default=0)
        norm = tuple(sorted((a + (0,) * (nv - len(a)), c) for a, c in acc.items()))
        object.__setattr__(self, "coeffs", norm)
        object.__setattr__(self, "nvars", nv)

    def as_dict(self):
        return dict(self.coeffs)

    @property
    def degrees(self) -> tuple:
        if not self.coeffs:
            return ()
        arr = np.array([a for a, _ in self.coeffs], dtype=int).reshape(len(self.coeffs), self.nvars)
        return tuple(int(x) for x in arr.max(axis=0))

    def exponents(self) -> np.ndarray:
        return np.array([a for a, _ in self.coeffs], dtype=int).reshape(len(self.coeffs), self.nvars)

    def coeff_array(self) -> np.ndarray:
        return np.array([complex(c) for _, c in self.coeffs], dtype=complex)

    def evaluate(self, z):
        """Value at a point z of the torus (sequence of length ``nvars``)."""
        z = np.asarray(z, dtype=complex)
        return complex(sum(c * np.prod(z ** np.array(a)) for a, c in self.coeffs))


@functools.lru_cache(maxsize=1 << 16)
def multi_index(m: int) -> tuple:
    """Exponent vector α with m = 𝔭^α (𝔭 = 2, 3, 5, ...)."""
    if m < 1:
        raise ValueError("multi_index needs m >= 1")
    if m == 1:
        return ()
    if m & (m - 1) == 0:
        return (m.bit_length() - 1,)
    fac = sympy.factorint(m)
    width = int(sympy.primepi(max(fac)))
    alpha = [0] * width
    for p, e in fac.items():
        alpha[int(sympy.primepi(p)) - 1] = e
    return tuple(alpha)


def from_multi_index(alpha) -> int:
    m = 1
    for j, e in enumerate(alpha):
        if e:
            m *= int(sympy.prime(j + 1)) ** int(e)
    return m


def bohr_lift(poly: DirichletPolynomial) -> TorusPolynomial:
    """Place the coefficient at m = 𝔭^α on the monomial z^α."""
    if poly.freq.kind != fq.LOG_INTEGER:
        raise TypeError("Bohr lift needs a log-integer frequency")
    return TorusPolynomial(tuple((multi_index(poly.freq.exact(i)), a) for i, a in poly.items))


def bohr_inverse(tp: TorusPolynomial, freq: Frequency | None = None) -> DirichletPolynomial:
    """Inverse of :func:`bohr_lift`.

    With ``freq`` given, coefficients are placed at the matching indices of
    that log-integer frequency; otherwise a frequency is built from the
    support m-values.
    """
    ms = [(from_multi_index(a), c) for a, c in tp.coeffs]
    if freq is None:
        terms = sorted(m for m, _ in ms)
        freq = Frequency(fq.LOG_INTEGER, tuple(terms), source={"kind": "explicit",
                         "terms": [f"log:{m}" for m in terms]})
    if freq.kind != fq.LOG_INTEGER:
        raise TypeError("Bohr inverse target must be a log-integer frequency")
    where = {m: i + 1 for i, m in enumerate(freq.terms)}
    try:
        return DirichletPolynomial(freq, tuple((where[m], c) for m, c in ms))
    except KeyError as exc:
        raise KeyError(f"m={exc.args[0]} is not in the target frequency") from None


# ---------------------------------------------------------------- constructions

def rudin_shapiro_coeffs(k: int) -> np.ndarray:
    """Coefficients a_{k,1..2^k} of P_k, P_0(z) = z, P_k(z) = P_{k-1}(z²) + z⁻¹P_{k-1}(-z²)."""
    if k < 0:
        raise ValueError("Rudin-Shapiro order must be >= 0")
    a = np.array([1], dtype=np.int64)
    for _ in range(k):
        j = np.arange(1, a.size + 1)
        nxt = np.empty(2 * a.size, dtype=np.int64)
        nxt[1::2] = a                            # z^{2j}
        nxt[0::2] = np.where(j % 2 == 0, a, -a)  # z^{2j-1}, sign (-1)^j
        a = nxt
    return a


def rudin_shapiro(k: int) -> DirichletPolynomial:
    """P_k as a Dirichlet polynomial over the integer frequency 1..2^k."""
    a = rudin_shapiro_coeffs(k)
    f = fq.integers(a.size)
    return DirichletPolynomial(f, tuple((j + 1, int(x)) for j, x in enumerate(a)))


def dirichlet_kernel(N: int) -> DirichletPolynomial:
    """D_N(z) = z + z² + ... + z^N."""
    if N < 1:
        raise ValueError("Dirichlet kernel needs N >= 1")
    return indicator(fq.integers(N), range(1, N + 1))


# ---------------------------------------------------------------- serialization

def to_json(poly: DirichletPolynomial) -> dict:
    return {"freq": poly.freq.to_descriptor(),
            "coeffs": [[i, complex(a).real, complex(a).imag] for i, a in poly.items]}


def from_json(obj) -> DirichletPolynomial:
    """Inverse of :func:`to_json`; accepts a dict or a JSON string."""
    if isinstance(obj, str):
        obj = json.loads(obj)
    if "freq" not in obj or "coeffs" not in obj:
        raise ValueError("polynomial JSON needs 'freq' and 'coeffs'")
    idx = [int(c[0]) for c in obj["coeffs"]]
    f = fq.make_frequency(obj["freq"], n_hint=max(idx, default=1))
    items = []
    for pos, c in enumerate(obj["coeffs"]):
        if len(c) not in (2, 3):
            raise ValueError(f"coefficient entry {pos} must be [index, re] or [index, re, im]")
        items.append((int(c[0]), complex(c[1], c[2] if len(c) == 3 else 0.0)))
    return DirichletPolynomial(f, tuple(items))


def parse_index_set(s) -> list[int]:
    """``"1..3"``, ``"1,4,7"``, ``"[1, 2]"`` or an iterable of ints."""
    if isinstance(s, str):
        s = s.strip()
        if s.startswith("["):
            return sorted({int(x) for x in json.loads(s)})
        out = set()
        for part in filter(None, (p.strip() for p in s.split(","))):
            if ".." in part:
                lo, hi = part.split("..")
                out.update(range(int(lo), int(hi) + 1))
            else:
                out.add(int(part))
        return sorted(out)
    return sorted({int(x) for x in s})
