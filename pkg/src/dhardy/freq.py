"""
Frequencies: exact representations, generators and k-fold sum keys.

A frequency is a finite, strictly increasing prefix of non-negative reals.
Four storage kinds are supported:

``integer``      λ_n stored as Python ints
``rational``     λ_n stored as :class:`fractions.Fraction`
``log_integer``  λ_n = log m_n, the positive integers m_n are stored
``real``         λ_n stored as floats, sums compared up to a tolerance

Indices are 1-based throughout the package, so ``freq[1]`` is λ_1.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, reduce
from typing import Iterable, Sequence

import numpy as np
import sympy

INTEGER = "integer"
RATIONAL = "rational"
LOG_INTEGER = "log_integer"
REAL = "real"
KINDS = (INTEGER, RATIONAL, LOG_INTEGER, REAL)
EXACT_KINDS = (INTEGER, RATIONAL, LOG_INTEGER)

DEFAULT_TOL = 1e-9


class FrequencyError(ValueError):
    """Invalid frequency data or descriptor."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


@dataclass(frozen=True)
class Frequency:
    """Finite prefix (λ_1, ..., λ_n) of a frequency.

    Parameters
    ----------
    kind : str
        One of ``KINDS``.
    terms : tuple
        Exact stored values (see module docstring).
    tol : float
        Bucket width τ for the ``real`` kind; ignored otherwise.
    source : dict
        Generator provenance, kept for reports.
    independent : bool
        True when the generator guarantees ℚ-linear independence
        of the values (``log_primes``).
    """

    kind: str
    terms: tuple
    tol: float = 0.0
    source: dict = field(default_factory=dict, compare=False, hash=False)
    independent: bool = field(default=False, compare=False, hash=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise FrequencyError(f"unknown frequency kind {self.kind!r}")
        if self.kind == REAL and self.tol <= 0:
            object.__setattr__(self, "tol", DEFAULT_TOL)
        _validate(self.kind, self.terms)

    def __len__(self):
        return len(self.terms)

    def __getitem__(self, n):
        """Float value of λ_n (1-based)."""
        return float(self.values[self._pos(n)])

    def _pos(self, n):
        if not 1 <= n <= len(self.terms):
            raise IndexError(f"frequency index {n} out of range 1..{len(self.terms)}")
        return n - 1

    @cached_property
    def values(self) -> np.ndarray:
        if self.kind == LOG_INTEGER:
            return np.array([math.log(m) for m in self.terms], dtype=float)
        return np.array([float(x) for x in self.terms], dtype=float)

    @property
    def is_exact(self):
        return self.kind in EXACT_KINDS

    def exact(self, n):
        """Stored exact term for index n."""
        return self.terms[self._pos(n)]

    @cached_property
    def integer_scale(self):
        """``(ints, scale)`` with λ_n = ints[n-1] / scale for integer/rational kinds."""
        if self.kind == INTEGER:
            return tuple(self.terms), 1
        if self.kind == RATIONAL:
            scale = reduce(math.lcm, (Fraction(x).denominator for x in self.terms), 1)
            return tuple(int(Fraction(x) * scale) for x in self.terms), scale
        raise FrequencyError(f"{self.kind} frequency has no integer scaling")

    def restrict(self, indices: Iterable[int]) -> "Frequency":
        """Sub-frequency of the given (sorted) indices; provenance is kept."""
        idx = sorted(set(indices))
        terms = tuple(self.terms[self._pos(i)] for i in idx)
        src = dict(self.source, restricted_to=idx)
        return Frequency(self.kind, terms, self.tol, src, self.independent)

    def describe(self):
        return self.source.get("label") or f"{self.kind}[{len(self)}]"

    def to_descriptor(self) -> dict:
        if self.source.get("kind") and "restricted_to" not in self.source:
            return {k: v for k, v in self.source.items() if k != "label"}
        return {"kind": "explicit", "terms": [format_term(self.kind, t) for t in self.terms]}


def _validate(kind, terms):
    if len(terms) == 0:
        return
    if kind == LOG_INTEGER:
        for i, m in enumerate(terms):
            if not isinstance(m, int) or m < 1:
                raise FrequencyError(f"log-integer term m_{i + 1}={m!r} must be a positive integer", i + 1)
    elif kind == INTEGER:
        for i, x in enumerate(terms):
            if not isinstance(x, int):
                raise FrequencyError(f"integer term {i + 1} is {x!r}", i + 1)
    if kind != LOG_INTEGER and terms[0] < 0:
        raise FrequencyError("frequency values must be non-negative (index 1)", 1)
    for i in range(1, len(terms)):
        if not terms[i] > terms[i - 1]:
            raise FrequencyError(
                f"frequency must be strictly increasing; violated at index {i + 1}", i + 1)


def format_term(kind, term):
    if kind == LOG_INTEGER:
        return f"log:{term}"
    if kind == RATIONAL:
        return str(Fraction(term))
    return repr(term) if kind == REAL else str(term)


# ---------------------------------------------------------------- generators

def _exactify(x):
    if isinstance(x, (int, Fraction)):
        return x
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, float) and x.is_integer():
        return int(x)
    return x


def _make(kind, terms, source, independent=False, tol=0.0):
    if kind == RATIONAL and all(Fraction(t).denominator == 1 for t in terms):
        kind, terms = INTEGER, [int(t) for t in terms]
    return Frequency(kind, tuple(terms), tol, source, independent)


def integers(n: int) -> Frequency:
    """λ = (1, 2, ..., n)."""
    return _make(INTEGER, range(1, n + 1), {"kind": "integers", "n": n})


def log_integers(n: int) -> Frequency:
    """Ordinary frequency λ_k = log k, k = 1..n."""
    return _make(LOG_INTEGER, range(1, n + 1), {"kind": "log_integers", "n": n})


def primes(n: int) -> list[int]:
    """First n primes."""
    if n <= 0:
        return []
    return list(sympy.primerange(2, sympy.prime(n) + 1))


def log_primes(n: int) -> Frequency:
    """λ_k = log p_k; ℚ-linearly independent by unique factorization."""
    return _make(LOG_INTEGER, primes(n), {"kind": "log_primes", "n": n}, independent=True)


def powers_of_two(n: int) -> Frequency:
    """λ_j = j log 2, j = 1..n, stored as m_j = 2^j."""
    return _make(LOG_INTEGER, [2 ** j for j in range(1, n + 1)], {"kind": "powers_of_two", "n": n})


def lacunary(L, base, n: int) -> Frequency:
    """λ_j = base·L^j, j = 0..n-1. Exact when L and base are rational."""
    L, base = _exactify(L), _exactify(base)
    if not L > 1:
        raise FrequencyError(f"lacunary ratio must exceed 1, got {L}")
    if not base > 0:
        raise FrequencyError(f"lacunary base must be positive, got {base}")
    src = {"kind": "lacunary", "L": str(L), "base": str(base), "n": n}
    if isinstance(L, (int, Fraction)) and isinstance(base, (int, Fraction)):
        return _make(RATIONAL, [Fraction(base) * Fraction(L) ** j for j in range(n)], src)
    return _make(REAL, [float(base) * float(L) ** j for j in range(n)], src)


def arithmetic_progression(a, b, n: int) -> Frequency:
    """λ_k = a + k·b, k = 1..n."""
    a, b = _exactify(a), _exactify(b)
    if a < 0 or not b > 0:
        raise FrequencyError("arithmetic progression needs a >= 0 and b > 0")
    src = {"kind": "arithmetic_progression", "a": str(a), "b": str(b), "n": n}
    if isinstance(a, (int, Fraction)) and isinstance(b, (int, Fraction)):
        return _make(RATIONAL, [Fraction(a) + k * Fraction(b) for k in range(1, n + 1)], src)
    return _make(REAL, [float(a) + k * float(b) for k in range(1, n + 1)], src)


def union(*parts: Frequency) -> Frequency:
    """Sorted union of frequencies. Mixed exact kinds fall back to ``real``."""
    kinds = {p.kind for p in parts}
    src = {"kind": "union", "parts": [p.to_descriptor() for p in parts]}
    if kinds == {LOG_INTEGER}:
        terms = sorted(set().union(*(p.terms for p in parts)))
        indep = len(parts) == 1 and parts[0].independent
        if not indep:
            indep = all(p.independent for p in parts) and _all_prime(terms)
        return _make(LOG_INTEGER, terms, src, independent=indep)
    if kinds <= {INTEGER, RATIONAL}:
        terms = sorted(set().union(*(map(Fraction, p.terms) for p in parts)))
        return _make(RATIONAL, terms, src)
    tol = max([p.tol for p in parts] + [DEFAULT_TOL])
    vals = sorted(set().union(*(p.values.tolist() for p in parts)))
    return _make(REAL, vals, src, tol=tol)


def _all_prime(ms):
    return all(sympy.isprime(m) for m in ms)


def parse_term(s):
    """Parse one exact term string: ``"3/2"``, ``"log:12"``, ``"2.5"`` or an int."""
    if isinstance(s, bool):
        raise FrequencyError(f"bad frequency term {s!r}")
    if isinstance(s, int):
        return INTEGER, s
    if isinstance(s, float):
        return (INTEGER, int(s)) if s.is_integer() else (REAL, s)
    s = str(s).strip()
    if s.startswith("log:"):
        return LOG_INTEGER, int(s[4:])
    try:
        return INTEGER, int(s)
    except ValueError:
        pass
    if "/" in s:
        return RATIONAL, Fraction(s)
    try:
        x = float(s)
    except ValueError as exc:
        raise FrequencyError(f"bad frequency term {s!r}") from exc
    return REAL, x


def explicit(terms: Sequence, tol: float = 0.0) -> Frequency:
    """Frequency from an explicit list of term strings or numbers."""
    parsed = [parse_term(t) for t in terms]
    kinds = {k for k, _ in parsed}
    vals = [v for _, v in parsed]
    src = {"kind": "explicit", "terms": [str(t) for t in terms]}
    if kinds == {LOG_INTEGER}:
        return _make(LOG_INTEGER, vals, src)
    if LOG_INTEGER in kinds:
        raise FrequencyError("cannot mix log:m terms with plain values in an explicit list")
    if kinds <= {INTEGER}:
        return _make(INTEGER, vals, src)
    if kinds <= {INTEGER, RATIONAL}:
        return _make(RATIONAL, [Fraction(v) for v in vals], src)
    return _make(REAL, [float(v) for v in vals], src, tol=tol)


_SHORT = {
    "int": "integers", "integers": "integers",
    "logint": "log_integers", "log_integers": "log_integers", "ordinary": "log_integers",
    "logprimes": "log_primes", "log_primes": "log_primes", "primes": "log_primes",
    "pow2": "powers_of_two", "powers_of_two": "powers_of_two",
    "ap": "arithmetic_progression", "arithmetic_progression": "arithmetic_progression",
    "lac": "lacunary", "lacunary": "lacunary",
}


def make_frequency(spec, n_hint: int | None = None) -> Frequency:
    """Build a frequency from a descriptor.

    ``spec`` may be a :class:`Frequency`, a dict such as
    ``{"kind": "log_primes", "n": 50}``, a JSON array of exact term
    strings, a JSON string of either, or a short form like ``"int:12"``,
    ``"logprimes:8"``, ``"ap:0,1,16"`` or ``"lac:2,1,10"``. When the size
    is omitted (``"int"``), ``n_hint`` supplies it.
    """
    if isinstance(spec, Frequency):
        return spec
    if isinstance(spec, (list, tuple)):
        return explicit(spec)
    if isinstance(spec, str):
        s = spec.strip()
        if s.startswith(("{", "[")):
            try:
                return make_frequency(json.loads(s), n_hint)
            except json.JSONDecodeError as exc:
                raise FrequencyError(f"malformed frequency JSON at column {exc.colno}: {exc.msg}") from exc
        name, _, args = s.partition(":")
        kind = _SHORT.get(name.lower())
        if kind is None:
            raise FrequencyError(f"unknown frequency descriptor {spec!r}")
        vals = [a for a in args.split(",") if a] if args else []
        d: dict = {"kind": kind}
        if kind == "arithmetic_progression":
            if len(vals) == 3:
                d.update(a=vals[0], b=vals[1], n=int(vals[2]))
            elif len(vals) == 2:
                d.update(a=vals[0], b=vals[1])
            else:
                d.update(a="0", b="1")
        elif kind == "lacunary":
            if len(vals) < 2:
                raise FrequencyError("lacunary descriptor needs lac:L,base[,n]")
            d.update(L=vals[0], base=vals[1])
            if len(vals) > 2:
                d["n"] = int(vals[2])
        elif vals:
            d["n"] = int(vals[0])
        return make_frequency(d, n_hint)
    if not isinstance(spec, dict):
        raise FrequencyError(f"cannot build a frequency from {type(spec).__name__}")
    kind = spec.get("kind")
    kind = _SHORT.get(kind, kind)
    n = spec.get("n", n_hint)
    if kind == "explicit":
        return explicit(spec["terms"], float(spec.get("tol", 0.0)))
    if kind == "union":
        return union(*(make_frequency(p, n_hint) for p in spec["parts"]))
    if n is None:
        raise FrequencyError(f"frequency descriptor {spec!r} needs a size 'n'")
    n = int(n)
    if kind == "integers":
        return integers(n)
    if kind == "log_integers":
        return log_integers(n)
    if kind == "log_primes":
        return log_primes(n)
    if kind == "powers_of_two":
        return powers_of_two(n)
    if kind == "lacunary":
        return lacunary(_num(spec["L"]), _num(spec.get("base", 1)), n)
    if kind == "arithmetic_progression":
        return arithmetic_progression(_num(spec.get("a", 0)), _num(spec.get("b", 1)), n)
    raise FrequencyError(f"unknown frequency kind {kind!r}")


def _num(x):
    if isinstance(x, str):
        k, v = parse_term(x)
        if k == LOG_INTEGER:
            raise FrequencyError("log:m not allowed as a generator parameter")
        return v
    return x


# ---------------------------------------------------------------- sum keys

@dataclass(frozen=True)
class SumKey:
    """Canonical key of a k-fold sum λ_{i1} + ... + λ_{ik}.

    ``value`` is the exact sum (integer/rational), the product Π m
    (log-integer), or the bucket ``floor(sum / τ)`` (real). ``total`` and
    ``ambiguous`` do not take part in equality; ``ambiguous`` marks real
    sums close enough to a bucket boundary that rounding could move them.
    """

    kind: str
    value: object
    total: object = field(default=None, compare=False)
    ambiguous: bool = field(default=False, compare=False)


def _real_key(total, tol, err):
    b = math.floor(total / tol)
    amb = math.floor((total - err) / tol) != b or math.floor((total + err) / tol) != b
    return b, amb


def sum_key(freq: Frequency, indices: Sequence[int]) -> SumKey:
    """Key of Σ λ_i over the (1-based) index tuple; permutation invariant."""
    if len(indices) < 1:
        raise ValueError("sum_key needs at least one index")
    terms = [freq.exact(i) for i in indices]
    if freq.kind == LOG_INTEGER:
        return SumKey(LOG_INTEGER, math.prod(terms), math.prod(terms))
    if freq.kind in (INTEGER, RATIONAL):
        s = sum(terms) if freq.kind == INTEGER else sum(map(Fraction, terms), Fraction(0))
        return SumKey(freq.kind, s, s)
    total = math.fsum(terms)
    err = 4 * len(terms) * np.finfo(float).eps * max(abs(t) for t in terms)
    b, amb = _real_key(total, freq.tol, err)
    return SumKey(REAL, b, total, amb)


def combine_keys(freq: Frequency, a: SumKey, b: SumKey) -> SumKey:
    """Key of the concatenated tuple, from the keys of its two parts."""
    if freq.kind == LOG_INTEGER:
        v = a.value * b.value
        return SumKey(LOG_INTEGER, v, v)
    if freq.kind in (INTEGER, RATIONAL):
        v = a.value + b.value
        return SumKey(freq.kind, v, v)
    total = a.total + b.total
    err = 8 * np.finfo(float).eps * abs(total)
    bucket, amb = _real_key(total, freq.tol, err)
    return SumKey(REAL, bucket, total, amb or a.ambiguous or b.ambiguous)


def is_lacunary(freq: Frequency, L) -> bool:
    """True iff λ_{n+1} >= L·λ_n for every stored n."""
    if len(freq) < 2:
        raise ValueError("lacunarity needs at least two terms")
    if freq.kind == LOG_INTEGER:
        if freq.terms[0] == 1:
            raise ValueError("λ_1 = 0: lacunary ratio undefined")
        return all(math.log(freq.terms[i + 1]) >= L * math.log(freq.terms[i])
                   for i in range(len(freq) - 1))
    if freq.terms[0] == 0:
        raise ValueError("λ_1 = 0: lacunary ratio undefined")
    if freq.is_exact and isinstance(_exactify(L), (int, Fraction)):
        L = Fraction(_exactify(L))
        return all(Fraction(freq.terms[i + 1]) >= L * Fraction(freq.terms[i])
                   for i in range(len(freq) - 1))
    v = freq.values
    return bool(np.all(v[1:] >= L * v[:-1]))
