"""
Norm engines for Dirichlet polynomials.

``norm`` dispatches on the exponent and the frequency kind:

=================  ===========================================================
exact-parseval     p = 2, √Σ|a_n|²
exact-even         p = 2k, (Σ_σ |c_k(σ)|²)^{1/2k} from the k-fold spectrum
circle-fft         integer/rational frequency, FFT quadrature on the circle
torus-fft          log-integer frequency, FFT quadrature of the Bohr lift
steinhaus-radial   ℚ-independent frequency, Bessel integral for E|Σ a_n z_n|^p
besicovitch        windowed time average over [-R, R], R doubling
sup-sampled        grid search plus local refinement of |D(it)|
kronecker-l1       ℚ-independent frequency, sup = Σ|a_n|
=================  ===========================================================
"""

from __future__ import annotations

import functools
import inspect
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import integrate, optimize, special

from . import freq as fq
from .dpoly import DirichletPolynomial
from .energy import sum_spectrum

METHODS = ("exact-parseval", "exact-even", "circle-fft", "torus-fft", "steinhaus-radial",
           "besicovitch", "sup-sampled", "kronecker-l1")

DEFAULT_MAX_NODES = 2 ** 22
EPS = np.finfo(float).eps


class EngineError(ValueError):
    """An engine cannot handle the given polynomial or exponent."""


class BudgetError(EngineError):
    """The engine would exceed its node/sample budget."""


@dataclass
class NormEstimate:
    """A norm value with the method that produced it and its error bracket.

    ``certainty`` is ``"exact"``, ``"lower-bound"`` or ``"two-sided"``;
    ``lower`` and ``upper`` bracket the true value (heuristically for
    quadrature that did not reach a provable bound, see ``diagnostics``).
    """

    value: float
    p: float
    method: str
    certainty: str = "exact"
    lower: float = None
    upper: float = None
    converged: bool = True
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("norm value must be non-negative")
        if self.method == "exact-parseval" and self.p != 2:
            raise ValueError("exact-parseval only applies to p = 2")
        if self.lower is None:
            self.lower = self.value
        if self.upper is None:
            self.upper = self.value

    @property
    def error(self):
        return max(self.upper - self.value, self.value - self.lower)

    def as_dict(self) -> dict:
        return {"value": self.value, "p": format_p(self.p), "method": self.method,
                "certainty": self.certainty, "lower": self.lower,
                "upper": None if math.isinf(self.upper) else self.upper,
                "converged": self.converged, "diagnostics": self.diagnostics}


# ---------------------------------------------------------------- exponents

def parse_p(p) -> float:
    """Exponent from a number or a string like ``"4/3"``, ``"inf"``."""
    if isinstance(p, str):
        s = p.strip().lower()
        if s in ("inf", "infinity", "∞", "oo"):
            return math.inf
        p = float(Fraction(s))
    p = float(p)
    if not p >= 1:
        raise ValueError(f"exponent must satisfy p >= 1, got {p}")
    return p


def format_p(p) -> str:
    if math.isinf(p):
        return "inf"
    fr = Fraction(p).limit_denominator(64)
    if abs(float(fr) - p) < 1e-12:
        return str(fr)
    return repr(p)


def conjugate(p: float) -> float:
    """p' with 1/p + 1/p' = 1 (1 ↔ ∞)."""
    if p == 1:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


def even_order(p: float):
    """k when p = 2k for an integer k >= 1, else None."""
    if math.isinf(p):
        return None
    k = p / 2.0
    if k >= 1 and abs(k - round(k)) < 1e-12:
        return int(round(k))
    return None


# ---------------------------------------------------------------- exact engines

def norm_h2(poly: DirichletPolynomial) -> NormEstimate:
    """‖D‖_2 = √Σ|a_n|² (orthonormality of the exponentials)."""
    s = poly.l2_squared()
    val = math.sqrt(s)
    return NormEstimate(val, 2.0, "exact-parseval", "exact", diagnostics={"l2_squared": str(s)})


def lift_exponents(poly: DirichletPolynomial) -> np.ndarray:
    """Bohr-lift exponent vectors α_n (rows, in the order of ``poly.items``)."""
    from .dpoly import multi_index
    alphas = [multi_index(poly.freq.exact(i)) for i, _ in poly.items]
    width = max((len(a) for a in alphas), default=0)
    out = np.zeros((len(alphas), width), dtype=np.int64)
    for r, a in enumerate(alphas):
        out[r, :len(a)] = a
    return out


def _lattice(poly: DirichletPolynomial, k: int = 1):
    """Integer exponents e_n (shifted to start at 0) such that k-fold sums of
    λ correspond injectively to k-fold sums of e, or None.

    Integer/rational kinds use the common-denominator scaling; log-integer
    kinds use a Kronecker substitution of the Bohr lift with radix k·deg+1.
    """
    f = poly.freq
    if f.kind in (fq.INTEGER, fq.RATIONAL):
        ints, _ = f.integer_scale
        e = np.array([ints[i - 1] for i, _ in poly.items], dtype=object)
    elif f.kind == fq.LOG_INTEGER:
        ex = lift_exponents(poly)
        radix, e = 1, np.zeros(len(ex), dtype=object)
        for j in range(ex.shape[1]):
            e = e + ex[:, j].astype(object) * radix
            radix *= k * int(ex[:, j].max()) + 1
    else:
        return None
    e = e - min(e)
    if max(e) > 2 ** 40:
        return None
    return e.astype(np.int64)


def _dense_even(poly, k):
    """Σ|c_k|² through dense convolution on the exponent lattice, or None."""
    if poly.freq.independent and len(poly) > 32:
        return None     # lattice would need one axis per term
    e = _lattice(poly, k)
    if e is None:
        return None
    span = int(e.max()) if e.size else 0
    if (k * span + 1) > 2 ** 22 or (len(poly) ** 2 < 4 * (span + 1) and len(poly) < 256):
        return None
    if poly.is_integral:
        l1 = sum(abs(a) for _, a in poly.items)
        if l1 ** k >= 2 ** 62:
            return None
        base = np.zeros(span + 1, dtype=np.int64)
        for pos, (_, a) in zip(e, poly.items):
            base[pos] += a
    else:
        base = np.zeros(span + 1, dtype=complex)
        np.add.at(base, e, poly.coeff_array)
    cur = base
    for _ in range(k - 1):
        cur = np.convolve(cur, base)
    if poly.is_integral:
        return sum(int(x) * int(x) for x in cur.tolist() if x)
    return float(np.sum(cur.real ** 2 + cur.imag ** 2))


def _independent_even(poly, k):
    """Σ|c_k|² for ℚ-independent support: only permutations of one multiset
    share a sum, so Σ|c_k|² = (k!)² [x^k] Π_n Σ_m |a_n|^{2m} x^m / (m!)²."""
    if poly.is_integral:
        weights = [a * a for _, a in poly.items]
        one, conv = Fraction(1), Fraction
    else:
        weights = [abs(complex(a)) ** 2 for _, a in poly.items]
        one, conv = 1.0, float
    fact = [math.factorial(m) for m in range(k + 1)]
    out = [one] + [0 * one] * k
    groups = {}
    for w in weights:
        groups[w] = groups.get(w, 0) + 1
    for w, cnt in sorted(groups.items()):
        ser = [conv(w ** m) / (fact[m] ** 2) for m in range(k + 1)]
        for _ in range(cnt):
            out = [sum(out[i] * ser[j - i] for i in range(j + 1)) for j in range(k + 1)]
    val = out[k] * fact[k] ** 2
    if isinstance(val, Fraction):
        assert val.denominator == 1
        return int(val)
    return float(val)


def norm_even(poly: DirichletPolynomial, k: int, method: str = "mitm") -> NormEstimate:
    """‖D‖_{2k} = (Σ_σ |c_k(σ)|²)^{1/2k}.

    For an indicator this is E_k^{1/2k}. ``method`` selects the spectrum
    construction (``"mitm"``, ``"iterated"``, or ``"dense"`` for the
    lattice convolution; ``"mitm"`` switches to dense automatically when it
    is cheaper).
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    p = 2.0 * k
    if len(poly) == 0:
        return NormEstimate(0.0, p, "exact-even")
    s, route, approx = None, method, False
    if method in ("mitm", "dense") and poly.freq.is_exact:
        s = _dense_even(poly, k)
        route = "dense" if s is not None else "mitm"
        if s is None and method == "mitm" and len(poly) > 32 and lift_independent(poly):
            s, route = _independent_even(poly, k), "independent"
    if s is None:
        if method == "dense":
            raise EngineError("no dense lattice route for this polynomial")
        spec = sum_spectrum(poly, k, route)
        s, approx = spec.norm_sq(), spec.approximate
    val = float(s) ** (1.0 / p) if isinstance(s, int) else max(s, 0.0) ** (1.0 / p)
    exact = poly.freq.is_exact
    diag = {"route": route, "norm_pow": str(s) if isinstance(s, int) else s}
    if not exact:
        diag["bucket_tol"] = poly.freq.tol
        diag["bucket_ambiguous"] = approx
    return NormEstimate(val, p, "exact-even", "exact" if exact else "two-sided", diagnostics=diag)


# ---------------------------------------------------------------- quadrature

def _pow2_at_least(n):
    return 1 << max(0, int(math.ceil(math.log2(max(n, 1)))))


def _refine_grid(coeffs, p, exps, shape_for, rtol, max_nodes, method, exact_when):
    """Shared doubling loop for circle and torus FFT quadrature.

    ``exps`` is an (n_terms, n_vars) integer array, ``shape_for(level)`` the
    grid shape at a refinement level and ``exact_when(shape)`` tells whether
    the rule integrates |D|^p exactly on that grid.
    """
    trace = []
    level = 0
    prev = None
    while True:
        shape = shape_for(level)
        nodes = int(np.prod(shape))
        if nodes > max_nodes and level > 0:
            break
        if nodes > max_nodes:
            raise BudgetError(f"{method}: initial grid {shape} exceeds {max_nodes} nodes")
        grid = np.zeros(shape, dtype=complex)
        idx = tuple((exps[:, j] % shape[j]) for j in range(len(shape)))
        np.add.at(grid, idx, coeffs)
        vals = np.abs(np.fft.fftn(grid)) ** p
        cur = float(np.mean(vals))
        sub = tuple(slice(None, None, 2) if s > 1 else slice(None) for s in shape)
        half = float(np.mean(vals[sub]))
        trace.append({"nodes": nodes, "mean": cur, "half_grid_mean": half})
        if exact_when(shape):
            return cur, trace, True, 0.0, True
        change = abs(cur - half) if prev is None else abs(cur - prev)
        prev = cur
        if change <= rtol * cur:
            return cur, trace, True, change, False
        level += 1
    last = trace[-1]
    return last["mean"], trace, False, abs(last["mean"] - last["half_grid_mean"]), False


def _finish(poly, p, mean, trace, converged, change, method, exact):
    val = mean ** (1.0 / p)
    if exact:
        rel = 64 * EPS
    else:
        rel = (change / mean / p) if mean > 0 else 0.0
    return NormEstimate(val, p, method, "two-sided", val * (1 - rel), val * (1 + rel), converged,
                        {"trace": trace, "exact_rule": exact})


def norm_circle_lp(poly: DirichletPolynomial, p, oversample: int = 2, rtol: float = 1e-10,
                   max_nodes: int = DEFAULT_MAX_NODES) -> NormEstimate:
    """(1/M Σ_m |D(2πm/M)|^p)^{1/p} on power-of-two grids, doubled until the
    relative change drops below ``rtol``.

    Only for integer and rational frequencies (rationals are rescaled by the
    common denominator, which does not change the mean).
    """
    p = parse_p(p)
    if poly.freq.kind not in (fq.INTEGER, fq.RATIONAL):
        raise EngineError("circle quadrature needs an integer or rational frequency; "
                          "use norm_besicovitch (or norm_torus_lp for log-integers)")
    if oversample < 2:
        raise ValueError("oversample must be >= 2")
    if math.isinf(p):
        return norm_sup(poly)
    if len(poly) == 0:
        return NormEstimate(0.0, p, "circle-fft")
    ints, _ = poly.freq.integer_scale
    e = np.array([ints[i - 1] for i, _ in poly.items], dtype=object)
    e = (e - min(e)).astype(np.int64)
    span = int(e.max())
    k = even_order(p)
    # |D|^p has (essential) bandwidth ⌈p/2⌉·span; smaller grids alias coherently
    band = math.ceil(p / 2) * span
    M0 = max(8, _pow2_at_least(oversample * (band + 1)))

    def exact_when(shape):
        return k is not None and shape[0] > k * span

    mean, trace, conv, change, ex_rule = _refine_grid(
        poly.coeff_array, p, e.reshape(-1, 1), lambda lv: (M0 << lv,), rtol, max_nodes, "circle-fft", exact_when)
    return _finish(poly, p, mean, trace, conv, change, "circle-fft", ex_rule)


def lift_independent(poly: DirichletPolynomial) -> bool:
    """True when the support frequencies are ℚ-linearly independent
    (declared by the generator, or detected through the Bohr lift)."""
    if len(poly) <= 1:
        return True
    f = poly.freq
    if f.independent:
        return True
    if f.kind != fq.LOG_INTEGER:
        return False
    if any(f.exact(i) == 1 for i, _ in poly.items):
        return False
    ex = lift_exponents(poly)
    nz = ex != 0
    if np.all(nz.sum(axis=1) == 1) and len(set(np.argmax(nz, axis=1).tolist())) == len(ex):
        return True
    return int(np.linalg.matrix_rank(ex.astype(float))) == len(ex)


def norm_torus_lp(poly: DirichletPolynomial, p, oversample: int = 2, rtol: float = 1e-10,
                  max_nodes: int = DEFAULT_MAX_NODES, radial: bool = True) -> NormEstimate:
    """L_p norm of the Bohr lift on the finite-dimensional torus.

    For a log-integer frequency the Besicovitch mean equals the Haar integral
    over T^M of the lifted polynomial. Independent supports (e.g. primes)
    go through the radial Steinhaus formula when ``radial`` is set.
    """
    p = parse_p(p)
    if poly.freq.kind != fq.LOG_INTEGER:
        raise EngineError("torus quadrature needs a log-integer frequency")
    if math.isinf(p):
        return norm_sup(poly)
    if len(poly) == 0:
        return NormEstimate(0.0, p, "torus-fft")
    if radial and even_order(p) is None and lift_independent(poly):
        return norm_steinhaus(poly, p)
    ex = lift_exponents(poly)
    if ex.shape[1] == 0:
        v = abs(complex(poly.items[0][1]))
        return NormEstimate(v, p, "torus-fft")
    degs = tuple(int(d) for d in ex.max(axis=0))
    k = even_order(p)
    base = [_pow2_at_least(oversample * (math.ceil(p / 2) * d + 1)) if d > 0 else 1 for d in degs]

    def shape_for(level):
        return tuple(b << level if d > 0 else 1 for b, d in zip(base, degs))

    def exact_when(shape):
        return k is not None and all(s > k * d for s, d in zip(shape, degs))

    mean, trace, conv, change, ex_rule = _refine_grid(poly.coeff_array, p, ex, shape_for, rtol, max_nodes,
                                             "torus-fft", exact_when)
    est = _finish(poly, p, mean, trace, conv, change, "torus-fft", ex_rule)
    est.diagnostics["nvars"] = ex.shape[1]
    est.diagnostics["degrees"] = list(degs)
    return est


# ---------------------------------------------------------------- Steinhaus radial engine

def _j0_series(b: np.ndarray, nterms: int) -> np.ndarray:
    """Taylor coefficients (in w = u²) of Π J_0(b_n u), truncated."""
    m = np.arange(nterms)
    logfact = special.gammaln(m + 1)
    out = np.zeros(nterms)
    out[0] = 1.0
    uniq, counts = np.unique(np.round(b, 15), return_counts=True)
    for bn, cnt in zip(uniq, counts):
        with np.errstate(divide="ignore"):
            mag = np.where(m == 0, 0.0, m * np.log(bn * bn / 4.0) if bn > 0 else -np.inf) - 2 * logfact
        ser = np.where(m % 2 == 0, 1.0, -1.0) * np.exp(mag)
        ser[0] = 1.0
        powr = np.zeros(nterms)
        powr[0] = 1.0
        sq, e = ser, int(cnt)
        while e:
            if e & 1:
                powr = np.convolve(powr, sq)[:nterms]
            sq = np.convolve(sq, sq)[:nterms]
            e >>= 1
        out = np.convolve(out, powr)[:nterms]
    return out


def _j0_envelope(x):
    """Non-increasing γ with |J_0(y)| <= γ(x) for all y >= x >= 0.

    |J_0(y)| <= exp(-y²/4) on [0, 1.906], |J_0| <= 0.4028 beyond the first
    zero's neighbourhood, and |J_0(y)| <= sqrt(2/(πy)) everywhere.
    """
    x = np.asarray(x, dtype=float)
    far = np.minimum(0.4028, np.sqrt(2.0 / (np.pi * np.maximum(x, 1e-300))))
    return np.where(x <= 1.906, np.exp(-x * x / 4.0), far)


def _bessel_mellin(p: float) -> float:
    """∫_0^∞ (J_0(u) - Taylor_{≤2j}) u^{-1-p} du = 2^{-p-1} Γ(-p/2) / Γ(1+p/2)."""
    return 2.0 ** (-p - 1) * special.gamma(-p / 2) / special.gamma(1 + p / 2)


def _low_dim_moment(b: np.ndarray, p: float) -> float:
    """E|Σ b_n z_n|^p for two or three terms by direct adaptive quadrature
    (rotation invariance fixes z_1 = 1)."""
    if b.size == 2:
        f = lambda th: abs(b[0] + b[1] * np.exp(1j * th)) ** p
        v, _ = integrate.quad(f, 0.0, np.pi, epsabs=1e-14, epsrel=1e-13, limit=400)
        return v / np.pi
    def inner(psi):
        w = b[0] + b[2] * np.exp(1j * psi)
        f = lambda th: abs(w + b[1] * np.exp(1j * th)) ** p
        v, _ = integrate.quad(f, 0.0, 2 * np.pi, epsabs=1e-14, epsrel=1e-12, limit=400)
        return v
    v, _ = integrate.quad(inner, 0.0, np.pi, epsabs=1e-13, epsrel=1e-11, limit=400)
    return v / (2 * np.pi ** 2)


@functools.lru_cache(maxsize=4096)
def _steinhaus_moment(b: tuple, p: float) -> tuple:
    """E|Σ b_n z_n|^p for amplitudes with Σ b_n² = 1; returns (value, rel_err)."""
    b = np.asarray(b, dtype=float)
    if b.size <= 3:
        return _low_dim_moment(b, p), 1e-10
    j = int(math.floor(p / 2))
    nser = 60
    c = _j0_series(b, nser)
    u0 = 1.0
    # [0, u0]: termwise integration of the series remainder
    m = np.arange(j + 1, nser)
    head = float(np.sum(c[j + 1:] * u0 ** (2 * m - p) / (2 * m - p)))
    # subtracted Taylor terms on [u0, ∞)
    mm = np.arange(0, j + 1)
    poly_tail = float(np.sum(c[:j + 1] * u0 ** (2 * mm - p) / (p - 2 * mm)))

    def phi(u):
        return float(np.prod(special.j0(b * u)))

    def bound(U):
        return float(np.prod(_j0_envelope(b * U))) * U ** (-p) / p

    U = 4.0
    while bound(U) > 1e-16 and U < 4096.0:
        U *= 2.0
    width = max(1.0, 2.0 / float(b.max()))
    edges = np.append(np.arange(u0, U, width), U)
    mid = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        v, _ = integrate.quad(lambda u: phi(u) * u ** (-1 - p), lo, hi, limit=200,
                              epsabs=1e-16, epsrel=1e-12)
        mid += v
    F = head + mid - poly_tail
    val = F / _bessel_mellin(p)
    return max(val, 0.0), max(1e-10, bound(U) / abs(F))


def steinhaus_moment(amplitudes, p: float) -> float:
    """E|Σ a_n z_n|^p over independent uniform z_n on the circle (p not even)."""
    a = np.abs(np.asarray(amplitudes, dtype=complex))
    a = a[a > 0]
    if a.size == 0:
        return 0.0
    if even_order(p) is not None:
        raise EngineError("use the exact-even engine for even p")
    sigma = math.sqrt(float(np.sum(a * a)))
    if a.size == 1:
        return float(a[0]) ** p
    b = tuple(sorted(np.round(a / sigma, 15).tolist()))
    val, _ = _steinhaus_moment(b, float(p))
    return sigma ** p * val


def steinhaus_error(amplitudes, p: float) -> float:
    """Relative error bound attached to :func:`steinhaus_moment`."""
    a = np.abs(np.asarray(amplitudes, dtype=complex))
    a = a[a > 0]
    if a.size <= 1:
        return 0.0
    sigma = math.sqrt(float(np.sum(a * a)))
    return _steinhaus_moment(tuple(sorted(np.round(a / sigma, 15).tolist())), float(p))[1]


def norm_steinhaus(poly: DirichletPolynomial, p) -> NormEstimate:
    """‖Σ a_n e^{-λ_n s}‖_p for ℚ-independent support frequencies.

    The time average equals E|Σ a_n z_n|^p over independent Steinhaus
    variables; that moment is computed from the characteristic function
    Π J_0(|a_n| u) by a one-dimensional Bessel integral.
    """
    p = parse_p(p)
    if not lift_independent(poly):
        raise EngineError("steinhaus-radial needs ℚ-independent support frequencies")
    if math.isinf(p):
        return norm_sup(poly, "kronecker")
    if even_order(p) is not None:
        return norm_even(poly, even_order(p)) if p != 2 else norm_h2(poly)
    if len(poly) == 0:
        return NormEstimate(0.0, p, "steinhaus-radial")
    mom = steinhaus_moment(poly.coeff_array, p)
    val = mom ** (1.0 / p)
    rel = steinhaus_error(poly.coeff_array, p) / p
    return NormEstimate(val, p, "steinhaus-radial", "two-sided", val * (1 - rel), val * (1 + rel),
                        diagnostics={"terms": len(poly)})


# ---------------------------------------------------------------- Besicovitch means

def _min_gap(lams: np.ndarray) -> float:
    u = np.unique(lams)
    if u.size < 2:
        return 1.0
    return float(np.min(np.diff(u)))


def _window(x, kind):
    if kind == "box":
        return np.ones_like(x)
    if kind == "hann":
        return np.cos(0.5 * np.pi * x) ** 2
    raise ValueError(f"unknown window {kind!r}")


def norm_besicovitch(poly: DirichletPolynomial, p, R0: float | None = None, doublings: int = 8,
                     rtol: float = 1e-4, window: str = "hann",
                     max_samples: int = 2 ** 23, step: float | None = None) -> NormEstimate:
    """Time average ((1/2R)∫_{-R}^{R} |D(it)|^p dt)^{1/p} at R, 2R, 4R, ...

    The mean uses a normalized ``window`` (``"hann"`` by default, ``"box"``
    for the plain average); both converge to the same Bohr mean, the
    smooth window much faster. Sampling is the trapezoid rule with a step
    well below the Nyquist limit of |D|^p. Stops when two consecutive R give
    relative change <= ``rtol``.
    """
    p = parse_p(p)
    if math.isinf(p):
        raise EngineError("besicovitch averages need finite p")
    if len(poly) == 0:
        return NormEstimate(0.0, p, "besicovitch")
    lam = poly.lambdas
    if len(poly) == 1:
        v = abs(complex(poly.items[0][1]))
        return NormEstimate(v, p, "besicovitch", "exact")
    gap = _min_gap(lam)
    width = float(lam.max() - lam.min())
    if step is None:
        step = math.pi / (2.0 * max(p, 2.0) * width)
    if R0 is None:
        R0 = 16.0 * 2 * math.pi / gap
    a = poly.coeff_array
    trace, prev = [], None
    R = R0
    value, conv = None, False
    for _ in range(doublings + 1):
        n = int(math.ceil(R / step))
        if 2 * n + 1 > max_samples:
            break
        t = np.arange(-n, n + 1) * (R / n)
        w = _window(t / R, window)
        acc, wsum = 0.0, float(np.sum(w))
        chunk = max(1, 2 ** 21 // len(a))
        for s in range(0, t.size, chunk):
            ph = np.exp(-1j * np.outer(t[s:s + chunk], lam))
            vals = np.abs((ph * a).sum(axis=1)) ** p
            acc += float(np.dot(vals, w[s:s + chunk]))
        value = acc / wsum
        trace.append({"R": R, "samples": int(t.size), "mean": value})
        if prev is not None and abs(value - prev) <= rtol * value:
            conv = True
            break
        prev = value
        R *= 2.0
    if value is None:
        raise BudgetError("besicovitch: first window already exceeds the sample budget")
    val = value ** (1.0 / p)
    osc = abs(trace[-1]["mean"] - trace[-2]["mean"]) / value / p if len(trace) > 1 else 1.0
    osc = max(osc, 1e-12)
    return NormEstimate(val, p, "besicovitch", "two-sided", val * (1 - osc), val * (1 + osc), conv,
                        {"trace": trace, "window": window, "step": step, "heuristic": True})


# ---------------------------------------------------------------- sup norms

def _golden_max(f, a, b, tol):
    res = optimize.minimize_scalar(lambda x: -f(x), bounds=(a, b), method="bounded",
                                   options={"xatol": tol})
    return float(res.x), float(-res.fun)


def norm_sup(poly: DirichletPolynomial, method: str = "auto", oversample: int = 64,
             n_peaks: int = 16, T: float | None = None, tol_t: float = 1e-10,
             max_nodes: int = DEFAULT_MAX_NODES) -> NormEstimate:
    """sup_t |Σ a_n e^{-iλ_n t}|.

    ``kronecker`` returns Σ|a_n| (requires ℚ-independent support). The
    sampled route searches a dense grid (one period for lattice frequencies,
    the Bohr-lift torus for log-integers, a window [0, T] otherwise) and
    refines the best grid points by bounded golden-section search.
    """
    if method not in ("auto", "kronecker", "sampled-refined", "sup-sampled"):
        raise ValueError(f"unknown sup method {method!r}")
    l1 = poly.l1()
    if len(poly) == 0:
        return NormEstimate(0.0, math.inf, "sup-sampled")
    indep = lift_independent(poly)
    if method == "kronecker":
        if not indep:
            raise EngineError("kronecker sup requires ℚ-independent frequencies "
                              "(declared by the generator or detected via the Bohr lift)")
        return NormEstimate(l1, math.inf, "kronecker-l1", "exact")
    if method == "auto" and indep:
        return NormEstimate(l1, math.inf, "kronecker-l1", "exact")
    at_zero = abs(complex(np.sum(poly.coeff_array)))
    if at_zero >= l1 * (1 - 1e-13):
        # one common phase: the triangle inequality is attained at t = 0
        return NormEstimate(l1, math.inf, "sup-sampled", "exact",
                            diagnostics={"argmax_theta": 0.0, "bound": "triangle"})
    f = poly.freq
    if f.kind in (fq.INTEGER, fq.RATIONAL):
        est = _sup_circle(poly, oversample, n_peaks, tol_t, max_nodes)
    elif f.kind == fq.LOG_INTEGER:
        est = _sup_torus(poly, oversample, n_peaks, max_nodes)
    else:
        est = _sup_window(poly, T, n_peaks, tol_t, max_nodes)
    if est.value >= l1 * (1 - 1e-13):
        est.value, est.lower, est.upper, est.certainty = l1, l1, l1, "exact"
    est.upper = min(est.upper, l1)
    est.lower = min(est.lower, est.upper)
    return est


def _sup_circle(poly, oversample, n_peaks, tol_t, max_nodes):
    ints, _ = poly.freq.integer_scale
    e = np.array([ints[i - 1] for i, _ in poly.items], dtype=object)
    e = (e - min(e)).astype(np.int64)
    span = int(e.max())
    M = min(max(64, _pow2_at_least(oversample * (span + 1))), max(max_nodes, 64))
    grid = np.zeros(M, dtype=complex)
    np.add.at(grid, e % M, poly.coeff_array)
    v = np.abs(np.fft.fft(grid))
    gmax = float(v.max())
    h = 2 * np.pi / M
    cand = _peaks(v, n_peaks)
    a = poly.coeff_array

    def mod(theta):
        return abs(complex(np.sum(a * np.exp(-1j * e * theta))))

    best, best_t = gmax, float(np.argmax(v)) * h
    for m in cand:
        th, val = _golden_max(mod, (m - 1) * h, (m + 1) * h, tol_t)
        if val > best:
            best, best_t = val, th
    # Szegő: along the segment from the maximiser to the nearest node
    # (|δ| <= π/M), |D| >= ‖D‖·cos(type·|δ|) with type span/2 after centring
    sigma = (span / 2.0) * math.pi / M
    upper = gmax / math.cos(sigma) if sigma < math.pi / 2 else math.inf
    return NormEstimate(best, math.inf, "sup-sampled", "two-sided", best, max(upper, best),
                        diagnostics={"nodes": M, "grid_max": gmax, "argmax_theta": best_t,
                                     "bound": "szego"})


def _peaks(v, n):
    """Indices of the n largest circular local maxima of v."""
    left, right = np.roll(v, 1), np.roll(v, -1)
    loc = np.flatnonzero((v >= left) & (v >= right))
    if loc.size == 0:
        loc = np.arange(v.size)
    order = np.argsort(-v[loc], kind="stable")[:n]
    return loc[order]


def _sup_torus(poly, oversample, n_peaks, max_nodes):
    ex, c = lift_exponents(poly), poly.coeff_array
    if ex.shape[1] == 0:
        v = abs(complex(poly.items[0][1]))
        return NormEstimate(v, math.inf, "sup-sampled", "exact")
    degs = tuple(int(d) for d in ex.max(axis=0))
    active = [j for j, d in enumerate(degs) if d > 0]
    ov = oversample
    while True:
        shape = [(_pow2_at_least(ov * (d + 1)) if d > 0 else 1) for d in degs]
        if int(np.prod(shape)) <= max_nodes or ov <= 4:
            break
        ov //= 2
    if int(np.prod(shape)) > max_nodes:
        return _sup_torus_multistart(ex, c, active, n_peaks, poly.l1())
    grid = np.zeros(shape, dtype=complex)
    np.add.at(grid, tuple(ex[:, j] % shape[j] for j in range(len(shape))), c)
    v = np.abs(np.fft.fftn(grid))
    gmax = float(v.max())
    flat = np.argsort(-v.ravel(), kind="stable")[:n_peaks]

    def negmod(theta_active):
        th = np.zeros(len(degs))
        th[active] = theta_active
        return -abs(complex(np.sum(c * np.exp(-1j * (ex @ th)))))

    best = gmax
    for fi in flat:
        mi = np.unravel_index(fi, v.shape)
        x0 = np.array([2 * np.pi * mi[j] / shape[j] for j in active])
        res = optimize.minimize(negmod, x0, method="Nelder-Mead",
                                options={"xatol": 1e-11, "fatol": 1e-14, "maxiter": 4000})
        best = max(best, -float(res.fun))
    sigma = math.pi * sum(d / (2.0 * s) for d, s in zip(degs, shape) if d > 0)
    upper = gmax / math.cos(sigma) if sigma < math.pi / 2 else math.inf
    return NormEstimate(best, math.inf, "sup-sampled", "two-sided", best, max(upper, best),
                        diagnostics={"grid": list(shape), "grid_max": gmax, "bound": "szego",
                                     "domain": "bohr-torus"})


def _sup_torus_multistart(ex, c, active, n_peaks, l1, seed=0):
    """Seeded multistart local search when the torus grid is over budget.

    Gives a lower bound only; the upper end is Σ|a_n|.
    """
    sub = ex[:, active].astype(float)

    def negmod(th):
        return -abs(complex(np.sum(c * np.exp(-1j * (sub @ th)))))

    rng = np.random.default_rng(seed)
    starts = [np.zeros(len(active))] + [2 * np.pi * rng.random(len(active)) for _ in range(4 * n_peaks)]
    best = 0.0
    for x0 in starts:
        res = optimize.minimize(negmod, x0, method="Nelder-Mead",
                                options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 400 * len(active)})
        best = max(best, -float(res.fun))
    return NormEstimate(best, math.inf, "sup-sampled", "lower-bound", best, max(l1, best),
                        diagnostics={"domain": "bohr-torus", "starts": len(starts), "seed": seed,
                                     "bound": "l1"})


def _sup_window(poly, T, n_peaks, tol_t, max_nodes):
    lam = poly.lambdas
    width = float(lam.max() - lam.min()) or 1.0
    h = math.pi / (8.0 * width)
    if T is None:
        T = min(2000.0 * 2 * math.pi / _min_gap(lam), h * max_nodes)
    n = min(int(T / h) + 1, max_nodes)
    t = np.arange(n) * h
    v = np.abs(poly.evaluate(t))
    gmax = float(v.max())
    cand = _peaks(v, n_peaks)
    best = gmax
    for m in cand:
        _, val = _golden_max(lambda x: abs(poly.evaluate(x)), t[m] - h, t[m] + h, tol_t)
        best = max(best, val)
    return NormEstimate(best, math.inf, "sup-sampled", "lower-bound", best, poly.l1(),
                        diagnostics={"window": [0.0, float(t[-1])], "samples": n})


# ---------------------------------------------------------------- dispatcher

def _call(fn, *args, **kw):
    """Call an engine with the subset of ``kw`` it accepts."""
    params = inspect.signature(fn).parameters
    return fn(*args, **{k: v for k, v in kw.items() if k in params})


def norm(poly: DirichletPolynomial, p, strategy: str = "auto", **kw) -> NormEstimate:
    """Norm of ``poly`` in H_p^λ with automatic engine choice.

    p = 2 → exact-parseval; even p on exact kinds → exact-even; finite p →
    circle-fft (integer/rational), torus-fft or steinhaus-radial
    (log-integer), besicovitch otherwise; p = ∞ → kronecker-l1 when the
    support is independent, else sup-sampled. Keyword options (``rtol``,
    ``oversample``, ...) reach the engines that take them.
    """
    p = parse_p(p)
    if strategy != "auto":
        return _run(strategy, poly, p, **kw)
    if len(poly) == 0:
        return NormEstimate(0.0, p, "exact-parseval" if p == 2 else "exact-even"
                            if even_order(p) else "circle-fft")
    if p == 2:
        return norm_h2(poly)
    if math.isinf(p):
        return _call(norm_sup, poly, **kw)
    k = even_order(p)
    f = poly.freq
    if k is not None and f.is_exact:
        return norm_even(poly, k)
    if f.kind in (fq.INTEGER, fq.RATIONAL):
        return _call(norm_circle_lp, poly, p, **kw)
    if f.kind == fq.LOG_INTEGER:
        try:
            return _call(norm_torus_lp, poly, p, **kw)
        except BudgetError:
            return _call(norm_besicovitch, poly, p, **kw)
    return _call(norm_besicovitch, poly, p, **kw)


def _run(strategy, poly, p, **kw):
    if strategy == "exact-parseval":
        if p != 2:
            raise EngineError("exact-parseval needs p = 2")
        return norm_h2(poly)
    if strategy == "exact-even":
        k = even_order(p)
        if k is None:
            raise EngineError("exact-even needs p = 2k")
        return _call(norm_even, poly, k, **kw)
    if strategy == "circle-fft":
        return _call(norm_circle_lp, poly, p, **kw)
    if strategy == "torus-fft":
        return _call(norm_torus_lp, poly, p, radial=False, **kw)
    if strategy == "steinhaus-radial":
        return norm_steinhaus(poly, p)
    if strategy == "besicovitch":
        return _call(norm_besicovitch, poly, p, **kw)
    if strategy in ("sup-sampled", "sampled-refined"):
        if not math.isinf(p):
            raise EngineError("sup engines need p = inf")
        return _call(norm_sup, poly, "sampled-refined", **kw)
    if strategy in ("kronecker", "kronecker-l1"):
        return norm_sup(poly, "kronecker")
    raise ValueError(f"unknown strategy {strategy!r}")


def applicable_engines(poly: DirichletPolynomial, p) -> list[str]:
    """Engines that accept (poly, p)."""
    p = parse_p(p)
    f = poly.freq
    out = []
    if math.isinf(p):
        out.append("sup-sampled")
        if lift_independent(poly):
            out.append("kronecker-l1")
        return out
    if p == 2:
        out.append("exact-parseval")
    if even_order(p) is not None:
        out.append("exact-even")
    if f.kind in (fq.INTEGER, fq.RATIONAL):
        out.append("circle-fft")
    if f.kind == fq.LOG_INTEGER:
        out.append("torus-fft")
    if lift_independent(poly) and even_order(p) is None:
        out.append("steinhaus-radial")
    out.append("besicovitch")
    return out


# ---------------------------------------------------------------- inequality diagnostics

def hausdorff_young_check(poly: DirichletPolynomial, p, strategy: str = "auto") -> dict:
    """Margins of the two Hausdorff-Young inequalities for p ∈ [1, 2].

    ``margin`` = ‖D‖_{p'} - (Σ|a_n|^p)^{1/p} (should be <= 0) and
    ``dual_margin`` = (Σ|a_n|^{p'})^{1/p'} - ‖D‖_p (should be <= 0).
    """
    p = parse_p(p)
    if not 1 <= p <= 2:
        raise ValueError("Hausdorff-Young check needs p in [1, 2]")
    q = conjugate(p)
    hi = norm(poly, q, strategy)
    lo = norm(poly, p, strategy)
    lp = poly.lq(p)
    lq = poly.lq(q)
    return {"p": format_p(p), "p_conj": format_p(q),
            "norm_p_conj": hi.value, "coeff_lp": lp, "margin": hi.value - lp,
            "norm_p": lo.value, "coeff_lp_conj": lq, "dual_margin": lq - lo.value,
            "methods": [hi.method, lo.method],
            "tolerance": max(hi.error, lo.error, 1e-12 * max(lp, 1.0))}


def khinchin_sample(freq, A, p, trials: int = 32, seed: int = 0, coeffs: str = "steinhaus",
                    strategy: str = "auto") -> dict:
    """Ratios ‖Σ a_n e^{-λ_n s}‖_p / √Σ|a_n|² over random coefficient draws.

    ``coeffs`` is ``"steinhaus"`` (uniform phases), ``"rademacher"`` (±1)
    or ``"ones"``. Trial i uses the stream seeded by (seed, i), so results
    do not depend on evaluation order.
    """
    from .dpoly import indicator
    if trials < 1:
        raise ValueError("trials must be >= 1")
    A = sorted(set(A))
    p = parse_p(p)
    ratios = []
    for i in range(trials):
        rng = np.random.default_rng([seed, i])
        if coeffs == "steinhaus":
            a = np.exp(2j * np.pi * rng.random(len(A)))
        elif coeffs == "rademacher":
            a = rng.choice([-1, 1], size=len(A))
        elif coeffs == "ones":
            a = np.ones(len(A), dtype=int)
        else:
            raise ValueError(f"unknown coefficient law {coeffs!r}")
        poly = DirichletPolynomial(freq, tuple(zip(A, a.tolist())))
        ratios.append(norm(poly, p, strategy).value / math.sqrt(float(poly.l2_squared())))
    r = np.array(ratios)
    return {"p": format_p(p), "n": len(A), "trials": trials, "seed": seed, "coeffs": coeffs,
            "min": float(r.min()), "mean": float(r.mean()), "max": float(r.max()),
            "ratios": r.tolist()}
