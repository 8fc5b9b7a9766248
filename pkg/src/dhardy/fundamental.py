"""
Fundamental functions of the canonical basis over finite pools.

For a set A of indices and unimodular signs ε, write 𝟙_{ε,A} = Σ_{j∈A} ε_j e^{-λ_j s}.
Over a finite pool of indices this module computes

    φ_u(N)     = sup{‖𝟙_A‖ : |A| ≤ N}          φ_l(N)     = inf{‖𝟙_A‖ : |A| ≥ N}
    φ_{u,ε}(N) = sup{‖𝟙_{ε,A}‖ : |A| ≤ N}      φ_{l,ε}(N) = inf{‖𝟙_{ε,A}‖ : |A| ≥ N}

with the sign continuum replaced by a finite alphabet of roots of unity.
Every result is a :class:`PhiBound` carrying the pool, the witness and the
search mode, so nothing is claimed beyond the pool.

Candidates are screened in batches (FFT grids, closed forms) that return a
value interval per candidate; candidates whose interval can still beat the
best one are re-evaluated through :func:`dhardy.norms.norm`.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import freq as fq
from . import norms
from .dpoly import DirichletPolynomial, indicator, sign_alphabet
from .freq import Frequency

WHICH = {"u": (1, False), "l": (-1, False), "u-eps": (1, True), "l-eps": (-1, True)}
ALIASES = {"ue": "u-eps", "le": "l-eps", "ueps": "u-eps", "leps": "l-eps"}
MODES = ("exhaustive", "randomized", "greedy")
DEFAULT_BUDGET = 10 ** 7
GREEDY_RESTARTS = 8
CHUNK_NODES = 2 ** 22
ROW_NODES = 2 ** 15  # screening grid per candidate on the Bohr torus
FINE_ROW_NODES = 2 ** 19  # second screening pass over surviving contenders
TIE = 1e-12


class SearchBudgetError(RuntimeError):
    """Exhaustive search would exceed the evaluation budget."""


def canonical_which(which: str) -> str:
    w = ALIASES.get(which.strip().lower(), which.strip().lower())
    if w not in WHICH:
        raise ValueError(f"which must be one of u, l, u-eps (ue), l-eps (le); got {which!r}")
    return w


@dataclass(frozen=True)
class SpaceSpec:
    """The space H_p^λ restricted to polynomials over ``freq``."""

    p: float
    freq: Frequency
    strategy: str = "auto"
    options: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "p", norms.parse_p(self.p))

    @property
    def p_conj(self) -> float:
        return norms.conjugate(self.p)

    def norm(self, poly: DirichletPolynomial) -> norms.NormEstimate:
        return norms.norm(poly, self.p, self.strategy, **dict(self.options))


def apriori_bounds(p: float, n: int) -> tuple[float, float]:
    """Bounds valid for every ‖𝟙_{ε,A}‖_p with |A| = n and unimodular ε.

    n^{min(1/2, 1/p')} <= ‖𝟙_{ε,A}‖_p <= n^{max(1/2, 1/p')}, from
    Parseval, Hausdorff-Young and interpolation with the sup norm.
    """
    if n == 0:
        return 0.0, 0.0
    r = 1.0 / norms.conjugate(p)
    return float(n) ** min(0.5, r), float(n) ** max(0.5, r)


@dataclass
class PhiBound:
    """Certified bracket for one fundamental function value on a pool."""

    which: str
    p: float
    N: int
    pool: tuple
    lower: float
    upper: float
    value: float
    witness: tuple
    signs: tuple
    mode: str
    signs_tag: str
    certainty: str
    method: str
    evaluations: int = 0
    seed: int | None = None
    notes: list = field(default_factory=list)

    def __post_init__(self):
        if self.lower > self.upper * (1 + 1e-12) + 1e-15:
            raise ArithmeticError(f"PhiBound lower {self.lower} exceeds upper {self.upper}")

    def as_dict(self) -> dict:
        return {"which": self.which, "p": norms.format_p(self.p), "N": self.N,
                "pool": _pool_repr(self.pool), "lower": self.lower,
                "upper": None if math.isinf(self.upper) else self.upper,
                "value": self.value, "witness": list(self.witness),
                "signs": [_sign_repr(s) for s in self.signs], "signs_tag": self.signs_tag,
                "mode": self.mode, "seed": self.seed, "evaluations": self.evaluations,
                "certainty": self.certainty, "method": self.method, "notes": list(self.notes)}


def _pool_repr(pool):
    pool = list(pool)
    if pool and pool == list(range(pool[0], pool[-1] + 1)):
        return f"{pool[0]}..{pool[-1]}"
    return pool


def _sign_repr(s):
    c = complex(s)
    if c.imag == 0 and c.real in (1.0, -1.0):
        return int(c.real)
    return [round(c.real, 15), round(c.imag, 15)]


# ---------------------------------------------------------------- batched evaluation

def _pow2(n):
    return 1 << max(0, int(math.ceil(math.log2(max(n, 1)))))


class BatchEvaluator:
    """Norms of many polynomials supported on one pool, as value intervals.

    Rows of the coefficient matrix are polynomials over the pool (column j
    is pool index ``pool[j]``). The engine is fixed per (pool, p): closed
    forms where they exist, one shared FFT grid otherwise, and the norm
    dispatcher row by row as the fallback.
    """

    def __init__(self, space: SpaceSpec, pool, oversample: int = 16, row_nodes: int = ROW_NODES):
        self.space = space
        self.pool = tuple(pool)
        self.p = space.p
        self.oversample = oversample
        self.row_nodes = row_nodes
        ref = indicator(space.freq, self.pool)
        self.independent = norms.lift_independent(ref)
        self.kind = space.freq.kind
        self.route = self._choose(ref)

    def _choose(self, ref):
        p, kind = self.p, self.kind
        if self.space.strategy != "auto":
            return "rowwise"
        if p == 2:
            return "parseval"
        if math.isinf(p):
            if self.independent:
                return "l1"
            if kind in (fq.INTEGER, fq.RATIONAL):
                return self._setup_lattice(ref, 1, sup=True)
            if kind == fq.LOG_INTEGER:
                return self._setup_torus(ref, sup=True)
            return "rowwise"
        k = norms.even_order(p)
        if k is not None and ref.freq.is_exact:
            return self._setup_lattice(ref, k, sup=False, exact=True)
        if kind in (fq.INTEGER, fq.RATIONAL):
            return self._setup_lattice(ref, 1, sup=False)
        if kind == fq.LOG_INTEGER:
            if self.independent:
                return "steinhaus"
            return self._setup_torus(ref, sup=False)
        return "rowwise"

    def _setup_lattice(self, ref, k, sup, exact=False):
        e = norms._lattice(ref, k)
        if e is None:
            return "rowwise"
        span = int(e.max())
        if exact:
            M = max(8, _pow2(k * span + 1), _pow2(2 * (span + 1)))
        else:
            M = max(16, _pow2(self.oversample * (span + 1)))
        if M > CHUNK_NODES:
            return "rowwise"
        self.e, self.span, self.shape = e, span, (M,)
        self.exps = e.reshape(-1, 1)
        self.exact_rule = exact
        return "grid-sup" if sup else "grid"

    def _setup_torus(self, ref, sup):
        ex = norms.lift_exponents(ref)
        degs = tuple(int(d) for d in ex.max(axis=0))
        ov = 8
        while True:
            shape = tuple(_pow2(ov * (d + 1)) if d > 0 else 1 for d in degs)
            if int(np.prod(shape)) <= self.row_nodes or ov <= 2:
                break
            ov //= 2
        if int(np.prod(shape)) > CHUNK_NODES:
            return "rowwise"
        self.exps, self.degs, self.shape = ex, degs, shape
        self.exact_rule = False
        return "grid-sup" if sup else "grid"

    # -- evaluation

    def evaluate(self, C: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        C = np.atleast_2d(np.asarray(C, dtype=complex))
        r = self.route
        l1 = np.abs(C).sum(axis=1)
        if r == "parseval":
            v = np.sqrt(np.sum(np.abs(C) ** 2, axis=1))
            return v, v.copy()
        if r == "l1":
            return l1, l1.copy()
        if r == "steinhaus":
            return self._steinhaus(C)
        if r == "rowwise":
            return self._rowwise(C)
        if r == "grid-sup":
            # rows whose coefficients share one phase peak at t = 0 with value Σ|a|
            tight = np.abs(C.sum(axis=1)) >= l1 * (1 - 1e-14)
            lo, hi = l1.copy(), l1.copy()
            rest = np.flatnonzero(~tight)
            if rest.size:
                lo[rest], hi[rest] = self._grid(C[rest], l1[rest], sup=True)
            return lo, hi
        return self._grid(C, l1, sup=False)

    def _grid(self, C, l1, sup):
        shape = self.shape
        nodes = int(np.prod(shape))
        rows = max(1, min(4096, CHUNK_NODES // nodes))
        lo = np.empty(len(C))
        hi = np.empty(len(C))
        axes = tuple(range(1, len(shape) + 1))
        idx = tuple(self.exps[:, j] % shape[j] for j in range(len(shape)))
        p = self.p
        for s in range(0, len(C), rows):
            blk = C[s:s + rows]
            G = np.zeros((len(blk),) + shape, dtype=complex)
            G[(slice(None),) + idx] = blk
            F = np.abs(np.fft.fftn(G, axes=axes))
            if sup:
                gmax = F.reshape(len(blk), -1).max(axis=1)
                shrink = self._sup_shrink()
                up = np.minimum(gmax / shrink if shrink > 0 else np.inf, l1[s:s + rows])
                lo[s:s + rows] = gmax
                hi[s:s + rows] = np.maximum(up, gmax)
                continue
            Fp = F ** p
            mean = Fp.reshape(len(blk), -1).mean(axis=1)
            v = mean ** (1.0 / p)
            if self.exact_rule:
                rel = np.full(len(blk), 1e-12)
            else:
                sub = (slice(None),) + tuple(slice(None, None, 2) if n > 1 else slice(None) for n in shape)
                half = Fp[sub].reshape(len(blk), -1).mean(axis=1)
                rel = np.abs(mean - half) / np.where(mean > 0, mean, 1.0) / p
            lo[s:s + rows] = v * (1 - rel)
            hi[s:s + rows] = v * (1 + rel)
        return lo, hi

    def _sup_shrink(self):
        """cos(σ): grid maximum >= cos(σ)·sup (Szegő), 0 when unusable."""
        if len(self.shape) == 1 and hasattr(self, "span"):
            sigma = (self.span / 2.0) * math.pi / self.shape[0]
        else:
            sigma = math.pi * sum(d / (2.0 * n) for d, n in zip(self.degs, self.shape) if d > 0)
        return math.cos(sigma) if sigma < math.pi / 2 else 0.0

    def _steinhaus(self, C):
        lo = np.empty(len(C))
        hi = np.empty(len(C))
        p = self.p
        for r, row in enumerate(C):
            amp = np.abs(row[row != 0])
            if amp.size == 0:
                lo[r] = hi[r] = 0.0
                continue
            m = norms.steinhaus_moment(amp, p)
            err = norms.steinhaus_error(amp, p) / p
            v = m ** (1.0 / p)
            lo[r], hi[r] = v * (1 - err), v * (1 + err)
        return lo, hi

    def _rowwise(self, C):
        lo = np.empty(len(C))
        hi = np.empty(len(C))
        for r, row in enumerate(C):
            nz = np.flatnonzero(row)
            poly = DirichletPolynomial(self.space.freq, tuple(
                (self.pool[j], _as_number(row[j])) for j in nz))
            est = self.space.norm(poly)
            lo[r], hi[r] = est.lower, est.upper
        return lo, hi


def _as_number(c):
    c = complex(c)
    if c.imag == 0 and c.real == int(c.real):
        return int(c.real)
    return c


# ---------------------------------------------------------------- search core

def _count_exhaustive(P, sizes, q):
    return sum(math.comb(P, n) * q ** (n - 1) for n in sizes if n >= 1)


def _exhaustive_keys(P, sizes, q):
    for n in sizes:
        for A in itertools.combinations(range(P), n):
            for s in itertools.product(range(q), repeat=n - 1):
                yield A, (0,) + s


def _random_keys(P, sizes, q, iters, seed):
    rng = np.random.default_rng(seed)
    sizes = list(sizes)
    for _ in range(iters):
        n = sizes[int(rng.integers(len(sizes)))]
        A = tuple(sorted(rng.choice(P, size=n, replace=False).tolist()))
        s = (0,) + tuple(rng.integers(q, size=n - 1).tolist())
        yield A, s


def _rows(keys, P, alphabet):
    C = np.zeros((len(keys), P), dtype=complex)
    for r, (A, s) in enumerate(keys):
        for j, si in zip(A, s):
            C[r, j] = alphabet[si]
    return C


def _chunks(it, size):
    it = iter(it)
    while True:
        blk = list(itertools.islice(it, size))
        if not blk:
            return
        yield blk


class _Tracker:
    """Running maximum of score intervals with deterministic tie-breaking.

    Scores are norms for suprema and negated norms for infima.
    """

    def __init__(self):
        self.best_a = -math.inf
        self.exact = None           # (score, key) of best exactly-known candidate
        self.contenders = []        # (a, b, key) with a < b
        self.count = 0

    def add(self, a, b, keys):
        self.count += len(keys)
        top = float(np.max(a))
        if top > self.best_a:
            self.best_a = top
        ex = np.flatnonzero(a >= b)
        if ex.size:
            vals = a[ex]
            m = float(vals.max())
            tied = ex[vals >= m - TIE * abs(m)]
            key = min(keys[i] for i in tied)
            if self.exact is None or m > self.exact[0] + TIE * abs(m) or (
                    abs(m - self.exact[0]) <= TIE * abs(m) and key < self.exact[1]):
                self.exact = (m, key)
        thr = self.best_a - TIE * abs(self.best_a)
        keep = np.flatnonzero((a < b) & (b >= thr))
        self.contenders.extend((float(a[i]), float(b[i]), keys[i]) for i in keep)
        if len(self.contenders) > 4096:
            self.prune()

    def prune(self):
        thr = self.best_a - TIE * abs(self.best_a)
        self.contenders = [c for c in self.contenders if c[1] >= thr]


def _run_batches(ev, keys_iter, P, alphabet, sense, threads, tracker, chunk=2048):
    def work(blk):
        lo, hi = ev.evaluate(_rows(blk, P, alphabet))
        return blk, lo, hi

    blocks = _chunks(keys_iter, chunk)
    if threads and threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = pool.map(work, blocks)
            for blk, lo, hi in results:
                _feed(tracker, blk, lo, hi, sense)
    else:
        for blk in blocks:
            _feed(tracker, *work(blk), sense)


def _feed(tracker, blk, lo, hi, sense):
    if sense > 0:
        tracker.add(lo, hi, blk)
    else:
        tracker.add(-hi, -lo, blk)


def _poly_for(space, pool, alphabet, key):
    A, s = key
    return indicator(space.freq, [pool[j] for j in A],
                     {pool[j]: alphabet[si] for j, si in zip(A, s)})


def _resolve(space, pool, alphabet, sense, tracker, refine_cap, ev):
    """Refine contenders through the dispatcher and pick the witness.

    Returns (witness key, NormEstimate, score upper bound).
    """
    tracker.prune()
    cands = tracker.contenders
    # finite-p screening intervals rest on a half-grid estimate; tighten them
    if len(cands) > refine_cap and ev.route == "grid":
        cands = _rescreen(space, pool, alphabet, sense, cands, tracker)
    cands = sorted(cands, key=lambda c: (-c[1], c[2]))
    refined = []
    best_a = -math.inf
    done = 0
    for a, b, key in cands:
        if done >= refine_cap or b < best_a - TIE * abs(best_a):
            break
        est = space.norm(_poly_for(space, pool, alphabet, key))
        sa, sb = (est.lower, est.upper) if sense > 0 else (-est.upper, -est.lower)
        refined.append((sense * est.value, sa, sb, key, est))
        best_a = max(best_a, sa)
        done += 1
    rest_b = max((c[1] for c in cands[done:]), default=-math.inf)
    if tracker.exact is not None:
        key = tracker.exact[1]
        est = space.norm(_poly_for(space, pool, alphabet, key))
        refined.append((sense * est.value, tracker.exact[0], tracker.exact[0], key, est))
    if not refined:
        raise ValueError("empty search space")
    top = max(r[0] for r in refined)
    winner = min((r for r in refined if r[0] >= top - TIE * abs(top)), key=lambda r: r[3])
    score_upper = max([rest_b, top] + [r[2] for r in refined])
    return winner[3], winner[4], score_upper


def _rescreen(space, pool, alphabet, sense, cands, tracker):
    """Tighter intervals for the contenders on a finer grid, then prune."""
    fine = BatchEvaluator(space, pool, oversample=64, row_nodes=FINE_ROW_NODES)
    keys = [c[2] for c in cands]
    lo, hi = fine.evaluate(_rows(keys, len(pool), alphabet))
    a, b = (lo, hi) if sense > 0 else (-hi, -lo)
    thr = max(float(a.max()), tracker.exact[0] if tracker.exact else -math.inf)
    thr -= TIE * abs(thr)
    return [(float(a[i]), float(b[i]), keys[i]) for i in range(len(keys)) if b[i] >= thr]


def _sizes(which, N, P):
    sense, _ = WHICH[which]
    return list(range(1, N + 1)) if sense > 0 else list(range(N, P + 1))


def phi(space: SpaceSpec, pool, N: int, which: str = "u", signs: str | None = None,
        mode: str = "exhaustive", seed: int = 0, budget: int = DEFAULT_BUDGET,
        iters: int = 2000, refine_cap: int = 16, threads: int = 1) -> PhiBound:
    """One fundamental function value φ_which(N) restricted to ``pool``.

    ``signs`` defaults to ``"ones"`` for u/l and ``"roots:8"`` for the
    ε-variants. Modes: ``exhaustive`` (all subsets and sign assignments,
    first sign fixed to 1 since norms ignore a global phase), ``randomized``
    (``iters`` seeded draws) and ``greedy`` (8 seeded restarts).
    """
    which = canonical_which(which)
    sense, eps = WHICH[which]
    pool = tuple(sorted(set(int(j) for j in pool)))
    P = len(pool)
    if N < 1:
        raise ValueError("N must be >= 1")
    if P < N:
        raise ValueError(f"pool of size {P} is smaller than N = {N}")
    if pool[0] < 1 or pool[-1] > len(space.freq):
        raise ValueError("pool indices must lie within the frequency")
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if signs is None:
        signs = "roots:8" if eps else "ones"
    alphabet, tag = sign_alphabet(signs)
    q = len(alphabet)
    sizes = _sizes(which, N, P)
    ev = BatchEvaluator(space, pool)
    tracker = _Tracker()
    if mode == "exhaustive":
        total = _count_exhaustive(P, sizes, q)
        if total > budget:
            raise SearchBudgetError(f"exhaustive search needs {total} evaluations (budget {budget}); "
                                    "use mode='randomized' or 'greedy'")
        _run_batches(ev, _exhaustive_keys(P, sizes, q), P, alphabet, sense, threads, tracker)
    elif mode == "randomized":
        _run_batches(ev, _random_keys(P, sizes, q, min(iters, budget), seed), P, alphabet, sense,
                     threads, tracker)
    else:
        _greedy(ev, P, alphabet, sense, sizes, seed, budget, tracker)
    key, est, score_upper = _resolve(space, pool, alphabet, sense, tracker, refine_cap, ev)
    value = est.value
    A, s = key
    witness = tuple(pool[j] for j in A)
    wsigns = tuple(alphabet[si] for si in s)
    notes = [f"extremum restricted to pool {_pool_repr(pool)}"]
    if mode == "exhaustive":
        if sense > 0:
            lower, upper = value, max(value, score_upper)
        else:
            lower, upper = min(value, -score_upper), value
        if upper - lower <= 1e-9 * max(abs(value), 1e-300):
            lower = upper = value
            certainty = "exact"
        else:
            certainty = "two-sided"
    else:
        a_lo, a_hi = apriori_bounds(space.p, N)
        if sense > 0:
            lower, upper = value, max(value, a_hi)
            certainty = "lower-bound"
        else:
            lower, upper = min(value, a_lo), value
            certainty = "upper-bound"
    if eps and tag != "sampled-unimodular":
        notes.append("signs restricted to " + tag + ": " +
                     ("lower bound for the unimodular supremum" if sense > 0
                      else "upper bound for the unimodular infimum"))
    return PhiBound(which, space.p, N, pool, lower, upper, value, witness, wsigns, mode, tag,
                    certainty, est.method, tracker.count, seed if mode != "exhaustive" else None,
                    notes)


def phi_upper(space, pool, N, signs=None, mode="exhaustive", eps: bool = False, **kw) -> PhiBound:
    """φ_u (or φ_{u,ε} with ``eps=True``) on ``pool``."""
    return phi(space, pool, N, "u-eps" if eps else "u", signs, mode, **kw)


def phi_lower(space, pool, N, signs=None, mode="exhaustive", eps: bool = False, **kw) -> PhiBound:
    """φ_l (or φ_{l,ε} with ``eps=True``) on ``pool``."""
    return phi(space, pool, N, "l-eps" if eps else "l", signs, mode, **kw)


def _greedy(ev, P, alphabet, sense, sizes, seed, budget, tracker):
    """Grow A one index at a time, keeping the best (or worst) extension."""
    q = len(alphabet)
    top = max(sizes)
    if sense < 0:
        top = P
    for r in range(GREEDY_RESTARTS):
        rng = np.random.default_rng([seed, r])
        start = int(rng.integers(P))
        state = ((start,), (0,))
        path = [state]
        while len(state[0]) < top and tracker.count < budget:
            A, s = state
            keys = []
            for j in range(P):
                if j in A:
                    continue
                for si in range(q):
                    merged = sorted(zip(A + (j,), s + (si,)))
                    nA = tuple(x for x, _ in merged)
                    ns = tuple(y for _, y in merged)
                    first = ns[0]
                    ns = tuple((y - first) % q for y in ns)
                    keys.append((nA, ns))
            keys = sorted(set(keys))
            lo, hi = ev.evaluate(_rows(keys, P, alphabet))
            tracker.count += len(keys)
            mid = 0.5 * (lo + hi) * sense
            best = float(mid.max())
            pick = min(i for i in range(len(keys)) if mid[i] >= best - TIE * abs(best))
            state = keys[pick]
            path.append(state)
        want = set(sizes)
        rec = [st for st in path if len(st[0]) in want]
        if not rec:
            continue
        lo, hi = ev.evaluate(_rows(rec, P, alphabet))
        _feed(tracker, rec, lo, hi, sense)
        tracker.count -= len(rec)


# ---------------------------------------------------------------- SUCC and democracy

def succ_ratio(space: SpaceSpec, pool, signs: str = "real", mode: str = "exhaustive",
               budget: int = DEFAULT_BUDGET, seed: int = 0, samples: int = 20000) -> dict:
    """max over A ⊊ B ⊆ pool and ε on B of ‖𝟙_{ε,A}‖ / ‖𝟙_{ε,B}‖.

    Exhaustive mode evaluates every signed subset once and runs a dynamic
    program for the minimal norm over strict signed supersets. When the
    state space exceeds ``budget`` it falls back to random pairs (flagged).
    Returns the raw maximum and ``ratio = max(1, raw)``.
    """
    pool = tuple(sorted(set(int(j) for j in pool)))
    P = len(pool)
    if P < 2:
        raise ValueError("SUCC ratio needs a pool of at least two indices")
    alphabet, tag = sign_alphabet(signs)
    q = len(alphabet)
    states = (q + 1) ** P
    ev = BatchEvaluator(space, pool)
    fallback = False
    if mode == "exhaustive" and states <= budget and states <= 2 ** 24:
        out = _succ_exhaustive(ev, P, alphabet)
    else:
        fallback = mode == "exhaustive"
        out = _succ_random(ev, P, alphabet, seed, min(samples, budget))
    raw, (A, sA), (B, sB), evals = out
    ratio = max(1.0, raw)
    verdict = "violation witness" if raw > 1 + 1e-9 else "no violation found within pool"
    return {"p": norms.format_p(space.p), "pool": _pool_repr(pool), "signs_tag": tag,
            "mode": "randomized" if (fallback or mode != "exhaustive") else "exhaustive",
            "fallback": fallback, "raw": raw, "ratio": ratio, "verdict": verdict,
            "A": [pool[j] for j in A], "B": [pool[j] for j in B],
            "signs": [_sign_repr(alphabet[si]) for si in sB], "evaluations": evals}


def _succ_exhaustive(ev, P, alphabet):
    q = len(alphabet)
    base = q + 1
    S = base ** P
    codes = np.arange(S)
    D = (codes[:, None] // base ** np.arange(P)) % base     # digit j: 0 absent, 1+s sign s
    present = D > 0
    pop = present.sum(axis=1)
    first = np.argmax(present, axis=1)
    s0 = np.where(pop > 0, D[codes, first] - 1, 0)
    Dn = np.where(present, (D - 1 - s0[:, None]) % q + 1, 0)
    ncode = (Dn * base ** np.arange(P)).sum(axis=1)
    reps = np.unique(ncode[pop > 0])
    Rd = (reps[:, None] // base ** np.arange(P)) % base
    C = np.zeros((len(reps), P), dtype=complex)
    alph = np.array([complex(a) for a in alphabet])
    mask = Rd > 0
    C[mask] = alph[(Rd - 1)[mask]]
    vals = np.empty(len(reps))
    for s in range(0, len(reps), 4096):
        lo, hi = ev.evaluate(C[s:s + 4096])
        vals[s:s + 4096] = 0.5 * (lo + hi)
    normv = np.zeros(S)
    pos = np.searchsorted(reps, ncode)
    has = pop > 0
    normv[has] = vals[pos[has]]
    minsup = np.full(S, np.inf)
    arg = np.full(S, -1, dtype=np.int64)
    for level in range(P - 1, 0, -1):
        at = np.flatnonzero(pop == level)
        for j in range(P):
            cand = at[~present[at, j]]
            for si in range(q):
                child = cand + (1 + si) * base ** j
                via_child = minsup[child] < normv[child]
                best = np.where(via_child, minsup[child], normv[child])
                who = np.where(via_child, arg[child], child)
                better = best < minsup[cand]
                minsup[cand[better]] = best[better]
                arg[cand[better]] = who[better]
    ok = (pop > 0) & (pop < P) & np.isfinite(minsup)
    ratio = np.where(ok, normv / np.where(ok, minsup, 1.0), -np.inf)
    w = int(np.argmax(ratio))
    raw = float(ratio[w])

    def unpack(code):
        d = [(code // base ** j) % base for j in range(P)]
        A = tuple(j for j in range(P) if d[j])
        return A, tuple(int(d[j]) - 1 for j in A)

    return raw, unpack(w), unpack(int(arg[w])), int(len(reps))


def _succ_random(ev, P, alphabet, seed, samples):
    q = len(alphabet)
    best = (-math.inf, None, None)
    evals = 0
    for blk_start in range(0, samples, 1024):
        n = min(1024, samples - blk_start)
        rng = np.random.default_rng([seed, blk_start])
        pairs = []
        for _ in range(n):
            m = int(rng.integers(2, P + 1))
            B = tuple(sorted(rng.choice(P, size=m, replace=False).tolist()))
            sB = (0,) + tuple(rng.integers(q, size=m - 1).tolist())
            k = int(rng.integers(1, m))
            keep = sorted(rng.choice(m, size=k, replace=False).tolist())
            A = tuple(B[i] for i in keep)
            sA = tuple(sB[i] for i in keep)
            pairs.append(((A, sA), (B, sB)))
        la, ha = ev.evaluate(_rows([a for a, _ in pairs], P, alphabet))
        lb, hb = ev.evaluate(_rows([b for _, b in pairs], P, alphabet))
        evals += 2 * n
        r = (0.5 * (la + ha)) / (0.5 * (lb + hb))
        i = int(np.argmax(r))
        if r[i] > best[0]:
            best = (float(r[i]), pairs[i][0], pairs[i][1])
    return best[0], best[1], best[2], evals


def democracy_profile(space: SpaceSpec, pool, Ns, eps: bool = False, signs: str | None = None,
                      mode: str = "exhaustive", constant: float = 2.0, **kw) -> list[dict]:
    """Rows (N, φ_l, φ_u, φ_u/φ_l) with a flag where the ratio exceeds ``constant``."""
    rows = []
    for N in Ns:
        lo = phi(space, pool, N, "l-eps" if eps else "l", signs, mode, **kw)
        up = phi(space, pool, N, "u-eps" if eps else "u", signs, mode, **kw)
        ratio = up.value / lo.value if lo.value > 0 else math.inf
        rows.append({"N": N, "phi_l": lo.value, "phi_l_bounds": [lo.lower, lo.upper],
                     "phi_u": up.value, "phi_u_bounds": [up.lower, up.upper],
                     "ratio": ratio, "flagged": ratio > constant,
                     "witness_l": list(lo.witness), "witness_u": list(up.witness)})
    return rows


def rudin_shapiro_witness(k: int, freq: Frequency | None = None) -> PhiBound:
    """Upper bound for φ_{l,ε}^∞(2^k) from the Rudin-Shapiro signs.

    The witness is A = {1..2^k} with ε the coefficients of P_k, placed on
    ``freq`` (integers by default; any frequency whose first 2^k terms are
    an arithmetic progression gives the same sup norm). The bound is the
    certified upper end of the sampled sup-norm bracket.
    """
    from .dpoly import rudin_shapiro_coeffs
    a = rudin_shapiro_coeffs(k)
    N = int(a.size)
    freq = freq or fq.integers(N)
    if len(freq) < N:
        raise ValueError(f"frequency needs at least {N} terms")
    poly = DirichletPolynomial(freq, tuple((j + 1, int(x)) for j, x in enumerate(a)))
    est = norms.norm_sup(poly, "sampled-refined")
    lower, _ = apriori_bounds(math.inf, N)
    return PhiBound("l-eps", math.inf, N, tuple(range(1, N + 1)), min(lower, est.upper), est.upper,
                    est.value, tuple(range(1, N + 1)), tuple(int(x) for x in a), "witness",
                    "real-signs", "upper-bound", est.method, 1, None,
                    [f"sup bracket [{est.lower!r}, {est.upper!r}]",
                     f"2*sqrt(N) = {2 * math.sqrt(N)!r}"])
