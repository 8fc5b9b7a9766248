"""Acceptance suite.

Each test prints one ``criterion N: PASS|FAIL`` line (visible even without
``-s``) and then asserts the same verdict. Wall-clock limits are part of
the verdict.
"""

import itertools
import json
import math
import time

import numpy as np
import pytest

from conftest import energy_bruteforce
from dhardy import asymptotics as asy
from dhardy import dpoly as dp
from dhardy import energy as en
from dhardy import freq as fq
from dhardy import fundamental as fu
from dhardy import norms
from dhardy.cli import main


def verdict(capsys, n, ok, elapsed, limit, detail=""):
    ok = bool(ok) and elapsed < limit
    with capsys.disabled():
        print(f"\ncriterion {n}: {'PASS' if ok else 'FAIL'} ({elapsed:.1f}s / {limit:.0f}s) {detail}")
    assert ok, detail


def _combine(f):
    return math.prod if f.kind == fq.LOG_INTEGER else sum


# ---------------------------------------------------------------- 1

def test_energy_matches_tuple_enumeration(capsys):
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    bad = []
    runs = 0
    for f in (fq.integers(30), fq.log_integers(30), fq.log_primes(30)):
        for size in range(1, 11):
            A = sorted(rng.choice(np.arange(1, 31), size, replace=False).tolist())
            vals = [f.exact(i) for i in A]
            for k in (1, 2, 3):
                runs += 1
                got = en.additive_energy(f, A, k).value
                want = energy_bruteforce(vals, k, _combine(f))
                if got != want:
                    bad.append((f.kind, A, k, got, want))
    verdict(capsys, 1, not bad, time.perf_counter() - t0, 30, f"{runs} pools, mismatches={bad[:3]}")


# ---------------------------------------------------------------- 2

def test_energy_closed_forms(capsys):
    t0 = time.perf_counter()
    bad = []
    ints, primes = fq.integers(100), fq.log_primes(100)
    for N in range(1, 13):
        if energy_bruteforce(list(range(1, N + 1)), 2) != (2 * N ** 3 + N) // 3:
            bad.append(("int oracle", N))
        if energy_bruteforce(fq.primes(N), 2, math.prod) != 2 * N * N - N:
            bad.append(("prime oracle", N))
    for N in range(1, 101):
        if en.additive_energy(ints, range(1, N + 1), 2).value != (2 * N ** 3 + N) // 3:
            bad.append(("int", N))
        if en.additive_energy(primes, range(1, N + 1), 2).value != 2 * N * N - N:
            bad.append(("prime", N))
    verdict(capsys, 2, not bad, time.perf_counter() - t0, 10, f"failures={bad[:3]}")


# ---------------------------------------------------------------- 3

def test_circle_matches_exact_even(capsys):
    t0 = time.perf_counter()
    rng = np.random.default_rng(3)
    f = fq.integers(512)
    worst = 0.0
    for _ in range(50):
        A = rng.choice(np.arange(1, 513), int(rng.integers(1, 65)), replace=False).tolist()
        k = int(rng.integers(1, 4))
        d = dp.indicator(f, A)
        exact = norms.norm_even(d, k).value
        worst = max(worst, abs(norms.norm_circle_lp(d, 2 * k).value - exact) / exact)
    verdict(capsys, 3, worst <= 1e-9, time.perf_counter() - t0, 60, f"max rel diff={worst:.2e}")


# ---------------------------------------------------------------- 4

def test_besicovitch_agrees_with_exact_even(capsys):
    t0 = time.perf_counter()
    rng = np.random.default_rng(4)
    worst = 0.0
    for i in range(20):
        f = fq.integers(40) if i % 2 == 0 else fq.log_integers(40)
        A = rng.choice(np.arange(1, 41), int(rng.integers(1, 9)), replace=False).tolist()
        d = dp.indicator(f, A)
        exact = norms.norm_even(d, 2).value
        worst = max(worst, abs(norms.norm_besicovitch(d, 4).value - exact) / exact)
    verdict(capsys, 4, worst <= 1e-2, time.perf_counter() - t0, 120, f"max rel diff={worst:.2e}")


# ---------------------------------------------------------------- 5

def test_rudin_shapiro_sup(capsys):
    t0 = time.perf_counter()
    rows = []
    for k in range(15):
        est = norms.norm_sup(dp.rudin_shapiro(k), "sampled-refined")
        lo, hi = 2 ** (k / 2), math.sqrt(2 ** (k + 1)) * (1 + 5e-3)
        rows.append((k, lo <= est.value and est.upper <= hi, est.value, est.upper))
    ok = all(r[1] for r in rows)
    worst = max(r[3] / math.sqrt(2 ** (r[0] + 1)) for r in rows)
    verdict(capsys, 5, ok, time.perf_counter() - t0, 60, f"max upper/sqrt(2^(k+1))={worst:.5f}")


# ---------------------------------------------------------------- 6

def test_dirichlet_kernel_exponents(capsys):
    t0 = time.perf_counter()
    Ns = list(range(16, 4097))
    sweep = asy.sweep_norms("integers", ["1", "4/3", "2", "4"], Ns)
    parts, ok = [], True
    for p in ("4/3", "2", "4"):
        pts = [(r["N"], r["value"]) for r in sweep[p]]
        e = asy.fit_power_law(pts).exponent
        want = 1 / norms.conjugate(norms.parse_p(p))
        geo = asy.fit_power_law([(n, v) for n, v in pts if n & (n - 1) == 0]).exponent
        ok &= abs(e - want) <= 0.02
        parts.append(f"p={p}: {e:.4f} (target {want:.4f}, dyadic-only {geo:.4f})")
    fit = asy.classify_growth([(r["N"], r["value"]) for r in sweep["1"]])
    ok &= fit.model == "logarithmic" and 0.3 <= fit.slope <= 0.5
    parts.append(f"p=1: {fit.model} slope {fit.slope}")
    # the sweep must agree with the dispatcher where both are cheap
    for N in (16, 256, 1024):
        ref = norms.norm(dp.dirichlet_kernel(N), 4 / 3, rtol=1e-9).value
        ok &= abs(sweep["4/3"][N - 16]["value"] - ref) <= 1e-4 * ref
    verdict(capsys, 6, ok, time.perf_counter() - t0, 120, "; ".join(parts))


# ---------------------------------------------------------------- 7

def test_ordinary_witness_exponents(capsys):
    t0 = time.perf_counter()
    rep = asy.theorem_report("ordinary", ["1", "4/3", "2", "4", "6"], "64:16384:geom", tol=0.02)
    parts = []
    for c in rep["cells"]:
        fit = c.get("fit") or {}
        shown = fit.get("exponent") if fit.get("model") != "logarithmic" else f"log slope {fit.get('slope')}"
        parts.append(f"{c['family']}[{c['which']}] p={c['p']}: {shown} -> {c['pass']}")
    with capsys.disabled():
        print("\n  " + "\n  ".join(parts))
    verdict(capsys, 7, rep["summary"]["all_pass"], time.perf_counter() - t0, 300,
            json.dumps(rep["summary"]))


# ---------------------------------------------------------------- 8

def test_sup_fundamental_functions(capsys):
    t0 = time.perf_counter()
    bad = []
    pools = [(fq.integers(13), range(1, 14)), (fq.log_integers(14), range(2, 15)),
             (fq.log_primes(13), range(1, 14))]
    for f, pool in pools:
        sp = fu.SpaceSpec(math.inf, f)
        for N in range(1, 13):
            for which in ("u", "l"):
                b = fu.phi(sp, pool, N, which)
                if abs(b.value - N) > 1e-9 * N or b.lower > N * (1 + 1e-9) or b.upper < N * (1 - 1e-9):
                    bad.append((f.kind, N, which, b.value))
    worst = 0.0
    for k in range(13):
        b = fu.rudin_shapiro_witness(k)
        worst = max(worst, b.upper / (2 * math.sqrt(2 ** k)))
        if b.upper > 2 * math.sqrt(2 ** k):
            bad.append(("rs", k, b.upper))
    verdict(capsys, 8, not bad, time.perf_counter() - t0, 30,
            f"failures={bad[:3]}, max RS upper/(2 sqrt N)={worst:.4f}")


# ---------------------------------------------------------------- 9

def _random_poly(rng, log_kind=False):
    if log_kind:
        f = fq.log_integers(12)
        idx = rng.choice(np.arange(1, 13), int(rng.integers(1, 5)), replace=False)
    else:
        f = fq.integers(48)
        idx = rng.choice(np.arange(1, 49), int(rng.integers(1, 9)), replace=False)
    c = rng.normal(size=idx.size) + 1j * rng.normal(size=idx.size)
    return dp.DirichletPolynomial(f, tuple(zip(sorted(idx.tolist()), c.tolist())))


def test_inequality_suites(capsys):
    t0 = time.perf_counter()
    rng = np.random.default_rng(9)
    worst_hy = -math.inf
    for i in range(500):
        d = _random_poly(rng, log_kind=i % 10 == 0)
        p = (1, 4 / 3, 2)[i % 3]
        r = norms.hausdorff_young_check(d, p)
        worst_hy = max(worst_hy, r["margin"], r["dual_margin"])
    ladder = [1, 4 / 3, 2, 3, 4, 6, math.inf]
    mono_bad = []
    for i in range(200):
        d = _random_poly(rng, log_kind=i % 4 == 0)
        by_engine = {}
        for p in ladder:
            for eng in norms.applicable_engines(d, p):
                by_engine.setdefault(eng, []).append((p, norms.norm(d, p, eng)))
        # every engine is monotone along the ladder it covers
        for eng, seq in by_engine.items():
            for (p, a), (q, b) in zip(seq, seq[1:]):
                if a.value > b.value * (1 + 1e-9) + 1e-12:
                    mono_bad.append((i, eng, p, q, a.value, b.value))
        # and no certified value at p exceeds a certified value at a larger q
        cert = [(p, e) for seq in by_engine.values() for p, e in seq if e.certainty != "heuristic"
                and not e.diagnostics.get("heuristic")]
        for (p, a), (q, b) in itertools.product(cert, cert):
            if p < q and a.lower > b.upper * (1 + 1e-9) + 1e-12:
                mono_bad.append((i, "cross", p, q, a.lower, b.upper))
    kh = []
    for N in (4, 8, 16, 32):
        # the energy is an exact integer; the ratio then agrees to rounding
        f = fq.log_primes(N)
        r = norms.khinchin_sample(f, range(1, N + 1), 4, trials=1, coeffs="ones")
        want = ((2 * N * N - N) / N ** 2) ** 0.25
        kh.append(en.additive_energy(f, range(1, N + 1), 2).value == 2 * N * N - N
                  and abs(r["min"] - want) <= 4 * math.ulp(want))
    ok = worst_hy <= 1e-9 and not mono_bad and all(kh)
    verdict(capsys, 9, ok, time.perf_counter() - t0, 120,
            f"max HY margin={worst_hy:.2e}, monotonicity failures={mono_bad[:2]}, khinchin exact={kh}")


# ---------------------------------------------------------------- 10

def _chain_cases():
    # full chain where exhaustive ±1 search fits the budget
    for f, pool, Ns in ((fq.log_integers(12), range(3, 13), (2, 5, 8)),
                        (fq.integers(10), range(1, 11), (3, 7))):
        for N in Ns:
            yield f, pool, N, ("l-eps", "l", "u", "u-eps")
    # sixteen-element pool: sign variants only at the ends of the N range
    f, pool = fq.integers(16), range(1, 17)
    yield f, pool, 2, ("l", "u", "u-eps")
    yield f, pool, 15, ("l-eps", "l", "u")
    yield f, pool, 8, ("l", "u")


def test_chain_and_modes(capsys):
    t0 = time.perf_counter()
    bad = []
    cases = 0
    for p in (1, 2, 4, math.inf):
        for f, pool, N, whichs in _chain_cases():
            sp = fu.SpaceSpec(p, f)
            vals = {}
            for w in whichs:
                signs = "real" if w.endswith("eps") else "ones"
                ex = fu.phi(sp, pool, N, w, signs)
                vals[w] = ex.value
                for mode in ("randomized", "greedy"):
                    b = fu.phi(sp, pool, N, w, signs, mode, seed=7, iters=300)
                    tol = 1e-9 * ex.value
                    if w.startswith("u") and not (b.lower <= ex.value + tol <= b.upper + 2 * tol):
                        bad.append((p, f.kind, N, w, mode))
                    if w.startswith("l") and not (b.lower - tol <= ex.value <= b.upper + tol):
                        bad.append((p, f.kind, N, w, mode))
            chain = [vals[w] for w in ("l-eps", "l", "u", "u-eps") if w in vals]
            cases += 1
            if any(a > b * (1 + 1e-9) for a, b in zip(chain, chain[1:])):
                bad.append((p, f.kind, N, "chain", chain))
    verdict(capsys, 10, not bad, time.perf_counter() - t0, 300, f"{cases} cases, failures={bad[:3]}")


# ---------------------------------------------------------------- 11

def test_verify_deterministic(capsys):
    t0 = time.perf_counter()
    outs = []
    argv = ["verify", "--seed", "0", "--p", "1,4/3,4,inf", "--N", "16:1024:geom"]
    for threads in ("1", "4", "8", "1"):
        code = main(argv + ["--threads", threads])
        outs.append((code, capsys.readouterr().out))
    ok = len({o for _, o in outs}) == 1 and all(c == 0 for c, _ in outs)
    verdict(capsys, 11, ok, time.perf_counter() - t0, 60,
            f"{len(outs)} runs, {len(outs[0][1])} bytes, distinct outputs={len({o for _, o in outs})}")
