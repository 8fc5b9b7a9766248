import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import circle_norm
from dhardy import asymptotics as asy


def test_sqrt_fit():
    pts = [(n, math.sqrt(n)) for n in (4, 8, 16, 32, 64, 128, 256)]
    fit = asy.fit_power_law(pts)
    assert fit.exponent == pytest.approx(0.5, abs=1e-12) and fit.r2 == pytest.approx(1.0)


def test_kernel_l4_closed_form_exponent():
    Ns = asy.parse_range("16:4096:geom")
    fit = asy.fit_power_law([(n, ((2 * n ** 3 + n) / 3) ** 0.25) for n in Ns])
    assert fit.exponent == pytest.approx(0.75, abs=0.02)


def test_constant_points_degenerate():
    fit = asy.fit_power_law([(n, 3.0) for n in (2, 4, 8, 16)])
    assert fit.exponent == pytest.approx(0.0, abs=1e-12)
    assert fit.degenerate


def test_classify_log():
    fit = asy.classify_growth([(n, math.log(n)) for n in (4, 8, 16, 64, 256, 1024)])
    assert fit.model == "logarithmic" and fit.slope == pytest.approx(1.0, abs=1e-12)


def test_classify_power():
    fit = asy.classify_growth([(n, n ** 0.75) for n in (4, 8, 16, 64, 256, 1024)])
    assert fit.model == "power-law" and fit.exponent == pytest.approx(0.75, abs=1e-12)


def test_classify_linear_exact():
    assert asy.classify_growth([(n, 2.0 * n) for n in (1, 2, 4, 8)]).model == "linear-exact"


def test_kernel_l1_is_logarithmic():
    Ns = [16, 32, 64, 128, 256, 512]
    pts = [(n, circle_norm(range(1, n + 1), np.ones(n), 1, nodes=64 * n)) for n in Ns]
    fit = asy.classify_growth(pts)
    assert fit.model == "logarithmic"
    assert 0.3 <= fit.slope <= 0.5


def test_fit_point_requirements():
    with pytest.raises(ValueError):
        asy.fit_power_law([(1, 1), (2, 2), (3, 3)])
    with pytest.raises(ValueError):
        asy.fit_power_law([(1, 1), (2, 2), (3, 3), (3.5, 4)])
    with pytest.raises(ValueError):
        asy.fit_power_law([(4, 1), (2, 2), (8, 3), (16, 4)])


def test_parse_range():
    assert asy.parse_range("16:128:geom") == [16, 32, 64, 128]
    assert asy.parse_range("1:4") == [1, 2, 3, 4]
    assert asy.parse_range("2:10:4") == [2, 6, 10]
    assert asy.parse_range("5,3,9") == [3, 5, 9]
    with pytest.raises(ValueError):
        asy.parse_range("9:3")


@settings(max_examples=50, deadline=None)
@given(st.floats(1e-3, 1e3), st.floats(0, 1))
def test_power_law_recovers_exponent(c, t):
    pts = [(n, c * n ** t) for n in (4, 8, 16, 32, 64, 128)]
    assert asy.fit_power_law(pts).exponent == pytest.approx(t, abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.05, 5), st.floats(0.5, 5), st.floats(0, 1e-3), st.integers(0, 2 ** 32 - 1))
def test_classifier_prefers_clear_log(a, b, noise, seed):
    rng = np.random.default_rng(seed)
    Ns = np.array([16, 32, 64, 128, 256, 512, 1024, 2048])
    vals = (a * np.log(Ns) + b) * (1 + noise * rng.standard_normal(Ns.size))
    pts = list(zip(Ns.tolist(), vals.tolist()))
    fit = asy.classify_growth(pts)
    pw, lg = asy.fit_power_law(pts), asy.fit_logarithmic(pts)
    if lg.rss * 10 <= pw.rss:
        assert not (fit.model == "power-law" and fit.exponent <= 0.05)


def test_family_norms_primes_p4():
    rows = asy.family_norms("log-primes", 4, [4, 8, 16, 32])
    for r in rows:
        N = r["N"]
        assert r["value"] == pytest.approx((2 * N * N - N) ** 0.25, rel=1e-14)


def test_rs_bounds():
    for r in asy.rs_bounds([1, 4, 16, 64, 100, 256]):
        assert r["pass"] and r["N"] != 100


def test_report_p2():
    rep = asy.theorem_report("ordinary", ["2"], "16:256:geom")
    assert rep["summary"]["all_pass"]
    for c in rep["cells"]:
        fit = c.get("fit")
        if fit and fit.get("exponent") is not None and c["family"] != "derived":
            assert fit["exponent"] == pytest.approx(0.5, abs=1e-9)


def test_report_p4_ordinary_max_rule():
    rep = asy.theorem_report("ordinary", ["4"], "16:1024:geom")
    assert rep["summary"]["all_pass"]


def test_report_p_inf():
    rep = asy.theorem_report("ordinary", ["inf"], "16:1024:geom")
    assert rep["summary"]["all_pass"]


def test_report_brackets_general():
    rep = asy.theorem_report("general", ["1", "4/3", "4"], "16:256:geom")
    assert rep["summary"]["all_pass"]
    assert rep["summary"]["cells"] == rep["summary"]["pass"] + rep["summary"]["fail"] + rep["summary"]["gaps"]


def test_unknown_theorem():
    with pytest.raises(ValueError):
        asy.theorem_report("nope", ["2"], "16:64:geom")


def test_sweep_matches_dense_oracle():
    Ns = [5, 17, 40]
    sweep = asy.sweep_norms("integers", ["1", "4/3", "4"], Ns, oversample=1024)
    for p in (1, 4 / 3, 4):
        for row in sweep[asy.norms.format_p(p)]:
            N = row["N"]
            want = circle_norm(range(1, N + 1), np.ones(N), p, nodes=1 << 18)
            assert row["value"] == pytest.approx(want, rel=1e-6)
    # a coarse grid reports its own error through the half-grid change
    for row in asy.sweep_norms("integers", ["1"], Ns, oversample=8)["1"]:
        N = row["N"]
        want = circle_norm(range(1, N + 1), np.ones(N), 1, nodes=1 << 18)
        assert abs(row["value"] - want) <= row["rel_change"] * want
    assert all(r["certainty"] == "exact" for r in sweep["4"])


def test_sweep_single_variable_lift():
    # powers of two lift to one circle, so the sweep equals the integer kernel
    a = asy.sweep_norms("powers-of-two", ["4/3"], [8, 32])["4/3"]
    b = asy.sweep_norms("integers", ["4/3"], [8, 32])["4/3"]
    assert [r["value"] for r in a] == pytest.approx([r["value"] for r in b], rel=1e-12)


def test_sweep_rejects_many_variables():
    with pytest.raises(asy.norms.EngineError):
        asy.sweep_norms("log-primes", ["4/3"], [4, 8])
    with pytest.raises(ValueError):
        asy.sweep_norms("integers", ["inf"], [4])
