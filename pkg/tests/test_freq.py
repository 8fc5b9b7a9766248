import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dhardy import freq as fq


def test_log_integers_store_m():
    f = fq.log_integers(3)
    assert f.kind == fq.LOG_INTEGER
    assert f.terms == (1, 2, 3)
    np.testing.assert_allclose(f.values, [0.0, math.log(2), math.log(3)])


def test_arithmetic_progression_offsets():
    f = fq.arithmetic_progression(0, 1, 4)
    assert [f.exact(i) for i in range(1, 5)] == [1, 2, 3, 4]
    g = fq.arithmetic_progression(3, 2, 3)
    assert [g.exact(i) for i in range(1, 4)] == [5, 7, 9]


def test_lacunary_generator():
    f = fq.lacunary(2, 1, 3)
    assert [f.exact(i) for i in (1, 2, 3)] == [1, 2, 4]
    assert fq.is_lacunary(f, 2)


@pytest.mark.parametrize("terms, L, expected", [
    ([1, 2, 4, 8], 2, True),
    ([1, 2, 3], 2, False),
    ([1, 3, 9], 3, True),
])
def test_is_lacunary(terms, L, expected):
    assert fq.is_lacunary(fq.explicit([str(t) for t in terms]), L) is expected


def test_log_primes_independent():
    f = fq.log_primes(5)
    assert f.terms == (2, 3, 5, 7, 11)
    assert f.independent


def test_powers_of_two():
    assert fq.powers_of_two(4).terms == (2, 4, 8, 16)


def test_rejects_non_increasing():
    with pytest.raises(fq.FrequencyError):
        fq.explicit(["1", "1"])
    with pytest.raises(fq.FrequencyError):
        fq.explicit(["2", "1"])


def test_rejects_negative():
    with pytest.raises(fq.FrequencyError):
        fq.explicit(["-1", "2"])


def test_make_frequency_short_forms():
    assert fq.make_frequency("int:4").terms == (1, 2, 3, 4)
    assert fq.make_frequency("int", n_hint=2).terms == (1, 2)
    assert fq.make_frequency("logprimes:3").terms == (2, 3, 5)
    assert len(fq.make_frequency({"kind": "log_primes", "n": 7})) == 7
    with pytest.raises(fq.FrequencyError):
        fq.make_frequency("nonsense:3")


def test_descriptor_round_trip():
    for f in (fq.integers(5), fq.log_primes(4), fq.lacunary(3, 1, 4), fq.arithmetic_progression(1, 2, 3)):
        g = fq.make_frequency(f.to_descriptor())
        assert g.kind == f.kind and g.terms == f.terms


def test_log_integer_key_product():
    f = fq.explicit(["log:2", "log:3", "log:4", "log:6"])
    assert fq.sum_key(f, (1, 4)) == fq.sum_key(f, (2, 3))


def test_integer_key_sum():
    f = fq.integers(3)
    assert fq.sum_key(f, (1, 3)) == fq.sum_key(f, (2, 2))
    assert fq.sum_key(f, (1, 2)) != fq.sum_key(f, (2, 2))


def test_real_key_bucket():
    f = fq.explicit([0.5, 1.0], tol=1e-9)
    assert f.kind == fq.REAL
    assert fq.sum_key(f, (1, 1)) == fq.sum_key(f, (2,))


def test_rational_keys_exact():
    f = fq.explicit(["1/3", "2/3", "1"])
    assert fq.sum_key(f, (1, 2)) == fq.sum_key(f, (3,))
    assert fq.sum_key(f, (1, 2)).value == Fraction(1)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(1, 8), min_size=1, max_size=4), st.randoms(use_true_random=False))
def test_sum_key_permutation_invariant(idx, rnd):
    for f in (fq.integers(8), fq.log_integers(8), fq.explicit(["1/2", "1", "3/2", "7/3", "3", "4", "5", "9"])):
        perm = list(idx)
        rnd.shuffle(perm)
        assert fq.sum_key(f, idx) == fq.sum_key(f, perm)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(1, 10), min_size=1, max_size=3),
       st.lists(st.integers(1, 10), min_size=1, max_size=3))
def test_concatenation_combines_keys(a, b):
    for f in (fq.integers(10), fq.log_integers(10), fq.log_primes(10)):
        assert fq.combine_keys(f, fq.sum_key(f, a), fq.sum_key(f, b)) == fq.sum_key(f, a + b)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_log_integer_keys_match_products(k):
    f = fq.log_integers(12)
    tuples = list(itertools.combinations_with_replacement(range(1, 13), k))
    for t1 in tuples[::7]:
        for t2 in tuples:
            same = fq.sum_key(f, t1) == fq.sum_key(f, t2)
            assert same == (math.prod(t1) == math.prod(t2))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(0, 10 ** 6), min_size=1, max_size=30, unique=True))
def test_generated_frequencies_strictly_increasing(vals):
    f = fq.explicit([str(v) for v in sorted(vals)])
    v = f.values
    assert np.all(np.diff(v) > 0) and v[0] >= 0
