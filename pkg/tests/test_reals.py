from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from wmsets.errors import ParseError, PrecisionError, PreconditionError
from wmsets.reals import FixedReal, circle_within, parse_rational, parse_real


def test_parse_rational_forms():
    assert parse_rational("1/2") == Fraction(1, 2)
    assert parse_rational("0.3") == Fraction(3, 10)
    assert parse_rational(7) == 7


def test_parse_rational_rejects_float_and_bool():
    with pytest.raises(PreconditionError):
        parse_rational(0.5)
    with pytest.raises(PreconditionError):
        parse_rational(True)
    with pytest.raises(ParseError):
        parse_rational("half")


def test_sqrt_mantissa_bounds():
    a = FixedReal.sqrt(2, 64)
    assert a.mantissa**2 <= 2 << 128 < (a.mantissa + 1) ** 2
    assert FixedReal.sqrt(9, 64).exact == 3


def test_exact_decisions_for_rationals():
    a = parse_real("1/4")
    # dist(n/4) is 0, 1/4 or 1/2; epsilon = 1/4 keeps only multiples of 4
    assert circle_within([1, 2, 3, 4, 8], a, Fraction(1, 4)).tolist() == [False, False, False, True, True]


@given(st.lists(st.integers(0, 10**6), min_size=1, max_size=50), st.integers(1, 200))
def test_fixed_point_matches_exact_big_precision(vs, k):
    # irrational sqrt(k) at 64 and 256 bits must agree wherever both decide
    if int(k**0.5) ** 2 == k:
        k += 1
    eps = Fraction(1, 7)
    lo, hi = parse_real(f"sqrt({k})", 64), parse_real(f"sqrt({k})", 256)
    try:
        a = circle_within(np.array(vs), lo, eps)
    except PrecisionError:
        return
    assert a.tolist() == circle_within(vs, hi, eps).tolist()


@given(st.lists(st.integers(0, 10**9), min_size=1, max_size=30), st.integers(1, 50), st.integers(2, 60))
def test_fast_and_exact_rational_paths_agree(vs, p, q):
    a = parse_real(Fraction(p, q))
    eps = Fraction(1, 5)
    fast = circle_within(np.array(vs, dtype=np.int64), a, eps)
    slow = circle_within(np.array(vs, dtype=object), a, eps)
    naive = [min((v * p) % q, q - (v * p) % q) * 5 < q for v in vs]
    assert fast.tolist() == slow.tolist() == naive


def test_precision_error_near_boundary():
    # at 10 bits the error band v * 2^-10 soon covers the whole circle
    a = parse_real("sqrt(2)", 10)
    with pytest.raises(PrecisionError):
        circle_within(np.arange(1, 10**4), a, Fraction(3, 10))


def test_epsilon_range():
    with pytest.raises(PreconditionError):
        circle_within([1], parse_real("1/3"), Fraction(1, 2))
