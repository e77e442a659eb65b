"""Tests for the truncated Laurent series kernel."""

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from haupt.errors import EmptyWindow, Malformed, NonPIntegral, PrecisionExhausted, ZeroLeadingCoefficient
from haupt.services.forms import delta_function
from haupt.services.qseries import (
    LaurentSeries,
    first_difference,
    format_series,
    mul_fast,
    mul_naive,
    nth_root,
    parse_series,
    recip,
    reduce_mod,
    require_coefficients,
    u_p,
    v_m,
    valuation_p,
)

from tests.conftest import SEED


def geometric(high: int) -> LaurentSeries:
    return LaurentSeries(0, [1] * high)


class TestArithmetic:
    def test_additive_inverse_is_zero(self):
        f = LaurentSeries.monomial(-1, 1, high=6)
        assert (f + (-f)).is_zero()

    def test_small_sum(self):
        a = LaurentSeries.from_dict({-1: 1, 1: 2}, high=3)
        b = LaurentSeries.from_dict({1: 3}, high=3, low=-1)
        assert a + b == LaurentSeries.from_dict({-1: 1, 1: 5}, high=3)

    def test_sum_window_is_shared_window(self):
        a = LaurentSeries.monomial(-1, 1, high=10)
        b = LaurentSeries.monomial(0, 1, high=4)
        s = a + b
        assert (s.low, s.high) == (-1, 4)

    def test_operand_starting_above_shared_window(self):
        high_start = LaurentSeries(5, [1, 0, 0, 0, 0])
        low_start = LaurentSeries(0, [1, 1, 1])
        total = high_start + low_start
        assert (total.low, total.high) == (0, 3)
        assert total == low_start
        assert first_difference(high_start, LaurentSeries(0, [0, 0, 0])) is None
        assert high_start == LaurentSeries(0, [0, 0, 0])

    def test_monomial_product(self):
        assert LaurentSeries.monomial(-1, 1, high=5) * LaurentSeries.monomial(1, 1, high=7) == 1

    def test_delta_times_reciprocal(self):
        delta = delta_function(30)
        assert delta * recip(delta) == 1

    def test_geometric_series(self):
        one_minus_q = LaurentSeries(0, [1, -1] + [0] * 8)
        assert one_minus_q * geometric(10) == 1

    def test_constant_comparison(self):
        assert LaurentSeries.one(5) == 1
        assert LaurentSeries.one(5) != 2

    def test_with_constant(self):
        f = LaurentSeries.from_dict({-1: 1, 0: -24, 1: 276}, high=2)
        assert f.with_constant(0).constant_term() == 0
        assert f.with_constant(0).coefficient(1) == 276

    def test_coefficient_beyond_precision(self):
        with pytest.raises(EmptyWindow):
            LaurentSeries.one(3).coefficient(3)

    def test_empty_window_rejected(self):
        with pytest.raises(EmptyWindow):
            LaurentSeries(0, [])

    def test_fraction_coefficients_normalize(self):
        f = LaurentSeries(0, [Fraction(4, 2), Fraction(1, 3)])
        assert type(f.coefficient(0)) is int
        assert f.coefficient(1) == Fraction(1, 3)


class TestReciprocal:
    def test_reciprocal_of_q_inverse(self):
        assert recip(LaurentSeries.monomial(-1, 1, high=5)) == LaurentSeries.monomial(1, 1, high=7)

    def test_reciprocal_of_one_minus_q(self):
        assert recip(LaurentSeries(0, [1, -1] + [0] * 8)) == geometric(10)

    def test_zero_leading_coefficient(self):
        with pytest.raises(ZeroLeadingCoefficient):
            recip(LaurentSeries(0, [0, 1]))

    def test_negative_power_matches_reciprocal(self):
        f = LaurentSeries(0, [1, 3, -2, 7, 0, 1])
        assert f**-2 == recip(f) * recip(f)

    def test_cube_root(self):
        f = LaurentSeries(0, [1, 1] + [0] * 8)
        assert nth_root(f**3, 3) == f

    def test_root_of_shifted_series(self):
        f = LaurentSeries(-1, [1, 0, 5, 0, 2, 0, 0])
        assert nth_root(f**2, 2) == f

    def test_root_needs_matching_exponent(self):
        with pytest.raises(Malformed):
            nth_root(LaurentSeries.monomial(-1, 1, high=4), 2)


class TestOperators:
    def test_up_of_q_inverse_vanishes(self):
        assert u_p(LaurentSeries.monomial(-1, 1, high=10), 2).is_zero()

    def test_vm_of_q_inverse(self):
        f = v_m(LaurentSeries.monomial(-1), 3)
        assert f.low == -3
        assert f == LaurentSeries.monomial(-3)

    def test_vm_fixes_constants(self):
        assert v_m(LaurentSeries.one(4), 5) == 1

    def test_up_window(self):
        f = LaurentSeries(-1, list(range(1, 22)))
        g = u_p(f, 5)
        assert (g.low, g.high) == (0, 4)
        assert [g.coefficient(n) for n in range(4)] == [2, 7, 12, 17]

    @settings(derandomize=True, max_examples=1000, deadline=None)
    @given(
        terms=st.dictionaries(st.integers(-1, 29), st.integers(-10**6, 10**6), max_size=8),
        p=st.sampled_from([2, 3, 5, 7, 11]),
    )
    def test_up_undoes_vp(self, terms, p):
        f = LaurentSeries.from_dict(terms, high=30, low=-1)
        assert u_p(v_m(f, p), p) == f

    def test_vm_rejects_zero(self):
        with pytest.raises(Malformed):
            v_m(LaurentSeries.one(2), 0)


class TestValuations:
    def test_zero_series_is_infinite(self):
        assert valuation_p(LaurentSeries.zero(5), 7).infinite
        assert str(valuation_p(LaurentSeries.zero(5), 7)) == "inf"

    def test_scalar_shift(self):
        f = LaurentSeries.from_dict({-1: 3, 2: 10}, high=4)
        assert valuation_p(f, 5).value == 0
        assert valuation_p(f * 5, 5).value == 1

    def test_minimum_over_window(self):
        f = LaurentSeries.from_dict({0: 8, 1: 12, 2: 32}, high=3)
        assert valuation_p(f, 2).value == 2

    def test_non_integral(self):
        with pytest.raises(NonPIntegral):
            valuation_p(LaurentSeries.from_dict({0: Fraction(1, 7)}, high=1), 7)

    def test_reduce_mod_prime_power(self):
        f = LaurentSeries.from_dict({-1: 1, 1: 8}, high=2)
        assert reduce_mod(f, 2, 3) == LaurentSeries.monomial(-1, 1, high=2)

    def test_reduce_zero(self):
        assert reduce_mod(LaurentSeries.zero(4), 3, 2).is_zero()

    def test_reduce_inverts_denominators(self):
        f = LaurentSeries.from_dict({0: Fraction(1, 2)}, high=1)
        assert reduce_mod(f, 3).coefficient(0) == 2

    def test_first_difference(self):
        a = LaurentSeries(0, [1, 2, 3, 4])
        b = LaurentSeries(0, [1, 2, 5, 4])
        assert first_difference(a, b) == 2
        assert first_difference(a, a) is None


class TestKernels:
    def test_naive_and_fast_agree(self):
        rng = random.Random(SEED)
        for _ in range(50):
            n = rng.randint(1, 160)
            a = [rng.randint(-10**12, 10**12) for _ in range(n)]
            b = [rng.randint(-10**3, 10**3) for _ in range(rng.randint(1, n))]
            assert mul_fast(a, b, n) == mul_naive(a, b, n)

    def test_fast_with_fractions(self):
        rng = random.Random(SEED + 1)
        a = [Fraction(rng.randint(-50, 50), rng.randint(1, 9)) for _ in range(80)]
        b = [rng.randint(-50, 50) for _ in range(80)]
        assert mul_fast(a, b, 80) == mul_naive(a, b, 80)

    def test_zero_operand(self):
        assert mul_fast([0, 0, 0], [1, 2, 3], 3) == [0, 0, 0]


class TestSerialization:
    def test_roundtrip(self):
        f = LaurentSeries.from_dict({-1: 1, 1: Fraction(1, 2), 3: -7}, high=5)
        g = parse_series(format_series(f))
        assert g == f
        assert (g.low, g.high) == (-1, 5)

    def test_missing_header(self):
        with pytest.raises(Malformed):
            parse_series("-1\t1\n")

    def test_decreasing_exponents(self):
        with pytest.raises(Malformed):
            parse_series("# low=-1 high=5\n2\t1\n1\t1\n")


def test_precision_limit():
    with pytest.raises(PrecisionExhausted):
        require_coefficients(10**9)
