from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slopekit.errors import PrecisionExhausted
from slopekit.padics import (
    AtLeast,
    PadicRing,
    PadicScalar,
    padic_log_principal,
    principal_part,
    teichmuller,
)

Z5 = PadicRing(5, 8)
Z7 = PadicRing(7, 10)


def test_valuation_examples():
    assert Z5.from_int(25).valuation() == 2
    assert Z5.from_int(1).valuation() == 0
    assert PadicRing(5, 4).from_int(0).valuation() == AtLeast(4)


def test_normalization_strips_p():
    x = PadicScalar(5, 0, 50, 6)
    assert x.val == 2 and x.unit == 2
    assert x.prec == 6


def test_zero_detection_at_precision():
    x = Z5.from_int(5**9)  # below the precision floor of val+8
    y = PadicScalar(5, 0, 5**9, 4)
    assert not x.is_zero()  # from_int keeps 8 relative digits
    assert y.is_zero() and y.prec == 4


def test_add_precision_is_min():
    x = Z5.from_int(3).with_abs_prec(5)
    y = Z5.from_int(4).with_abs_prec(7)
    assert (x + y).prec == 5
    assert (x + y).residue(5) == 7


def test_mul_valuation_bookkeeping():
    x = Z5.from_int(5)  # prec 9, val 1
    y = Z5.from_int(10)  # val 1
    z = x * y
    assert z.val == 2
    assert z.rel_prec == 8


def test_cancellation_loses_digits():
    x = Z5.from_int(1).with_abs_prec(6)
    y = Z5.from_int(1 + 5**4).with_abs_prec(6)
    d = y - x
    assert d.val == 4 and d.prec == 6 and d.rel_prec == 2


def test_invert_and_divide():
    x = Z5.from_int(7)
    assert (x * x.invert()).agrees_with(Z5.one())
    with pytest.raises(PrecisionExhausted):
        PadicScalar(5, 3, 0, 3).invert()
    q = Z5.from_fraction(Fraction(2, 7))
    assert (q * Z5.from_int(7)).agrees_with(Z5.from_int(2))


def test_negative_valuation():
    x = Z5.from_fraction(Fraction(1, 5))
    assert x.val == -1
    assert (x * Z5.from_int(5)).agrees_with(Z5.one())


def test_pow_matches_repeated_multiplication():
    x = Z5.from_int(12)
    acc = Z5.one()
    for _ in range(6):
        acc = acc * x
    assert (x**6).agrees_with(acc)
    assert (x**-2).agrees_with((x.invert()) * (x.invert()))


small_ints = st.integers(min_value=-(10**6), max_value=10**6)


@given(small_ints, small_ints, small_ints)
@settings(max_examples=200, deadline=None)
def test_ring_laws_to_stated_precision(a, b, c):
    x, y, z = Z7.from_int(a), Z7.from_int(b), Z7.from_int(c)
    assert ((x + y) + z).agrees_with(x + (y + z))
    assert (x * (y + z)).agrees_with(x * y + x * z)
    assert (x * y).agrees_with(y * x)


@given(small_ints, small_ints)
@settings(max_examples=200, deadline=None)
def test_arithmetic_matches_integers_mod_p_n(a, b):
    x, y = Z7.from_int(a), Z7.from_int(b)
    s, m = x + y, x * y
    assert (s - Z7.from_int(a + b)).is_zero()
    assert (m - Z7.from_int(a * b)).is_zero()


def test_teichmuller_is_root_of_unity():
    for a in (2, 3, 4, 6):
        t = teichmuller(Z5, Z5.from_int(a))
        assert (t ** 4).agrees_with(Z5.one())
        assert (t - Z5.from_int(a)).val_floor >= 1


def test_principal_part():
    x = Z5.from_int(7)
    px = principal_part(Z5, x)
    assert (px - Z5.one()).val_floor >= 1


def test_log_additivity():
    ring = PadicRing(5, 10)
    x = ring.from_int(1 + 5)
    y = ring.from_int(1 + 2 * 5**2)
    lhs = padic_log_principal(ring, x * y)
    rhs = padic_log_principal(ring, x) + padic_log_principal(ring, y)
    assert lhs.agrees_with(rhs)


def test_log_of_gamma_has_valuation_one():
    ring = PadicRing(5, 12)
    lg = padic_log_principal(ring, ring.from_int(6))
    assert lg.val == 1


def test_scale_int():
    x = Z5.from_int(3)
    assert x.scale_int(10).agrees_with(Z5.from_int(30))
    assert x.scale_int(0).is_zero()
