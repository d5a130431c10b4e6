import random
from fractions import Fraction

import pytest

from slopekit.errors import PointOutsideDisk
from slopekit.padics import PadicRing
from slopekit.weights import (
    ArithmeticWeight,
    FamilyRing,
    WeightDisk,
    analyticity_index,
    character_tail_blows_up,
    eval_character,
)


def disk5(k0=0, r=1, prec=10, mw=6):
    return WeightDisk(5, k0, Fraction(r), prec, mw)


def test_character_of_identity():
    chi = eval_character(disk5(), PadicRing(5, 10).from_int(1))
    assert chi.coeffs[0].agrees_with(PadicRing(5, 10).one())
    assert all(c.is_zero() for c in chi.coeffs[1:])


def test_character_center_specialization():
    d = disk5(k0=3)
    scalars = d.scalars
    gamma = scalars.from_int(d.gamma)
    chi = eval_character(d, gamma)
    # at w = 0 the character returns gamma^k0
    assert chi.specialize(3).agrees_with(gamma**3)


def test_character_specialization_interpolates_powers():
    # chi(gamma^2) specialized at weight 3 must equal gamma^6, computed
    # independently by modular exponentiation
    d = disk5(k0=0, prec=9, mw=8)
    scalars = d.scalars
    gamma = scalars.from_int(d.gamma)
    chi = eval_character(d, gamma * gamma)
    got = chi.specialize(3)
    oracle = scalars.from_int(pow(6, 6, 5**12))
    assert (got - oracle).is_zero()


def test_character_specialization_on_general_units():
    # for k = k0 + j with (p-1) | j the specialization is x^(k0+j) for every unit x
    d = disk5(k0=0, prec=8, mw=8)
    scalars = d.scalars
    for x0 in (2, 3, 7, 12):
        x = scalars.from_int(x0)
        chi = eval_character(d, x)
        got = chi.specialize(4)
        assert got.agrees_with(x**4)


def test_character_multiplicativity():
    d = disk5(prec=8, mw=5)
    scalars = d.scalars
    rng = random.Random(5)
    for _ in range(10):
        a = rng.randrange(1, 5**6)
        b = rng.randrange(1, 5**6)
        if a % 5 == 0 or b % 5 == 0:
            continue
        xa, xb = scalars.from_int(a), scalars.from_int(b)
        lhs = eval_character(d, xa * xb)
        rhs = eval_character(d, xa) * eval_character(d, xb)
        assert lhs.agrees_with(rhs)


def test_specialization_is_ring_hom():
    d = disk5(prec=8, mw=5)
    ring = FamilyRing(d)
    rng = random.Random(9)
    for _ in range(8):
        f = ring.from_int(rng.randrange(-50, 50)) + ring.var().scale(d.scalars.from_int(rng.randrange(-9, 9)))
        g = ring.from_int(rng.randrange(-50, 50)) + (ring.var() * ring.var()).scale(d.scalars.from_int(rng.randrange(-9, 9)))
        k = 4
        assert (f * g).specialize(k).agrees_with(f.specialize(k) * g.specialize(k))


def test_specialize_constant_and_center():
    d = disk5()
    ring = FamilyRing(d)
    c = ring.from_int(17)
    assert c.specialize(0).agrees_with(d.scalars.from_int(17))
    w = ring.var()
    assert w.specialize(0).is_zero()


def test_point_outside_disk():
    d = WeightDisk(5, 0, None, 8, 4)  # single point
    ring = FamilyRing(d)
    with pytest.raises(PointOutsideDisk):
        ring.one().specialize(4)


def test_family_inverse():
    d = disk5(prec=8, mw=5)
    ring = FamilyRing(d)
    f = ring.from_int(2) + ring.var()
    g = f.invert()
    assert (f * g).agrees_with(ring.one())


def test_analyticity_index_standard_disk():
    assert analyticity_index(disk5(r=1)) == 1
    assert analyticity_index(disk5(r=2)) == 1


def test_analyticity_index_point_disk():
    assert analyticity_index(WeightDisk(5, 0, None, 8, 4)) == 1


def test_analyticity_index_wide_disk():
    wide = disk5(r=Fraction(1, 8))
    s = analyticity_index(wide)
    assert s >= 2
    # independent witness: the series bound fails at s-1 and holds at s
    assert character_tail_blows_up(wide, s - 1)
    assert not character_tail_blows_up(wide, s)


def test_analyticity_index_monotone_in_radius():
    vals = [analyticity_index(disk5(r=Fraction(1, 2**j))) for j in range(0, 6)]
    assert vals == sorted(vals)


def test_dominant_weight_flag():
    assert ArithmeticWeight(4).dominant
    assert not ArithmeticWeight(-2).dominant
