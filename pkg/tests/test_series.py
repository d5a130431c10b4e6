import random
from fractions import Fraction

import pytest

from slopekit.errors import PrecisionExhausted
from slopekit.linalg import identity, mat_mul, zeros
from slopekit.padics import PadicRing, PadicScalar
from slopekit.series import (
    NewtonPolygon,
    PadicPoly,
    TruncatedSeries,
    charpoly_rev,
    newton_polygon,
    slope_factorization,
)

Z5 = PadicRing(5, 12)
Z7 = PadicRing(7, 12)


def series(ring, ints, trunc=None):
    return TruncatedSeries(ring, [ring.from_int(n) for n in ints], trunc)


def test_polygon_of_planted_product():
    # (1 - pT)(1 - p^2 T) expanded by hand
    F = series(Z5, [1, -(5 + 25), 125])
    np_ = newton_polygon(F)
    assert np_.slope_multiset() == [Fraction(1), Fraction(2)]


def test_polygon_constant_series():
    F = series(Z5, [1])
    assert newton_polygon(F).slope_multiset() == []


def test_polygon_half_slope_segment():
    # hand convex hull of (0,0), (1,1), (2,1): single segment of slope 1/2
    F = series(Z7, [1, 7, 7])
    np_ = newton_polygon(F)
    assert np_.slope_multiset() == [Fraction(1, 2), Fraction(1, 2)]
    assert np_.vertices == ((0, Fraction(0)), (2, Fraction(1)))


def test_polygon_degenerate_precision():
    # middle coefficient O(p^0) could dip below the hull between (0,0) and (2,4)
    coeffs = [Z5.one(), PadicScalar(5, 0, 0, 1, _normalized=True), Z5.from_int(5**4)]
    F = TruncatedSeries(Z5, coeffs)
    with pytest.raises(PrecisionExhausted):
        newton_polygon(F)


def test_polygon_multiplicity_counts_span():
    F = series(Z5, [1, 5, 10, 125 * 3])
    np_ = newton_polygon(F)
    assert sum(m for _, m in np_.slopes) == np_.vertices[-1][0]


def test_charpoly_rev_diagonal():
    U = [[Z5.from_int(5), Z5.zero()], [Z5.zero(), Z5.from_int(25)]]
    F = charpoly_rev(Z5, U)
    expect = series(Z5, [1, -30, 125])
    for a, b in zip(F.coeffs, expect.coeffs):
        assert a.agrees_with(b)


def test_charpoly_rev_zero_and_nilpotent():
    U0 = zeros(Z5, 3, 3)
    F0 = charpoly_rev(Z5, U0)
    assert F0.coeffs[0].agrees_with(Z5.one())
    assert all(c.is_zero() for c in F0.coeffs[1:])
    N = zeros(Z5, 2, 2)
    N[0][1] = Z5.one()
    FN = charpoly_rev(Z5, N)
    assert FN.coeffs[0].agrees_with(Z5.one())
    assert all(c.is_zero() for c in FN.coeffs[1:])


def test_charpoly_block_diagonal_is_product():
    rng = random.Random(7)
    A = [[Z7.from_int(rng.randrange(-20, 20)) for _ in range(2)] for _ in range(2)]
    B = [[Z7.from_int(rng.randrange(-20, 20)) for _ in range(3)] for _ in range(3)]
    blocks = zeros(Z7, 5, 5)
    for i in range(2):
        for j in range(2):
            blocks[i][j] = A[i][j]
    for i in range(3):
        for j in range(3):
            blocks[2 + i][2 + j] = B[i][j]
    F = charpoly_rev(Z7, blocks)
    FA = charpoly_rev(Z7, A)
    FB = charpoly_rev(Z7, B)
    prod = TruncatedSeries(Z7, FA.coeffs, 6) * TruncatedSeries(Z7, FB.coeffs, 6)
    for a, b in zip(F.coeffs, prod.coeffs):
        assert a.agrees_with(b)


def test_charpoly_matches_elimination_determinant_identity():
    # det(1 - TU) at T=1 should equal det(I - U)
    from slopekit.linalg import determinant, mat_sub

    rng = random.Random(3)
    U = [[Z7.from_int(rng.randrange(-9, 9)) for _ in range(4)] for _ in range(4)]
    F = charpoly_rev(Z7, U)
    lhs = Z7.zero()
    for c in F.coeffs:
        lhs = lhs + c
    rhs = determinant(Z7, mat_sub(identity(Z7, 4), U))
    assert lhs.agrees_with(rhs)


def test_slope_factorization_reads_off_planted_factors():
    F = series(Z5, [1, -(5 + 25), 125], trunc=4)
    Q, R, _ = slope_factorization(F, Fraction(1))
    assert Q.formal_degree == 1
    assert Q.coeffs[1].agrees_with(Z5.from_int(-5))
    assert R.coeffs[1].agrees_with(Z5.from_int(-25))


def test_slope_factorization_trivial_factor():
    F = series(Z5, [1, -(5 + 25), 125], trunc=4)
    Q, R, _ = slope_factorization(F, Fraction(1, 2))
    assert Q.formal_degree == 0
    for a, b in zip(R.coeffs, F.coeffs):
        assert a.agrees_with(b)


def test_slope_factorization_half_slope_pair():
    # slopes {1/2, 1/2, 3, 5}: quadratic slope-(1/2) factor times two linear ones
    ring = PadicRing(5, 16)
    qf = TruncatedSeries(ring, [ring.from_int(1), ring.from_int(5), ring.from_int(5 * 7)], 8)
    lin1 = TruncatedSeries(ring, [ring.from_int(1), ring.from_int(-(5**3))], 8)
    lin2 = TruncatedSeries(ring, [ring.from_int(1), ring.from_int(-(5**5) * 2)], 8)
    F = qf * lin1 * lin2
    Q, R, _ = slope_factorization(F, Fraction(2))
    assert Q.formal_degree == 2
    for a, b in zip(Q.coeffs, qf.coeffs):
        assert a.agrees_with(b)
    # reconstruction
    QR = R.mul_poly(Q)
    for a, b in zip(QR.coeffs, F.coeffs):
        assert a.agrees_with(b)
    qslopes = newton_polygon(Q.coeffs and TruncatedSeries(ring, Q.coeffs)).slope_multiset()
    assert qslopes == [Fraction(1, 2), Fraction(1, 2)]


def test_slope_factorization_random_planted(seeded_cases=25):
    rng = random.Random(11)
    ring = PadicRing(7, 18)
    for _ in range(seeded_cases):
        vals = sorted(rng.sample(range(0, 6), 3))
        factors = [
            TruncatedSeries(
                ring,
                [ring.one(), ring.from_int(-(7**v) * rng.choice([1, 2, 3, 4, 5, 6]))],
                10,
            )
            for v in vals
        ]
        F = factors[0]
        for f in factors[1:]:
            F = F * f
        h = Fraction(vals[1])  # split after the two smallest slopes
        if vals[2] == vals[1]:
            continue
        Q, R, _ = slope_factorization(F, h)
        assert Q.formal_degree == 2
        QR = R.mul_poly(Q)
        for a, b in zip(QR.coeffs, F.coeffs):
            assert a.agrees_with(b)


def test_polygon_product_is_union_of_slopes():
    rng = random.Random(23)
    ring = PadicRing(5, 20)
    for _ in range(10):
        v1, v2 = rng.randrange(0, 4), rng.randrange(0, 4)
        f = TruncatedSeries(ring, [ring.one(), ring.from_int(-(5**v1) * 2)], 6)
        g = TruncatedSeries(ring, [ring.one(), ring.from_int(-(5**v2) * 3)], 6)
        fg = f * g
        got = sorted(newton_polygon(fg).slope_multiset())
        assert got == sorted([Fraction(v1), Fraction(v2)])
