from fractions import Fraction

import pytest

from slopekit.errors import InvariantViolation, MathFailure, NoSlopeVertex
from slopekit.linalg import charpoly_monic, mat_mul, solve_columns
from slopekit.padics import PadicRing
from slopekit.series import newton_polygon
from slopekit.slopes import (
    classicality_check,
    controlling_matrix,
    fredholm,
    make_slope_datum,
    moment_independence_check,
    small_slope_bound,
)
from slopekit.symbols import SymbolModule, build_presentation
from slopekit.weights import ArithmeticWeight, WeightDisk

PRES5 = build_presentation(1, 5)
PRES11 = build_presentation(1, 11)


def test_fredholm_constant_term_is_one():
    fd = fredholm(PRES5, ArithmeticWeight(0), 4, prec=6)
    assert fd.series.coeffs[0].agrees_with(PadicRing(5, 6).one())


def test_fredholm_trivial_coefficients_level_5():
    # M = 1, k = 0: the working complex sees the Eisenstein line only,
    # the torsion directions are projected to zero eigenvalues
    fd = fredholm(PRES5, ArithmeticWeight(0), 1, prec=4)
    slopes = fd.polygon.slope_multiset()
    assert slopes == [Fraction(0)]


def test_fredholm_level_11_ordinary_rank_3():
    fd = fredholm(PRES11, ArithmeticWeight(0), 6, prec=6)
    assert fd.polygon.slope_multiset()[:3] == [Fraction(0)] * 3
    assert fd.polygon.slope_multiset()[3] > 0


def test_slope_datum_captures_all_small_slopes():
    # h = 3/2 at depth 8 captures the whole slope <= 1 block; the restricted
    # determinant has valuation = sum of captured slopes, which must clear
    # the truncation cap p^M with room to certify
    fd = fredholm(PRES5, ArithmeticWeight(0), 8, prec=10)
    slopes = fd.polygon.slope_multiset()
    h = Fraction(3, 2)
    want = sum(1 for s in slopes if s <= h)
    datum, dec, _ = make_slope_datum(PRES5, ArithmeticWeight(0), h, 8, prec=10)
    assert dec.factor.formal_degree == want
    assert dec.rank == want == 2


def test_total_decomposition_on_series():
    # with h at or above every slope the factorization is total: Q is the
    # whole stored polynomial and the complement is 1
    from slopekit.series import TruncatedSeries, slope_factorization

    ring = PadicRing(5, 12)
    F = TruncatedSeries(
        ring, [ring.one(), ring.from_int(-6), ring.from_int(5)], 6
    )  # (1 - T)(1 - 5T)
    Q, R, _ = slope_factorization(F, Fraction(1))
    assert Q.formal_degree == 2
    assert all(c.is_zero() for c in R.coeffs[1:])


def test_slope_datum_ordinary_level_11():
    datum, dec, _ = make_slope_datum(
        PRES11, ArithmeticWeight(0), Fraction(0), 8, prec=8, hecke_primes=(2,)
    )
    assert dec.rank == 3
    ring = PadicRing(11, 8)
    poly = charpoly_monic(ring, dec.hecke_restricted["T2"])
    # (x - 3)(x + 2)^2 reduced 11-adically
    want = [1, 1, -8, -12]
    for a, b in zip(poly, want):
        assert (a - ring.from_int(b)).is_zero()


def test_slope_datum_reports_invertibility():
    _, dec, _ = make_slope_datum(PRES11, ArithmeticWeight(0), Fraction(0), 6, prec=6)
    assert not dec.reports["det_u_restricted"].is_zero()
    det_c = dec.reports["complement_det"]
    assert not det_c.is_zero()


def test_slope_between_hull_slopes_counts_rank():
    fd = fredholm(PRES5, ArithmeticWeight(0), 6, prec=8)
    slopes = fd.polygon.slope_multiset()
    # pick h strictly between the first two distinct slopes
    distinct = sorted(set(slopes))
    h = (distinct[0] + distinct[1]) / 2
    _, dec, _ = make_slope_datum(PRES5, ArithmeticWeight(0), h, 6, prec=8)
    assert dec.rank == sum(1 for s in slopes if s <= h)


def test_decomposition_divisibility_between_bounds():
    fd = fredholm(PRES5, ArithmeticWeight(0), 8, prec=12)
    distinct = sorted(set(fd.polygon.slope_multiset()))
    h1 = (distinct[0] + distinct[1]) / 2
    h2 = (distinct[1] + distinct[2]) / 2
    _, dec1, _ = make_slope_datum(PRES5, ArithmeticWeight(0), h1, 8, prec=12)
    _, dec2, _ = make_slope_datum(PRES5, ArithmeticWeight(0), h2, 8, prec=12)
    # Q_1 divides Q_2: the quotient of reversed factors has zero remainder
    ring = PadicRing(5, 10)
    q1 = dec1.factor.coeffs
    q2 = dec2.factor.coeffs
    # series division q2 / q1 must terminate with polynomial quotient
    from slopekit.series import TruncatedSeries

    quot = TruncatedSeries(ring, q2, 8) * TruncatedSeries(ring, q1, 8).inverse()
    for c in quot.coeffs[dec2.factor.formal_degree - dec1.factor.formal_degree + 1 :]:
        assert c.is_zero()
    # the h1-basis embeds in the span of the h2-basis (solve must succeed)
    coords = solve_columns(ring, dec2.basis, dec1.basis)
    assert len(coords) == dec2.rank and len(coords[0]) == dec1.rank


def test_independence_equal_depths_is_exact():
    rep = moment_independence_check(PRES5, ArithmeticWeight(0), (4, 4), prec=6)
    assert all(m["agrees"] for m in rep["margins"])


def test_independence_detects_planted_violation():
    # negative control: a synthetic operator that reads high moments with
    # unit weights (breaking the filtration) has truncation-dependent
    # Fredholm coefficients, and the checker must flag the disagreement
    ring = PadicRing(5, 8)
    from slopekit.series import charpoly_rev
    from slopekit.slopes import compare_fredholm_series

    def bad_operator(M):
        # permutation-like with no p-divisibility toward high moments
        return [
            [ring.one() if (j == (i + 1) % M or i == j) else ring.zero() for j in range(M)]
            for i in range(M)
        ]

    f1 = charpoly_rev(ring, bad_operator(3))
    f2 = charpoly_rev(ring, bad_operator(5))
    with pytest.raises(InvariantViolation):
        compare_fredholm_series(f1, f2)


def test_classicality_refuses_above_bound():
    assert small_slope_bound(0) == 1
    with pytest.raises(MathFailure):
        classicality_check(PRES11, 0, Fraction(1), (2,), M=4, prec=4)


def test_classicality_level_11_full():
    rep = classicality_check(PRES11, 0, Fraction(0), (2, 3), M=10, prec=10)
    assert rep["ok"]
    assert rep["overconvergent_rank"] == rep["classical_rank"] == 3


def test_family_polygon_requires_positive_radius():
    from slopekit.errors import DiskTooLarge

    disk = WeightDisk(5, 0, None, 6, 4)
    with pytest.raises(DiskTooLarge):
        fredholm(PRES5, disk, 4)
