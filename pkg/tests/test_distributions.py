import random
from fractions import Fraction

import pytest

from slopekit.distributions import (
    FamilyDistribution,
    MomentDistribution,
    Sigma0Matrix,
    act_on_distribution,
    action_matrix,
    amice_transform,
    classical_action_matrix,
    classical_projection,
    dirac_distribution,
    translate_distribution,
)
from slopekit.errors import ConfigError
from slopekit.padics import PadicRing
from slopekit.series import TruncatedSeries
from slopekit.weights import ArithmeticWeight, FamilyRing, WeightDisk

P = 5
Z = PadicRing(P, 10)
W0 = ArithmeticWeight(0)
W2 = ArithmeticWeight(2)


def rand_sigma0(rng, p=P):
    while True:
        a = rng.randrange(1, 40)
        if a % p == 0:
            continue
        b = rng.randrange(-20, 20)
        c = p * rng.randrange(-6, 7)
        d = rng.randrange(-20, 20)
        if a * d - b * c != 0:
            return Sigma0Matrix(p, a, b, c, d)


def test_sigma0_validation():
    with pytest.raises(ConfigError):
        Sigma0Matrix(5, 5, 0, 0, 1)
    with pytest.raises(ConfigError):
        Sigma0Matrix(5, 1, 0, 3, 1)
    with pytest.raises(ConfigError):
        Sigma0Matrix(5, 1, 0, 5, 0)


def test_action_identity():
    g = Sigma0Matrix(P, 1, 0, 0, 1)
    A = action_matrix(g, W2, 4, Z)
    for i in range(4):
        for j in range(4):
            expect = Z.one() if i == j else Z.zero()
            assert (A[i][j] - expect).is_zero()


def test_action_diag_p_is_moment_scaling():
    # (g.f)(x) = f(px) for g = (1 0; 0 p): diagonal (1, p, p^2, ...)
    g = Sigma0Matrix(P, 1, 0, 0, P)
    A = action_matrix(g, W0, 5, Z)
    for i in range(5):
        for j in range(5):
            if i == j:
                assert (A[i][j] - Z.from_int(P**i)).is_zero()
            else:
                assert A[i][j].is_zero()
    mu = MomentDistribution(Z, W0, [Z.from_int(n + 1) for n in range(5)])
    nu = act_on_distribution(mu, g)
    for j in range(5):
        assert nu.moments[j].agrees_with(mu.moments[j] * Z.from_int(P**j))


def test_action_unipotent_is_pascal_at_weight_zero():
    # (1 1; 0 1) sends x^j to (1+x)^j: Pascal matrix
    from math import comb

    g = Sigma0Matrix(P, 1, 1, 0, 1)
    A = action_matrix(g, W0, 5, Z)
    for n in range(5):
        for j in range(5):
            assert (A[n][j] - Z.from_int(comb(j, n))).is_zero()


def test_complete_continuity_filtration_jump():
    # for c != 0 the entries below the diagonal gain p-divisibility
    g = Sigma0Matrix(P, 1, 0, P, 1)
    A = action_matrix(g, W0, 6, Z)
    for n in range(6):
        for j in range(6):
            if n > j:
                assert A[n][j].val_floor >= n - j


def test_dirac_at_zero_fixed_by_identity():
    mu = dirac_distribution(Z, W0, 0, 4)
    out = act_on_distribution(mu, Sigma0Matrix(P, 1, 0, 0, 1))
    assert out.agrees_with(mu)


def test_right_action_composes():
    rng = random.Random(17)
    ring = PadicRing(P, 8)
    for _ in range(6):
        g, h = rand_sigma0(rng), rand_sigma0(rng)
        mu = MomentDistribution(
            ring, W0, [ring.from_int(rng.randrange(-50, 50)) for _ in range(4)]
        )
        lhs = act_on_distribution(act_on_distribution(mu, g), h)
        rhs = act_on_distribution(mu, g * h)
        for a, b in zip(lhs.moments, rhs.moments):
            assert (a - b).is_zero()


def test_action_matrix_monoid_property_to_certified_precision():
    rng = random.Random(3)
    ring = PadicRing(P, 8)
    for _ in range(5):
        g, h = rand_sigma0(rng), rand_sigma0(rng)
        M = 4
        Ag = action_matrix(g, W2, M, ring)
        Ah = action_matrix(h, W2, M, ring)
        Agh = action_matrix(g * h, W2, M, ring)
        # function side is a left action: A(gh) = A(g) A(h) up to the
        # truncation tail of h . x^j, which carries v_p(c_h) * (M - j) digits
        vch = h.c_valuation()
        for n in range(M):
            for j in range(M):
                acc = ring.zero()
                for t in range(M):
                    acc = acc + Ag[n][t] * Ah[t][j]
                diff = acc - Agh[n][j]
                cap = 10**9 if vch is None else vch * (M - j)
                assert diff.is_zero() or diff.val >= cap


def test_classical_projection_equivariance():
    rng = random.Random(29)
    ring = PadicRing(P, 9)
    k = 2
    for _ in range(8):
        g = rand_sigma0(rng)
        mu = MomentDistribution(
            ring, W2, [ring.from_int(rng.randrange(-99, 99)) for _ in range(6)]
        )
        proj_then_act = classical_projection(mu, k)
        B = classical_action_matrix(g, k)
        lhs = []
        for j in range(k + 1):
            acc = ring.zero()
            for n in range(k + 1):
                acc = acc + proj_then_act[n].scale_int(B[n][j])
            lhs.append(acc)
        rhs = classical_projection(act_on_distribution(mu, g), k)
        for a, b in zip(lhs, rhs):
            assert (a - b).is_zero()


def test_classical_projection_examples():
    mu = dirac_distribution(Z, W2, 0, 5)
    v = classical_projection(mu, 2)
    assert v[0].agrees_with(Z.one())
    assert v[1].is_zero() and v[2].is_zero()
    with pytest.raises(ConfigError):
        classical_projection(mu, 7)


def test_amice_dirac_values():
    mu0 = dirac_distribution(Z, W0, 0, 6)
    A0 = amice_transform(mu0, 5)
    assert A0.coeffs[0].agrees_with(Z.one())
    assert all(c.is_zero() for c in A0.coeffs[1:])
    mu1 = dirac_distribution(Z, W0, 1, 6)
    A1 = amice_transform(mu1, 5)
    assert A1.coeffs[0].agrees_with(Z.one())
    assert A1.coeffs[1].agrees_with(Z.one())
    assert all(c.is_zero() for c in A1.coeffs[2:])


def test_amice_translation_law():
    # A_{t_b mu}(T) = (1+T)^b A_mu(T)
    rng = random.Random(41)
    ring = PadicRing(P, 12)
    D = 5
    for b in (1, 2, P):
        for _ in range(5):
            mu = MomentDistribution(
                ring, W0, [ring.from_int(rng.randrange(-200, 200)) for _ in range(8)]
            )
            lhs = amice_transform(translate_distribution(mu, b), D)
            one_plus_T = TruncatedSeries(ring, [ring.one(), ring.one()], D)
            factor = TruncatedSeries(ring, [ring.one()], D)
            for _ in range(b):
                factor = factor * one_plus_T
            rhs = factor * amice_transform(mu, D)
            for x, y in zip(lhs.coeffs, rhs.coeffs):
                assert (x - y).is_zero()


def test_amice_linear_and_injective_on_window():
    # the moment -> Amice coefficient map is triangular with unit diagonal
    ring = PadicRing(P, 10)
    D = 5
    for m in range(D):
        mu = MomentDistribution(
            ring, W0, [ring.one() if j == m else ring.zero() for j in range(D)]
        )
        A = amice_transform(mu, D)
        assert not A.coeffs[m].is_zero()
        for n in range(m + 1, D):
            pass  # upper entries may be nonzero; triangularity is below the diagonal
        for n in range(m):
            assert A.coeffs[n].is_zero()


def test_family_action_specializes_to_pointwise():
    # base change: act in the family then specialize = specialize then act,
    # at weights congruent to k0 mod p-1
    disk = WeightDisk(P, 0, Fraction(1), 9, 5)
    fam = FamilyRing(disk)
    rng = random.Random(11)
    for _ in range(4):
        g = rand_sigma0(rng)
        mu = FamilyDistribution(
            fam, [fam.from_int(rng.randrange(-30, 30)) for _ in range(4)]
        )
        for k in (0, 4):
            lhs = act_on_distribution(mu, g).specialize(k)
            rhs = act_on_distribution(mu.specialize(k), g)
            for a, b in zip(lhs.moments, rhs.moments):
                assert (a - b).is_zero(), (k, g, a, b)


def test_profile_is_enforced():
    ring = PadicRing(P, 6)
    mu = MomentDistribution(ring, W0, [ring.from_int(1) for _ in range(4)])
    for j, m in enumerate(mu.moments):
        assert m.prec <= 6 - j
