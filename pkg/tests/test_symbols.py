from fractions import Fraction

import pytest

from slopekit.classical import charpoly_rational, classical_space
from slopekit.errors import CriticalSlope, UnsupportedLevel
from slopekit.linalg import QQ, charpoly_monic
from slopekit.padics import PadicRing
from slopekit.symbols import (
    ClassicalSymbol,
    SymbolModule,
    build_presentation,
    classical_eigensymbol,
    diamond_spec,
    lift_to_distribution_symbol,
    path_terms,
    tl_spec,
    up_spec,
)
from slopekit.weights import ArithmeticWeight


def psi(m):
    out = m
    q = 2
    mm = m
    while q * q <= mm:
        if mm % q == 0:
            out = out // q * (q + 1)
            while mm % q == 0:
                mm //= q
        q += 1
    if mm > 1:
        out = out // mm * (mm + 1)
    return out


@pytest.mark.parametrize("N,p", [(1, 5), (1, 11), (2, 5), (1, 13)])
def test_generator_count_is_the_coset_index(N, p):
    pres = build_presentation(N, p)
    assert len(pres.generators) == psi(N * p)


def test_presentation_rejects_small_level():
    with pytest.raises(UnsupportedLevel):
        build_presentation(1, 3)


def test_presentation_is_deterministic():
    a = build_presentation(1, 11)
    b = build_presentation(1, 11)
    assert a.generators == b.generators
    assert a.solved_basis == b.solved_basis
    assert a.json() == b.json()


def test_solved_rank_level_11():
    pres = build_presentation(1, 11)
    assert pres.rank == 3


@pytest.mark.parametrize(
    "N,p,dim",
    [(1, 5, 1), (1, 7, 1), (1, 11, 3), (1, 13, 1), (2, 5, 3), (3, 5, 5), (1, 23, 5)],
)
def test_trivial_coefficient_dimension_matches_euler_count(N, p, dim):
    # independent count: 2*genus + #cusps - 1 from the standard formulas
    pres = build_presentation(N, p)
    mod = SymbolModule(pres, ("classical", 0))
    assert mod.dim == dim


def test_path_decomposition_determinants():
    for cusps in [((0, 1), (1, 0)), ((2, 7), (3, 5)), ((-3, 7), (11, 4))]:
        terms = path_terms(*cusps)
        for sign, mat in terms:
            assert sign in (1, -1)
            assert mat[0] * mat[3] - mat[1] * mat[2] == 1


def test_kernel_side_matches_oracle_charpolys_weight0():
    for (N, p) in [(1, 5), (1, 7), (1, 11)]:
        pres = build_presentation(N, p)
        mod = SymbolModule(pres, ("classical", 0))
        sp = classical_space(N, p, 0)
        for op, mat_oracle in [
            (up_spec(p), sp.hecke_matrix(p)),
            (tl_spec(2, p, N), sp.hecke_matrix(2)),
        ]:
            got = charpoly_monic(QQ, mod.hecke_matrix_on_symbols(op))
            want = charpoly_rational(mat_oracle)
            assert got == want


def test_kernel_side_matches_oracle_weight2():
    pres = build_presentation(1, 11)
    mod = SymbolModule(pres, ("classical", 2))
    sp = classical_space(1, 11, 2)
    got = charpoly_monic(QQ, mod.hecke_matrix_on_symbols(tl_spec(3, 11, 1)))
    want = charpoly_rational(sp.hecke_matrix(3))
    assert got == want


def test_diamond_operator_is_trivial_at_weight_zero():
    pres = build_presentation(1, 11)
    mod = SymbolModule(pres, ("classical", 0))
    S = mod.hecke_matrix_on_symbols(diamond_spec(2, 11))
    for i, row in enumerate(S):
        for j, e in enumerate(row):
            assert e == (1 if i == j else 0)


def test_classical_eigensymbol_satisfies_relations():
    pres = build_presentation(1, 11)
    phi, module = classical_eigensymbol(pres, 0, Fraction(1))
    assert phi.residuals_vanish()


def test_lift_round_trip_level_11():
    pres = build_presentation(1, 11)
    phi, _ = classical_eigensymbol(pres, 0, Fraction(1))
    M, prec = 6, 8
    lifted = lift_to_distribution_symbol(pres, phi, Fraction(1), M, prec)
    # relation residuals of the lift vanish at profile precision
    assert lifted.residuals_vanish()
    # the classical projection returns phi
    scalars = PadicRing(11, prec)
    for gen, dist in lifted.values.items():
        want = phi.values[gen]
        got = dist.moments[0]
        assert (got - scalars.from_fraction(want[0])).is_zero()


def test_lift_is_an_eigenvector_to_certified_precision():
    pres = build_presentation(1, 11)
    phi, _ = classical_eigensymbol(pres, 0, Fraction(1))
    M, prec = 5, 8
    lifted = lift_to_distribution_symbol(pres, phi, Fraction(1), M, prec)
    from slopekit.linalg import mat_vec
    from slopekit.slopes import controlling_matrix

    module = lifted.module
    U = controlling_matrix(module)
    vec = lifted.flatten()
    out = mat_vec(module.ring, U, vec)
    for a, b in zip(out, vec):
        assert (a - b).is_zero()  # a_p = 1


def test_lift_independent_of_starting_point():
    pres = build_presentation(1, 11)
    phi, _ = classical_eigensymbol(pres, 0, Fraction(1))
    M, prec = 4, 7
    scalars = PadicRing(11, prec)
    base = lift_to_distribution_symbol(pres, phi, Fraction(1), M, prec)
    # perturb the starting lift in the high moments only
    start = []
    for gen in pres.solved_basis:
        vals = phi.values[gen]
        for j in range(M):
            if j < len(vals):
                start.append(scalars.from_fraction(vals[j]))
            else:
                start.append(scalars.from_int(17 + j))
    other = lift_to_distribution_symbol(pres, phi, Fraction(1), M, prec, start=start)
    for gen in pres.solved_basis:
        for a, b in zip(base.values[gen].moments, other.values[gen].moments):
            assert (a - b).is_zero()


def test_lift_refuses_critical_slope():
    pres = build_presentation(1, 11)
    phi, _ = classical_eigensymbol(pres, 0, Fraction(1))
    with pytest.raises(CriticalSlope):
        lift_to_distribution_symbol(pres, phi, Fraction(11), 4, 8)
