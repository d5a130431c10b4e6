from fractions import Fraction

from slopekit.classical import charpoly_rational, classical_space, heilbronn_merel


def poly_eval(poly, x):
    acc = Fraction(0)
    for c in poly:
        acc = acc * x + c
    return acc


def test_merel_matrix_determinants():
    for n in (2, 3, 5, 11):
        mats = list(heilbronn_merel(n))
        assert all(a * d - b * c == n for a, b, c, d in mats)


def test_level_11_weight_2():
    sp = classical_space(1, 11, 0)
    assert sp.dim == 3
    assert sp.cuspidal_rank() == 2
    t2 = charpoly_rational(sp.hecke_matrix(2))
    # (x - 3)(x + 2)^2: Eisenstein 1 + 2 and the cusp form with a_2 = -2
    assert poly_eval(t2, Fraction(3)) == 0
    assert poly_eval(t2, Fraction(-2)) == 0
    t3 = charpoly_rational(sp.hecke_matrix(3))
    assert poly_eval(t3, Fraction(4)) == 0
    assert poly_eval(t3, Fraction(-1)) == 0
    u11 = charpoly_rational(sp.hecke_matrix(11))
    # the Eisenstein line carries the unit root 1 of x^2 - 12x + 11
    assert poly_eval(u11, Fraction(1)) == 0


def test_cuspidal_charpoly_is_power_at_level_11():
    sp = classical_space(1, 11, 0)
    basis = sp.cuspidal_basis()
    assert len(basis) == 2
    T2 = sp.hecke_matrix(2)
    # T_2 restricted to the cuspidal plane is scalar -2
    for v in basis:
        image = [sum(T2[i][j] * v[j] for j in range(sp.dim)) for i in range(sp.dim)]
        for a, b in zip(image, v):
            assert a == -2 * b


def test_level_5_weight_2_is_eisenstein_only():
    sp = classical_space(1, 5, 0)
    assert sp.dim == 1
    assert sp.cuspidal_rank() == 0
    assert sp.hecke_matrix(2)[0][0] == 3
    assert sp.hecke_matrix(3)[0][0] == 4
    assert sp.hecke_matrix(5)[0][0] == 1


def test_eisenstein_eigenvalue_pattern_higher_weight():
    # weight 6 (k = 4) at level 5: the Eisenstein branch has T_l = 1 + l^5
    sp = classical_space(1, 5, 4)
    for ell, want in [(2, 1 + 2**5), (3, 1 + 3**5)]:
        poly = charpoly_rational(sp.hecke_matrix(ell))
        assert poly_eval(poly, Fraction(want)) == 0


def test_hecke_operators_commute():
    sp = classical_space(1, 11, 0)
    T2, T3 = sp.hecke_matrix(2), sp.hecke_matrix(3)
    n = sp.dim
    ab = [[sum(T2[i][t] * T3[t][j] for t in range(n)) for j in range(n)] for i in range(n)]
    ba = [[sum(T3[i][t] * T2[t][j] for t in range(n)) for j in range(n)] for i in range(n)]
    assert ab == ba


def test_weight_4_level_11_dimensions():
    sp = classical_space(1, 11, 2)
    assert sp.dim == 6
    assert sp.cuspidal_rank() == 4  # two Galois-stable cusp forms, doubled
