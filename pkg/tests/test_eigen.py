from fractions import Fraction

import pytest

from slopekit.eigen import (
    SpectralPiece,
    eigenpackets_at,
    local_hecke_algebra,
    padic_linear_pieces,
    spectral_piece,
)
from slopekit.errors import MathFailure
from slopekit.padics import PadicRing
from slopekit.series import PadicPoly
from slopekit.symbols import build_presentation
from slopekit.weights import FamilyRing, WeightDisk

PRES5 = build_presentation(1, 5)
PRES11 = build_presentation(1, 11)
DISK5 = WeightDisk(5, 0, Fraction(1), 8, 5)
DISK11 = WeightDisk(11, 0, Fraction(1), 8, 4)


@pytest.fixture(scope="module")
def piece5():
    return spectral_piece(PRES5, DISK5, Fraction(0), 6, hecke_primes=(2, 3))


@pytest.fixture(scope="module")
def piece11():
    return spectral_piece(PRES11, DISK11, Fraction(0), 4, hecke_primes=(2, 3))


def test_ordinary_piece_is_rank_one_at_level_5(piece5):
    assert piece5.rank == 1
    assert piece5.finite_flat


def test_empty_piece_ring():
    fam = FamilyRing(DISK5)
    piece = SpectralPiece(
        disk=DISK5, h=Fraction(0), factor=PadicPoly(fam, [fam.one()]), decomposition=None
    )
    assert piece.rank == 0


def test_piece_ring_multiplication(piece11):
    fam = FamilyRing(DISK11)
    # (T + 1)^2 reduced mod Q stays inside degree < 3 representatives
    f = [fam.one(), fam.one(), fam.zero()]
    out = piece11.ring_mul(f, f)
    assert len(out) == piece11.rank == 3


def test_local_hecke_algebra_commutes(piece5):
    algebra = local_hecke_algebra(piece5, (2, 3))
    assert all(v == "0" for v in algebra.commutator_floors.values())


def test_eisenstein_packet_values(piece5):
    for k, want2, want3 in [(0, 3, 4), (4, 33, 244)]:
        packets = eigenpackets_at(piece5, k)
        assert len(packets) == 1
        pk = packets[0]
        ring = PadicRing(5, 8)
        assert (pk.values["T2"] - ring.from_int(want2)).is_zero()
        assert (pk.values["T3"] - ring.from_int(want3)).is_zero()
        assert (pk.values["U5"] - ring.one()).is_zero()
        assert pk.flags == []


def test_level_11_packets_include_cusp_form(piece11):
    packets = eigenpackets_at(piece11, 0)
    ring = PadicRing(11, 8)
    by_mult = {pk.multiplicity: pk for pk in packets}
    eis = by_mult[1]
    cusp = by_mult[2]
    assert (eis.values["T2"] - ring.from_int(3)).is_zero()
    assert (cusp.values["T2"] - ring.from_int(-2)).is_zero()
    assert (cusp.values["T3"] - ring.from_int(-1)).is_zero()
    assert (cusp.values["U11"] - ring.one()).is_zero()


def test_packets_are_power_bounded(piece11):
    for pk in eigenpackets_at(piece11, 0):
        assert not any("not-power-bounded" in f for f in pk.flags)


def test_generic_packet_rank_one(piece5):
    pk = eigenpackets_at(piece5, None)[0]
    assert pk.weight is None
    assert "U5" in pk.values and "T2" in pk.values
    assert not any("not-cyclic" in f for f in pk.flags)


def test_eigenpacket_requires_weight_in_disk():
    # a radius-exponent-2 disk only contains weights congruent to the
    # center mod p, so k = 3 must be refused
    narrow = WeightDisk(5, 0, Fraction(2), 8, 4)
    fam = FamilyRing(narrow)
    piece = SpectralPiece(
        disk=narrow, h=Fraction(0), factor=PadicPoly(fam, [fam.one()]), decomposition=None
    )
    with pytest.raises(MathFailure):
        eigenpackets_at(piece, 3)


def test_eigenvalue_extraction_handles_powers():
    ring = PadicRing(7, 10)
    # (x - 3)^2 (x - 7): descending monic coefficients
    poly = [
        ring.one(),
        ring.from_int(-13),
        ring.from_int(51),
        ring.from_int(-63),
    ]
    pieces, leftovers = padic_linear_pieces(ring, poly)
    assert not leftovers
    got = sorted((str(lam.residue(1)), m) for lam, m in pieces)
    mults = sorted(m for _, m in pieces)
    assert mults == [1, 2]


def test_eigenvalue_extraction_flags_extensions():
    ring = PadicRing(7, 10)
    # x^2 - 7 is irreducible over Q_7 (fractional slope)
    poly = [ring.one(), ring.zero(), ring.from_int(-7)]
    pieces, leftovers = padic_linear_pieces(ring, poly)
    assert not pieces
    assert any(left["kind"] == "fractional-slope" for left in leftovers)


def test_piece_specialization_consistency(piece5):
    # a_l(w) specialized at two different weights stays consistent with the
    # direct packet extraction there
    a2 = piece5.decomposition.hecke_restricted["T2"][0][0]
    for k in (0, 4):
        pk = eigenpackets_at(piece5, k)[0]
        assert (a2.specialize(k) - pk.values["T2"]).is_zero()


def test_piece_json_round_trip(piece5):
    import json

    doc = piece5.json()
    text = json.dumps(doc, sort_keys=True)
    assert json.loads(text) == json.loads(text)
    assert doc["rank"] == 1
    assert "U5" in doc["hecke"]
