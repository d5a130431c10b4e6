"""Local pieces of the eigencurve: spectral affinoids and eigenpackets.

A spectral piece over a weight disk is the quotient presentation
A(disk)[T]/(Q) of the slope-bounded factor Q, together with the restricted
Hecke matrices acting on the slope basis.  Only local pieces are built;
overlapping pieces are compared by specializing both at shared classical
weights and matching eigenpackets, which carries the same computational
content as gluing at desk scale.

Eigenpackets at a classical weight are extracted by factoring the
characteristic polynomial of a deterministic combination of the commuting
restricted operators into p-adic linear (or linear-power) pieces; factors
whose roots do not live in Q_p at working precision are flagged as
requires-extension rather than resolved in an extension field.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from . import linalg
from .errors import InvariantViolation, MathFailure, PrecisionExhausted
from .padics import PadicRing, PadicScalar
from .series import PadicPoly
from .slopes import SlopeDecomposition, make_slope_datum
from .symbols import SymbolSpacePresentation
from .weights import ArithmeticWeight, FamilyRing, WeightDisk, WeightFamilyElement


@dataclass
class SpectralPiece:
    disk: WeightDisk
    h: Fraction
    factor: PadicPoly  # slope factor over the family ring, constant term 1
    decomposition: SlopeDecomposition
    finite_flat: bool = True

    @property
    def rank(self) -> int:
        return self.factor.formal_degree

    def ring_mul(self, f: list, g: list) -> list:
        """Multiply two reduced representatives in A(disk)[T]/(Q)."""
        d = self.rank
        fam = FamilyRing(self.disk)
        prod = [fam.zero()] * (2 * d - 1 if d else 1)
        for i, a in enumerate(f):
            for j, b in enumerate(g):
                prod[i + j] = prod[i + j] + a * b
        # reduce modulo Q, dividing by the invertible leading coefficient
        q = self.factor.coeffs
        lead_inv = q[d].invert() if d else fam.one()
        for top in range(len(prod) - 1, d - 1, -1):
            c = prod[top]
            if fam.is_zero(c):
                continue
            scale = c * lead_inv
            for i in range(d + 1):
                prod[top - d + i] = prod[top - d + i] - scale * q[i]
            prod[top] = fam.zero()
        return prod[:d] if d else prod

    def json(self) -> dict:
        fam = FamilyRing(self.disk)
        out = {
            "omega": self.disk.json(),
            "h": str(self.h),
            "rank": self.rank,
            "finite_flat": self.finite_flat,
            "Q_coeffs": [fam.fmt(c) for c in self.factor.coeffs],
            "hecke": {},
        }
        out["hecke"]["U" + str(self.disk.p)] = [
            [fam.fmt(e) for e in row] for row in self.decomposition.u_restricted
        ]
        for label, mat in self.decomposition.hecke_restricted.items():
            out["hecke"][label] = [[fam.fmt(e) for e in row] for row in mat]
        return out


def spectral_piece(
    pres: SymbolSpacePresentation,
    disk: WeightDisk,
    h: Fraction,
    M: int,
    hecke_primes: tuple[int, ...] = (),
) -> SpectralPiece:
    """Wrap the family slope factor as the affinoid piece A(disk)[T]/(Q).

    Finite flatness is exactly the successful disconnection of the factor,
    i.e. the certified vertex found by the factorization; failures
    propagate as NoSlopeVertex / DiskTooLarge / PrecisionExhausted.
    """
    datum, dec, fd = make_slope_datum(pres, disk, h, M, hecke_primes=hecke_primes)
    piece = SpectralPiece(disk=disk, h=Fraction(h), factor=dec.factor, decomposition=dec)
    # constancy of the presentation rank across the disk: the leading
    # coefficient's center term dominates (checked by the family polygon),
    # so deg Q does not drop anywhere on the disk
    return piece


@dataclass
class LocalHeckeAlgebra:
    piece: SpectralPiece
    generators: dict
    commutator_floors: dict
    products: dict

    def json(self) -> dict:
        fam = FamilyRing(self.piece.disk)
        return {
            "generators": {
                k: [[fam.fmt(e) for e in row] for row in mat]
                for k, mat in self.generators.items()
            },
            "commutator_floors": {k: v for k, v in self.commutator_floors.items()},
        }


def local_hecke_algebra(piece: SpectralPiece, ells: tuple[int, ...]) -> LocalHeckeAlgebra:
    """Generator matrices and pairwise commutators on the slope basis.

    The A(Z)-module structure sends the affinoid coordinate to the inverse
    of the restricted controlling operator.  Commutators must vanish at
    stated precision; anything else is a bug, not data.
    """
    dec = piece.decomposition
    fam = FamilyRing(piece.disk)
    gens = {"U" + str(piece.disk.p): dec.u_restricted}
    for ell in ells:
        label = f"T{ell}"
        if label not in dec.hecke_restricted:
            raise MathFailure(f"{label} was not computed for this piece")
        gens[label] = dec.hecke_restricted[label]
    labels = sorted(gens)
    floors = {}
    products = {}
    for i, a in enumerate(labels):
        for b in labels[i + 1 :]:
            AB = linalg.mat_mul(fam, gens[a], gens[b])
            BA = linalg.mat_mul(fam, gens[b], gens[a])
            products[f"{a}*{b}"] = AB
            diff = linalg.mat_sub(AB, BA)
            worst = None
            ok = True
            for row in diff:
                for e in row:
                    for c in e.coeffs:
                        if not c.is_zero():
                            ok = False
                            worst = c.val if worst is None else min(worst, c.val)
            floors[f"[{a},{b}]"] = "0" if ok else f"p^{worst}"
            if not ok:
                raise InvariantViolation(
                    f"restricted operators {a}, {b} fail to commute at precision"
                )
    return LocalHeckeAlgebra(piece=piece, generators=gens, commutator_floors=floors, products=products)


@dataclass
class Eigenpacket:
    weight: int | None  # None marks the generic (family) packet
    values: dict
    multiplicity: int = 1
    flags: list = field(default_factory=list)

    def json(self, scalars: PadicRing | None = None) -> dict:
        vals = {}
        for k, v in self.values.items():
            if isinstance(v, PadicScalar):
                vals[k] = {"v": None if v.is_zero() else v.val, "u": v.unit, "N": v.prec}
            else:
                vals[k] = v
        return {
            "weight": self.weight,
            "multiplicity": self.multiplicity,
            "values": vals,
            "flags": list(self.flags),
        }


def _hensel_root(ring: PadicRing, poly: list[PadicScalar], x0: int) -> PadicScalar:
    """Newton lift of a simple root of a monic polynomial from mod p."""
    x = ring.from_int(x0)
    for _ in range(ring.prec.bit_length() + 4):
        fx = _poly_eval(ring, poly, x)
        dfx = _poly_eval(ring, _poly_deriv(ring, poly), x)
        if fx.is_zero():
            break
        x = x - fx / dfx
    return x


def _poly_eval(ring, poly, x):
    acc = ring.zero()
    for c in poly:
        acc = acc * x + c
    return acc


def _poly_deriv(ring, poly):
    d = len(poly) - 1
    return [c.scale_int(d - i) for i, c in enumerate(poly[:-1])]


def padic_linear_pieces(ring: PadicRing, monic: list[PadicScalar]):
    """Split a monic charpoly into (root, multiplicity) pieces over Q_p.

    Returns (pieces, leftovers): pieces are certified linear powers; any
    factor that cannot be certified to split over Q_p at this precision is
    reported in leftovers with its slope data.
    """
    from .series import TruncatedSeries, newton_polygon, slope_factorization

    d = len(monic) - 1
    if d == 0:
        return [], []
    # reversed series with constant term 1 requires nonvanishing constant;
    # factor out zero eigenvalues first (they are truncation padding)
    zeros = 0
    work = monic[:]
    while len(work) > 1 and work[-1].is_zero():
        zeros += 1
        work = work[:-1]
    dd = len(work) - 1
    pieces = []
    leftovers = []
    if zeros:
        leftovers.append({"kind": "zero-block", "multiplicity": zeros})
    if dd == 0:
        return pieces, leftovers
    # descending monic coefficients [1, c1, ...] double as the ascending
    # coefficients of T^d P(1/T), which has constant term 1
    F = TruncatedSeries(ring, list(work), dd + 1)
    polygon = newton_polygon(F)
    groups = polygon.slopes
    remaining = F
    for slope, mult in groups:
        split = slope_factorization(remaining, slope)
        if split is None:
            leftovers.append({"kind": "ambiguous", "slope": str(slope)})
            return pieces, leftovers
        Qf, R, _ = split
        remaining = R
        if slope.denominator != 1:
            leftovers.append({"kind": "fractional-slope", "slope": str(slope), "multiplicity": mult})
            continue
        s = int(slope)
        deg = Qf.formal_degree
        # Q(T) = prod (1 - lam T), so Q*(x) = x^deg Q(1/x) = prod (x - lam)
        # is monic with the eigenvalues as roots; in descending coefficient
        # order Q* is just the coefficient list of Q
        qstar = list(Qf.coeffs)
        # substitute x = p^s y and clear p-powers: unit-root monic in y
        ys = []
        for i, c in enumerate(qstar):
            ys.append(c * ring.from_fraction(Fraction(1, ring.p ** (s * i))) if s * i else c)
        found = _unit_roots(ring, ys)
        current = ys
        # lift and deflate the simple roots first, then attempt to certify
        # any remaining class as an exact linear power
        for root_mod_p, m in sorted(found["roots"], key=lambda rm: rm[1]):
            if m == 1:
                y = _hensel_root(ring, current, root_mod_p)
                pieces.append((y * ring.from_int(ring.p**s), 1))
                current = _deflate(ring, current, y)
            else:
                if m == len(current) - 1:
                    c1 = current[1] if len(current) > 1 else ring.zero()
                    cand = -(c1 * ring.from_fraction(Fraction(1, m)))
                    if _verify_power(ring, current, cand, m, found["total"]):
                        pieces.append((cand * ring.from_int(ring.p**s), m))
                        current = [ring.one()]
                        continue
                leftovers.append(
                    {"kind": "requires-extension", "slope": str(slope), "multiplicity": m}
                )
        if found["irreducible_mass"]:
            leftovers.append(
                {
                    "kind": "requires-extension",
                    "slope": str(slope),
                    "multiplicity": found["irreducible_mass"],
                }
            )
    return pieces, leftovers


def _deflate(ring, monic, root):
    """Divide a monic polynomial (descending) by (x - root); root is exact
    to its stated precision, so the remainder must vanish at precision."""
    out = [monic[0]]
    for c in monic[1:-1]:
        out.append(c + root * out[-1])
    rem = monic[-1] + root * out[-1] if len(monic) > 1 else ring.zero()
    if not rem.is_zero():
        raise PrecisionExhausted("deflation by a certified root left a nonzero remainder")
    return out


def _unit_roots(ring: PadicRing, monic: list[PadicScalar]):
    """Roots mod p of a monic polynomial with unit roots, with multiplicity."""
    p = ring.p
    deg = len(monic) - 1
    coeffs_mod = []
    for c in monic:
        coeffs_mod.append(c.residue(1) if c.val_floor >= 0 else None)
    if any(c is None for c in coeffs_mod):
        return {"roots": [], "irreducible_mass": deg, "total": deg}
    roots = []
    mass = 0
    for r in range(p):
        # multiplicity of r as root mod p via repeated synthetic division
        m = 0
        poly = coeffs_mod[:]
        while True:
            rem = 0
            for c in poly:
                rem = (rem * r + c) % p
            if rem != 0:
                break
            new = []
            acc = 0
            for c in poly[:-1]:
                acc = (acc * r + c) % p
                new.append(acc)
            poly = new
            m += 1
            if len(poly) == 1:
                break
        if m:
            roots.append((r, m))
            mass += m
    return {"roots": roots, "irreducible_mass": deg - mass, "total": deg}


def _verify_power(ring, monic, root, m, total):
    """Check monic == (x - root)^m when m exhausts the factor degree."""
    if m != len(monic) - 1:
        return False
    poly = [ring.one()]
    for _ in range(m):
        # descending coefficients: (x - root) * P = (P ++ [0]) - ([0] ++ root*P)
        nxt = []
        for i in range(len(poly) + 1):
            a = poly[i] if i < len(poly) else ring.zero()
            b = root * poly[i - 1] if i >= 1 else ring.zero()
            nxt.append(a - b)
        poly = nxt
    return all((a - b).is_zero() for a, b in zip(poly, monic))


def eigenpackets_at(
    piece: SpectralPiece, k: int | None, module_scalars: PadicRing | None = None
) -> list[Eigenpacket]:
    """Eigenpackets of the restricted Hecke family at a classical weight.

    With k None, returns the generic packet: each operator's image inside
    A(disk)[T]/(Q) when the slope module is cyclic over the piece (always
    at rank one), flagged as not-cyclic otherwise.
    """
    dec = piece.decomposition
    disk = piece.disk
    if k is None:
        return [_generic_packet(piece)]
    if not disk.contains_weight(k):
        raise MathFailure(f"weight {k} is not in the disk")
    ring = module_scalars or PadicRing(disk.p, disk.prec)
    ops = {"U" + str(disk.p): _specialize_matrix(dec.u_restricted, k)}
    for label, mat in dec.hecke_restricted.items():
        ops[label] = _specialize_matrix(mat, k)
    labels = sorted(ops)
    r = piece.rank
    if r == 0:
        return []
    # deterministic separating combination
    combo = linalg.zeros(ring, r, r)
    for idx, label in enumerate(labels):
        weight_c = 1 + 3 * idx
        mat = ops[label]
        for i in range(r):
            for j in range(r):
                combo[i][j] = combo[i][j] + mat[i][j].scale_int(weight_c)
    charpoly = linalg.charpoly_monic(ring, combo)
    pieces, leftovers = padic_linear_pieces(ring, charpoly)
    packets = []
    for lam, mult in pieces:
        Zshift = [
            [combo[i][j] - (lam if i == j else ring.zero()) for j in range(r)]
            for i in range(r)
        ]
        Zpow = Zshift
        for _ in range(mult - 1):
            Zpow = linalg.mat_mul(ring, Zpow, Zshift)
        kern = linalg.kernel_basis(ring, Zpow, r)
        if len(kern) != mult:
            raise PrecisionExhausted(
                f"generalized eigenspace rank {len(kern)} != multiplicity {mult}"
            )
        B = [list(col) for col in zip(*kern)]
        values = {}
        flags = []
        for label in labels:
            OB = linalg.mat_mul(ring, ops[label], B)
            coords = linalg.solve_columns(ring, B, OB)
            diag = coords[0][0]
            scalar = all(
                (coords[i][j] - (diag if i == j else ring.zero())).is_zero()
                for i in range(mult)
                for j in range(mult)
            )
            if not scalar:
                flags.append(f"{label}:non-scalar-on-generalized-eigenspace")
            values[label] = diag
            if not diag.is_zero() and diag.val < 0:
                flags.append(f"{label}:not-power-bounded")
        packets.append(Eigenpacket(weight=k, values=values, multiplicity=mult, flags=flags))
    for left in leftovers:
        packets.append(
            Eigenpacket(
                weight=k,
                values={},
                multiplicity=left.get("multiplicity", 0),
                flags=[left["kind"]] + [f"slope={left.get('slope')}" if left.get("slope") else ""],
            )
        )
    return packets


def _specialize_matrix(mat, k: int):
    return [[e.specialize(k) for e in row] for row in mat]


def _generic_packet(piece: SpectralPiece) -> Eigenpacket:
    """Images of the operators in A(disk)[T]/(Q) for a cyclic slope module."""
    dec = piece.decomposition
    fam = FamilyRing(piece.disk)
    r = piece.rank
    flags = []
    values = {}
    # powers of U^(-1): T acts as the inverse of the restricted operator
    u_inv = linalg.solve_columns(fam, dec.u_restricted, linalg.identity(fam, r))
    powers = [linalg.identity(fam, r)]
    for _ in range(1, r):
        powers.append(linalg.mat_mul(fam, powers[-1], u_inv))
    # solve sum_i c_i (U^-1)^i = T_label entrywise
    cols = []
    for P in powers:
        cols.append([P[i][j] for i in range(r) for j in range(r)])
    A = [[cols[c][rr] for c in range(r)] for rr in range(r * r)]
    all_ops = {"U" + str(piece.disk.p): dec.u_restricted, **dec.hecke_restricted}
    for label, mat in all_ops.items():
        rhs = [[mat[i][j]] for i in range(r) for j in range(r)]
        try:
            sol = linalg.solve_columns(fam, A, rhs)
            values[label] = [fam.fmt(sol[i][0]) for i in range(r)]
        except Exception:
            flags.append(f"{label}:not-cyclic")
    return Eigenpacket(weight=None, values=values, multiplicity=piece.rank, flags=flags)
