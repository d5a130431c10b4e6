"""Slope data and slope-bounded decompositions of the controlling operator.

The Fredholm series is the reversed characteristic polynomial of U_p on the
working complex (solved basis x moments, torsion projected away).  Before
taking the characteristic polynomial, the matrix entries are capped at
precision M: every composite representative of U_p damps input moment i by
p^i, so the dropped moment tail (i >= M) only perturbs products of entries
beyond p^M.  Every certificate downstream of this cap is therefore honest
about the truncation, not only about scalar precision.

Restricted Hecke matrices on a slope basis are computed through a one-sided
sandwich with U_p: the tail fuzz of a non-controlling operator sits in high
moments, and one application of U_p pushes it beyond p^M, so
T_restricted = U_restricted^(-1) * restriction(U T).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from . import linalg
from .classical import charpoly_rational, classical_space
from .errors import (
    DiskTooLarge,
    InvariantViolation,
    MathFailure,
    PrecisionExhausted,
)
from .padics import PadicRing, PadicScalar
from .series import (
    NewtonPolygon,
    PadicPoly,
    TruncatedSeries,
    charpoly_rev,
    family_value_of,
    newton_polygon,
    slope_factorization,
)
from .symbols import (
    HeckeOpSpec,
    SymbolModule,
    SymbolSpacePresentation,
    tl_spec,
    up_spec,
)
from .weights import ArithmeticWeight, WeightDisk, WeightFamilyElement


@dataclass(frozen=True)
class SlopeDatum:
    operator: str
    weight: ArithmeticWeight | WeightDisk
    h: Fraction


@dataclass
class FredholmData:
    series: TruncatedSeries
    polygon: NewtonPolygon
    provenance: dict

    def coefficient_precision(self) -> list[int | None]:
        out = []
        for c in self.series.coeffs:
            if isinstance(c, PadicScalar):
                out.append(c.prec)
            else:
                out.append(min(cc.prec for cc in c.coeffs))
        return out


@dataclass
class SlopeDecomposition:
    datum: SlopeDatum
    factor: PadicPoly  # the slope-bounded factor Q, constant term 1
    complement: TruncatedSeries  # R of slopes > h
    basis: list  # columns spanning ker Q*(U), as a matrix (rows = coords)
    u_restricted: list
    hecke_restricted: dict = field(default_factory=dict)
    reports: dict = field(default_factory=dict)
    qu_matrix: list | None = None  # Q*(U), whose image is the complement

    @property
    def rank(self) -> int:
        return len(self.basis[0]) if self.basis and self.basis[0] is not None else 0


def _cap_matrix_columns(ring, mat, M: int, base: int):
    """Cap every entry's precision at ``base`` (p-adic kinds only).

    The compressed controlling operator agrees with the full one only up
    to products crossing the dropped moment tail; the tail columns are
    damped by at least p^M, so a flat cap of p^M per entry makes every
    polynomial certificate downstream honest about the truncation.  The
    raw integer entries stay exact; only the claimed precision shrinks.
    """
    out = []
    for row in mat:
        new_row = []
        for entry in row:
            bound = base
            if isinstance(entry, PadicScalar):
                new_row.append(entry.with_abs_prec(min(entry.prec, bound)))
            elif isinstance(entry, WeightFamilyElement):
                new_row.append(
                    WeightFamilyElement(
                        entry.ring,
                        [c.with_abs_prec(min(c.prec, bound)) for c in entry.coeffs],
                    )
                )
            else:
                new_row.append(entry)
        out.append(new_row)
    return out


def controlling_matrix(module: SymbolModule):
    """U_p on the working complex with honest truncation caps."""
    U = module.hecke_matrix(up_spec(module.pres.prime))
    return _cap_matrix_columns(module.ring, U, module.M, module.M)


def build_module(
    pres: SymbolSpacePresentation,
    weight: ArithmeticWeight | WeightDisk,
    M: int,
    prec: int | None = None,
) -> SymbolModule:
    if isinstance(weight, ArithmeticWeight):
        scalars = PadicRing(pres.prime, prec if prec is not None else M)
        return SymbolModule(pres, ("weight", weight.k, scalars, M))
    return SymbolModule(pres, ("family", weight, M))


def fredholm(
    pres: SymbolSpacePresentation,
    weight: ArithmeticWeight | WeightDisk,
    M: int,
    D: int | None = None,
    prec: int | None = None,
    module: SymbolModule | None = None,
) -> FredholmData:
    """Fredholm series of U_p on the working complex, with its polygon."""
    module = module or build_module(pres, weight, M, prec)
    U = controlling_matrix(module)
    F = charpoly_rev(module.ring, U, D)
    if isinstance(weight, WeightDisk):
        if weight.r is None:
            raise DiskTooLarge("family slope data needs a positive-radius disk")
        value_of = family_value_of(weight.r)
    else:
        value_of = None
    try:
        polygon = newton_polygon(F, value_of=value_of)
    except PrecisionExhausted as exc:
        if isinstance(weight, WeightDisk):
            raise DiskTooLarge(str(exc)) from exc
        raise
    if isinstance(weight, ArithmeticWeight):
        n_digits = module.scalars.prec
    else:
        n_digits = module.family.disk.prec
    return FredholmData(
        series=F,
        polygon=polygon,
        provenance={
            "level": pres.level,
            "prime": pres.prime,
            "weight": weight.json() if isinstance(weight, WeightDisk) else {"k": weight.k},
            "M": M,
            "N": n_digits,
        },
    )


def _min_entry_prec(coeffs) -> int:
    vals = []
    for c in coeffs:
        if isinstance(c, PadicScalar):
            vals.append(c.prec)
        else:
            vals.extend(cc.prec for cc in c.coeffs)
    return min(vals) if vals else 1


def _matrix_poly_reversed(ring, Q: PadicPoly, U):
    """Q*(U) = sum_i q_(d-i) U^i for the reversed factor Q* of Q."""
    d = Q.formal_degree
    n = len(U)
    acc = None
    power = linalg.identity(ring, n)
    for i in range(d + 1):
        coeff = Q.coeffs[d - i]
        scaled = [[coeff * power[r][c] for c in range(n)] for r in range(n)]
        acc = scaled if acc is None else linalg.mat_add(acc, scaled)
        if i < d:
            power = linalg.mat_mul(ring, power, U)
    return acc


def make_slope_datum(
    pres: SymbolSpacePresentation,
    weight: ArithmeticWeight | WeightDisk,
    h: Fraction,
    M: int,
    prec: int | None = None,
    hecke_primes: tuple[int, ...] = (),
) -> tuple[SlopeDatum, SlopeDecomposition, FredholmData]:
    """Slope datum and decomposition at the given bound and truncation.

    Explicit failures: NoSlopeVertex / PrecisionExhausted propagate from
    the factorization, DiskTooLarge from a family polygon that moves
    across the disk.  An empty slope part (deg Q = 0) is a legitimate
    outcome, not an error.
    """
    h = Fraction(h)
    if h < 0:
        raise MathFailure("slope bounds are nonnegative")
    module = build_module(pres, weight, M, prec)
    fd = fredholm(pres, weight, M, module=module)
    ring = module.ring
    value_of = family_value_of(weight.r) if isinstance(weight, WeightDisk) else None
    split = slope_factorization(fd.series, h, value_of=value_of)
    if split is None:
        from .errors import NoSlopeVertex

        raise NoSlopeVertex(
            f"no certifiable Newton-polygon vertex at slope {h};"
            " adjust h or raise precision"
        )
    Q, R, polygon = split
    datum = SlopeDatum(operator=f"U{pres.prime}", weight=weight, h=h)
    if Q.formal_degree == 0:
        dec = SlopeDecomposition(
            datum=datum,
            factor=Q,
            complement=R,
            basis=[[] for _ in range(module.free_dim)],
            u_restricted=[],
        )
        return datum, dec, fd
    U = controlling_matrix(module)
    QU = _matrix_poly_reversed(ring, Q, U)
    kern = linalg.kernel_basis(ring, QU, module.free_dim)
    kernel_precision = None
    if len(kern) != Q.formal_degree:
        # The kernel is precision graded: the decomposition may only be
        # certified at fewer digits than the entries claim (the factor's
        # own certificate enters through Q*(U)).  Lower the claim until
        # the theoretical rank appears, and record that certificate.
        top = min(_min_entry_prec(Q.coeffs), M)
        for tau in range(top, 0, -1):
            capped = _cap_matrix_columns(ring, QU, M, tau)
            kern = linalg.kernel_basis(ring, capped, module.free_dim)
            if len(kern) == Q.formal_degree:
                kernel_precision = tau
                break
        else:
            raise PrecisionExhausted(
                f"kernel of the slope factor never reaches rank {Q.formal_degree};"
                " raise the working precision or moment depth"
            )
    B = [list(col) for col in zip(*kern)]
    UB = linalg.mat_mul(ring, U, B)
    u_res = linalg.solve_columns(ring, B, UB)
    det_u = linalg.determinant(ring, u_res)
    if ring.is_zero(det_u):
        raise PrecisionExhausted("restricted controlling operator is not certifiably invertible")
    dec = SlopeDecomposition(
        datum=datum, factor=Q, complement=R, basis=B, u_restricted=u_res, qu_matrix=QU
    )
    dec.reports["det_u_restricted"] = det_u
    dec.reports["complement_det"] = _complement_determinant(ring, B, QU)
    if kernel_precision is not None:
        dec.reports["kernel_precision"] = kernel_precision
    for ell in hecke_primes:
        dec.hecke_restricted[f"T{ell}"] = restricted_hecke(module, dec, ell)
    return datum, dec, fd


def _complement_determinant(ring, B, QU):
    """det of Q*(U) on the quotient by the slope basis (must be invertible)."""
    n = len(QU)
    r = len(B[0]) if B and B[0] is not None else 0
    if r == n:
        return ring.one()
    # choose complement coordinates greedily from rows where B has no pivot
    pivot_rows = set()
    for c in range(r):
        best, key = None, None
        for i in range(n):
            if i in pivot_rows:
                continue
            k = ring.pivot_key(B[i][c])
            if k is not None and (key is None or k < key):
                best, key = i, k
        if best is not None:
            pivot_rows.add(best)
    compl = [i for i in range(n) if i not in pivot_rows][: n - r]
    # solve [B | e_J] x = QU e_j and read the e_J part
    full = [[B[i][c] for c in range(r)] + [ring.one() if i == j else ring.zero() for j in compl] for i in range(n)]
    rhs = [[QU[i][j] for j in compl] for i in range(n)]
    sol = linalg.solve_columns(ring, full, rhs)
    quot = [row[:] for row in sol[r:]]
    return linalg.determinant(ring, quot)


def restricted_hecke(module: SymbolModule, dec: SlopeDecomposition, ell: int):
    """T_ell on the slope basis via the U-sandwich for truncation honesty.

    Two lifts of the same Hecke operator differ by a homotopy defect whose
    eigenvalues lie above the slope bound, so the image of the slope basis
    under U T is resolved against [basis | complement] and projected onto
    the basis block; the complement is spanned by columns of Q*(U), which
    is exactly the slope-> h summand.
    """
    ring = module.ring
    pres = module.pres
    T = module.hecke_matrix(tl_spec(ell, pres.prime, pres.level))
    U = controlling_matrix(module)
    UT = linalg.mat_mul(ring, U, T)
    UT = _cap_matrix_columns(ring, UT, module.M, module.M)
    B = dec.basis
    n = len(B)
    r = dec.rank
    C = _column_space_basis(ring, dec.qu_matrix, n - r)
    full = [B[i] + C[i] for i in range(n)]
    Y = linalg.solve_columns(ring, full, linalg.mat_mul(ring, UT, B))
    X = [Y[i][:] for i in range(r)]
    u_inv = linalg.solve_columns(ring, dec.u_restricted, linalg.identity(ring, r))
    return linalg.mat_mul(ring, u_inv, X)


def _column_space_basis(ring, A, expected_rank: int):
    """Independent columns of A spanning its image (as row-major columns)."""
    n = len(A)
    ncols = len(A[0]) if A else 0
    reduced: list[tuple[int, list, object]] = []  # (pivot coord, reduced col, 1/pivot)
    chosen: list[int] = []
    for j in range(ncols):
        if len(chosen) == expected_rank:
            break
        v = [A[i][j] for i in range(n)]
        for pc, w, inv_p in reduced:
            lead = v[pc]
            if not ring.is_zero(lead):
                f = lead * inv_p
                v = [a - f * b for a, b in zip(v, w)]
                v[pc] = ring.zero()
        best, key = None, None
        for i in range(n):
            k = ring.pivot_key(v[i])
            if k is not None and (key is None or k < key):
                best, key = i, k
        if best is not None:
            reduced.append((best, v, ring.inv(v[best])))
            chosen.append(j)
    if len(chosen) != expected_rank:
        raise PrecisionExhausted("complement basis rank deficient at stated precision")
    return [[A[i][c] for c in chosen] for i in range(n)]


def moment_independence_check(
    pres: SymbolSpacePresentation,
    weight: ArithmeticWeight,
    depths: tuple[int, int],
    prec: int | None = None,
) -> dict:
    """Fredholm coefficients at two moment depths agree within certificates.

    Disagreement beyond the shared certified precision is a bug by the
    independence theorem for the underlying operator, so it raises.
    """
    m1, m2 = depths
    runs = [fredholm(pres, weight, m, prec=prec) for m in (m1, m2)]
    margins = compare_fredholm_series(runs[0].series, runs[1].series)
    return {
        "depths": [m1, m2],
        "margins": margins,
        "coefficient_precisions": [runs[0].coefficient_precision(), runs[1].coefficient_precision()],
    }


def compare_fredholm_series(f1: TruncatedSeries, f2: TruncatedSeries) -> list[dict]:
    """Per-degree agreement margins of two series; raises on a violation.

    Also serves as the detector for the negative control: feeding it
    series of a synthetic operator that breaks the moment filtration
    produces the InvariantViolation by design.
    """
    margins = []
    upto = min(len(f1.coeffs), len(f2.coeffs))
    for n in range(upto):
        a, b = f1.coeffs[n], f2.coeffs[n]
        diff = a - b
        shared = min(a.prec, b.prec)
        ok = diff.is_zero()
        margins.append(
            {
                "degree": n,
                "shared_precision": shared,
                "agrees": ok,
                "agreement_valuation": None if ok else diff.val,
            }
        )
        if not ok:
            raise InvariantViolation(
                f"Fredholm coefficient {n} differs at valuation {diff.val} "
                f"below shared certificate {shared}: truncation independence violated"
            )
    return margins


def small_slope_bound(k: int) -> Fraction:
    """Classicality threshold at weight k: slopes strictly below k + 1.

    For the controlling element diag(1, p) at weight (k, 0) the nontrivial
    Weyl reflection shifts the pairing by k + 1 while the identity gives 0,
    so the gap is k + 1.
    """
    return Fraction(k + 1)


def classicality_check(
    pres: SymbolSpacePresentation,
    k: int,
    h: Fraction,
    hecke_primes: tuple[int, ...],
    M: int,
    prec: int | None = None,
) -> dict:
    """Compare slope-bounded overconvergent Hecke data to the classical oracle.

    Requires h strictly below the small-slope bound for k.  The classical
    side is computed from the exact-rational oracle, sliced to its
    slope-bounded part p-adically at high precision.
    """
    h = Fraction(h)
    if h >= small_slope_bound(k):
        raise MathFailure(
            f"classicality needs h < {small_slope_bound(k)} at weight {k}; got {h}"
        )
    datum, dec, fd = make_slope_datum(
        pres, ArithmeticWeight(k), h, M, prec=prec, hecke_primes=hecke_primes
    )
    ring = PadicRing(pres.prime, prec if prec is not None else M)
    # classical side, sliced at the same slope bound
    sp = classical_space(pres.level, pres.prime, k)
    work_prec = 2 * (prec if prec is not None else M) + 8
    cl_ring = PadicRing(pres.prime, work_prec)
    Ucl = [[cl_ring.from_fraction(x) for x in row] for row in sp.hecke_matrix(pres.prime)]
    Fcl = charpoly_rev(cl_ring, Ucl)
    cl_split = slope_factorization(Fcl, h)
    if cl_split is None:
        raise MathFailure(f"classical polygon is ambiguous at slope {h}")
    Qcl, _, _ = cl_split
    if Qcl.formal_degree:
        QUcl = _matrix_poly_reversed(cl_ring, Qcl, Ucl)
        kern = linalg.kernel_basis(cl_ring, QUcl, sp.dim)
        Bcl = [list(col) for col in zip(*kern)]
    else:
        Bcl = [[] for _ in range(sp.dim)]
    rank_cl = len(kern) if Qcl.formal_degree else 0
    report = {
        "weight": k,
        "h": str(h),
        "overconvergent_rank": dec.rank,
        "classical_rank": rank_cl,
        "ranks_equal": dec.rank == rank_cl,
        "operators": {},
    }
    ops = {f"U{pres.prime}": (dec.u_restricted, sp.hecke_matrix(pres.prime))}
    for ell in hecke_primes:
        ops[f"T{ell}"] = (dec.hecke_restricted[f"T{ell}"], sp.hecke_matrix(ell))
    for label, (oc_mat, cl_mat_q) in ops.items():
        oc_poly = linalg.charpoly_monic(ring, oc_mat) if oc_mat else [ring.one()]
        cl_full = [[cl_ring.from_fraction(x) for x in row] for row in cl_mat_q]
        if rank_cl:
            ClB = linalg.mat_mul(cl_ring, cl_full, Bcl)
            cl_res = linalg.solve_columns(cl_ring, Bcl, ClB)
            cl_poly = linalg.charpoly_monic(cl_ring, cl_res)
        else:
            cl_poly = [cl_ring.one()]
        entries = []
        all_ok = len(oc_poly) == len(cl_poly)
        if all_ok:
            for n, (a, b) in enumerate(zip(oc_poly, cl_poly)):
                diff = a - b.with_abs_prec(min(b.prec, a.prec))
                ok = diff.is_zero()
                entries.append(
                    {
                        "degree": n,
                        "certified_digits": min(a.prec, b.prec),
                        "agrees": ok,
                    }
                )
                all_ok = all_ok and ok
        report["operators"][label] = {"agrees": all_ok, "coefficients": entries}
    report["ok"] = report["ranks_equal"] and all(
        op["agrees"] for op in report["operators"].values()
    )
    return report
