"""Acceptance-style verification suites.

Each suite is pinned to the configurations it certifies; the CLI and the
test suite both run these.  A suite returns a list of result dicts with
name / ok / detail, and never hides a failure inside a tolerance: every
comparison is exact within tracked certificates.
"""

from __future__ import annotations

import json
import random
from fractions import Fraction

from . import linalg
from .classical import charpoly_rational, classical_space
from .distributions import MomentDistribution, amice_transform, translate_distribution
from .errors import InvariantViolation
from .homology import (
    FiniteComplex,
    FiniteModulePresentation,
    QwRing,
    TruncWRing,
    kernel_columns,
    projdim_grade,
    smith_normal_form,
    support_equivalences,
    universal_coefficients_check,
)
from .padics import PadicRing
from .series import TruncatedSeries, charpoly_rev, newton_polygon, slope_factorization
from .slopes import (
    classicality_check,
    controlling_matrix,
    fredholm,
    make_slope_datum,
    moment_independence_check,
)
from .symbols import SymbolModule, build_presentation, up_spec
from .weights import ArithmeticWeight, FamilyRing, WeightDisk, WeightFamilyElement

PRESENTATIONS: dict = {}


def _pres(N: int, p: int):
    key = (N, p)
    if key not in PRESENTATIONS:
        PRESENTATIONS[key] = build_presentation(N, p)
    return PRESENTATIONS[key]


def suite_independence(cfg=None) -> list[dict]:
    out = []
    for p in (5, 11):
        pres = _pres(1, p)
        for pair in ((4, 6), (4, 8), (6, 8)):
            try:
                rep = moment_independence_check(pres, ArithmeticWeight(0), pair, prec=8)
                ok = all(m["agrees"] for m in rep["margins"])
                detail = f"p={p} M={pair}: {len(rep['margins'])} coefficients within certificates"
            except InvariantViolation as exc:
                ok, detail = False, f"p={p} M={pair}: {exc}"
            out.append({"name": f"independence p={p} M={pair}", "ok": ok, "detail": detail})
    return out


def suite_classicality(cfg=None) -> list[dict]:
    out = []
    rep = classicality_check(_pres(1, 11), 0, Fraction(0), (2, 3), M=12, prec=12)
    digits = [
        e["certified_digits"]
        for op in rep["operators"].values()
        for e in op["coefficients"]
    ]
    ok = rep["ok"] and digits and min(digits) >= 10
    out.append(
        {
            "name": "classicality level 11 k=0 h=0",
            "ok": ok,
            "detail": (
                f"ranks {rep['overconvergent_rank']}={rep['classical_rank']}, "
                f"min certified digits {min(digits) if digits else 0}"
            ),
        }
    )
    # level 5: slope-0 rank agrees with the classical computation
    datum, dec, _ = make_slope_datum(_pres(1, 5), ArithmeticWeight(0), Fraction(0), 8, prec=8)
    sp = classical_space(1, 5, 0)
    ok5 = dec.rank == sp.dim and sp.cuspidal_rank() == 0
    out.append(
        {
            "name": "classicality level 5 rank",
            "ok": ok5,
            "detail": f"slope-0 rank {dec.rank} vs classical {sp.dim} (cuspidal {sp.cuspidal_rank()})",
        }
    )
    return out


def _planted_scalar_cases(rng: random.Random, count: int):
    ring = PadicRing(7, 20)
    for _ in range(count):
        n_lin = rng.randint(2, 4)
        use_quad = rng.random() < 0.3
        vals = sorted(rng.sample(range(0, 7), n_lin))
        factors = []
        for v in vals:
            unit = rng.choice([1, 2, 3, 4, 5, 6])
            factors.append(TruncatedSeries(ring, [ring.one(), ring.from_int(-(7**v) * unit)], 12))
        if use_quad:
            # an irreducible slope-1/2 pair: 1 + u p T + u' p T^2
            factors.append(
                TruncatedSeries(
                    ring,
                    [ring.one(), ring.from_int(7 * rng.choice([1, 2, 3])), ring.from_int(7 * rng.choice([1, 2, 3, 4]))],
                    12,
                )
            )
        F = factors[0]
        for f in factors[1:]:
            F = F * f
        slopes = sorted(
            ([Fraction(v) for v in vals] + ([Fraction(1, 2), Fraction(1, 2)] if use_quad else []))
        )
        yield ring, F, slopes


def _companion(ring, F: TruncatedSeries):
    """Companion matrix of the monic reversal of F (its rev-charpoly is F)."""
    coeffs = list(F.coeffs)
    while len(coeffs) > 1 and ring.is_zero(coeffs[-1]):
        coeffs.pop()
    n = len(coeffs) - 1
    C = [[ring.zero() for _ in range(n)] for _ in range(n)]
    for i in range(1, n):
        C[i][i - 1] = ring.one()
    # monic poly x^n + c1 x^(n-1) + ... + cn with ci = coeffs[i]
    for i in range(n):
        C[i][n - 1] = -coeffs[n - i]
    return C


def suite_factorization(cfg=None) -> list[dict]:
    rng = random.Random(20260810)
    total, kernel_checked = 0, 0
    failures = []
    for ring, F, slopes in _planted_scalar_cases(rng, 70):
        total += 1
        distinct = sorted(set(slopes))
        if len(distinct) < 2:
            h = distinct[0]
        else:
            idx = rng.randrange(len(distinct) - 1)
            h = distinct[idx]
        split = slope_factorization(F, h)
        if split is None:
            failures.append(f"case {total}: unexpected ambiguity at h={h}")
            continue
        Q, R, _ = split
        want_deg = sum(1 for s in slopes if s <= h)
        if Q.formal_degree != want_deg:
            failures.append(f"case {total}: deg Q {Q.formal_degree} != {want_deg}")
            continue
        QR = R.mul_poly(Q)
        for a, b in zip(QR.coeffs, F.coeffs):
            if not (a - b).is_zero():
                failures.append(f"case {total}: reconstruction off")
                break
        qslopes = newton_polygon(Q).slope_multiset() if Q.formal_degree else []
        if any(s > h for s in qslopes):
            failures.append(f"case {total}: slope bound violated in Q")
        if Q.formal_degree and total % 3 == 0:
            U = _companion(ring, F)
            from .slopes import _matrix_poly_reversed

            QU = _matrix_poly_reversed(ring, Q, U)
            kern = linalg.kernel_basis(ring, QU, len(U))
            if len(kern) != Q.formal_degree:
                failures.append(f"case {total}: kernel rank {len(kern)} != {Q.formal_degree}")
            else:
                kernel_checked += 1
    # family ring cases
    disk = WeightDisk(5, 0, Fraction(1), 14, 4)
    fam = FamilyRing(disk)
    from .series import family_value_of

    vof = family_value_of(disk.r)
    for case in range(30):
        total += 1
        n_lin = rng.randint(2, 3)
        vals = sorted(rng.sample(range(0, 5), n_lin))
        factors = []
        for v in vals:
            unit = fam.from_int(rng.choice([1, 2, 3, 4]))
            tail = fam.var().scale(disk.scalars.from_int(rng.randint(-3, 3)))
            root = (unit + tail).scale(disk.scalars.from_int(-(5**v)))
            factors.append(TruncatedSeries(fam, [fam.one(), root], 8))
        F = factors[0]
        for f in factors[1:]:
            F = F * f
        distinct = sorted(set(vals))
        h = Fraction(distinct[rng.randrange(len(distinct) - 1)] if len(distinct) > 1 else distinct[0])
        split = slope_factorization(F, h, value_of=vof)
        if split is None:
            failures.append(f"family case {case}: unexpected ambiguity")
            continue
        Q, R, _ = split
        want_deg = sum(1 for s in vals if s <= h)
        if Q.formal_degree != want_deg:
            failures.append(f"family case {case}: deg {Q.formal_degree} != {want_deg}")
            continue
        QR = R.mul_poly(Q)
        for a, b in zip(QR.coeffs, F.coeffs):
            if not fam.is_zero(a - b):
                failures.append(f"family case {case}: reconstruction off")
                break
    ok = not failures
    return [
        {
            "name": "slope factorization synthetic",
            "ok": ok,
            "detail": f"{total} planted cases, {kernel_checked} kernel-rank checks"
            + ("" if ok else f"; failures: {failures[:3]}"),
        }
    ]


def suite_family(cfg=None) -> list[dict]:
    out = []
    pres = _pres(1, 5)
    disk = WeightDisk(5, 0, Fraction(1), 8, 5)
    fd_fam = fredholm(pres, disk, 6)
    datum, dec_fam, _ = make_slope_datum(pres, disk, Fraction(0), 6)
    for k in (0, 4, 8):
        fd_k = fredholm(pres, ArithmeticWeight(k), 6, prec=8)
        ok = True
        for n, cf in enumerate(fd_fam.series.coeffs):
            spec = cf.specialize(k)
            other = fd_k.series.coeffs[n]
            if not (spec - other.with_abs_prec(min(other.prec, spec.prec))).is_zero():
                ok = False
        _, dec_k, _ = make_slope_datum(pres, ArithmeticWeight(k), Fraction(0), 6, prec=8)
        for n, c in enumerate(dec_fam.factor.coeffs):
            spec = c.specialize(k)
            other = dec_k.factor.coeffs[n]
            if not (spec - other.with_abs_prec(min(other.prec, spec.prec))).is_zero():
                ok = False
        out.append(
            {
                "name": f"family/point compatibility k={k}",
                "ok": ok,
                "detail": "Fredholm series and slope factor specialize to the pointwise run",
            }
        )
    return out


def _random_chain_complex(ring: QwRing, rng: random.Random):
    r0 = rng.randint(1, 4)
    r1 = rng.randint(1, 4)
    d1 = [
        [ring.poly(*[rng.randint(-2, 2) for _ in range(rng.randint(0, 2))]) for _ in range(r1)]
        for _ in range(r0)
    ]
    K = kernel_columns(ring, d1)
    kdim = len(K[0]) if K and K[0] is not None else 0
    if kdim == 0:
        return FiniteComplex(ring, [r0, r1], [d1])
    r2 = rng.randint(1, 3)
    mix = [[ring.poly(rng.randint(-2, 2)) for _ in range(r2)] for _ in range(kdim)]
    d2 = [
        [
            _dot(ring, [K[i][t] for t in range(kdim)], [mix[t][j] for t in range(kdim)])
            for j in range(r2)
        ]
        for i in range(r1)
    ]
    return FiniteComplex(ring, [r0, r1, r2], [d1, d2])


def _dot(ring, xs, ys):
    acc = ring.zero()
    for x, y in zip(xs, ys):
        acc = ring.add(acc, ring.mul(x, y))
    return acc


def suite_uct(cfg=None) -> list[dict]:
    out = []
    R = QwRing()
    rng = random.Random(424242)
    bad = 0
    for i in range(50):
        C = _random_chain_complex(R, rng)
        for sigma in (("point", 0), ("point", 1), "R"):
            rep = universal_coefficients_check(C, sigma)
            if not rep.ok:
                bad += 1
    out.append(
        {
            "name": "universal coefficients random complexes",
            "ok": bad == 0,
            "detail": f"50 random complexes x 3 specializations, {bad} residual failures",
        }
    )
    # fixtures with hand-computed outer terms
    w = R.var()
    zeroC = FiniteComplex(R, [2, 2], [[[R.zero(), R.zero()], [R.zero(), R.zero()]]])
    repz = universal_coefficients_check(zeroC, ("point", 0))
    timesw = FiniteComplex(R, [1, 1], [[[w]]])
    rep1 = universal_coefficients_check(timesw, ("point", 0))
    hand_ok = (
        repz.ok
        and rep1.ok
        and rep1.entries[1]["tor1_lower"] == 1
        and rep1.entries[1]["h_tensor_k"] == 0
        and rep1.entries[0]["h_tensor_k"] == 1
    )
    repw_ext = universal_coefficients_check(timesw, "R")
    hand_ok = hand_ok and repw_ext.ok and repw_ext.entries[1]["ext1_of_lower"][
        "invariant_factors"
    ] == ["1*w^1"]
    out.append(
        {
            "name": "universal coefficients fixtures",
            "ok": hand_ok,
            "detail": "zero-differential and multiplication-by-w hand values",
        }
    )
    # the exported slope-0 Hecke complex at level 11, family coefficients
    pres = _pres(1, 11)
    disk = WeightDisk(11, 0, Fraction(1), 8, 4)
    datum, dec, _ = make_slope_datum(pres, disk, Fraction(0), 4)
    fam = FamilyRing(disk)
    ring = TruncWRing(fam)
    r = dec.rank
    u_minus_1 = [
        [
            ring.sub(dec.u_restricted[i][j], ring.one() if i == j else ring.zero())
            for j in range(r)
        ]
        for i in range(r)
    ]
    conc = FiniteComplex(ring, [r], [])
    repc = universal_coefficients_check(conc, ("point", 0))
    two = FiniteComplex(ring, [r, r], [u_minus_1])
    rep2 = universal_coefficients_check(two, ("point", 0))
    out.append(
        {
            "name": "universal coefficients on the exported Hecke complex",
            "ok": repc.ok and rep2.ok,
            "detail": f"rank-{r} slope-0 family module, concentrated and (U-1) complexes",
        }
    )
    return out


def suite_projdim(cfg=None) -> list[dict]:
    out = []
    R = QwRing()
    w = R.var()
    fixtures = [
        ("free", [[R.zero()]], (0, 0, True, True)),
        ("R/(w)", [[w]], (1, 1, True, False)),
        ("R/(w^2)", [[R.mul(w, w)]], (1, 1, True, False)),
        ("R/(w) + R", [[w, R.zero()], [R.zero(), R.zero()]], (1, 0, False, True)),
    ]
    ok = True
    for label, mat, want in fixtures:
        got = projdim_grade(FiniteModulePresentation(R, mat))
        quad = (got["projdim"], got["grade"], got["perfect"], got["faithful"])
        if quad != want:
            ok = False
    out.append(
        {
            "name": "projective dimension and grade fixtures",
            "ok": ok,
            "detail": "free, R/(w), R/(w^2), R/(w)+R quadruples",
        }
    )
    rng = random.Random(77)
    agree = 0
    for _ in range(100):
        b = rng.randint(1, 3)
        a = rng.randint(0, 3)
        mat = [
            [R.poly(*[rng.randint(-2, 2) for _ in range(rng.randint(0, 3))]) for _ in range(a)]
            for _ in range(b)
        ]
        res = support_equivalences(FiniteModulePresentation(R, mat))
        agree += 1 if res["all_agree"] else 0
    out.append(
        {
            "name": "support equivalences",
            "ok": agree == 100,
            "detail": f"{agree}/100 random presentations agree pairwise",
        }
    )
    return out


def suite_amice(cfg=None) -> list[dict]:
    rng = random.Random(5050)
    p = 5
    ring = PadicRing(p, 12)
    D = 6
    failures = 0
    for _ in range(50):
        mu = MomentDistribution(
            ring, ArithmeticWeight(0), [ring.from_int(rng.randrange(-500, 500)) for _ in range(8)]
        )
        for b in (1, 2, p):
            lhs = amice_transform(translate_distribution(mu, b), D)
            one_plus = TruncatedSeries(ring, [ring.one(), ring.one()], D)
            fac = TruncatedSeries(ring, [ring.one()], D)
            for _ in range(b):
                fac = fac * one_plus
            rhs = fac * amice_transform(mu, D)
            for a, c in zip(lhs.coeffs, rhs.coeffs):
                if not (a - c).is_zero():
                    failures += 1
                    break
    # A translation-fixed distribution is zero as far as the truncation can
    # see: the shift kernel sits inside the top filtration step (moments
    # below M-1 vanish), so its entire degree-D Amice window is zero.
    from .distributions import Sigma0Matrix, action_matrix

    M = 8
    fixed_ok = True
    for b in (1, 2, p):
        A = action_matrix(Sigma0Matrix(p, 1, b, 0, 1), ArithmeticWeight(0), M, ring)
        shift = [[A[i][n] for i in range(M)] for n in range(M)]
        delta = [
            [shift[i][j] - (ring.one() if i == j else ring.zero()) for j in range(M)]
            for i in range(M)
        ]
        kern = linalg.kernel_basis(ring, delta, M)
        for vec in kern:
            if any(not v.is_zero() for v in vec[: M - 1]):
                fixed_ok = False
            mu = MomentDistribution(ring, ArithmeticWeight(0), list(vec))
            if any(not c.is_zero() for c in amice_transform(mu, D).coeffs):
                fixed_ok = False
    return [
        {
            "name": "Amice translation law",
            "ok": failures == 0,
            "detail": f"50 random moment vectors, b in (1, 2, {p}), D={D}; {failures} failures",
        },
        {
            "name": "translation-fixed distributions vanish",
            "ok": fixed_ok,
            "detail": "shift-fixed vectors vanish below the top filtration step and through the Amice window",
        },
    ]


def suite_heckewell(cfg=None) -> list[dict]:
    pres = _pres(1, 11)
    ring = PadicRing(11, 6)
    module = SymbolModule(pres, ("weight", 0, ring, 6))
    from .slopes import _cap_matrix_columns

    U1 = _cap_matrix_columns(ring, module.hecke_matrix(up_spec(11)), 6, 6)
    U2 = _cap_matrix_columns(ring, module.hecke_matrix(up_spec(11, shift=11)), 6, 6)
    F1 = charpoly_rev(ring, U1)
    F2 = charpoly_rev(ring, U2)
    ok = True
    for a, b in zip(F1.coeffs, F2.coeffs):
        if not (a - b).is_zero():
            ok = False
    return [
        {
            "name": "Hecke lift well-definedness",
            "ok": ok,
            "detail": "two U_p representative systems give equal Fredholm series within certificates",
        }
    ]


def suite_determinism(cfg=None) -> list[dict]:
    from .cli import encode_matrix

    pres = _pres(1, 5)
    runs = []
    for _ in range(2):
        fd = fredholm(pres, ArithmeticWeight(0), 6, prec=8)
        doc = json.dumps(
            {
                "coeffs": encode_matrix([fd.series.coeffs])[0],
                "slopes": [str(s) for s in fd.polygon.slope_multiset()],
            },
            sort_keys=True,
        )
        runs.append(doc)
    byte_ok = runs[0] == runs[1]
    # one extra guard digit never changes a previously certified digit
    fd8 = fredholm(pres, ArithmeticWeight(0), 6, prec=8)
    fd9 = fredholm(pres, ArithmeticWeight(0), 6, prec=9)
    guard_ok = True
    for a, b in zip(fd8.series.coeffs, fd9.series.coeffs):
        if not (a - b.with_abs_prec(min(b.prec, a.prec))).is_zero():
            guard_ok = False
    rep8 = classicality_check(_pres(1, 11), 0, Fraction(0), (2,), M=8, prec=8)
    rep9 = classicality_check(_pres(1, 11), 0, Fraction(0), (2,), M=8, prec=9)
    guard_ok = guard_ok and rep8["ok"] and rep9["ok"]
    return [
        {"name": "byte reproducibility", "ok": byte_ok, "detail": "identical JSON for identical config"},
        {
            "name": "guard digit stability",
            "ok": guard_ok,
            "detail": "certified digits unchanged under one extra working digit",
        },
    ]


SUITES = {
    "independence": suite_independence,
    "classicality": suite_classicality,
    "factorization": suite_factorization,
    "family": suite_family,
    "uct": suite_uct,
    "projdim": suite_projdim,
    "amice": suite_amice,
    "heckewell": suite_heckewell,
    "determinism": suite_determinism,
}


def run_suite(name: str, cfg=None) -> list[dict]:
    if name == "all":
        out = []
        for key in SUITES:
            out.extend(SUITES[key](cfg))
        return out
    if name not in SUITES:
        from .errors import ConfigError

        raise ConfigError(f"unknown suite {name!r}; choose from {sorted(SUITES)} or 'all'")
    return SUITES[name](cfg)
