"""Finite-moment distribution modules and the explicit monoid action.

A distribution is stored through its moments mu_j = mu(x^j), j < M, with
the decreasing precision profile: moment j is kept modulo p^(N-j).  The
profile is what the matrices of the monoid action preserve, and the
filtration jump under the p-part of the action is the finite-level shadow
of complete continuity.

The acting monoid is the set of integral matrices (a b; c d) with a a unit,
c divisible by p and nonzero determinant.  On functions the action at
weight kappa is

    (g . f)(x) = kappa(a + cx) * f((b + dx) / (a + cx)),

with kappa(y) = y^k for an integer weight in the null normalization and
kappa = the universal disk character for families.  Moments transform by
the transpose matrix; all matrices here are the function-side ones, with
column j holding the expansion of g . x^j.

Truncation honesty: applying g with c != 0 reads moments beyond the stored
window with p-weights at least v_p(c) * (M - j) in output moment j, so the
result's precision is capped there; with c == 0 the action is exactly
lower triangular and no cap applies.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import ConfigError
from .padics import PadicRing, PadicScalar, strip_p
from .series import TruncatedSeries
from .weights import ArithmeticWeight, FamilyRing, WeightDisk, WeightFamilyElement, eval_character


@dataclass(frozen=True)
class Sigma0Matrix:
    """Integral matrix (a b; c d) with a unit, p | c, det != 0."""

    p: int
    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        if self.a % self.p == 0:
            raise ConfigError("upper-left entry must be a p-adic unit")
        if self.c % self.p != 0:
            raise ConfigError("lower-left entry must be divisible by p")
        if self.a * self.d - self.b * self.c == 0:
            raise ConfigError("determinant must be nonzero")

    @property
    def det(self) -> int:
        return self.a * self.d - self.b * self.c

    def tuple(self) -> tuple[int, int, int, int]:
        return (self.a, self.b, self.c, self.d)

    def __mul__(self, other: "Sigma0Matrix") -> "Sigma0Matrix":
        a = self.a * other.a + self.b * other.c
        b = self.a * other.b + self.b * other.d
        c = self.c * other.a + self.d * other.c
        d = self.c * other.b + self.d * other.d
        return Sigma0Matrix(self.p, a, b, c, d)

    def c_valuation(self) -> int | None:
        """v_p(c), or None when c == 0 (exactly triangular action)."""
        if self.c == 0:
            return None
        return strip_p(self.p, self.c)[0]


def _binomial(n: int, k: int) -> int:
    """binom(n, k) for any integer n and k >= 0 (generalized, integral)."""
    if k == 0:
        return 1
    num = 1
    for i in range(k):
        num *= n - i
    den = 1
    for i in range(2, k + 1):
        den *= i
    return num // den


def _unit_power_series(scalars: PadicRing, a: int, c: int, e: int, M: int) -> list[PadicScalar]:
    """Coefficients (length M) of (a + c x)^e for a unit a and any integer e."""
    a_pow = scalars.from_int(a) ** e
    ainv = scalars.from_int(a).invert()
    out = []
    ratio_pow = scalars.one()
    ca = scalars.from_int(c) * ainv
    for i in range(M):
        if e >= 0 and i > e:
            out.append(scalars.zero())
            continue
        out.append(scalars.from_int(_binomial(e, i)) * a_pow * ratio_pow)
        ratio_pow = ratio_pow * ca
    return out


def _poly_mul_trunc(ring, f: list, g: list, M: int) -> list:
    out = [ring.zero()] * M
    for i, a in enumerate(f):
        if i >= M or ring.is_zero(a):
            continue
        for j, b in enumerate(g):
            if i + j >= M:
                break
            out[i + j] = out[i + j] + a * b
    return out


def classical_action_matrix(g: Sigma0Matrix, k: int) -> list[list[int]]:
    """Exact integer (k+1) x (k+1) function-side matrix at integer weight k.

    Column j expands (a+cx)^(k-j) (b+dx)^j, a polynomial of degree <= k.
    This is the exact polynomial block of the moment action and doubles as
    the coefficient action of the classical comparison space.
    """
    if k < 0:
        raise ConfigError("classical weights are dominant: k >= 0")
    a, b, c, d = g.tuple()
    cols = []
    for j in range(k + 1):
        poly = [0] * (k + 1)
        poly[0] = 1
        for _ in range(j):  # multiply by (b + d x)
            poly = [b * poly[m] + (d * poly[m - 1] if m else 0) for m in range(k + 1)]
        for _ in range(k - j):  # multiply by (a + c x)
            poly = [a * poly[m] + (c * poly[m - 1] if m else 0) for m in range(k + 1)]
        cols.append(poly)
    return [[cols[j][n] for j in range(k + 1)] for n in range(k + 1)]


def action_matrix(
    g: Sigma0Matrix,
    weight: ArithmeticWeight | WeightDisk,
    M: int,
    scalars: PadicRing | None = None,
):
    """Function-side matrix of g on the x-power basis, truncated below M.

    Integer weight: entries are PadicScalar over ``scalars`` (defaults to
    precision 2*M + 8).  Weight disk: entries are WeightFamilyElement over
    the disk's family ring.
    """
    if isinstance(weight, ArithmeticWeight):
        scal = scalars or PadicRing(g.p, 2 * M + 8)
        return _action_matrix_weight(g, weight.k, M, scal)
    return _action_matrix_family(g, weight, M)


def _action_matrix_weight(g: Sigma0Matrix, k: int, M: int, scalars: PadicRing):
    a, b, c, d = g.tuple()
    cols = []
    for j in range(M):
        pre = _unit_power_series(scalars, a, c, k - j, M)
        bd = _bd_power(scalars, b, d, j, M)
        cols.append(_poly_mul_trunc(scalars, pre, bd, M))
    return [[cols[j][n] for j in range(M)] for n in range(M)]


def _action_matrix_family(g: Sigma0Matrix, disk: WeightDisk, M: int):
    family = FamilyRing(disk)
    scalars = disk.scalars
    a, b, c, d = g.tuple()
    # chi(a + cx) = chi(a) * (1 + s)^k0 * (1 + w)^(log_gamma(1 + s)), s = (c/a) x
    chi_a = eval_character(disk, scalars.from_int(a))
    ainv = scalars.from_int(a).invert()
    s_poly = [scalars.zero()] * M
    if M > 1:
        s_poly[1] = scalars.from_int(c) * ainv
    one_plus_s = [scalars.one()] + s_poly[1:]
    head = _xpoly_int_power(scalars, one_plus_s, disk.k0, M)
    beta = _xpoly_log(scalars, s_poly, M)
    from .padics import padic_log_principal

    log_gamma = padic_log_principal(scalars, scalars.from_int(disk.gamma))
    inv_log_gamma = log_gamma.invert()
    beta = [t * inv_log_gamma for t in beta]
    # (1 + w)^beta(x) = sum_j binom(beta(x), j) w^j
    binom_rows = _xpoly_binomials(scalars, beta, disk.w_trunc, M)
    prefactor: list[WeightFamilyElement] = []
    for m in range(M):
        wcoeffs = [binom_rows[j][m] for j in range(disk.w_trunc)]
        prefactor.append(WeightFamilyElement(family, wcoeffs))
    prefactor = _fampoly_scale_xpoly(family, prefactor, head, M)
    prefactor = [t * chi_a for t in prefactor]
    cols = []
    for j in range(M):
        frac = _poly_mul_trunc(
            scalars,
            _unit_power_series(scalars, a, c, -j, M),
            _bd_power(scalars, b, d, j, M),
            M,
        )
        col = _fampoly_scale_xpoly(family, prefactor, frac, M)
        cols.append(col)
    return [[cols[j][n] for j in range(M)] for n in range(M)]


def _bd_power(scalars: PadicRing, b: int, d: int, j: int, M: int) -> list[PadicScalar]:
    out = [scalars.zero()] * M
    out[0] = scalars.one()
    for _ in range(j):
        out = [
            out[m].scale_int(b) + (out[m - 1].scale_int(d) if m else scalars.zero())
            for m in range(M)
        ]
    return out


def _xpoly_int_power(scalars: PadicRing, poly: list[PadicScalar], e: int, M: int):
    if e < 0:
        inv = TruncatedSeries(scalars, poly, M).inverse().coeffs
        return _xpoly_int_power(scalars, list(inv), -e, M)
    acc = [scalars.one()] + [scalars.zero()] * (M - 1)
    for _ in range(e):
        acc = _poly_mul_trunc(scalars, acc, poly, M)
    return acc


def _xpoly_log(scalars: PadicRing, s_poly: list[PadicScalar], M: int) -> list[PadicScalar]:
    """log(1 + s(x)) as an x-polynomial, for s with s(0) = 0."""
    out = [scalars.zero()] * M
    power = [scalars.one()] + [scalars.zero()] * (M - 1)
    for n in range(1, M):
        power = _poly_mul_trunc(scalars, power, s_poly, M)
        coeff = scalars.from_fraction(Fraction((-1) ** (n + 1), n))
        for m in range(M):
            out[m] = out[m] + coeff * power[m]
    return out


def _xpoly_binomials(scalars: PadicRing, beta: list[PadicScalar], mw: int, M: int):
    """Rows binom(beta(x), j) for j < mw, each an x-polynomial."""
    rows = [[scalars.one()] + [scalars.zero()] * (M - 1)]
    acc = rows[0]
    fact = 1
    for j in range(1, mw):
        shift = [beta[m] - (scalars.from_int(j - 1) if m == 0 else scalars.zero()) for m in range(M)]
        acc = _poly_mul_trunc(scalars, acc, shift, M)
        fact *= j
        inv_fact = scalars.from_fraction(Fraction(1, fact))
        rows.append([inv_fact * t for t in acc])
        # keep acc as the factorial-free product
    return rows


def _fampoly_scale_xpoly(family: FamilyRing, fam_poly, x_poly, M: int):
    """(family-valued x-poly) * (scalar-valued x-poly), truncated below M."""
    out = [family.zero()] * M
    for i, fe in enumerate(fam_poly):
        for j, sc in enumerate(x_poly):
            if i + j >= M:
                break
            out[i + j] = out[i + j] + fe.scale(sc)
    return out


class MomentDistribution:
    """Moments mu(x^j), j < M, at profile precision p^(N-j), with a weight."""

    __slots__ = ("scalars", "weight", "moments", "profile_prec")

    def __init__(self, scalars: PadicRing, weight, moments, profile_prec: int | None = None):
        self.scalars = scalars
        self.weight = weight
        self.profile_prec = scalars.prec if profile_prec is None else profile_prec
        ms = list(moments)
        if not ms:
            raise ConfigError("a distribution needs at least one moment")
        self.moments = tuple(
            m.with_abs_prec(min(m.prec, self.profile_prec - j)) for j, m in enumerate(ms)
        )

    @property
    def depth(self) -> int:
        return len(self.moments)

    def __add__(self, other):
        return MomentDistribution(
            self.scalars,
            self.weight,
            [a + b for a, b in zip(self.moments, other.moments)],
            min(self.profile_prec, other.profile_prec),
        )

    def __neg__(self):
        return MomentDistribution(self.scalars, self.weight, [-a for a in self.moments], self.profile_prec)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c: PadicScalar):
        return MomentDistribution(self.scalars, self.weight, [c * a for a in self.moments], self.profile_prec)

    def is_zero_at_profile(self) -> bool:
        return all(m.is_zero() for m in self.moments)

    def agrees_with(self, other) -> bool:
        return all((a - b).is_zero() for a, b in zip(self.moments, other.moments))

    def __repr__(self):
        return f"MomentDistribution({list(self.moments)!r})"


class FamilyDistribution:
    """Family-coefficient moments with the same decreasing profile."""

    __slots__ = ("family", "weight", "moments", "profile_prec")

    def __init__(self, family: FamilyRing, moments, profile_prec: int | None = None):
        self.family = family
        self.weight = family.disk
        self.profile_prec = family.disk.prec if profile_prec is None else profile_prec
        ms = list(moments)
        if not ms:
            raise ConfigError("a distribution needs at least one moment")
        out = []
        for j, m in enumerate(ms):
            out.append(
                WeightFamilyElement(
                    family,
                    [c.with_abs_prec(min(c.prec, self.profile_prec - j)) for c in m.coeffs],
                )
            )
        self.moments = tuple(out)

    @property
    def depth(self) -> int:
        return len(self.moments)

    def __add__(self, other):
        return FamilyDistribution(
            self.family,
            [a + b for a, b in zip(self.moments, other.moments)],
            min(self.profile_prec, other.profile_prec),
        )

    def __neg__(self):
        return FamilyDistribution(self.family, [-a for a in self.moments], self.profile_prec)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c: WeightFamilyElement):
        return FamilyDistribution(self.family, [a * c for a in self.moments], self.profile_prec)

    def specialize(self, k: int) -> MomentDistribution:
        return MomentDistribution(
            self.family.scalars,
            ArithmeticWeight(k),
            [m.specialize(k) for m in self.moments],
            self.profile_prec,
        )

    def is_zero_at_profile(self) -> bool:
        return all(m.is_zero_at_precision() for m in self.moments)

    def __repr__(self):
        return f"FamilyDistribution({list(self.moments)!r})"


def dirac_distribution(scalars: PadicRing, weight, point: int, M: int) -> MomentDistribution:
    """Moments of the point mass at an integer: mu(x^j) = point^j."""
    return MomentDistribution(scalars, weight, [scalars.from_int(point**j) for j in range(M)])


def apply_moment_matrix(mu_moments, matrix, zero, tail_cap=None):
    """(mu | g)_j = sum_n A[n][j] mu_n, i.e. multiply by the transpose."""
    M = len(mu_moments)
    out = []
    for j in range(M):
        acc = zero
        for n in range(M):
            acc = acc + matrix[n][j] * mu_moments[n]
        if tail_cap is not None:
            acc = _cap(acc, tail_cap(j))
        out.append(acc)
    return out


def _cap(value, bound: int):
    if isinstance(value, PadicScalar):
        return value.with_abs_prec(min(value.prec, bound))
    return WeightFamilyElement(
        value.ring, [c.with_abs_prec(min(c.prec, bound)) for c in value.coeffs]
    )


def act_on_distribution(mu, g: Sigma0Matrix, matrix=None):
    """Right action mu | g through the transpose of the function matrix.

    The precision profile is re-enforced afterwards, and for c != 0 the
    truncation cap v_p(c) * (M - j) is applied to output moment j.
    """
    M = mu.depth
    vc = g.c_valuation()
    if isinstance(mu, MomentDistribution):
        if matrix is None:
            matrix = action_matrix(g, mu.weight, M, mu.scalars)
        zero = mu.scalars.zero()
        cap = None if vc is None else (lambda j: vc * (M - j))
        new = apply_moment_matrix(list(mu.moments), matrix, zero, cap)
        return MomentDistribution(mu.scalars, mu.weight, new, mu.profile_prec)
    if matrix is None:
        matrix = action_matrix(g, mu.weight, M)
    zero = mu.family.zero()
    cap = None if vc is None else (lambda j: vc * (M - j))
    new = apply_moment_matrix(list(mu.moments), matrix, zero, cap)
    return FamilyDistribution(mu.family, new, mu.profile_prec)


def classical_projection(mu: MomentDistribution, k: int) -> list[PadicScalar]:
    """Image in the dual of degree-k polynomials: the first k+1 moments.

    The projection intertwines the distribution action with the exact
    polynomial action of classical_action_matrix; tests exercise this
    rather than assuming it.
    """
    if k < 0:
        raise ConfigError("classical weights are dominant: k >= 0")
    if mu.depth < k + 1:
        raise ConfigError(f"need at least {k + 1} moments, have {mu.depth}")
    return list(mu.moments[: k + 1])


def amice_transform(mu: MomentDistribution, D: int) -> TruncatedSeries:
    """A_mu(T) = sum_n mu(binom(x, n)) T^n, truncated below degree D."""
    if D > mu.depth:
        raise ConfigError(f"need at least {D} moments, have {mu.depth}")
    scalars = mu.scalars
    out = []
    # binom(x, n) = x (x-1) ... (x-n+1) / n!
    poly = [Fraction(1)]
    for n in range(D):
        if n:
            prev = poly + [Fraction(0)]
            poly = [
                (prev[m - 1] if m else Fraction(0)) - (n - 1) * prev[m]
                for m in range(len(prev))
            ]
            poly = [c / n for c in poly]
        acc = scalars.zero()
        for m, c in enumerate(poly):
            if c:
                acc = acc + scalars.from_fraction(c) * mu.moments[m]
        out.append(acc)
    return TruncatedSeries(scalars, out, D)


def translate_distribution(mu: MomentDistribution, b: int) -> MomentDistribution:
    """Pushforward under x -> x + b: moments of mu shifted by b.

    Weight independent: mu'(x^n) = mu((x+b)^n).
    """
    scalars = mu.scalars
    M = mu.depth
    new = []
    for n in range(M):
        acc = scalars.zero()
        for i in range(n + 1):
            acc = acc + mu.moments[i].scale_int(_binomial(n, i) * b ** (n - i))
        new.append(acc)
    return MomentDistribution(scalars, mu.weight, new, mu.profile_prec)
