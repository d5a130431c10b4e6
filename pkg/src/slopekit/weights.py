"""The weight disk, its truncated coordinate ring, and the universal character.

One connected component of weight space is modeled: a p-adic disk around an
integer weight k0, with trivial tame character.  The disk coordinate w is
normalized so that the classical weight k sits at w = gamma^(k-k0) - 1 with
gamma = 1 + p; w = 0 recovers k0, and specialization is plain polynomial
evaluation.  The coordinate ring is truncated to Z_p[[w]] mod (p^N, w^Mw),
with all scalar coefficients carrying their own precision.

The universal character of a unit x is

    chi(x) = x^k0 * (1 + w)^t,   t = log(<x>) / log(gamma),

where <x> is the principal-unit part of x.  Specializing w to gamma^j - 1
gives x^k0 * <x>^j, the arithmetic weight k0 + j with trivial wild part; for
x principal this is x^(k0+j) on the nose.  p = 2 is excluded (gamma would
not generate the principal units), and for the symbol machinery downstream
we in fact require p >= 5.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import ConfigError, PointOutsideDisk
from .padics import PadicRing, PadicScalar, padic_log_principal, principal_part


@dataclass(frozen=True)
class ArithmeticWeight:
    """Integer weight in the null normalization (k, 0); trivial nebentypus."""

    k: int

    @property
    def dominant(self) -> bool:
        return self.k >= 0


class WeightDisk:
    """Affinoid disk |w| <= p^(-r) around the integer weight k0.

    radius_exponent r may be None for the degenerate single-point disk.
    coeff_precision and w_truncation fix the ring truncation used for all
    family computations over this disk.
    """

    def __init__(self, p: int, k0: int, r: Fraction | None, prec: int, w_trunc: int):
        if p == 2 or p < 3:
            raise ConfigError("the weight disk requires an odd prime")
        if r is not None and Fraction(r) <= 0:
            raise ConfigError("radius exponent must be positive (affinoid inside the open disk)")
        if w_trunc < 1 or prec < 1:
            raise ConfigError("truncations must be >= 1")
        self.p = p
        self.k0 = k0
        self.r = None if r is None else Fraction(r)
        self.prec = prec
        self.w_trunc = w_trunc
        self.scalars = PadicRing(p, prec)

    @property
    def gamma(self) -> int:
        return 1 + self.p

    def contains_weight(self, k: int) -> bool:
        if self.r is None:
            return k == self.k0
        vw = self.coordinate_valuation(k)
        return Fraction(vw) >= self.r

    def coordinate_valuation(self, k: int) -> int:
        """v_p(gamma^(k-k0) - 1) = 1 + v_p(k - k0)."""
        if k == self.k0:
            return 10**9  # the center; treated as exact
        d, v = k - self.k0, 0
        while d % self.p == 0:
            d //= self.p
            v += 1
        return 1 + v

    def json(self) -> dict:
        return {
            "p": self.p,
            "k0": self.k0,
            "r": None if self.r is None else str(self.r),
            "N": self.prec,
            "Mw": self.w_trunc,
        }

    def __repr__(self):
        return f"WeightDisk(p={self.p}, k0={self.k0}, r={self.r}, N={self.prec}, Mw={self.w_trunc})"


class WeightFamilyElement:
    """Element of the truncated coordinate ring, a w-polynomial mod w^Mw."""

    __slots__ = ("ring", "coeffs")

    def __init__(self, ring: "FamilyRing", coeffs):
        coeffs = list(coeffs)
        mw = ring.disk.w_trunc
        if len(coeffs) < mw:
            coeffs += [ring.scalars.zero()] * (mw - len(coeffs))
        self.ring = ring
        self.coeffs = tuple(coeffs[:mw])

    def __add__(self, other):
        return WeightFamilyElement(self.ring, [a + b for a, b in zip(self.coeffs, other.coeffs)])

    def __neg__(self):
        return WeightFamilyElement(self.ring, [-a for a in self.coeffs])

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        mw = self.ring.disk.w_trunc
        z = self.ring.scalars.zero()
        out = [z] * mw
        for i, a in enumerate(self.coeffs):
            for j in range(mw - i):
                out[i + j] = out[i + j] + a * other.coeffs[j]
        return WeightFamilyElement(self.ring, out)

    def scale(self, c: PadicScalar):
        return WeightFamilyElement(self.ring, [c * a for a in self.coeffs])

    def is_unit(self) -> bool:
        return self.coeffs[0].is_invertible()

    def invert(self):
        c0 = self.coeffs[0]
        inv0 = c0.invert()
        mw = self.ring.disk.w_trunc
        # f = c0 (1 + t) with t nilpotent mod w^Mw
        t = WeightFamilyElement(self.ring, [self.ring.scalars.zero()] + [inv0 * c for c in self.coeffs[1:]])
        acc = self.ring.one()
        power = self.ring.one()
        for _ in range(1, mw):
            power = power * t
            acc = acc + (-power if _ % 2 == 1 else power)
        return acc.scale(inv0)

    def is_zero_at_precision(self) -> bool:
        return all(c.is_zero() for c in self.coeffs)

    def specialize(self, k: int) -> PadicScalar:
        """Evaluate at the classical point w = gamma^(k-k0) - 1.

        The certified precision is capped by Mw * v_p(w): the dropped tail
        w^Mw * (integral coefficients) is invisible to the truncation.
        """
        disk = self.ring.disk
        if not disk.contains_weight(k):
            raise PointOutsideDisk(f"weight {k} is outside the disk around {disk.k0}")
        scalars = disk.scalars
        if k == disk.k0:
            return self.coeffs[0]
        gamma = scalars.from_int(disk.gamma)
        w = gamma ** (k - disk.k0) - scalars.one()
        acc = scalars.zero()
        for c in reversed(self.coeffs):
            acc = acc * w + c
        tail_cap = disk.w_trunc * disk.coordinate_valuation(k)
        return acc.with_abs_prec(min(acc.prec, tail_cap))

    def agrees_with(self, other) -> bool:
        return all((a - b).is_zero() for a, b in zip(self.coeffs, other.coeffs))

    def __repr__(self):
        return f"Family({list(self.coeffs)!r})"


class FamilyRing:
    """Ring handle for WeightFamilyElement, with the pivoting protocol."""

    def __init__(self, disk: WeightDisk):
        self.disk = disk
        self.scalars = disk.scalars

    def __repr__(self):
        return f"FamilyRing({self.disk!r})"

    def zero(self):
        return WeightFamilyElement(self, [])

    def one(self):
        return self.from_int(1)

    def from_int(self, n: int):
        return WeightFamilyElement(self, [self.scalars.from_int(n)])

    def from_scalar(self, c: PadicScalar):
        return WeightFamilyElement(self, [c])

    def var(self):
        return WeightFamilyElement(self, [self.scalars.zero(), self.scalars.one()])

    def p_power(self, k: int):
        return self.from_scalar(self.scalars.p_power(k))

    def is_zero(self, x: WeightFamilyElement) -> bool:
        return x.is_zero_at_precision()

    def pivot_key(self, x: WeightFamilyElement):
        c0 = x.coeffs[0]
        if not c0.is_invertible():
            return None
        return (c0.val, -c0.prec)

    def inv(self, x: WeightFamilyElement):
        return x.invert()

    def fmt(self, x: WeightFamilyElement) -> dict:
        return {"w_coeffs": [self.scalars.fmt(c) for c in x.coeffs]}


def binomial_series_coeff(ring: PadicRing, t: PadicScalar, j: int) -> PadicScalar:
    """binom(t, j) for p-adic t; integral when t is, tracked in any case."""
    if j == 0:
        return ring.one()
    acc = ring.one()
    for i in range(j):
        acc = acc * (t - ring.from_int(i))
    fact = 1
    for i in range(2, j + 1):
        fact *= i
    return acc * ring.from_fraction(Fraction(1, fact))


def eval_character(disk: WeightDisk, x: PadicScalar) -> WeightFamilyElement:
    """chi(x) = x^k0 (1+w)^(log_gamma <x>) as a truncated family element."""
    if not x.is_unit():
        raise ValueError("the universal character is defined on units only")
    ring = FamilyRing(disk)
    scalars = disk.scalars
    gamma = scalars.from_int(disk.gamma)
    t = padic_log_principal(scalars, principal_part(scalars, x)) / padic_log_principal(
        scalars, gamma
    )
    coeffs = [binomial_series_coeff(scalars, t, j) for j in range(disk.w_trunc)]
    head = x**disk.k0
    return WeightFamilyElement(ring, [head * c for c in coeffs])


def analyticity_index(disk: WeightDisk) -> int:
    """Minimal s >= 1 so the character is one convergent series on 1 + p^s Z_p.

    The binomial expansion of (1+w)^t with v(t) >= s-1 converges in sup norm
    on |w| <= p^(-r) exactly when (s-1) + min_i (p^i r - i) > 1/(p-1); the
    minimum accounts for the norm of log(1+w) on the disk.
    """
    if disk.r is None:
        return 1
    p, r = disk.p, disk.r
    best = r  # i = 0
    i, term = 0, r
    while True:
        i += 1
        term = p**i * r - i
        if term < best:
            best = term
        if term > best + 2 and p**i * r > 1:
            break
    threshold = Fraction(1, p - 1)
    s = 1
    while Fraction(s - 1) + best <= threshold:
        s += 1
    return s


def character_tail_blows_up(disk: WeightDisk, s: int) -> bool:
    """Witness for the analyticity boundary at congruence level s.

    On the coset 1 + p^s Z_p the character factors through exponents that
    are p^(s-1) times units, so uniform analyticity needs the element
    (1+w)^(p^(s-1)) - 1 to have disk valuation > 1/(p-1) (the convergence
    radius of the binomial-exponential).  This evaluates that valuation
    directly from integer binomial coefficients, independently of the
    closed-form minimization in analyticity_index.
    """
    if disk.r is None or s < 1:
        return False
    from math import comb

    p, r = disk.p, disk.r
    big = p ** (s - 1)
    worst = None
    for ell in range(1, big + 1):
        b = comb(big, ell)
        vb = 0
        while b % p == 0:
            b //= p
            vb += 1
        term = vb + ell * r
        if worst is None or term < worst:
            worst = term
    return worst <= Fraction(1, p - 1)
