"""Polynomials, truncated power series, Newton polygons, slope factorization.

Conventions used across the package (documented once, here):

- A Fredholm-style series F(T) = det(1 - T U) has constant term 1.  Writing
  F = prod (1 - alpha_i T), the "slope" of the eigenvalue alpha_i is
  v_p(alpha_i), which equals the slope of the corresponding Newton-polygon
  segment of F.  The slope-<= h factor collects the eigenvalues of
  valuation <= h.
- The reversed polynomial of Q(T) = sum q_i T^i of degree d is
  Q*(x) = x^d Q(1/x); when Q(0) = 1, Q* is monic with roots alpha_i.

Slope factorization refines the Newton-polygon initial factor (the naive
degree-d truncation of F) by a multivariate Newton iteration on the
coefficient equations of Q R = F, solving the Sylvester-structured linear
system at each step with valuation-pivoted elimination.  Certified
precision doubles per step once the iteration contracts; if it stalls
before the residual is zero at stated precision, we refuse with
PrecisionExhausted rather than return an uncertified factor.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import linalg
from .errors import DiskTooLarge, PrecisionExhausted
from .padics import AtLeast, PadicScalar


class PadicPoly:
    """Dense polynomial over a precision-tracked coefficient ring."""

    __slots__ = ("ring", "coeffs")

    def __init__(self, ring, coeffs):
        self.ring = ring
        self.coeffs = list(coeffs) if coeffs else [ring.zero()]

    @property
    def formal_degree(self) -> int:
        return len(self.coeffs) - 1

    def __add__(self, other: "PadicPoly") -> "PadicPoly":
        n = max(len(self.coeffs), len(other.coeffs))
        z = self.ring.zero()
        a = self.coeffs + [z] * (n - len(self.coeffs))
        b = other.coeffs + [z] * (n - len(other.coeffs))
        return PadicPoly(self.ring, [x + y for x, y in zip(a, b)])

    def __neg__(self):
        return PadicPoly(self.ring, [-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other: "PadicPoly") -> "PadicPoly":
        z = self.ring.zero()
        out = [z] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if self.ring.is_zero(a):
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] = out[i + j] + a * b
        return PadicPoly(self.ring, out)

    def evaluate(self, x):
        acc = self.ring.zero()
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def reversed_monic(self) -> "PadicPoly":
        """x^deg * Q(1/x); monic when the constant term is 1."""
        return PadicPoly(self.ring, list(reversed(self.coeffs)))

    def leading(self):
        return self.coeffs[-1]

    def __repr__(self):
        return f"PadicPoly({self.coeffs!r})"


class TruncatedSeries:
    """Series known through degree < truncation_degree."""

    __slots__ = ("ring", "coeffs", "trunc")

    def __init__(self, ring, coeffs, trunc: int | None = None):
        coeffs = list(coeffs)
        self.ring = ring
        self.trunc = len(coeffs) if trunc is None else trunc
        if len(coeffs) < self.trunc:
            coeffs += [ring.zero()] * (self.trunc - len(coeffs))
        self.coeffs = coeffs[: self.trunc]

    def __add__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        d = min(self.trunc, other.trunc)
        return TruncatedSeries(self.ring, [self.coeffs[i] + other.coeffs[i] for i in range(d)], d)

    def __neg__(self):
        return TruncatedSeries(self.ring, [-c for c in self.coeffs], self.trunc)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        d = min(self.trunc, other.trunc)
        z = self.ring.zero()
        out = [z] * d
        for i, a in enumerate(self.coeffs[:d]):
            if self.ring.is_zero(a):
                continue
            for j in range(d - i):
                b = other.coeffs[j]
                if not self.ring.is_zero(b):
                    out[i + j] = out[i + j] + a * b
        return TruncatedSeries(self.ring, out, d)

    def mul_poly(self, poly: PadicPoly) -> "TruncatedSeries":
        return self * TruncatedSeries(self.ring, poly.coeffs + [self.ring.zero()] * self.trunc, self.trunc)

    def inverse(self) -> "TruncatedSeries":
        """Series inverse; the constant term must be invertible."""
        c0 = self.coeffs[0]
        inv0 = self.ring.inv(c0)
        out = [inv0]
        for n in range(1, self.trunc):
            acc = self.ring.zero()
            for i in range(1, n + 1):
                acc = acc + self.coeffs[i] * out[n - i]
            out.append(-(inv0 * acc))
        return TruncatedSeries(self.ring, out, self.trunc)

    def as_poly(self, degree: int | None = None) -> PadicPoly:
        d = self.trunc - 1 if degree is None else degree
        return PadicPoly(self.ring, self.coeffs[: d + 1])

    def __repr__(self):
        return f"TruncatedSeries({self.coeffs!r}, D={self.trunc})"


@dataclass(frozen=True)
class NewtonPolygon:
    """Lower convex hull of (i, v_p(a_i)) with its slope multiset."""

    vertices: tuple  # ((index, Fraction valuation), ...)
    slopes: tuple  # ((Fraction slope, multiplicity), ...), nondecreasing

    def slope_multiset(self) -> list[Fraction]:
        out = []
        for s, m in self.slopes:
            out.extend([s] * m)
        return out

    def count_at_most(self, h: Fraction) -> int:
        return sum(m for s, m in self.slopes if s <= h)

    def span(self) -> int:
        return self.vertices[-1][0] if self.vertices else 0

    def json(self) -> dict:
        return {
            "vertices": [[i, str(v)] for i, v in self.vertices],
            "slopes": [[str(s), m] for s, m in self.slopes],
        }


def _scalar_val(c) -> tuple[int | None, int]:
    """(exact valuation or None, valuation floor) for a scalar coefficient."""
    if isinstance(c, PadicScalar):
        v = c.valuation()
        if isinstance(v, AtLeast):
            return None, v.bound
        return v, v
    raise TypeError(f"newton_polygon needs PadicScalar coefficients, got {type(c)!r}")


def _lower_hull(points: list[tuple[int, Fraction]]) -> list[tuple[int, Fraction]]:
    hull: list[tuple[int, Fraction]] = []
    for pt in points:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            # drop hull[-1] if it is above the segment hull[-2] -> pt
            if (y2 - y1) * (pt[0] - x1) >= (pt[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(pt)
    return hull


def newton_polygon(F: TruncatedSeries | PadicPoly, value_of=None) -> NewtonPolygon:
    """Newton polygon of the stored coefficients.

    ``value_of`` may override coefficient valuation extraction (used for
    family coefficients).  Raises PrecisionExhausted when a coefficient
    that is indistinguishable from zero could still lie below the hull of
    the resolved coefficients.
    """
    coeffs = F.coeffs
    value_of = value_of or _scalar_val
    known: list[tuple[int, Fraction]] = []
    unresolved: list[tuple[int, int]] = []
    for i, c in enumerate(coeffs):
        v, floor = value_of(c)
        if v is None:
            unresolved.append((i, floor))
        else:
            known.append((i, Fraction(v)))
    if not known:
        return NewtonPolygon((), ())
    hull = _lower_hull(known)
    # a zero-at-precision coefficient inside the hull window must provably
    # sit on or above the hull, else the polygon is not determined
    last_idx = hull[-1][0]
    for i, floor in unresolved:
        if i >= last_idx:
            continue
        if Fraction(floor) < _hull_height(hull, i):
            raise PrecisionExhausted(
                f"coefficient {i} is O(p^{floor}) but the hull requires valuation"
                f" >= {_hull_height(hull, i)}; raise working precision"
            )
    slopes = []
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        slopes.append((Fraction(y2 - y1, x2 - x1), x2 - x1))
    return NewtonPolygon(tuple(hull), tuple(slopes))


def _hull_height(hull: list[tuple[int, Fraction]], x: int) -> Fraction:
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        if x1 <= x <= x2:
            return y1 + Fraction(y2 - y1, x2 - x1) * (x - x1)
    if x < hull[0][0]:
        return hull[0][1]
    return hull[-1][1]


def family_value_of(r: Fraction):
    """Coefficient-valuation extractor for the truncated weight algebra.

    The valuation of a family element across the whole disk of radius
    exponent r equals the valuation of its center coefficient provided the
    center dominates: v(c_0) <= v(c_j) + j*r for all j.  Nondominated
    coefficients mean the polygon moves across the disk and the element
    has no single valuation; we signal that with DiskTooLarge.
    """

    r = Fraction(r)

    def value(c):
        coeffs = c.coeffs
        v0, floor0 = _scalar_val(coeffs[0])
        tail_bound = None  # min over j >= 1 of v(c_j) + j*r, a disk-wide bound
        for j, cj in enumerate(coeffs[1:], start=1):
            vj, fj = _scalar_val(cj)
            bound = Fraction(fj if vj is None else vj) + j * r
            if tail_bound is None or bound < tail_bound:
                tail_bound = bound
        if v0 is not None and (tail_bound is None or Fraction(v0) < tail_bound):
            # the center coefficient strictly dominates everywhere on the
            # closed disk, so the element has one valuation across it
            return v0, v0
        lo = Fraction(floor0) if v0 is None else Fraction(v0)
        if tail_bound is not None:
            lo = min(lo, tail_bound)
        return None, lo

    return value


def charpoly_rev(ring, U: list, D: int | None = None) -> TruncatedSeries:
    """det(1 - T U) truncated to degree < D (default: full, D = dim+1)."""
    n = len(U)
    if D is None:
        D = n + 1
    if D > n + 1:
        raise ValueError(f"truncation degree {D} exceeds dim+1 = {n + 1}")
    coeffs = linalg.rev_charpoly(ring, U)
    return TruncatedSeries(ring, coeffs[:D], D)


def _is_one_like(ring, c) -> bool:
    return ring.is_zero(c - ring.one())


def _rescale(ring, coeffs: list, c: int) -> list:
    """Substitute T -> p^c T: coefficient i picks up p^(c i)."""
    if c == 0:
        return list(coeffs)
    return [x * ring.p_power(c * i) if i else x for i, x in enumerate(coeffs)]


def _newton_factor(ring, a: list, d: int, max_steps: int) -> tuple[list, list]:
    """Split a (constant term 1, degree n) as q * r with deg q = d.

    Newton iteration on the coefficient equations from the naive truncated
    initial factor; the caller arranges (by rescaling) that the bottom
    slope block of ``a`` is the one of degree d, keeping the Jacobian's
    resultant valuation small.
    """
    n = len(a) - 1
    one = ring.one()
    q = a[: d + 1]
    r = _series_div_prefix(ring, a, q, n - d + 1)
    r[0] = one

    def prod_coeffs(qc, rc):
        out = [ring.zero()] * (n + 1)
        for i, qi in enumerate(qc):
            if ring.is_zero(qi):
                continue
            for j, rj in enumerate(rc):
                if i + j <= n:
                    out[i + j] = out[i + j] + qi * rj
        return out

    best_floor = None
    stalled = 0
    for _ in range(max_steps):
        residual = [a[m] - c for m, c in enumerate(prod_coeffs(q, r))]
        floor = _residual_floor(residual)
        if floor is None:
            return q, r
        if best_floor is not None and floor <= best_floor:
            stalled += 1
            if stalled >= 3:
                raise PrecisionExhausted(
                    f"slope factorization stalled with residual valuation {floor};"
                    " raise working precision or trim the slope bound"
                )
        else:
            best_floor = floor
            stalled = 0
        # d(QR)_m = sum r_(m-i) dq_i + sum q_(m-j) dr_j for m = 1..n
        J = []
        for m in range(1, n + 1):
            row = []
            for i in range(1, d + 1):
                row.append(r[m - i] if 0 <= m - i <= n - d else ring.zero())
            for j in range(1, n - d + 1):
                row.append(q[m - j] if 0 <= m - j <= d else ring.zero())
            J.append(row)
        rhs = [[residual[m]] for m in range(1, n + 1)]
        try:
            delta = linalg.solve_columns(ring, J, rhs)
        except Exception as exc:
            raise PrecisionExhausted(f"slope factorization linear solve failed: {exc}") from exc
        q = [one] + [q[i] + delta[i - 1][0] for i in range(1, d + 1)]
        r = [one] + [r[j] + delta[d + j - 1][0] for j in range(1, n - d + 1)]
    raise PrecisionExhausted("slope factorization did not converge")


def _series_div_prefix(ring, F: list, Q: list, upto: int) -> list:
    """First ``upto`` coefficients of F / Q for Q with invertible constant."""
    inv0 = ring.inv(Q[0])
    out = []
    for m in range(upto):
        acc = F[m] if m < len(F) else ring.zero()
        for i in range(1, min(m, len(Q) - 1) + 1):
            acc = acc - Q[i] * out[m - i]
        out.append(inv0 * acc)
    return out


def _residual_floor(coeffs) -> Fraction | None:
    """Min valuation over distinguishable-from-zero coefficients.

    None means every coefficient is indistinguishable from zero at its
    stated precision, i.e. the residual is certified zero.
    """
    floors = []
    for c in coeffs:
        scalars = [c] if isinstance(c, PadicScalar) else list(c.coeffs)
        for cc in scalars:
            if not cc.is_zero():
                floors.append(Fraction(cc.val))
    return min(floors) if floors else None


def slope_factorization(
    F: TruncatedSeries, h: Fraction, value_of=None, max_steps: int = 64
):
    """Split F = Q * R with slopes(Q) <= h < slopes(R).

    Returns (Q: PadicPoly, R: TruncatedSeries, polygon), or None when the
    polygon has no certifiable vertex at h (a coefficient sits on, or
    cannot be resolved away from, the slope-h boundary line).  The
    degree-zero split Q = 1 is legitimate and returned when every slope
    certifiably exceeds h.  Raises PrecisionExhausted when the refinement
    cannot certify the factorization at the stored precision.
    """
    ring = F.ring
    h = Fraction(h)
    one = ring.one()
    if not _is_one_like(ring, F.coeffs[0]):
        raise ValueError("slope factorization requires constant term 1")
    vof = value_of or _scalar_val
    polygon = newton_polygon(F, value_of=value_of)
    d = polygon.count_at_most(h)
    # effective degree: all trailing certified-zero coefficients are inert
    n = 0
    for i, c in enumerate(F.coeffs):
        if not ring.is_zero(c):
            n = i
    n = max(n, polygon.span())
    # certify the vertex: every coefficient beyond index d, resolved or
    # not, must lie strictly above the slope-h line through the vertex,
    # otherwise the split is ambiguous at this precision
    vd = _hull_height(list(polygon.vertices), d) if polygon.vertices else Fraction(0)
    for i in range(d + 1, n + 1):
        v_i, floor_i = vof(F.coeffs[i])
        bound = Fraction(v_i) if v_i is not None else Fraction(floor_i)
        if bound <= vd + h * (i - d):
            return None
    if d == 0:
        return PadicPoly(ring, [one]), F, polygon
    a = [F.coeffs[i] for i in range(n + 1)]
    a[0] = one
    if d == n:
        Q = PadicPoly(ring, a)
        rest = TruncatedSeries(ring, [one], F.trunc)
        return Q, rest, polygon
    # peel slope blocks from the bottom; before each extraction, rescale by
    # the integer part of the block slope so the block sits in [0, 1) and
    # the Newton system has small resultant valuation
    q_total = [one]
    rem = a
    for slope, mult in polygon.slopes:
        if slope > h:
            break
        c = slope.numerator // slope.denominator  # floor for nonnegative slopes
        scaled = _rescale(ring, rem, -c)
        qb, rb = _newton_factor(ring, scaled, mult, max_steps)
        q_block = _rescale(ring, qb, c)
        rem = _rescale(ring, rb, c)
        new_total = [ring.zero()] * (len(q_total) + len(q_block) - 1)
        for i, x in enumerate(q_total):
            for j, y in enumerate(q_block):
                new_total[i + j] = new_total[i + j] + x * y
        q_total = new_total
    q = q_total
    r = rem
    Q = PadicPoly(ring, q)
    R = TruncatedSeries(ring, r, F.trunc)
    qpoly = newton_polygon(Q, value_of=value_of)
    if any(s > h for s, _ in qpoly.slopes):
        raise PrecisionExhausted("refined slope-bounded factor has a slope above the bound")
    # only the solved window carries content: R is a polynomial of degree
    # n - d by construction, and the padding beyond it is exactly zero
    for i, c in enumerate(r[1:], start=1):
        v_i, floor_i = vof(c)
        bound = Fraction(v_i) if v_i is not None else Fraction(floor_i)
        if bound <= h * i:
            raise PrecisionExhausted("complement factor kept a slope at or below the bound")
    return Q, R, polygon
