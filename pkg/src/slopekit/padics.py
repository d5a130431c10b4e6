"""Exact arithmetic in Z_p and Q_p at tracked finite precision.

A scalar is stored as p^val * unit known modulo p^prec ("capped absolute
precision"): ``unit`` is coprime to p and reduced mod p^(prec-val), and
``val`` may be negative for field elements.  An element indistinguishable
from zero is stored with unit == 0 and carries only the statement
"valuation >= prec".

Every operation propagates the pessimistic precision bound: a sum is known
to the minimum of the input absolute precisions, a product follows the
usual valuation bookkeeping prec(xy) = min(prec_x + val_y, prec_y + val_x).
No operation ever claims more digits than its inputs justify.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction


@dataclass(frozen=True)
class AtLeast:
    """Valuation lower bound for an element indistinguishable from zero."""

    bound: int

    def __repr__(self) -> str:
        return f"at-least({self.bound})"


def strip_p(p: int, n: int) -> tuple[int, int]:
    """Return (v, u) with n = p^v * u and p coprime to u.  Requires n != 0."""
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v, n


class PadicScalar:
    __slots__ = ("p", "val", "unit", "prec")

    def __init__(self, p: int, val: int, unit: int, prec: int, _normalized: bool = False):
        if _normalized:
            self.p, self.val, self.unit, self.prec = p, val, unit, prec
            return
        # x = p^val * unit, known mod p^prec; reduce to canonical form.
        if prec <= val or unit == 0:
            self.p, self.val, self.unit, self.prec = p, prec, 0, prec
            return
        unit %= p ** (prec - val)
        if unit == 0:
            self.p, self.val, self.unit, self.prec = p, prec, 0, prec
            return
        dv, unit = strip_p(p, unit)
        val += dv
        if val >= prec:
            self.p, self.val, self.unit, self.prec = p, prec, 0, prec
            return
        unit %= p ** (prec - val)
        self.p, self.val, self.unit, self.prec = p, val, unit, prec

    # -- queries ---------------------------------------------------------

    def is_zero(self) -> bool:
        """True when the element is indistinguishable from 0 at its precision."""
        return self.unit == 0

    @property
    def val_floor(self) -> int:
        """Largest k with v_p(x) >= k provable from the stored data."""
        return self.val if self.unit else self.prec

    def valuation(self) -> int | AtLeast:
        if self.unit == 0:
            return AtLeast(self.prec)
        return self.val

    @property
    def rel_prec(self) -> int:
        return self.prec - self.val if self.unit else 0

    def is_unit(self) -> bool:
        return self.unit != 0 and self.val == 0

    def is_invertible(self) -> bool:
        return self.unit != 0

    def lift(self) -> Fraction:
        """A representative in Q with the stored residue."""
        if self.unit == 0:
            return Fraction(0)
        return Fraction(self.unit) * Fraction(self.p) ** self.val

    def residue(self, k: int = 1):
        """The image of x in Z/p^k; requires val >= 0 and prec >= k."""
        if self.val_floor < 0:
            raise ValueError("negative valuation has no residue")
        if self.prec < k:
            from .errors import PrecisionExhausted

            raise PrecisionExhausted(f"residue mod p^{k} needs precision {k}, have {self.prec}")
        if self.unit == 0:
            return 0
        return (self.unit * self.p**self.val) % self.p**k

    # -- arithmetic ------------------------------------------------------

    def _check(self, other: "PadicScalar"):
        if self.p != other.p:
            raise ValueError(f"mixed primes {self.p} and {other.p}")

    def __add__(self, other: "PadicScalar") -> "PadicScalar":
        self._check(other)
        p = self.p
        prec = min(self.prec, other.prec)
        vm = min(self.val_floor, other.val_floor)
        if prec <= vm:
            return PadicScalar(p, prec, 0, prec, _normalized=True)
        m = p ** (prec - vm)
        acc = 0
        if self.unit:
            acc += self.unit * p ** (self.val - vm)
        if other.unit:
            acc += other.unit * p ** (other.val - vm)
        return PadicScalar(p, vm, acc % m, prec)

    def __neg__(self) -> "PadicScalar":
        if self.unit == 0:
            return self
        return PadicScalar(self.p, self.val, -self.unit, self.prec)

    def __sub__(self, other: "PadicScalar") -> "PadicScalar":
        return self + (-other)

    def __mul__(self, other: "PadicScalar") -> "PadicScalar":
        self._check(other)
        p = self.p
        if self.unit == 0 or other.unit == 0:
            prec = self.val_floor + other.val_floor
            return PadicScalar(p, prec, 0, prec, _normalized=True)
        rel = min(self.rel_prec, other.rel_prec)
        val = self.val + other.val
        unit = (self.unit * other.unit) % p**rel
        return PadicScalar(p, val, unit, val + rel)

    def invert(self) -> "PadicScalar":
        if self.unit == 0:
            from .errors import PrecisionExhausted

            raise PrecisionExhausted("cannot invert an element indistinguishable from 0")
        rel = self.rel_prec
        u = pow(self.unit, -1, self.p**rel)
        return PadicScalar(self.p, -self.val, u, -self.val + rel, _normalized=True)

    def __truediv__(self, other: "PadicScalar") -> "PadicScalar":
        return self * other.invert()

    def __pow__(self, n: int) -> "PadicScalar":
        if n < 0:
            return self.invert() ** (-n)
        result = PadicScalar(self.p, 0, 1, max(self.rel_prec, 1), _normalized=True)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def scale_int(self, n: int) -> "PadicScalar":
        """Multiply by an exact integer without precision loss beyond valuation."""
        if n == 0:
            # An exact zero annihilates: the product is 0 to unlimited
            # precision, but we keep the conservative absolute bound.
            return PadicScalar(self.p, self.prec, 0, self.prec, _normalized=True)
        v, u = strip_p(self.p, n)
        if self.unit == 0:
            prec = self.prec + v
            return PadicScalar(self.p, prec, 0, prec, _normalized=True)
        return PadicScalar(self.p, self.val + v, self.unit * u, self.prec + v)

    def with_abs_prec(self, n: int) -> "PadicScalar":
        """Forget digits above p^n (precision can only shrink)."""
        if n >= self.prec:
            return self
        return PadicScalar(self.p, self.val if self.unit else n, self.unit, n)

    # -- comparisons -----------------------------------------------------

    def agrees_with(self, other: "PadicScalar") -> bool:
        """True when x and y coincide to their shared stated precision."""
        return (self - other).is_zero()

    def __eq__(self, other) -> bool:
        if not isinstance(other, PadicScalar):
            return NotImplemented
        return (self.p, self.val, self.unit, self.prec) == (
            other.p,
            other.val,
            other.unit,
            other.prec,
        )

    def __hash__(self):
        return hash((self.p, self.val, self.unit, self.prec))

    def __repr__(self) -> str:
        if self.unit == 0:
            return f"O({self.p}^{self.prec})"
        if self.val == 0:
            return f"{self.unit} + O({self.p}^{self.prec})"
        return f"{self.unit}*{self.p}^{self.val} + O({self.p}^{self.prec})"


class PadicRing:
    """Handle for Z_p (and Q_p) arithmetic at a fixed working precision.

    Also implements the pivoting protocol used by the generic linear
    algebra: ``is_zero``, ``pivot_key``, ``inv``.
    """

    def __init__(self, p: int, prec: int):
        if prec < 1:
            raise ValueError("precision must be >= 1")
        self.p = p
        self.prec = prec

    def __repr__(self):
        return f"PadicRing({self.p}, prec={self.prec})"

    def zero(self) -> PadicScalar:
        return PadicScalar(self.p, self.prec, 0, self.prec, _normalized=True)

    def one(self) -> PadicScalar:
        return self.from_int(1)

    def from_int(self, n: int, prec: int | None = None) -> PadicScalar:
        prec = self.prec if prec is None else prec
        if n == 0:
            return PadicScalar(self.p, prec, 0, prec, _normalized=True)
        v, u = strip_p(self.p, n)
        return PadicScalar(self.p, v, u, v + prec)

    def from_fraction(self, q: Fraction, prec: int | None = None) -> PadicScalar:
        prec = self.prec if prec is None else prec
        if q == 0:
            return PadicScalar(self.p, prec, 0, prec, _normalized=True)
        vn, un = strip_p(self.p, q.numerator)
        vd, ud = strip_p(self.p, q.denominator)
        v = vn - vd
        u = (un * pow(ud, -1, self.p**prec)) % self.p**prec
        return PadicScalar(self.p, v, u, v + prec)

    def from_unit_rel(self, val: int, unit: int, rel: int) -> PadicScalar:
        return PadicScalar(self.p, val, unit, val + rel)

    def p_power(self, k: int) -> PadicScalar:
        """p^k as an exact element (k may be negative)."""
        return PadicScalar(self.p, k, 1, k + self.prec, _normalized=True)

    # linear algebra protocol

    def is_zero(self, x: PadicScalar) -> bool:
        return x.is_zero()

    def pivot_key(self, x: PadicScalar):
        return None if x.is_zero() else (x.val, -x.prec)

    def inv(self, x: PadicScalar) -> PadicScalar:
        return x.invert()

    def fmt(self, x: PadicScalar) -> dict:
        if x.is_zero():
            return {"v": None, "u": 0, "N": x.prec}
        return {"v": x.val, "u": x.unit, "N": x.prec}


def valuation(x: PadicScalar) -> int | AtLeast:
    """v_p(x), or the lower bound at-least(N) when x is indistinguishable
    from zero at its stated precision."""
    return x.valuation()


def teichmuller(ring: PadicRing, x: PadicScalar) -> PadicScalar:
    """The Teichmuller representative congruent to the unit x mod p."""
    if not x.is_unit():
        raise ValueError("Teichmuller lift needs a p-adic unit")
    p, prec = ring.p, x.prec
    m = p**prec
    t = x.unit % p
    # x^(p^n) stabilizes to the (p-1)-st root of unity in x's residue class.
    while True:
        t_next = pow(t, p, m)
        if t_next == t:
            break
        t = t_next
    return PadicScalar(p, 0, t, prec)


def principal_part(ring: PadicRing, x: PadicScalar) -> PadicScalar:
    """<x> = x / teichmuller(x), the 1 + pZ_p component of a unit."""
    return x * teichmuller(ring, x).invert()


def padic_log_principal(ring: PadicRing, x: PadicScalar) -> PadicScalar:
    """log_p on principal units (x = 1 mod p), to the precision of x.

    Uses the series log(1+u) = sum (-1)^(n+1) u^n / n; the term count is
    chosen so the dropped tail is below the target precision.
    """
    p = ring.p
    u = x - ring.one()
    if not u.is_zero() and u.val < 1:
        raise ValueError("padic_log_principal needs x = 1 mod p")
    target = x.prec
    if u.is_zero():
        return ring.zero().with_abs_prec(target)
    # v_p(u^n / n) >= n*val(u) - log_p(n); n_max below makes the tail clear target.
    n_max = 1
    while n_max * u.val - _ilog(p, n_max) < target:
        n_max += 1
    total = ring.zero().with_abs_prec(target)
    power = u
    for n in range(1, n_max + 1):
        term = power * ring.from_fraction(Fraction((-1) ** (n + 1), n), prec=target)
        total = total + term.with_abs_prec(target)
        power = power * u
    return total


def _ilog(p: int, n: int) -> int:
    k = 0
    while p**(k + 1) <= n:
        k += 1
    return k
