"""Exact-rational classical modular symbols: the independent oracle.

This module is deliberately self-contained (standard library only) and
uses a different model from symbols.py: symbols of weight k+2 for the
Hecke congruence group of level m are presented as the quotient of the
free module on pairs (monomial degree i <= k, projective point), modulo
the two- and three-term rotation relations, with Hecke operators given by
Heilbronn-Merel matrices summed over the free module.  Everything is a
Fraction; nothing here touches p-adic precision, moment truncations, or
the solved presentation, which is what makes it a trustworthy cross-check
for the overconvergent route.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, gcd


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def _lift_unit(m: int, d: int, a: int) -> int:
    if gcd(a, m) == 1:
        return a % m
    u, v = 1, m
    g = gcd(v, d)
    while g > 1:
        u *= g
        v //= g
        g = gcd(v, g)
    _, x, y = _xgcd(u, v)
    return (u * x + a * y * v) % m


class _P1:
    def __init__(self, m: int):
        self.m = m
        pts = set()
        for c in range(m):
            for d in range(m):
                if gcd(gcd(c, d), m) == 1:
                    pts.add(self.reduce(c, d))
        self.points = sorted(pts)
        self.index = {pt: i for i, pt in enumerate(self.points)}

    def reduce(self, c: int, d: int) -> tuple[int, int]:
        m = self.m
        c %= m
        d %= m
        if m == 1:
            return (0, 0)
        if c == 0:
            return (0, 1)
        g, s, _ = _xgcd(c, m)
        s = _lift_unit(m, m // g, s % m)
        c, d = g, (s * d) % m
        if g == 1:
            return (1, d)
        d = min((d * t) % m for t in range(1, m, m // g) if gcd(t, m) == 1)
        return (g, d)

    def try_index(self, c: int, d: int) -> int | None:
        if gcd(gcd(c % self.m, d % self.m), self.m) != 1:
            return None
        return self.index[self.reduce(c, d)]


def _rref(mat: list[list[Fraction]]) -> tuple[list[list[Fraction]], list[int]]:
    rows = [row[:] for row in mat]
    nrows = len(rows)
    ncols = len(rows[0]) if rows else 0
    pivots = []
    r = 0
    for c in range(ncols):
        pivot_row = None
        for i in range(r, nrows):
            if rows[i][c] != 0:
                pivot_row = i
                break
        if pivot_row is None:
            continue
        rows[r], rows[pivot_row] = rows[pivot_row], rows[r]
        inv = Fraction(1) / rows[r][c]
        rows[r] = [x * inv for x in rows[r]]
        for i in range(nrows):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return rows, pivots


def heilbronn_merel(n: int):
    """Merel's set of integral matrices of determinant n."""
    for a in range(1, n + 1):
        for d in range((n + a - 1) // a, n + 2 - a):
            bc = a * d - n
            if bc == 0:
                for b in range(a):
                    yield (a, b, 0, d)
                for c in range(1, d):
                    yield (a, 0, c, d)
            else:
                for b in range((bc - 1) // (d - 1) + 1, a):
                    if bc % b == 0:
                        yield (a, b, bc // b, d)


@dataclass
class ClassicalSpace:
    """Weight k+2 modular symbols of level m, over exact rationals."""

    m: int
    k: int
    p1: _P1
    free: list[int]  # indices of the quotient basis inside the full symbol list
    proj: list[list[Fraction]]  # dim x nsyms projection onto the basis
    symbols: list[tuple[int, int, int]]  # (i, c, d)

    @property
    def dim(self) -> int:
        return len(self.free)

    def _sym_index(self, i: int, c: int, d: int) -> int:
        return i * len(self.p1.points) + self.p1.index[self.p1.reduce(c, d)]

    def hecke_matrix(self, n: int) -> list[list[Fraction]]:
        """T_n via Heilbronn-Merel matrices (equals U_n for n | m)."""
        k = self.k
        npts = len(self.p1.points)
        cols: list[list[Fraction]] = []
        for col, sym_idx in enumerate(self.free):
            i, c, d = self.symbols[sym_idx]
            image = [Fraction(0)] * len(self.symbols)
            for a, b, cc, dd in heilbronn_merel(n):
                idx = self.p1.try_index(c * a + d * cc, c * b + d * dd)
                if idx is None:
                    continue
                # X^i Y^(k-i) composed with (aX+bY, ccX+ddY)
                coeffs = _poly_shift_mul(a, b, cc, dd, i, k)
                for j, cf in enumerate(coeffs):
                    if cf:
                        image[j * npts + idx] += cf
            cols.append(self._project(image))
        return [[cols[c][r] for c in range(self.dim)] for r in range(self.dim)]

    def _project(self, vec: list[Fraction]) -> list[Fraction]:
        out = [Fraction(0)] * self.dim
        for r in range(self.dim):
            row = self.proj[r]
            acc = Fraction(0)
            for idx, v in enumerate(vec):
                if v:
                    acc += row[idx] * v
            out[r] = acc
        return out

    def boundary_matrix(self) -> list[list[Fraction]]:
        """Map to boundary symbols; its kernel is the cuspidal subspace."""
        cusps: list[tuple[int, int]] = []

        def cusp_index(a: int, c: int) -> int:
            for idx, (a2, c2) in enumerate(cusps):
                if self._cusp_equiv(a, c, a2, c2):
                    return idx
            cusps.append((a, c))
            return len(cusps) - 1

        cols = []
        for sym_idx in self.free:
            i, c, d = self.symbols[sym_idx]
            g, a, b = _xgcd(d, -c)
            if g != 1:
                raise ValueError("non-coprime symbol pair; presentation bug")
            col: dict[int, Fraction] = {}
            top = cusp_index(a, c)
            bot = cusp_index(b, d)
            if i == self.k:
                col[top] = col.get(top, Fraction(0)) + 1
            if i == 0:
                col[bot] = col.get(bot, Fraction(0)) - 1
            cols.append(col)
        rows = len(cusps)
        out = [[Fraction(0)] * self.dim for _ in range(rows)]
        for j, col in enumerate(cols):
            for r, v in col.items():
                out[r][j] = v
        return out

    def _cusp_equiv(self, a1: int, c1: int, a2: int, c2: int) -> bool:
        m = self.m
        s1 = _xgcd(a1, c1)[1]
        s2 = _xgcd(a2, c2)[1]
        g = gcd(c1 * c2 % m, m)
        return (s1 * c2 - s2 * c1) % g == 0

    def cuspidal_rank(self) -> int:
        B = self.boundary_matrix()
        if not B:
            return self.dim
        _, pivots = _rref(B)
        return self.dim - len(pivots)

    def cuspidal_basis(self) -> list[list[Fraction]]:
        B = self.boundary_matrix()
        rows, pivots = _rref(B)
        free_cols = [c for c in range(self.dim) if c not in pivots]
        basis = []
        for fc in free_cols:
            v = [Fraction(0)] * self.dim
            v[fc] = Fraction(1)
            for r, pc in enumerate(pivots):
                v[pc] = -rows[r][fc]
            basis.append(v)
        return basis


def _poly_shift_mul(a: int, b: int, c: int, d: int, i: int, k: int) -> list[Fraction]:
    """Coefficients of (aX + bY)^i (cX + dY)^(k-i) on X^j Y^(k-j)."""
    first = [Fraction(comb(i, t)) * a**t * b ** (i - t) for t in range(i + 1)]
    second = [Fraction(comb(k - i, t)) * c**t * d ** (k - i - t) for t in range(k - i + 1)]
    out = [Fraction(0)] * (k + 1)
    for t1, v1 in enumerate(first):
        if not v1:
            continue
        for t2, v2 in enumerate(second):
            out[t1 + t2] += v1 * v2
    return out


def classical_space(N: int, p: int, k: int) -> ClassicalSpace:
    """Exact model of weight-(k+2) symbols of level N*p with Hecke action.

    k must be a nonnegative even integer (odd k vanishes for these groups).
    """
    if k < 0:
        raise ValueError("dominant weights only: k >= 0")
    m = N * p
    if m <= 3:
        raise ValueError("level must exceed 3")
    p1 = _P1(m)
    npts = len(p1.points)
    symbols = [(i, c, d) for i in range(k + 1) for (c, d) in p1.points]
    nsyms = len(symbols)

    def index(i, c, d):
        return i * npts + p1.index[p1.reduce(c, d)]

    rows: list[list[Fraction]] = []
    for i, c, d in symbols:
        row = [Fraction(0)] * nsyms
        row[index(i, c, d)] += 1
        row[index(k - i, d, -c)] += Fraction((-1) ** i)
        rows.append(row)
        row2 = [Fraction(0)] * nsyms
        row2[index(i, c, d)] += 1
        for j in range(k - i + 1):
            row2[index(j, d, -c - d)] += Fraction((-1) ** (k + j) * comb(k - i, j))
        for j in range(i + 1):
            row2[index(k - i + j, -c - d, c)] += Fraction((-1) ** (k - i + j) * comb(i, j))
        rows.append(row2)

    reduced, pivots = _rref(rows)
    free = [c for c in range(nsyms) if c not in pivots]
    dim = len(free)
    proj = [[Fraction(0)] * nsyms for _ in range(dim)]
    for r, col in enumerate(free):
        proj[r][col] = Fraction(1)
    for e, pc in enumerate(pivots):
        for r, fc in enumerate(free):
            proj[r][pc] = -reduced[e][fc]
    return ClassicalSpace(m=m, k=k, p1=p1, free=free, proj=proj, symbols=symbols)


def charpoly_rational(mat: list[list[Fraction]]) -> list[Fraction]:
    """Monic characteristic polynomial coefficients [1, c1, ..., cn]."""
    n = len(mat)
    poly = [Fraction(1)]
    for kk in range(1, n + 1):
        a = mat[kk - 1][kk - 1]
        R = mat[kk - 1][: kk - 1]
        C = [mat[i][kk - 1] for i in range(kk - 1)]
        cvec = [Fraction(1), -a]
        w = C[:]
        for _ in range(kk - 1):
            acc = sum((r * x for r, x in zip(R, w)), Fraction(0))
            cvec.append(-acc)
            w = [sum((mat[i][t] * w[t] for t in range(kk - 1)), Fraction(0)) for i in range(kk - 1)]
        new_poly = []
        for mdeg in range(kk + 1):
            acc = Fraction(0)
            for j in range(len(cvec)):
                if j <= mdeg and mdeg - j < len(poly):
                    acc += cvec[j] * poly[mdeg - j]
            new_poly.append(acc)
        poly = new_poly
    return poly
