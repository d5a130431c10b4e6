"""Generic dense linear algebra over precision-tracked rings.

All routines take a ``ring`` handle implementing the small protocol

    zero(), one(), is_zero(e), pivot_key(e), inv(e)

while elements themselves support +, -, * and unary minus.  Rings used in
practice: PadicRing, FamilyRing (truncated weight algebra) and the exact
RationalField below.  Pivots are chosen by minimal pivot_key, which for
p-adic rings means minimal valuation: this preserves as much certified
precision as the input allows.

The characteristic polynomial uses the Berkowitz algorithm, which is
division free, so it works verbatim over the truncated family ring.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import InvariantViolation

Matrix = list  # list of rows


class RationalField:
    """Exact rationals under the same protocol, for oracle computations."""

    def zero(self):
        return Fraction(0)

    def one(self):
        return Fraction(1)

    def from_int(self, n: int):
        return Fraction(n)

    def is_zero(self, x) -> bool:
        return x == 0

    def pivot_key(self, x):
        return None if x == 0 else (0, 0)

    def inv(self, x):
        return Fraction(1) / x


QQ = RationalField()


def zeros(ring, m: int, n: int) -> Matrix:
    return [[ring.zero() for _ in range(n)] for _ in range(m)]


def identity(ring, n: int) -> Matrix:
    out = zeros(ring, n, n)
    one = ring.one()
    for i in range(n):
        out[i][i] = one
    return out


def mat_mul(ring, A: Matrix, B: Matrix) -> Matrix:
    n, k = len(A), len(B)
    m = len(B[0]) if k else 0
    out = []
    for i in range(n):
        Ai = A[i]
        row = []
        for j in range(m):
            acc = ring.zero()
            for t in range(k):
                acc = acc + Ai[t] * B[t][j]
            row.append(acc)
        out.append(row)
    return out


def mat_vec(ring, A: Matrix, v: list) -> list:
    out = []
    for row in A:
        acc = ring.zero()
        for a, x in zip(row, v):
            acc = acc + a * x
        out.append(acc)
    return out


def mat_add(A: Matrix, B: Matrix) -> Matrix:
    return [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def mat_sub(A: Matrix, B: Matrix) -> Matrix:
    return [[a - b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def mat_neg(A: Matrix) -> Matrix:
    return [[-a for a in row] for row in A]


def mat_scale(A: Matrix, c) -> Matrix:
    return [[c * a for a in row] for row in A]


def transpose(A: Matrix) -> Matrix:
    return [list(col) for col in zip(*A)]


def _echelonize(ring, M: Matrix, ncols: int):
    """In-place full-pivot elimination.

    Returns (rank, col_perm, sign): after the call M is upper triangular in
    the permuted column order, with pivots on the diagonal of the leading
    block; sign is the parity of all row and column swaps performed.
    """
    m = len(M)
    col_perm = list(range(ncols))
    sign = 1
    r = 0
    while r < min(m, ncols):
        best = None
        best_key = None
        for i in range(r, m):
            row = M[i]
            for j in range(r, ncols):
                key = ring.pivot_key(row[col_perm[j]])
                if key is not None and (best_key is None or key < best_key):
                    best, best_key = (i, j), key
        if best is None:
            break
        bi, bj = best
        if bi != r:
            M[r], M[bi] = M[bi], M[r]
            sign = -sign
        if bj != r:
            col_perm[r], col_perm[bj] = col_perm[bj], col_perm[r]
            sign = -sign
        inv_piv = ring.inv(M[r][col_perm[r]])
        for i in range(r + 1, m):
            lead = M[i][col_perm[r]]
            if ring.is_zero(lead):
                continue
            factor = lead * inv_piv
            Mi, Mr = M[i], M[r]
            for j in range(r, ncols):
                c = col_perm[j]
                Mi[c] = Mi[c] - factor * Mr[c]
            Mi[col_perm[r]] = ring.zero()
        r += 1
    return r, col_perm, sign


def rank(ring, A: Matrix, ncols: int | None = None) -> int:
    if not A:
        return 0
    M = [row[:] for row in A]
    r, _, _ = _echelonize(ring, M, len(A[0]) if ncols is None else ncols)
    return r


def kernel_basis(ring, A: Matrix, ncols: int) -> list[list]:
    """A basis of ker(A) as a list of length-ncols vectors.

    Over p-adic rings the result is certified at whatever precision the
    back-substitution divisions leave; pivoting by minimal valuation keeps
    that loss minimal.
    """
    if not A:
        return [
            [ring.one() if i == j else ring.zero() for i in range(ncols)]
            for j in range(ncols)
        ]
    M = [row[:] for row in A]
    r, col_perm, _ = _echelonize(ring, M, ncols)
    basis = []
    for free_pos in range(r, ncols):
        x = [ring.zero()] * ncols
        x[col_perm[free_pos]] = ring.one()
        for i in range(r - 1, -1, -1):
            acc = M[i][col_perm[free_pos]]
            for j in range(i + 1, r):
                c = col_perm[j]
                if not ring.is_zero(x[c]):
                    acc = acc + M[i][c] * x[c]
            x[col_perm[i]] = -(acc * ring.inv(M[i][col_perm[i]]))
        basis.append(x)
    return basis


def solve_columns(ring, A: Matrix, B: Matrix) -> Matrix:
    """Solve A X = B for A with independent columns; raises if inconsistent.

    A is m x r with r <= m, B is m x s.  The consistency residual (rows of
    the eliminated augmented matrix beyond the rank) must vanish at stated
    precision, otherwise the input did not lie in the column span and we
    flag an internal invariant violation.
    """
    m = len(A)
    r = len(A[0]) if m else 0
    s = len(B[0]) if B and B[0] is not None else 0
    aug = [A[i][:] + B[i][:] for i in range(m)]
    M = aug
    # eliminate only on the first r columns, full row pivoting
    col_perm = list(range(r))
    rk = 0
    while rk < r:
        best, best_key = None, None
        for i in range(rk, m):
            for j in range(rk, r):
                key = ring.pivot_key(M[i][col_perm[j]])
                if key is not None and (best_key is None or key < best_key):
                    best, best_key = (i, j), key
        if best is None:
            break
        bi, bj = best
        M[rk], M[bi] = M[bi], M[rk]
        col_perm[rk], col_perm[bj] = col_perm[bj], col_perm[rk]
        inv_piv = ring.inv(M[rk][col_perm[rk]])
        for i in range(rk + 1, m):
            lead = M[i][col_perm[rk]]
            if ring.is_zero(lead):
                continue
            factor = lead * inv_piv
            for j in range(r + s):
                M[i][j] = M[i][j] - factor * M[rk][j]
            M[i][col_perm[rk]] = ring.zero()
        rk += 1
    if rk < r:
        raise InvariantViolation("solve_columns: matrix does not have full column rank")
    for i in range(rk, m):
        for j in range(r, r + s):
            if not ring.is_zero(M[i][j]):
                raise InvariantViolation("solve_columns: inconsistent system beyond stated precision")
    X = zeros(ring, r, s)
    for col in range(s):
        for i in range(rk - 1, -1, -1):
            acc = M[i][r + col]
            for j in range(i + 1, rk):
                acc = acc - M[i][col_perm[j]] * X[col_perm[j]][col]
            X[col_perm[i]][col] = acc * ring.inv(M[i][col_perm[i]])
    return X


def determinant(ring, A: Matrix):
    """Determinant via pivoted elimination (sign-tracked)."""
    n = len(A)
    if n == 0:
        return ring.one()
    M = [row[:] for row in A]
    r, col_perm, sign = _echelonize(ring, M, n)
    if r < n:
        return ring.zero()
    det = ring.one()
    for i in range(n):
        det = det * M[i][col_perm[i]]
    return det if sign > 0 else -det


def charpoly_monic(ring, A: Matrix) -> list:
    """Berkowitz: coefficients [1, c1, ..., cn] of det(x I - A).

    Division free, hence valid over any commutative coefficient ring,
    including the truncated weight algebra.
    """
    n = len(A)
    poly = [ring.one()]
    for k in range(1, n + 1):
        # principal k x k block, partitioned with a = A[k-1][k-1]
        a = A[k - 1][k - 1]
        R = A[k - 1][: k - 1]
        C = [A[i][k - 1] for i in range(k - 1)]
        # first column of the Toeplitz transfer matrix
        c = [ring.one(), -a]
        w = C[:]
        for _ in range(k - 1):
            acc = ring.zero()
            for rr, ww in zip(R, w):
                acc = acc + rr * ww
            c.append(-acc)
            w_next = []
            for i in range(k - 1):
                s = ring.zero()
                Ai = A[i]
                for t in range(k - 1):
                    s = s + Ai[t] * w[t]
                w_next.append(s)
            w = w_next
        new_poly = []
        for m in range(k + 1):
            acc = ring.zero()
            for j in range(max(0, m - k + 1), min(m, k) + 1):
                if j < len(c) and m - j < len(poly):
                    acc = acc + c[j] * poly[m - j]
            new_poly.append(acc)
        poly = new_poly
    return poly


def rev_charpoly(ring, A: Matrix) -> list:
    """Coefficients of det(1 - T A) by degree; equals charpoly_monic read
    in the reversed variable, since det(1 - TA) = T^n det((1/T)I - A)."""
    return charpoly_monic(ring, A)
