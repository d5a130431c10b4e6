"""Finite presentation of the symbol space and its Hecke action.

The symbol space at level N (tame) and prime p is modeled on cosets of the
congruence subgroup of SL_2(Z) of level m = N p, indexed by the projective
line over Z/m.  A symbol assigns a coefficient-module value to each coset
representative, subject to the two- and three-term relations coming from
the order-4 and order-6 rotations; by equivariance every relation is
written with explicit group elements of the congruence subgroup, which lie
in the acting monoid, so the same presentation serves polynomial and
distribution coefficients alike.

Relations are solved symbolically over the group ring: a generator is
eliminated only against a single +-gamma term, which is invertible for
every coefficient module at once.  Whatever cannot be eliminated that way
stays behind as residual relation rows (torsion phenomena at small levels,
plus the one globally redundant relation); the honest symbol space is the
kernel of the residual rows over the chosen coefficient ring.

Hecke operators act through coset representatives delta_j on paths between
cusps; paths are decomposed into unimodular ones by the continued-fraction
trick, so the whole action is assembled from matrices of the congruence
subgroup composed with the delta_j, all inside the acting monoid.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd

from . import linalg
from .distributions import (
    FamilyDistribution,
    MomentDistribution,
    Sigma0Matrix,
    action_matrix,
    apply_moment_matrix,
    classical_action_matrix,
)
from .errors import ConfigError, InvariantViolation, MathFailure, UnsupportedLevel
from .linalg import QQ
from .padics import PadicRing
from .weights import ArithmeticWeight, FamilyRing, WeightDisk

Mat2 = tuple[int, int, int, int]  # (a, b, c, d) row-major

IDENT: Mat2 = (1, 0, 0, 1)
SIG: Mat2 = (0, -1, 1, 0)
TAU: Mat2 = (0, -1, 1, -1)


def m2mul(x: Mat2, y: Mat2) -> Mat2:
    return (
        x[0] * y[0] + x[1] * y[2],
        x[0] * y[1] + x[1] * y[3],
        x[2] * y[0] + x[3] * y[2],
        x[2] * y[1] + x[3] * y[3],
    )


def m2det(x: Mat2) -> int:
    return x[0] * x[3] - x[1] * x[2]


def m2inv_unimodular(x: Mat2) -> Mat2:
    if m2det(x) != 1:
        raise InvariantViolation("inverse requested for a non-unimodular matrix")
    return (x[3], -x[1], -x[2], x[0])


def xgcd(a: int, b: int) -> tuple[int, int, int]:
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


class ProjectiveLine:
    """P^1(Z/m): canonical representatives, indexing, right SL2 action."""

    def __init__(self, m: int):
        self.m = m
        seen = {}
        for c in range(m):
            for d in range(m):
                if gcd(gcd(c, d), m) != 1:
                    continue
                key = self.normalize(c, d)
                if key not in seen:
                    seen[key] = None
        self._list = sorted(seen)
        self._index = {cd: i for i, cd in enumerate(self._list)}

    def __len__(self):
        return len(self._list)

    def __iter__(self):
        return iter(self._list)

    def __getitem__(self, i):
        return self._list[i]

    def normalize(self, c: int, d: int) -> tuple[int, int]:
        m = self.m
        if m == 1:
            return (0, 0)
        c %= m
        d %= m
        if c == 0:
            if gcd(d, m) != 1:
                raise ValueError("not a projective point")
            return (0, 1)
        g, s, _ = xgcd(c, m)
        if gcd(gcd(g, d), m) != 1:
            raise ValueError("not a projective point")
        # scale by the unit s (s*c = g mod m), lifted to a unit mod m
        s %= m
        s = _lift_unit(m, m // g, s)
        c2, d2 = g, (s * d) % m
        if g == 1:
            return (1, d2)
        # the stabilizer of (g : *) still scales d by units congruent to 1 mod m/g
        best = None
        for t in range(1, m, m // g):
            if gcd(t, m) == 1:
                cand = (d2 * t) % m
                if best is None or cand < best:
                    best = cand
        return (g, best)

    def index_of(self, c: int, d: int) -> int:
        return self._index[self.normalize(c, d)]

    def act_right(self, i: int, g: Mat2) -> int:
        c, d = self._list[i]
        a, b, cc, dd = g
        return self.index_of(c * a + d * cc, c * b + d * dd)


def _lift_unit(m: int, d: int, a: int) -> int:
    """Lift a unit a mod d (d | m) to a unit mod m (CRT with 1)."""
    if gcd(a, m) == 1:
        return a % m
    u, v = 1, m
    g = gcd(v, d)
    while g > 1:
        u *= g
        v //= g
        g = gcd(v, g)
    _, x, y = xgcd(u, v)
    return (u * x + a * y * v) % m


def lift_to_sl2(m: int, c: int, d: int) -> Mat2:
    """A matrix (a b; c' d') in SL2(Z) with bottom row = (c, d) mod m."""
    c %= m
    d %= m
    if c == 0 and d % m == 1 % m:
        return IDENT
    if c == 0:
        c = m
    dd = d
    while gcd(c, dd) != 1:
        dd += m
    g, x, y = xgcd(c, dd)
    if g != 1:
        raise InvariantViolation("cusp lift failed")
    # a*dd - b*c = 1 with a = y, b = -x
    return (y, -x, c, dd)


# -- presentation -----------------------------------------------------------

Term = tuple[int, Mat2, int]  # (coefficient, matrix acting on the right, generator)


def _combine(terms: list[Term]) -> list[Term]:
    acc: dict[tuple[int, Mat2], int] = {}
    for coef, mat, gen in terms:
        key = (gen, mat)
        acc[key] = acc.get(key, 0) + coef
    out = [(coef, mat, gen) for (gen, mat), coef in sorted(acc.items()) if coef != 0]
    return out


@dataclass
class SymbolSpacePresentation:
    level: int
    prime: int
    generators: list[tuple[int, int]]  # projective points (c, d)
    gen_matrices: list[Mat2]  # SL2 lifts, bottom row = generator mod m
    relations: list[list[Term]]  # original two- and three-term rows
    solved_basis: list[int]  # free generator indices
    eliminated: dict[int, list[Term]]  # gen -> expression in free generators
    residual_rows: list[list[Term]]  # leftover rows, in free generators
    projector_rows: dict  # protected gen -> its single-generator torsion row
    p1: ProjectiveLine

    @property
    def m(self) -> int:
        return self.level * self.prime

    @property
    def rank(self) -> int:
        return len(self.solved_basis)

    def coset_of(self, u: Mat2) -> tuple[int, Mat2]:
        """Index i and gamma with u = gamma * g_i, gamma in the subgroup."""
        i = self.p1.index_of(u[2], u[3])
        gamma = m2mul(u, m2inv_unimodular(self.gen_matrices[i]))
        if gamma[2] % self.m != 0:
            raise InvariantViolation("coset identification left the subgroup")
        return i, gamma

    def resolve_to_free(self, gen: int, mat: Mat2, coef: int = 1) -> list[Term]:
        """Rewrite coef * (v_gen | mat) as terms on free generators."""
        if gen not in self.eliminated:
            return [(coef, mat, gen)]
        out: list[Term] = []
        for c2, m2, src in self.eliminated[gen]:
            out.extend(self.resolve_to_free(src, m2mul(m2, mat), coef * c2))
        return _combine(out)

    def json(self) -> dict:
        return {
            "level": self.level,
            "prime": self.prime,
            "generators": [list(g) for g in self.generators],
            "basis": list(self.solved_basis),
            "relations": [
                [[c, list(m), g] for c, m, g in row] for row in self.relations
            ],
            "residual_rows": [
                [[c, list(m), g] for c, m, g in row] for row in self.residual_rows
            ],
        }


def _is_protected_row(row: list[Term], protected: dict) -> bool:
    gens = {g for _, _, g in row}
    return len(gens) == 1 and next(iter(gens)) in protected


def build_presentation(N: int, p: int) -> SymbolSpacePresentation:
    """Generators, relations, and a solved free basis at level N p.

    Deterministic for fixed input.  The greedy elimination only ever
    pivots on single +-gamma terms, so the resulting expressions are valid
    over every coefficient module with a monoid action.  Generators fixed
    by a rotation (torsion at the level) are protected from elimination;
    their single-generator relations become exact idempotent projectors in
    any coefficient module where 6 is invertible, which is how torsion is
    excised without precision loss.
    """
    if gcd(N, p) != 1:
        raise ConfigError("tame level must be coprime to p")
    m = N * p
    if m <= 3:
        raise UnsupportedLevel("level N*p must exceed 3")
    p1 = ProjectiveLine(m)
    generators = list(p1)
    gen_matrices = [lift_to_sl2(m, c, d) for c, d in generators]
    n = len(generators)

    def relation_row(i: int, rot: Mat2, count: int) -> list[Term]:
        row: list[Term] = [(1, IDENT, i)]
        g = gen_matrices[i]
        acc = g
        for _ in range(count):
            acc = m2mul(acc, rot)
            j = p1.index_of(acc[2], acc[3])
            gamma = m2mul(acc, m2inv_unimodular(gen_matrices[j]))
            if gamma[2] % m != 0 or m2det(gamma) != 1:
                raise InvariantViolation("relation matrix left the subgroup")
            row.append((1, m2inv_unimodular(gamma), j))
        return _combine(row)

    relations: list[list[Term]] = []
    protected: dict[int, list[Term]] = {}
    seen_orbits = set()
    for i in range(n):
        if i not in seen_orbits:
            j = p1.act_right(i, SIG)
            seen_orbits.update({i, j})
            row = relation_row(i, SIG, 1)
            relations.append(row)
            if j == i:
                protected[i] = row
    seen_orbits = set()
    for i in range(n):
        if i not in seen_orbits:
            j = p1.act_right(i, TAU)
            k = p1.act_right(j, TAU)
            seen_orbits.update({i, j, k})
            row = relation_row(i, TAU, 2)
            relations.append(row)
            if j == i and k == i:
                protected[i] = row

    eliminated: dict[int, list[Term]] = {}
    pending = [list(row) for row in relations if not _is_protected_row(row, protected)]
    residual: list[list[Term]] = []

    def substitute(row: list[Term]) -> list[Term]:
        # expand to fixpoint: expressions recorded earlier may reference
        # generators that were eliminated later
        while True:
            out: list[Term] = []
            changed = False
            for coef, mat, gen in row:
                if gen in eliminated:
                    changed = True
                    for c2, m2, src in eliminated[gen]:
                        out.append((coef * c2, m2mul(m2, mat), src))
                else:
                    out.append((coef, mat, gen))
            row = _combine(out)
            if not changed:
                return row

    progress = True
    while progress:
        progress = False
        next_pending = []
        for row in pending:
            row = substitute(row)
            if not row:
                continue  # dependent relation, exactly zero at group-ring level
            pivot = None
            gens_in_row: dict[int, int] = {}
            for coef, mat, gen in row:
                gens_in_row[gen] = gens_in_row.get(gen, 0) + 1
            for idx, (coef, mat, gen) in enumerate(row):
                if abs(coef) == 1 and gens_in_row[gen] == 1 and gen not in protected:
                    pivot = idx
                    break
            if pivot is None:
                next_pending.append(row)
                continue
            coef, mat, gen = row[pivot]
            inv = m2inv_unimodular(mat)
            expr: list[Term] = []
            for c2, m2, g2 in row[:pivot] + row[pivot + 1 :]:
                expr.append((-coef * c2, m2mul(m2, inv), g2))
            eliminated[gen] = _combine(expr)
            progress = True
        pending = next_pending
    for row in pending:
        row = substitute(row)
        if row:
            residual.append(row)

    solved = [i for i in range(n) if i not in eliminated]
    pres = SymbolSpacePresentation(
        level=N,
        prime=p,
        generators=generators,
        gen_matrices=gen_matrices,
        relations=relations,
        solved_basis=solved,
        eliminated=eliminated,
        residual_rows=[],
        projector_rows=protected,
        p1=p1,
    )
    # resolve residual rows and stored expressions all the way to free gens
    pres.residual_rows = [
        _combine(
            [
                t
                for coef, mat, gen in row
                for t in pres.resolve_to_free(gen, mat, coef)
            ]
        )
        for row in residual
    ]
    pres.eliminated = {
        g: pres.resolve_to_free(g, IDENT, 1) for g in list(eliminated)
    }
    return pres


# -- cusps and paths ---------------------------------------------------------

Cusp = tuple[int, int]  # (numerator, denominator >= 0), gcd 1; infinity = (1, 0)


def normalize_cusp(num: int, den: int) -> Cusp:
    if den == 0:
        return (1, 0)
    g = gcd(abs(num), abs(den))
    if g:
        num //= g
        den //= g
    if den < 0:
        num, den = -num, -den
    return (num, den)


def apply_mat_to_cusp(g: Mat2, cusp: Cusp) -> Cusp:
    a, b, c, d = g
    num, den = cusp
    return normalize_cusp(a * num + b * den, c * num + d * den)


def _convergent_matrices(r: Cusp) -> list[Mat2]:
    """Unimodular matrices whose paths telescope from infinity to r."""
    num, den = r
    if den == 0:
        return []
    quotients = []
    a, b = num, den
    while b:
        q = a // b
        quotients.append(q)
        a, b = b, a - q * b
    mats = []
    p_prev, q_prev = 1, 0  # convergent -1
    p_cur, q_cur = quotients[0], 1
    sign = -1  # (-1)^(i-1) for i = 0
    mats.append((p_cur, sign * p_prev, q_cur, sign * q_prev))
    for i, q in enumerate(quotients[1:], start=1):
        p_nxt, q_nxt = q * p_cur + p_prev, q * q_cur + q_prev
        sign = 1 if i % 2 == 1 else -1
        mats.append((p_nxt, sign * p_cur, q_nxt, sign * q_cur))
        p_prev, q_prev, p_cur, q_cur = p_cur, q_cur, p_nxt, q_nxt
    for M in mats:
        if m2det(M) != 1:
            raise InvariantViolation("convergent matrix is not unimodular")
    return mats


def path_terms(from_cusp: Cusp, to_cusp: Cusp) -> list[tuple[int, Mat2]]:
    """Phi({to} - {from}) as signed unimodular evaluations.

    Each matrix M contributes sign * phi(M), where phi(M) evaluates the
    symbol on the path {M 0} - {M infinity}.
    """
    out: list[tuple[int, Mat2]] = []
    # {r} - {infinity} = - sum of convergent paths (which telescope the
    # other way), applied with +1 for the target and -1 for the source
    for M in _convergent_matrices(to_cusp):
        out.append((-1, M))
    for M in _convergent_matrices(from_cusp):
        out.append((1, M))
    return out


# -- Hecke operators ---------------------------------------------------------


@dataclass(frozen=True)
class HeckeOpSpec:
    """A named double-coset operator given by explicit representatives."""

    label: str
    reps: tuple[Mat2, ...]

    def degree(self) -> int:
        return len(self.reps)


def up_spec(p: int, shift: int = 0) -> HeckeOpSpec:
    """U_p with representatives (1 j; 0 p); shift translates the residue set.

    Any shift gives the same double coset, which criterion checks exploit.
    """
    reps = tuple((1, j + shift, 0, p) for j in range(p))
    return HeckeOpSpec(label=f"U{p}", reps=reps)


def tl_spec(ell: int, p: int, N: int) -> HeckeOpSpec:
    if ell == p or N % ell == 0:
        raise ConfigError("T_l needs l coprime to the level and to p")
    reps = tuple((1, j, 0, ell) for j in range(ell)) + ((ell, 0, 0, 1),)
    return HeckeOpSpec(label=f"T{ell}", reps=reps)


def diamond_spec(ell: int, p: int) -> HeckeOpSpec:
    if ell % p == 0:
        raise ConfigError("diamond operators need a unit")
    return HeckeOpSpec(label=f"S{ell}", reps=((ell, 0, 0, ell),))


# -- the symbol module -------------------------------------------------------


class SymbolModule:
    """Symbol space over one coefficient module, with cached action data.

    coeff is one of
      ("weight", k, scalars: PadicRing, M)   p-adic moments at integer weight
      ("family", disk: WeightDisk, M)        family moments over the disk
      ("classical", k)                       exact rational, M = k + 1
    """

    def __init__(self, pres: SymbolSpacePresentation, coeff):
        self.pres = pres
        self.kind = coeff[0]
        if self.kind == "weight":
            _, k, scalars, M = coeff
            self.k = k
            self.scalars = scalars
            self.M = M
            self.ring = scalars
        elif self.kind == "family":
            _, disk, M = coeff
            self.disk = disk
            self.M = M
            self.family = FamilyRing(disk)
            self.ring = self.family
        elif self.kind == "classical":
            _, k = coeff
            self.k = k
            self.M = k + 1
            self.ring = QQ
        else:
            raise ConfigError(f"unknown coefficient kind {self.kind!r}")
        if getattr(self, "k", 0) % 2 != 0 or (
            self.kind == "family" and coeff[1].k0 % 2 != 0
        ):
            raise ConfigError("symbol modules need even weights (odd weights vanish)")
        self._act_cache: dict[Mat2, list] = {}
        self._basis = None
        self._projector = None
        self._hecke_cache: dict[str, list] = {}

    # dimension of one coefficient block
    @property
    def block(self) -> int:
        return self.M

    @property
    def free_dim(self) -> int:
        return len(self.pres.solved_basis) * self.M

    def function_matrix(self, mat: Mat2):
        """Cached function-side action matrix of a monoid element."""
        cached = self._act_cache.get(mat)
        if cached is not None:
            return cached
        g = Sigma0Matrix(self.pres.prime, *mat)
        if self.kind == "weight":
            A = action_matrix(g, ArithmeticWeight(self.k), self.M, self.scalars)
        elif self.kind == "family":
            A = action_matrix(g, self.disk, self.M)
        else:
            ints = classical_action_matrix(g, self.k)
            A = [[Fraction(x) for x in row] for row in ints]
        self._act_cache[mat] = A
        return A

    def _moment_block(self, coef: int, mat: Mat2):
        """coef * (transpose action) as an M x M block on moment columns.

        Entries are exact values of the compressed operator; truncation
        honesty for the controlling operator is imposed by the column caps
        of the slope engine, and for pointwise distribution application by
        act_on_distribution.
        """
        A = self.function_matrix(mat)
        ring = self.ring
        M = self.M
        out = [[ring.zero() for _ in range(M)] for _ in range(M)]
        for j in range(M):
            for nn in range(M):
                val = A[nn][j]
                if coef == 1:
                    out[j][nn] = val
                elif coef == -1:
                    out[j][nn] = -val
                else:
                    acc = ring.zero()
                    for _ in range(abs(coef)):
                        acc = acc + val
                    out[j][nn] = acc if coef > 0 else -acc
        return out

    def _assemble(self, rows_of_terms: list[list[Term]]):
        """Flatten group-ring rows into a matrix over free coordinates."""
        pres = self.pres
        M = self.M
        free_pos = {g: i for i, g in enumerate(pres.solved_basis)}
        n_rows = len(rows_of_terms) * M
        n_cols = self.free_dim
        ring = self.ring
        out = [[ring.zero() for _ in range(n_cols)] for _ in range(n_rows)]
        for r_idx, row in enumerate(rows_of_terms):
            for coef, mat, gen in row:
                if gen not in free_pos:
                    raise InvariantViolation("unresolved generator in assembled row")
                blk = self._moment_block(coef, mat)
                c0 = free_pos[gen] * M
                r0 = r_idx * M
                for i in range(M):
                    for j in range(M):
                        out[r0 + i][c0 + j] = out[r0 + i][c0 + j] + blk[i][j]
        return out

    def torsion_projector(self):
        """Block-diagonal exact idempotent cutting out the torsion kernels.

        A protected generator carries a relation v * (sum of rotations) = 0
        with the rotation sum N satisfying N^2 = order * N; the projector
        onto its kernel is 1 - N/order, exact because 6 is invertible.
        Returns None when the presentation has no torsion.
        """
        if self._projector is not None or not self.pres.projector_rows:
            return self._projector
        ring = self.ring
        M = self.M
        E = linalg.identity(ring, self.free_dim)
        free_pos = {g: i for i, g in enumerate(self.pres.solved_basis)}
        for gen, row in sorted(self.pres.projector_rows.items()):
            order = len(row)
            inv_order = self._inv_int(order)
            Nmat = [[ring.zero() for _ in range(M)] for _ in range(M)]
            for coef, mat, g2 in row:
                if g2 != gen or coef != 1:
                    raise InvariantViolation("torsion row is not single-generator")
                blk = self._moment_block(1, mat)
                Nmat = linalg.mat_add(Nmat, blk)
            base = free_pos[gen] * M
            for i in range(M):
                for j in range(M):
                    adj = inv_order * Nmat[i][j]
                    E[base + i][base + j] = E[base + i][base + j] - adj
        self._projector = E
        return E

    def _inv_int(self, n: int):
        if self.kind == "classical":
            return Fraction(1, n)
        if self.kind == "weight":
            return self.scalars.from_fraction(Fraction(1, n))
        return self.family.from_scalar(self.family.scalars.from_fraction(Fraction(1, n)))

    def symbol_subspace_basis(self):
        """Columns spanning the honest symbol space in the free coordinates.

        Cuts by the residual (difference-equation) rows and the torsion
        projector; precision-limited for distribution coefficients, so the
        slope pipeline avoids it, but it is the reference object for
        residual checks and dimension counts.
        """
        if self._basis is not None:
            return self._basis
        rows = []
        if self.pres.residual_rows:
            rows.extend(self._assemble(self.pres.residual_rows))
        if self.pres.projector_rows:
            rows.extend(
                self._assemble([row for _, row in sorted(self.pres.projector_rows.items())])
            )
        if not rows:
            self._basis = linalg.identity(self.ring, self.free_dim)
            return self._basis
        kern = linalg.kernel_basis(self.ring, rows, self.free_dim)
        self._basis = [list(col) for col in zip(*kern)] if kern else [[] for _ in range(self.free_dim)]
        return self._basis

    @property
    def dim(self) -> int:
        b = self.symbol_subspace_basis()
        return len(b[0]) if b and b[0] is not None else 0

    def hecke_free_matrix(self, op: HeckeOpSpec):
        """The operator on the free coordinate space (columns = sources)."""
        cached = self._hecke_cache.get(op.label + repr(op.reps))
        if cached is not None:
            return cached
        pres = self.pres
        p = pres.prime
        rows_terms: list[list[Term]] = []
        for s in pres.solved_basis:
            gmat = pres.gen_matrices[s]
            # path of g_s runs from the cusp g_s(inf) to the cusp g_s(0)
            path_end = apply_mat_to_cusp(gmat, (0, 1))
            path_start = apply_mat_to_cusp(gmat, (1, 0))
            terms: list[Term] = []
            for delta in op.reps:
                _check_monoid(p, delta)
                for sign, u in path_terms(
                    apply_mat_to_cusp(delta, path_start),
                    apply_mat_to_cusp(delta, path_end),
                ):
                    i, gamma = pres.coset_of(u)
                    act = m2mul(m2inv_unimodular(gamma), delta)
                    _check_monoid(p, act)
                    terms.extend(pres.resolve_to_free(i, act, sign))
            rows_terms.append(_combine(terms))
        H = self._assemble(rows_terms)
        self._hecke_cache[op.label + repr(op.reps)] = H
        return H

    def hecke_matrix(self, op: HeckeOpSpec):
        """The operator on the working complex (solved basis x moments).

        Torsion directions are annihilated by conjugating with the exact
        projector; they contribute zero eigenvalues (empty Newton-polygon
        slots), never finite slopes.  The remaining defect of the residual
        difference-equation rows is contracted by the controlling operator
        into slopes >= 1, so all small-slope data read off this matrix is
        the honest symbol-space data.
        """
        H = self.hecke_free_matrix(op)
        E = self.torsion_projector()
        if E is None:
            return H
        return linalg.mat_mul(self.ring, E, linalg.mat_mul(self.ring, H, E))

    def hecke_matrix_on_symbols(self, op: HeckeOpSpec):
        """The operator restricted to the honest symbol subspace.

        Exact for classical coefficients; precision-limited for moment
        coefficients (the subspace itself is only determined up to the
        truncation fuzz), which is why slope data comes from hecke_matrix.
        """
        B = self.symbol_subspace_basis()
        H = self.hecke_free_matrix(op)
        HB = linalg.mat_mul(self.ring, H, B)
        return linalg.solve_columns(self.ring, B, HB)

    def apply_terms(self, terms: list[Term], values: dict[int, list]):
        """Evaluate sum coef * (values[gen] | mat) on moment vectors.

        Each application carries the truncation cap v_p(c) * (M - j) on
        output moment j, exactly as act_on_distribution does.
        """
        from .padics import strip_p

        ring = self.ring
        acc = [ring.zero()] * self.M
        for coef, mat, gen in terms:
            A = self.function_matrix(mat)
            vec = values[gen]
            cap = None
            if self.kind != "classical" and mat[2] != 0:
                vc = strip_p(self.pres.prime, mat[2])[0]
                cap = lambda j, _vc=vc: _vc * (self.M - j)
            moved = apply_moment_matrix(vec, A, ring.zero(), cap)
            for idx in range(self.M):
                term = moved[idx]
                if coef < 0:
                    term = -term
                for _ in range(abs(coef) - 1):
                    term = term + (moved[idx] if coef > 0 else -moved[idx])
                acc[idx] = acc[idx] + term
        return acc

    def extend_assignment(self, free_values: dict[int, list]) -> dict[int, list]:
        """Values on all generators from values on the solved basis."""
        out = dict(free_values)
        for gen, expr in self.pres.eliminated.items():
            out[gen] = self.apply_terms(expr, free_values)
        return out

    def relation_residuals(self, all_values: dict[int, list]) -> list[list]:
        return [self.apply_terms(row, all_values) for row in self.pres.relations]


def _check_monoid(p: int, mat: Mat2):
    a, b, c, d = mat
    if a % p == 0 or c % p != 0 or a * d - b * c == 0:
        raise InvariantViolation("matrix left the acting monoid")


def _cap_entry(val, bound: int):
    from .padics import PadicScalar

    if isinstance(val, PadicScalar):
        return val.with_abs_prec(min(val.prec, bound))
    from .weights import WeightFamilyElement

    return WeightFamilyElement(
        val.ring, [c.with_abs_prec(min(c.prec, bound)) for c in val.coeffs]
    )


# -- symbol containers -------------------------------------------------------


@dataclass
class OvermoduleSymbol:
    """Distribution values on the solved basis of a presentation."""

    module: SymbolModule
    values: dict[int, MomentDistribution | FamilyDistribution]

    def moment_vectors(self) -> dict[int, list]:
        return {g: list(v.moments) for g, v in self.values.items()}

    def flatten(self) -> list:
        out = []
        for g in self.module.pres.solved_basis:
            out.extend(self.values[g].moments)
        return out

    def residuals_vanish(self) -> bool:
        vals = self.module.extend_assignment(self.moment_vectors())
        ring = self.module.ring
        for row in self.module.relation_residuals(vals):
            for entry in row:
                if not ring.is_zero(entry):
                    return False
        return True


@dataclass
class ClassicalSymbol:
    """Exact rational values (length k+1 vectors) on the solved basis."""

    module: SymbolModule
    values: dict[int, list[Fraction]]

    def residuals_vanish(self) -> bool:
        vals = self.module.extend_assignment({g: list(v) for g, v in self.values.items()})
        for row in self.module.relation_residuals(vals):
            for entry in row:
                if entry != 0:
                    return False
        return True


def classical_eigensymbol(
    pres: SymbolSpacePresentation, k: int, eigenvalue: Fraction
) -> tuple[ClassicalSymbol, SymbolModule]:
    """An exact U_p-eigensymbol with the given eigenvalue, if one exists."""
    module = SymbolModule(pres, ("classical", k))
    U = module.hecke_matrix_on_symbols(up_spec(pres.prime))
    dim = len(U)
    shifted = [
        [U[i][j] - (eigenvalue if i == j else Fraction(0)) for j in range(dim)]
        for i in range(dim)
    ]
    kern = linalg.kernel_basis(QQ, shifted, dim)
    if not kern:
        raise MathFailure(f"no classical eigensymbol with U_p eigenvalue {eigenvalue}")
    vec = kern[0]
    B = module.symbol_subspace_basis()
    free_coords = [
        sum((B[i][c] * vec[c] for c in range(len(vec))), Fraction(0))
        for i in range(module.free_dim)
    ]
    values = {}
    for pos, gen in enumerate(pres.solved_basis):
        values[gen] = free_coords[pos * module.M : (pos + 1) * module.M]
    return ClassicalSymbol(module=module, values=values), module


def lift_to_distribution_symbol(
    pres: SymbolSpacePresentation,
    phi: ClassicalSymbol,
    a_p,
    M: int,
    prec: int,
    iterations: int | None = None,
    start: dict | None = None,
) -> OvermoduleSymbol:
    """Lift a small-slope classical eigensymbol to distribution coefficients.

    Any moment lift of the classical values converges under
    Phi -> a_p^(-1) (Phi | U_p): each pass gains one step of the moment
    filtration, because the controlling operator strictly improves it, at
    the cost of v_p(a_p) digits.  Critical slope (v_p(a_p) >= k + 1) is
    refused: there the iteration has no reason to converge and the honest
    answer is denial, matching the classicality boundary.
    """
    from .errors import CriticalSlope
    from .slopes import controlling_matrix

    k = phi.module.k
    scalars = PadicRing(pres.prime, prec)
    ap = scalars.from_fraction(a_p) if isinstance(a_p, Fraction) else a_p
    slope = ap.val_floor
    if ap.is_zero() or slope >= k + 1:
        raise CriticalSlope(
            f"U_p eigenvalue has slope >= {k + 1}; the small-slope lift does not apply"
        )
    module = SymbolModule(pres, ("weight", k, scalars, M))
    if iterations is None:
        iterations = M
    if iterations < M:
        raise ConfigError("need at least M iterations to fill the moment filtration")
    vec = []
    for gen in pres.solved_basis:
        classical = phi.values[gen]
        for j in range(M):
            if j < len(classical):
                vec.append(scalars.from_fraction(classical[j]))
            else:
                vec.append(scalars.zero())
    U = controlling_matrix(module)
    if start is not None:
        vec = list(start)
    ap_inv = ap.invert()
    for _ in range(iterations):
        vec = [x * ap_inv for x in linalg.mat_vec(module.ring, U, vec)]
    values = {}
    for pos, gen in enumerate(pres.solved_basis):
        moments = vec[pos * M : (pos + 1) * M]
        values[gen] = MomentDistribution(scalars, ArithmeticWeight(k), moments)
    return OvermoduleSymbol(module=module, values=values)
