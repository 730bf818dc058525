"""Exact integer linear algebra over Z.

Dense Smith normal form for small matrices, sparse column echelon reduction
for kernels and solving, and finitely presented abelian groups with explicit
generators and a class map.  All arithmetic uses Python integers.

Sparse vectors are ``dict[int, int]`` with no zero values; sparse matrices are
``SparseMatrix`` objects holding a list of such columns.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

Vector = dict[int, int]

MERSENNE_PRIME = 2**31 - 1


class SNFError(ValueError):
    pass


# ---------------------------------------------------------------------------
# sparse matrices


@dataclass
class SparseMatrix:
    nrows: int
    cols: list[Vector]

    @property
    def ncols(self) -> int:
        return len(self.cols)

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "SparseMatrix":
        return cls(nrows, [{} for _ in range(ncols)])

    @classmethod
    def from_dense(cls, rows: Sequence[Sequence[int]], ncols: int | None = None) -> "SparseMatrix":
        nrows = len(rows)
        if ncols is None:
            ncols = len(rows[0]) if rows else 0
        cols: list[Vector] = [{} for _ in range(ncols)]
        for i, row in enumerate(rows):
            for j, a in enumerate(row):
                if a:
                    cols[j][i] = int(a)
        return cls(nrows, cols)

    def to_dense(self) -> list[list[int]]:
        out = [[0] * self.ncols for _ in range(self.nrows)]
        for j, col in enumerate(self.cols):
            for i, a in col.items():
                out[i][j] = a
        return out

    def apply(self, x: Vector | Sequence[int]) -> Vector:
        if not isinstance(x, dict):
            x = {j: a for j, a in enumerate(x) if a}
        out: Vector = {}
        for j, a in x.items():
            axpy(out, a, self.cols[j])
        return out

    def matmul(self, other: "SparseMatrix") -> "SparseMatrix":
        if self.ncols != other.nrows:
            raise SNFError(f"shape mismatch: {self.nrows}x{self.ncols} @ {other.nrows}x{other.ncols}")
        return SparseMatrix(self.nrows, [self.apply(c) for c in other.cols])

    def add(self, other: "SparseMatrix", scale: int = 1) -> "SparseMatrix":
        if (self.nrows, self.ncols) != (other.nrows, other.ncols):
            raise SNFError("shape mismatch in add")
        cols = []
        for a, b in zip(self.cols, other.cols):
            c = dict(a)
            axpy(c, scale, b)
            cols.append(c)
        return SparseMatrix(self.nrows, cols)

    def transpose(self) -> "SparseMatrix":
        cols: list[Vector] = [{} for _ in range(self.nrows)]
        for j, col in enumerate(self.cols):
            for i, a in col.items():
                cols[i][j] = a
        return SparseMatrix(self.ncols, cols)

    def is_zero(self) -> bool:
        return all(not c for c in self.cols)

    def select_rows(self, rows: Iterable[int]) -> "SparseMatrix":
        rows = list(rows)
        pos = {r: i for i, r in enumerate(rows)}
        cols = [{pos[i]: a for i, a in c.items() if i in pos} for c in self.cols]
        return SparseMatrix(len(rows), cols)

    def select_cols(self, cols: Iterable[int]) -> "SparseMatrix":
        return SparseMatrix(self.nrows, [dict(self.cols[j]) for j in cols])

    def max_abs(self) -> int:
        return max((abs(a) for c in self.cols for a in c.values()), default=0)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SparseMatrix):
            return NotImplemented
        return self.nrows == other.nrows and self.cols == other.cols


def axpy(y: Vector, a: int, x: Vector) -> None:
    """In place ``y += a * x``, dropping zeros."""
    if not a:
        return
    for i, v in x.items():
        s = y.get(i, 0) + a * v
        if s:
            y[i] = s
        else:
            y.pop(i, None)


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, s, t) with g = s*a + t*b = gcd(a, b) >= 0."""
    s0, s1, t0, t1 = 1, 0, 0, 1
    while b:
        q, r = divmod(a, b)
        a, b = b, r
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    if a < 0:
        a, s0, t0 = -a, -s0, -t0
    return a, s0, t0


# ---------------------------------------------------------------------------
# echelon form and kernels


class Echelon:
    """Column echelon basis of a lattice, keyed by lowest (largest) row index.

    Columns have pairwise distinct lows, so membership and coordinates are
    decided greedily from the largest row down.
    """

    def __init__(self) -> None:
        self.cols: list[Vector] = []
        self.by_low: dict[int, int] = {}

    @classmethod
    def from_basis(cls, basis: Sequence[Vector]) -> "Echelon":
        """Wrap vectors that are already in echelon form."""
        ech = cls()
        for v in basis:
            low = max(v)
            if low in ech.by_low:
                raise SNFError("vectors are not in echelon form")
            ech.by_low[low] = len(ech.cols)
            ech.cols.append(v)
        return ech

    def __len__(self) -> int:
        return len(self.cols)

    def solve(self, b: Vector) -> Vector | None:
        """Integer coordinates of b in this basis, or None if b is not in the lattice."""
        r = dict(b)
        x: Vector = {}
        while r:
            low = max(r)
            i = self.by_low.get(low)
            if i is None:
                return None
            q, rem = divmod(r[low], self.cols[i][low])
            if rem:
                return None
            x[i] = q
            axpy(r, -q, self.cols[i])
        return x

    def contains(self, b: Vector) -> bool:
        return self.solve(b) is not None


def column_reduce(cols: Sequence[Vector], track: bool = True) -> tuple[list[Vector], list[Vector], dict[int, int]]:
    """Unimodular column reduction ``R = M V`` to echelon form.

    Returns (R, V, pivots) where ``pivots`` maps each low row to the column
    index holding it.  Zero columns of R index a basis of ker M through V.
    """
    R: list[Vector] = []
    V: list[Vector] = []
    pivots: dict[int, int] = {}
    for j, col in enumerate(cols):
        r = dict(col)
        v: Vector = {j: 1} if track else {}
        while r:
            low = max(r)
            i = pivots.get(low)
            if i is None:
                pivots[low] = j
                break
            a, b = r[low], R[i][low]
            q, rem = divmod(a, b)
            if not rem:
                axpy(r, -q, R[i])
                if track:
                    axpy(v, -q, V[i])
                continue
            g, s, t = _xgcd(b, a)
            ri, vi = R[i], V[i] if track else {}
            new_i: Vector = {}
            axpy(new_i, s, ri)
            axpy(new_i, t, r)
            new_r: Vector = {}
            axpy(new_r, b // g, r)
            axpy(new_r, -(a // g), ri)
            R[i] = new_i
            r = new_r
            if track:
                new_vi: Vector = {}
                axpy(new_vi, s, vi)
                axpy(new_vi, t, v)
                new_v: Vector = {}
                axpy(new_v, b // g, v)
                axpy(new_v, -(a // g), vi)
                V[i] = new_vi
                v = new_v
        R.append(r)
        V.append(v)
    return R, V, pivots


def kernel_basis(m: SparseMatrix) -> list[Vector]:
    """Basis of the (saturated) integer kernel of m.

    Each returned vector has its largest index equal to the column it came
    from, so the list is already in echelon form.
    """
    R, V, _ = column_reduce(m.cols)
    return [V[j] for j in range(len(R)) if not R[j]]


def echelon_of(vectors: Iterable[Vector]) -> Echelon:
    R, _, pivots = column_reduce(list(vectors), track=False)
    ech = Echelon()
    for low, j in sorted(pivots.items()):
        ech.by_low[low] = len(ech.cols)
        ech.cols.append(R[j])
    return ech


def image_membership(m: SparseMatrix, b: Vector | Sequence[int], support_mask: Iterable[int] | None = None) -> Vector | None:
    """Integer x with ``m x = b`` and x zero outside the mask, or None if none exists."""
    if not isinstance(b, dict):
        b = {i: int(a) for i, a in enumerate(b) if a}
    allowed = list(range(m.ncols)) if support_mask is None else sorted(set(support_mask))
    sub = [m.cols[j] for j in allowed]
    R, V, pivots = column_reduce(sub)
    ech = Echelon()
    owner: list[int] = []
    for low, j in pivots.items():
        ech.by_low[low] = len(ech.cols)
        ech.cols.append(R[j])
        owner.append(j)
    y = ech.solve(b)
    if y is None:
        return None
    x: Vector = {}
    for i, c in y.items():
        axpy(x, c, V[owner[i]])
    out = {allowed[j]: a for j, a in x.items()}
    if m.apply(out) != {k: v for k, v in b.items() if v}:
        raise SNFError("internal error: solution does not reproduce b")
    return out


# ---------------------------------------------------------------------------
# dense Smith normal form


def _identity(n: int) -> list[list[int]]:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def _matmul(a: list[list[int]], b: list[list[int]]) -> list[list[int]]:
    if not a:
        return []
    inner = len(b)
    ncols = len(b[0]) if b else 0
    out = [[0] * ncols for _ in range(len(a))]
    for i, row in enumerate(a):
        oi = out[i]
        for k in range(inner):
            aik = row[k]
            if aik:
                bk = b[k]
                for j in range(ncols):
                    if bk[j]:
                        oi[j] += aik * bk[j]
    return out


def determinant(a: list[list[int]]) -> int:
    """Exact determinant by fraction-free (Bareiss) elimination."""
    n = len(a)
    if n == 0:
        return 1
    m = [row[:] for row in a]
    sign, prev = 1, 1
    for k in range(n - 1):
        if m[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if m[i][k]), None)
            if swap is None:
                return 0
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


@dataclass
class SNFResult:
    """``U M V = D`` with U, V unimodular and D diagonal with d1 | d2 | ..."""

    U: list[list[int]]
    V: list[list[int]]
    D: list[list[int]]

    @property
    def diagonal(self) -> list[int]:
        return [self.D[i][i] for i in range(min(len(self.D), len(self.D[0]) if self.D else 0))]

    def verify(self, m: list[list[int]]) -> bool:
        if not m or not m[0]:
            return True
        return (
            _matmul(_matmul(self.U, m), self.V) == self.D
            and abs(determinant(self.U)) == 1
            and abs(determinant(self.V)) == 1
        )


def smith_normal_form(m: SparseMatrix | Sequence[Sequence[int]]) -> SNFResult:
    """Smith normal form of an integer matrix, with transforms.

    Pivot: entry of minimal absolute value, ties broken by fewest nonzeros in
    its row plus column, then by position.
    """
    if isinstance(m, SparseMatrix):
        a = m.to_dense()
        nr, nc = m.nrows, m.ncols
    else:
        a = [list(map(int, row)) for row in m]
        nr = len(a)
        nc = len(a[0]) if a else 0
    U = _identity(nr)
    V = _identity(nc)

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for row in a:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]

    def add_row(src, dst, q):  # row_dst += q * row_src
        if q:
            rs, rd = a[src], a[dst]
            for c in range(nc):
                if rs[c]:
                    rd[c] += q * rs[c]
            us, ud = U[src], U[dst]
            for c in range(nr):
                if us[c]:
                    ud[c] += q * us[c]

    def add_col(src, dst, q):  # col_dst += q * col_src
        if q:
            for row in a:
                if row[src]:
                    row[dst] += q * row[src]
            for row in V:
                if row[src]:
                    row[dst] += q * row[src]

    t = 0
    while t < min(nr, nc):
        best = None
        for i in range(t, nr):
            row = a[i]
            for j in range(t, nc):
                if row[j]:
                    key = (abs(row[j]),)
                    if best is None or key < best[0]:
                        best = (key, i, j)
        if best is None:
            break
        # tie-break on sparsity among the minimal-value entries
        minval = best[0][0]
        cands = [(i, j) for i in range(t, nr) for j in range(t, nc) if abs(a[i][j]) == minval]
        if len(cands) > 1:
            def weight(ij):
                i, j = ij
                return (sum(1 for c in range(t, nc) if a[i][c]) + sum(1 for r in range(t, nr) if a[r][j]), i, j)
            pi, pj = min(cands, key=weight)
        else:
            pi, pj = best[1], best[2]
        swap_rows(t, pi)
        swap_cols(t, pj)
        while True:
            p = a[t][t]
            dirty = False
            for i in range(t + 1, nr):
                if a[i][t]:
                    q = a[i][t] // p
                    add_row(t, i, -q)
                    if a[i][t]:
                        dirty = True
            for j in range(t + 1, nc):
                if a[t][j]:
                    q = a[t][j] // p
                    add_col(t, j, -q)
                    if a[t][j]:
                        dirty = True
            if dirty:
                # move the smallest remainder into the pivot slot and repeat
                cand = [(abs(a[i][t]), i, t) for i in range(t + 1, nr) if a[i][t]]
                cand += [(abs(a[t][j]), t, j) for j in range(t + 1, nc) if a[t][j]]
                _, i, j = min(cand)
                if j == t:
                    swap_rows(t, i)
                else:
                    swap_cols(t, j)
                continue
            # divisibility: p must divide every remaining entry
            bad = next(((i, j) for i in range(t + 1, nr) for j in range(t + 1, nc) if a[i][j] % p), None)
            if bad is None:
                break
            add_row(bad[0], t, 1)
        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            U[t] = [-x for x in U[t]]
        t += 1
    return SNFResult(U, V, a)


def invariant_factors(m: SparseMatrix | Sequence[Sequence[int]]) -> list[int]:
    return [d for d in smith_normal_form(m).diagonal if d]


def rank_mod_p(m: SparseMatrix, p: int = MERSENNE_PRIME) -> int:
    """Rank over GF(p); a fast filter only, never used to report a group."""
    pivots: dict[int, dict[int, int]] = {}
    rank = 0
    for col in m.cols:
        r = {i: a % p for i, a in col.items() if a % p}
        while r:
            low = max(r)
            piv = pivots.get(low)
            if piv is None:
                inv = pow(r[low], -1, p)
                pivots[low] = {i: a * inv % p for i, a in r.items()}
                rank += 1
                break
            f = r[low]
            for i, a in piv.items():
                s = (r.get(i, 0) - f * a) % p
                if s:
                    r[i] = s
                else:
                    r.pop(i, None)
    return rank


def rank_over_z(m: SparseMatrix) -> int:
    R, _, _ = column_reduce(m.cols, track=False)
    return sum(1 for c in R if c)


# ---------------------------------------------------------------------------
# finitely generated abelian groups


@dataclass(frozen=True, order=True)
class AbelianGroup:
    """Z^rank + Z/t1 + ... + Z/tk with t1 | t2 | ... and each ti >= 2."""

    rank: int = 0
    torsion: tuple[int, ...] = ()

    def __post_init__(self):
        if self.rank < 0:
            raise ValueError("rank must be nonnegative")
        for a, b in zip(self.torsion, self.torsion[1:]):
            if b % a:
                raise ValueError(f"torsion {self.torsion} is not a divisibility chain")
        if any(t < 2 for t in self.torsion):
            raise ValueError("invariant factors must be >= 2")

    @classmethod
    def from_invariants(cls, rank: int, factors: Iterable[int]) -> "AbelianGroup":
        """Canonical form from arbitrary cyclic orders (units dropped)."""
        primes: dict[int, list[int]] = {}
        for f in factors:
            f = abs(int(f))
            if f == 0:
                rank += 1
                continue
            for p, e in _factorize(f).items():
                primes.setdefault(p, []).append(p**e)
        chain: list[int] = []
        length = max((len(v) for v in primes.values()), default=0)
        for v in primes.values():
            v.sort()
            v[:0] = [1] * (length - len(v))
        for k in range(length):
            prod = 1
            for v in primes.values():
                prod *= v[k]
            chain.append(prod)
        return cls(rank, tuple(c for c in chain if c > 1))

    @property
    def ngens(self) -> int:
        return self.rank + len(self.torsion)

    @property
    def orders(self) -> tuple[int, ...]:
        """Order of each canonical generator, 0 meaning infinite."""
        return self.torsion + (0,) * self.rank

    def is_zero(self) -> bool:
        return self.rank == 0 and not self.torsion

    def __add__(self, other: "AbelianGroup") -> "AbelianGroup":
        return AbelianGroup.from_invariants(self.rank + other.rank, self.torsion + other.torsion)

    def __str__(self) -> str:
        parts = []
        if self.rank:
            parts.append("Z" if self.rank == 1 else f"Z^{self.rank}")
        parts += [f"Z/{t}" for t in self.torsion]
        return " + ".join(parts) if parts else "0"


def direct_sum(groups: Iterable[AbelianGroup]) -> AbelianGroup:
    out = AbelianGroup()
    for g in groups:
        out = out + g
    return out


def _factorize(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    p = 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


class Presentation:
    """The group Z^ngens / <relations>, reduced to canonical form.

    Unit pivots are eliminated sparsely; the residual block goes through the
    dense Smith normal form.  ``generators`` are vectors in Z^ngens whose
    classes are the canonical generators (torsion first, then free), and
    ``classify`` maps any vector to canonical coordinates.
    """

    def __init__(self, ngens: int, relations: Iterable[Vector]):
        self.ngens = ngens
        rels: dict[int, Vector] = {}
        rows: dict[int, set[int]] = {}
        for c, rel in enumerate(relations):
            rel = {i: a for i, a in rel.items() if a}
            if not rel:
                continue
            rels[c] = rel
            for i in rel:
                rows.setdefault(i, set()).add(c)
        self._substitutions: list[tuple[int, Vector]] = []
        eliminated: set[int] = set()
        # sparse unit elimination, shortest relations first
        queue = sorted(rels, key=lambda c: len(rels[c]))
        changed = True
        while changed:
            changed = False
            for c in queue:
                rel = rels.get(c)
                if rel is None:
                    continue
                unit_rows = [i for i, a in rel.items() if a in (1, -1)]
                if not unit_rows:
                    continue
                r = min(unit_rows, key=lambda i: (len(rows[i]), i))
                u = rel[r]
                for c2 in list(rows[r]):
                    if c2 == c:
                        continue
                    rel2 = rels[c2]
                    f = rel2[r] * u
                    for i, a in rel.items():
                        s = rel2.get(i, 0) - f * a
                        if s:
                            if i not in rel2:
                                rows.setdefault(i, set()).add(c2)
                            rel2[i] = s
                        else:
                            if i in rel2:
                                del rel2[i]
                                rows[i].discard(c2)
                    if not rel2:
                        del rels[c2]
                for i in rel:
                    rows[i].discard(c)
                del rels[c]
                self._substitutions.append((r, rel))
                eliminated.add(r)
                changed = True
            queue = sorted(rels, key=lambda c: len(rels[c]))
        self._residual_rows = [i for i in range(ngens) if i not in eliminated]
        pos = {r: k for k, r in enumerate(self._residual_rows)}
        nres = len(self._residual_rows)
        dense = [[0] * len(rels) for _ in range(nres)]
        for k, rel in enumerate(rels.values()):
            for i, a in rel.items():
                dense[pos[i]][k] = a
        if nres and rels:
            snf = smith_normal_form(dense)
            diag = snf.diagonal + [0] * (nres - len(snf.diagonal))
            U = snf.U
        else:
            diag = [0] * nres
            U = _identity(nres)
        self._U = U
        self._Uinv = _inverse_unimodular(U) if nres else []
        self._diag = diag
        torsion_idx = [i for i, d in enumerate(diag) if d > 1]
        free_idx = [i for i, d in enumerate(diag) if d == 0]
        self._kept = torsion_idx + free_idx
        self.group = AbelianGroup(len(free_idx), tuple(diag[i] for i in torsion_idx))
        self.generators: list[Vector] = []
        for i in self._kept:
            vec = {self._residual_rows[k]: self._Uinv[k][i] for k in range(nres) if self._Uinv[k][i]}
            self.generators.append(vec)

    def classify(self, x: Vector) -> list[int]:
        """Canonical coordinates of the class of x (torsion entries reduced)."""
        x = dict(x)
        for r, rel in self._substitutions:
            a = x.get(r)
            if a:
                axpy(x, -a * rel[r], rel)
        y = [0] * len(self._residual_rows)
        for k, r in enumerate(self._residual_rows):
            a = x.get(r)
            if a:
                for i in range(len(y)):
                    if self._U[i][k]:
                        y[i] += self._U[i][k] * a
        out = []
        for i in self._kept:
            d = self._diag[i]
            out.append(y[i] % d if d else y[i])
        return out


def _inverse_unimodular(u: list[list[int]]) -> list[list[int]]:
    """Exact inverse of a unimodular matrix via Gauss-Jordan over Q."""
    from fractions import Fraction

    n = len(u)
    a = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(u)]
    for c in range(n):
        p = next(r for r in range(c, n) if a[r][c] != 0)
        a[c], a[p] = a[p], a[c]
        inv = 1 / a[c][c]
        a[c] = [x * inv for x in a[c]]
        for r in range(n):
            if r != c and a[r][c] != 0:
                f = a[r][c]
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    out = [[int(x) for x in row[n:]] for row in a]
    for row, frow in zip(out, a):
        if any(x.denominator != 1 for x in frow[n:]):
            raise SNFError("matrix is not unimodular")
    return out


@dataclass
class CohomologyGroup:
    """ker(d_out) / im(d_in) with explicit cocycle representatives."""

    group: AbelianGroup
    representatives: list[Vector]
    _basis: Echelon = field(repr=False)
    _pres: Presentation = field(repr=False)

    def classify(self, z: Vector) -> list[int]:
        coords = self._basis.solve(z)
        if coords is None:
            raise SNFError("vector is not a cocycle of this complex")
        return self._pres.classify(coords)


def quotient_of_lattices(basis: Sequence[Vector], sub_gens: Iterable[Vector]) -> CohomologyGroup:
    """span(basis) / span(sub_gens), with basis given in echelon form."""
    ech = Echelon.from_basis(basis) if basis else Echelon()
    rels = []
    for g in sub_gens:
        c = ech.solve(g)
        if c is None:
            raise SNFError("subgroup generator lies outside the ambient lattice")
        rels.append(c)
    pres = Presentation(len(ech), rels)
    reps = []
    for gen in pres.generators:
        v: Vector = {}
        for i, a in gen.items():
            axpy(v, a, ech.cols[i])
        reps.append(v)
    return CohomologyGroup(pres.group, reps, ech, pres)


def cohomology_at(d_in: SparseMatrix, d_out: SparseMatrix) -> CohomologyGroup:
    """ker(d_out)/im(d_in) for integer matrices with ``d_out @ d_in == 0``."""
    if d_in.nrows != d_out.ncols:
        raise SNFError("d_in and d_out are not composable")
    if not d_out.matmul(d_in).is_zero():
        raise SNFError("d_out @ d_in is not zero")
    ker = kernel_basis(d_out)
    return quotient_of_lattices(ker, d_in.cols)
