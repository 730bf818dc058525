"""Controlled simplices and the integer cochain complexes built from them.

Two backends are supported:

``alternating``
    strictly increasing vertex tuples (in the window's point order), the
    oriented flag complex of the scale-k Rips graph.
``ordered_normalized``
    ordered tuples with no repeated consecutive entry; degenerate tuples are
    identified with zero.

Inside this module simplices are tuples of point *indices* into the
window; ``SparseCochain`` keys them by points so cochains survive a change
of window.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from .snf import SparseMatrix, Vector
from .spaces import Point, SpaceMap, Window

ALTERNATING = "alternating"
ORDERED = "ordered_normalized"
BACKENDS = (ALTERNATING, ORDERED)
DEGREE_CAP = 3


class DegreeCapError(ValueError):
    pass


class WindowTooSmall(ValueError):
    pass


def _check_backend(backend: str) -> None:
    if backend not in BACKENDS:
        raise ValueError(f"unknown backend {backend!r}; expected one of {BACKENDS}")


def adjacency(w: Window, k: int) -> list[tuple[int, ...]]:
    """For each point index, the sorted indices of the other points within k."""
    key = ("adj", k)
    adj = w._nbrs.get(key)
    if adj is None:
        idx = w.index
        adj = []
        for i, p in enumerate(w.points):
            adj.append(tuple(idx[q] for q in w.neighbors(p, k) if q != p))
        w._nbrs[key] = adj
    return adj


def _region_indices(w: Window, region: Iterable[Point] | None) -> frozenset[int]:
    if region is None:
        return frozenset(range(len(w)))
    idx = w.index
    out = set()
    for p in region:
        i = idx.get(p)
        if i is None:
            raise ValueError(f"region point {p} is not in the window")
        out.add(i)
    return frozenset(out)


def iter_simplices(adj: Sequence[Sequence[int]], allowed: frozenset[int], n: int, backend: str) -> Iterator[tuple[int, ...]]:
    """Controlled n-simplices with all vertices in ``allowed``, lexicographically."""
    verts = sorted(allowed)
    if backend == ALTERNATING:
        def grow(simplex, cand):
            if len(simplex) == n + 1:
                yield simplex
                return
            for pos, v in enumerate(cand):
                nb = adj[v]
                rest = [u for u in cand[pos + 1:] if u in nb]
                if len(rest) + len(simplex) + 1 >= n + 1:
                    yield from grow(simplex + (v,), rest)

        for v in verts:
            cand = [u for u in adj[v] if u > v and u in allowed]
            yield from grow((v,), cand)
    else:
        sets = {v: frozenset(adj[v]) | {v} for v in verts}

        def grow_o(simplex, common):
            if len(simplex) == n + 1:
                yield simplex
                return
            last = simplex[-1]
            for v in sorted(common):
                if v != last:
                    yield from grow_o(simplex + (v,), common & sets[v])

        for v in verts:
            yield from grow_o((v,), sets[v] & allowed)


@dataclass(frozen=True, eq=False)
class CochainBasis:
    window: Window
    degree: int
    scale: int
    backend: str
    region: frozenset
    simplices: tuple[tuple[int, ...], ...]
    index: dict = field(repr=False)

    def __len__(self) -> int:
        return len(self.simplices)

    def points_of(self, i: int) -> tuple[Point, ...]:
        pts = self.window.points
        return tuple(pts[v] for v in self.simplices[i])

    def vector(self, cochain: "SparseCochain") -> Vector:
        """Coordinates of a cochain; raises if it has support off the basis."""
        idx = self.window.index
        out: Vector = {}
        for simplex, a in cochain.values.items():
            key = tuple(idx[p] for p in simplex)
            i = self.index.get(key)
            if i is None:
                raise ValueError(f"cochain is nonzero on {simplex}, outside the basis")
            out[i] = a
        return out

    def cochain(self, vec: Vector) -> "SparseCochain":
        vals = {self.points_of(i): a for i, a in vec.items() if a}
        return SparseCochain(self.degree, self.scale, self.backend, vals)


def enumerate_controlled_simplices(w: Window, k: int, n: int, region: Iterable[Point] | None = None,
                                   backend: str = ALTERNATING, degree_cap: int = DEGREE_CAP) -> CochainBasis:
    """All U_k-controlled n-simplices with vertices in ``region`` (default: whole window)."""
    _check_backend(backend)
    if n < 0:
        raise ValueError("degree must be nonnegative")
    if n > degree_cap:
        raise DegreeCapError(f"degree {n} exceeds the degree cap {degree_cap}")
    allowed = _region_indices(w, region)
    simplices = tuple(iter_simplices(adjacency(w, k), allowed, n, backend))
    index = {s: i for i, s in enumerate(simplices)}
    pts = w.points
    return CochainBasis(w, n, k, backend, frozenset(pts[i] for i in allowed), simplices, index)


def empty_basis(w: Window, k: int, n: int, backend: str = ALTERNATING) -> CochainBasis:
    """Stand-in for degree -1."""
    return CochainBasis(w, n, k, backend, frozenset(), (), {})


def relative_basis(w: Window, k: int, n: int, region: Iterable[Point] | None, Y: Iterable[Point],
                   backend: str = ALTERNATING, degree_cap: int = DEGREE_CAP) -> CochainBasis:
    """Controlled simplices in region that are not contained in Y (kernel of restriction to Y)."""
    full = enumerate_controlled_simplices(w, k, n, region, backend, degree_cap)
    yi = _region_indices(w, [p for p in Y if p in w])
    simplices = tuple(s for s in full.simplices if not all(v in yi for v in s))
    return CochainBasis(w, n, k, backend, full.region, simplices, {s: i for i, s in enumerate(simplices)})


def ambient_thickening_missing(w: Window, region: Iterable[Point], k: int) -> list[Point]:
    """Ambient points within k of region that the window does not list."""
    missing = []
    for p in region:
        for q in w.spec.neighborhood(p, k):
            if q not in w:
                missing.append(q)
    return sorted(set(missing))


def face_sign_pairs(simplex: tuple[int, ...], backend: str) -> Iterator[tuple[int, tuple[int, ...]]]:
    """(sign, face) for the nondegenerate faces of a simplex."""
    for i in range(len(simplex)):
        face = simplex[:i] + simplex[i + 1:]
        if backend == ORDERED and i and i < len(simplex) - 1 and simplex[i - 1] == simplex[i + 1]:
            continue
        yield (-1 if i % 2 else 1), face


def coboundary_matrix(b_n: CochainBasis, b_next: CochainBasis, check: bool = True) -> SparseMatrix:
    """Matrix of d with d(phi)(tau) = sum_i (-1)^i phi(face_i tau).

    With ``check`` the codomain basis must contain every controlled
    (n+1)-simplex meeting the domain region, and that thickening must be
    listed by the window; otherwise d would be computed on a truncated
    complex and a ``WindowTooSmall`` error is raised.
    """
    if b_n.window is not b_next.window or b_n.scale != b_next.scale or b_n.backend != b_next.backend:
        raise ValueError("bases are not compatible")
    if b_next.degree != b_n.degree + 1:
        raise ValueError("codomain degree must be domain degree + 1")
    w, k = b_n.window, b_n.scale
    if check and b_n.region:
        need = w.thicken(b_n.region, k)
        missing = ambient_thickening_missing(w, b_n.region, k)
        if missing:
            raise WindowTooSmall(f"U_{k}[region] leaves the window at {missing[:3]}; enlarge the padding")
        if not need <= b_next.region:
            raise WindowTooSmall(f"codomain region must contain U_{k}[domain region] ({len(need)} points)")
    cols: list[Vector] = [{} for _ in range(len(b_n))]
    idx = b_n.index
    for r, tau in enumerate(b_next.simplices):
        for sign, face in face_sign_pairs(tau, b_n.backend):
            c = idx.get(face)
            if c is not None:
                col = cols[c]
                col[r] = col.get(r, 0) + sign
    for col in cols:
        for r in [r for r, a in col.items() if not a]:
            del col[r]
    return SparseMatrix(len(b_next), cols)


def restriction_matrix(b_from: CochainBasis, b_to: CochainBasis) -> SparseMatrix:
    """Forget simplices of b_from that are not in b_to (scale or region restriction)."""
    cols: list[Vector] = []
    for s in b_from.simplices:
        r = b_to.index.get(s)
        cols.append({} if r is None else {r: 1})
    return SparseMatrix(len(b_to), cols)


# ---------------------------------------------------------------------------
# point-keyed cochains


def canonical(simplex: Sequence[Point], backend: str, order=None) -> tuple[int, tuple | None]:
    """(sign, canonical tuple) of a vertex tuple; sign 0 when it is degenerate.

    ``order`` maps points to their rank; the default is the natural tuple order.
    """
    simplex = tuple(simplex)
    if backend == ORDERED:
        for a, b in zip(simplex, simplex[1:]):
            if a == b:
                return 0, None
        return 1, simplex
    key = order.__getitem__ if order is not None else None
    perm = sorted(range(len(simplex)), key=(lambda i: key(simplex[i])) if key else (lambda i: simplex[i]))
    srt = tuple(simplex[i] for i in perm)
    for a, b in zip(srt, srt[1:]):
        if a == b:
            return 0, None
    # parity of the sorting permutation
    sign, seen = 1, [False] * len(perm)
    for i in range(len(perm)):
        if not seen[i]:
            j, length = i, 0
            while not seen[j]:
                seen[j] = True
                j = perm[j]
                length += 1
            if length % 2 == 0:
                sign = -sign
    return sign, srt


@dataclass
class SparseCochain:
    degree: int
    scale: int
    backend: str
    values: dict = field(default_factory=dict)

    def __post_init__(self):
        _check_backend(self.backend)
        self.values = {s: a for s, a in self.values.items() if a}
        for s in self.values:
            if len(s) != self.degree + 1:
                raise ValueError(f"simplex {s} does not have degree {self.degree}")

    @property
    def support(self) -> frozenset:
        return frozenset(p for s in self.values for p in s)

    def __call__(self, simplex: Sequence[Point]) -> int:
        sign, key = canonical(simplex, self.backend)
        if not sign:
            return 0
        return sign * self.values.get(key, 0)

    def __add__(self, other: "SparseCochain") -> "SparseCochain":
        self._compatible(other)
        vals = dict(self.values)
        for s, a in other.values.items():
            vals[s] = vals.get(s, 0) + a
        return SparseCochain(self.degree, self.scale, self.backend, vals)

    def __sub__(self, other: "SparseCochain") -> "SparseCochain":
        return self + other.scaled(-1)

    def scaled(self, c: int) -> "SparseCochain":
        return SparseCochain(self.degree, self.scale, self.backend, {s: c * a for s, a in self.values.items()})

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SparseCochain):
            return NotImplemented
        return (self.degree, self.backend) == (other.degree, other.backend) and self.values == other.values

    def is_zero(self) -> bool:
        return not self.values

    def _compatible(self, other: "SparseCochain") -> None:
        if (self.degree, self.backend) != (other.degree, other.backend):
            raise ValueError("cochains of different degree or backend")

    def restrict_scale(self, w: Window, k: int) -> "SparseCochain":
        """Forget the values on simplices that are not U_k-controlled."""
        vals = {s: a for s, a in self.values.items()
                if all(w.dist(p, q) <= k for i, p in enumerate(s) for q in s[i + 1:])}
        return SparseCochain(self.degree, k, self.backend, vals)


def coboundary(w: Window, phi: SparseCochain) -> SparseCochain:
    """d(phi) by direct evaluation on every controlled simplex near the support."""
    if not phi.values:
        return SparseCochain(phi.degree + 1, phi.scale, phi.backend)
    region = w.thicken(phi.support, phi.scale)
    missing = ambient_thickening_missing(w, phi.support, phi.scale)
    if missing:
        raise WindowTooSmall(f"coboundary needs ambient points {missing[:3]}")
    basis = enumerate_controlled_simplices(w, phi.scale, phi.degree + 1, region, phi.backend, degree_cap=phi.degree + 1)
    vals = {}
    for i in range(len(basis)):
        tau = basis.points_of(i)
        s = 0
        for j in range(len(tau)):
            s += (-1) ** j * phi(tau[:j] + tau[j + 1:])
        if s:
            vals[tau] = s
    return SparseCochain(phi.degree + 1, phi.scale, phi.backend, vals)


def pullback(m: SpaceMap, phi: SparseCochain, k_domain: int) -> SparseCochain:
    """m*(phi) on U_{k_domain}-controlled simplices of the domain window.

    The codomain scale of phi must dominate the control of m at k_domain, so
    that m carries every domain simplex to a simplex on which phi is defined.
    """
    k_out = m.controls.get(k_domain)
    if k_out is None:
        from .spaces import check_controlled_proper
        k_out = check_controlled_proper(m, k_domain).k_out
    if k_out is None or k_out > phi.scale:
        raise ValueError(f"map needs codomain scale {k_out}, cochain has scale {phi.scale}")
    dom = m.domain
    supp = phi.support
    region = [p for p in dom.points if m(p) in supp]
    basis = enumerate_controlled_simplices(dom, k_domain, phi.degree, region, phi.backend, degree_cap=phi.degree)
    order = m.codomain.index
    vals = {}
    for i in range(len(basis)):
        sigma = basis.points_of(i)
        sign, key = canonical([m(p) for p in sigma], phi.backend, order)
        if sign:
            a = phi.values.get(key, 0)
            if a:
                vals[sigma] = sign * a
    return SparseCochain(phi.degree, k_domain, phi.backend, vals)


def pullback_matrix(m: SpaceMap, b_cod: CochainBasis, b_dom: CochainBasis) -> SparseMatrix:
    """Matrix of m* from codomain cochains (b_cod) to domain cochains (b_dom)."""
    if b_cod.degree != b_dom.degree or b_cod.backend != b_dom.backend:
        raise ValueError("bases are not compatible")
    cod = m.codomain
    cidx = cod.index
    cols: list[Vector] = [{} for _ in range(len(b_cod))]
    for r in range(len(b_dom)):
        sigma = b_dom.points_of(r)
        image = [m(p) for p in sigma]
        if any(q not in cidx for q in image):
            raise WindowTooSmall(f"image of {sigma} leaves the codomain window")
        sign, key = canonical(image, b_cod.backend, cidx)
        if not sign:
            continue
        c = b_cod.index.get(tuple(cidx[q] for q in key))
        if c is not None:
            cols[c][r] = cols[c].get(r, 0) + sign
    return SparseMatrix(len(b_dom), cols)
