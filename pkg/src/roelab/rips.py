"""Rips complexes and the relative-cohomology shadow of coarse cohomotopy.

The shadow at scale k and bounded set B is the ordinary relative
cohomology of the pair (P_k(W), P_k(W minus B)).  Its relative cochains
are the cochains on simplices that touch B; every such simplex has its
vertices in U_k[B], so the computation is exact as soon as the window
contains that thickening.  Growing B gives inclusions of relative cochain
complexes (the colimit direction), shrinking k gives restrictions (the
limit direction).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .cohomology import map_is_iso, map_is_surjective
from .complexes import ALTERNATING, CochainBasis, adjacency, coboundary_matrix, iter_simplices
from .snf import AbelianGroup, CohomologyGroup, SparseMatrix, Vector, cohomology_at
from .spaces import AmbientSpec, Point, Window, make_window

DEFAULT_BUDGET = 2_000_000
DEFAULT_DIM_CAP = 3


class BudgetExceeded(RuntimeError):
    pass


@dataclass
class RipsComplex:
    window: Window
    scale: int
    dim_cap: int
    simplices: dict[int, tuple[tuple[int, ...], ...]]

    def count(self, n: int) -> int:
        return len(self.simplices.get(n, ()))

    @property
    def total(self) -> int:
        return sum(len(s) for s in self.simplices.values())

    def basis(self, n: int, keep=None) -> CochainBasis:
        """Cochain basis of the n-simplices (optionally filtered)."""
        sims = tuple(s for s in self.simplices.get(n, ()) if keep is None or keep(s))
        pts = self.window.points
        region = frozenset(pts[v] for s in sims for v in s)
        return CochainBasis(self.window, n, self.scale, ALTERNATING, region, sims, {s: i for i, s in enumerate(sims)})

    def components(self) -> list["RipsComplex"]:
        """Split into connected pieces (each keeps the global vertex indices), ordered by least vertex."""
        parent = list(range(len(self.window)))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for a, b in self.simplices.get(1, ()):
            parent[find(a)] = find(b)
        groups: dict[int, dict[int, list]] = {}
        for (v,) in self.simplices.get(0, ()):
            groups.setdefault(find(v), {})
        for n, sims in self.simplices.items():
            for s in sims:
                groups[find(s[0])].setdefault(n, []).append(s)
        out = []
        for root in sorted(groups, key=lambda r: min(s[0] for s in groups[r][0])):
            g = groups[root]
            out.append(RipsComplex(self.window, self.scale, self.dim_cap,
                                   {n: tuple(g.get(n, ())) for n in range(self.dim_cap + 1)}))
        return out


def build_rips(w: Window, k: int, dim_cap: int = DEFAULT_DIM_CAP, budget: int = DEFAULT_BUDGET,
               region: Iterable[Point] | None = None) -> RipsComplex:
    """Flag complex of the scale-k graph on the window (or on ``region``), up to dimension dim_cap."""
    if dim_cap < 0:
        raise ValueError("dim_cap must be nonnegative")
    adj = adjacency(w, k)
    allowed = frozenset(range(len(w))) if region is None else frozenset(w.index[p] for p in region)
    out: dict[int, tuple[tuple[int, ...], ...]] = {}
    total = 0
    for n in range(dim_cap + 1):
        sims = []
        for s in iter_simplices(adj, allowed, n, ALTERNATING):
            sims.append(s)
            total += 1
            if total > budget:
                raise BudgetExceeded(f"Rips complex exceeds the budget of {budget} simplices at dimension {n}")
        out[n] = tuple(sims)
    return RipsComplex(w, k, dim_cap, out)


@dataclass
class PairEntry:
    scale: int
    B: frozenset
    degree: int
    group: AbelianGroup
    basis: CochainBasis
    cohomology: CohomologyGroup

    @property
    def representatives(self) -> list[Vector]:
        return self.cohomology.representatives

    def classify_points(self, values: dict) -> list[int]:
        """Classify a point-keyed cochain (dict simplex-of-points -> int)."""
        idx = self.window.index
        vec: Vector = {}
        for s, a in values.items():
            i = self.basis.index.get(tuple(idx[p] for p in s))
            if i is None:
                raise ValueError(f"{s} is not a relative simplex of this pair")
            vec[i] = a
        return self.cohomology.classify(vec)

    @property
    def window(self) -> Window:
        return self.basis.window

    def rep_values(self) -> list[dict]:
        return [{self.basis.points_of(i): a for i, a in r.items()} for r in self.representatives]


def _check_pair_window(w: Window, B: frozenset, k: int) -> None:
    for p in B:
        for q in w.spec.neighborhood(p, k):
            if q not in w:
                raise ValueError(f"window does not contain U_{k}[B] (missing {q})")


def rips_pair_cohomology(w: Window, k: int, B: Iterable[Point], degrees: Sequence[int],
                         dim_cap: int = DEFAULT_DIM_CAP, budget: int = DEFAULT_BUDGET) -> dict[int, PairEntry]:
    """H^n(P_k(W), P_k(W minus B)) for each requested degree n <= dim_cap - 1."""
    B = frozenset(B)
    if not B <= frozenset(w.points):
        raise ValueError("B must be a subset of the window")
    _check_pair_window(w, B, k)
    region = w.thicken(B, k)
    cx = build_rips(w, k, dim_cap, budget, region)
    bidx = frozenset(w.index[p] for p in B)
    touches = lambda s: any(v in bidx for v in s)  # noqa: E731
    out = {}
    for n in degrees:
        if n + 1 > dim_cap:
            raise ValueError(f"degree {n} needs simplices of dimension {n + 1} > dim_cap {dim_cap}")
        b_prev = cx.basis(n - 1, touches) if n > 0 else None
        b_n = cx.basis(n, touches)
        b_next = cx.basis(n + 1, touches)
        d_in = coboundary_matrix(b_prev, b_n, check=False) if b_prev is not None else SparseMatrix(len(b_n), [])
        d_out = coboundary_matrix(b_n, b_next, check=False)
        coh = cohomology_at(d_in, d_out)
        out[n] = PairEntry(k, B, n, coh.group, b_n, coh)
    return out


@dataclass
class ShadowDegree:
    degree: int
    group: AbelianGroup | None
    B_radius: int | None
    scale: int | None
    mittag_leffler: bool
    lim1: str
    confidence: str
    per_scale: list[AbelianGroup] = field(default_factory=list)

    @property
    def stabilized(self) -> bool:
        return self.confidence == "exact-on-window"


@dataclass
class ShadowReport:
    space: str
    scales: list[int]
    B_radii: list[int]
    degrees: dict[int, ShadowDegree] = field(default_factory=dict)
    towers: dict = field(default_factory=dict)

    def group(self, n: int) -> AbelianGroup | None:
        return self.degrees[n].group

    @property
    def all_stabilized(self) -> bool:
        return all(d.stabilized for d in self.degrees.values())


def q_shadow(spec: AmbientSpec, degrees: Sequence[int], k_range: Sequence[int], B_schedule: Sequence[int],
             padding: int | None = None, dim_cap: int = DEFAULT_DIM_CAP,
             budget: int = DEFAULT_BUDGET) -> ShadowReport:
    """lim over k of colim over B of H^n(P_k(W), P_k(W minus B)), with stabilization checks.

    B runs over the core balls of the given radii.  For each scale the
    colimit is read off the last two B entries (which must be isomorphic
    through the inclusion map); the scale maps restrict representatives.
    """
    ks = sorted(k_range)
    radii = sorted(B_schedule)
    if len(radii) < 2:
        raise ValueError("B schedule needs at least two radii")
    pad = padding if padding is not None else ks[-1]
    w = make_window(spec, radii[-1], pad)
    report = ShadowReport(spec.describe(), ks, radii)
    entries: dict[tuple[int, int], dict[int, PairEntry]] = {}
    for k in ks:
        for r in radii:
            entries[(k, r)] = rips_pair_cohomology(w, k, w.core_ball(r), degrees, dim_cap, budget)
    for n in degrees:
        stable_r: dict[int, int | None] = {}
        for k in ks:
            stable_r[k] = None
            for r0, r1 in zip(radii, radii[1:]):
                a, b = entries[(k, r0)][n], entries[(k, r1)][n]
                mat = [b.classify_points(v) for v in a.rep_values()]
                if map_is_iso(mat, a.group, b.group):
                    stable_r[k] = r1
                    break
        if any(v is None for v in stable_r.values()):
            report.degrees[n] = ShadowDegree(n, None, None, None, False, "undetermined", "heuristic")
            continue
        r = max(stable_r.values())
        groups = [entries[(k, r)][n].group for k in ks]
        surj, iso = [], []
        for k0, k1 in zip(ks, ks[1:]):
            hi, lo = entries[(k1, r)][n], entries[(k0, r)][n]
            lo_keys = set(lo.basis.simplices)
            mat = []
            for rep in hi.representatives:
                vec = {lo.basis.index[hi.basis.simplices[i]]: a for i, a in rep.items()
                       if hi.basis.simplices[i] in lo_keys}
                mat.append(lo.cohomology.classify(vec))
            surj.append(map_is_surjective(mat, lo.group))
            iso.append(map_is_iso(mat, hi.group, lo.group))
        ml = all(surj)
        exact = not iso or iso[-1]
        report.degrees[n] = ShadowDegree(n, groups[-1], r, ks[-1], ml, "zero" if ml else "undetermined",
                                         "exact-on-window" if exact else "heuristic", groups)
        report.towers[n] = {"surjective": surj, "isomorphic": iso}
    return report
