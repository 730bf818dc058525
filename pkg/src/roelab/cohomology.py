"""Coarse ordinary cohomology through windows.

For a fixed scale k the colimit over bounded sets is approximated by a
schedule of nested cores inside one faithful window:

    entry j  =  Z_j / B_{j,m}

where Z_j are the cocycles supported in core_j (the coboundary is
evaluated on every (n+1)-simplex meeting core_j, so these are genuine
cocycles of the infinite space) and B_{j,m} are the coboundaries of
cochains supported in core_{j+m} that happen to be supported in core_j.
The limit over scales is then read off a tower of restriction maps.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .complexes import (
    ALTERNATING,
    DEGREE_CAP,
    CochainBasis,
    SparseCochain,
    WindowTooSmall,
    coboundary,
    coboundary_matrix,
    enumerate_controlled_simplices,
    relative_basis,
)
from .snf import (
    AbelianGroup,
    CohomologyGroup,
    Presentation,
    SparseMatrix,
    Vector,
    invariant_factors,
    kernel_basis,
    quotient_of_lattices,
)
from .spaces import AmbientSpec, Window, make_window


class UnstabilizedTower(RuntimeError):
    pass


@dataclass(frozen=True)
class WindowSchedule:
    cores: tuple[int, ...]
    padding: int
    margin: int = 2
    degree_cap: int = DEGREE_CAP

    def __post_init__(self):
        cores = tuple(int(c) for c in self.cores)
        object.__setattr__(self, "cores", cores)
        if not cores or any(b <= a for a, b in zip(cores, cores[1:])) or cores[0] < 0:
            raise ValueError("cores must be a nonempty strictly increasing list of radii")
        if self.margin < 1:
            raise ValueError("margin must be at least 1")
        if len(cores) <= self.margin:
            raise ValueError("schedule needs more cores than the margin")

    @classmethod
    def for_scale(cls, k: int, cores: Sequence[int] = (4, 6, 8, 10, 12), margin: int = 2,
                  degree_cap: int = DEGREE_CAP) -> "WindowSchedule":
        return cls(tuple(cores), k * (degree_cap + 2), margin, degree_cap)

    def required_padding(self, k: int) -> int:
        return k * (self.degree_cap + 2)

    def validate(self, k: int) -> None:
        if self.padding < self.required_padding(k):
            raise WindowTooSmall(f"padding {self.padding} < {self.required_padding(k)} required at scale {k}")

    @property
    def n_entries(self) -> int:
        return len(self.cores) - self.margin


@dataclass
class TowerEntry:
    index: int
    core_radius: int
    group: AbelianGroup
    basis: CochainBasis
    cohomology: CohomologyGroup | None

    @property
    def representatives(self) -> list[Vector]:
        return self.cohomology.representatives if self.cohomology else []

    def classify(self, vec: Vector) -> list[int]:
        if self.cohomology is None:
            return []
        return self.cohomology.classify(vec)

    def rep_cochains(self) -> list[SparseCochain]:
        return [self.basis.cochain(v) for v in self.representatives]

    def classify_cochain(self, phi: SparseCochain) -> list[int]:
        return self.classify(self.basis.vector(phi))


@dataclass
class Tower:
    """Groups with structure maps; maps[i] goes entry i -> i+1 (colimit) or i+1 -> i (limit)."""

    entries: list
    maps: list[list[list[int]]]
    direction: str
    label: str = ""
    stabilized_at: int | None = None

    @property
    def groups(self) -> list[AbelianGroup]:
        return [e.group for e in self.entries]


def map_is_surjective(mat: list[list[int]], target: AbelianGroup) -> bool:
    """Does a matrix on canonical coordinates generate the target group?"""
    g = target.ngens
    if g == 0:
        return True
    orders = target.orders
    cols = [list(c) for c in mat]
    for i, d in enumerate(orders):
        if d:
            e = [0] * g
            e[i] = d
            cols.append(e)
    if not cols:
        return False
    dense = [[c[r] for c in cols] for r in range(g)]
    diag = invariant_factors(dense)
    return len(diag) == g and all(x == 1 for x in diag)


def map_is_iso(mat: list[list[int]], source: AbelianGroup, target: AbelianGroup) -> bool:
    """A surjection between isomorphic finitely generated abelian groups is an isomorphism."""
    return source == target and map_is_surjective(mat, target)


def image_group(mat: list[list[int]], target: AbelianGroup) -> AbelianGroup:
    """Isomorphism type of the image of a homomorphism into ``target``."""
    g = target.ngens
    if g == 0 or not mat:
        return AbelianGroup(0)
    orders = target.orders
    # image = span(cols) / (span(cols) ∩ torsion relations); present it as the
    # quotient of Z^cols by the kernel of cols -> target
    ncols = len(mat)
    rel_cols: list[Vector] = []
    for c in mat:
        rel_cols.append({r: a for r, a in enumerate(c) if a})
    for i, d in enumerate(orders):
        if d:
            rel_cols.append({i: d})
    ker = kernel_basis(SparseMatrix(g, rel_cols))
    rels = [{j: a for j, a in v.items() if j < ncols} for v in ker]
    return Presentation(ncols, rels).group


def _windowed_entry(w: Window, k: int, n: int, core_j: frozenset, core_t: frozenset, backend: str,
                    degree_cap: int, exclude: frozenset | None = None) -> TowerEntry:
    """Z_j / B_{j,m}; with ``exclude`` the cochains also vanish on simplices inside it."""
    def basis(m, region):
        if exclude:
            return relative_basis(w, k, m, region, exclude, backend, degree_cap + 1)
        return enumerate_controlled_simplices(w, k, m, region, backend, degree_cap + 1)

    bZ = basis(n, core_j)
    bZ1 = basis(n + 1, w.thicken(core_j, k))
    Z = kernel_basis(coboundary_matrix(bZ, bZ1))
    gens: list[Vector] = []
    if n > 0:
        bT = basis(n - 1, core_t)
        bTn = basis(n, w.thicken(core_t, k))
        D = coboundary_matrix(bT, bTn)
        # rows of simplices not contained in core_j must vanish
        outside: dict[int, int] = {}
        for r, s in enumerate(bTn.simplices):
            if s not in bZ.index:
                outside[r] = len(outside)
        PD = SparseMatrix(len(outside), [{outside[r]: a for r, a in c.items() if r in outside} for c in D.cols])
        for v in kernel_basis(PD):
            img = D.apply(v)
            if img:
                gens.append({bZ.index[bTn.simplices[r]]: a for r, a in img.items()})
    coh = quotient_of_lattices(Z, gens)
    return TowerEntry(-1, -1, coh.group, bZ, coh)


def windowed_entry(w: Window, k: int, n: int, core_radius: int, target_radius: int,
                   backend: str = ALTERNATING, degree_cap: int = DEGREE_CAP,
                   exclude: frozenset | None = None) -> TowerEntry:
    """One entry of the colimit tower: cocycles in the core ball modulo coboundaries from the target ball."""
    if n > degree_cap - 1:
        raise ValueError(f"degree {n} needs cochains in degree {n + 1}, above the cap {degree_cap}")
    e = _windowed_entry(w, k, n, w.core_ball(core_radius), w.core_ball(target_radius), backend, degree_cap, exclude)
    e.core_radius = core_radius
    return e


def reindex(vec: Vector, src: CochainBasis, dst: CochainBasis) -> Vector:
    out: Vector = {}
    for i, a in vec.items():
        j = dst.index.get(src.simplices[i])
        if j is None:
            raise ValueError("vector does not lie in the target basis")
        out[j] = a
    return out


def schedule_window(spec: AmbientSpec, schedule: WindowSchedule) -> Window:
    return make_window(spec, schedule.cores[-1], schedule.padding)


def windowed_cohomology(spec: AmbientSpec, k: int, n: int, schedule: WindowSchedule,
                        backend: str = ALTERNATING, window: Window | None = None) -> Tower:
    """Colimit tower of entries Z_j / B_{j,m} along the schedule's cores."""
    schedule.validate(k)
    if n > schedule.degree_cap - 1:
        raise ValueError(f"degree {n} needs cochains in degree {n + 1}, above the cap {schedule.degree_cap}")
    w = window or schedule_window(spec, schedule)
    entries: list[TowerEntry] = []
    for j in range(schedule.n_entries):
        core_j = w.core_ball(schedule.cores[j])
        core_t = w.core_ball(schedule.cores[j + schedule.margin])
        e = _windowed_entry(w, k, n, core_j, core_t, backend, schedule.degree_cap)
        e.index, e.core_radius = j, schedule.cores[j]
        entries.append(e)
    maps = []
    for a, b in zip(entries, entries[1:]):
        maps.append([b.classify(reindex(r, a.basis, b.basis)) for r in a.representatives])
    tower = Tower(entries, maps, "colimit", f"H^{n} scale {k}")
    tower.stabilized_at = colimit_stabilization(tower)
    return tower


def colimit_stabilization(tower: Tower) -> int | None:
    """First j with entries j, j+1 isomorphic through the structure map."""
    for j, mat in enumerate(tower.maps):
        if map_is_iso(mat, tower.entries[j].group, tower.entries[j + 1].group):
            return j
    return None


def verify_representatives(w: Window, entry: TowerEntry) -> bool:
    """Independent check that every representative is a cocycle on the whole window."""
    for phi in entry.rep_cochains():
        if not coboundary(w, phi).is_zero():
            return False
    return True


@dataclass
class ScaleTower:
    degree: int
    scales: list[int]
    colimit_towers: list[Tower]
    common_index: int | None
    groups: list[AbelianGroup]
    maps: list[list[list[int]]]  # maps[i]: H(scales[i+1]) -> H(scales[i])
    surjective: list[bool]
    isomorphic: list[bool]


def scale_tower(spec: AmbientSpec, n: int, k_range: Sequence[int], schedule: WindowSchedule,
                backend: str = ALTERNATING, require_stable: bool = True) -> ScaleTower:
    """Groups H^n at each scale with the restriction maps H(k+1) -> H(k)."""
    ks = sorted(k_range)
    schedule.validate(ks[-1])
    w = schedule_window(spec, schedule)
    towers = [windowed_cohomology(spec, k, n, schedule, backend, window=w) for k in ks]
    unstable = [k for k, t in zip(ks, towers) if t.stabilized_at is None]
    if unstable and require_stable:
        raise UnstabilizedTower(f"H^{n} colimit tower did not stabilize at scales {unstable}")
    common = max((t.stabilized_at or 0) for t in towers) if not unstable else None
    groups, maps, surj, iso = [], [], [], []
    if common is not None:
        groups = [t.entries[common].group for t in towers]
        for i in range(len(ks) - 1):
            hi, lo = towers[i + 1].entries[common], towers[i].entries[common]
            mat = []
            for rep in hi.representatives:
                phi = hi.basis.cochain(rep).restrict_scale(w, ks[i])
                mat.append(lo.classify_cochain(phi))
            maps.append(mat)
            surj.append(map_is_surjective(mat, lo.group))
            iso.append(map_is_iso(mat, hi.group, lo.group))
    return ScaleTower(n, ks, towers, common, groups, maps, surj, iso)


@dataclass
class DegreeReport:
    degree: int
    group: AbelianGroup | None
    window_index: int | None
    core_radius: int | None
    scale: int | None
    mittag_leffler: bool
    lim1: str
    confidence: str
    margin_stable: bool | None
    per_scale: list[AbelianGroup]

    @property
    def stabilized(self) -> bool:
        return self.confidence == "exact-on-window"


@dataclass
class StabilizationReport:
    space: str
    scales: list[int]
    degrees: dict[int, DegreeReport] = field(default_factory=dict)
    towers: dict[int, ScaleTower] = field(default_factory=dict)

    def group(self, n: int) -> AbelianGroup | None:
        return self.degrees[n].group

    @property
    def all_stabilized(self) -> bool:
        return all(d.stabilized for d in self.degrees.values())


def _margin_check(spec: AmbientSpec, k: int, n: int, schedule: WindowSchedule, j: int, backend: str,
                  w: Window, expected: AbelianGroup) -> bool | None:
    t = j + schedule.margin + 1
    if t >= len(schedule.cores):
        return None
    e = _windowed_entry(w, k, n, w.core_ball(schedule.cores[j]), w.core_ball(schedule.cores[t]), backend,
                        schedule.degree_cap)
    return e.group == expected


def hax(spec: AmbientSpec, degrees: Sequence[int], k_range: Sequence[int], schedule: WindowSchedule,
        backend: str = ALTERNATING) -> StabilizationReport:
    """Per-degree limit over scales of the windowed colimit, with confidence flags."""
    ks = sorted(k_range)
    report = StabilizationReport(spec.describe(), ks)
    w = schedule_window(spec, schedule)
    for n in degrees:
        st = scale_tower(spec, n, ks, schedule, backend, require_stable=False)
        report.towers[n] = st
        if st.common_index is None:
            report.degrees[n] = DegreeReport(n, None, None, None, None, False, "undetermined", "heuristic", None, [])
            continue
        ml = all(st.surjective)
        scale_stable = not st.isomorphic or st.isomorphic[-1]
        top = st.groups[-1]
        margin = _margin_check(spec, ks[-1], n, schedule, st.common_index, backend, w, top)
        exact = scale_stable and margin is not False
        report.degrees[n] = DegreeReport(
            n, top, st.common_index, schedule.cores[st.common_index], ks[-1], ml,
            "zero" if ml else "undetermined", "exact-on-window" if exact else "heuristic", margin, st.groups,
        )
    return report


def oracle_group_cohomology_zn(d: int, n: int) -> AbelianGroup:
    """H^n(Z^d; Z[Z^d]): Z in degree d (Poincare duality group), 0 elsewhere."""
    return AbelianGroup(1) if n == d else AbelianGroup(0)


def default_schedule(k_max: int, cores: Sequence[int] = (4, 6, 8, 10, 12), margin: int = 2) -> WindowSchedule:
    return WindowSchedule.for_scale(k_max, cores, margin)


__all__ = [
    "Tower", "TowerEntry", "WindowSchedule", "ScaleTower", "StabilizationReport", "DegreeReport",
    "windowed_cohomology", "scale_tower", "hax", "map_is_iso", "map_is_surjective", "image_group",
    "verify_representatives", "oracle_group_cohomology_zn", "default_schedule", "UnstabilizedTower",
    "schedule_window", "windowed_entry",
]
