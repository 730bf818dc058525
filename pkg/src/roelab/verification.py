"""Executable forms of the axiom proofs for coarse ordinary cohomology.

* ``prism_homotopy``: the chain homotopy between pullbacks along close maps.
* ``mv_check``: restriction / extension-by-zero between relative complexes
  of a complementary pair, and exactness of the Mayer-Vietoris sequence.
* ``swindle_apply``: the Eilenberg swindle on a flasque space.
* ``additivity_check``: free unions split along their components.

Sign convention for Mayer-Vietoris (the only place signs are chosen):
beta(a, b) = a|_{Z cap Y} - b|_{Z cap Y}, and the connecting map is
delta[c] = [extension by zero to X of d_Z(extension by zero of c to Z)],
with no further sign.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .cohomology import (
    StabilizationReport,
    TowerEntry,
    WindowSchedule,
    hax,
    image_group,
    map_is_iso,
    schedule_window,
    windowed_entry,
)
from .complexes import (
    ALTERNATING,
    CochainBasis,
    SparseCochain,
    ambient_thickening_missing,
    canonical,
    coboundary,
    coboundary_matrix,
    empty_basis,
    enumerate_controlled_simplices,
    pullback,
    pullback_matrix,
    relative_basis,
    restriction_matrix,
)
from .snf import AbelianGroup, SparseMatrix, Vector, direct_sum, echelon_of, kernel_basis
from .spaces import (
    AmbientSpec,
    FlasquenessWitness,
    Point,
    SpaceMap,
    Window,
    check_close,
    check_controlled_proper,
    covers_at_scale,
)


class VerificationError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# prism homotopy


@dataclass
class PrismHomotopy:
    f: SpaceMap
    g: SpaceMap
    k: int
    k_codomain: int
    n: int
    backend: str
    region: frozenset
    h: dict[int, SparseMatrix]            # h[m]: C^{m+1}(codomain) -> C^m(domain)
    dom: dict[int, CochainBasis]
    cod: dict[int, CochainBasis]
    d_dom: dict[int, SparseMatrix]        # d_dom[m]: C^m -> C^{m+1} on the domain region
    d_cod: dict[int, SparseMatrix]
    f_star: SparseMatrix
    g_star: SparseMatrix

    def lhs(self) -> SparseMatrix:
        """d h + h d on degree-n codomain cochains."""
        n = self.n
        out = self.h[n].matmul(self.d_cod[n])
        if n > 0:
            out = out.add(self.d_dom[n - 1].matmul(self.h[n - 1]))
        return out

    def rhs(self) -> SparseMatrix:
        return self.g_star.add(self.f_star, -1)

    def verify(self) -> bool:
        return self.lhs() == self.rhs()

    def apply_identity(self, vec: Vector) -> tuple[Vector, Vector]:
        """(d h + h d)(phi) and (g* - f*)(phi) for one cochain given in the codomain basis."""
        return self.lhs().apply(vec), self.rhs().apply(vec)


def prism_scale(f: SpaceMap, g: SpaceMap, k: int, n: int, region: frozenset) -> int:
    """Least codomain scale on which every prism tuple (f x_0..f x_i, g x_i..g x_m) is controlled.

    Such a tuple only contains points f(x), g(y) with x, y vertices of one
    U_k-simplex, so it suffices to scan related pairs of the region (and the
    diagonal alone in degree 0).
    """
    w, cod = f.domain, f.codomain
    need = 0
    for x in region:
        partners = [x] if n == 0 else [y for y in w.neighbors(x, k) if y in region]
        for y in partners:
            for a, b in ((f(x), f(y)), (g(x), g(y)), (f(x), g(y))):
                need = max(need, int(cod.dist(a, b)))
    return need


def prism_homotopy(f: SpaceMap, g: SpaceMap, k: int, n: int, k_codomain: int | None = None,
                   region=None, backend: str = ALTERNATING) -> PrismHomotopy:
    """Matrices of h = sum_i (-1)^i h_i^* together with the pieces of d h + h d = g* - f*.

    All domain cochains live on simplices inside ``region`` (default: the core
    of the domain window); codomain cochains on simplices with vertices in
    f(region) union g(region).  Every evaluation happens there, so the
    identity is exact without any padding.
    """
    w = f.domain
    if g.domain is not w or g.codomain is not f.codomain:
        raise ValueError("f and g must share domain and codomain")
    if check_close(f, g) is None:
        raise VerificationError("f and g are not close")
    region = frozenset(region) if region is not None else w.core
    need = prism_scale(f, g, k, n, region)
    if k_codomain is None:
        k_codomain = need
    elif k_codomain < need:
        raise VerificationError(f"codomain scale {k_codomain} is below the required {need}")
    cod = f.codomain
    image = frozenset(f(p) for p in region) | frozenset(g(p) for p in region)
    cidx = cod.index
    dom_b: dict[int, CochainBasis] = {}
    cod_b: dict[int, CochainBasis] = {}
    for m in range(-1, n + 2):
        if m < 0:
            dom_b[m], cod_b[m] = empty_basis(w, k, m, backend), empty_basis(cod, k_codomain, m, backend)
            continue
        dom_b[m] = enumerate_controlled_simplices(w, k, m, region, backend, degree_cap=n + 1)
        cod_b[m] = enumerate_controlled_simplices(cod, k_codomain, m, image, backend, degree_cap=n + 1)
    h: dict[int, SparseMatrix] = {}
    for m in range(max(n - 1, 0), n + 1):
        cols: list[Vector] = [{} for _ in range(len(cod_b[m + 1]))]
        for r in range(len(dom_b[m])):
            sigma = dom_b[m].points_of(r)
            for i in range(m + 1):
                tup = [f(x) for x in sigma[: i + 1]] + [g(x) for x in sigma[i:]]
                sign, key = canonical(tup, backend, cidx)
                if not sign:
                    continue
                c = cod_b[m + 1].index.get(tuple(cidx[q] for q in key))
                if c is None:
                    raise VerificationError(f"prism tuple {tup} is not controlled at scale {k_codomain}")
                s = sign * (-1 if i % 2 else 1)
                cols[c][r] = cols[c].get(r, 0) + s
        for col in cols:
            for r in [r for r, a in col.items() if not a]:
                del col[r]
        h[m] = SparseMatrix(len(dom_b[m]), cols)
    d_dom = {m: coboundary_matrix(dom_b[m], dom_b[m + 1], check=False) for m in range(max(n - 1, 0), n)}
    d_cod = {n: coboundary_matrix(cod_b[n], cod_b[n + 1], check=False)}
    f_star = pullback_matrix(f, cod_b[n], dom_b[n])
    g_star = pullback_matrix(g, cod_b[n], dom_b[n])
    return PrismHomotopy(f, g, k, k_codomain, n, backend, region, h, dom_b, cod_b, d_dom, d_cod, f_star, g_star)


def induced_map(m: SpaceMap, source: TowerEntry, target: TowerEntry, k_domain: int) -> list[list[int]]:
    """Matrix of m^* from the classes of ``source`` (codomain) to ``target`` (domain)."""
    check_controlled_proper(m, k_domain)
    out = []
    for phi in source.rep_cochains():
        out.append(target.classify_cochain(pullback(m, phi, k_domain)))
    return out


# ---------------------------------------------------------------------------
# big families and complementary pairs


@dataclass
class BigFamily:
    window: Window
    members: list[frozenset]
    certificate: dict[tuple[int, int], int | None] = field(default_factory=dict)

    def __post_init__(self):
        self.members = [frozenset(y) for y in self.members]
        for a, b in zip(self.members, self.members[1:]):
            if not a <= b:
                raise ValueError("big family must be increasing")

    def certify(self, scales: Sequence[int]) -> dict[tuple[int, int], int | None]:
        """j(i, k): least j with U_k[Y_i] (inside the window) contained in Y_j."""
        for k in scales:
            for i, y in enumerate(self.members):
                thick = self.window.thicken(y, k)
                self.certificate[(i, k)] = next((j for j in range(i, len(self.members))
                                                 if thick <= self.members[j]), None)
        return self.certificate


@dataclass
class ComplementaryPair:
    family: BigFamily
    Z: frozenset
    k: int

    def __post_init__(self):
        self.Z = frozenset(self.Z)

    @property
    def window(self) -> Window:
        return self.family.window

    @property
    def covering_index(self) -> int | None:
        for i, y in enumerate(self.family.members):
            if covers_at_scale(self.window, self.Z, y, self.k):
                return i
        return None


def half_line_pair(w: Window, k: int, n_members: int, axis: int = 0) -> ComplementaryPair:
    """Z = {x_axis >= 0} with the family Y_i = {x_axis <= i}, i = 0..n_members-1."""
    fam = BigFamily(w, [frozenset(p for p in w.points if p[axis] <= i) for i in range(n_members)])
    fam.certify([k])
    return ComplementaryPair(fam, frozenset(p for p in w.points if p[axis] >= 0), k)


# ---------------------------------------------------------------------------
# subgroup arithmetic on canonical coordinates


def _relations(group: AbelianGroup) -> list[Vector]:
    return [{i: d} for i, d in enumerate(group.orders) if d]


def kernel_of(mat: list[list[int]], source: AbelianGroup, target: AbelianGroup) -> list[Vector]:
    """Generators (canonical coordinates of source) of the kernel of a homomorphism."""
    g = source.ngens
    if g == 0:
        return []
    h = target.ngens
    cols: list[Vector] = [{r: a for r, a in enumerate(c) if a} for c in mat]
    cols += [{i: d} for i, d in enumerate(target.orders) if d]
    ker = kernel_basis(SparseMatrix(h, cols))
    return [{j: a for j, a in v.items() if j < g and a} for v in ker]


def subgroup_contains(group: AbelianGroup, big: Sequence[Vector], small: Sequence[Vector]) -> bool:
    ech = echelon_of(list(big) + _relations(group))
    return all(ech.contains({i: a for i, a in v.items() if a}) for v in small)


def subgroups_equal(group: AbelianGroup, a: Sequence[Vector], b: Sequence[Vector]) -> bool:
    return subgroup_contains(group, a, b) and subgroup_contains(group, b, a)


def _cols_to_vectors(mat: list[list[int]]) -> list[Vector]:
    return [{i: a for i, a in enumerate(c) if a} for c in mat]


# ---------------------------------------------------------------------------
# Mayer-Vietoris


@dataclass
class MVSpot:
    name: str
    degree: int
    exact: bool


@dataclass
class MVReport:
    index: int
    covering_index: int
    degrees: list[int]
    pro_inverse: bool
    naturality: bool
    relative_iso: dict[int, bool]
    groups: dict[str, dict[int, AbelianGroup]]
    spots: list[MVSpot]
    connecting: dict[int, list[list[int]]]
    connecting_image: dict[int, AbelianGroup]

    @property
    def exact(self) -> bool:
        return all(s.exact for s in self.spots)

    @property
    def ok(self) -> bool:
        return self.exact and self.pro_inverse and self.naturality and all(self.relative_iso.values())


def _is_identity(m: SparseMatrix) -> bool:
    return m.nrows == m.ncols and all(c == {j: 1} for j, c in enumerate(m.cols))


def mv_check(pair: ComplementaryPair, degrees: Sequence[int], schedule: WindowSchedule,
             index: int | None = None, entry: int = 0, backend: str = ALTERNATING) -> MVReport:
    """Excision data for a complementary pair (Z, Y_i) at scale pair.k.

    Cochain level: r_i (restriction) and s_i (extension by zero) between the
    relative complexes C(X, Y_i) and C(Z, Z cap Y_i).  Cohomology level: the
    long exact sequence of the square X -> Z, Y_i -> Z cap Y_i, checked as
    kernel = image inside the windowed entries.
    """
    w, k = pair.window, pair.k
    cover = pair.covering_index
    if cover is None:
        raise VerificationError("the family never covers the window together with Z")
    i = cover if index is None else index
    if i < cover:
        raise VerificationError(f"index {i} is below the covering index {cover}")
    if i >= len(pair.family.members):
        raise VerificationError("covering index exceeds the family length")
    Y = pair.family.members[i]
    Z = pair.Z
    cap = schedule.degree_cap
    top = max(degrees)
    if entry + top + 1 + schedule.margin >= len(schedule.cores) + 1:
        raise VerificationError("schedule too short for the requested degrees")
    for a, b in zip(schedule.cores, schedule.cores[1:]):
        if b - a < k:
            raise VerificationError("consecutive cores must differ by at least the scale")

    # cochain level: r_i s_i = id, s_i r_i = id, naturality in i
    core = w.core_ball(schedule.cores[entry])
    pro_ok, nat_ok = True, True
    for m in range(0, min(top + 2, cap + 1)):
        bX = relative_basis(w, k, m, core, Y, backend, cap)
        bZ = relative_basis(w, k, m, core & Z, Y, backend, cap)
        r = restriction_matrix(bX, bZ)
        s = restriction_matrix(bZ, bX)  # extension by zero: identity on shared simplices
        if not (_is_identity(r.matmul(s)) and _is_identity(s.matmul(r))):
            pro_ok = False
        if i + 1 < len(pair.family.members):
            Y2 = pair.family.members[i + 1]
            bX2 = relative_basis(w, k, m, core, Y2, backend, cap)
            bZ2 = relative_basis(w, k, m, core & Z, Y2, backend, cap)
            lhs = restriction_matrix(bZ, bX).matmul(restriction_matrix(bZ2, bZ))
            rhs = restriction_matrix(bX2, bX).matmul(restriction_matrix(bZ2, bX2))
            nat_ok = nat_ok and lhs == rhs

    # cohomology level
    wX = w
    wZ = w.restrict(lambda p: p in Z, "Z")
    wY = w.restrict(lambda p: p in Y, "Y")
    wZY = w.restrict(lambda p: p in Z and p in Y, "ZcapY")
    spaces = {"X": wX, "Z": wZ, "Y": wY, "ZY": wZY}
    ent: dict[str, dict[int, TowerEntry]] = {s: {} for s in spaces}
    for n in range(0, top + 2):
        if n > cap - 1:
            break
        j = entry + n
        for name, sw in spaces.items():
            if n == top + 1 and name != "X":
                continue
            ent[name][n] = windowed_entry(sw, k, n, schedule.cores[j], schedule.cores[j + schedule.margin],
                                          backend, cap)
    groups = {name: {n: e.group for n, e in d.items()} for name, d in ent.items()}

    relative_iso: dict[int, bool] = {}
    for n in degrees:
        if n > cap - 1:
            continue
        j = entry + n
        eX = windowed_entry(wX, k, n, schedule.cores[j], schedule.cores[j + schedule.margin], backend, cap,
                            exclude=Y)
        eZ = windowed_entry(wZ, k, n, schedule.cores[j], schedule.cores[j + schedule.margin], backend, cap,
                            exclude=Y & Z)
        mat = [eZ.classify(_rebase_partial(rep, eX.basis, eZ.basis)) for rep in eX.representatives]
        relative_iso[n] = map_is_iso(mat, eX.group, eZ.group)

    def alpha(n):
        eX, eZ, eY = ent["X"][n], ent["Z"][n], ent["Y"][n]
        mat = []
        for rep in eX.representatives:
            cz = eZ.classify(_rebase_partial(rep, eX.basis, eZ.basis))
            cy = eY.classify(_rebase_partial(rep, eX.basis, eY.basis))
            mat.append(cz + cy)
        return mat

    def beta(n):
        eZ, eY, eZY = ent["Z"][n], ent["Y"][n], ent["ZY"][n]
        mat = []
        for rep in eZ.representatives:
            mat.append(eZY.classify(_rebase_partial(rep, eZ.basis, eZY.basis)))
        for rep in eY.representatives:
            mat.append([-a for a in eZY.classify(_rebase_partial(rep, eY.basis, eZY.basis))])
        return mat

    def delta(n):
        eZY, eX = ent["ZY"][n], ent["X"][n + 1]
        mat = []
        for rep in eZY.representatives:
            c = eZY.basis.cochain(rep)
            dc = coboundary(wZ, c)
            mat.append(eX.classify(eX.basis.vector(dc)))
        return mat

    def zsum(n):
        return groups["Z"][n] + groups["Y"][n]

    spots: list[MVSpot] = []
    connecting: dict[int, list[list[int]]] = {}
    connecting_image: dict[int, AbelianGroup] = {}
    for n in degrees:
        if n > cap - 1:
            continue
        a = alpha(n)
        b = beta(n)
        # at H^n(X): ker alpha = im delta^{n-1}
        ker_a = kernel_of(a, groups["X"][n], zsum(n))
        im_d = _cols_to_vectors(connecting[n - 1]) if n - 1 in connecting else []
        spots.append(MVSpot("X", n, subgroups_equal(groups["X"][n], ker_a, im_d)))
        # at H^n(Z) + H^n(Y): ker beta = im alpha
        ker_b = kernel_of(b, zsum(n), groups["ZY"][n])
        spots.append(MVSpot("Z+Y", n, subgroups_equal(zsum(n), ker_b, _cols_to_vectors(a))))
        if n + 1 in ent["X"]:
            dmat = delta(n)
            connecting[n] = dmat
            connecting_image[n] = image_group(dmat, groups["X"][n + 1])
            ker_d = kernel_of(dmat, groups["ZY"][n], groups["X"][n + 1])
            spots.append(MVSpot("ZcapY", n, subgroups_equal(groups["ZY"][n], ker_d, _cols_to_vectors(b))))
    return MVReport(i, cover, list(degrees), pro_ok, nat_ok, relative_iso, groups, spots, connecting,
                    connecting_image)


def _rebase_partial(vec: Vector, src: CochainBasis, dst: CochainBasis) -> Vector:
    """Restriction to a subspace basis: keep the simplices that dst lists."""
    out: Vector = {}
    didx = dst.window.index
    for i, a in vec.items():
        pts = src.points_of(i)
        if all(p in didx for p in pts):
            j = dst.index.get(tuple(didx[p] for p in pts))
            if j is not None:
                out[j] = a
    return out


# ---------------------------------------------------------------------------
# swindle


@dataclass
class SwindleResult:
    S: SparseCochain
    n0: int
    f_star_S: SparseCochain
    r_phi: SparseCochain

    @property
    def identity_holds(self) -> bool:
        return self.f_star_S + self.r_phi == self.S


def _eval_swindle(phi: SparseCochain, rule, simplex: Sequence[Point], n0: int, order) -> int:
    total = 0
    cur = list(simplex)
    for _ in range(n0):
        sign, key = canonical(cur, phi.backend, order)
        if sign:
            total += sign * phi.values.get(key, 0)
        cur = [rule(x) for x in cur]
    return total


def swindle_apply(w: Window, witness: FlasquenessWitness, phi: SparseCochain, k_target: int) -> SwindleResult:
    """S(phi) = sum_{n < n0} (f^n)^* phi and the pieces of f^* S(phi) + r(phi) = S(phi)."""
    f = witness.f
    rule = f.rule
    if k_target not in witness.control_envelope:
        raise VerificationError(f"witness has no envelope at scale {k_target}")
    if phi.scale < witness.envelope(k_target):
        raise VerificationError(f"cochain scale {phi.scale} below the envelope {witness.envelope(k_target)}")
    supp = phi.support
    if not supp <= w.core:
        raise VerificationError("cochain support must lie in the core")
    n0 = witness.escape_time(supp) if supp else 0
    # points reaching supp within n0 steps stay within n0 * closeness of it
    reach = n0 * witness.closeness_scale
    if ambient_thickening_missing(w, supp, reach):
        raise VerificationError("escape schedule insufficient: orbit preimages leave the window")
    region = set()
    for p in w.thicken(supp, reach):
        x = p
        for _ in range(n0):
            if x in supp:
                region.add(p)
                break
            x = rule(x)
    order = w.index
    basis = enumerate_controlled_simplices(w, k_target, phi.degree, region, phi.backend, degree_cap=phi.degree)
    S_vals, fS_vals = {}, {}
    for i in range(len(basis)):
        sigma = basis.points_of(i)
        v = _eval_swindle(phi, rule, sigma, n0, order)
        if v:
            S_vals[sigma] = v
    # f^* S lives on simplices mapped into the region; their vertices are within closeness of it
    if ambient_thickening_missing(w, region, witness.closeness_scale):
        raise VerificationError("escape schedule insufficient: preimages of the support leave the window")
    region2 = {p for p in w.thicken(region, witness.closeness_scale) if rule(p) in region}
    basis2 = enumerate_controlled_simplices(w, k_target, phi.degree, region2, phi.backend, degree_cap=phi.degree)
    for i in range(len(basis2)):
        sigma = basis2.points_of(i)
        v = _eval_swindle(phi, rule, [rule(x) for x in sigma], n0, order)
        if v:
            fS_vals[sigma] = v
    S = SparseCochain(phi.degree, k_target, phi.backend, S_vals)
    fS = SparseCochain(phi.degree, k_target, phi.backend, fS_vals)
    return SwindleResult(S, n0, fS, phi.restrict_scale(w, k_target))


# ---------------------------------------------------------------------------
# additivity


@dataclass
class AdditivityVerdict:
    union: StabilizationReport
    parts: list[StabilizationReport]
    equal: dict[int, bool]
    projections_iso: dict[int, bool]

    @property
    def ok(self) -> bool:
        return all(self.equal.values()) and all(self.projections_iso.values())


def additivity_check(specs: Sequence[AmbientSpec], degrees: Sequence[int], k_range: Sequence[int],
                     schedule: WindowSchedule, backend: str = ALTERNATING) -> AdditivityVerdict:
    """hax of a free union against the sum over its parts, plus the projection isomorphism."""
    if len(specs) < 2:
        raise ValueError("additivity needs at least two summands")
    union_spec = AmbientSpec.free_union(*specs)
    union = hax(union_spec, degrees, k_range, schedule, backend)
    parts = [hax(s, degrees, k_range, schedule, backend) for s in specs]
    equal, proj = {}, {}
    w = schedule_window(union_spec, schedule)
    k = max(k_range)
    for n in degrees:
        groups = [p.group(n) for p in parts]
        ug = union.group(n)
        equal[n] = ug is not None and all(g is not None for g in groups) and ug == direct_sum(groups)
        d = union.degrees[n]
        if d.window_index is None:
            proj[n] = False
            continue
        j = d.window_index
        ue = union.towers[n].colimit_towers[-1].entries[j]
        comp_entries = []
        for c in range(len(specs)):
            wc = w.restrict(lambda p, c=c: p[0] == c, f"part{c}")
            comp_entries.append(windowed_entry(wc, k, n, schedule.cores[j], schedule.cores[j + schedule.margin],
                                               backend, schedule.degree_cap))
        mat = []
        for rep in ue.representatives:
            row: list[int] = []
            for ce in comp_entries:
                row += ce.classify(_rebase_partial(rep, ue.basis, ce.basis))
            mat.append(row)
        target = direct_sum(ce.group for ce in comp_entries)
        proj[n] = map_is_iso(mat, ue.group, target)
    return AdditivityVerdict(union, parts, equal, proj)


__all__ = [
    "PrismHomotopy", "prism_homotopy", "prism_scale", "induced_map", "BigFamily", "ComplementaryPair",
    "half_line_pair", "mv_check", "MVReport", "swindle_apply", "SwindleResult", "additivity_check",
    "AdditivityVerdict", "kernel_of", "subgroups_equal", "VerificationError",
]
