"""Property suites and oracle computations shared by the CLI and the acceptance tests.

Each suite returns a SuiteResult whose ``details`` are JSON-friendly and
free of timings, so reports stay byte-identical for a fixed seed.
"""

from __future__ import annotations

import itertools
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable

import networkx as nx

from .cohomology import WindowSchedule, hax, oracle_group_cohomology_zn, schedule_window
from .complexes import (
    ALTERNATING,
    BACKENDS,
    ORDERED,
    SparseCochain,
    coboundary,
    coboundary_matrix,
    enumerate_controlled_simplices,
    restriction_matrix,
)
from .pairing import SparseChain, boundary, crossing_cochain, fundamental_chain, kronecker_pair, pair_classes
from .rips import q_shadow
from .snf import AbelianGroup, SparseMatrix, cohomology_at, rank_over_z
from .spaces import AmbientSpec, SpaceMap, Window, certify_flasqueness, make_window
from .variation import (
    VariationFunction,
    extend_function,
    power_thicken,
    u_variation,
    verify_extension,
)
from .verification import additivity_check, half_line_pair, mv_check, prism_homotopy, swindle_apply

Z0, Z1 = AbelianGroup(0), AbelianGroup(1)


@dataclass
class SuiteResult:
    name: str
    passed: bool
    details: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name} ({self.seconds:.2f}s)"


def _timed(name: str, body: Callable[[], tuple[bool, dict]]) -> SuiteResult:
    t = time.perf_counter()
    ok, details = body()
    return SuiteResult(name, bool(ok), details, time.perf_counter() - t)


def _groups(report, degrees) -> dict[str, str]:
    return {str(n): str(report.group(n)) for n in degrees}


# ---------------------------------------------------------------------------
# cohomology of the catalog


def point_suite() -> SuiteResult:
    def body():
        rep = hax(AmbientSpec.point(), [0, 1, 2], [1, 2, 3], WindowSchedule((1, 2, 3, 4), 15))
        want = {0: Z1, 1: Z0, 2: Z0}
        ok = all(rep.group(n) == want[n] and rep.degrees[n].stabilized for n in want)
        constant = all(len(set(rep.degrees[n].per_scale)) == 1 and all(rep.towers[n].isomorphic) for n in want)
        return ok and constant, {"groups": _groups(rep, want), "constant_towers": constant}
    return _timed("point space", body)


def z_suite(cores=(8, 12, 16, 20, 24), scales=(1, 2, 3, 4)) -> SuiteResult:
    def body():
        sch = WindowSchedule.for_scale(max(scales), cores)
        rep = hax(AmbientSpec.grid(1), [0, 1, 2], scales, sch)
        ok = all(rep.group(n) == oracle_group_cohomology_zn(1, n) and rep.degrees[n].stabilized
                 and rep.degrees[n].core_radius <= 20 for n in (0, 1, 2))
        return ok, {"groups": _groups(rep, (0, 1, 2)),
                    "core_radius": {str(n): rep.degrees[n].core_radius for n in (0, 1, 2)}}
    return _timed("hax(Z) against H*(Z;Z[Z])", body)


def z2_suite(cores=(1, 2, 3, 4, 5), scales=(1, 2)) -> SuiteResult:
    def body():
        sch = WindowSchedule.for_scale(max(scales), cores)
        rep = hax(AmbientSpec.grid(2), [0, 1, 2], scales, sch)
        ok = all(rep.group(n) == oracle_group_cohomology_zn(2, n) and rep.degrees[n].stabilized for n in (0, 1, 2))
        return ok, {"groups": _groups(rep, (0, 1, 2)), "core": max(cores), "padding": sch.padding}
    return _timed("hax(Z^2)", body)


# ---------------------------------------------------------------------------
# flasque vanishing and the swindle


def random_cochain(rng: random.Random, w: Window, k: int, n: int, backend: str, region, size: int = 4) -> SparseCochain:
    basis = enumerate_controlled_simplices(w, k, n, region, backend, degree_cap=n)
    picks = rng.sample(range(len(basis)), min(size, len(basis)))
    return SparseCochain(n, k, backend, {basis.points_of(i): rng.choice([-3, -2, -1, 1, 2, 3]) for i in picks})


def flasque_suite(trials: int = 50, seed: int = 0) -> SuiteResult:
    def body():
        rep = hax(AmbientSpec.halfline(), [0, 1, 2], [1, 2, 3], WindowSchedule.for_scale(3, (4, 6, 8, 10, 12)))
        zero = all(rep.group(n) == Z0 and rep.degrees[n].stabilized for n in (0, 1, 2))
        rng = random.Random(seed)
        w = make_window(AmbientSpec.halfline(), 12, 6)
        shift = SpaceMap.from_rule(w, w, lambda p: (p[0] + 1,))
        wit = certify_flasqueness(w, shift)
        inner = w.core_ball(5)
        fails = []
        for t in range(trials):
            k, n, be = rng.choice([1, 2]), rng.choice([0, 1, 2]), rng.choice(BACKENDS)
            phi = random_cochain(rng, w, k, n, be, inner)
            if not swindle_apply(w, wit, phi, k).identity_holds:
                fails.append(t)
        return zero and not fails, {"groups": _groups(rep, (0, 1, 2)), "swindle_trials": trials,
                                    "swindle_failures": fails}
    return _timed("flasque vanishing and swindle", body)


# ---------------------------------------------------------------------------
# prism identity


def _catalog_windows() -> list[tuple[str, Window, int]]:
    """(name, window, max degree) for the prism suite; degrees kept small where ordered tuples explode."""
    return [
        ("Z", make_window(AmbientSpec.grid(1), 4, 4), 2),
        ("Z+", make_window(AmbientSpec.halfline(), 4, 4), 2),
        ("Z^2", make_window(AmbientSpec.grid(2), 1, 3), 1),
        ("Z+Z", make_window(AmbientSpec.free_union(AmbientSpec.grid(1), AmbientSpec.grid(1)), 3, 3), 2),
        ("finite", make_window(AmbientSpec.finite([[0, 1, 2, 2], [1, 0, 1, 3], [2, 1, 0, 2], [2, 3, 2, 0]]), 3, 0), 2),
    ]


def random_close_map(rng: random.Random, w: Window, spread: int = 1) -> SpaceMap:
    """A map moving every point at most ``spread`` inside the window."""
    return SpaceMap(w, w, {p: rng.choice(w.neighbors(p, spread)) for p in w.points})


def prism_suite(trials: int = 100, seed: int = 0) -> SuiteResult:
    def body():
        rng = random.Random(seed)
        cat = _catalog_windows()
        fails, seen = [], {}
        for t in range(trials):
            name, w, nmax = cat[t % len(cat)]
            f, g = random_close_map(rng, w), random_close_map(rng, w)
            k, n, be = 1, rng.randint(0, nmax), rng.choice(BACKENDS)
            ph = prism_homotopy(f, g, k, n, backend=be)
            m = len(ph.cod[n])
            vec = {i: rng.randint(-5, 5) for i in rng.sample(range(m), min(5, m))} if m else {}
            lhs, rhs = ph.apply_identity(vec)
            if not (ph.verify() and lhs == rhs):
                fails.append(t)
            seen[name] = seen.get(name, 0) + 1
        return not fails, {"trials": trials, "per_space": seen, "failures": fails}
    return _timed("prism identity", body)


# ---------------------------------------------------------------------------
# excision, additivity


def excision_suite() -> SuiteResult:
    def body():
        sch = WindowSchedule.for_scale(1, (4, 6, 8, 10, 12))
        w = schedule_window(AmbientSpec.grid(1), sch)
        pair = half_line_pair(w, 1, 4)
        rep = mv_check(pair, [0, 1, 2], sch)
        conn = rep.connecting_image.get(0)
        ok = rep.ok and rep.pro_inverse and conn == rep.groups["X"][1] == Z1
        return ok, {"pro_inverse": rep.pro_inverse, "naturality": rep.naturality, "exact": rep.exact,
                    "spots": [[s.name, s.degree, s.exact] for s in rep.spots],
                    "connecting_image_H1": str(conn),
                    "groups": {k: {str(n): str(g) for n, g in v.items()} for k, v in rep.groups.items()}}
    return _timed("excision and Mayer-Vietoris", body)


def additivity_suite() -> SuiteResult:
    def body():
        v = additivity_check([AmbientSpec.grid(1), AmbientSpec.grid(1)], [0, 1, 2], [1, 2],
                             WindowSchedule.for_scale(2, (4, 6, 8, 10, 12)))
        ok = v.ok and v.union.group(1) == AbelianGroup(2)
        return ok, {"union": _groups(v.union, (0, 1, 2)), "equal": {str(n): b for n, b in v.equal.items()},
                    "projections_iso": {str(n): b for n, b in v.projections_iso.items()}}
    return _timed("strong additivity", body)


# ---------------------------------------------------------------------------
# backend oracle


def _is_metric(n: int, d) -> bool:
    return all(d[i][k] <= d[i][j] + d[j][k] for i, j, k in itertools.permutations(range(n), 3))


def _canon(n: int, d) -> tuple:
    return min(tuple(d[p[i]][p[j]] for i in range(n) for j in range(i + 1, n))
               for p in itertools.permutations(range(n)))


def _table(n: int, upper: tuple) -> list[list[int]]:
    d = [[0] * n for _ in range(n)]
    for (i, j), v in zip(itertools.combinations(range(n), 2), upper):
        d[i][j] = d[j][i] = v
    return d


@lru_cache(maxsize=None)
def small_metric_spaces(max_points: int = 5, max_entry: int = 3) -> tuple[tuple, ...]:
    """Isometry classes of metric spaces with integer distances in 1..max_entry, as (n, canonical upper triangle)."""
    out: list[tuple] = []
    for n in range(1, max_points + 1):
        seen = set()
        for upper in itertools.product(range(1, max_entry + 1), repeat=n * (n - 1) // 2):
            d = _table(n, upper)
            if _is_metric(n, d):
                seen.add((n, _canon(n, d)))
        out.extend(sorted(seen))
    return tuple(out)


def threshold_graph_spaces(max_points: int = 6) -> list[list[list[int]]]:
    """One metric per isomorphism class of graphs on 1..max_points vertices: 1 on edges, 2 elsewhere.

    At scale k a finite space's controlled complex is the flag complex of
    its graph of k-related pairs, and every graph arises this way at k = 1,
    so these spaces exhaust the scale-1 and scale-2 complexes of every
    metric space on at most max_points points.
    """
    out = []
    for g in nx.graph_atlas_g():
        n = g.number_of_nodes()
        if 1 <= n <= max_points:
            out.append([[0 if i == j else (1 if g.has_edge(i, j) else 2) for j in range(n)] for i in range(n)])
    return out


def finite_cohomology(d, k: int, n: int, backend: str) -> AbelianGroup:
    """H^n of the controlled cochain complex of a finite metric space (every cochain is bounded)."""
    spec = AmbientSpec.finite(d)
    w = make_window(spec, max(max(r) for r in d), 0)
    b = {m: enumerate_controlled_simplices(w, k, m, None, backend, degree_cap=n + 1) for m in (n - 1, n, n + 1) if m >= 0}
    d_in = coboundary_matrix(b[n - 1], b[n], check=False) if n > 0 else SparseMatrix(len(b[n]), [])
    d_out = coboundary_matrix(b[n], b[n + 1], check=False)
    return cohomology_at(d_in, d_out).group


def backend_oracle_suite(degrees=(0, 1, 2), scales=(1, 2)) -> SuiteResult:
    def body():
        mismatches = []

        def compare(d, k, tag):
            for n in degrees:
                a = finite_cohomology(d, k, n, ALTERNATING)
                o = finite_cohomology(d, k, n, ORDERED)
                if a != o:
                    mismatches.append([tag, d, k, n, str(a), str(o)])

        metrics = small_metric_spaces()
        for n_pts, upper in metrics:
            for k in scales:
                compare(_table(n_pts, upper), k, "metric")
        graphs = threshold_graph_spaces()
        for d in graphs:
            compare(d, 1, "graph")
        ok = len(metrics) >= 200 and len(graphs) >= 200 and not mismatches
        return ok, {"metric_classes_up_to_5_points": len(metrics), "graph_classes_up_to_6_vertices": len(graphs),
                    "mismatches": mismatches}
    return _timed("backend oracle", body)


# ---------------------------------------------------------------------------
# pairing


def random_chain(rng: random.Random, w: Window, k: int, n: int, backend: str, region, size: int = 4) -> SparseChain:
    basis = enumerate_controlled_simplices(w, k, n, region, backend, degree_cap=n)
    picks = rng.sample(range(len(basis)), min(size, len(basis)))
    return SparseChain(n, k, backend, {basis.points_of(i): rng.choice([-2, -1, 1, 2]) for i in picks})


def pairing_suite(trials: int = 200, seed: int = 0) -> SuiteResult:
    def body():
        rng = random.Random(seed)
        windows = [make_window(AmbientSpec.grid(1), 5, 3), make_window(AmbientSpec.grid(2), 2, 3)]
        fails = []
        for t in range(trials):
            w = windows[t % 2]
            k, n, be = rng.choice([1, 2]), rng.randint(1, 2), rng.choice(BACKENDS)
            phi = random_cochain(rng, w, k, n - 1, be, w.core)
            c = random_chain(rng, w, k, n, be, w.core)
            if kronecker_pair(coboundary(w, phi), c) != kronecker_pair(phi, boundary(c)):
                fails.append(t)
        w = make_window(AmbientSpec.grid(1), 8, 4)
        crossing = {}
        for be in BACKENDS:
            audit = pair_classes(w, crossing_cochain(1, be), fundamental_chain(1, 1, be), trials=20, seed=seed)
            crossing[be] = audit.value
        ok = not fails and all(v == 1 for v in crossing.values())
        return ok, {"adjointness_trials": trials, "failures": fails, "crossing_x_fundamental": crossing}
    return _timed("pairing", body)


# ---------------------------------------------------------------------------
# Rips shadow


def rips_suite() -> SuiteResult:
    def body():
        cases = [("point", AmbientSpec.point(), {0: Z1, 1: Z0, 2: Z0}),
                 ("Z", AmbientSpec.grid(1), {0: Z0, 1: Z1, 2: Z0}),
                 ("Z^2", AmbientSpec.grid(2), {0: Z0, 1: Z0, 2: Z1}),
                 ("Z+", AmbientSpec.halfline(), {0: Z0, 1: Z0, 2: Z0})]
        out, ok = {}, True
        for name, spec, want in cases:
            rep = q_shadow(spec, [0, 1, 2], [1, 2], [1, 2, 3])
            out[name] = _groups(rep, want)
            ok &= rep.all_stabilized and all(rep.group(n) == g for n, g in want.items())
        return ok, {"groups": out}
    return _timed("Rips shadow", body)


# ---------------------------------------------------------------------------
# scale restriction


def restriction_suite(max_scale: int = 3, degrees=(0, 1, 2)) -> SuiteResult:
    def body():
        windows = {
            "point": make_window(AmbientSpec.point(), 0, 0),
            "Z": make_window(AmbientSpec.grid(1), 4, 4),
            "Z+": make_window(AmbientSpec.halfline(), 4, 4),
            "Z^2": make_window(AmbientSpec.grid(2), 1, 2),
            "Z+Z": make_window(AmbientSpec.free_union(AmbientSpec.grid(1), AmbientSpec.grid(1)), 3, 3),
        }
        bad = []
        for name, w in windows.items():
            for k in range(1, max_scale + 1):
                for n in degrees:
                    hi = enumerate_controlled_simplices(w, k + 1, n, None, ALTERNATING)
                    lo = enumerate_controlled_simplices(w, k, n, None, ALTERNATING)
                    r = restriction_matrix(hi, lo)
                    # full rank, and extension by zero is a right inverse, so r is onto over Z
                    section = r.matmul(restriction_matrix(lo, hi))
                    if rank_over_z(r) != len(lo) or any(c != {j: 1} for j, c in enumerate(section.cols)):
                        bad.append([name, k, n])
        return not bad, {"windows": sorted(windows), "failures": bad}
    return _timed("scale-restriction surjectivity", body)


# ---------------------------------------------------------------------------
# extension


def subadditivity_instance(rng: random.Random, w: Window) -> tuple[Fraction, Fraction, int]:
    """(Var_{U^k}(f, X - U^k[B]), k * Var_U(f, X - B), k) for a random f, interval B and k."""
    f = VariationFunction(w, {p: Fraction(rng.randint(-20, 20), rng.randint(1, 4)) for p in w.points})
    lo = rng.randint(-w.core_radius, w.core_radius)
    B = [p for p in w.points if lo <= p[0] <= lo + rng.randint(0, 3)]
    k = rng.randint(1, 4)
    pts = frozenset(w.points)
    left = u_variation(f, pts - power_thicken(w, B, 1, k), 1, power=k)
    right = k * u_variation(f, pts - frozenset(B), 1)
    return left, right, k


def extension_suite(trials: int = 100, seed: int = 0) -> SuiteResult:
    def body():
        w = make_window(AmbientSpec.grid(1), 200, 16)
        Y = frozenset(p for p in w.points if p[0] >= 0)
        f = VariationFunction(w, {y: Fraction(1, 1 + y[0]) for y in Y})
        runs, ok = {}, True
        for eps in (0.1, 0.01):
            cert = extend_function(w, Y, 1, f, eps)
            audit = verify_extension(cert, (1,), eps)
            prof = [float(v) for _, v in audit.profiles[1]]
            runs[str(eps)] = {"branch": cert.branch, "restriction_error": str(cert.restriction_error),
                              "exhaustion": cert.exhaustion, "profile": prof, "strict_steps": audit.strict_steps[1]}
            ok &= cert.restriction_error <= Fraction(repr(eps)) and audit.strict_steps[1] >= 3
        small = make_window(AmbientSpec.grid(1), 20, 4)
        pt = extend_function(small, {(0,)}, 1, VariationFunction(small, {(0,): Fraction(5)}), 0.1)
        Yc = frozenset(p for p in small.points if p[0] >= 0)
        const = extend_function(small, Yc, 1, VariationFunction(small, {y: Fraction(3) for y in Yc}), 0.1)
        exact_zero = pt.restriction_error == 0 and const.restriction_error == 0
        runs["bounded"] = {"branch": pt.branch, "restriction_error": str(pt.restriction_error)}
        runs["constant"] = {"branch": const.branch, "restriction_error": str(const.restriction_error)}
        rng = random.Random(seed)
        ws = make_window(AmbientSpec.grid(1), 10, 6)
        viol = []
        for t in range(trials):
            left, right, k = subadditivity_instance(rng, ws)
            if left > right:
                viol.append(t)
        runs["subadditivity"] = {"trials": trials, "violations": viol}
        return ok and exact_zero and not viol, runs
    return _timed("extension algorithm", body)


ACCEPTANCE: dict[str, Callable[[], SuiteResult]] = {
    "point": point_suite,
    "z": z_suite,
    "z2": z2_suite,
    "flasque": flasque_suite,
    "prism": prism_suite,
    "excision": excision_suite,
    "additivity": additivity_suite,
    "backend-oracle": backend_oracle_suite,
    "pairing": pairing_suite,
    "rips": rips_suite,
    "restriction": restriction_suite,
    "extension": extension_suite,
}
