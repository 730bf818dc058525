from __future__ import annotations

import itertools
import random

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sympy import Matrix

from roelab.cohomology import WindowSchedule, hax
from roelab.rips import BudgetExceeded, build_rips, q_shadow, rips_pair_cohomology
from roelab.snf import AbelianGroup
from roelab.spaces import AmbientSpec, make_window

Z0, Z1 = AbelianGroup(0), AbelianGroup(1)


def _graph(w, k, region=None):
    g = nx.Graph()
    pts = [p for p in w.points if region is None or p in region]
    g.add_nodes_from(pts)
    g.add_edges_from((p, q) for p, q in itertools.combinations(pts, 2) if w.dist(p, q) <= k)
    return g


def _clique_counts(g, cap):
    counts = [0] * (cap + 1)
    for c in nx.enumerate_all_cliques(g):
        if len(c) > cap + 1:
            break
        counts[len(c) - 1] += 1
    return counts


def test_segment_counts():
    cx = build_rips(make_window(AmbientSpec.grid(1), 3, 0), 1)
    assert [cx.count(n) for n in range(3)] == [7, 6, 0]


@pytest.mark.parametrize("spec,core,k", [
    (AmbientSpec.grid(2), 2, 1), (AmbientSpec.grid(1), 4, 3), (AmbientSpec.halfline(), 5, 2),
    (AmbientSpec.finite([[0, 1, 2, 2], [1, 0, 1, 3], [2, 1, 0, 2], [2, 3, 2, 0]]), 3, 2),
])
def test_counts_match_networkx_cliques(spec, core, k):
    w = make_window(spec, core, 0)
    cx = build_rips(w, k, dim_cap=3)
    assert [cx.count(n) for n in range(4)] == _clique_counts(_graph(w, k), 3)


def test_free_union_splits_into_components():
    w = make_window(AmbientSpec.free_union(AmbientSpec.grid(1), AmbientSpec.grid(1)), 3, 0)
    cx = build_rips(w, 2)
    parts = cx.components()
    assert len(parts) == 2
    for n in range(cx.dim_cap + 1):
        assert sum(p.count(n) for p in parts) == cx.count(n)
        assert parts[0].count(n) == parts[1].count(n)


def test_budget():
    w = make_window(AmbientSpec.grid(2), 4, 0)
    with pytest.raises(BudgetExceeded):
        build_rips(w, 2, budget=500)


def test_pair_needs_the_thickening():
    w = make_window(AmbientSpec.grid(1), 3, 0)
    with pytest.raises(ValueError):
        rips_pair_cohomology(w, 1, w.core, [0])


def test_line_relative_to_two_rays():
    w = make_window(AmbientSpec.grid(1), 6, 2)
    pair = rips_pair_cohomology(w, 1, w.core_ball(2), [0, 1])
    assert pair[0].group == Z0 and pair[1].group == Z1


def _relative_ranks(w, k, B, degrees, cap):
    """Rational ranks of H^n(P, P minus B) from networkx cliques and sympy ranks."""
    region = w.thicken(B, k)
    g = _graph(w, k, region)
    order = {p: i for i, p in enumerate(w.points)}
    sims = {n: [] for n in range(cap + 1)}
    for c in nx.enumerate_all_cliques(g):
        if len(c) > cap + 1:
            break
        if any(p in B for p in c):
            sims[len(c) - 1].append(tuple(sorted(c, key=order.__getitem__)))

    def rank_d(n):
        # d: C^n -> C^{n+1}
        if n < 0 or not sims[n] or not sims.get(n + 1):
            return 0
        idx = {s: i for i, s in enumerate(sims[n])}
        rows = []
        for t in sims[n + 1]:
            row = [0] * len(sims[n])
            for i in range(len(t)):
                face = t[:i] + t[i + 1:]
                if face in idx:
                    row[idx[face]] += (-1) ** i
            rows.append(row)
        return Matrix(rows).rank()

    return {n: len(sims[n]) - rank_d(n) - rank_d(n - 1) for n in degrees}


@settings(max_examples=40, deadline=None)
@given(st.sets(st.tuples(st.integers(0, 3), st.integers(0, 3)), min_size=2, max_size=7),
       st.integers(1, 3), st.integers(0, 10_000))
def test_relative_ranks_match_independent_oracle(cloud, k, seed):
    # taxicab distances between random lattice points give a finite metric space
    pts = sorted(cloud)
    d = [[abs(a[0] - b[0]) + abs(a[1] - b[1]) for b in pts] for a in pts]
    rng = random.Random(seed)
    w = make_window(AmbientSpec.finite(d), 12, 0)
    B = frozenset(rng.sample(list(w.points), rng.randint(1, len(w))))
    ours = rips_pair_cohomology(w, k, B, [0, 1, 2])
    oracle = _relative_ranks(w, k, B, [0, 1, 2], 3)
    assert {n: e.group.rank for n, e in ours.items()} == oracle


@pytest.mark.parametrize("spec,schedule,want", [
    (AmbientSpec.point(), WindowSchedule((1, 2, 3, 4), 15), {0: Z1, 1: Z0}),
    (AmbientSpec.grid(1), WindowSchedule.for_scale(2, (4, 6, 8, 10)), {0: Z0, 1: Z1}),
    (AmbientSpec.halfline(), WindowSchedule.for_scale(2, (4, 6, 8, 10)), {0: Z0, 1: Z0}),
])
def test_shadow_agrees_with_hax(spec, schedule, want):
    shadow = q_shadow(spec, [0, 1], [1, 2], [1, 2, 3])
    direct = hax(spec, [0, 1], [1, 2], schedule)
    assert shadow.all_stabilized and direct.all_stabilized
    for n, g in want.items():
        assert shadow.group(n) == direct.group(n) == g


def test_shadow_of_two_lines():
    rep = q_shadow(AmbientSpec.free_union(AmbientSpec.grid(1), AmbientSpec.grid(1)), [0, 1], [1], [1, 2, 3])
    assert rep.group(1) == AbelianGroup(2) and rep.group(0) == Z0


def test_shadow_needs_two_radii():
    with pytest.raises(ValueError):
        q_shadow(AmbientSpec.grid(1), [0], [1], [2])
