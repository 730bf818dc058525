from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from roelab.complexes import (
    ALTERNATING,
    ORDERED,
    DegreeCapError,
    SparseCochain,
    WindowTooSmall,
    canonical,
    coboundary,
    coboundary_matrix,
    enumerate_controlled_simplices,
    pullback,
    pullback_matrix,
    relative_basis,
    restriction_matrix,
)
from roelab.snf import SparseMatrix
from roelab.spaces import AmbientSpec, SpaceMap, make_window
from roelab.suites import random_cochain

BACKENDS = (ALTERNATING, ORDERED)


def _compose(a: SparseMatrix, b: SparseMatrix) -> list:
    # columns of a @ b, as dicts
    out = []
    for col in b.cols:
        acc: dict = {}
        for j, x in col.items():
            for i, y in a.cols[j].items():
                acc[i] = acc.get(i, 0) + x * y
        out.append({i: v for i, v in acc.items() if v})
    return out


@pytest.mark.parametrize("backend", BACKENDS)
def test_point_has_one_vertex_and_nothing_else(backend):
    w = make_window(AmbientSpec.point(), 0, 3)
    assert len(enumerate_controlled_simplices(w, 3, 0, backend=backend)) == 1
    for n in (1, 2, 3):
        assert len(enumerate_controlled_simplices(w, 3, n, backend=backend)) == 0


def test_edge_counts_on_a_segment():
    w = make_window(AmbientSpec.grid(1), 2, 0)
    assert len(enumerate_controlled_simplices(w, 1, 1, backend=ALTERNATING)) == 4
    assert len(enumerate_controlled_simplices(w, 1, 1, backend=ORDERED)) == 8
    assert len(enumerate_controlled_simplices(w, 1, 2, backend=ALTERNATING)) == 0


def test_degree_cap_enforced():
    w = make_window(AmbientSpec.grid(1), 2, 0)
    with pytest.raises(DegreeCapError):
        enumerate_controlled_simplices(w, 1, 4)


def test_two_point_coboundary():
    w = make_window(AmbientSpec.finite([[0, 1], [1, 0]]), 1, 0)
    b0 = enumerate_controlled_simplices(w, 1, 0)
    b1 = enumerate_controlled_simplices(w, 1, 1)
    d0 = coboundary_matrix(b0, b1)
    assert len(b1) == 1
    assert [d0.cols[c].get(0, 0) for c in range(2)] == [-1, 1]


def test_two_points_at_scale_zero_have_no_edges():
    w = make_window(AmbientSpec.finite([[0, 1], [1, 0]]), 1, 0)
    b1 = enumerate_controlled_simplices(w, 0, 1)
    d0 = coboundary_matrix(enumerate_controlled_simplices(w, 0, 0), b1)
    assert len(b1) == 0 and all(not c for c in d0.cols)


def test_coboundary_refuses_truncated_windows():
    w = make_window(AmbientSpec.grid(1), 4, 1)
    b0 = enumerate_controlled_simplices(w, 2, 0)
    b1 = enumerate_controlled_simplices(w, 2, 1)
    with pytest.raises(WindowTooSmall):
        coboundary_matrix(b0, b1)


def test_relative_basis():
    w = make_window(AmbientSpec.grid(1), 3, 0)
    full = enumerate_controlled_simplices(w, 1, 1)
    assert len(relative_basis(w, 1, 1, None, [])) == len(full)
    assert len(relative_basis(w, 1, 1, None, w.points)) == 0
    half = [p for p in w.points if p[0] >= 0]
    assert len(relative_basis(w, 1, 1, None, half)) == 3


def test_restriction_to_smaller_scale():
    w = make_window(AmbientSpec.grid(1), 3, 0)
    big = enumerate_controlled_simplices(w, 2, 1)
    small = enumerate_controlled_simplices(w, 1, 1)
    r = restriction_matrix(big, small)
    assert sum(len(c) for c in r.cols) == len(small)


def test_canonical_signs():
    assert canonical([(1,), (0,)], ALTERNATING) == (-1, ((0,), (1,)))
    assert canonical([(0,), (0,)], ALTERNATING)[0] == 0
    assert canonical([(1,), (0,)], ORDERED) == (1, ((1,), (0,)))
    assert canonical([(0,), (1,), (0,)], ORDERED)[0] == 1
    assert canonical([(0,), (0,), (1,)], ORDERED)[0] == 0


def test_sparse_cochain_evaluation_alternating():
    phi = SparseCochain(1, 1, ALTERNATING, {((0,), (1,)): 5})
    assert phi([(1,), (0,)]) == -5
    assert (phi - phi).is_zero()


WINDOWS = [
    (AmbientSpec.grid(1), 4, BACKENDS),
    (AmbientSpec.halfline(), 4, BACKENDS),
    (AmbientSpec.grid(2), 1, (ALTERNATING,)),
    (AmbientSpec.finite([[0, 1, 2, 3], [1, 0, 1, 2], [2, 1, 0, 1], [3, 2, 1, 0]]), 3, BACKENDS),
]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, len(WINDOWS) - 1), st.integers(1, 3), st.integers(0, 1), st.integers(0, 1))
def test_d_squared_is_zero(which, k, n, bi):
    spec, core, backends = WINDOWS[which]
    backend = backends[bi % len(backends)]
    if spec.kind == "grid" and spec.params == (2,):
        k = 1
    w = make_window(spec, core, 2 * k + 1)
    region = w.core
    b0 = enumerate_controlled_simplices(w, k, n, region, backend)
    b1 = enumerate_controlled_simplices(w, k, n + 1, w.thicken(region, k), backend)
    b2 = enumerate_controlled_simplices(w, k, n + 2, w.thicken(region, 2 * k), backend)
    d0 = coboundary_matrix(b0, b1, check=False)
    d1 = coboundary_matrix(b1, b2, check=False)
    assert all(not c for c in _compose(d1, d0))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.integers(0, 1), st.sampled_from(BACKENDS))
def test_direct_coboundary_squares_to_zero(seed, n, backend):
    w = make_window(AmbientSpec.grid(1), 6, 6)
    phi = random_cochain(random.Random(seed), w, 2, n, backend, w.core_ball(2))
    assert coboundary(w, coboundary(w, phi)).is_zero()


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.integers(0, 1), st.sampled_from(BACKENDS), st.sampled_from([1, -2]))
def test_pullback_is_a_chain_map(seed, n, backend, shift):
    w = make_window(AmbientSpec.grid(1), 8, 6)
    m = SpaceMap.from_rule(w, w, lambda p: (p[0] + shift,))
    phi = random_cochain(random.Random(seed), w, 1, n, backend, w.core_ball(3))
    lhs = pullback(m, coboundary(w, phi), 1)
    rhs = coboundary(w, pullback(m, phi, 1))
    assert lhs == rhs


def test_pullback_along_doubling():
    dom = make_window(AmbientSpec.grid(1), 3, 1)
    cod = make_window(AmbientSpec.grid(1), 8, 2)
    m = SpaceMap.from_rule(dom, cod, lambda p: (2 * p[0],))
    phi = SparseCochain(1, 2, ALTERNATING, {((0,), (2,)): 7})
    out = pullback(m, phi, 1)
    assert out.values == {((0,), (1,)): 7}
    with pytest.raises(ValueError):
        pullback(m, SparseCochain(1, 1, ALTERNATING, {((0,), (1,)): 1}), 1)


@pytest.mark.parametrize("backend", BACKENDS)
def test_pullback_matrix_agrees_with_pointwise_pullback(backend):
    w = make_window(AmbientSpec.grid(1), 4, 2)
    m = SpaceMap.from_rule(w, w, lambda p: (max(-6, min(6, -p[0])),))
    b = enumerate_controlled_simplices(w, 1, 1, w.core, backend)
    mat = pullback_matrix(m, enumerate_controlled_simplices(w, 1, 1, None, backend), b)
    rng = random.Random(3)
    full = enumerate_controlled_simplices(w, 1, 1, None, backend)
    for _ in range(10):
        vec = {i: rng.randint(-2, 2) for i in rng.sample(range(len(full)), 4)}
        phi = full.cochain(vec)
        direct = pullback(m, phi, 1)
        via = b.cochain(mat.apply(vec))
        assert via == SparseCochain(1, 1, backend, {s: a for s, a in direct.values.items() if set(s) <= w.core})
