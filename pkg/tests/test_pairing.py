from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from roelab.cohomology import WindowSchedule, schedule_window, windowed_cohomology
from roelab.complexes import (
    ALTERNATING,
    ORDERED,
    SparseCochain,
    coboundary,
    coboundary_matrix,
    enumerate_controlled_simplices,
    pullback,
)
from roelab.pairing import (
    PairingAuditError,
    SparseChain,
    boundary,
    boundary_matrix,
    boundary_on,
    crossing_cochain,
    fundamental_chain,
    kronecker_pair,
    pair_classes,
    pushforward,
)
from roelab.spaces import AmbientSpec, SpaceMap, make_window
from roelab.suites import random_chain, random_cochain

BACKENDS = (ALTERNATING, ORDERED)


def test_boundary_of_an_edge():
    c = SparseChain(1, 1, ALTERNATING, {((0,), (1,)): 1})
    assert boundary(c).values == {((1,),): 1, ((0,),): -1}


def test_chain_normalizes_orientation():
    c = SparseChain(1, 1, ALTERNATING, {((1,), (0,)): 2})
    assert c.values == {((0,), (1,)): -2}
    assert c([(1,), (0,)]) == 2


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 3), st.sampled_from(BACKENDS))
def test_boundary_squares_to_zero(seed, n, backend):
    w = make_window(AmbientSpec.grid(1), 5, 2)
    c = random_chain(random.Random(seed), w, 2, n, backend, w.core, size=6)
    assert boundary(boundary(c)).values == {}


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 2), st.sampled_from(BACKENDS), st.booleans())
def test_adjointness(seed, n, backend, planar):
    rng = random.Random(seed)
    w = make_window(AmbientSpec.grid(2), 2, 3) if planar else make_window(AmbientSpec.grid(1), 5, 3)
    k = 1 if planar else rng.choice([1, 2])
    phi = random_cochain(rng, w, k, n - 1, backend, w.core)
    c = random_chain(rng, w, k, n, backend, w.core)
    assert kronecker_pair(coboundary(w, phi), c) == kronecker_pair(phi, boundary(c))


@pytest.mark.parametrize("backend", BACKENDS)
def test_boundary_matrix_is_transpose_of_coboundary(backend):
    w = make_window(AmbientSpec.grid(1), 3, 0)
    b0 = enumerate_controlled_simplices(w, 2, 0, None, backend)
    b1 = enumerate_controlled_simplices(w, 2, 1, None, backend)
    d = coboundary_matrix(b0, b1, check=False)
    bd = boundary_matrix(b1, b0)
    for j, col in enumerate(d.cols):
        for i, a in col.items():
            assert bd.cols[i].get(j, 0) == a
    assert sum(len(c) for c in d.cols) == sum(len(c) for c in bd.cols)


@pytest.mark.parametrize("backend", BACKENDS)
def test_fundamental_chains_are_cycles(backend):
    w = make_window(AmbientSpec.grid(1), 6, 3)
    assert boundary_on(w, fundamental_chain(1, 1, backend), w.core_ball(4)).values == {}
    w2 = make_window(AmbientSpec.grid(2), 3, 2)
    assert boundary_on(w2, fundamental_chain(2, 1, backend), w2.core_ball(2)).values == {}


@pytest.mark.parametrize("backend", BACKENDS)
def test_crossing_pairs_to_one(backend):
    w = make_window(AmbientSpec.grid(1), 8, 4)
    audit = pair_classes(w, crossing_cochain(1, backend), fundamental_chain(1, 1, backend), trials=20)
    assert audit.value == 1 and set(audit.values) == {1}


def test_computed_generators_pair_to_one():
    sch = WindowSchedule.for_scale(1, (4, 6, 8, 10))
    tw = windowed_cohomology(AmbientSpec.grid(1), 1, 1, sch)
    w = schedule_window(AmbientSpec.grid(1), sch)
    phi = tw.entries[tw.stabilized_at].rep_cochains()[0]
    assert abs(pair_classes(w, phi, fundamental_chain(1)).value) == 1

    sch2 = WindowSchedule.for_scale(1, (1, 2, 3, 4))
    tw2 = windowed_cohomology(AmbientSpec.grid(2), 1, 2, sch2)
    w2 = schedule_window(AmbientSpec.grid(2), sch2)
    phi2 = tw2.entries[tw2.stabilized_at].rep_cochains()[0]
    assert abs(pair_classes(w2, phi2, fundamental_chain(2), trials=5).value) == 1


@pytest.mark.parametrize("backend", BACKENDS)
def test_zero_class_pairs_to_zero(backend):
    w = make_window(AmbientSpec.grid(1), 8, 4)
    exact = coboundary(w, SparseCochain(0, 1, backend, {((3,),): 1, ((4,),): 1}))
    assert pair_classes(w, exact, fundamental_chain(1, 1, backend), trials=10).value == 0


def test_audit_rejects_non_cocycles():
    w = make_window(AmbientSpec.grid(1), 8, 4)
    with pytest.raises(PairingAuditError):
        pair_classes(w, SparseCochain(0, 1, ALTERNATING, {((0,),): 1}), SparseChain(0, 1, ALTERNATING, {((0,),): 1}))


def test_degree_mismatch():
    with pytest.raises(ValueError):
        kronecker_pair(SparseCochain(0, 1, ALTERNATING, {((0,),): 1}), SparseChain(1, 1, ALTERNATING))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(0, 2), st.sampled_from(BACKENDS), st.sampled_from([1, -1, 2]))
def test_naturality_under_shifts(seed, n, backend, shift):
    rng = random.Random(seed)
    w = make_window(AmbientSpec.grid(1), 8, 4)
    m = SpaceMap.from_rule(w, w, lambda p: (p[0] + shift,))
    phi = random_cochain(rng, w, 1, n, backend, w.core_ball(5))
    c = random_chain(rng, w, 1, n, backend, w.core_ball(5))
    assert kronecker_pair(pullback(m, phi, 1), c) == kronecker_pair(phi, pushforward(m, c, 1))
