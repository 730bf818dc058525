from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from roelab.cohomology import WindowSchedule, schedule_window
from roelab.complexes import ALTERNATING, ORDERED, SparseCochain
from roelab.snf import AbelianGroup
from roelab.spaces import AmbientSpec, SpaceMap, certify_flasqueness, make_window
from roelab.suites import random_close_map, random_cochain
from roelab.verification import (
    VerificationError,
    additivity_check,
    half_line_pair,
    mv_check,
    prism_homotopy,
    prism_scale,
    swindle_apply,
)

Z0, Z1 = AbelianGroup(0), AbelianGroup(1)


def test_prism_identity_for_a_shift():
    w = make_window(AmbientSpec.grid(1), 4, 3)
    f = SpaceMap.identity(w)
    g = SpaceMap.from_rule(w, w, lambda p: (p[0] + 1,))
    for n in (0, 1, 2):
        for be in (ALTERNATING, ORDERED):
            ph = prism_homotopy(f, g, 1, n, backend=be)
            assert ph.k_codomain == prism_scale(f, g, 1, n, w.core) == 2 - (n == 0)
            assert ph.verify()


def test_prism_rejects_small_codomain_scale():
    w = make_window(AmbientSpec.grid(1), 4, 3)
    g = SpaceMap.from_rule(w, w, lambda p: (p[0] + 1,))
    with pytest.raises(VerificationError):
        prism_homotopy(SpaceMap.identity(w), g, 1, 1, k_codomain=1)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.integers(0, 2), st.sampled_from([ALTERNATING, ORDERED]))
def test_prism_identity_random_close_maps(seed, n, backend):
    rng = random.Random(seed)
    w = make_window(AmbientSpec.free_union(AmbientSpec.grid(1), AmbientSpec.halfline()), 3, 3)
    ph = prism_homotopy(random_close_map(rng, w), random_close_map(rng, w), 1, n, backend=backend)
    assert ph.verify()


def test_mv_on_z():
    sch = WindowSchedule.for_scale(1, (4, 6, 8, 10, 12))
    pair = half_line_pair(schedule_window(AmbientSpec.grid(1), sch), 1, 4)
    rep = mv_check(pair, [0, 1], sch)
    assert rep.ok
    assert rep.groups["ZY"][0] == Z1 and rep.groups["X"][1] == Z1
    assert rep.connecting_image[0] == Z1


def test_mv_on_z2():
    sch = WindowSchedule.for_scale(1, (1, 2, 3, 4, 5))
    pair = half_line_pair(schedule_window(AmbientSpec.grid(2), sch), 1, 3, axis=1)
    rep = mv_check(pair, [0, 1], sch)
    assert rep.ok
    assert rep.groups["ZY"][1] == Z1 and rep.groups["X"][2] == Z1
    assert rep.connecting_image[1] == Z1


def _halfline_witness():
    w = make_window(AmbientSpec.halfline(), 12, 6)
    return w, certify_flasqueness(w, SpaceMap.from_rule(w, w, lambda p: (p[0] + 1,)))


def test_swindle_on_delta_zero():
    w, wit = _halfline_witness()
    res = swindle_apply(w, wit, SparseCochain(0, 1, ALTERNATING, {((0,),): 1}), 1)
    assert res.n0 == 1 and res.S.values == {((0,),): 1}
    assert res.identity_holds


def test_swindle_on_delta_five():
    w, wit = _halfline_witness()
    res = swindle_apply(w, wit, SparseCochain(0, 1, ALTERNATING, {((5,),): 1}), 1)
    assert res.n0 == 6
    assert res.S.values == {((x,),): 1 for x in range(6)}
    assert res.identity_holds


def test_swindle_on_zero():
    w, wit = _halfline_witness()
    res = swindle_apply(w, wit, SparseCochain(1, 1, ALTERNATING), 1)
    assert res.S.is_zero() and res.identity_holds


def test_swindle_rejects_support_outside_core():
    w, wit = _halfline_witness()
    with pytest.raises(VerificationError):
        swindle_apply(w, wit, SparseCochain(0, 1, ALTERNATING, {((15,),): 1}), 1)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.integers(0, 2), st.sampled_from([1, 2]), st.sampled_from([ALTERNATING, ORDERED]))
def test_swindle_identity_random(seed, n, k, backend):
    w, wit = _halfline_witness()
    phi = random_cochain(random.Random(seed), w, k, n, backend, w.core_ball(5))
    assert swindle_apply(w, wit, phi, k).identity_holds


def test_additivity_two_points():
    v = additivity_check([AmbientSpec.point(), AmbientSpec.point()], [0, 1], [1, 2], WindowSchedule((1, 2, 3, 4), 15))
    assert v.ok and v.union.group(0) == AbelianGroup(2)


def test_additivity_line_and_halfline():
    v = additivity_check([AmbientSpec.grid(1), AmbientSpec.halfline()], [0, 1], [1, 2],
                         WindowSchedule.for_scale(2, (4, 6, 8, 10, 12)))
    assert v.ok and v.union.group(1) == Z1 and v.union.group(0) == Z0


def test_additivity_needs_two_parts():
    with pytest.raises(ValueError):
        additivity_check([AmbientSpec.point()], [0], [1], WindowSchedule((1, 2, 3), 15))
