from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sympy.utilities.iterables import partitions

from roelab.spaces import AmbientSpec, make_window
from roelab.suites import subadditivity_instance
from roelab.variation import (
    BOUNDED,
    COARSE_EQUIVALENCE,
    EMPTY,
    GENERAL,
    DegenerateGeometry,
    VariationFunction,
    WindowTooSmall,
    extend_function,
    nabla,
    power_thicken,
    random_variation_instance,
    rho_construct,
    u_variation,
    verify_extension,
)


def _line(core=10, pad=6):
    return make_window(AmbientSpec.grid(1), core, pad)


def test_variation_of_identity():
    w = _line()
    f = VariationFunction.from_rule(w, lambda p: p[0])
    assert u_variation(f, w.points, 3) == 3
    assert u_variation(f, w.points, 1, power=4) == 4


def test_variation_of_clamp():
    w = _line()
    f = VariationFunction.from_rule(w, lambda p: min(p[0], 5))
    pts = frozenset(w.points)
    B = [(x,) for x in range(0, 3)]
    left = u_variation(f, pts - power_thicken(w, B, 1, 3), 1, power=3)
    right = 3 * u_variation(f, pts - frozenset(B), 1)
    assert left == 3 and right == 3
    assert u_variation(f, [p for p in w.points if p[0] >= 5], 2) == 0


def test_variation_needs_domain():
    w = _line()
    f = VariationFunction(w, {(0,): 1})
    with pytest.raises(ValueError):
        u_variation(f, [(0,), (1,)], 1)


def test_rejects_non_finite_values():
    w = _line()
    with pytest.raises(ValueError):
        VariationFunction(w, {(0,): float("inf")})


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10_000))
def test_power_subadditivity(seed):
    left, right, _ = subadditivity_instance(random.Random(seed), _line(10, 6))
    assert left <= right


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 3))
def test_doubling_bound_on_z(seed, R):
    w = _line(6, 6)
    f = random_variation_instance(random.Random(seed), w)
    for x in w.core_ball(3):
        near = max(nabla(f, R, y) for y in w.neighbors(x, R))
        assert nabla(f, 2 * R, x) <= 2 * near


def test_rho_examples():
    assert rho_construct([0, 2, 2, 8, 8, 8]).rho == [0, 1, 1, 2, 2, 3]
    lin = rho_construct(list(range(10)))
    assert lin.rho == [Fraction(t, 2) for t in range(10)]
    assert lin(100) == Fraction(9, 2)


def test_rho_degenerate_and_bad_tables():
    with pytest.raises(DegenerateGeometry):
        rho_construct([0, 0, 1, 2])
    with pytest.raises(ValueError):
        rho_construct([0, 3, 2])
    with pytest.raises(ValueError):
        rho_construct([1, 2])
    with pytest.raises(ValueError):
        rho_construct([])


def _composition_min(half, t):
    # min over multisets of positive parts summing to t of the sum of half(part)
    return min(sum(half[p] * m for p, m in part.items()) for part in partitions(t))


@settings(max_examples=80, deadline=None)
@given(st.lists(st.integers(0, 6), min_size=1, max_size=9))
def test_rho_is_the_largest_subadditive_minorant(steps):
    tilde = [0]
    for s in steps:
        tilde.append(tilde[-1] + s + (1 if len(tilde) == 1 else 0))
    table = rho_construct(tilde)
    half = [Fraction(v, 2) for v in tilde]
    rho = table.rho
    for t in range(1, len(rho)):
        assert rho[t] == _composition_min(half, t)
        assert rho[t] <= half[t] and rho[t] >= rho[t - 1] and rho[t] > 0
        for a in range(1, t):
            assert rho[t] <= rho[a] + rho[t - a]


def test_halfline_in_line_uses_the_retraction():
    w = make_window(AmbientSpec.grid(1), 200, 16)
    Y = frozenset(p for p in w.points if p[0] >= 0)
    f = VariationFunction(w, {y: Fraction(1, 1 + y[0]) for y in Y})
    cert = extend_function(w, Y, 1, f, 0.1)
    assert cert.branch == COARSE_EQUIVALENCE and cert.restriction_error == 0
    audit = verify_extension(cert, (1,))
    assert audit.ok and audit.strict_steps[1] >= 3
    # the extension is constant on the left ray
    assert {cert.f_tilde(p) for p in w.points if p[0] < 0} == {1}


def test_bounded_and_constant_inputs_are_exact():
    w = make_window(AmbientSpec.grid(1), 20, 4)
    pt = extend_function(w, {(0,)}, 1, VariationFunction(w, {(0,): Fraction(5)}), 0.1)
    assert pt.branch == BOUNDED and pt.restriction_error == 0
    assert set(pt.f_tilde.values.values()) == {5}
    Y = frozenset(p for p in w.points if p[0] >= 0)
    const = extend_function(w, Y, 1, VariationFunction(w, {y: 3 for y in Y}), 0.1)
    assert const.restriction_error == 0


def test_plane_relative_to_a_line_uses_the_general_branch():
    w = make_window(AmbientSpec.grid(2), 8, 4)
    Y = frozenset(p for p in w.points if p[1] == 0)
    f = VariationFunction(w, {y: Fraction(y[0] % 3, 100) for y in Y})
    cert = extend_function(w, Y, 1, f, 0.1)
    assert cert.branch == GENERAL
    assert cert.restriction_error <= Fraction(1, 10)
    run = cert.components[0]
    assert set(run.partition) == set(run.F)
    assert all(0 <= v <= 1 for v in run.psi.values())
    assert verify_extension(cert).ok


def test_untouched_component_is_zero():
    w = make_window(AmbientSpec.free_union(AmbientSpec.grid(1), AmbientSpec.grid(1)), 60, 8)
    Y = frozenset(p for p in w.points if p[0] == 0 and p[1][0] >= 0)
    f = VariationFunction(w, {y: Fraction(1, 1 + y[1][0]) for y in Y})
    cert = extend_function(w, Y, 1, f, 0.1)
    assert cert.component_branches == [COARSE_EQUIVALENCE, EMPTY]
    assert {cert.f_tilde(p) for p in w.points if p[0] == 1} == {0}


def test_extension_input_errors():
    w = _line(20, 4)
    Y = frozenset(p for p in w.points if p[0] % 2 == 0)
    f = VariationFunction(w, {y: 1 for y in Y})
    with pytest.raises(ValueError):
        extend_function(w, Y, 1, f, 0.1)
    half = frozenset(p for p in w.points if p[0] >= 0)
    g = VariationFunction(w, {y: 1 for y in half})
    with pytest.raises(ValueError):
        extend_function(w, half, 1, g, 0)
    tight = make_window(AmbientSpec.grid(1), 20, 1)
    with pytest.raises(WindowTooSmall):
        extend_function(tight, frozenset(p for p in tight.points if p[0] >= 0), 1,
                        VariationFunction(tight, {p: 1 for p in tight.points if p[0] >= 0}), 0.1)


def test_small_window_reports_exhaustion_failure():
    w = make_window(AmbientSpec.grid(1), 20, 8)
    Y = frozenset(p for p in w.points if p[0] >= 0)
    f = VariationFunction(w, {y: Fraction(1, 1 + y[0]) for y in Y})
    with pytest.raises(WindowTooSmall):
        extend_function(w, Y, 1, f, 0.01)
