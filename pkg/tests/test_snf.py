from __future__ import annotations

import itertools
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sympy import Matrix, ZZ
from sympy.matrices.normalforms import invariant_factors as sympy_invariants

from roelab.snf import (
    AbelianGroup,
    SNFError,
    SparseMatrix,
    cohomology_at,
    determinant,
    direct_sum,
    image_membership,
    invariant_factors,
    rank_mod_p,
    rank_over_z,
    smith_normal_form,
)

small_matrices = st.integers(1, 5).flatmap(
    lambda r: st.integers(1, 5).flatmap(
        lambda c: st.lists(st.lists(st.integers(-3, 3), min_size=c, max_size=c), min_size=r, max_size=r)))


def test_snf_diag_2_3():
    res = smith_normal_form([[2, 0], [0, 3]])
    assert res.diagonal == [1, 6]
    assert res.verify([[2, 0], [0, 3]])


def test_snf_zero_and_identity():
    z = smith_normal_form([[0, 0], [0, 0]])
    assert z.diagonal == [0, 0]
    assert z.U == [[1, 0], [0, 1]] and z.V == [[1, 0], [0, 1]]
    eye = [[int(i == j) for j in range(4)] for i in range(4)]
    assert smith_normal_form(eye).diagonal == [1, 1, 1, 1]


@settings(max_examples=150, deadline=None)
@given(small_matrices)
def test_snf_reconstruction_and_divisibility(rows):
    res = smith_normal_form(rows)
    assert res.verify(rows)
    diag = [abs(d) for d in res.diagonal]
    nz = [d for d in diag if d]
    assert all(b % a == 0 for a, b in zip(nz, nz[1:]))
    # zeros only at the end
    assert diag == nz + [0] * (len(diag) - len(nz))


@settings(max_examples=150, deadline=None)
@given(small_matrices)
def test_invariant_factors_match_sympy(rows):
    ours = [abs(d) for d in invariant_factors(rows)]
    theirs = [abs(int(x)) for x in sympy_invariants(Matrix(rows), domain=ZZ) if x != 0]
    assert ours == theirs


@settings(max_examples=100, deadline=None)
@given(small_matrices)
def test_rank_over_z_matches_sympy(rows):
    m = SparseMatrix.from_dense(rows)
    assert rank_over_z(m) == Matrix(rows).rank()
    assert rank_mod_p(m) == Matrix(rows).rank()


def test_determinant_small():
    assert determinant([[2, 1], [7, 4]]) == 1
    assert determinant([[1, 2, 3], [4, 5, 6], [7, 8, 10]]) == -3


def test_cohomology_at_cokernel_of_doubling():
    d_in = SparseMatrix.from_dense([[2]])
    d_out = SparseMatrix.zeros(0, 1)
    assert cohomology_at(d_in, d_out).group == AbelianGroup(0, (2,))


def test_cohomology_at_free_rank_three():
    assert cohomology_at(SparseMatrix.zeros(3, 0), SparseMatrix.zeros(0, 3)).group == AbelianGroup(3)


def test_cohomology_circle():
    # two vertices a, b and two edges e1 = (a, b), e2 = (a, b): d0 = [[-1, 1], [-1, 1]]
    d0 = SparseMatrix.from_dense([[-1, 1], [-1, 1]])
    d1 = SparseMatrix.zeros(0, 2)
    h1 = cohomology_at(d0, d1)
    assert h1.group == AbelianGroup(1)
    h0 = cohomology_at(SparseMatrix.zeros(2, 0), d0)
    assert h0.group == AbelianGroup(1)


def test_cohomology_rejects_noncomplex():
    with pytest.raises(SNFError):
        cohomology_at(SparseMatrix.from_dense([[1]]), SparseMatrix.from_dense([[1]]))


@settings(max_examples=120, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.integers(1, 4), st.data())
def test_cohomology_at_against_sympy(a, b, c, data):
    # random d_in: Z^a -> Z^b with d_out: Z^b -> Z^c chosen so that d_out d_in = 0
    ent = st.integers(-3, 3)
    rows_in = data.draw(st.lists(st.lists(ent, min_size=a, max_size=a), min_size=b, max_size=b))
    m_in = Matrix(rows_in)
    left = m_in.T.nullspace()
    picks = data.draw(st.lists(st.lists(ent, min_size=len(left), max_size=len(left)), min_size=c, max_size=c)) if left else []
    out_rows = []
    for coeffs in picks:
        v = sum((ci * vec for ci, vec in zip(coeffs, left)), Matrix.zeros(b, 1))
        den = 1
        for x in v:
            den = den * x.q // math.gcd(den, x.q)
        out_rows.append([int(x * den) for x in v])
    d_in = SparseMatrix.from_dense(rows_in, a)
    d_out = SparseMatrix.from_dense(out_rows, b) if out_rows else SparseMatrix.zeros(0, b)
    grp = cohomology_at(d_in, d_out).group
    # ker d_out is a direct summand containing im d_in, so the torsion is that of coker d_in
    rk_out = Matrix(out_rows).rank() if out_rows else 0
    rk_in = m_in.rank()
    assert grp.rank == (b - rk_out) - rk_in
    tors = sorted(abs(int(x)) for x in sympy_invariants(m_in, domain=ZZ) if abs(int(x)) > 1)
    assert list(grp.torsion) == tors


def test_image_membership():
    m = SparseMatrix.from_dense([[2]])
    assert image_membership(m, [4]) == {0: 2}
    assert image_membership(m, [3]) is None


def test_image_membership_edge_difference():
    # on Z with k=1: delta_(0,1) - delta_(3,4) = d(indicator of [1,3])
    verts = list(range(-1, 6))
    edges = [(x, x + 1) for x in range(-1, 5)]
    cols = []
    for v in verts:
        col = {}
        for i, (a, b) in enumerate(edges):
            if v == b:
                col[i] = 1
            if v == a:
                col[i] = -1
        cols.append(col)
    d0 = SparseMatrix(len(edges), cols)
    target = {edges.index((0, 1)): 1, edges.index((3, 4)): -1}
    x = image_membership(d0, target)
    assert x is not None and d0.apply(x) == target
    # the interval indicator is the solution up to a constant; with a mask the solution is forced
    mask = [verts.index(v) for v in (1, 2, 3)]
    assert image_membership(d0, target, mask) == {verts.index(v): 1 for v in (1, 2, 3)}


def test_abelian_group_canonical_form():
    g = AbelianGroup.from_invariants(1, [2, 3, 4])
    assert g == AbelianGroup(1, (2, 12))
    assert str(g) == "Z + Z/2 + Z/12"
    assert str(AbelianGroup()) == "0"
    assert direct_sum([AbelianGroup(1), AbelianGroup(0, (2,)), AbelianGroup(1)]) == AbelianGroup(2, (2,))
    with pytest.raises(ValueError):
        AbelianGroup(0, (2, 3))


def test_abelian_group_counts_all_small_products():
    for a, b in itertools.product(range(1, 7), repeat=2):
        g = AbelianGroup.from_invariants(0, [a, b])
        order = 1
        for t in g.torsion:
            order *= t
        assert order == a * b
