"""Controlled chains and their Kronecker pairing with coarse cochains.

A locally finite chain is stored as an optional ambient ``rule`` (simplex of
points -> coefficient, defined everywhere) plus a finite correction.  The
pairing with a cochain only reads the chain on the cochain's finitely many
simplices, so truncating the chain to a window loses nothing.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .complexes import (
    ALTERNATING,
    CochainBasis,
    SparseCochain,
    canonical,
    coboundary,
    enumerate_controlled_simplices,
    face_sign_pairs,
)
from .snf import SparseMatrix, Vector
from .spaces import Point, SpaceMap, Window


class PairingAuditError(RuntimeError):
    pass


@dataclass
class SparseChain:
    degree: int
    scale: int
    backend: str = ALTERNATING
    values: dict = field(default_factory=dict)
    rule: Callable[[tuple], int] | None = None

    def __post_init__(self):
        vals: dict = {}
        for s, a in self.values.items():
            sign, key = canonical(s, self.backend)
            if sign and a:
                vals[key] = vals.get(key, 0) + sign * a
        self.values = {s: a for s, a in vals.items() if a}

    def __call__(self, simplex: Sequence[Point]) -> int:
        sign, key = canonical(simplex, self.backend)
        if not sign:
            return 0
        base = self.rule(key) if self.rule is not None else 0
        return sign * (base + self.values.get(key, 0))

    def __add__(self, other: "SparseChain") -> "SparseChain":
        if (self.degree, self.backend) != (other.degree, other.backend):
            raise ValueError("chains of different degree or backend")
        if self.rule is not None and other.rule is not None:
            r1, r2 = self.rule, other.rule
            rule = lambda s: r1(s) + r2(s)  # noqa: E731
        else:
            rule = self.rule or other.rule
        vals = dict(self.values)
        for s, a in other.values.items():
            vals[s] = vals.get(s, 0) + a
        return SparseChain(self.degree, max(self.scale, other.scale), self.backend, vals, rule)

    @property
    def is_finite(self) -> bool:
        return self.rule is None

    def truncate(self, w: Window, region=None) -> "SparseChain":
        """Finite fragment on the controlled simplices inside region (default: the window)."""
        basis = enumerate_controlled_simplices(w, self.scale, self.degree, region, self.backend, degree_cap=self.degree)
        vals = {}
        for i in range(len(basis)):
            s = basis.points_of(i)
            a = self(s)
            if a:
                vals[s] = a
        return SparseChain(self.degree, self.scale, self.backend, vals)


def boundary_matrix(b_n: CochainBasis, b_prev: CochainBasis) -> SparseMatrix:
    """Matrix of the boundary sum_i (-1)^i face_i from b_n-chains to b_prev-chains."""
    if b_prev.degree != b_n.degree - 1 or b_n.backend != b_prev.backend:
        raise ValueError("bases are not compatible")
    cols: list[Vector] = []
    for s in b_n.simplices:
        col: Vector = {}
        for sign, face in face_sign_pairs(s, b_n.backend):
            r = b_prev.index.get(face)
            if r is not None:
                col[r] = col.get(r, 0) + sign
        cols.append({r: a for r, a in col.items() if a})
    return SparseMatrix(len(b_prev), cols)


def boundary(c: SparseChain) -> SparseChain:
    """Boundary of a finite chain."""
    if not c.is_finite:
        raise ValueError("boundary of a rule chain needs a window; use boundary_on")
    vals: dict = {}
    for s, a in c.values.items():
        for i in range(len(s)):
            face = s[:i] + s[i + 1:]
            sign, key = canonical(face, c.backend)
            if sign:
                vals[key] = vals.get(key, 0) + (-1) ** i * sign * a
    return SparseChain(c.degree - 1, c.scale, c.backend, vals)


def boundary_on(w: Window, c: SparseChain, region) -> SparseChain:
    """Boundary of a (possibly rule) chain read off on the (n-1)-simplices inside region."""
    region = frozenset(region)
    thick = w.thicken(region, c.scale)
    frag = c.truncate(w, thick)
    full = boundary(frag)
    keep = {s: a for s, a in full.values.items() if all(p in region for p in s)}
    return SparseChain(c.degree - 1, c.scale, c.backend, keep)


def kronecker_pair(phi: SparseCochain, c: SparseChain) -> int:
    """<phi, c> = sum over the support of phi of phi(sigma) c(sigma)."""
    if phi.degree != c.degree:
        raise ValueError(f"degree mismatch: cochain {phi.degree}, chain {c.degree}")
    if phi.backend != c.backend:
        raise ValueError("backend mismatch")
    return sum(a * c(s) for s, a in phi.values.items())


def pushforward(m: SpaceMap, c: SparseChain, k_out: int) -> SparseChain:
    """m_*(c) for a finite chain."""
    if not c.is_finite:
        raise ValueError("pushforward is implemented for finite chains")
    order = m.codomain.index
    vals: dict = {}
    for s, a in c.values.items():
        sign, key = canonical([m(p) for p in s], c.backend, order)
        if sign:
            vals[key] = vals.get(key, 0) + sign * a
    return SparseChain(c.degree, k_out, c.backend, vals)


def fundamental_chain(d: int, k: int = 1, backend: str = ALTERNATING) -> SparseChain:
    """The locally finite fundamental cycle of Z (d=1) or Z^2 (d=2) as an ambient rule.

    Z: sum of the edges (x, x+1).  Z^2: each unit square [a,a+1]x[b,b+1]
    contributes (p00, p10, p11) - (p00, p01, p11).  Tuples are listed in
    increasing point order, so the same rule serves both backends.
    """
    if d == 1:
        def rule(s):
            return 1 if len(s) == 2 and s[1][0] == s[0][0] + 1 else 0
        return SparseChain(1, k, backend, {}, rule)
    if d == 2:
        def rule(s):
            if len(s) != 3:
                return 0
            u, v, w = s
            if w != (u[0] + 1, u[1] + 1):
                return 0
            if v == (u[0] + 1, u[1]):
                return 1
            if v == (u[0], u[1] + 1):
                return -1
            return 0
        return SparseChain(2, k, backend, {}, rule)
    raise ValueError("fundamental chains are provided for Z and Z^2")


def crossing_cochain(k: int = 1, backend: str = ALTERNATING) -> SparseCochain:
    """The crossing class of Z: delta_{(0,1)}, antisymmetrized for ordered tuples.

    In the ordered backend (0, 1, 0) is a nondegenerate simplex, so the
    cocycle must also take the value -1 on (1, 0).
    """
    vals = {((0,), (1,)): 1}
    if backend != ALTERNATING:
        vals[((1,), (0,))] = -1
    return SparseCochain(1, k, backend, vals)


@dataclass
class PairingAudit:
    value: int
    trials: int
    values: list[int]


def pair_classes(w: Window, phi: SparseCochain, c: SparseChain, trials: int = 10, seed: int = 0,
                 region=None) -> PairingAudit:
    """<phi, c> audited against random (co)boundary perturbations of both sides.

    Cochain perturbations d(psi) and chain perturbations boundary(b) are drawn
    with support in ``region`` (default: the window core).  Any change in the
    value means the window or the scale is too small for the representatives.
    """
    rng = random.Random(seed)
    region = frozenset(region) if region is not None else w.core
    n, k, be = phi.degree, phi.scale, phi.backend
    if not coboundary(w, phi).is_zero():
        raise PairingAuditError("cochain representative is not a cocycle")
    if phi.values:
        test_region = w.thicken(phi.support, 2 * k) & w.core
        if not boundary_on(w, c, test_region).values == {}:
            raise PairingAuditError("chain representative is not a cycle near the cochain support")
    base = kronecker_pair(phi, c)
    values = [base]
    lower = enumerate_controlled_simplices(w, k, n - 1, region, be, degree_cap=n) if n > 0 else None
    upper = enumerate_controlled_simplices(w, k, n + 1, region, be, degree_cap=n + 1)
    for _ in range(trials):
        phi2 = phi
        if lower is not None and len(lower):
            psi = lower.cochain({i: rng.randint(-3, 3) for i in rng.sample(range(len(lower)), min(4, len(lower)))})
            phi2 = phi + coboundary(w, psi)
        c2 = c
        if len(upper):
            picks = rng.sample(range(len(upper)), min(4, len(upper)))
            b = SparseChain(n + 1, k, be, {upper.points_of(i): rng.randint(-3, 3) for i in picks})
            c2 = c + boundary(b)
        values.append(kronecker_pair(phi2, c2))
    if any(v != base for v in values):
        raise PairingAuditError(f"pairing changed under perturbation: {values}")
    return PairingAudit(base, trials, values)
