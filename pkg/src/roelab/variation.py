"""Variation functionals and the constructive extension of functions with vanishing variation.

Scalars only.  Values may be ints/Fractions (exact) or floats/complex
(compared with slack TOL).  All metric quantities are ambient distances
on a window; balls B(x, R) are window points within R of x.

The extension runs per coarse component of the window:

* components missing Y get the zero function;
* if U_k[Y] stays inside the core, Y counts as bounded and f is extended
  by the constant f(y0);
* otherwise the general construction runs: an exhaustion r_0 < r_1 < ...
  of Y by balls around y0 on whose complements the variation of f is
  small, the level function v, neighbourhoods U_y = B(y, isqrt(v(y))), the
  depth profile rho_tilde, its subadditive minorant rho, the region F, a
  partition (V_y) of F and the cutoff psi;
* if rho_tilde vanishes at radius 1 the construction is degenerate (Y is
  coarsely dense near y0) and f is pulled back along a nearest-point
  retraction onto Y instead.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Number
from typing import Callable, Iterable, Sequence

from .spaces import ConvexityFailure, Point, Window, check_u_convex

TOL = 1e-9

GENERAL = "general"
COARSE_EQUIVALENCE = "coarse-equivalence"
BOUNDED = "bounded-Y"
EMPTY = "empty-component"


class DegenerateGeometry(ValueError):
    def __init__(self, msg: str, table: list | None = None):
        super().__init__(msg)
        self.table = table or []


class ExtensionError(RuntimeError):
    """A certificate inequality failed: a construction bug, never a user error."""


class WindowTooSmall(ValueError):
    pass


def _exact(x) -> Number:
    if isinstance(x, float):
        return Fraction(repr(x))
    return x


def _le(a, b) -> bool:
    if isinstance(a, (int, Fraction)) and isinstance(b, (int, Fraction)):
        return a <= b
    return float(a) <= float(b) + TOL


@dataclass
class VariationFunction:
    window: Window
    values: dict[Point, Number]

    def __post_init__(self):
        for p, a in self.values.items():
            if p not in self.window:
                raise ValueError(f"{p} is not a window point")
            if isinstance(a, (float, complex)) and not math.isfinite(abs(a)):
                raise ValueError(f"value at {p} is not finite")

    def __call__(self, p: Point):
        return self.values[p]

    @property
    def domain(self) -> frozenset:
        return frozenset(self.values)

    @classmethod
    def from_rule(cls, w: Window, rule: Callable[[Point], Number], domain: Iterable[Point] | None = None):
        pts = w.points if domain is None else domain
        return cls(w, {p: rule(p) for p in pts})


def _power_neighbors(w: Window, p: Point, k: int, power: int, within: frozenset | None = None) -> set[Point]:
    """Points reachable from p in at most ``power`` k-steps."""
    seen = {p}
    frontier = [p]
    for _ in range(power):
        nxt = []
        for a in frontier:
            for b in w.neighbors(a, k):
                if b not in seen and (within is None or b in within):
                    seen.add(b)
                    nxt.append(b)
        frontier = nxt
    return seen


def power_thicken(w: Window, B: Iterable[Point], k: int, power: int = 1) -> frozenset:
    """(U_k)^power [B] inside the window."""
    out: set[Point] = set()
    for b in B:
        out |= _power_neighbors(w, b, k, power)
    return frozenset(out)


def u_variation(f: VariationFunction, Y: Iterable[Point], k: int, power: int = 1):
    """sup |f(x) - f(y)| over pairs of Y related by (U_k)^power (paths of k-steps in the window)."""
    Y = frozenset(Y)
    missing = Y - f.domain
    if missing:
        raise ValueError(f"Y is not inside the domain of f (e.g. {min(missing)})")
    best = 0
    for x in Y:
        near = f.window.neighbors(x, k) if power == 1 else _power_neighbors(f.window, x, k, power)
        for y in near:
            if y in Y:
                d = abs(f(x) - f(y))
                if d > best:
                    best = d
    return best


def nabla(f: VariationFunction, R: int, x: Point, domain: frozenset | None = None):
    """(nabla_R f)(x) = sup over y in B(x, R) of |f(y) - f(x)|."""
    dom = f.values if domain is None else domain
    fx = f(x)
    best = 0
    for y in f.window.neighbors(x, R):
        if y in dom:
            d = abs(f(y) - fx)
            if d > best:
                best = d
    return best


# ---------------------------------------------------------------------------
# rho


@dataclass
class RhoTable:
    rho_tilde: list
    rho: list

    def __call__(self, t: int):
        return self.rho[min(t, len(self.rho) - 1)]


def rho_construct(rho_tilde: Sequence) -> RhoTable:
    """Largest subadditive function below rho_tilde / 2 on 0..T (exact rationals).

    rho(t) = min(rho_tilde(t)/2, min_{0<a<t} rho(a) + rho(t-a)).  For monotone
    input the result is monotone, and it is positive on t >= 1 exactly when
    rho_tilde(1) > 0; otherwise DegenerateGeometry is raised.
    """
    if not rho_tilde:
        raise ValueError("empty rho_tilde table")
    vals = [_exact(v) for v in rho_tilde]
    if vals[0] != 0:
        raise ValueError("rho_tilde(0) must be 0")
    if any(b < a for a, b in zip(vals, vals[1:])):
        raise ValueError("rho_tilde must be monotone")
    rho: list = [Fraction(0)]
    for t in range(1, len(vals)):
        best = Fraction(vals[t]) / 2
        for a in range(1, t // 2 + 1):
            s = rho[a] + rho[t - a]
            if s < best:
                best = s
        rho.append(best)
    table = RhoTable(list(vals), rho)
    if len(rho) > 1 and rho[1] == 0:
        raise DegenerateGeometry("rho_tilde vanishes at radius 1: Y is coarsely dense near y0", rho)
    audit_rho(table)
    return table


def audit_rho(table: RhoTable) -> None:
    rho, half = table.rho, [Fraction(v) / 2 for v in table.rho_tilde]
    T = len(rho)
    for t in range(T):
        if rho[t] > half[t]:
            raise ExtensionError(f"rho({t}) exceeds rho_tilde/2")
        if t and rho[t] < rho[t - 1]:
            raise ExtensionError(f"rho not monotone at {t}")
        for a in range(1, t):
            if rho[t] > rho[a] + rho[t - a]:
                raise ExtensionError(f"rho not subadditive at {a}+{t - a}")


# ---------------------------------------------------------------------------
# extension


@dataclass
class ComponentRun:
    label: object
    branch: str
    y0: Point | None
    exhaustion: list[int] = field(default_factory=list)
    v: dict = field(default_factory=dict)
    U: dict = field(default_factory=dict)
    rho: RhoTable | None = None
    F: frozenset = frozenset()
    F_violations: frozenset = frozenset()
    partition: dict = field(default_factory=dict)
    psi: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)


@dataclass
class ExtensionCertificate:
    window: Window
    Y: frozenset
    k: int
    eps: Number
    f: VariationFunction
    f_tilde: VariationFunction
    restriction_error: Number
    branch: str
    components: list[ComponentRun]
    profiles: dict[int, list[tuple[int, Number]]]
    tolerance: float = TOL

    @property
    def component_branches(self) -> list[str]:
        return [c.branch for c in self.components]

    def center_distance(self, x: Point) -> float:
        for c in self.components:
            if c.label == self.window.label(x) and c.y0 is not None:
                return self.window.dist(x, c.y0)
        return math.inf

    @property
    def exhaustion(self) -> list[int]:
        radii = sorted({r for c in self.components for r in c.exhaustion})
        return radii or list(range(self.window.core_radius + 1))


def _components(w: Window) -> dict:
    out: dict = {}
    for p in w.points:
        out.setdefault(w.label(p), []).append(p)
    return out


def _nearest(w: Window, x: Point, Y: Sequence[Point]) -> tuple[float, Point]:
    best, arg = math.inf, None
    for y in Y:
        d = w.dist(x, y)
        if d < best:
            best, arg = d, y
            if d == 0:
                break
    return best, arg


def _y0(w: Window, pts: Sequence[Point], Y: frozenset) -> Point:
    ys = [p for p in pts if p in Y]
    core_ys = [p for p in ys if p in w.core] or ys
    return min(core_ys, key=lambda p: (w.dist(p, w.basepoint) if w.label(p) == w.label(w.basepoint) else 0, p))


def _exhaustion(w: Window, fn: VariationFunction, Ycore: list[Point], y0: Point, levels: int, eps) -> list[int]:
    dom = fn.domain
    radii: list[int] = []
    for n in range(levels):
        R, bound = 2 ** (n + 1), eps / 2 ** (n + 1)
        worst = 0
        for y in Ycore:
            if not _le(nabla(fn, R, y, dom), bound):
                worst = max(worst, int(w.dist(y, y0)))
        r = max(worst, radii[-1] + 1 if radii else 0)
        if r >= w.core_radius:
            raise WindowTooSmall(
                f"window too small for eps={eps}: exhaustion level {n} needs radius {r} >= core radius {w.core_radius}")
        radii.append(r)
    return radii


def _run_general(w, fhat, Y, pts, y0, k, eps, levels, run: ComponentRun) -> dict:
    base = fhat(y0)
    fn = VariationFunction(w, {y: fhat(y) - base for y in pts if y in Y})
    Ys = sorted(fn.domain)
    Ycore = [y for y in Ys if y in w.core]
    run.exhaustion = _exhaustion(w, fn, Ycore, y0, levels, eps)
    N = len(run.exhaustion) - 1
    dY = {x: _nearest(w, x, Ys) for x in pts}
    for y in Ys:
        d = w.dist(y, y0)
        run.v[y] = next((n for n, r in enumerate(run.exhaustion) if d <= r), N + 1)
        run.U[y] = math.isqrt(run.v[y])
    covered: dict[Point, Point] = {}
    for y in Ys:
        for x in w.neighbors(y, run.U[y]):
            if x not in covered or y < covered[x]:
                covered[x] = y
    T = int(max(w.dist(x, y0) for x in pts))
    depth = [0] * (T + 1)
    for x in covered:
        t = int(w.dist(x, y0))
        depth[t] = max(depth[t], dY[x][0])
    for t in range(1, T + 1):
        depth[t] = max(depth[t], depth[t - 1])
    try:
        run.rho = rho_construct(depth)
    except DegenerateGeometry:
        run.branch = COARSE_EQUIVALENCE
        run.notes.append("rho_tilde vanishes at radius 1; pulled back along the nearest-point retraction onto Y")
        return {x: fhat(dY[x][1]) for x in pts}
    run.branch = GENERAL
    rho = run.rho
    inside = {x for x in pts if dY[x][0] <= rho(int(w.dist(x, y0)))}
    run.F = frozenset(x for x in inside if x in covered)
    run.F_violations = frozenset(inside - run.F)
    if run.F_violations:
        run.notes.append(f"{len(run.F_violations)} points of the rho-neighbourhood of Y are not covered by the U_y")
    out = {}
    for x in pts:
        r = rho(int(w.dist(x, y0)))
        if r == 0:
            psi = Fraction(1 if x in Y else 0)
        else:
            psi = max(Fraction(0), (r - Fraction(dY[x][0])) / r)
        run.psi[x] = psi
        if x in run.F:
            y = covered[x]
            run.partition[x] = y
            out[x] = psi * fn(y) + base
        else:
            out[x] = base
    return out


def extend_function(w: Window, Y: Iterable[Point], k: int, f: VariationFunction, eps,
                    levels: int = 4, R_list: Sequence[int] = (1,), max_components: int = 64) -> ExtensionCertificate:
    """Extend f from Y to the window keeping sup_Y |f~ - f| <= eps and variation vanishing at infinity."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    eps = _exact(eps)
    Y = frozenset(Y)
    if not Y <= f.domain:
        raise ValueError("f must be defined on all of Y")
    if not Y <= frozenset(w.points):
        raise ValueError("Y must consist of window points")
    conv = check_u_convex(w, Y, k)
    if isinstance(conv, ConvexityFailure):
        raise ValueError(f"Y is not U_{k}-convex: {conv.detail}")
    comps = _components(w)
    hit = [lab for lab, pts in comps.items() if any(p in Y for p in pts)]
    if len(hit) > max_components:
        raise ValueError(f"Y meets {len(hit)} coarse components, more than {max_components}")
    max_level = int(math.log2(w.r_f)) if w.r_f >= 2 else 0
    levels = min(levels, max_level)
    if levels < 1:
        raise WindowTooSmall("padding must be at least 2 for the exhaustion")
    values: dict[Point, Number] = {}
    runs: list[ComponentRun] = []
    for lab in sorted(comps, key=repr):
        pts = comps[lab]
        if lab not in hit:
            runs.append(ComponentRun(lab, EMPTY, None))
            values.update({x: 0 for x in pts})
            continue
        y0 = _y0(w, pts, Y)
        run = ComponentRun(lab, BOUNDED, y0)
        Yc = [p for p in pts if p in Y]
        if w.thicken(Yc, k) <= w.core:
            values.update({x: f(x) if x in Y else f(y0) for x in pts})
        else:
            values.update(_run_general(w, f, Y, pts, y0, k, eps, levels, run))
        runs.append(run)
    ft = VariationFunction(w, values)
    err = max((abs(ft(y) - f(y)) for y in Y if y in w.core), default=0)
    if not _le(err, eps):
        raise ExtensionError(f"restriction error {err} exceeds eps={eps}")
    used = [r.branch for r in runs if r.branch != EMPTY]
    cert = ExtensionCertificate(w, Y, k, eps, f, ft, err, used[0] if used else EMPTY, runs, {})
    cert.profiles = {R: variation_profile(cert, R) for R in R_list}
    return cert


def variation_profile(cert: ExtensionCertificate, R: int) -> list[tuple[int, Number]]:
    """[(r, max over core x with d(x, y0) > r of (nabla_R f~)(x))] along the exhaustion."""
    w = cert.window
    if R > w.r_f:
        raise ValueError(f"R={R} exceeds the window padding {w.r_f}")
    core = sorted(w.core)
    grad = {x: nabla(cert.f_tilde, R, x) for x in core}
    dist = {x: cert.center_distance(x) for x in core}
    out = []
    for r in cert.exhaustion:
        out.append((r, max((grad[x] for x in core if dist[x] > r), default=0)))
    return out


@dataclass
class ExtensionAudit:
    restriction_error: Number
    eps: Number
    profiles: dict[int, list[tuple[int, Number]]]
    strict_steps: dict[int, int]
    stalled_at: dict[int, int | None]
    partition_ok: bool
    psi_ok: bool
    tolerance: float = TOL

    @property
    def ok(self) -> bool:
        return self.partition_ok and self.psi_ok


def verify_extension(cert: ExtensionCertificate, R_list: Sequence[int] = (1,), eps=None) -> ExtensionAudit:
    """Re-check the certificate: restriction error, partition, psi, and decay of the variation profiles."""
    eps = cert.eps if eps is None else _exact(eps)
    w, ft, f = cert.window, cert.f_tilde, cert.f
    err = max((abs(ft(y) - f(y)) for y in cert.Y if y in w.core), default=0)
    if not _le(err, eps):
        raise ExtensionError(f"restriction error {err} exceeds eps={eps}")
    part_ok, psi_ok = True, True
    for run in cert.components:
        if run.branch != GENERAL:
            continue
        if set(run.partition) != set(run.F):
            part_ok = False
        for x, y in run.partition.items():
            if w.dist(x, y) > run.U[y]:
                part_ok = False
        for x, psi in run.psi.items():
            if not 0 <= psi <= 1 or (x in cert.Y and psi != 1):
                psi_ok = False
    profiles, strict, stalled = {}, {}, {}
    for R in R_list:
        prof = variation_profile(cert, R)
        vals = [v for _, v in prof]
        if any(not _le(b, a) for a, b in zip(vals, vals[1:])):
            raise ExtensionError(f"variation profile for R={R} increases along the exhaustion")
        profiles[R] = prof
        strict[R] = sum(1 for a, b in zip(vals, vals[1:]) if not _le(a, b))
        flat = [prof[i][0] for i in range(len(vals) - 1) if vals[i] != 0 and _le(vals[i], vals[i + 1])]
        stalled[R] = max(flat) if flat else None
    return ExtensionAudit(err, eps, profiles, strict, stalled, part_ok, psi_ok)


def random_variation_instance(rng: random.Random, w: Window, amplitude: int = 10) -> VariationFunction:
    """Integer-valued random function on the window, for property tests."""
    return VariationFunction(w, {p: rng.randint(-amplitude, amplitude) for p in w.points})
