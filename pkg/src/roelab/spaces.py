"""Bornological coarse spaces as finite metric windows.

An ``AmbientSpec`` describes an infinite (or finite) discrete metric space
symbolically; ``make_window`` cuts out a finite, metrically faithful piece
around the basepoints.  Entourages are the metric thresholds
``U_k = {(x, y) : d(x, y) <= k}`` and bounded sets are the finite ones.

Points are tuples.  ``grid(d)`` uses the max-metric on Z^d, which is
coarsely equivalent to any word metric.  Points of different free-union
components are at distance ``UNRELATED`` (``math.inf``): no entourage ever
relates them.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Iterator, Sequence

Point = tuple
UNRELATED = math.inf


class MetricViolation(ValueError):
    pass


class RuleError(ValueError):
    pass


def related(d: float, k: int) -> bool:
    return d <= k


@dataclass(frozen=True)
class AmbientSpec:
    kind: str
    params: tuple = ()

    # constructors -------------------------------------------------------

    @classmethod
    def grid(cls, d: int = 1) -> "AmbientSpec":
        if d < 1:
            raise ValueError("grid dimension must be positive")
        return cls("grid", (d,))

    @classmethod
    def halfline(cls) -> "AmbientSpec":
        return cls("halfline")

    @classmethod
    def finite(cls, dist: Sequence[Sequence[int]]) -> "AmbientSpec":
        table = tuple(tuple(int(x) for x in row) for row in dist)
        check_metric_table(table)
        return cls("finite", (table,))

    @classmethod
    def point(cls) -> "AmbientSpec":
        return cls.finite([[0]])

    @classmethod
    def free_union(cls, *parts: "AmbientSpec") -> "AmbientSpec":
        if not parts:
            raise ValueError("free union needs at least one part")
        return cls("free_union", tuple(parts))

    @classmethod
    def product(cls, a: "AmbientSpec", b: "AmbientSpec") -> "AmbientSpec":
        return cls("product", (a, b))

    @classmethod
    def subspace(cls, parent: "AmbientSpec", predicate: Callable[[Point], bool], name: str = "") -> "AmbientSpec":
        return cls("subspace", (parent, predicate, name))

    # geometry -----------------------------------------------------------

    def contains(self, p: Point) -> bool:
        k = self.kind
        if k == "grid":
            return len(p) == self.params[0] and all(isinstance(x, int) for x in p)
        if k == "halfline":
            return len(p) == 1 and isinstance(p[0], int) and p[0] >= 0
        if k == "finite":
            return len(p) == 1 and 0 <= p[0] < len(self.params[0])
        if k == "free_union":
            return len(p) == 2 and 0 <= p[0] < len(self.params) and self.params[p[0]].contains(p[1])
        if k == "product":
            return len(p) == 2 and self.params[0].contains(p[0]) and self.params[1].contains(p[1])
        if k == "subspace":
            return self.params[0].contains(p) and bool(self.params[1](p))
        raise ValueError(f"unknown kind {k!r}")

    def dist(self, p: Point, q: Point) -> float:
        k = self.kind
        if k == "grid":
            return max((abs(a - b) for a, b in zip(p, q)), default=0)
        if k == "halfline":
            return abs(p[0] - q[0])
        if k == "finite":
            return self.params[0][p[0]][q[0]]
        if k == "free_union":
            if p[0] != q[0]:
                return UNRELATED
            return self.params[p[0]].dist(p[1], q[1])
        if k == "product":
            return max(self.params[0].dist(p[0], q[0]), self.params[1].dist(p[1], q[1]))
        if k == "subspace":
            return self.params[0].dist(p, q)
        raise ValueError(f"unknown kind {k!r}")

    def centers(self) -> list[Point]:
        """One basepoint per coarse component (the origin of each piece)."""
        k = self.kind
        if k == "grid":
            return [(0,) * self.params[0]]
        if k in ("halfline", "finite"):
            return [(0,)]
        if k == "free_union":
            return [(i, c) for i, part in enumerate(self.params) for c in part.centers()]
        if k == "product":
            return [(a, b) for a in self.params[0].centers() for b in self.params[1].centers()]
        if k == "subspace":
            return self.params[0].centers()
        raise ValueError(f"unknown kind {k!r}")

    def neighborhood(self, p: Point, r: int) -> Iterator[Point]:
        """All ambient points q with d(p, q) <= r."""
        k = self.kind
        if r < 0:
            return
        if k == "grid":
            for off in itertools.product(range(-r, r + 1), repeat=len(p)):
                yield tuple(a + b for a, b in zip(p, off))
        elif k == "halfline":
            for x in range(max(0, p[0] - r), p[0] + r + 1):
                yield (x,)
        elif k == "finite":
            row = self.params[0][p[0]]
            for j, d in enumerate(row):
                if d <= r:
                    yield (j,)
        elif k == "free_union":
            for q in self.params[p[0]].neighborhood(p[1], r):
                yield (p[0], q)
        elif k == "product":
            qa = list(self.params[0].neighborhood(p[0], r))
            for b in self.params[1].neighborhood(p[1], r):
                for a in qa:
                    yield (a, b)
        elif k == "subspace":
            pred = self.params[1]
            for q in self.params[0].neighborhood(p, r):
                if pred(q):
                    yield q
        else:
            raise ValueError(f"unknown kind {k!r}")

    def ball(self, r: int) -> set[Point]:
        """Points within r of some center."""
        out: set[Point] = set()
        for c in self.centers():
            if self.kind == "subspace" or self.contains(c):
                out.update(self.neighborhood(c, r))
        if self.kind == "subspace":
            out = {q for q in out if self.params[1](q)}
        return out

    def component(self, p: Point) -> Any:
        k = self.kind
        if k == "free_union":
            return (p[0], self.params[p[0]].component(p[1]))
        if k == "product":
            return (self.params[0].component(p[0]), self.params[1].component(p[1]))
        if k == "subspace":
            return self.params[0].component(p)
        return 0

    def describe(self) -> str:
        k = self.kind
        if k == "grid":
            return f"grid({self.params[0]})"
        if k == "finite":
            return f"finite({len(self.params[0])})"
        if k in ("free_union", "product"):
            sep = " + " if k == "free_union" else " x "
            return "(" + sep.join(p.describe() for p in self.params) + ")"
        if k == "subspace":
            return f"{self.params[0].describe()}|{self.params[2] or 'sub'}"
        return k


def check_metric_table(table: Sequence[Sequence[int]]) -> None:
    n = len(table)
    for i, row in enumerate(table):
        if len(row) != n:
            raise MetricViolation(f"row {i} has length {len(row)}, expected {n}")
    for i in range(n):
        if table[i][i] != 0:
            raise MetricViolation(f"d({i},{i}) = {table[i][i]} is not zero")
        for j in range(n):
            if table[i][j] != table[j][i]:
                raise MetricViolation(f"asymmetric: d({i},{j}) != d({j},{i})")
            if i != j and table[i][j] <= 0:
                raise MetricViolation(f"d({i},{j}) = {table[i][j]} must be positive off the diagonal")
    for i, j, l in itertools.product(range(n), repeat=3):
        if table[i][l] > table[i][j] + table[j][l]:
            raise MetricViolation(f"triangle inequality fails for ({i},{j},{l})")


@dataclass(frozen=True, eq=False)
class Window:
    spec: AmbientSpec
    points: tuple[Point, ...]
    core: frozenset
    faithfulness_radius: int
    basepoint: Point
    core_radius: int = 0
    _nbrs: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_index", {p: i for i, p in enumerate(self.points)})

    @property
    def index(self) -> dict[Point, int]:
        return self._index  # type: ignore[attr-defined]

    @property
    def r_f(self) -> int:
        return self.faithfulness_radius

    def __len__(self) -> int:
        return len(self.points)

    def __contains__(self, p: Point) -> bool:
        return p in self._index  # type: ignore[attr-defined]

    def dist(self, p: Point, q: Point) -> float:
        return self.spec.dist(p, q)

    def label(self, p: Point) -> Any:
        return self.spec.component(p)

    def neighbors(self, p: Point, k: int) -> tuple[Point, ...]:
        """Window points within k of p (p included), in point order."""
        key = (p, k)
        hit = self._nbrs.get(key)
        if hit is None:
            idx = self._index  # type: ignore[attr-defined]
            hit = tuple(sorted((q for q in self.spec.neighborhood(p, k) if q in idx), key=idx.__getitem__))
            self._nbrs[key] = hit
        return hit

    def thicken(self, region: Iterable[Point], k: int) -> frozenset:
        """U_k[region] intersected with the window."""
        out: set[Point] = set()
        for p in region:
            out.update(self.neighbors(p, k))
        return frozenset(out)

    def ball(self, center: Point, r: int) -> frozenset:
        return frozenset(q for q in self.points if self.dist(center, q) <= r)

    def core_ball(self, r: int) -> frozenset:
        """Points within r of a basepoint of the ambient components."""
        centers = self.spec.centers()
        return frozenset(q for q in self.points if any(self.dist(c, q) <= r for c in centers))

    def restrict(self, predicate: Callable[[Point], bool], name: str = "") -> "Window":
        """Sub-window of a subspace, with the induced metric."""
        pts = tuple(p for p in self.points if predicate(p))
        if not pts:
            raise ValueError("restriction to an empty subset")
        core = frozenset(p for p in self.core if predicate(p))
        base = self.basepoint if predicate(self.basepoint) else (min(core, key=self.index.__getitem__) if core else pts[0])
        return Window(AmbientSpec.subspace(self.spec, predicate, name), pts, core,
                      self.faithfulness_radius, base, self.core_radius)

    def step_distances(self, source: Point, k: int, within: frozenset | None = None) -> dict[Point, int]:
        """Number of k-steps from source to each reachable point (paths stay in ``within``)."""
        allowed = within if within is not None else None
        dist = {source: 0}
        dq = deque([source])
        while dq:
            p = dq.popleft()
            for q in self.neighbors(p, k):
                if q not in dist and (allowed is None or q in allowed):
                    dist[q] = dist[p] + 1
                    dq.append(q)
        return dist

    def check_metric(self) -> None:
        """Metric axioms over all pairs and triples (cross-component pairs are unrelated)."""
        pts = self.points
        for p in pts:
            if self.dist(p, p) != 0:
                raise MetricViolation(f"d({p},{p}) != 0")
        for p, q in itertools.combinations(pts, 2):
            if self.dist(p, q) != self.dist(q, p):
                raise MetricViolation(f"asymmetric pair {p}, {q}")
            if self.dist(p, q) <= 0:
                raise MetricViolation(f"distinct points {p}, {q} at distance 0")
        for p, q, r in itertools.product(pts, repeat=3):
            if self.dist(p, r) > self.dist(p, q) + self.dist(q, r):
                raise MetricViolation(f"triangle inequality fails for {p}, {q}, {r}")

    def check_faithful(self) -> None:
        """Every ambient point within r_f of the core is listed."""
        for p in self.core:
            for q in self.spec.neighborhood(p, self.faithfulness_radius):
                if q not in self:
                    raise MetricViolation(f"window misses ambient point {q} near core point {p}")


def make_window(spec: AmbientSpec, core_radius: int, padding: int) -> Window:
    """All ambient points within core_radius + padding of the basepoints."""
    if core_radius < 0 or padding < 0:
        raise ValueError("core_radius and padding must be nonnegative")
    if spec.kind == "finite":
        check_metric_table(spec.params[0])
    pts = spec.ball(core_radius + padding)
    order = sorted(pts)
    centers = spec.centers()
    core = frozenset(q for q in pts if any(spec.dist(c, q) <= core_radius for c in centers if spec.contains(c)))
    base = next((c for c in centers if c in pts), order[0])
    return Window(spec, tuple(order), core, padding, base, core_radius)


# ---------------------------------------------------------------------------
# maps


@dataclass(eq=False)
class SpaceMap:
    domain: Window
    codomain: Window
    assignment: dict
    rule: Callable[[Point], Point] | None = None
    controls: dict = field(default_factory=dict)

    @classmethod
    def from_rule(cls, domain: Window, codomain: Window, rule: Callable[[Point], Point]) -> "SpaceMap":
        assignment = {}
        for p in domain.points:
            try:
                q = rule(p)
            except Exception as exc:  # noqa: BLE001 - reported with the failing point
                raise RuleError(f"rule not evaluable at {p}: {exc}") from exc
            if not codomain.spec.contains(q):
                raise RuleError(f"rule sends {p} outside the ambient codomain: {q}")
            assignment[p] = q
        return cls(domain, codomain, assignment, rule)

    @classmethod
    def identity(cls, w: Window) -> "SpaceMap":
        return cls.from_rule(w, w, lambda p: p)

    def __call__(self, p: Point) -> Point:
        q = self.assignment.get(p)
        if q is None:
            if self.rule is None:
                raise RuleError(f"map undefined at {p}")
            q = self.rule(p)
        return q

    def compose(self, other: "SpaceMap") -> "SpaceMap":
        """self after other."""
        rule = None
        if self.rule is not None and other.rule is not None:
            f, g = self.rule, other.rule
            rule = lambda p: f(g(p))  # noqa: E731
        assignment = {p: self(other(p)) for p in other.domain.points}
        return SpaceMap(other.domain, self.codomain, assignment, rule)


@dataclass
class ControlReport:
    k_out: int | None
    proper: bool
    conclusive: bool
    detail: str = ""

    @property
    def ok(self) -> bool:
        return self.k_out is not None and self.proper


def check_controlled_proper(m: SpaceMap, k_in: int, probe_factor: int = 2) -> ControlReport:
    """Least k_out with (m x m)(U_k_in) inside U_k_out on the window, plus properness.

    Properness is only decidable for maps with an ambient rule: preimages of
    codomain core points are compared on the window ball and on a ball
    ``probe_factor`` times larger; growth means an unbounded preimage.
    """
    dom = m.domain
    k_out = 0
    for p in dom.points:
        fp = m(p)
        for q in dom.neighbors(p, k_in):
            d = m.codomain.dist(fp, m(q))
            if d == UNRELATED:
                return ControlReport(None, False, True, f"pair {p},{q} sent to different components")
            k_out = max(k_out, int(d))
    m.controls[k_in] = k_out
    if m.rule is None:
        return ControlReport(k_out, True, False, "window-proper (finite window; not conclusive)")
    radius = dom.core_radius + dom.faithfulness_radius
    targets = m.codomain.core
    small = _preimages(m, dom.spec.ball(radius), targets)
    big = _preimages(m, dom.spec.ball(probe_factor * radius + 1), targets)
    if small != big:
        grown = sorted(set(big) - set(small))
        return ControlReport(k_out, False, True, f"preimage grows with the window at {grown[:3]}")
    return ControlReport(k_out, True, True)


def _preimages(m: SpaceMap, pts: Iterable[Point], targets: frozenset) -> dict:
    out: dict = {}
    for p in pts:
        q = m.rule(p)  # type: ignore[misc]
        if q in targets:
            out.setdefault(q, set()).add(p)
    return {q: frozenset(v) for q, v in out.items()}


def check_close(f: SpaceMap, g: SpaceMap) -> int | None:
    """Least k with (f(x), g(x)) in U_k for every domain point; None if unrelated."""
    if f.domain is not g.domain and f.domain.points != g.domain.points:
        raise ValueError("maps have different domains")
    k = 0
    for p in f.domain.points:
        d = f.codomain.dist(f(p), g(p))
        if d == UNRELATED:
            return None
        k = max(k, int(d))
    return k


# ---------------------------------------------------------------------------
# flasqueness


@dataclass
class FlasquenessWitness:
    f: SpaceMap
    closeness_scale: int
    escape_schedule: dict[int, int]
    control_envelope: dict[int, int]

    def envelope(self, k: int) -> int:
        return self.control_envelope[k]

    def escape_time(self, support: Iterable[Point]) -> int:
        """n0 for the smallest scheduled core ball containing ``support``."""
        w = self.f.domain
        support = list(support)
        if not support:
            return 0
        need = max(min(w.dist(c, p) for c in w.spec.centers() if c in w) for p in support)
        for r in sorted(self.escape_schedule):
            if r >= need:
                return self.escape_schedule[r]
        raise ValueError(f"escape schedule does not cover radius {need}")


@dataclass
class FlasqueFailure:
    condition: str
    detail: str

    def __bool__(self) -> bool:
        return False


def _escape_time(rule, pts: Iterable[Point], target: frozenset, cap: int) -> int | None:
    """Least n0 with f^n(pts) missing target for all n >= n0, checked up to cap."""
    last_hit = -1
    for p in pts:
        x = p
        for n in range(cap + 1):
            if x in target:
                last_hit = max(last_hit, n)
            x = rule(x)
        if x in target:
            return None
    return last_hit + 1


def certify_flasqueness(w: Window, f: SpaceMap, probe_factor: int = 2) -> FlasquenessWitness | FlasqueFailure:
    """Check the three flasqueness conditions for an endomap given by an ambient rule.

    (i) f close to the identity; (ii) for every core ball B a uniform n0 with
    f^n(X) disjoint from B for n >= n0 (uniformity tested against a larger
    probe ball); (iii) a finite bound on the union of f^n(U_k).
    """
    if f.rule is None:
        raise RuleError("flasqueness needs an ambient rule for f")
    rule = f.rule
    for p in w.points:
        try:
            rule(p)
        except Exception as exc:  # noqa: BLE001
            raise RuleError(f"rule not evaluable at {p}: {exc}") from exc
    closeness = check_close(SpaceMap.identity(w), f)
    if closeness is None:
        return FlasqueFailure("closeness", "f moves a point to another component")
    outer = w.core_radius + w.faithfulness_radius
    probe = w.spec.ball(probe_factor * outer + 1)
    cap = 4 * len(probe) + 4
    schedule: dict[int, int] = {}
    for r in range(w.core_radius + 1):
        target = w.core_ball(r)
        n_small = _escape_time(rule, w.points, target, cap)
        n_big = _escape_time(rule, probe, target, cap)
        if n_small is None or n_big is None:
            return FlasqueFailure("escape", f"orbits return to the core ball of radius {r}")
        if n_big != n_small:
            return FlasqueFailure("escape", f"escape time for radius {r} grows with the window ({n_small} -> {n_big})")
        schedule[r] = n_small
    horizon = max(schedule.values(), default=0) + 1
    envelope: dict[int, int] = {}
    for k in range(w.faithfulness_radius + 1):
        bound = 0
        for p in w.core:
            for q in w.neighbors(p, k):
                x, y = p, q
                for _ in range(horizon + 1):
                    d = w.spec.dist(x, y)
                    if d == UNRELATED:
                        return FlasqueFailure("envelope", f"iterates of {p},{q} become unrelated")
                    bound = max(bound, int(d))
                    x, y = rule(x), rule(y)
        envelope[k] = bound
    for k in range(1, len(envelope)):
        if envelope[k] < envelope[k - 1]:
            envelope[k] = envelope[k - 1]
    return FlasquenessWitness(f, closeness, schedule, envelope)


# ---------------------------------------------------------------------------
# convexity


@dataclass
class ConvexityFailure:
    pair: tuple
    detail: str

    def __bool__(self) -> bool:
        return False


def check_u_convex(w: Window, Y: Iterable[Point], k: int) -> dict[int, int] | ConvexityFailure:
    """Table n -> kappa(n) with (U_k^n)|_Y inside (U_k restricted to Y)^kappa(n).

    Sources range over core points of Y; paths are searched inside the window.
    """
    Y = frozenset(Y)
    nmax = max(1, w.faithfulness_radius // max(k, 1))
    sources = sorted((p for p in Y if p in w.core), key=w.index.__getitem__)
    kappa = {n: 0 for n in range(1, nmax + 1)}
    for p in sources:
        dx = w.step_distances(p, k)
        dy = w.step_distances(p, k, within=Y)
        for q in sorted(Y, key=w.index.__getitem__):
            steps = dx.get(q)
            if steps is None or steps > nmax or steps == 0:
                continue
            inner = dy.get(q)
            if inner is None:
                return ConvexityFailure((p, q), f"{p} and {q} are {steps} steps apart but not joined inside Y")
            for n in range(steps, nmax + 1):
                kappa[n] = max(kappa[n], inner)
    return kappa


@dataclass
class ConvexPairVerdict:
    index: int
    covers: bool
    y_convex: bool
    z_cap_y_convex: bool

    @property
    def ok(self) -> bool:
        return self.covers and self.y_convex and self.z_cap_y_convex


def covers_at_scale(w: Window, Z: frozenset, Y: frozenset, k: int) -> bool:
    """Every U_k-bounded subset of the window lies in Y or in Z.

    A bounded set escaping both contains a point outside Y and a point
    outside Z at distance <= k, so it suffices to look for such a pair.
    """
    for p in w.points:
        if p in Y:
            continue
        if any(q not in Z for q in w.neighbors(p, k)):
            return False
    return True


def check_convex_pair(w: Window, Z: Iterable[Point], family: Sequence[Iterable[Point]], k: int) -> list[ConvexPairVerdict]:
    Z = frozenset(Z)
    fam = [frozenset(y) for y in family]
    for a, b in zip(fam, fam[1:]):
        if not a <= b:
            raise ValueError("family is not increasing")
    sub = w.restrict(lambda p: p in Z, "Z") if Z else None
    out = []
    for i, Y in enumerate(fam):
        covers = covers_at_scale(w, Z, Y, k)
        y_ok = bool(check_u_convex(w, Y, k)) if covers else False
        zy_ok = bool(check_u_convex(sub, Z & Y, k)) if (covers and sub is not None) else False
        out.append(ConvexPairVerdict(i, covers, y_ok, zy_ok))
    return out
