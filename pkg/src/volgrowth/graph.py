"""Weighted gadget graph of an assembled plan, with exact shortest paths."""
from __future__ import annotations

import heapq
from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import accumulate
from typing import Any, Iterable, Optional, Sequence

from .assembly import AssemblyPlan, _exact
from .pieces import SynthesizedParams
from .validation import as_fraction, sequence_values


@dataclass(eq=False)
class MetricGraph:
    """Nodes carry (weight, r-value, piece, marked); edges carry exact lengths."""

    weight: list = field(default_factory=list)
    r_value: list = field(default_factory=list)
    piece: list = field(default_factory=list)
    marked: list = field(default_factory=list)
    adj: list = field(default_factory=list)
    origin: int = 0
    q_piece: list = field(default_factory=list)
    _dist_cache: dict = field(default_factory=dict, repr=False)

    @property
    def n_nodes(self) -> int:
        return len(self.weight)

    @property
    def n_edges(self) -> int:
        return sum(len(a) for a in self.adj) // 2

    def add_node(self, weight, r, piece, marked, in_q=False) -> int:
        self.weight.append(weight)
        self.r_value.append(r)
        self.piece.append(piece)
        self.marked.append(marked)
        self.q_piece.append(in_q)
        self.adj.append([])
        return len(self.weight) - 1

    def add_edge(self, a: int, b: int, length) -> None:
        length = _exact(as_fraction(length))
        if length <= 0:
            raise ValueError("edge lengths must be positive")
        self.adj[a].append((b, length))
        self.adj[b].append((a, length))
        self._dist_cache.clear()

    def edges(self) -> list:
        return [(a, b, ln) for a in range(self.n_nodes) for b, ln in self.adj[a] if a < b]

    def scale_edge(self, a: int, b: int, factor) -> None:
        """Multiply the length of edge a-b (test helper for adversarial inputs)."""
        factor = as_fraction(factor)
        self.adj[a] = [(y, _exact(ln * factor) if y == b else ln) for y, ln in self.adj[a]]
        self.adj[b] = [(y, _exact(ln * factor) if y == a else ln) for y, ln in self.adj[b]]
        self._dist_cache.clear()

    def distances(self, source: Optional[int] = None) -> list:
        """Exact single-source shortest paths (label setting)."""
        source = self.origin if source is None else source
        cached = self._dist_cache.get(source)
        if cached is not None:
            return cached
        dist = [None] * self.n_nodes
        dist[source] = 0
        heap = [(0, source)]
        done = [False] * self.n_nodes
        while heap:
            d, x = heapq.heappop(heap)
            if done[x]:
                continue
            done[x] = True
            for y, ln in self.adj[x]:
                nd = d + ln
                if dist[y] is None or nd < dist[y]:
                    dist[y] = nd
                    heapq.heappush(heap, (nd, y))
        if source == self.origin:
            self._dist_cache[source] = dist
        return dist

    def to_dot(self) -> str:
        lines = ["graph gadget {", "  node [shape=point];"]
        for a, b, ln in self.edges():
            lines.append(f'  n{a} -- n{b} [label="{ln}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def build_gadget_graph(plan: AssemblyPlan, params: Optional[SynthesizedParams] = None) -> MetricGraph:
    """One marked node plus a unit-spaced depth chain per piece component.

    Marked nodes of consecutive pieces are joined by ``l``; the hop out of
    Q_j is ``l t_j``; the hop from R_j to a side piece is ``d_j``. After Q_j
    the R components sharing a Q component are joined by ``d_j``.
    """
    params = params or plan.params
    l = plan.l
    d = params.d if params is not None else None
    g = MetricGraph()
    marks = []
    for k, p in enumerate(plan.pieces):
        ms = []
        for prof in p.profiles:
            y = g.add_node(0, p.offset, k, True, p.kind == "Q")
            prev = y
            for i, x in enumerate(prof, start=1):
                node = g.add_node(_exact(x), p.offset + i, k, False, p.kind == "Q")
                g.add_edge(prev, node, 1)
                prev = node
            ms.append(y)
        marks.append(ms)
    g.origin = marks[0][0]

    tree = plan.tree
    vp = plan.vertex_piece
    layout = plan.layout
    kids_of = (lambda j: layout.children(j)) if layout is not None else (lambda j: [[0]])
    parent = tree.parent
    for k, p in enumerate(plan.pieces):
        if k == 0:
            continue
        x = p.vertices[0]
        pk = int(vp[int(parent[x])])
        par = plan.pieces[pk]
        if not tree.is_trunk(x):
            hop = d[par.j] if (par.kind == "R" and d is not None) else l
            g.add_edge(marks[pk][0], marks[k][0], hop)
        elif par.kind == "Q":
            children = kids_of(par.j - 1)
            dj = d[par.j] if d is not None else 1
            for v, ch in enumerate(children):
                for c in ch:
                    g.add_edge(marks[pk][v], marks[k][c], l * par.t)
                for a, b in zip(ch, ch[1:]):
                    g.add_edge(marks[k][a], marks[k][b], dj)
        else:
            if len(marks[pk]) == len(marks[k]):
                for v in range(len(marks[k])):
                    g.add_edge(marks[pk][v], marks[k][v], l)
            elif len(marks[pk]) == 1:
                for v in range(len(marks[k])):
                    g.add_edge(marks[pk][0], marks[k][v], l)
            else:
                raise ValueError(f"cannot join {len(marks[pk])} components to {len(marks[k])}")
    return g


# ball volumes ---------------------------------------------------------------
class BallProfile:
    """Sorted distances from one source with cumulative weights."""

    def __init__(self, dist: Sequence, weight: Sequence):
        pairs = sorted((dv, w) for dv, w in zip(dist, weight) if dv is not None)
        self.d = [p[0] for p in pairs]
        self.cum = list(accumulate((p[1] for p in pairs), initial=0))

    @property
    def eccentricity(self):
        return self.d[-1] if self.d else 0

    def volume(self, radius) -> Any:
        return self.cum[bisect_right(self.d, radius)]


def ball_volume(graph: MetricGraph, radius: Any, source: Optional[int] = None) -> Any:
    radius = as_fraction(radius)
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    dist = graph.distances(source)
    return _exact(sum((as_fraction(w) for dv, w in zip(dist, graph.weight) if dv is not None and dv <= radius),
                      Fraction(0)))


def ball_volumes(graph: MetricGraph, radii: Iterable) -> list:
    prof = BallProfile(graph.distances(), graph.weight)
    return [prof.volume(r) for r in radii]


# verifiers ------------------------------------------------------------------
@dataclass(frozen=True)
class DistanceViolation:
    node: int
    r: int
    d: Any
    side: str


@dataclass(frozen=True)
class DistanceReport:
    violations: tuple
    checked: int
    q_half_margin: Optional[Fraction]
    q_half_failures: int


def check_distance_bounds(graph: MetricGraph, r_min: Optional[int] = None, l: int = 2) -> list:
    """Nodes with ``r >= r_min`` violating ``r/3 <= d(o, x) <= 3 r``."""
    return list(distance_report(graph, r_min, l).violations)


def distance_report(graph: MetricGraph, r_min: Optional[int] = None, l: int = 2) -> DistanceReport:
    """Uniform third bound plus the tighter half bound on Q nodes, reported apart."""
    r_min = 3 * l if r_min is None else r_min
    dist = graph.distances()
    out = []
    checked = 0
    margin = None
    q_fail = 0
    for x, (dv, r) in enumerate(zip(dist, graph.r_value)):
        if r < r_min:
            continue
        checked += 1
        if 3 * dv < r:
            out.append(DistanceViolation(x, r, dv, "lower"))
        if dv > 3 * r:
            out.append(DistanceViolation(x, r, dv, "upper"))
        if graph.q_piece[x]:
            m = as_fraction(dv) / r - Fraction(1, 2)
            margin = m if margin is None else min(margin, m)
            if m < 0:
                q_fail += 1
    return DistanceReport(tuple(out), checked, margin, q_fail)


@dataclass(frozen=True)
class SandwichViolation:
    n: int
    side: str
    lhs: Any
    rhs: Any


def check_sandwich(graph: MetricGraph, z: Any, horizon: Optional[int] = None) -> list:
    """``z(floor(n/3)) <= vol B(o, n) <= z(3n)`` for every n with 3n inside z's range."""
    zv = sequence_values(z)
    N = len(zv) - 1 if horizon is None else min(horizon, len(zv) - 1)
    prof = BallProfile(graph.distances(), graph.weight)
    out = []
    for n in range(0, N // 3 + 1):
        b = prof.volume(n)
        if zv[n // 3] > b:
            out.append(SandwichViolation(n, "lower", zv[n // 3], b))
        if b > zv[3 * n]:
            out.append(SandwichViolation(n, "upper", b, zv[3 * n]))
    return out


def annulus_components(graph: MetricGraph, r_in: Any, r_out: Any) -> int:
    """Connected components induced on ``r_in < d(o, x) <= r_out``."""
    r_in, r_out = as_fraction(r_in), as_fraction(r_out)
    if not 0 <= r_in < r_out:
        raise ValueError("need 0 <= r_in < r_out")
    dist = graph.distances()
    inside = [dv is not None and r_in < dv <= r_out for dv in dist]
    seen = [False] * graph.n_nodes
    count = 0
    for s in range(graph.n_nodes):
        if not inside[s] or seen[s]:
            continue
        count += 1
        stack = [s]
        seen[s] = True
        while stack:
            x = stack.pop()
            for y, _ in graph.adj[x]:
                if inside[y] and not seen[y]:
                    seen[y] = True
                    stack.append(y)
    return count


@dataclass(frozen=True)
class DoublingViolation:
    node: int
    r: Fraction
    small: Any
    large: Any


def _half_integers(lo: Fraction, hi: Fraction) -> list:
    start = (2 * lo).__floor__() + 1
    stop = (2 * hi).__floor__()
    return [Fraction(k, 2) for k in range(start, stop + 1)]


def pointwise_doubling(
    graph: MetricGraph,
    r0: Any,
    A: Any,
    sources: Optional[Iterable[int]] = None,
    max_violations: Optional[int] = None,
) -> list:
    """Pairs (x, r), r a half-integer in ``(r0, diam/2]``, with ``vol B(x,2r) > A vol B(x,r)``.

    With a partial source list the diameter is taken over those sources only,
    which can only shrink the scanned radii.
    """
    r0, A = as_fraction(r0), as_fraction(A)
    if r0 <= 0:
        raise ValueError("r0 must be positive")
    sources = range(graph.n_nodes) if sources is None else list(sources)
    profiles = {x: BallProfile(graph.distances(x), graph.weight) for x in sources}
    diam = max(graph_diameter(graph, profiles), Fraction(0))
    out = []
    for x, prof in profiles.items():
        top = min(as_fraction(diam) / 2, as_fraction(prof.eccentricity))
        for r in _half_integers(r0, top):
            small = prof.volume(r)
            large = prof.volume(2 * r)
            if large > A * small:
                out.append(DoublingViolation(x, r, small, large))
                if max_violations is not None and len(out) >= max_violations:
                    return out
    return out


def graph_diameter(graph: MetricGraph, profiles: Optional[dict] = None) -> Any:
    """Largest eccentricity over ``profiles`` (all nodes when omitted)."""
    if profiles is None:
        profiles = {x: BallProfile(graph.distances(x), graph.weight) for x in range(graph.n_nodes)}
    return max(p.eccentricity for p in profiles.values())


def max_doubling_ratio(graph: MetricGraph, r0: Any, sources: Optional[Iterable[int]] = None) -> Fraction:
    """Smallest A for which pointwise_doubling returns nothing on the same sources."""
    r0 = as_fraction(r0)
    sources = range(graph.n_nodes) if sources is None else list(sources)
    profiles = {x: BallProfile(graph.distances(x), graph.weight) for x in sources}
    diam = graph_diameter(graph, profiles)
    best = Fraction(1)
    for prof in profiles.values():
        top = min(as_fraction(diam) / 2, as_fraction(prof.eccentricity))
        for r in _half_integers(r0, top):
            small = prof.volume(r)
            if small > 0:
                best = max(best, Fraction(prof.volume(2 * r)) / small)
    return best


# aggregated origin balls for single-trunk plans without intervals -------------
@dataclass(frozen=True)
class OriginBallModel:
    """Classes of identical pieces at equal distance from the origin.

    Each entry is ``(multiplicity, dist_of_marked_point, offset, profile)``;
    it reproduces the gadget graph's origin balls and z without listing
    vertices, so exponential trees stay tractable.
    """

    classes: tuple
    l: int
    horizon: int

    def ball_volume(self, radius: Any) -> Any:
        radius = as_fraction(radius)
        total = Fraction(0)
        for mult, dy, _, prof in self.classes:
            k = radius - dy
            if k < 0:
                continue
            total += mult * sum(prof[: int(min(k, len(prof)))])
        return _exact(total)

    def z(self) -> tuple:
        N = self.l * self.horizon
        diff = [Fraction(0)] * (N + 1)
        for mult, _, off, prof in self.classes:
            for i, x in enumerate(prof, start=1):
                if off + i <= N:
                    diff[off + i] += mult * x
        return tuple(_exact(v) for v in accumulate(diff))

    def doubling_ratios(self, r0: Any, r_max: Any) -> list:
        return [
            (r, Fraction(self.ball_volume(2 * r)) / self.ball_volume(r))
            for r in _half_integers(as_fraction(r0), as_fraction(r_max))
        ]

    @classmethod
    def from_growth(cls, w: Any, params: SynthesizedParams, horizon: Optional[int] = None) -> "OriginBallModel":
        """Model of the plan assembled from ``build_tree(w, S=empty)``.

        Side vertices are tracked as newest-first runs of equal departure
        level, which is all the gadget distances depend on.
        """
        vals = sequence_values(w)
        horizon = len(vals) - 1 if horizon is None else horizon
        c = [vals[0]] + [vals[n] - vals[n - 1] for n in range(1, horizon + 1)]
        l = params.l
        side = params.side_profiles
        prof = {k: (side[k],) * l for k in ("HS", "K", "J")}
        r_prof = (params.u_R,) * l
        d0 = params.d[0]
        classes = [(1, 0, 0, prof["HS"])]
        runs = []  # (departure, count) newest first, for level m
        for m in range(0, horizon + 1):
            if m > 0:
                classes.append((1, m * l, m * l, r_prof))
            if m < horizon:
                x = c[m + 1] - 2
                if x < 0 or x > 2 * (c[m] - 1):
                    raise ValueError(f"counts infeasible at level {m + 1}")
                q, rem = divmod(x, 2)
            else:
                q, rem = 0, 0
            nxt = [(m, 1)]
            left_two, left_one = q, rem
            for dep, cnt in runs:
                two = min(cnt, left_two)
                left_two -= two
                one = min(cnt - two, left_one)
                left_one -= one
                zero = cnt - two - one
                dy = m * l - l + (l if dep == 0 else d0)
                for kind, k in (("J", two), ("K", one), ("HS", zero)):
                    if k:
                        classes.append((k, dy, m * l, prof[kind]))
                kids = 2 * two + one
                if kids:
                    if nxt and nxt[-1][0] == dep:
                        nxt[-1] = (dep, nxt[-1][1] + kids)
                    else:
                        nxt.append((dep, kids))
            runs = nxt if m < horizon else []
        return cls(tuple(classes), l, horizon)
