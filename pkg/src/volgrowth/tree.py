"""Admissible rooted trees with a single trunk and prescribed level counts.

Vertices are numbered level by level. Inside a level the trunk vertex comes
first and the remaining vertices are sorted from the newest branch to the
oldest one, so "newest first" allocation is a prefix of each level.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterable, Optional, Sequence

import numpy as np

from .exceptions import InfeasibleGrowth, MalformedTree, OnTrunk
from .validation import check_positive_int, sequence_values


@dataclass(frozen=True)
class LevelSet:
    """Disjoint sorted trunk intervals ``[n_j, n_j + t_j - 1]``."""

    intervals: tuple = ()

    def __post_init__(self):
        ivs = tuple((int(n), int(t)) for n, t in self.intervals)
        object.__setattr__(self, "intervals", ivs)
        prev_end = -1
        for n, t in ivs:
            if n < 1 or t < 1:
                raise ValueError(f"interval start and length must be positive, got ({n}, {t})")
            if n <= prev_end:
                raise ValueError("intervals must be sorted and pairwise disjoint")
            prev_end = n + t - 1

    @classmethod
    def from_starts(cls, starts: Iterable[int], lengths: Any = 1) -> "LevelSet":
        starts = list(starts)
        if isinstance(lengths, int):
            lengths = [lengths] * len(starts)
        return cls(tuple(zip(starts, lengths)))

    @property
    def starts(self) -> tuple:
        return tuple(n for n, _ in self.intervals)

    @property
    def lengths(self) -> tuple:
        return tuple(t for _, t in self.intervals)

    def __len__(self) -> int:
        return len(self.intervals)

    def __iter__(self):
        return iter(self.intervals)

    def __contains__(self, level: int) -> bool:
        return self.interval_index(level) is not None

    def interval_index(self, level: int) -> Optional[int]:
        """0-based index of the interval containing ``level``, else None."""
        for j, (n, t) in enumerate(self.intervals):
            if n <= level <= n + t - 1:
                return j
            if n > level:
                break
        return None

    def levels(self) -> list:
        return [m for n, t in self.intervals for m in range(n, n + t)]

    def mask(self, horizon: int) -> np.ndarray:
        out = np.zeros(horizon + 1, dtype=bool)
        for n, t in self.intervals:
            out[n : min(n + t, horizon + 1)] = True
        return out

    def count_upto(self, n: int) -> int:
        """``|S ∩ [0, n]|``."""
        return sum(max(0, min(s + t - 1, n) - s + 1) for s, t in self.intervals)

    def to_dict(self) -> dict:
        return {"intervals": [[n, t] for n, t in self.intervals]}

    @classmethod
    def from_dict(cls, d: dict) -> "LevelSet":
        return cls(tuple(tuple(x) for x in d["intervals"]))


@dataclass(frozen=True)
class EndsLayout:
    """Per-level shape of the tree T along which pieces are connected.

    ``parents[j]`` lists, for every vertex on level ``j``, the index of its
    parent on level ``j-1`` (level 0 has an empty list). ``labels`` picks the
    catalog element placed on each vertex.
    """

    F: tuple
    parents: tuple
    degree_bound: Optional[int] = None
    finite_branch_levels: frozenset = frozenset()
    labels: Optional[tuple] = None

    def __post_init__(self):
        if not self.F or self.F[0] != 1:
            raise MalformedTree("layout must have exactly one root (F(0) = 1)")
        if len(self.parents) != len(self.F):
            raise MalformedTree("parents and F disagree in depth")
        for j in range(1, len(self.F)):
            if len(self.parents[j]) != self.F[j]:
                raise MalformedTree(f"level {j} lists {len(self.parents[j])} parents for {self.F[j]} vertices")

    @property
    def depth(self) -> int:
        return len(self.F) - 1

    @property
    def n_ends(self) -> int:
        """Components reaching the deepest recorded level."""
        return self.F[-1]

    def children(self, j: int) -> list:
        """Children lists (indices on level ``j+1``) of the vertices on level j."""
        out = [[] for _ in range(self.F[j])]
        if j + 1 < len(self.F):
            for i, p in enumerate(self.parents[j + 1]):
                out[p].append(i)
        return out

    def degree(self, j: int, i: int) -> int:
        kids = len(self.children(j)[i])
        return kids if j == 0 else kids + 1

    def label(self, j: int, i: int) -> int:
        if self.labels is None:
            return 0
        return self.labels[j][i]

    def to_dict(self) -> dict:
        levels = []
        for j, c in enumerate(self.F):
            entry = {"count": c, "parents": list(self.parents[j])}
            if self.labels is not None:
                entry["labels"] = list(self.labels[j])
            levels.append(entry)
        return {"levels": levels}


def layout_from_tree(data: Any, record_degree_bound: bool = True) -> EndsLayout:
    """Read ``{"levels": [{"count": c, "parents": [...]}, ...]}`` into an EndsLayout."""
    try:
        levels = data["levels"] if isinstance(data, dict) else list(data)
    except (KeyError, TypeError) as exc:
        raise MalformedTree("tree description needs a 'levels' list") from exc
    if not levels:
        raise MalformedTree("empty tree")
    F, parents, labels = [], [], []
    has_labels = any(isinstance(lv, dict) and "labels" in lv for lv in levels)
    for j, lv in enumerate(levels):
        count = int(lv["count"])
        par = [int(p) for p in lv.get("parents", [])]
        if j == 0:
            if count != 1 or par:
                raise MalformedTree("level 0 must be a single root without parents")
        else:
            if len(par) != count:
                raise MalformedTree(f"level {j}: count {count} but {len(par)} parents")
            if any(p < 0 or p >= F[j - 1] for p in par):
                raise MalformedTree(f"level {j}: parent index out of range")
        if count == 0:
            raise MalformedTree(f"level {j} is empty; drop trailing empty levels")
        F.append(count)
        parents.append(tuple(par))
        if has_labels:
            lab = lv.get("labels", [0] * count)
            if len(lab) != count:
                raise MalformedTree(f"level {j}: wrong number of labels")
            labels.append(tuple(int(x) for x in lab))
    depth = len(F) - 1
    kids = [[0] * F[j] for j in range(len(F))]
    for j in range(1, len(F)):
        for p in parents[j]:
            kids[j - 1][p] += 1
    max_deg = 0
    finite = {}
    for j in range(len(F)):
        for i in range(F[j]):
            deg = kids[j][i] + (0 if j == 0 else 1)
            max_deg = max(max_deg, deg)
            if kids[j][i] == 0 and j < depth:
                finite[j] = finite.get(j, 0) + 1
    return EndsLayout(
        tuple(F),
        tuple(parents),
        max_deg if record_degree_bound else None,
        frozenset(finite.items()),
        tuple(labels) if has_labels else None,
    )


def _regular_layout(branching: Sequence[int], depth: int, root_children: int, n_labels: int) -> EndsLayout:
    levels = [{"count": 1, "parents": []}]
    count = 1
    for j in range(1, depth + 1):
        per = root_children if j == 1 else branching[0]
        par = [p for p in range(count) for _ in range(per)]
        levels.append({"count": len(par), "parents": par})
        count = len(par)
    if n_labels > 1:
        k = 0
        for lv in levels:
            lv["labels"] = [(k + i) % n_labels for i in range(lv["count"])]
            k += lv["count"]
    return layout_from_tree({"levels": levels})


def ray_layout(depth: int, n_labels: int = 1) -> EndsLayout:
    """One-ended chain of pieces."""
    return _regular_layout([1], depth, 1, n_labels)


def line_layout(depth: int, n_labels: int = 1) -> EndsLayout:
    """Bi-infinite line rooted at a vertex: every vertex has degree 2."""
    return _regular_layout([1], depth, 2, n_labels)


def star_layout(ends: int, depth: int, n_labels: int = 1) -> EndsLayout:
    """Root with ``ends`` rays."""
    return _regular_layout([1], depth, ends, n_labels)


def kary_layout(children: int, depth: int, n_labels: int = 1) -> EndsLayout:
    """Every vertex (root included) has ``children`` children; degree bound ``children+1``."""
    return _regular_layout([children], depth, children, n_labels)


@dataclass(frozen=True, eq=False)
class AdmissibleTree:
    """Rooted tree with one trunk and at most two children per vertex.

    ``trunk_width[m]`` is the number of parallel components carried by the
    trunk piece at level m (ends realised so far); it is 1 everywhere for a
    one-ended construction.
    """

    level_start: np.ndarray
    parent: np.ndarray
    departure: np.ndarray
    S: LevelSet = field(default_factory=LevelSet)
    trunk_width: tuple = ()

    def __post_init__(self):
        for arr in (self.level_start, self.parent, self.departure):
            arr.setflags(write=False)
        if not self.trunk_width:
            object.__setattr__(self, "trunk_width", (1,) * (self.horizon + 1))

    @property
    def horizon(self) -> int:
        return len(self.level_start) - 2

    @property
    def n_vertices(self) -> int:
        return int(self.level_start[-1])

    @property
    def n_ends(self) -> int:
        return max(self.trunk_width) if self.trunk_width else 1

    def level_counts(self) -> np.ndarray:
        return np.diff(self.level_start)

    def level_of(self, x: int) -> int:
        return int(np.searchsorted(self.level_start, x, side="right") - 1)

    def levels(self) -> np.ndarray:
        return np.repeat(np.arange(self.horizon + 1), self.level_counts())

    def vertices_at(self, level: int) -> range:
        return range(int(self.level_start[level]), int(self.level_start[level + 1]))

    def trunk_vertex(self, level: int) -> int:
        return int(self.level_start[level])

    def is_trunk(self, x: int) -> bool:
        return int(self.departure[x]) < 0

    def child_counts(self) -> np.ndarray:
        return np.bincount(self.parent[1:], minlength=self.n_vertices)

    def children_lists(self) -> list:
        out = [[] for _ in range(self.n_vertices)]
        for x in range(1, self.n_vertices):
            out[int(self.parent[x])].append(x)
        return out

    def to_dict(self) -> dict:
        levels = []
        for m in range(self.horizon + 1):
            vs = self.vertices_at(m)
            base = int(self.level_start[m - 1]) if m > 0 else 0
            levels.append(
                {
                    "count": len(vs),
                    "parents": [] if m == 0 else [int(self.parent[x]) - base for x in vs],
                }
            )
        return {
            "levels": levels,
            "S": self.S.to_dict(),
            "trunk_width": list(self.trunk_width),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AdmissibleTree":
        levels = d["levels"]
        starts = [0]
        parent = [-1]
        for m, lv in enumerate(levels):
            starts.append(starts[-1] + int(lv["count"]))
            if m > 0:
                parent.extend(int(p) + starts[m - 1] for p in lv["parents"])
        parent = np.asarray(parent, dtype=np.int64)
        level_start = np.asarray(starts, dtype=np.int64)
        departure = np.full(len(parent), -1, dtype=np.int64)
        for m in range(1, len(levels)):
            for x in range(starts[m], starts[m + 1]):
                p = int(parent[x])
                if x == starts[m]:
                    continue
                departure[x] = m - 1 if p == starts[m - 1] else departure[p]
        return cls(level_start, parent, departure, LevelSet.from_dict(d.get("S", {"intervals": []})),
                   tuple(d.get("trunk_width", ())))

    def to_dot(self) -> str:
        lines = ["digraph admissible_tree {", "  node [shape=point];"]
        for x in range(self.n_vertices):
            if self.is_trunk(x):
                lines.append(f'  v{x} [shape=circle, label="{self.level_of(x)}", width=0.2];')
        for x in range(1, self.n_vertices):
            lines.append(f"  v{int(self.parent[x])} -> v{x};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def trunk_widths(S: LevelSet, layout: Optional[EndsLayout], horizon: int) -> tuple:
    """Components of the trunk piece per level.

    Trunk pieces before the first interval are one-component; the j-th
    interval carries the layout's level j-1 and everything after it, up to
    the next interval, carries level j.
    """
    if layout is None:
        return (1,) * (horizon + 1)
    if len(S) > layout.depth:
        raise MalformedTree(f"{len(S)} intervals need a layout of depth >= {len(S)}, got {layout.depth}")
    out = []
    for m in range(horizon + 1):
        j = sum(1 for n, _ in S.intervals if n <= m)
        if j == 0:
            out.append(1)
            continue
        n, t = S.intervals[j - 1]
        out.append(layout.F[j - 1] if m <= n + t - 1 else layout.F[j])
    return tuple(out)


def check_feasible(counts: Sequence[int], S: LevelSet) -> None:
    """Raise InfeasibleGrowth at the first level the counts cannot be realised."""
    if counts[0] != 1:
        raise InfeasibleGrowth(0, "level 0 must hold exactly the root")
    for m in range(len(counts) - 1):
        side = 0 if m in S else 1
        x = counts[m + 1] - 1 - side
        if x < 0:
            raise InfeasibleGrowth(m + 1, f"needs at least {1 + side} vertices")
        if x > 2 * (counts[m] - 1):
            raise InfeasibleGrowth(m + 1, f"{counts[m + 1]} vertices exceed what level {m} can carry")


def build_tree(
    w: Any,
    S: Optional[LevelSet] = None,
    horizon: Optional[int] = None,
    layout: Optional[EndsLayout] = None,
) -> AdmissibleTree:
    """Build the admissible tree with level counts ``w(n) - w(n-1)``.

    Trunk vertices outside S get a side child; the remaining children are
    handed out two at a time starting from the newest branch. Branches that
    receive nothing end there and are capped later.
    """
    S = S or LevelSet()
    vals = sequence_values(w)
    if horizon is None:
        horizon = len(vals) - 1
    horizon = check_positive_int(horizon, "horizon", 1)
    if horizon > len(vals) - 1:
        raise ValueError(f"horizon {horizon} beyond growth function horizon {len(vals) - 1}")
    counts = [vals[0]] + [vals[n] - vals[n - 1] for n in range(1, horizon + 1)]
    check_feasible(counts, S)
    in_s = S.mask(horizon)

    parents = [np.array([-1], dtype=np.int64)]
    departures = [np.array([-1], dtype=np.int64)]
    starts = [0, 1]
    for m in range(horizon):
        s, e = starts[m], starts[m + 1]
        side = not in_s[m]
        x = counts[m + 1] - 1 - int(side)
        q, rem = divmod(x, 2)
        nontrunk = np.arange(s + 1, e, dtype=np.int64)
        pieces = [np.array([s, s] if side else [s], dtype=np.int64), np.repeat(nontrunk[:q], 2)]
        if rem:
            pieces.append(nontrunk[q : q + 1])
        par = np.concatenate(pieces)
        dep_prev = departures[m]
        dep = dep_prev[par - s]
        dep[0] = -1
        if side:
            dep[1] = m
        parents.append(par)
        departures.append(dep)
        starts.append(starts[-1] + len(par))
    return AdmissibleTree(
        np.asarray(starts, dtype=np.int64),
        np.concatenate(parents),
        np.concatenate(departures),
        S,
        trunk_widths(S, layout, horizon),
    )


def departure_level(tree: AdmissibleTree, x: int) -> int:
    """Level of the trunk vertex whose side branch contains x."""
    if x < 0 or x >= tree.n_vertices:
        raise IndexError(f"vertex {x} out of range")
    d = int(tree.departure[x])
    if d < 0:
        raise OnTrunk(f"vertex {x} lies on the trunk")
    return d


def ball_count(tree: AdmissibleTree, n: int) -> int:
    """Vertices at level <= n."""
    if n < 0 or n > tree.horizon:
        raise ValueError(f"level {n} outside [0, {tree.horizon}]")
    return int(tree.level_start[n + 1])
