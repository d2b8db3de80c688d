"""Trunk interval selection, piece placement and the discrete growth function."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Optional, Sequence

import numpy as np

from .exceptions import InfeasibleSelection, PlacementConflict
from .growth import GrowthFunction, IncrementsDiverge, limit_behavior
from .pieces import PieceCatalog, SynthesizedParams, q_component_profiles
from .tree import AdmissibleTree, EndsLayout, LevelSet
from .validation import as_fraction, check_positive_int, sequence_values

MODES = ("factorial", "linear", "custom")


# interval selection ------------------------------------------------------
def _level_counts(v: Any) -> list:
    vals = sequence_values(v)
    return [vals[0]] + [vals[n] - vals[n - 1] for n in range(1, len(vals))]


def _interval_ok(c: Sequence[int], n: int, t: int, horizon: int, U_j, strict_volume: bool) -> Optional[str]:
    """Why the interval [n, n+t-1] cannot be used, or None."""
    for m in range(n, n + t):
        if m + 1 <= horizon and not (1 <= c[m + 1] <= 2 * c[m] - 1):
            return f"level {m}: {c[m + 1]} vertices cannot hang below a single-branch trunk"
    if strict_volume and any(c[m] < U_j for m in range(n, horizon + 1)):
        return f"level increments drop below U_j = {U_j} after {n}"
    return None


def choose_nj(
    params: SynthesizedParams,
    v: Any,
    mode: str = "factorial",
    horizon: Optional[int] = None,
    *,
    kgap: int = 2,
    base: int = 1,
    C1: int = 2,
    C2: int = 4,
    starts: Optional[Sequence[int]] = None,
    max_intervals: Optional[int] = None,
    min_intervals: int = 1,
    window: Optional[int] = None,
) -> LevelSet:
    """Pick the trunk intervals ``[n_j, n_j + t_j - 1]``.

    ``factorial`` takes ``n_j >= j! kgap + base`` and moves each start
    forward until the tree stays buildable, ``n_j >= ceil(d_j / l)`` and the
    level increments stay at least ``U_j`` from ``n_j`` on. ``linear`` uses
    ``n_j = C1 + j C2`` (j = 0, 1, ...) verbatim and fails instead of moving.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    vals = sequence_values(v)
    horizon = len(vals) - 1 if horizon is None else min(horizon, len(vals) - 1)
    c = _level_counts(vals)
    l = params.l
    if mode == "factorial":
        if not isinstance(v, GrowthFunction):
            v = GrowthFunction.from_table(vals)
        win = window or max(2, v.horizon // 4)
        if not isinstance(limit_behavior(v, win), IncrementsDiverge):
            raise InfeasibleSelection("factorial selection needs diverging increments")
    if mode == "linear" and not params.u_constant:
        raise InfeasibleSelection("linear selection needs a constant volume parameter u_j")
    limit = params.depth if max_intervals is None else min(params.depth, max_intervals)

    intervals = []
    prev_end = 1  # the root level never joins an interval
    for j in range(1, limit + 1):
        t = params.t[j]
        lower = max(prev_end + 1, math.ceil(params.d[j] / l))
        if mode == "factorial":
            n = max(math.factorial(j) * kgap + base, lower)
            while n + t - 1 <= horizon and _interval_ok(c, n, t, horizon, params.U[j], True):
                n += 1
        elif mode == "linear":
            n = C1 + (j - 1) * C2
        else:
            if starts is None or j > len(starts):
                break
            n = int(starts[j - 1])
        if n + t - 1 > horizon:
            break
        if mode != "factorial":
            if n < lower:
                raise InfeasibleSelection(f"n_{j} = {n} must be at least {lower}")
            why = _interval_ok(c, n, t, horizon, params.U[j], False)
            if why:
                raise InfeasibleSelection(f"n_{j} = {n}: {why}")
        intervals.append((n, t))
        prev_end = n + t - 1
    if len(intervals) < min_intervals:
        raise InfeasibleSelection(f"only {len(intervals)} intervals fit below level {horizon}")
    return LevelSet(tuple(intervals))


@dataclass(frozen=True)
class DensityReport:
    witnesses: tuple
    eps: Fraction
    passes: bool


def vanishing_density_check(S: LevelSet, checkpoints: Sequence[int], eps: Any = Fraction(1, 10)) -> DensityReport:
    """``|S ∩ [0, n]| / n`` at each checkpoint; passes when the minimum is below eps."""
    eps = as_fraction(eps)
    wit = tuple((int(n), Fraction(S.count_upto(int(n)), int(n))) for n in checkpoints if int(n) > 0)
    passes = bool(wit) and min(r for _, r in wit) < eps
    return DensityReport(wit, eps, passes)


# placement ---------------------------------------------------------------
@dataclass(frozen=True)
class Placement:
    """One piece, possibly with several components, hung at ``offset``."""

    kind: str
    level: int
    offset: int
    vertices: tuple
    profiles: tuple
    j: int = 0
    t: int = 1

    @property
    def components(self) -> int:
        return len(self.profiles)

    @property
    def extent(self) -> int:
        return len(self.profiles[0])

    def total_profile(self) -> tuple:
        return tuple(sum(col) for col in zip(*self.profiles))

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "level": self.level,
            "offset": self.offset,
            "vertices": list(self.vertices),
            "profiles": [[str(x) for x in p] for p in self.profiles],
            "j": self.j,
            "t": self.t,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Placement":
        return cls(d["kind"], d["level"], d["offset"], tuple(d["vertices"]),
                   tuple(tuple(Fraction(x) for x in p) for p in d["profiles"]), d.get("j", 0), d.get("t", 1))


@dataclass(frozen=True, eq=False)
class AssemblyPlan:
    S: LevelSet
    l: int
    horizon: int
    pieces: tuple
    vertex_piece: np.ndarray
    mode: dict = field(default_factory=dict)
    tree: Optional[AdmissibleTree] = None
    params: Optional[SynthesizedParams] = None
    layout: Optional[EndsLayout] = None

    def kind_counts(self) -> dict:
        out = {}
        for p in self.pieces:
            out[p.kind] = out.get(p.kind, 0) + 1
        return out

    def to_dict(self) -> dict:
        return {
            "S": self.S.to_dict(),
            "l": self.l,
            "horizon": self.horizon,
            "mode": self.mode,
            "pieces": [p.to_dict() for p in self.pieces],
            "placements": {str(x): int(i) for x, i in enumerate(self.vertex_piece)},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AssemblyPlan":
        pieces = tuple(Placement.from_dict(p) for p in d["pieces"])
        vp = np.array([d["placements"][str(x)] for x in range(len(d["placements"]))], dtype=np.int64)
        return cls(LevelSet.from_dict(d["S"]), d["l"], d["horizon"], pieces, vp, d.get("mode", {}))


def assemble(
    tree: AdmissibleTree,
    S: Optional[LevelSet],
    params: SynthesizedParams,
    catalog: Optional[PieceCatalog] = None,
    layout: Optional[EndsLayout] = None,
    mode: Optional[dict] = None,
) -> AssemblyPlan:
    """Hang one piece on every vertex of the tree.

    Trunk levels in S carry Q_j, the other trunk levels R_j (one component
    per parallel end), side vertices J, K or HS by child count, and the root
    HS. Side pieces below the horizon are labelled by their truncated child
    count, which only matters beyond ``l * horizon``.
    """
    S = tree.S if S is None else S
    if S != tree.S:
        raise PlacementConflict("tree was built for a different trunk set")
    l = params.l
    if len(S) > params.depth:
        raise PlacementConflict(f"{len(S)} intervals but parameters only cover {params.depth}")
    kids = tree.child_counts()
    vp = np.full(tree.n_vertices, -1, dtype=np.int64)
    pieces = []
    side = params.side_profiles
    side_prof = {k: (side[k],) * l for k in ("HS", "K", "J")}
    r_prof = (params.u_R,) * l

    def put(p: Placement):
        for x in p.vertices:
            if vp[x] >= 0:
                raise PlacementConflict(f"vertex {x} already carries a piece")
            vp[x] = len(pieces)
        pieces.append(p)

    put(Placement("HS", 0, 0, (0,), (side_prof["HS"],)))
    for m in range(1, tree.horizon + 1):
        tv = tree.trunk_vertex(m)
        jj = S.interval_index(m)
        if jj is not None:
            n, t = S.intervals[jj]
            if m == n:
                j = jj + 1
                verts = tuple(tree.trunk_vertex(k) for k in range(n, min(n + t, tree.horizon + 1)))
                if catalog is not None and layout is not None:
                    profs = q_component_profiles(catalog, layout, params, j)
                else:
                    profs = (params.q_pieces[j].profile,)
                put(Placement("Q", n, n * l, verts, profs, j, t))
        else:
            if kids[tv] != 2 and m < tree.horizon:
                raise PlacementConflict(f"trunk vertex at level {m} outside S has {kids[tv]} children")
            j = sum(1 for n, _ in S.intervals if n <= m)
            put(Placement("R", m, m * l, (tv,), (r_prof,) * tree.trunk_width[m], j))
        for x in range(tv + 1, int(tree.level_start[m + 1])):
            kind = {2: "J", 1: "K", 0: "HS"}[int(kids[x])]
            put(Placement(kind, m, m * l, (x,), (side_prof[kind],)))
    if (vp < 0).any():
        raise PlacementConflict("some vertices carry no piece")
    return AssemblyPlan(S, l, tree.horizon, tuple(pieces), vp, dict(mode or {}), tree, params, layout)


# discrete growth -----------------------------------------------------------
@dataclass(frozen=True)
class DiscreteGrowth:
    z: tuple
    l: int = 1

    def __len__(self) -> int:
        return len(self.z)

    def __getitem__(self, n):
        return self.z[n]

    @property
    def values(self) -> tuple:
        return self.z

    def to_csv_rows(self) -> list:
        return [(n, str(x), float(x)) for n, x in enumerate(self.z)]


def _exact(x: Fraction):
    return x.numerator if x.denominator == 1 else x


def discrete_growth(plan: AssemblyPlan, horizon: Optional[int] = None) -> DiscreteGrowth:
    """``z(n) = sum over pieces of sum_{1 <= i <= n - offset} v'(i)`` on ``[0, l * horizon]``."""
    horizon = plan.horizon if horizon is None else horizon
    N = plan.l * horizon
    diff = [Fraction(0)] * (N + 1)
    cache = {}
    for p in plan.pieces:
        key = p.profiles
        prof = cache.get(key)
        if prof is None:
            prof = cache[key] = p.total_profile()
        for i, x in enumerate(prof, start=1):
            k = p.offset + i
            if k > N:
                break
            diff[k] += x
    z = []
    acc = Fraction(0)
    for d in diff:
        acc += d
        z.append(_exact(acc))
    return DiscreteGrowth(tuple(z), plan.l)


def flat_enumeration(plan: AssemblyPlan, horizon: Optional[int] = None) -> tuple:
    """Reference z: list every (piece, component, depth) cell and count by r-value."""
    horizon = plan.horizon if horizon is None else horizon
    N = plan.l * horizon
    cells = [
        (p.offset + i, x)
        for p in plan.pieces
        for prof in p.profiles
        for i, x in enumerate(prof, start=1)
    ]
    return tuple(_exact(sum((x for r, x in cells if r <= n), Fraction(0))) for n in range(N + 1))


@dataclass(frozen=True)
class BandViolation:
    n: int
    side: str
    lhs: Any
    rhs: Any


def u_schedule(S: LevelSet, U: Sequence[Any], l: int, n: int):
    """U_j for the length n, with j the last interval whose start ``l n_j`` lies below n."""
    j = sum(1 for s, _ in S.intervals if l * s < n)
    return U[min(j, len(U) - 1)]


def lemma16_bounds_check(z: Any, w: Any, params: SynthesizedParams, S: Optional[LevelSet] = None) -> list:
    """Exact scan of ``(c-1) h <= z(n) - z(n-1) <= H c + U_j``.

    The length n is read against the level ``m = (n-1) // l`` that its
    pieces hang from, and ``c = w(m) - w(m-1)`` (``c = 1`` at the root).
    """
    S = S or LevelSet()
    zv = sequence_values(z)
    c = _level_counts(w)
    l = params.l
    out = []
    top = min(len(zv) - 1, l * (len(c) - 1) + l)
    for n in range(1, top + 1):
        m = (n - 1) // l
        if m >= len(c):
            break
        dz = zv[n] - zv[n - 1]
        lo = (c[m] - 1) * params.h
        hi = params.H * c[m] + u_schedule(S, params.U, l, n)
        if dz < lo:
            out.append(BandViolation(n, "lower", lo, dz))
        if dz > hi:
            out.append(BandViolation(n, "upper", dz, hi))
    return out


@dataclass(frozen=True)
class GrowthConstantBound:
    """``coefficient * L ** exponent`` kept exact."""

    coefficient: Fraction
    L: int
    exponent: Fraction
    variant: str

    def exact(self) -> Optional[Fraction]:
        p, q = self.exponent.numerator, self.exponent.denominator
        root = round(self.L ** (1 / q))
        for r in (root - 1, root, root + 1):
            if r >= 1 and r**q == self.L:
                return self.coefficient * r**p
        return None

    def __float__(self) -> float:
        return float(self.coefficient) * self.L ** float(self.exponent)

    def admits(self, A: Any) -> bool:
        """Exact test of ``A <= coefficient * L ** exponent``."""
        ratio = as_fraction(A) / self.coefficient
        if ratio <= 1:
            return True
        p, q = self.exponent.numerator, self.exponent.denominator
        return ratio**q <= Fraction(self.L) ** p

    def to_dict(self) -> dict:
        ex = self.exact()
        return {
            "coefficient": str(self.coefficient),
            "L": self.L,
            "exponent": str(self.exponent),
            "variant": self.variant,
            "value": str(ex) if ex is not None else None,
            "approx": float(self),
        }


def growth_constant_bound(L: int, l: int, u: Any, h: Any, H: Any, exponent_variant: str = "l") -> GrowthConstantBound:
    """``K = 3 L^e max(1/u, 1/h, H+1)`` with ``e = 1/l`` or ``e = 1/L``."""
    L = check_positive_int(L, "L")
    l = check_positive_int(l, "l")
    u, h, H = as_fraction(u), as_fraction(h), as_fraction(H)
    if u <= 0 or h <= 0:
        raise ValueError("u and h must be positive")
    if exponent_variant not in ("l", "L"):
        raise ValueError("exponent_variant must be 'l' or 'L'")
    e = Fraction(1, l) if exponent_variant == "l" else Fraction(1, L)
    return GrowthConstantBound(3 * max(1 / u, 1 / h, H + 1), L, e, exponent_variant)
