"""Discrete piece models, their parameters, and the warp-function calibration."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Optional, Sequence

import numpy as np
from scipy.special import expit

from .exceptions import DomainError, IncompleteCatalog, SearchExhausted
from .tree import EndsLayout
from .validation import as_fraction, check_positive_int

KINDS = ("Q", "R", "K", "J", "HS")
SIDE_KINDS = ("K", "J", "HS")


@dataclass(frozen=True)
class PieceParams:
    """Per-component model of one piece.

    ``profile[i-1]`` is the volume of one component at depth i; the whole
    piece carries ``components`` copies, so its volume derivative is
    ``components * profile``.
    """

    kind: str
    profile: tuple
    t: int = 1
    diameter_d: Fraction = Fraction(0)
    components: int = 1
    index: Optional[int] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown piece kind {self.kind!r}")
        object.__setattr__(self, "profile", tuple(as_fraction(x) for x in self.profile))
        object.__setattr__(self, "diameter_d", as_fraction(self.diameter_d))
        check_positive_int(self.t, "t")
        check_positive_int(self.components, "components")
        if self.kind != "Q" and self.t != 1:
            raise ValueError("only Q pieces span more than one level")
        if not self.profile or any(x < 0 for x in self.profile):
            raise ValueError("profile must be a non-empty list of nonnegative volumes")

    @property
    def extent(self) -> int:
        return len(self.profile)

    def volume_profile(self) -> tuple:
        return tuple(self.components * x for x in self.profile)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "profile": [str(x) for x in self.profile],
            "t": self.t,
            "diameter_d": str(self.diameter_d),
            "components": self.components,
            "index": self.index,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PieceParams":
        return cls(d["kind"], tuple(d["profile"]), d.get("t", 1), d.get("diameter_d", 0),
                   d.get("components", 1), d.get("index"))


def check_piece(p: PieceParams, l: int, h=None, H=None, u_j=None, U_j=None) -> list:
    """Violated inequalities of the piece's kind; empty when it is admissible."""
    out = []
    vol = p.volume_profile()
    lo, hi = min(vol), max(vol)
    if p.kind in SIDE_KINDS:
        if h is not None and lo < h:
            out.append(f"{p.kind}: min v' = {lo} < h = {h}")
        if H is not None and hi > H:
            out.append(f"{p.kind}: max v' = {hi} > H = {H}")
    if p.kind == "Q" and U_j is not None and hi > U_j:
        out.append(f"Q: max v' = {hi} > U_j = {U_j}")
    if p.kind == "R":
        if u_j is not None and hi > u_j:
            out.append(f"R: max v' = {hi} > u_j = {u_j}")
        if u_j is not None and U_j is not None and u_j > U_j:
            out.append(f"R: u_j = {u_j} > U_j = {U_j}")
    lo_ext, hi_ext = -(-l * p.t // 3), l * p.t
    if not lo_ext <= p.extent <= hi_ext:
        out.append(f"{p.kind}: extent {p.extent} outside [{lo_ext}, {hi_ext}]")
    return out


@dataclass(frozen=True)
class CatalogElement:
    """A closed piece type; ``params[i]`` models it with i boundary spheres."""

    name: str
    params: dict

    @property
    def boundary_counts(self) -> tuple:
        return tuple(sorted(self.params))

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "boundary_counts": list(self.boundary_counts),
            "params": {
                str(i): {"profile": [str(x) for x in p["profile"]], "diameter": str(p["diameter"])}
                for i, p in sorted(self.params.items())
            },
        }


@dataclass(frozen=True)
class PieceCatalog:
    elements: tuple
    l: int = 2
    h: Fraction = Fraction(1)
    H: Fraction = Fraction(2)
    u: Fraction = Fraction(1)
    U: Optional[Fraction] = None
    side_profiles: dict = field(default_factory=lambda: {"HS": Fraction(1), "K": Fraction(1), "J": Fraction(2)})
    root_diameter: Fraction = Fraction(1)

    def __post_init__(self):
        if not self.elements:
            raise IncompleteCatalog("catalog has no elements")
        check_positive_int(self.l, "l")
        for name in ("h", "H", "u", "root_diameter"):
            object.__setattr__(self, name, as_fraction(getattr(self, name)))
        els = []
        for e in self.elements:
            ps = {}
            for i, p in e.params.items():
                prof = tuple(as_fraction(x) for x in p["profile"])
                if not prof or any(x <= 0 for x in prof):
                    raise ValueError(f"{e.name}[{i}]: profile must be positive")
                ps[int(i)] = {"profile": prof, "diameter": as_fraction(p.get("diameter", 1))}
            els.append(CatalogElement(e.name, ps))
        object.__setattr__(self, "elements", tuple(els))
        object.__setattr__(self, "side_profiles", {k: as_fraction(v) for k, v in self.side_profiles.items()})
        top = max(max(p["profile"]) for e in self.elements for p in e.params.values())
        if self.U is None:
            object.__setattr__(self, "U", max(top, self.u))
        else:
            object.__setattr__(self, "U", as_fraction(self.U))
        side = self.side_profiles.values()
        if self.h > self.H or self.u > self.U:
            raise ValueError("catalog needs h <= H and u <= U")
        if min(side) < self.h or max(side) > self.H:
            raise ValueError("side piece volumes must lie in [h, H]")

    @property
    def alpha(self) -> int:
        return len(self.elements)

    def to_dict(self) -> dict:
        return {
            "elements": [e.to_dict() for e in self.elements],
            "l": self.l,
            "h": str(self.h),
            "H": str(self.H),
            "u": str(self.u),
            "U": str(self.U),
            "side_profiles": {k: str(v) for k, v in self.side_profiles.items()},
            "root_diameter": str(self.root_diameter),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PieceCatalog":
        els = tuple(CatalogElement(e["name"], {int(i): p for i, p in e["params"].items()}) for e in d["elements"])
        kw = {k: d[k] for k in ("l", "h", "H", "u", "U", "side_profiles", "root_diameter") if k in d}
        return cls(els, **kw)


def default_catalog(max_boundary: int = 3, n_elements: int = 1, l: int = 2) -> PieceCatalog:
    """Small catalog whose elements differ in volume and diameter."""
    els = []
    for a in range(n_elements):
        params = {
            i: {"profile": [1, 1 + (a + i) % 2, 1], "diameter": 1 + a}
            for i in range(1, max_boundary + 1)
        }
        els.append(CatalogElement(f"M{a}", params))
    return PieceCatalog(tuple(els), l=l)


@dataclass(frozen=True)
class SynthesizedParams:
    """Sequences indexed by j = 0..depth; Q_j (j >= 1) carries layout level j-1."""

    l: int
    h: Fraction
    H: Fraction
    t: tuple
    d: tuple
    u: tuple
    U: tuple
    q_pieces: tuple
    side_profiles: dict
    u_R: Fraction
    degree_bound: Optional[int] = None

    @property
    def depth(self) -> int:
        return len(self.t) - 1

    @property
    def u_constant(self) -> bool:
        return len(set(self.u[1:])) <= 1

    def to_dict(self) -> dict:
        return {
            "l": self.l,
            "h": str(self.h),
            "H": str(self.H),
            "t": list(self.t),
            "d": [str(x) for x in self.d],
            "u": [str(x) for x in self.u],
            "U": [str(x) for x in self.U],
            "u_R": str(self.u_R),
            "degree_bound": self.degree_bound,
            "side_profiles": {k: str(v) for k, v in self.side_profiles.items()},
            "q_pieces": [None] + [[str(x) for x in q.profile] for q in self.q_pieces[1:]],
        }


def _pad(profile: Sequence[Fraction], extent: int) -> tuple:
    return tuple(profile) + (profile[-1],) * (extent - len(profile))


def synthesize_params(catalog: PieceCatalog, layout: EndsLayout) -> SynthesizedParams:
    """Height, volume and diameter parameters for every Q_j the layout needs.

    With a degree bound k, heights and diameters are made constant over the
    whole catalog and ``U_j = U k^j``; otherwise each level uses the maxima
    over its own components.
    """
    l = catalog.l
    need = {}
    for j in range(layout.depth):
        kids = layout.children(j)
        for i in range(layout.F[j]):
            need.setdefault((layout.label(j, i), len(kids[i]) + 1), []).append((j, i))
    if layout.labels is not None and max(max(r) for r in layout.labels) >= catalog.alpha:
        raise IncompleteCatalog("layout uses more element labels than the catalog holds")
    for (a, b), where in need.items():
        if b not in catalog.elements[a].params:
            raise IncompleteCatalog(
                f"element {catalog.elements[a].name} lacks a {b}-boundary variant (needed at level {where[0][0]})"
            )
    k = layout.degree_bound
    all_variants = [p for e in catalog.elements for p in e.params.values()]
    if k is not None:
        t0 = max(-(-len(p["profile"]) // l) for p in all_variants)
        d0 = max(p["diameter"] for p in all_variants)
    t, d, u, U, qs = [1], [catalog.root_diameter], [catalog.u], [catalog.U if k is not None else catalog.u], [None]
    for j in range(1, layout.depth + 1):
        lev = j - 1
        kids = layout.children(lev)
        variants = [catalog.elements[layout.label(lev, i)].params[len(kids[i]) + 1] for i in range(layout.F[lev])]
        if k is not None:
            tj, dj = t0, d0
        else:
            tj = max(-(-len(p["profile"]) // l) for p in variants)
            dj = max(p["diameter"] for p in variants)
        ext = l * tj
        padded = [_pad(p["profile"], ext) for p in variants]
        # one representative per-depth profile: the sum over components
        total = tuple(sum(col) for col in zip(*padded))
        q = PieceParams("Q", total, tj, dj, 1, j)
        u_j = layout.F[j] * catalog.u
        U_j = catalog.U * k**j if k is not None else max(max(total), u_j)
        t.append(tj)
        d.append(dj)
        u.append(u_j)
        U.append(U_j)
        qs.append((q, tuple(padded)))
    q_pieces = (None,) + tuple(q for q, _ in qs[1:])
    return SynthesizedParams(
        l, catalog.h, catalog.H, tuple(t), tuple(d), tuple(u), tuple(U), q_pieces,
        dict(catalog.side_profiles), catalog.u, k,
    )


def q_component_profiles(catalog: PieceCatalog, layout: EndsLayout, params: SynthesizedParams, j: int) -> tuple:
    """Per-component padded profiles of Q_j, in layout order of level j-1."""
    lev = j - 1
    kids = layout.children(lev)
    ext = params.l * params.t[j]
    return tuple(
        _pad(catalog.elements[layout.label(lev, i)].params[len(kids[i]) + 1]["profile"], ext)
        for i in range(layout.F[lev])
    )


# warp function ----------------------------------------------------------
@dataclass(frozen=True)
class WarpProfile:
    lambda_j: float
    T: float
    samples: np.ndarray
    max_ratio: float
    D_j: float = 0.0
    grid: int = 0

    def to_csv_rows(self) -> list:
        t, f, ratio = self.samples
        return [(float(a), float(b), float(c)) for a, b, c in zip(t, f, ratio)]


def warp_values(x: Any, lambda_j: float, T: float) -> np.ndarray:
    """Evaluate f_T; the quotient of exponentials is a logistic of their exponents."""
    x = np.asarray(x, dtype=float)
    out = np.ones_like(x)
    out[x >= T - 1] = lambda_j
    mid = (x > 1) & (x < T - 1)
    xm = x[mid]
    p = (T - 2) / (xm - 1)
    q = (T - 2) / (T - 1 - xm)
    out[mid] = (lambda_j - 1) * expit(q - p) + 1
    return out


def _max_ratio(lambda_j: float, T: float, n: int) -> tuple:
    x = np.linspace(0.0, T, n + 1)
    step = x[1] - x[0]
    f = warp_values(x, lambda_j, T)
    f2 = (f[2:] - 2 * f[1:-1] + f[:-2]) / step**2
    ratio = np.zeros_like(f)
    ratio[1:-1] = np.abs(f2 / f[1:-1])
    return float(ratio.max()), x, f, ratio


def warp_function(lambda_j: float, T: float, grid: int = 1000, tol: float = 1e-9, max_grid: int = 2**22) -> WarpProfile:
    """Sample f_T and estimate ``max |f''/f|`` by central differences.

    The grid is doubled until two successive estimates agree to ``tol``
    (relative to the estimate) or until the change stops shrinking, which
    marks the rounding floor of the second difference.
    """
    if lambda_j < 1:
        raise DomainError(f"lambda_j must be >= 1, got {lambda_j}")
    if T < 4:
        raise DomainError(f"T must be >= 4, got {T}")
    if grid < 100:
        raise DomainError(f"grid must be >= 100, got {grid}")
    n = int(grid)
    prev, x, f, ratio = _max_ratio(lambda_j, T, n)
    last_change = math.inf
    while n < max_grid:
        cur, x2, f2, r2 = _max_ratio(lambda_j, T, 2 * n)
        change = abs(cur - prev)
        if change >= last_change:
            break
        n, prev, x, f, ratio, last_change = 2 * n, cur, x2, f2, r2, change
        if change <= tol * max(1.0, cur):
            break
    return WarpProfile(float(lambda_j), float(T), np.vstack([x, f, ratio]), prev, 0.0, n)


def min_thickening(lambda_j: float, D_j: float = 0.0, tol: float = 1e-6, grid: int = 1000, T_cap: int = 2**20) -> int:
    """Smallest integer T >= max(4, 3 D_j) whose warp has ``max |f''/f| <= 1 + tol``."""
    if lambda_j < 1 or D_j < 0:
        raise DomainError("need lambda_j >= 1 and D_j >= 0")
    floor = max(4, math.ceil(3 * D_j))

    def ok(T: int) -> bool:
        return warp_function(lambda_j, T, grid).max_ratio <= 1 + tol

    if ok(floor):
        return floor
    lo, hi = floor, floor
    while not ok(hi):
        lo, hi = hi, hi * 2
        if hi > T_cap:
            raise SearchExhausted(f"no T <= {T_cap} calibrates lambda_j = {lambda_j}")
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def beta_root(lambda_j: float, alpha_exp: int, scan: int = 200_000, tol: float = 1e-12) -> Optional[float]:
    """Least positive root of ``x^a (lambda-1) - x^(a-2) + lambda``, or None."""
    if lambda_j <= 1:
        raise DomainError(f"lambda_j must be > 1, got {lambda_j}")
    if alpha_exp < 2:
        raise DomainError(f"alpha_exp must be >= 2, got {alpha_exp}")

    def p(x):
        return x**alpha_exp * (lambda_j - 1) - x ** (alpha_exp - 2) + lambda_j

    bound = 1 + max(1.0, lambda_j) / (lambda_j - 1)
    xs = np.linspace(0.0, bound, scan + 1)[1:]
    vals = p(xs)
    sign_change = np.nonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))[0]
    zeros = np.nonzero(vals == 0)[0]
    if zeros.size and (not sign_change.size or zeros[0] <= sign_change[0]):
        return float(xs[zeros[0]])
    if not sign_change.size:
        return None
    i = int(sign_change[0])
    a, b = float(xs[i]), float(xs[i + 1])
    fa = p(a)
    while b - a > tol:
        m = (a + b) / 2
        fm = p(m)
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
        else:
            b = m
    return (a + b) / 2
