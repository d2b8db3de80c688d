"""Relative connectedness of annuli (and to ends) and the doubling inequalities."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Optional, Sequence

import numpy as np

from .assembly import AssemblyPlan
from .exceptions import DomainError, MultiTrunk
from .graph import MetricGraph, annulus_components
from .tree import AdmissibleTree
from .validation import as_fraction, check_positive_int, sequence_values

LN2 = math.log(2)


@dataclass(frozen=True)
class RcaConfig:
    theta: float
    t0: int = 1
    lam: float = 1.5
    alphaO: float = 1.0
    l: int = 2
    C1: Optional[int] = None
    C2: Optional[int] = None

    def __post_init__(self):
        if not 0 < self.theta < 1:
            raise DomainError(f"theta must lie in (0, 1), got {self.theta}")
        check_positive_int(self.l, "l")


@dataclass(frozen=True)
class DoublingConfig:
    K: Fraction
    alpha_poly: Fraction = Fraction(0)
    l: int = 2
    A: Optional[Fraction] = None
    B: Optional[Fraction] = None
    r0: Optional[Fraction] = None

    def __post_init__(self):
        object.__setattr__(self, "K", as_fraction(self.K))
        object.__setattr__(self, "alpha_poly", as_fraction(self.alpha_poly))
        if self.K < 1:
            raise ValueError("K must be >= 1")
        if self.alpha_poly < 0:
            raise ValueError("alpha_poly must be nonnegative")


@dataclass(frozen=True)
class ThetaChoice:
    branch1: float
    branch2: float
    sup: float
    theta: float
    margin: float

    def to_dict(self) -> dict:
        return self.__dict__.copy()


def rca_theta(lam: float, alphaO: float, t0: int, margin: float = 0.01) -> ThetaChoice:
    """Both closed-form bounds on theta and the returned ``min * (1 - margin)``."""
    if not 1 < lam < 2:
        raise DomainError(f"lambda must lie in (1, 2), got {lam}")
    if alphaO < 1:
        raise DomainError(f"alphaO must be >= 1, got {alphaO}")
    if not 0 <= margin < 1:
        raise DomainError("margin must lie in [0, 1)")
    a = math.log(alphaO * 2 ** (2 * t0))
    if a <= 0:
        raise DomainError(f"denominator 2 ln(alpha 4^t0) = {2 * a} is not positive")
    disc = 9 * LN2**2 - 4 * math.log(lam / 2) * a
    if disc < 0:
        raise DomainError("negative discriminant")
    b1 = (1 - math.log(lam) / LN2) / 3
    b2 = (-3 * LN2 + math.sqrt(disc)) / (2 * a)
    sup = min(b1, b2)
    return ThetaChoice(b1, b2, sup, sup * (1 - margin), margin)


def rca_nj_threshold(lam: float, alphaO: float, theta: float, t_j: int) -> float:
    """``(ln alpha + t_j ln 2) / ((1 - 3 theta) ln 2 - ln lambda)``."""
    den = (1 - 3 * theta) * LN2 - math.log(lam)
    if den <= 0:
        raise DomainError("(1 - 3 theta) ln 2 must exceed ln lambda")
    return (math.log(alphaO) + t_j * LN2) / den


@dataclass(frozen=True)
class RcaViolation:
    level: int
    vertex: int
    departure: int
    bound: float


@dataclass
class RcaReport:
    passes: bool
    theta: float
    s_min: int
    s_max: int
    violations: list = field(default_factory=list)
    branch_witness: list = field(default_factory=list)
    path_margin_failures: list = field(default_factory=list)
    end: int = 0

    def to_dict(self) -> dict:
        return {
            "passes": self.passes,
            "theta": self.theta,
            "s_min": self.s_min,
            "s_max": self.s_max,
            "end": self.end,
            "violations": [v.__dict__ for v in self.violations],
            "branch_witness": [list(map(str, w)) for w in self.branch_witness],
            "path_margin_failures": self.path_margin_failures,
        }


def rca_s_threshold(lam: float, alphaO: float, theta: float, t0: int) -> float:
    """Level past which ``alphaO lam^s < 4^-t0 (2^(1-3 theta))^s``, the counting step of the argument."""
    return rca_nj_threshold(lam, alphaO, theta, 2 * t0)


def _departure_scan(tree: AdmissibleTree, cfg: RcaConfig, horizon: Optional[int], max_violations: int,
                    s_from: str = "radius") -> RcaReport:
    horizon = tree.horizon if horizon is None else min(horizon, tree.horizon)
    th = cfg.theta
    s_min = math.floor(1 / (th * th) / cfg.l) + 1
    if s_from == "counting":
        s_min = max(s_min, math.floor(rca_s_threshold(cfg.lam, cfg.alphaO, th, cfg.t0)) + 1)
    elif s_from != "radius":
        raise ValueError("s_from must be 'radius' or 'counting'")
    dep = np.asarray(tree.departure)
    counts = tree.level_counts()
    out, witness, path_fail = [], [], []
    for s in range(s_min, horizon + 1):
        r = s * cfg.l
        if not 2 * (2 * cfg.l + r * (1 - th)) < r / th:
            path_fail.append(s)
        bound = 3 * th * s + 1 + cfg.t0
        lo, hi = int(tree.level_start[s]), int(tree.level_start[s + 1])
        d = dep[lo:hi]
        bad = np.nonzero((d >= 0) & (d <= bound))[0]
        if bad.size:
            early = int(bad.size)
            cap = sum(2 ** max(0, s - i - 1) for i in range(0, math.floor(bound) + 1))
            witness.append((s, int(counts[s]), early, cap))
            for b in bad[: max(0, max_violations - len(out))]:
                out.append(RcaViolation(s, lo + int(b), int(d[b]), bound))
    return RcaReport(not witness and not path_fail, th, s_min, horizon, out, witness, path_fail)


def verify_rca(tree: AdmissibleTree, plan: Optional[AssemblyPlan], cfg: RcaConfig,
               horizon: Optional[int] = None, max_violations: int = 100, s_from: str = "radius") -> RcaReport:
    """Every side vertex at level s (``s l > 1/theta^2``) departs after ``3 theta s + 1 + t0``.

    Also checks the path-length margin ``2(2l + r(1-theta)) < r/theta`` at
    ``r = s l``. ``s_from="counting"`` additionally starts the scan past
    :func:`rca_s_threshold`, where the branch-counting bound takes effect.
    """
    if tree.n_ends > 1:
        raise MultiTrunk(f"tree carries {tree.n_ends} ends; use verify_rce")
    return _departure_scan(tree, cfg, horizon, max_violations, s_from)


@dataclass
class RceReport:
    passes: bool
    ends: list

    def to_dict(self) -> dict:
        return {"passes": self.passes, "ends": [e.to_dict() for e in self.ends]}


def verify_rce(tree: AdmissibleTree, plan: Optional[AssemblyPlan], cfg: RcaConfig,
               horizon: Optional[int] = None, max_violations: int = 100, s_from: str = "radius") -> RceReport:
    """The departure predicate per end.

    Side branches hang from end 0, so it carries the scan; the other ends
    have no side vertices and pass once the path margin holds.
    """
    base = _departure_scan(tree, cfg, horizon, max_violations, s_from)
    reports = [base]
    for e in range(1, tree.n_ends):
        reports.append(RcaReport(not base.path_margin_failures, cfg.theta, base.s_min, base.s_max,
                                 [], [], list(base.path_margin_failures), e))
    return RceReport(all(r.passes for r in reports), reports)


@dataclass(frozen=True)
class BoundedCaseRow:
    s: int
    mu: float
    v: int
    bound: float
    contradiction: bool


@dataclass
class BoundedCaseReport:
    rows: list
    base: float
    S0: Optional[float]
    holds_from: Optional[int]

    def to_dict(self) -> dict:
        return {
            "rows": [r.__dict__ for r in self.rows],
            "base": self.base,
            "S0": self.S0,
            "holds_from": self.holds_from,
        }


def bounded_case_check(v: Any, theta: float, t0: int, C2: int, s_range: Sequence[int],
                       alphaO: Optional[float] = None, lam: Optional[float] = None) -> BoundedCaseReport:
    """Evaluate ``v(s) > 2^(C2/(t0+C2)+1) (2^(C2(1-3 theta)/(t0+C2)))^s`` over s.

    The contradiction (and so the connectedness) holds where it fails. With
    ``v(n) <= alphaO lam^n`` and lam below the base, ``S0`` is the level from
    which that is guaranteed.
    """
    vals = sequence_values(v)
    base = 2 ** (C2 * (1 - 3 * theta) / (t0 + C2))
    lead = 2 ** (C2 / (t0 + C2) + 1)
    rows = []
    for s in s_range:
        if s >= len(vals):
            break
        mu = (s * (1 - 3 * theta) + 1) / (t0 + C2) + 1
        bound = lead * base**s
        rows.append(BoundedCaseRow(int(s), mu, int(vals[s]), bound, vals[s] <= bound))
    S0 = None
    if alphaO is not None and lam is not None and lam < base:
        S0 = max(0.0, math.log(alphaO / lead) / math.log(base / lam))
    holds_from = None
    for r in reversed(rows):
        if not r.contradiction:
            break
        holds_from = r.s
    return BoundedCaseReport(rows, base, S0, holds_from)


@dataclass
class DoublingBoundReport:
    rows: list
    first_violation: Optional[int]
    C: Any
    C_half: Any
    C_settled: bool
    annulus_at_least_level_count: Optional[bool]

    def to_dict(self) -> dict:
        return {
            "rows": [[str(x) if isinstance(x, Fraction) else x for x in r] for r in self.rows],
            "first_violation": self.first_violation,
            "C": str(self.C),
            "C_half": str(self.C_half),
            "C_settled": self.C_settled,
            "annulus_at_least_level_count": self.annulus_at_least_level_count,
        }


def _poly_bound_constant(vals: Sequence[int], p: Fraction, top: int):
    best = Fraction(0)
    for n in range(0, top + 1):
        if p.denominator == 1:
            den = n ** int(p) + 1
            best = max(best, Fraction(vals[n], den))
        else:
            best = max(best, Fraction(vals[n] / (n ** float(p) + 1)))
    return best


def doubling_bound_check(v: Any, cfg: DoublingConfig, graph: Optional[MetricGraph] = None,
                         horizon: Optional[int] = None) -> DoublingBoundReport:
    """Per level n: annulus components of ``(nl/3, nl]``, the increment cap ``4K^2 (nl)^(2 alpha)``,
    and the smallest C with ``v(n) <= C n^(2 alpha + 1) + C``.

    The component count is a witness only: it is compared with the level
    count but a shortfall is not treated as a failure.
    """
    vals = sequence_values(v)
    H = len(vals) - 1 if horizon is None else min(horizon, len(vals) - 1)
    l, K, a = cfg.l, cfg.K, cfg.alpha_poly
    rows = []
    first = None
    all_lower = None if graph is None else True
    for n in range(1, H + 1):
        inc = vals[n] - vals[n - 1]
        if (2 * a).denominator == 1:
            cap = 4 * K * K * Fraction(n * l) ** int(2 * a)
            ok = inc <= cap
        else:
            cap = float(4 * K * K) * (n * l) ** float(2 * a)
            ok = inc <= cap
        comp = None
        if graph is not None:
            comp = annulus_components(graph, Fraction(n * l, 3), n * l)
            if comp < inc:
                all_lower = False
        rows.append((n, inc, cap, ok, comp))
        if not ok and first is None:
            first = n
    p = 2 * a + 1
    C = _poly_bound_constant(vals, p, H)
    C_half = _poly_bound_constant(vals, p, H // 2)
    return DoublingBoundReport(rows, first, C, C_half, C <= C_half * Fraction(5, 4), all_lower)
