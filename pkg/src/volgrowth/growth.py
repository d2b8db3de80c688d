"""Growth functions: bounded growth of derivative, normalization, growth type.

All arithmetic is exact. Sequence values are Python ints; ratios are
:class:`fractions.Fraction`. Growth-type certificates only ever speak about
a finite horizon and record it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Optional, Sequence, Union

from .exceptions import HorizonTooSmall, NormalizationFailed
from .validation import (
    as_fraction,
    check_int_sequence,
    check_non_decreasing,
    check_positive_int,
    sequence_values,
)

DEFAULT_SEARCH_CAP = 10**6


@dataclass(frozen=True)
class GrowthFunction:
    """Non-decreasing integer sequence ``v(0), ..., v(horizon)``."""

    values: tuple
    source: str = "table"
    definition: Optional[dict] = field(default=None, compare=False, hash=False, repr=False)

    def __post_init__(self):
        vals = check_int_sequence(self.values)
        object.__setattr__(self, "values", vals)
        if len(vals) < 3:
            raise HorizonTooSmall(f"horizon must be >= 2, got {len(vals) - 1}")
        if vals[0] < 0:
            raise ValueError("growth values must be nonnegative")
        check_non_decreasing(vals)
        if self.source not in ("table", "poly", "exp"):
            raise ValueError(f"unknown source {self.source!r}")

    # construction -----------------------------------------------------
    @classmethod
    def from_table(cls, values: Sequence[int]) -> "GrowthFunction":
        vals = check_int_sequence(values)
        return cls(vals, "table", {"kind": "table", "values": list(vals)})

    @classmethod
    def from_poly(cls, coeffs: Sequence[Any], horizon: int) -> "GrowthFunction":
        """``v(n) = floor(sum_i coeffs[i] * n**i)``; coefficients may be ``"p/q"``."""
        horizon = check_positive_int(horizon, "horizon", 2)
        cs = [as_fraction(c) for c in coeffs]
        vals = [math.floor(sum(c * n**i for i, c in enumerate(cs))) for n in range(horizon + 1)]
        return cls(tuple(vals), "poly", {"kind": "poly", "coeffs": [str(c) for c in cs]})

    @classmethod
    def from_exp(cls, base: Any, coeff: Any, horizon: int) -> "GrowthFunction":
        """``v(n) = floor(coeff * base**n)``."""
        horizon = check_positive_int(horizon, "horizon", 2)
        b, c = as_fraction(base), as_fraction(coeff)
        vals = [math.floor(c * b**n) for n in range(horizon + 1)]
        return cls(tuple(vals), "exp", {"kind": "exp", "base": str(b), "coeff": str(c)})

    @classmethod
    def from_callable(cls, func: Callable[[int], int], horizon: int) -> "GrowthFunction":
        horizon = check_positive_int(horizon, "horizon", 2)
        return cls.from_table([func(n) for n in range(horizon + 1)])

    @classmethod
    def from_dict(cls, data: dict) -> "GrowthFunction":
        kind = data.get("kind", "table")
        horizon = data.get("horizon")
        if kind == "table":
            gf = cls.from_table(data["values"])
            if horizon is not None:
                gf = gf.truncate(int(horizon))
        elif kind == "poly":
            gf = cls.from_poly(data["coeffs"], int(horizon))
        elif kind == "exp":
            gf = cls.from_exp(data["base"], data["coeff"], int(horizon))
        else:
            raise ValueError(f"unknown growth function kind {kind!r}")
        return gf

    def to_dict(self) -> dict:
        out = dict(self.definition or {"kind": "table", "values": list(self.values)})
        if out.get("kind") == "table":
            out["values"] = list(self.values)
        out["horizon"] = self.horizon
        return out

    # access -------------------------------------------------------------
    @property
    def horizon(self) -> int:
        return len(self.values) - 1

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, n):
        return self.values[n]

    def __call__(self, n: int) -> int:
        return self.values[n]

    def increments(self) -> tuple:
        """``d(n) = v(n+1) - v(n)`` for ``n = 0 .. horizon-1``."""
        v = self.values
        return tuple(v[i + 1] - v[i] for i in range(len(v) - 1))

    def level_counts(self) -> tuple:
        """``v(0), v(1)-v(0), ...``: vertices per level of a tree with this growth."""
        v = self.values
        return (v[0],) + self.increments()

    def truncate(self, horizon: int) -> "GrowthFunction":
        if horizon > self.horizon:
            raise ValueError(f"cannot extend horizon {self.horizon} to {horizon}")
        defn = dict(self.definition or {})
        if defn.get("kind", "table") == "table":
            defn["values"] = list(self.values[: horizon + 1])
        return GrowthFunction(self.values[: horizon + 1], self.source, defn)


# reports ---------------------------------------------------------------
@dataclass(frozen=True)
class BgdReport:
    is_bgd: bool
    minimal_L: Optional[int] = None
    failing_index: Optional[int] = None

    def __post_init__(self):
        if self.is_bgd != (self.minimal_L is not None) or self.is_bgd == (self.failing_index is not None):
            raise ValueError("inconsistent BgdReport")

    def to_dict(self) -> dict:
        return {"is_bgd": self.is_bgd, "minimal_L": self.minimal_L, "failing_index": self.failing_index}

    @classmethod
    def from_dict(cls, d: dict) -> "BgdReport":
        return cls(d["is_bgd"], d.get("minimal_L"), d.get("failing_index"))


@dataclass(frozen=True)
class GrowthCertificate:
    """Finite-horizon witness that two sequences share a growth type.

    ``A`` is None when no constant up to the search cap works. Each witness
    entry is ``(n, lhs, rhs)`` for one checked inequality ``lhs <= rhs``.
    """

    A: Optional[int]
    horizon: int
    direction_witnesses: tuple = ((), ())

    @property
    def failed(self) -> bool:
        return self.A is None

    def to_dict(self) -> dict:
        return {
            "A": self.A,
            "failed": self.failed,
            "horizon": self.horizon,
            "direction_witnesses": [
                [[n, str(a), str(b)] for n, a, b in ws] for ws in self.direction_witnesses
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GrowthCertificate":
        ws = tuple(
            tuple((int(n), as_fraction(a), as_fraction(b)) for n, a, b in lst)
            for lst in d["direction_witnesses"]
        )
        return cls(d["A"], d["horizon"], ws)


@dataclass(frozen=True)
class DoublingReport:
    minimal_K: Optional[Fraction]
    unbounded: bool
    sup_sequence: tuple = ()

    def to_dict(self) -> dict:
        return {
            "minimal_K": None if self.minimal_K is None else str(self.minimal_K),
            "unbounded": self.unbounded,
            "sup_sequence": [[n, str(r)] for n, r in self.sup_sequence],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DoublingReport":
        k = d.get("minimal_K")
        return cls(
            None if k is None else Fraction(k),
            d["unbounded"],
            tuple((int(n), Fraction(r)) for n, r in d["sup_sequence"]),
        )


@dataclass(frozen=True)
class IncrementsDiverge:
    heuristic: bool = True


@dataclass(frozen=True)
class IncrementsBoundedBy:
    A: int
    heuristic: bool = True


LimitBehavior = Union[IncrementsDiverge, IncrementsBoundedBy]


# operations ------------------------------------------------------------
def check_bgd(v: GrowthFunction, L_cap: int = DEFAULT_SEARCH_CAP) -> BgdReport:
    """Smallest integer L with ``1/L <= d(n+1) <= L d(n)`` for every ``n <= horizon-2``."""
    if v.horizon < 3:
        raise HorizonTooSmall(f"check_bgd needs horizon >= 3, got {v.horizon}")
    d = v.increments()
    L = 1
    for n in range(len(d) - 1):
        a, b = d[n], d[n + 1]
        if b <= 0 or a <= 0:
            return BgdReport(False, None, n)
        need = -(-b // a)
        if need > L_cap:
            return BgdReport(False, None, n)
        L = max(L, need)
    return BgdReport(True, L, None)


def _eq_direction(f, h, A, H):
    """Witnesses for ``f(n) <= A h(An+A) + A``; None on the first failure."""
    out = []
    n = 0
    while A * n + A <= H:
        lhs, rhs = f[n], A * h[A * n + A] + A
        if lhs > rhs:
            return None
        out.append((n, lhs, rhs))
        n += 1
    return out


def growth_equivalent(f: Any, h: Any, A_max: int = DEFAULT_SEARCH_CAP) -> GrowthCertificate:
    """Smallest A <= A_max such that f and h bound each other with constant A.

    Only indices with ``An + A <= min horizon`` are checked, so A never
    exceeds the common horizon (n = 0 must be checkable).
    """
    fv, hv = sequence_values(f), sequence_values(h)
    H = min(len(fv), len(hv)) - 1
    if H < 2:
        raise HorizonTooSmall("both horizons must be >= 2")
    for A in range(1, min(A_max, H) + 1):
        w1 = _eq_direction(fv, hv, A, H)
        if w1 is None:
            continue
        w2 = _eq_direction(hv, fv, A, H)
        if w2 is None:
            continue
        return GrowthCertificate(A, H, (tuple(w1), tuple(w2)))
    return GrowthCertificate(None, H, ((), ()))


def check_doubling(v: Any, window: int = 8) -> DoublingReport:
    """Ratios ``v(2n)/v(n)`` over ``1 <= n <= horizon/2``.

    The tail heuristic flags the sequence as unbounded when the last
    ``window`` ratios rise strictly with non-shrinking steps; a saturating
    rise such as ``(2n+1)/(n+1)`` stays bounded.
    """
    vals = sequence_values(v)
    H = len(vals) - 1
    if H < 2:
        raise HorizonTooSmall("check_doubling needs horizon >= 2")
    sup = []
    for n in range(1, H // 2 + 1):
        if vals[n] == 0:
            if vals[2 * n] == 0:
                continue
            return DoublingReport(None, True, tuple(sup))
        sup.append((n, Fraction(vals[2 * n], vals[n])))
    ratios = [r for _, r in sup]
    tail = ratios[-window:]
    unbounded = False
    if len(tail) >= 3:
        steps = [b - a for a, b in zip(tail, tail[1:])]
        unbounded = all(s > 0 for s in steps) and all(b >= a for a, b in zip(steps, steps[1:]))
    if unbounded:
        return DoublingReport(None, True, tuple(sup))
    return DoublingReport(max(ratios) if ratios else Fraction(1), False, tuple(sup))


def limit_behavior(v: GrowthFunction, window: int) -> LimitBehavior:
    """Heuristic split between diverging and bounded increments.

    Bounded with constant A when the final ``window`` increments never
    exceed the largest increment seen before them.
    """
    window = check_positive_int(window, "window")
    if window > v.horizon:
        raise ValueError(f"window {window} exceeds horizon {v.horizon}")
    d = v.increments()
    if window >= len(d):
        window = max(1, len(d) // 2)
    head, tail = d[:-window], d[-window:]
    if max(tail) <= max(head):
        return IncrementsBoundedBy(max(d))
    return IncrementsDiverge()


def increments_diverge(v: GrowthFunction, window: int) -> bool:
    return isinstance(limit_behavior(v, window), IncrementsDiverge)


def ratio_diverges(v: GrowthFunction, window: int) -> bool:
    """Heuristic for ``v(n)/n -> infinity``: the tail minimum of v(n)/n beats the head maximum."""
    window = check_positive_int(window, "window")
    H = v.horizon
    if window >= H:
        window = max(1, H // 2)
    ratios = [Fraction(v[n], n) for n in range(1, H + 1)]
    head, tail = ratios[:-window], ratios[-window:]
    return min(tail) > max(head)


def exponential_rate(w: Any, step: int = 1000) -> tuple:
    """Return ``(alpha, lam)`` with ``w(n) <= alpha * lam**n`` on the horizon.

    ``lam`` is the largest geometric mean growth over spans of a quarter
    horizon in the second half, rounded up to a multiple of ``1/step``;
    ``alpha`` is the smallest multiple of ``1/step`` that works.
    """
    vals = sequence_values(w)
    H = len(vals) - 1
    span = max(1, H // 4)
    best = 1.0
    for n in range(max(span, H // 2), H + 1):
        lo, hi = vals[n - span], vals[n]
        if lo > 0 and hi > 0:
            best = max(best, math.exp((math.log(hi) - math.log(lo)) / span))
    lam = Fraction(math.ceil(best * step), step)
    lam = max(lam, Fraction(1))
    tight = max(Fraction(x) / lam**n for n, x in enumerate(vals))
    alpha = Fraction(math.ceil(tight * step), step)
    return alpha, lam


def satisfies_normalized_conditions(w: Any) -> bool:
    """``w(0) = 1`` and ``2 <= d(n+1) <= 2 d(n)`` everywhere on the horizon."""
    vals = sequence_values(w)
    if vals[0] != 1:
        return False
    d = [vals[i + 1] - vals[i] for i in range(len(vals) - 1)]
    return all(2 <= d[n + 1] <= 2 * d[n] for n in range(len(d) - 1))


def _dilated_candidate(v: GrowthFunction, c: int) -> list:
    d = v.increments()
    H = v.horizon
    prev = 1
    vals = [1]
    for n in range(H):
        k = -(-n // c)
        delta = min(max(2, d[k]), 2 * prev)
        vals.append(vals[-1] + delta)
        prev = delta
    return vals


def normalize(
    v: GrowthFunction,
    dilation_max: int = 64,
    A_max: int = DEFAULT_SEARCH_CAP,
    lambda_max: Fraction = Fraction(199, 100),
) -> tuple:
    """Find w in the growth class of v with ``w(0)=1``, ``2 <= d(n+1) <= 2 d(n)``, rate < 2.

    Candidates use increments ``min(max(2, v-increment at ceil(n/c)), 2 * previous)``
    for dilation ``c = 1, 2, ...``; the first one whose exponential rate is at
    most ``lambda_max`` and that certifies against v is returned as ``(w, cert)``.
    The dilation, rate and constant are recorded in ``w.definition``.
    """
    report = check_bgd(v)
    if not report.is_bgd:
        raise NormalizationFailed(f"input is not a bgd-function (fails at index {report.failing_index})")
    lambda_max = as_fraction(lambda_max)
    for c in range(1, dilation_max + 1):
        vals = _dilated_candidate(v, c)
        alpha, lam = exponential_rate(vals)
        if lam > lambda_max:
            continue
        cert = growth_equivalent(vals, v, A_max)
        if cert.failed:
            continue
        w = GrowthFunction(
            tuple(vals),
            "table",
            {
                "kind": "table",
                "values": list(vals),
                "normalized": {"dilation": c, "lambda": str(lam), "alpha": str(alpha)},
            },
        )
        return w, cert
    raise NormalizationFailed(f"no dilation up to {dilation_max} gives a certified candidate")
