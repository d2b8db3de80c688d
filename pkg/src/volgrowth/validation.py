"""Input validation helpers shared by the estimator and the functional API."""
from __future__ import annotations

import numbers
from fractions import Fraction
from typing import Any, Iterable, Sequence


def as_fraction(x: Any) -> Fraction:
    """Coerce ints, Fractions, decimal strings and ``"p/q"`` strings to Fraction.

    Floats are accepted only when they are integral; anything else would
    silently round a value that is supposed to be exact.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(x, numbers.Integral):
        return Fraction(int(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, numbers.Rational):
        return Fraction(x.numerator, x.denominator)
    if isinstance(x, float) and x.is_integer():
        return Fraction(int(x))
    raise TypeError(f"cannot use {x!r} as an exact rational")


def as_number(x: Any):
    """Like :func:`as_fraction` but hands back a plain int when possible."""
    q = as_fraction(x)
    return q.numerator if q.denominator == 1 else q


def check_positive_int(value: Any, name: str, minimum: int = 1) -> int:
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise TypeError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return value


def check_int_sequence(values: Iterable[Any], name: str = "values") -> tuple[int, ...]:
    out = []
    for i, x in enumerate(values):
        if hasattr(x, "item") and not isinstance(x, (int, Fraction)):
            x = x.item()  # numpy scalars
        if isinstance(x, bool):
            raise TypeError(f"{name}[{i}] is a boolean")
        if isinstance(x, numbers.Integral):
            out.append(int(x))
        elif isinstance(x, float) and x.is_integer():
            out.append(int(x))
        elif isinstance(x, Fraction) and x.denominator == 1:
            out.append(x.numerator)
        else:
            raise TypeError(f"{name}[{i}] = {x!r} is not an integer")
    return tuple(out)


def check_non_decreasing(values: Sequence[Any], name: str = "values") -> None:
    for i in range(1, len(values)):
        if values[i] < values[i - 1]:
            raise ValueError(f"{name} decreases at index {i}: {values[i - 1]} -> {values[i]}")


def sequence_values(x: Any) -> tuple:
    """Return the raw value tuple of a growth-like object or plain sequence."""
    if hasattr(x, "values") and not isinstance(x, dict):
        vals = x.values
        return tuple(vals() if callable(vals) else vals)
    if isinstance(x, dict):
        raise TypeError("pass a GrowthFunction, DiscreteGrowth or a sequence, not a dict")
    return tuple(x)


def check_growth_function(x: Any, horizon: int | None = None):
    """Turn a table, a JSON-style dict or a GrowthFunction into a GrowthFunction."""
    from .growth import GrowthFunction

    if isinstance(x, GrowthFunction):
        gf = x
    elif isinstance(x, dict):
        gf = GrowthFunction.from_dict(x if horizon is None else {**x, "horizon": horizon})
    else:
        gf = GrowthFunction.from_table(list(x))
    if horizon is not None and gf.horizon != horizon:
        if gf.horizon < horizon:
            raise ValueError(f"growth function horizon {gf.horizon} < requested {horizon}")
        gf = gf.truncate(horizon)
    return gf
