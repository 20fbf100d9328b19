"""Nonnegative exact rationals extended with +infinity.

Exponents are stored as :class:`fractions.Fraction` values, with
``math.inf`` used purely as a marker for the point at infinity.  No
arithmetic is ever performed on the marker itself; :func:`recip` maps it to
``Fraction(0)`` and back, so every sum of reciprocals stays exact.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Union

Ext = Union[Fraction, float]

INF: float = math.inf

_INF_WORDS = {"inf", "+inf", "infinity", "+infinity", "oo", "∞"}


def is_inf(x: Ext) -> bool:
    return isinstance(x, float) and x == INF


def ext(x) -> Ext:
    """Coerce ``x`` to an extended scalar.

    Accepts ints, Fractions, strings such as ``"10"``, ``"4/3"``, ``"0.1"``
    or ``"inf"``, and floats.  Finite floats are converted through their
    shortest decimal repr, so ``0.1`` becomes ``1/10`` rather than the
    binary approximation.
    """
    if isinstance(x, bool):
        raise TypeError("booleans are not exponents")
    if isinstance(x, Fraction):
        value = x
    elif isinstance(x, int):
        value = Fraction(x)
    elif isinstance(x, float):
        if math.isnan(x):
            raise ValueError("NaN is not an extended scalar")
        if x == INF:
            return INF
        if math.isinf(x):
            raise ValueError("negative infinity is not an extended scalar")
        value = Fraction(repr(x))
    elif isinstance(x, str):
        s = x.strip()
        if s.lower() in _INF_WORDS:
            return INF
        try:
            value = Fraction(s)
        except ValueError:
            raise ValueError(f"cannot parse {x!r} as an exact rational") from None
    else:
        raise TypeError(f"unsupported scalar type {type(x).__name__}")
    if value < 0:
        raise ValueError(f"extended scalars are nonnegative, got {value}")
    return value


def recip(x: Ext) -> Ext:
    """Exact reciprocal with 1/inf = 0 and 1/0 = inf."""
    if is_inf(x):
        return Fraction(0)
    if x == 0:
        return INF
    return 1 / Fraction(x)


def recip_sum(values) -> Fraction:
    """Exact sum of reciprocals; ``inf`` entries contribute zero."""
    total = Fraction(0)
    for v in values:
        r = recip(v)
        if is_inf(r):
            raise ZeroDivisionError("reciprocal of 0 is infinite; sum undefined")
        total += r
    return total


def fmt(x: Ext) -> str:
    if is_inf(x):
        return "inf"
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def to_json(x: Ext):
    if is_inf(x):
        return "inf"
    x = Fraction(x)
    return {"num": x.numerator, "den": x.denominator}


def from_json(obj) -> Ext:
    if obj == "inf":
        return INF
    if isinstance(obj, dict) and set(obj) == {"num", "den"}:
        return Fraction(int(obj["num"]), int(obj["den"]))
    raise ValueError(f"not a serialized extended scalar: {obj!r}")


def truncate(x: Ext, places: int = 2) -> Ext:
    """Truncate toward zero to ``places`` decimals, exactly."""
    if is_inf(x):
        return INF
    scale = 10**places
    return Fraction(math.floor(Fraction(x) * scale), scale)
