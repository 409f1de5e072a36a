"""Extended reals ``R ∪ {+inf}``.

Values are plain Python floats with ``math.inf`` standing for ``+inf``.
The helpers here are the only sanctioned way to combine values that may be
infinite: ``-inf`` and NaN are never legal, and ``inf - inf`` is an error.
"""

from __future__ import annotations

import math

INF = math.inf

ExtReal = float


class ExtRealError(ArithmeticError):
    """Raised when an operation would leave ``R ∪ {+inf}``."""


def check(value: float) -> float:
    """Return ``value`` as a float, rejecting NaN and ``-inf``."""
    v = float(value)
    if math.isnan(v):
        raise ExtRealError("NaN is not an extended real")
    if v == -math.inf:
        raise ExtRealError("-inf is excluded; the function is not proper or not bounded below")
    return v


def is_finite(value: float) -> bool:
    return math.isfinite(value)


def add(a: float, b: float) -> float:
    return check(check(a) + check(b))


def sub(a: float, b: float) -> float:
    """``a - b``; ``b`` must be finite unless ``a`` is finite too (then error)."""
    a, b = check(a), check(b)
    if math.isinf(b):
        raise ExtRealError("subtracting +inf is undefined in R ∪ {+inf}")
    return a - b


def scale(alpha: float, a: float) -> float:
    if alpha < 0:
        raise ExtRealError("only nonnegative scaling keeps values in R ∪ {+inf}")
    a = check(a)
    if alpha == 0:
        if math.isinf(a):
            raise ExtRealError("0 * inf is undefined")
        return 0.0
    return alpha * a


def le(a: float, b: float, tol: float = 0.0) -> bool:
    """``a <= b + tol`` with ``inf <= inf`` true."""
    a, b = check(a), check(b)
    if math.isinf(b):
        return True
    if math.isinf(a):
        return False
    return a <= b + tol


def close(a: float, b: float, tol: float) -> bool:
    """Both infinite, or both finite and within ``tol``."""
    a, b = check(a), check(b)
    if math.isinf(a) or math.isinf(b):
        return math.isinf(a) and math.isinf(b)
    return abs(a - b) <= tol
