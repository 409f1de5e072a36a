"""Metric slope ``s_f(x) = dist(0, ∂f(x))`` of convex functions.

Two independent routes are provided:

* :func:`slope_exact` builds ``∂f(x)`` as an explicit convex set by the
  subdifferential calculus of the builder tree (sum rule, chain rule for
  translations, scalings and tilts) and measures its distance to the origin.
  Polytopes are handled with Wolfe's minimum-norm-point algorithm.
* :func:`slope_prox_estimate` uses only the prox: the quantity
  ``||x - prox_{lam f}(x)|| / lam`` is the gradient norm of the Moreau
  envelope and increases to ``s_f(x)`` as ``lam`` decreases.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .funclib.nodes import (Constant, ConvexSpec, IndicatorBall, IndicatorBox, MaxAffine, NonnegScale,
                            NoProxPath, PWQ1D, Quadratic, RestrictSegment, ScaledNorm, Sum, Tilt, Translate,
                            as_point)
from .sets import (BallSet, BoxCone, ConvexSet, EmptySet, Interval1D, PointSet, Polytope, RayCone,
                   minkowski_sum)

INF = math.inf

#: infinite-slope verdict of the ladder: last estimate above this ...
BLOWUP = 1e6
#: ... and the last three estimates growing by at least this factor each
BLOWUP_GROWTH = 1.1


def default_ladder(kmax: int = 30) -> tuple[float, ...]:
    """``lam_k = 2**-k`` for ``k = 0..kmax``."""
    return tuple(2.0 ** -k for k in range(kmax + 1))


class NotExactClass(NotImplementedError):
    """The builder tree is outside the classes with an exact subdifferential."""


class NonMonotoneTrace(ArithmeticError):
    """Ladder estimates decreased; the prox implementation is inconsistent."""


@dataclass(frozen=True)
class SlopeValue:
    """Slope of ``f`` at a point.

    Attributes
    ----------
    value : float
        ``s_f(x)`` in ``[0, inf]``.
    method : str
        One of ``'exact-polyhedral'``, ``'exact-quadratic'``, ``'oracle1d'``
        and ``'prox-ladder'``.
    trace : tuple of (float, float)
        ``(lam, estimate)`` pairs in ladder order (prox-ladder only).
    """

    value: float
    method: str
    trace: tuple = field(default=())

    def __float__(self) -> float:
        return self.value


@dataclass(frozen=True)
class MinNormSubgradient:
    vector: np.ndarray
    norm: float


# ----------------------------------------------------------------------
# exact subdifferentials


def _box_cone(x, lo, hi) -> ConvexSet:
    if np.any(x < lo) or np.any(x > hi):
        return EmptySet(x.size)
    kinds = []
    for xi, a, b in zip(x, lo, hi):
        if a == b:
            kinds.append("free")
        elif xi >= b:
            kinds.append("nonneg")
        elif xi <= a:
            kinds.append("nonpos")
        else:
            kinds.append("zero")
    return BoxCone(kinds)


def subdifferential(spec: ConvexSpec, x: np.ndarray) -> ConvexSet:
    """``∂f(x)`` as a :class:`~epilab.sets.ConvexSet`.

    Raises
    ------
    NotExactClass
        When the tree has no exact representation of its subdifferential.
    """
    d = spec.dim
    if isinstance(spec, Quadratic):
        return PointSet(spec.gradient(x))
    if isinstance(spec, Constant):
        return PointSet(np.zeros(d))
    if isinstance(spec, ScaledNorm):
        n = float(np.linalg.norm(x))
        return BallSet(np.zeros(d), spec.alpha) if n == 0 else PointSet(spec.alpha * x / n)
    if isinstance(spec, MaxAffine):
        act = spec.active(x)
        return PointSet(spec.G[act[0]]) if act.size == 1 else Polytope(spec.G[act])
    if isinstance(spec, IndicatorBox):
        return _box_cone(x, spec.lo, spec.hi)
    if isinstance(spec, IndicatorBall):
        r = x - spec.center
        n = float(np.linalg.norm(r))
        if spec.radius == 0:
            return BoxCone(["free"] * d) if n == 0 else EmptySet(d)
        if n > spec.radius * (1 + 1e-12):
            return EmptySet(d)
        if n >= spec.radius * (1 - 1e-12):
            return RayCone(r)
        return PointSet(np.zeros(d))
    if isinstance(spec, PWQ1D):
        sub = spec.g.exact_subdiff(float(x[0]))
        return EmptySet(1) if sub is None else Interval1D(*sub)
    if isinstance(spec, NonnegScale):
        return subdifferential(spec.inner, x).scaled(spec.alpha)
    if isinstance(spec, Tilt):
        return subdifferential(spec.inner, x).shifted(spec.v)
    if isinstance(spec, Translate):
        return subdifferential(spec.inner, x - spec.z)
    if isinstance(spec, RestrictSegment) and d == 1:
        lo, hi = sorted((float(spec.a[0]), float(spec.b[0])))
        cone = _box_cone(x, np.array([lo]), np.array([hi]))
        return _sum([subdifferential(spec.inner, x), cone])
    if isinstance(spec, Sum):
        return _sum([subdifferential(t, x) for t in spec.terms])
    raise NotExactClass(f"no exact subdifferential for {spec.kind}")


def _sum(sets):
    try:
        return minkowski_sum(sets)
    except NotImplementedError as exc:
        raise NotExactClass(str(exc)) from exc


def _method(S: ConvexSet) -> str:
    return "exact-polyhedral" if S.shape == "polyhedral" else "exact-quadratic"


def slope_exact(spec: ConvexSpec, x) -> SlopeValue:
    """Exact ``dist(0, ∂f(x))``; ``inf`` when the subdifferential is empty.

    Examples
    --------
    >>> import numpy as np
    >>> from epilab.funclib import Quadratic
    >>> slope_exact(Quadratic(np.eye(2)), [3.0, 4.0]).value
    5.0
    """
    x = as_point(x, spec.dim)
    if isinstance(spec, PWQ1D):
        return SlopeValue(float(spec.g.exact_slope(float(x[0]))), "oracle1d")
    S = subdifferential(spec, x)
    if S.empty:
        return SlopeValue(INF, _method(S))
    return SlopeValue(S.dist(np.zeros(spec.dim)), _method(S))


def min_norm_subgradient(spec: ConvexSpec, x) -> MinNormSubgradient:
    """Projection of the origin onto ``∂f(x)``.

    Raises
    ------
    ValueError
        If ``∂f(x)`` is empty.
    """
    x = as_point(x, spec.dim)
    S = subdifferential(spec, x)
    if S.empty:
        raise ValueError("empty subdifferential")
    v = S.project(np.zeros(spec.dim))
    return MinNormSubgradient(v, float(np.linalg.norm(v)))


# ----------------------------------------------------------------------
# prox route


def slope_prox_estimate(spec: ConvexSpec, x, ladder=None, tol: float = 1e-9,
                        blowup: float = BLOWUP) -> SlopeValue:
    """Slope from the resolvent ladder ``||x - prox_{lam f}(x)|| / lam``.

    Parameters
    ----------
    ladder : sequence of float, optional
        Strictly decreasing positive ``lam`` values; defaults to
        ``2**-k``, ``k = 0..30``.
    tol : float
        Relative slack of the monotonicity test, on top of the rounding
        floor ``8 eps (1 + ||x||) / lam``.
    blowup : float
        Infinite-slope threshold at the smallest ``lam``.

    Raises
    ------
    NonMonotoneTrace
        If an estimate drops by more than ``tol`` (relative) when ``lam``
        decreases.
    """
    x = as_point(x, spec.dim)
    lams = tuple(float(v) for v in (ladder if ladder is not None else default_ladder()))
    if not lams or any(v <= 0 for v in lams) or any(a <= b for a, b in zip(lams, lams[1:])):
        raise ValueError("ladder must be strictly decreasing positive values")
    if not spec.has_prox:
        raise NoProxPath(f"{spec.kind} has no prox path")
    est = []
    for lam in lams:
        p = spec.prox(lam, x)
        est.append(float(np.linalg.norm(x - p)) / lam)
    # rounding in ||x - p|| is amplified by 1/lam on small rungs
    noise = 8 * np.finfo(float).eps * (1.0 + float(np.linalg.norm(x)))
    for (a, b), lam in zip(zip(est, est[1:]), lams[1:]):
        if b < a - tol * max(1.0, a) - noise / lam:
            raise NonMonotoneTrace(f"ladder estimate fell from {a} to {b}")
    trace = tuple(zip(lams, est))
    value = est[-1]
    if value > blowup and len(est) >= 3 and est[-2] >= BLOWUP_GROWTH * est[-3] \
            and est[-1] >= BLOWUP_GROWTH * est[-2]:
        value = INF
    return SlopeValue(value, "prox-ladder", trace)


def moreau_envelope(spec: ConvexSpec, lam: float, x) -> float:
    """``e_lam f(x) = f(p) + ||x - p||**2 / (2 lam)`` with ``p = prox_{lam f}(x)``."""
    x = as_point(x, spec.dim)
    p = spec.prox(lam, x)
    return float(spec(p) + np.sum((x - p) ** 2) / (2 * lam))


def slope(spec: ConvexSpec, x) -> SlopeValue:
    """Exact slope when the tree allows it, otherwise the prox ladder."""
    try:
        return slope_exact(spec, x)
    except NotExactClass:
        return slope_prox_estimate(spec, x)


class SlopeFunction:
    """``x -> s_f(x)`` as a plain function oracle (generally nonconvex).

    Exposes ``dim``, ``values`` and ``__call__`` like a builder node so that
    slope families can be fed to the epi-limit estimators.
    """

    kind = "slope"

    def __init__(self, spec: ConvexSpec):
        self.spec = spec
        self.dim = spec.dim
        self._pwq = None
        if isinstance(spec, PWQ1D):
            self._pwq = spec.g

    def __call__(self, x) -> float:
        return slope(self.spec, x).value

    def values(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if isinstance(self.spec, Quadratic):
            return np.linalg.norm(X @ self.spec.Q + self.spec.b, axis=1)
        if isinstance(self.spec, Constant):
            return np.zeros(X.shape[0])
        return np.array([slope(self.spec, x).value for x in X])


def trace_csv(sv: SlopeValue) -> str:
    """Ladder trace as CSV with header ``lambda,estimate``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["lambda", "estimate"])
    for lam, e in sv.trace:
        w.writerow([f"{lam:.12g}", f"{e:.12g}"])
    return buf.getvalue()
