"""Exact infimum and a minimizer for the classes where one is computable.

* ``d == 1``: the exact 1-D calculus.
* Quadratics, and quadratics plus one box when the quadratic is diagonal:
  closed form (coordinatewise for the box case).
* Polyhedral trees (max-affine pieces, boxes, linear tilts, constants, under
  sums, positive scalings and translations): a linear program in epigraph
  form solved with ``scipy.optimize.linprog``.
* Tilted norms, balls and boxes: closed forms.

Anything else raises ``NotImplementedError``; unbounded problems raise
:class:`~epilab.oracle1d.UnboundedBelowError`.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np
from scipy.optimize import linprog

from ..oracle1d import UnboundedBelowError
from .nodes import (Constant, ConvexSpec, IndicatorBall, IndicatorBox, MaxAffine, NonnegScale,
                    Quadratic, ScaledNorm, Sum, Tilt, Translate)

INF = math.inf


class SpecInf(NamedTuple):
    value: float
    point: np.ndarray | None  # a minimizer, None when the infimum is not attained
    attained: bool


def _quadratic_min(Q, b, c, lo=None, hi=None):
    d = b.size
    if lo is not None:
        # diagonal Q over a box, coordinate by coordinate
        q = np.diag(Q)
        x = np.empty(d)
        for i in range(d):
            if q[i] > 0:
                x[i] = min(max(-b[i] / q[i], lo[i]), hi[i])
            elif b[i] > 0:
                x[i] = lo[i]
            elif b[i] < 0:
                x[i] = hi[i]
            else:
                x[i] = min(max(0.0, lo[i]), hi[i])
            if not math.isfinite(x[i]):
                raise UnboundedBelowError("linear term decreases without bound on the box")
        return x
    x, *_ = np.linalg.lstsq(Q, -b, rcond=None)
    if np.linalg.norm(Q @ x + b) > 1e-9 * max(1.0, np.linalg.norm(b)):
        raise UnboundedBelowError("linear term not in the range of Q")
    return x


class _Poly:
    """Epigraph data of a polyhedral tree: sum_j max_i(G_j x + beta_j) + <c, x> + k on a box."""

    def __init__(self, d):
        self.blocks: list[tuple[np.ndarray, np.ndarray]] = []
        self.c = np.zeros(d)
        self.k = 0.0
        self.lo = np.full(d, -INF)
        self.hi = np.full(d, INF)


def _poly(spec: ConvexSpec) -> _Poly | None:
    d = spec.dim
    P = _Poly(d)
    if isinstance(spec, MaxAffine):
        P.blocks.append((spec.G.copy(), spec.beta.copy()))
    elif isinstance(spec, ScaledNorm) and d == 1:
        P.blocks.append((np.array([[spec.alpha], [-spec.alpha]]), np.zeros(2)))
    elif isinstance(spec, IndicatorBox):
        P.lo, P.hi = spec.lo.copy(), spec.hi.copy()
    elif isinstance(spec, Constant):
        P.k = spec.c
    elif isinstance(spec, Quadratic) and not np.any(spec.Q):
        P.c, P.k = spec.b.copy(), spec.c
    elif isinstance(spec, Tilt):
        P = _poly(spec.inner)
        if P is None:
            return None
        P.c = P.c + spec.v
    elif isinstance(spec, NonnegScale):
        P = _poly(spec.inner)
        if P is None:
            return None
        a = spec.alpha
        P.blocks = [(a * G, a * beta) for G, beta in P.blocks]
        P.c, P.k = a * P.c, a * P.k
    elif isinstance(spec, Translate):
        P = _poly(spec.inner)
        if P is None:
            return None
        z = spec.z
        P.blocks = [(G, beta - G @ z) for G, beta in P.blocks]
        P.k -= float(P.c @ z)
        P.lo, P.hi = P.lo + z, P.hi + z
    elif isinstance(spec, Sum):
        for t in spec.terms:
            Pt = _poly(t)
            if Pt is None:
                return None
            P.blocks += Pt.blocks
            P.c, P.k = P.c + Pt.c, P.k + Pt.k
            P.lo, P.hi = np.maximum(P.lo, Pt.lo), np.minimum(P.hi, Pt.hi)
    else:
        return None
    return P


def _lp_min(P: _Poly) -> np.ndarray:
    d, m = P.c.size, len(P.blocks)
    cost = np.concatenate([P.c, np.ones(m)])
    rows, rhs = [], []
    for j, (G, beta) in enumerate(P.blocks):
        for g, b in zip(G, beta):
            row = np.zeros(d + m)
            row[:d], row[d + j] = g, -1.0
            rows.append(row)
            rhs.append(-b)
    bounds = [(None if not math.isfinite(a) else a, None if not math.isfinite(b) else b)
              for a, b in zip(P.lo, P.hi)] + [(None, None)] * m
    res = linprog(cost, A_ub=np.array(rows) if rows else None, b_ub=np.array(rhs) if rhs else None,
                  bounds=bounds, method="highs")
    if res.status == 3:
        raise UnboundedBelowError("polyhedral function is unbounded below")
    if res.status != 0:  # pragma: no cover
        raise ArithmeticError(f"linear program failed: {res.message}")
    return res.x[:d]


def _closed_form(spec: ConvexSpec) -> np.ndarray | None:
    inner, v = (spec.inner, spec.v) if isinstance(spec, Tilt) else (spec, np.zeros(spec.dim))
    if isinstance(inner, ScaledNorm):
        if np.linalg.norm(v) > inner.alpha * (1 + 1e-15):
            raise UnboundedBelowError("tilt exceeds the norm weight")
        return np.zeros(spec.dim)
    if isinstance(inner, IndicatorBall):
        n = np.linalg.norm(v)
        return inner.center.copy() if n == 0 else inner.center - inner.radius * v / n
    return None


def _tilted_box(spec: ConvexSpec):
    """``(lo, hi, v)`` when ``spec`` is a box indicator plus a linear term."""
    if isinstance(spec, IndicatorBox):
        return spec.lo, spec.hi, np.zeros(spec.dim)
    if isinstance(spec, Tilt):
        r = _tilted_box(spec.inner)
        return None if r is None else (r[0], r[1], r[2] + spec.v)
    if isinstance(spec, Translate):
        r = _tilted_box(spec.inner)
        return None if r is None else (r[0] + spec.z, r[1] + spec.z, r[2])
    return None


def spec_inf(spec: ConvexSpec) -> SpecInf:
    """Exact ``inf f`` and a minimizer.

    Examples
    --------
    >>> from epilab.funclib import Quadratic
    >>> spec_inf(Quadratic([[2.0]], [-2.0], 1.0)).value
    0.0
    """
    if spec.dim == 1:
        r = spec.to_pwq1d().exact_inf()
        if not r.attained:
            return SpecInf(float(r.value), None, False)
        lo, hi = r.argmin
        pt = lo if math.isfinite(lo) else (hi if math.isfinite(hi) else 0)
        if math.isfinite(lo) and math.isfinite(hi):
            pt = (lo + hi) / 2 if lo != hi else lo
        x = np.array([float(pt)])
        return SpecInf(float(r.value), x, True)
    if isinstance(spec, Translate):
        r = spec_inf(spec.inner)
        return SpecInf(r.value, None if r.point is None else r.point + spec.z, r.attained)
    if isinstance(spec, NonnegScale):
        r = spec_inf(spec.inner)
        return SpecInf(spec.alpha * r.value, r.point, r.attained)
    x = _closed_form(spec)
    if x is None and isinstance(spec, Quadratic):
        x = _quadratic_min(spec.Q, spec.b, spec.c)
    if x is None and isinstance(spec, Sum):
        quad, rest = spec._split()
        box = _tilted_box(rest[0]) if len(rest) == 1 else None
        if quad is not None and np.any(quad.Q) and box is not None \
                and np.allclose(quad.Q, np.diag(np.diag(quad.Q)), rtol=0, atol=1e-15):
            lo, hi, v = box
            x = _quadratic_min(quad.Q, quad.b + v, quad.c, lo, hi)
    if x is None:
        P = _poly(spec)
        if P is None:
            raise NotImplementedError(f"no exact infimum for this {spec.kind} tree")
        x = _lp_min(P)
        # LP vertices can sit a hair outside a box; snap back
        x = np.clip(x, P.lo, P.hi)
    return SpecInf(float(spec(x)), x, True)
