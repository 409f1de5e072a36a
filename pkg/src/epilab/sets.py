"""Closed convex sets that occur as subdifferentials of the function library.

Each set knows its Euclidean projection; distance from the origin is then
the slope and the projection of the origin is the minimal-norm subgradient.
"""

from __future__ import annotations

import math

import numpy as np

from .minnorm import project_to_hull

INF = math.inf


class ConvexSet:
    """Base class.  ``shape`` is 'point', 'polyhedral' or 'curved'."""

    dim: int
    shape = "polyhedral"
    empty = False

    def project(self, p: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def dist(self, p) -> float:
        if self.empty:
            return INF
        p = np.asarray(p, dtype=float)
        return float(np.linalg.norm(self.project(p) - p))

    def contains(self, p, tol: float = 1e-9) -> bool:
        return self.dist(p) <= tol

    def interval(self) -> tuple[float, float]:
        """Bounds of the set when ``dim == 1``."""
        raise NotImplementedError

    def shifted(self, v) -> "ConvexSet":
        return Shifted(self, np.asarray(v, dtype=float))

    def scaled(self, alpha: float) -> "ConvexSet":
        return Scaled(self, float(alpha))


class EmptySet(ConvexSet):
    empty = True
    shape = "point"

    def __init__(self, dim: int):
        self.dim = dim

    def project(self, p):
        raise ValueError("projection onto the empty set")

    def shifted(self, v):
        return self

    def scaled(self, alpha):
        return self


class PointSet(ConvexSet):
    shape = "point"

    def __init__(self, v):
        self.v = np.asarray(v, dtype=float).reshape(-1)
        self.dim = self.v.size

    def project(self, p):
        return self.v.copy()

    def interval(self):
        return float(self.v[0]), float(self.v[0])

    def shifted(self, v):
        return PointSet(self.v + v)

    def scaled(self, alpha):
        return PointSet(alpha * self.v)


class Polytope(ConvexSet):
    """Convex hull of the rows of ``V``."""

    def __init__(self, V):
        self.V = np.atleast_2d(np.asarray(V, dtype=float))
        self.dim = self.V.shape[1]

    def project(self, p):
        if self.dim == 1:  # exact, no corral arithmetic
            return np.clip(p, self.V[:, 0].min(), self.V[:, 0].max())
        return project_to_hull(p, self.V)

    def interval(self):
        return float(self.V[:, 0].min()), float(self.V[:, 0].max())

    def shifted(self, v):
        return Polytope(self.V + v)

    def scaled(self, alpha):
        return Polytope(alpha * self.V)


class BallSet(ConvexSet):
    shape = "curved"

    def __init__(self, center, radius: float):
        self.center = np.asarray(center, dtype=float).reshape(-1)
        self.radius = float(radius)
        self.dim = self.center.size

    def project(self, p):
        d = p - self.center
        n = float(np.linalg.norm(d))
        if n <= self.radius:
            return p.copy()
        return self.center + d * (self.radius / n)

    def interval(self):
        c = float(self.center[0])
        return c - self.radius, c + self.radius

    def shifted(self, v):
        return BallSet(self.center + v, self.radius)

    def scaled(self, alpha):
        return BallSet(alpha * self.center, alpha * self.radius)


class BoxCone(ConvexSet):
    """Product of per-coordinate cones: 'zero', 'nonneg', 'nonpos' or 'free'.

    This is the normal cone of a box at a point of the box.
    """

    def __init__(self, kinds):
        self.kinds = tuple(kinds)
        self.dim = len(self.kinds)

    def project(self, p):
        out = np.array(p, dtype=float)
        for i, k in enumerate(self.kinds):
            if k == "zero":
                out[i] = 0.0
            elif k == "nonneg":
                out[i] = max(out[i], 0.0)
            elif k == "nonpos":
                out[i] = min(out[i], 0.0)
        return out

    def interval(self):
        k = self.kinds[0]
        return {"zero": (0.0, 0.0), "nonneg": (0.0, INF), "nonpos": (-INF, 0.0), "free": (-INF, INF)}[k]

    def scaled(self, alpha):
        return self


class RayCone(ConvexSet):
    """``{t u : t >= 0}``."""

    shape = "curved"

    def __init__(self, u):
        u = np.asarray(u, dtype=float).reshape(-1)
        self.u = u / np.linalg.norm(u)
        self.dim = u.size

    def project(self, p):
        t = float(p @ self.u)
        return max(t, 0.0) * self.u

    def interval(self):
        return (0.0, INF) if self.u[0] > 0 else (-INF, 0.0)

    def scaled(self, alpha):
        return self


class Interval1D(ConvexSet):
    def __init__(self, lo: float, hi: float):
        self.lo, self.hi = float(lo), float(hi)
        self.dim = 1
        self.shape = "point" if self.lo == self.hi else "polyhedral"

    def project(self, p):
        return np.array([min(max(float(p[0]), self.lo), self.hi)])

    def interval(self):
        return self.lo, self.hi

    def shifted(self, v):
        v = float(np.asarray(v).reshape(-1)[0])
        return Interval1D(self.lo + v, self.hi + v)

    def scaled(self, alpha):
        return Interval1D(alpha * self.lo, alpha * self.hi)


class Shifted(ConvexSet):
    def __init__(self, base: ConvexSet, v):
        self.base, self.v = base, np.asarray(v, dtype=float).reshape(-1)
        self.dim = base.dim
        self.shape = base.shape

    def project(self, p):
        return self.v + self.base.project(p - self.v)

    def interval(self):
        lo, hi = self.base.interval()
        return lo + float(self.v[0]), hi + float(self.v[0])

    def shifted(self, v):
        return Shifted(self.base, self.v + v)


class Scaled(ConvexSet):
    def __init__(self, base: ConvexSet, alpha: float):
        self.base, self.alpha = base, alpha
        self.dim = base.dim
        self.shape = base.shape

    def project(self, p):
        return self.alpha * self.base.project(p / self.alpha)

    def interval(self):
        lo, hi = self.base.interval()
        return self.alpha * lo, self.alpha * hi


def minkowski_sum(sets: list[ConvexSet]) -> ConvexSet:
    """Sum of sets when it has a representation here, else ``NotImplementedError``."""
    dim = sets[0].dim
    if any(s.empty for s in sets):
        return EmptySet(dim)
    shift = np.zeros(dim)
    rest = []
    for s in sets:
        if isinstance(s, PointSet):
            shift = shift + s.v
        else:
            rest.append(s)
    if not rest:
        return PointSet(shift)
    if len(rest) == 1:
        return rest[0].shifted(shift)
    if dim == 1:
        lo = sum(s.interval()[0] for s in rest)
        hi = sum(s.interval()[1] for s in rest)
        return Interval1D(lo, hi).shifted(shift)
    if all(isinstance(s, Polytope) for s in rest):
        V = rest[0].V
        for s in rest[1:]:
            V = (V[:, None, :] + s.V[None, :, :]).reshape(-1, dim)
        return Polytope(V).shifted(shift)
    raise NotImplementedError("Minkowski sum of these subdifferential pieces has no exact form")
