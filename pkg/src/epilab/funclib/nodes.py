"""Builder tree for proper convex lsc functions on R^d.

Every node is immutable after construction and offers

* ``f(x)`` / ``values(X)`` -- evaluation into ``R ∪ {+inf}``;
* ``prox(lam, x)`` -- the Moreau resolvent, where a closed form exists;
* ``dirderiv(x, d)`` -- the one-sided directional derivative ``f'(x; d)``
  at a point of the domain, exactly;
* ``to_pwq1d()`` -- exact conversion to :class:`~epilab.oracle1d.PWQuad1D`
  when ``dim == 1``;
* domain information (bounding interval in 1-D, exact projections where the
  domain is a box, ball or segment).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..oracle1d import PWQuad1D

INF = math.inf

#: relative tolerance deciding which affine pieces are active at a point
ACTIVE_TOL = 1e-9


class SpecError(ValueError):
    """Malformed builder tree."""


class DimensionError(SpecError):
    pass


class NoProxPath(NotImplementedError):
    """The node has no closed-form or 1-D proximal path."""


def as_point(x, dim: int) -> np.ndarray:
    p = np.asarray(x, dtype=float).reshape(-1)
    if p.size != dim:
        raise DimensionError(f"point of dimension {p.size} given to a function on R^{dim}")
    return p


def _vec(v, dim: int | None = None) -> np.ndarray:
    a = np.asarray(v, dtype=float).reshape(-1)
    if dim is not None and a.size == 1 and dim > 1:
        a = np.full(dim, float(a[0]))
    if dim is not None and a.size != dim:
        raise DimensionError(f"expected a vector of length {dim}, got {a.size}")
    return a


@dataclass(frozen=True, eq=False)
class DomainInfo:
    """Affine hull ``point + span(basis)`` and a relative-interior sampler."""

    point: np.ndarray
    basis: np.ndarray  # (d, k), orthonormal columns
    sampler: object = field(repr=False)  # callable(rng, k) -> (k, d) points of ri(dom)

    @property
    def ri_dim(self) -> int:
        return self.basis.shape[1]

    def ri_samples(self, rng: np.random.Generator, k: int) -> np.ndarray:
        return self.sampler(rng, k)


class ConvexSpec:
    """Base class of all nodes."""

    dim: int
    kind: str = ""

    # -- evaluation ----------------------------------------------------
    def __call__(self, x) -> float:
        return float(self.values(as_point(x, self.dim)[None, :])[0])

    def values(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    # -- first-order information --------------------------------------
    def dirderiv(self, x: np.ndarray, d: np.ndarray) -> float:
        raise NotImplementedError

    # -- prox ------------------------------------------------------------
    @property
    def has_prox(self) -> bool:
        return True

    def prox(self, lam: float, x) -> np.ndarray:
        if not lam > 0:
            raise ValueError("prox parameter must be positive")
        return self._prox(float(lam), as_point(x, self.dim))

    def _prox(self, lam: float, x: np.ndarray) -> np.ndarray:
        raise NoProxPath(f"{self.kind} has no prox path")

    # -- domain ----------------------------------------------------------
    def interval_1d(self) -> tuple[float, float]:
        """Domain of a 1-D function as ``(lo, hi)``."""
        return -INF, INF

    def project_domain(self, x: np.ndarray) -> np.ndarray | None:
        """Exact projection onto the closed domain, or ``None`` if unknown."""
        return x.copy()

    def domain_info(self) -> DomainInfo | None:
        return _full_domain(self.dim)

    @property
    def constrained(self) -> bool:
        return False

    # -- exact 1-D form --------------------------------------------------
    def to_pwq1d(self) -> PWQuad1D:
        if self.dim != 1:
            raise DimensionError("exact 1-D form exists only in dimension 1")
        return self._pwq()

    def _pwq(self) -> PWQuad1D:
        raise NotImplementedError

    def children(self) -> tuple["ConvexSpec", ...]:
        return ()


def _full_domain(d: int) -> DomainInfo:
    def sampler(rng, k):
        return rng.uniform(-2.0, 2.0, size=(k, d))

    return DomainInfo(np.zeros(d), np.eye(d), sampler)


# ----------------------------------------------------------------------
# primitives


class Quadratic(ConvexSpec):
    """``0.5 <x, Q x> + <b, x> + c`` with ``Q`` symmetric positive semidefinite."""

    kind = "quadratic"

    def __init__(self, Q, b=None, c: float = 0.0):
        Q = np.atleast_2d(np.asarray(Q, dtype=float))
        if Q.shape[0] != Q.shape[1]:
            raise SpecError("Q must be square")
        if not np.allclose(Q, Q.T, atol=1e-12):
            raise SpecError("Q must be symmetric")
        if np.linalg.eigvalsh(Q).min() < -1e-12 * max(1.0, np.abs(Q).max()):
            raise SpecError("Q must be positive semidefinite")
        self.dim = Q.shape[0]
        self.Q = Q
        self.b = np.zeros(self.dim) if b is None else _vec(b, self.dim)
        self.c = float(c)

    def gradient(self, x):
        return self.Q @ x + self.b

    def values(self, X):
        return 0.5 * np.einsum("ij,jk,ik->i", X, self.Q, X) + X @ self.b + self.c

    def dirderiv(self, x, d):
        return float(self.gradient(x) @ d)

    def _prox(self, lam, x):
        return np.linalg.solve(np.eye(self.dim) + lam * self.Q, x - lam * self.b)

    def _pwq(self):
        return PWQuad1D.quadratic(self.Q[0, 0] / 2, self.b[0], self.c, allow_unbounded_below=True)


class ScaledNorm(ConvexSpec):
    """``alpha * ||x||`` (Euclidean)."""

    kind = "scaled_norm"

    def __init__(self, alpha: float, dim: int = 1):
        if alpha < 0:
            raise SpecError("alpha must be nonnegative")
        self.alpha, self.dim = float(alpha), int(dim)

    def values(self, X):
        return self.alpha * np.linalg.norm(X, axis=1)

    def dirderiv(self, x, d):
        n = np.linalg.norm(x)
        if n == 0:
            return self.alpha * float(np.linalg.norm(d))
        return self.alpha * float(x @ d) / n

    def _prox(self, lam, x):
        n = np.linalg.norm(x)
        t = lam * self.alpha
        if n <= t:
            return np.zeros_like(x)
        return x * (1.0 - t / n)

    def _pwq(self):
        return PWQuad1D.max_affine([(self.alpha, 0), (-self.alpha, 0)])


class MaxAffine(ConvexSpec):
    """``max_i <g_i, x> + beta_i``."""

    kind = "max_affine"

    def __init__(self, G, beta):
        G = np.asarray(G, dtype=float)
        beta = np.asarray(beta, dtype=float).reshape(-1)
        G = G.reshape(-1, 1) if G.ndim == 1 and G.size == beta.size else np.atleast_2d(G)
        if G.shape[0] != beta.size or G.shape[0] == 0:
            raise SpecError("one intercept per affine piece, at least one piece")
        self.G, self.beta = G, beta
        self.dim = G.shape[1]

    def values(self, X):
        return np.max(X @ self.G.T + self.beta, axis=1)

    def active(self, x, tol: float = ACTIVE_TOL) -> np.ndarray:
        v = self.G @ x + self.beta
        m = v.max()
        return np.flatnonzero(v >= m - tol * max(1.0, abs(m)))

    def dirderiv(self, x, d):
        # only ties up to rounding count here, so bisection sees the true kink
        scale = float(np.max(np.abs(self.G) @ np.abs(x) + np.abs(self.beta)))
        v = self.G @ x + self.beta
        act = v >= v.max() - 8 * np.finfo(float).eps * max(1.0, scale)
        return float(np.max(self.G[act] @ d))

    def _prox(self, lam, x):
        return max_affine_prox(self.G, self.beta, lam, x)

    def _pwq(self):
        return PWQuad1D.max_affine(list(zip(self.G[:, 0], self.beta)), allow_unbounded_below=True)


def max_affine_prox(G: np.ndarray, beta: np.ndarray, lam: float, x: np.ndarray) -> np.ndarray:
    """Prox of a max of affine functions by active-set enumeration.

    The minimizer is ``u = x - lam * G_S^T mu`` where ``mu`` lies in the
    simplex over a support ``S`` of affinely independent gradients, all
    pieces in ``S`` tie at ``u`` and none exceeds them.  Supports are tried
    by increasing size (at most ``d + 1`` by Caratheodory); the first one
    satisfying these optimality conditions is the answer.
    """
    m, d = G.shape
    vals = G @ x + beta
    order = np.argsort(-vals, kind="stable")
    scale = max(1.0, float(np.abs(vals).max()), lam * float(np.sum(G * G, axis=1).max()))
    # a correct support satisfies the conditions up to rounding; looser
    # acceptance picks wrong supports when the answer is within ~tol of a kink
    strict = 64 * np.finfo(float).eps * scale
    best = (1e-10 * scale, None)
    for size in range(1, min(m, d + 1) + 1):
        for S in itertools.combinations(order, size):
            S = list(S)
            GS = G[S]
            M = np.zeros((size + 1, size + 1))
            M[:size, :size] = lam * (GS @ GS.T)
            M[:size, size] = 1.0
            M[size, :size] = 1.0
            rhs = np.append(GS @ x + beta[S], 1.0)
            try:
                sol = np.linalg.solve(M, rhs)
            except np.linalg.LinAlgError:
                continue
            if not np.all(np.isfinite(sol)) or np.linalg.cond(M) > 1e12:
                continue
            mu, t = sol[:size], sol[size]
            if np.any(mu < -1e-12):
                continue
            u = x - lam * (mu @ GS)
            viol = float(np.max(G @ u + beta) - t)
            if viol <= strict:
                return u
            if viol <= best[0]:
                best = (viol, u)
    if best[1] is not None:
        return best[1]
    raise ArithmeticError("max-affine prox enumeration found no optimal support")  # pragma: no cover


class IndicatorBox(ConvexSpec):
    """Indicator of ``{lo <= x <= hi}``; infinite or equal bounds are allowed."""

    kind = "indicator_box"

    def __init__(self, lo, hi):
        lo, hi = _vec(lo), _vec(hi)
        if lo.size != hi.size:
            raise SpecError("lo and hi must have the same length")
        if np.any(lo > hi) or np.any(lo == INF) or np.any(hi == -INF):
            raise SpecError("empty box")
        self.lo, self.hi = lo, hi
        self.dim = lo.size

    def values(self, X):
        inside = np.all((X >= self.lo) & (X <= self.hi), axis=1)
        return np.where(inside, 0.0, INF)

    def dirderiv(self, x, d):
        for i in range(self.dim):
            if (x[i] >= self.hi[i] and d[i] > 0) or (x[i] <= self.lo[i] and d[i] < 0):
                return INF
        return 0.0

    def _prox(self, lam, x):
        return np.clip(x, self.lo, self.hi)

    def interval_1d(self):
        return float(self.lo[0]), float(self.hi[0])

    def project_domain(self, x):
        return np.clip(x, self.lo, self.hi)

    @property
    def constrained(self):
        return True

    def domain_info(self):
        free = np.flatnonzero(self.lo < self.hi)
        basis = np.eye(self.dim)[:, free]
        point = np.where(np.isfinite(self.lo), self.lo, np.where(np.isfinite(self.hi), self.hi, 0.0))
        lo, hi = self.lo.copy(), self.hi.copy()

        def sampler(rng, k):
            a = np.where(np.isfinite(lo), lo, np.where(np.isfinite(hi), hi - 4.0, -2.0))
            b = np.where(np.isfinite(hi), hi, a + 4.0)
            u = rng.uniform(0.02, 0.98, size=(k, lo.size))
            return a + u * (b - a)

        return DomainInfo(point, basis, sampler)

    def _pwq(self):
        return PWQuad1D.indicator(self.lo[0], self.hi[0])


class IndicatorBall(ConvexSpec):
    kind = "indicator_ball"

    def __init__(self, center, radius: float):
        self.center = _vec(center)
        if radius < 0:
            raise SpecError("radius must be nonnegative")
        self.radius = float(radius)
        self.dim = self.center.size

    def values(self, X):
        inside = np.linalg.norm(X - self.center, axis=1) <= self.radius
        return np.where(inside, 0.0, INF)

    def dirderiv(self, x, d):
        r = x - self.center
        n = np.linalg.norm(r)
        if self.radius == 0:
            return 0.0 if not np.any(d) else INF
        if n >= self.radius and r @ d > 0:
            return INF
        return 0.0

    def _prox(self, lam, x):
        return self.project_domain(x)

    def interval_1d(self):
        c = float(self.center[0])
        return c - self.radius, c + self.radius

    def project_domain(self, x):
        r = x - self.center
        n = np.linalg.norm(r)
        if n <= self.radius:
            return x.copy()
        return self.center + r * (self.radius / n)

    @property
    def constrained(self):
        return True

    def domain_info(self):
        c, rad, d = self.center.copy(), self.radius, self.dim
        if rad == 0:
            return DomainInfo(c, np.zeros((d, 0)), lambda rng, k: np.tile(c, (k, 1)))

        def sampler(rng, k):
            v = rng.normal(size=(k, d))
            v /= np.linalg.norm(v, axis=1, keepdims=True)
            return c + v * (rad * rng.uniform(0.0, 0.95, size=(k, 1)))

        return DomainInfo(c, np.eye(d), sampler)

    def _pwq(self):
        lo, hi = self.interval_1d()
        return PWQuad1D.indicator(lo, hi)


class Constant(ConvexSpec):
    kind = "constant"

    def __init__(self, c: float, dim: int = 1):
        self.c, self.dim = float(c), int(dim)

    def values(self, X):
        return np.full(X.shape[0], self.c)

    def dirderiv(self, x, d):
        return 0.0

    def _prox(self, lam, x):
        return x.copy()

    def _pwq(self):
        return PWQuad1D.constant(self.c)


class PWQ1D(ConvexSpec):
    """A :class:`~epilab.oracle1d.PWQuad1D` used as a node (``dim == 1``)."""

    kind = "pwq1d"
    dim = 1

    def __init__(self, g: PWQuad1D):
        self.g = g
        self._bps = np.array([float(t) for t in g.breakpoints])
        self._pcs = np.array([[float(v) for v in p] for p in g.pieces])
        self._lo, self._hi = float(g.lo), float(g.hi)

    def values(self, X):
        x = X[:, 0]
        idx = np.searchsorted(self._bps, x, side="left")
        a, b, c = self._pcs[idx].T
        out = (a * x + b) * x + c
        return np.where((x >= self._lo) & (x <= self._hi), out, INF)

    def dirderiv(self, x, d):
        sub = self.g.exact_subdiff(float(x[0]))
        if sub is None:
            return INF
        lo_d, hi_d = sub
        s = float(d[0])
        return s * hi_d if s > 0 else (s * lo_d if s < 0 else 0.0)

    def _prox(self, lam, x):
        return np.array([self.g.exact_prox(lam, float(x[0]))])

    def interval_1d(self):
        return self._lo, self._hi

    def project_domain(self, x):
        return np.clip(x, self._lo, self._hi)

    @property
    def constrained(self):
        return math.isfinite(self._lo) or math.isfinite(self._hi)

    def domain_info(self):
        return IndicatorBox([self._lo], [self._hi]).domain_info()

    def _pwq(self):
        return self.g


# ----------------------------------------------------------------------
# combinators


class NonnegScale(ConvexSpec):
    """``alpha * inner`` with ``alpha > 0``."""

    kind = "scale"

    def __init__(self, alpha: float, inner: ConvexSpec):
        if not alpha > 0:
            raise SpecError("scale factor must be positive")
        self.alpha, self.inner = float(alpha), inner
        self.dim = inner.dim

    def values(self, X):
        return self.alpha * self.inner.values(X)

    def dirderiv(self, x, d):
        return self.alpha * self.inner.dirderiv(x, d)

    @property
    def has_prox(self):
        return self.inner.has_prox

    def _prox(self, lam, x):
        return self.inner._prox(lam * self.alpha, x)

    def interval_1d(self):
        return self.inner.interval_1d()

    def project_domain(self, x):
        return self.inner.project_domain(x)

    @property
    def constrained(self):
        return self.inner.constrained

    def domain_info(self):
        return self.inner.domain_info()

    def _pwq(self):
        return self.inner._pwq().scale(self.alpha)

    def children(self):
        return (self.inner,)


class Tilt(ConvexSpec):
    """``inner(x) + <v, x>``."""

    kind = "tilt"

    def __init__(self, v, inner: ConvexSpec):
        self.inner = inner
        self.dim = inner.dim
        self.v = _vec(v, self.dim)

    def values(self, X):
        return self.inner.values(X) + X @ self.v

    def dirderiv(self, x, d):
        return self.inner.dirderiv(x, d) + float(self.v @ d)

    @property
    def has_prox(self):
        return self.inner.has_prox

    def _prox(self, lam, x):
        return self.inner._prox(lam, x - lam * self.v)

    def interval_1d(self):
        return self.inner.interval_1d()

    def project_domain(self, x):
        return self.inner.project_domain(x)

    @property
    def constrained(self):
        return self.inner.constrained

    def domain_info(self):
        return self.inner.domain_info()

    def _pwq(self):
        return self.inner._pwq().tilt(self.v[0])

    def children(self):
        return (self.inner,)


class Translate(ConvexSpec):
    """``inner(x - z)``."""

    kind = "translate"

    def __init__(self, z, inner: ConvexSpec):
        self.inner = inner
        self.dim = inner.dim
        self.z = _vec(z, self.dim)

    def values(self, X):
        return self.inner.values(X - self.z)

    def dirderiv(self, x, d):
        return self.inner.dirderiv(x - self.z, d)

    @property
    def has_prox(self):
        return self.inner.has_prox

    def _prox(self, lam, x):
        return self.z + self.inner._prox(lam, x - self.z)

    def interval_1d(self):
        lo, hi = self.inner.interval_1d()
        return lo + float(self.z[0]), hi + float(self.z[0])

    def project_domain(self, x):
        p = self.inner.project_domain(x - self.z)
        return None if p is None else p + self.z

    @property
    def constrained(self):
        return self.inner.constrained

    def domain_info(self):
        info = self.inner.domain_info()
        if info is None:
            return None
        z, s = self.z.copy(), info.sampler
        return DomainInfo(info.point + z, info.basis, lambda rng, k: s(rng, k) + z)

    def _pwq(self):
        return self.inner._pwq().translate(self.z[0])

    def children(self):
        return (self.inner,)


class RestrictSegment(ConvexSpec):
    """``inner + indicator([a, b])`` for the segment between points ``a`` and ``b``."""

    kind = "restrict_segment"

    def __init__(self, a, b, inner: ConvexSpec):
        self.inner = inner
        self.dim = inner.dim
        self.a, self.b = _vec(a, self.dim), _vec(b, self.dim)
        self.e = self.b - self.a
        ts = np.linspace(0.0, 1.0, 1025)
        if not np.any(np.isfinite(inner.values(self.a + ts[:, None] * self.e))):
            raise SpecError("segment misses the domain of the restricted function")

    def _t(self, X):
        ee = float(self.e @ self.e)
        if ee == 0:
            return np.zeros(X.shape[0]), np.linalg.norm(X - self.a, axis=1)
        t = (X - self.a) @ self.e / ee
        off = np.linalg.norm(X - (self.a + np.clip(t, 0, 1)[:, None] * self.e), axis=1)
        return t, off

    def values(self, X):
        if self.dim == 1:
            lo, hi = sorted((float(self.a[0]), float(self.b[0])))
            on = (X[:, 0] >= lo) & (X[:, 0] <= hi)
            return np.where(on, self.inner.values(X), INF)
        t, off = self._t(X)
        on = (off <= 1e-12 * (1 + np.linalg.norm(X, axis=1))) & (t >= -1e-15) & (t <= 1 + 1e-15)
        v = self.inner.values(X)
        return np.where(on, v, INF)

    def dirderiv(self, x, d):
        ee = float(self.e @ self.e)
        if ee == 0:
            return 0.0 if not np.any(d) else INF
        t = float((x - self.a) @ self.e / ee)
        dt = float(d @ self.e / ee)
        if np.linalg.norm(d - dt * self.e) > 1e-12 * (1 + np.linalg.norm(d)):
            return INF
        if (t >= 1 and dt > 0) or (t <= 0 and dt < 0):
            return INF
        return self.inner.dirderiv(x, d)

    @property
    def has_prox(self):
        return self.dim == 1 or not self.inner.constrained

    def _prox(self, lam, x):
        if self.dim == 1:
            lo, hi = self.interval_1d()
            p = bisect_prox_1d(lambda p: self.dirderiv(np.array([p]), np.array([1.0])), lo, hi, lam, float(x[0]))
            return np.array([p])
        if self.inner.constrained:
            raise NoProxPath("segment restriction of a constrained function in dimension > 1")
        ee = float(self.e @ self.e)
        if ee == 0:
            return self.a.copy()
        tx = float((x - self.a) @ self.e / ee)
        inner, a, e = self.inner, self.a, self.e
        t = bisect_prox_1d(lambda t: inner.dirderiv(a + t * e, e), 0.0, 1.0, lam / ee, tx)
        return a + t * e

    def interval_1d(self):
        lo, hi = self.inner.interval_1d()
        a, b = sorted((float(self.a[0]), float(self.b[0])))
        return max(lo, a), min(hi, b)

    def project_domain(self, x):
        if self.inner.constrained:
            if self.dim == 1:
                return np.clip(x, *self.interval_1d())
            return None
        ee = float(self.e @ self.e)
        if ee == 0:
            return self.a.copy()
        t = float(np.clip((x - self.a) @ self.e / ee, 0.0, 1.0))
        return self.a + t * self.e

    @property
    def constrained(self):
        return True

    def domain_info(self):
        if self.inner.constrained:
            if self.dim == 1:
                lo, hi = self.interval_1d()
                return IndicatorBox([lo], [hi]).domain_info()
            return None
        a, e = self.a.copy(), self.e.copy()
        n = np.linalg.norm(e)
        basis = (e / n)[:, None] if n > 0 else np.zeros((self.dim, 0))
        return DomainInfo(a, basis, lambda rng, k: a + rng.uniform(0.02, 0.98, size=(k, 1)) * e)

    def _pwq(self):
        lo, hi = sorted((float(self.a[0]), float(self.b[0])))
        return self.inner._pwq().restrict(lo, hi)

    def children(self):
        return (self.inner,)


class Sum(ConvexSpec):
    kind = "sum"

    def __init__(self, terms: Sequence[ConvexSpec]):
        terms = list(terms)
        if not terms:
            raise SpecError("empty sum")
        dims = {t.dim for t in terms}
        if len(dims) != 1:
            raise DimensionError("all terms of a sum must share the dimension")
        self.terms = tuple(terms)
        self.dim = terms[0].dim
        self._check_domains()

    def _check_domains(self):
        cons = [t for t in self.terms if t.constrained]
        if len(cons) <= 1:
            return
        if self.dim == 1:
            lo, hi = self.interval_1d()
            if lo > hi:
                raise SpecError("sum has empty domain")
            return
        # alternating projections onto the constrained domains
        x = np.zeros(self.dim)
        projs = [t.project_domain for t in cons]
        if any(p(x) is None for p in projs):
            return
        for _ in range(2000):
            for p in projs:
                x = p(x)
        if not all(np.linalg.norm(p(x) - x) <= 1e-9 for p in projs):
            raise SpecError("sum has empty domain")

    def values(self, X):
        out = np.zeros(X.shape[0])
        for t in self.terms:
            out = out + t.values(X)
        return out

    def dirderiv(self, x, d):
        return float(sum(t.dirderiv(x, d) for t in self.terms))

    def _split(self):
        """Merge quadratic and constant terms; return (Quadratic or None, rest)."""
        Q, b, c, quad, rest = np.zeros((self.dim, self.dim)), np.zeros(self.dim), 0.0, False, []
        for t in self.terms:
            if isinstance(t, Quadratic):
                Q, b, c, quad = Q + t.Q, b + t.b, c + t.c, True
            elif isinstance(t, Constant):
                c, quad = c + t.c, True
            else:
                rest.append(t)
        return (Quadratic(Q, b, c) if quad else None), rest

    def _prox_rule(self):
        quad, rest = self._split()
        if not rest:
            return "quadratic"
        if len(rest) == 1:
            Q = quad.Q if quad is not None else np.zeros((self.dim, self.dim))
            q = Q[0, 0]
            if np.allclose(Q, q * np.eye(self.dim), rtol=0, atol=1e-15) and rest[0].has_prox:
                return "scalar-quadratic"
            if isinstance(rest[0], IndicatorBox) and np.allclose(Q, np.diag(np.diag(Q)), rtol=0, atol=1e-15):
                return "separable-box"
        if self.dim == 1:
            return "bisection"
        return None

    @property
    def has_prox(self):
        return self._prox_rule() is not None

    def _prox(self, lam, x):
        rule = self._prox_rule()
        quad, rest = self._split()
        if rule == "quadratic":
            return quad._prox(lam, x)
        if rule == "scalar-quadratic":
            q = quad.Q[0, 0] if quad is not None else 0.0
            b = quad.b if quad is not None else np.zeros(self.dim)
            return rest[0]._prox(lam / (1 + lam * q), (x - lam * b) / (1 + lam * q))
        if rule == "separable-box":
            box = rest[0]
            qd = np.diag(quad.Q)
            return np.clip((x - lam * quad.b) / (1 + lam * qd), box.lo, box.hi)
        if rule == "bisection":
            lo, hi = self.interval_1d()
            t = bisect_prox_1d(lambda p: self.dirderiv(np.array([p]), np.array([1.0])), lo, hi, lam, float(x[0]))
            return np.array([t])
        raise NoProxPath("no closed-form prox for this sum in dimension > 1")

    def interval_1d(self):
        lo, hi = -INF, INF
        for t in self.terms:
            a, b = t.interval_1d()
            lo, hi = max(lo, a), min(hi, b)
        return lo, hi

    def project_domain(self, x):
        cons = [t for t in self.terms if t.constrained]
        if not cons:
            return x.copy()
        if len(cons) == 1:
            return cons[0].project_domain(x)
        if self.dim == 1:
            return np.clip(x, *self.interval_1d())
        if all(isinstance(t, IndicatorBox) for t in cons):
            lo = np.max([t.lo for t in cons], axis=0)
            hi = np.min([t.hi for t in cons], axis=0)
            return np.clip(x, lo, hi)
        return None

    @property
    def constrained(self):
        return any(t.constrained for t in self.terms)

    def domain_info(self):
        cons = [t for t in self.terms if t.constrained]
        if not cons:
            return _full_domain(self.dim)
        if len(cons) == 1:
            return cons[0].domain_info()
        if self.dim == 1:
            lo, hi = self.interval_1d()
            return IndicatorBox([lo], [hi]).domain_info()
        if all(isinstance(t, IndicatorBox) for t in cons):
            lo = np.max([t.lo for t in cons], axis=0)
            hi = np.min([t.hi for t in cons], axis=0)
            return IndicatorBox(lo, hi).domain_info()
        return None

    def _pwq(self):
        g = self.terms[0]._pwq()
        for t in self.terms[1:]:
            g = g.add(t._pwq())
        return g

    def children(self):
        return self.terms


def bisect_prox_1d(right_deriv, lo: float, hi: float, lam: float, x: float) -> float:
    """Prox of a 1-D convex function known through its right derivative.

    The optimality map ``phi(p) = p - x + lam * f'_+(p)`` is nondecreasing and
    right-continuous, so the prox is ``min{p : phi(p) >= 0}``; it is bracketed
    by doubling and then bisected down to adjacent floats.
    """

    def ok(p):
        if p < lo:
            return False
        if p > hi:
            return True
        return p - x + lam * right_deriv(p) >= 0

    w = 1.0
    a, b = x - w, x + w
    while ok(a) and a > lo:
        w *= 2
        a = max(x - w, lo)
        if not math.isfinite(a):  # pragma: no cover
            raise ArithmeticError("prox bracket diverged")
    if ok(a):
        return a  # a == lo, the prox sits on the lower end of the domain
    while not ok(b):
        w *= 2
        b = min(x + w, hi) if b < hi else hi + 1.0
        if not math.isfinite(b):  # pragma: no cover
            raise ArithmeticError("prox bracket diverged")
    for _ in range(2000):
        m = 0.5 * (a + b)
        if m <= a or m >= b:
            break
        if ok(m):
            b = m
        else:
            a = m
    return min(b, hi)


def evaluate(spec: ConvexSpec, x) -> float:
    """``f(x)`` in ``R ∪ {+inf}``; raises :class:`DimensionError` on mismatch."""
    return spec(as_point(x, spec.dim))


def prox(spec: ConvexSpec, lam: float, x) -> np.ndarray:
    """Unique minimizer of ``u -> f(u) + ||u - x||**2 / (2 lam)``."""
    return spec.prox(lam, x)


def walk(spec: ConvexSpec):
    yield spec
    for c in spec.children():
        yield from walk(c)
