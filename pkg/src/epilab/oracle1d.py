"""Exact calculus for convex piecewise affine-quadratic functions of one variable.

A :class:`PWQuad1D` is a proper convex lsc function on a closed interval
``[lo, hi]`` (either end possibly infinite) given by pieces
``f(x) = a x**2 + b x + c`` with ``a >= 0``.  All arithmetic is carried out
with :class:`fractions.Fraction`; floats are converted exactly, so the
subdifferential, proximal point, conjugate and infimum are computed without
any rounding.  Results are handed back as floats.

This module is the reference against which every numeric path of the
package is tested, so it depends on nothing else in the package.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Sequence, Union

INF = math.inf

Number = Union[Fraction, float]

CONTINUITY_TOL = 1e-12


class OracleError(ValueError):
    """Invalid construction of a :class:`PWQuad1D`."""


class UnboundedBelowError(OracleError):
    """The function has infimum ``-inf``."""


class Interval(NamedTuple):
    lo: float
    hi: float

    def contains(self, v: float, tol: float = 0.0) -> bool:
        return self.lo - tol <= v <= self.hi + tol

    def dist(self, v: float) -> float:
        if v < self.lo:
            return self.lo - v
        if v > self.hi:
            return v - self.hi
        return 0.0


class InfResult(NamedTuple):
    value: float
    argmin: Interval | None
    attained: bool


def q(x) -> Number:
    """Exact conversion: finite values become Fractions, infinities stay floats."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        s = x.strip().lower()
        if s in ("inf", "+inf", "infinity"):
            return INF
        if s in ("-inf", "-infinity"):
            return -INF
        return Fraction(s)
    if isinstance(x, float) and math.isinf(x):
        return x
    if isinstance(x, float) and math.isnan(x):
        raise OracleError("NaN in piecewise data")
    return Fraction(x)


def _fl(x: Number) -> float:
    return float(x)


Piece = tuple  # (a, b, c) as Fractions


def _pval(p: Piece, x: Fraction) -> Fraction:
    a, b, c = p
    return (a * x + b) * x + c


def _pder(p: Piece, x: Number) -> Number:
    a, b, _ = p
    if isinstance(x, float):  # infinite argument
        if a == 0:
            return b
        return x
    return 2 * a * x + b


@dataclass(frozen=True)
class PWQuad1D:
    """Convex piecewise quadratic function on ``[lo, hi]``.

    Use :meth:`build` (or the named constructors) rather than the raw
    constructor; ``build`` validates convexity and continuity and brings
    the data to canonical form (adjacent identical pieces merged), so two
    representations of the same function compare equal.
    """

    lo: Number
    hi: Number
    breakpoints: tuple
    pieces: tuple

    # ------------------------------------------------------------------
    # construction
    @classmethod
    def build(cls, lo, hi, breakpoints: Sequence = (), pieces: Sequence = ((0, 0, 0),),
              allow_unbounded_below: bool = False) -> "PWQuad1D":
        lo, hi = q(lo), q(hi)
        if lo == INF or hi == -INF or lo > hi:
            raise OracleError(f"empty domain [{lo}, {hi}]")
        bps = [q(t) for t in breakpoints]
        pcs = [tuple(q(v) for v in p) for p in pieces]
        if len(pcs) != len(bps) + 1:
            raise OracleError("need exactly one more piece than breakpoints")
        if any(isinstance(t, float) for t in bps):
            raise OracleError("breakpoints must be finite")
        if any(not (lo < t < hi) for t in bps) or any(t1 >= t2 for t1, t2 in zip(bps, bps[1:])):
            raise OracleError("breakpoints must be strictly increasing inside (lo, hi)")
        for p in pcs:
            if len(p) != 3 or any(isinstance(v, float) for v in p):
                raise OracleError("pieces are finite triples (a, b, c)")
            if p[0] < 0:
                raise OracleError("quadratic coefficient must be nonnegative")
        for t, left, right in zip(bps, pcs, pcs[1:]):
            vl, vr = _pval(left, t), _pval(right, t)
            if vl != vr and abs(vl - vr) > CONTINUITY_TOL * (1 + abs(vl)):
                raise OracleError(f"discontinuous at breakpoint {t}")
            if _pder(left, t) > _pder(right, t) + CONTINUITY_TOL:
                raise OracleError(f"not convex at breakpoint {t}")
        if lo == hi:
            bps, pcs = [], [(Fraction(0), Fraction(0), _pval(pcs[0], lo))]
        # merge identical neighbours
        mb, mp = [], [pcs[0]]
        for t, p in zip(bps, pcs[1:]):
            if p == mp[-1]:
                continue
            mb.append(t)
            mp.append(p)
        g = cls(lo, hi, tuple(mb), tuple(mp))
        if not allow_unbounded_below and not g.bounded_below():
            raise UnboundedBelowError("function is unbounded below; pass allow_unbounded_below=True to opt in")
        return g

    @classmethod
    def constant(cls, c, lo=-INF, hi=INF) -> "PWQuad1D":
        return cls.build(lo, hi, (), ((0, 0, c),))

    @classmethod
    def indicator(cls, lo, hi) -> "PWQuad1D":
        return cls.build(lo, hi, (), ((0, 0, 0),))

    @classmethod
    def quadratic(cls, a, b=0, c=0, lo=-INF, hi=INF, allow_unbounded_below=False) -> "PWQuad1D":
        """``a x**2 + b x + c`` restricted to ``[lo, hi]``."""
        return cls.build(lo, hi, (), ((a, b, c),), allow_unbounded_below=allow_unbounded_below)

    @classmethod
    def max_affine(cls, lines: Sequence, allow_unbounded_below=False) -> "PWQuad1D":
        """Upper envelope of ``slope * x + intercept`` over the real line."""
        if not lines:
            raise OracleError("max of an empty family")
        best: dict = {}
        for g, beta in lines:
            g, beta = q(g), q(beta)
            if g not in best or beta > best[g]:
                best[g] = beta
        ls = sorted(best.items())
        hull: list = []  # lines in increasing slope; each with its entry point
        for g, beta in ls:
            while hull:
                g0, b0, x0 = hull[-1]
                x = (b0 - beta) / (g - g0)  # where the new line overtakes
                if x <= x0:
                    hull.pop()
                    continue
                hull.append((g, beta, x))
                break
            else:
                hull.append((g, beta, -INF))
        bps = [x for _, _, x in hull[1:]]
        pcs = [(Fraction(0), g, beta) for g, beta, _ in hull]
        return cls.build(-INF, INF, bps, pcs, allow_unbounded_below=allow_unbounded_below)

    # ------------------------------------------------------------------
    # structure
    def knots(self) -> list:
        return [self.lo, *self.breakpoints, self.hi]

    def piece_bounds(self, i: int) -> tuple:
        k = self.knots()
        return k[i], k[i + 1]

    def _index(self, x: Fraction) -> int:
        """Piece containing ``x`` (left piece at a breakpoint)."""
        return bisect.bisect_left(self.breakpoints, x)

    def in_domain(self, x) -> bool:
        x = q(x)
        return self.lo <= x <= self.hi

    def domain(self) -> Interval:
        return Interval(_fl(self.lo), _fl(self.hi))

    def bounded_below(self) -> bool:
        first, last = self.pieces[0], self.pieces[-1]
        if self.lo == -INF and first[0] == 0 and first[1] > 0:
            return False
        if self.hi == INF and last[0] == 0 and last[1] < 0:
            return False
        return True

    # ------------------------------------------------------------------
    # evaluation
    def value_exact(self, x) -> Number:
        x = q(x)
        if isinstance(x, float) or not (self.lo <= x <= self.hi):
            return INF
        return _pval(self.pieces[self._index(x)], x)

    def __call__(self, x) -> float:
        return _fl(self.value_exact(x))

    def derivatives_exact(self, x) -> tuple | None:
        """One-sided derivatives ``(f'_-(x), f'_+(x))``; ``None`` off the domain.

        At a finite domain end the outward derivative is infinite, which is
        how the normal cone of the domain enters the subdifferential.
        """
        x = q(x)
        if isinstance(x, float) or not (self.lo <= x <= self.hi):
            return None
        if self.lo == self.hi:
            return -INF, INF
        i = self._index(x)
        left = -INF if x == self.lo else _pder(self.pieces[i], x)
        if x == self.hi:
            right = INF
        elif i < len(self.breakpoints) and x == self.breakpoints[i]:
            right = _pder(self.pieces[i + 1], x)
        else:
            right = _pder(self.pieces[i], x)
        if x == self.lo:
            right = _pder(self.pieces[0], x)
        return left, right

    def exact_subdiff(self, x) -> Interval | None:
        d = self.derivatives_exact(x)
        if d is None:
            return None
        return Interval(_fl(d[0]), _fl(d[1]))

    def exact_slope(self, x) -> float:
        d = self.derivatives_exact(x)
        if d is None:
            return INF
        lo, hi = d
        if lo <= 0 <= hi:
            return 0.0
        return _fl(lo if lo > 0 else -hi)

    def exact_min_norm_subgradient(self, x) -> float | None:
        d = self.derivatives_exact(x)
        if d is None:
            return None
        lo, hi = d
        return _fl(min(max(Fraction(0), lo), hi)) if not (lo <= 0 <= hi) else 0.0

    def exact_prox(self, lam, x) -> float:
        return _fl(self.prox_exact(lam, x))

    def prox_exact(self, lam, x) -> Fraction:
        """Unique root of ``x - p ∈ lam * ∂f(p)``, found piece by piece."""
        lam, x = q(lam), q(x)
        if isinstance(lam, float) or lam <= 0:
            raise OracleError("prox parameter must be positive and finite")
        if self.lo == self.hi:
            return self.lo
        for i, (a, b, _) in enumerate(self.pieces):
            l, r = self.piece_bounds(i)
            p = (x - lam * b) / (1 + 2 * a * lam)
            if l <= p <= r:
                return p
        for t in self.knots():
            if isinstance(t, float):
                continue
            lo_d, hi_d = self.derivatives_exact(t)
            g = (x - t) / lam
            if lo_d <= g <= hi_d:
                return t
        raise AssertionError("prox inclusion has no root; data are not convex")  # pragma: no cover

    # ------------------------------------------------------------------
    # infimum
    def exact_inf(self) -> InfResult:
        if not self.bounded_below():
            raise UnboundedBelowError("infimum is -inf")
        pts: list = []
        for i, (a, b, _) in enumerate(self.pieces):
            l, r = self.piece_bounds(i)
            if a > 0:
                p = -b / (2 * a)
                if l <= p <= r:
                    pts.append(p)
            elif b == 0:
                pts.extend([l, r])
        for t in self.knots():
            if isinstance(t, float):
                continue
            lo_d, hi_d = self.derivatives_exact(t)
            if lo_d <= 0 <= hi_d:
                pts.append(t)
        if not pts:  # pragma: no cover - every bounded member of the class attains its infimum
            return InfResult(INF, None, False)
        lo, hi = min(pts), max(pts)
        anchor = lo if not isinstance(lo, float) else (hi if not isinstance(hi, float) else Fraction(0))
        return InfResult(_fl(self.value_exact(anchor)), Interval(_fl(lo), _fl(hi)), True)

    # ------------------------------------------------------------------
    # calculus
    def _rep(self, l, r) -> Fraction:
        if isinstance(l, float) and isinstance(r, float):
            return Fraction(0)
        if isinstance(l, float):
            return r - 1
        if isinstance(r, float):
            return l + 1
        return (l + r) / 2

    def add(self, other: "PWQuad1D") -> "PWQuad1D":
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        if lo > hi:
            raise OracleError("sum has empty domain")
        bps = sorted({t for t in (*self.breakpoints, *other.breakpoints) if lo < t < hi})
        knots = [lo, *bps, hi]
        pcs = []
        for l, r in zip(knots, knots[1:]):
            m = self._rep(l, r) if l != r else l
            p1 = self.pieces[self._index(m)]
            p2 = other.pieces[other._index(m)]
            pcs.append(tuple(u + v for u, v in zip(p1, p2)))
        if lo == hi:
            pcs = [(Fraction(0), Fraction(0), self.value_exact(lo) + other.value_exact(lo))]
        return PWQuad1D.build(lo, hi, bps, pcs, allow_unbounded_below=True)

    def scale(self, alpha) -> "PWQuad1D":
        alpha = q(alpha)
        if isinstance(alpha, float) or alpha <= 0:
            raise OracleError("scale must be positive and finite")
        return PWQuad1D.build(self.lo, self.hi, self.breakpoints,
                              [tuple(alpha * v for v in p) for p in self.pieces],
                              allow_unbounded_below=True)

    def tilt(self, v) -> "PWQuad1D":
        v = q(v)
        return PWQuad1D.build(self.lo, self.hi, self.breakpoints,
                              [(a, b + v, c) for a, b, c in self.pieces],
                              allow_unbounded_below=True)

    def shift_value(self, c0) -> "PWQuad1D":
        c0 = q(c0)
        return PWQuad1D.build(self.lo, self.hi, self.breakpoints,
                              [(a, b, c + c0) for a, b, c in self.pieces],
                              allow_unbounded_below=True)

    def translate(self, z) -> "PWQuad1D":
        """``x -> f(x - z)``."""
        z = q(z)
        pcs = [(a, b - 2 * a * z, a * z * z - b * z + c) for a, b, c in self.pieces]
        return PWQuad1D.build(self.lo + z, self.hi + z, [t + z for t in self.breakpoints], pcs,
                              allow_unbounded_below=True)

    def restrict(self, lo, hi) -> "PWQuad1D":
        """Add the indicator of ``[lo, hi]``."""
        return self.add(PWQuad1D.indicator(lo, hi))

    def exact_conjugate(self) -> "PWQuad1D":
        """Fenchel conjugate, as another :class:`PWQuad1D`.

        The graph of the subdifferential is walked from left to right; every
        kink ``t`` with ``f'_-(t) < f'_+(t)`` becomes an affine piece
        ``s*t - f(t)`` of the conjugate, every strictly convex piece becomes
        the quadratic ``(s - b)**2 / (4a) - c``, and affine pieces of ``f``
        become kinks of the conjugate.
        """
        segs: list = []  # (s_start, s_end, piece)
        knots = self.knots() if self.lo < self.hi else [self.lo]
        for k, t in enumerate(knots):
            if not isinstance(t, float):
                lo_d, hi_d = self.derivatives_exact(t)
                if lo_d < hi_d:
                    segs.append((lo_d, hi_d, (Fraction(0), t, -self.value_exact(t))))
            if k < len(self.pieces):
                a, b, c = self.pieces[k]
                if a > 0:
                    l, r = knots[k], knots[k + 1]
                    segs.append((_pder(self.pieces[k], l), _pder(self.pieces[k], r),
                                 (1 / (4 * a), -b / (2 * a), b * b / (4 * a) - c)))
        if not segs:
            # affine on the whole line: the conjugate lives at a single slope
            _, b, c = self.pieces[0]
            return PWQuad1D.build(b, b, (), ((0, 0, -c),), allow_unbounded_below=True)
        lo, hi = segs[0][0], segs[-1][1]
        bps = [s[1] for s in segs[:-1]]
        return PWQuad1D.build(lo, hi, bps, [s[2] for s in segs], allow_unbounded_below=True)

    # ------------------------------------------------------------------
    # serialization
    def to_json(self) -> dict:
        def enc(v):
            if isinstance(v, float):
                return "inf" if v > 0 else "-inf"
            return int(v) if v.denominator == 1 else str(v)

        return {
            "kind": "pwq1d",
            "lo": enc(self.lo),
            "hi": enc(self.hi),
            "breakpoints": [enc(t) for t in self.breakpoints],
            "pieces": [[enc(v) for v in p] for p in self.pieces],
        }

    @classmethod
    def from_json(cls, doc: dict, allow_unbounded_below: bool = True) -> "PWQuad1D":
        return cls.build(doc.get("lo", "-inf"), doc.get("hi", "inf"), doc.get("breakpoints", []),
                         doc["pieces"], allow_unbounded_below=allow_unbounded_below)

    def __repr__(self) -> str:
        return (f"PWQuad1D(lo={self.lo}, hi={self.hi}, breakpoints={[str(t) for t in self.breakpoints]}, "
                f"pieces={[tuple(str(v) for v in p) for p in self.pieces]})")


def huber(mu) -> PWQuad1D:
    """Huber function with parameter ``mu``: ``y**2/(2 mu)`` near 0, ``|y| - mu/2`` outside."""
    mu = q(mu)
    if mu <= 0:
        raise OracleError("huber parameter must be positive")
    return PWQuad1D.build(-INF, INF, (-mu, mu),
                          ((0, -1, -mu / 2), (1 / (2 * mu), 0, 0), (0, 1, -mu / 2)))


def exact_subdiff(g: PWQuad1D, x) -> Interval | None:
    return g.exact_subdiff(x)


def exact_slope(g: PWQuad1D, x) -> float:
    return g.exact_slope(x)


def exact_prox(g: PWQuad1D, lam, x) -> float:
    return g.exact_prox(lam, x)


def exact_conjugate(g: PWQuad1D) -> PWQuad1D:
    return g.exact_conjugate()


def exact_inf(g: PWQuad1D) -> InfResult:
    return g.exact_inf()
