"""Minimum-norm point of a polytope given by its vertices.

Implements Wolfe's algorithm: alternate a major cycle, which adds the
vertex most violating the optimality condition ``<x, p> >= <x, x>``, with
minor cycles, which move to the minimum-norm point of the affine hull of
the current corral and drop vertices whose weights leave the simplex.  The
procedure terminates after finitely many corrals on vertex sets of the size
used here (at most a few dozen points).
"""

from __future__ import annotations

import numpy as np

__all__ = ["min_norm_point", "project_to_hull"]


def _affine_min(P: np.ndarray) -> np.ndarray:
    """Barycentric weights of the min-norm point of the affine hull of rows of ``P``."""
    k = P.shape[0]
    G = P @ P.T
    M = np.zeros((k + 1, k + 1))
    M[:k, :k] = G
    M[:k, k] = 1.0
    M[k, :k] = 1.0
    rhs = np.zeros(k + 1)
    rhs[k] = 1.0
    sol = np.linalg.lstsq(M, rhs, rcond=None)[0]
    return sol[:k]


def min_norm_point(V, tol: float = 1e-12, max_iter: int = 1000) -> tuple[np.ndarray, np.ndarray]:
    """Point of minimum Euclidean norm in ``conv(V)``.

    Parameters
    ----------
    V : array_like, shape (m, d)
        Vertices (duplicates and interior points are allowed).
    tol : float
        Relative tolerance of the optimality test.

    Returns
    -------
    x : ndarray, shape (d,)
        The minimum-norm point.
    weights : ndarray, shape (m,)
        Convex weights with ``weights @ V == x``.
    """
    V = np.atleast_2d(np.asarray(V, dtype=float))
    m = V.shape[0]
    scale = max(1.0, float(np.max(np.sum(V * V, axis=1))))
    j0 = int(np.argmin(np.sum(V * V, axis=1)))
    S = [j0]
    w = np.array([1.0])
    x = V[j0].copy()
    for _ in range(max_iter):
        # major cycle
        dots = V @ x
        j = int(np.argmin(dots))
        if x @ x - dots[j] <= tol * scale or j in S:
            break
        S.append(j)
        w = np.append(w, 0.0)
        # minor cycles
        while True:
            v = _affine_min(V[S])
            if np.all(v > tol):
                w = v
                break
            neg = v <= tol
            denom = w[neg] - v[neg]
            with np.errstate(divide="ignore", invalid="ignore"):
                ratios = np.where(denom > 0, w[neg] / denom, np.inf)
            theta = float(min(1.0, np.min(ratios)))
            w = theta * v + (1.0 - theta) * w
            keep = w > tol
            if not np.any(keep):  # pragma: no cover - numerically degenerate corral
                keep[np.argmax(w)] = True
            S = [s for s, k in zip(S, keep) if k]
            w = w[keep]
            w = w / w.sum()
        x = w @ V[S]
    weights = np.zeros(m)
    for s, ws in zip(S, w):
        weights[s] += ws
    return x, weights


def project_to_hull(p, V) -> np.ndarray:
    """Euclidean projection of ``p`` onto ``conv(V)``."""
    p = np.asarray(p, dtype=float)
    V = np.atleast_2d(np.asarray(V, dtype=float))
    x, _ = min_norm_point(V - p)
    return x + p
