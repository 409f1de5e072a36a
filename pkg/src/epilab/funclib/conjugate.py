"""Discrete Legendre transform and the Fenchel-Young subgradient test.

The grid transform ``f*(s) ~ max_{x in grid} <s, x> - f(x)`` is a lower
bound of the true conjugate.  It is exact for max-affine and quadratic
functions whose maximizer lies inside the box.  When the maximum over the
box is only reached on the box boundary, the supremum may be escaping to
infinity; such slopes are flagged ``boundary`` and reported as ``+inf``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .nodes import ConvexSpec, Quadratic, as_point

INF = math.inf

#: per-axis grid sizes by dimension (4001 in 1-D, 201 in 2-D, ...)
DEFAULT_RESOLUTION = {1: 4001, 2: 201, 3: 41, 4: 21}
DEFAULT_HALF_WIDTH = 10.0


@dataclass(frozen=True)
class ConjugateGrid:
    """Result of :func:`conjugate_grid_detail`.

    Attributes
    ----------
    values : ndarray
        Conjugate estimates; ``inf`` where ``boundary`` is set.
    raw : ndarray
        Grid maxima before the boundary rule.
    boundary : ndarray of bool
        Slopes whose maximum is attained only on the box boundary.
    maximizers : ndarray
        Grid maximizer for each slope.
    """

    values: np.ndarray
    raw: np.ndarray
    boundary: np.ndarray
    maximizers: np.ndarray


def _grid(dim: int, half_width: float, resolution: int | None):
    k = resolution or DEFAULT_RESOLUTION.get(dim, 11)
    axis = np.linspace(-half_width, half_width, k)
    mesh = np.meshgrid(*([axis] * dim), indexing="ij")
    X = np.stack([m.ravel() for m in mesh], axis=1)
    on_boundary = np.any(np.abs(X) >= half_width, axis=1)
    return X, on_boundary


def conjugate_grid_detail(spec: ConvexSpec, slope_grid, half_width: float = DEFAULT_HALF_WIDTH,
                          resolution: int | None = None) -> ConjugateGrid:
    """Discrete conjugate on the box ``[-half_width, half_width]^d``."""
    S = np.atleast_2d(np.asarray(slope_grid, dtype=float))
    if S.size == 0:
        raise ValueError("empty slope grid")
    if spec.dim == 1 and S.shape[0] == 1 and S.shape[1] != 1:
        S = S.T
    if S.shape[1] != spec.dim:
        raise ValueError(f"slopes must have dimension {spec.dim}")
    X, on_b = _grid(spec.dim, half_width, resolution)
    fx = spec.values(X)
    fin = np.isfinite(fx)
    if not np.any(fin):
        raise ValueError("no grid point lies in the domain; enlarge the box")
    X, fx, on_b = X[fin], fx[fin], on_b[fin]
    scale = max(1.0, float(np.abs(fx).max()))
    vals = np.empty(S.shape[0])
    raw = np.empty(S.shape[0])
    flag = np.zeros(S.shape[0], dtype=bool)
    arg = np.empty_like(S)
    for i, s in enumerate(S):
        obj = X @ s - fx
        j = int(np.argmax(obj))
        raw[i] = obj[j]
        arg[i] = X[j]
        inner = obj[~on_b]
        best_inner = inner.max() if inner.size else -INF
        flag[i] = bool(on_b[j]) and obj[j] > best_inner + 1e-12 * (scale + half_width * np.abs(s).sum())
        vals[i] = INF if flag[i] else obj[j]
    return ConjugateGrid(vals, raw, flag, arg)


def conjugate_grid(spec: ConvexSpec, slope_grid, half_width: float = DEFAULT_HALF_WIDTH,
                   resolution: int | None = None) -> list[float]:
    """Grid estimates of ``f*(s)`` for every slope ``s`` of ``slope_grid``.

    Examples
    --------
    >>> from epilab.funclib import Quadratic
    >>> conjugate_grid(Quadratic([[1.0]]), [[1.0]])
    [0.5]
    """
    return [float(v) for v in conjugate_grid_detail(spec, slope_grid, half_width, resolution).values]


def conjugate_value(spec: ConvexSpec, xstar) -> float:
    """Conjugate at one slope: exact in 1-D and for invertible quadratics, grid otherwise."""
    s = as_point(xstar, spec.dim)
    if spec.dim == 1:
        from ..oracle1d import q
        g = spec.to_pwq1d().exact_conjugate()
        return float(g.value_exact(q(float(s[0])))) if g.in_domain(float(s[0])) else INF
    if isinstance(spec, Quadratic) and np.linalg.matrix_rank(spec.Q) == spec.dim:
        r = s - spec.b
        return float(0.5 * r @ np.linalg.solve(spec.Q, r) - spec.c)
    return float(conjugate_grid_detail(spec, s[None, :]).values[0])


def fenchel_subgradient_check(spec: ConvexSpec, x, xstar, tol: float = 1e-8) -> bool:
    """Whether ``f(x) + f*(x*) = <x*, x>`` holds within ``tol``.

    Raises
    ------
    ValueError
        If ``x`` is outside the domain of ``f``.
    """
    x = as_point(x, spec.dim)
    s = as_point(xstar, spec.dim)
    fx = spec(x)
    if not math.isfinite(fx):
        raise ValueError("x is not in the domain of f")
    fs = conjugate_value(spec, s)
    if not math.isfinite(fs):
        return False
    return abs(fx + fs - float(s @ x)) <= tol
