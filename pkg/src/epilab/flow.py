"""Steepest-descent curves by minimizing movements.

The implicit Euler scheme ``x_{k+1} = prox_{h f}(x_k)`` is used throughout:
it is unconditionally stable, decreases ``f`` at every step and handles kinks
without event detection.  Each step satisfies the discrete energy inequality
``f(x_k) - f(x_{k+1}) >= ||x_{k+1} - x_k||**2 / h``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .funclib.infimum import spec_inf
from .funclib.nodes import ConvexSpec, NoProxPath, as_point
from .slope import NotExactClass, slope
from .verdict import Status, Verdict

INF = math.inf

#: displacement below which the curve is declared stationary
ARRIVAL_TOL = 1e-12


@dataclass
class DescentTrajectory:
    """Discrete steepest-descent curve.

    Attributes
    ----------
    times : ndarray, shape (K + 1,)
    points : ndarray, shape (K + 1, d)
    values : ndarray
        ``f`` along the curve.
    slopes : ndarray
        ``s_f`` along the curve (``nan`` where not computed).
    h : float
    arrival : int or None
        First index after which the curve does not move.
    spec : ConvexSpec
    """

    times: np.ndarray
    points: np.ndarray
    values: np.ndarray
    slopes: np.ndarray
    h: float
    arrival: int | None = None
    spec: ConvexSpec | None = field(default=None, repr=False)

    @property
    def arrival_time(self) -> float | None:
        return None if self.arrival is None else float(self.times[self.arrival])

    def displacements(self) -> np.ndarray:
        return np.linalg.norm(np.diff(self.points, axis=0), axis=1)

    def length(self) -> float:
        return float(np.sum(self.displacements()))


def _slope_or_nan(spec, x):
    try:
        return slope(spec, x).value
    except (NotExactClass, NoProxPath):
        return math.nan


def descend(spec: ConvexSpec, x0, h: float = 1e-3, T: float = 20.0, with_slopes: bool = True) -> DescentTrajectory:
    """Minimizing-movement trajectory of ``ceil(T / h)`` steps.

    Raises
    ------
    ValueError
        If ``x0`` is outside the domain and no exact projection exists.
    NoProxPath
        If the tree has no prox.
    """
    if not (h > 0 and T > 0):
        raise ValueError("h and T must be positive")
    x = as_point(x0, spec.dim)
    if not math.isfinite(spec(x)):
        p = spec.project_domain(x)
        if p is None or not math.isfinite(spec(p)):
            raise ValueError("starting point is outside the domain and cannot be projected")
        x = p
    if not spec.has_prox:
        raise NoProxPath(f"{spec.kind} has no prox path")
    K = int(math.ceil(T / h - 1e-9))
    pts = np.empty((K + 1, spec.dim))
    pts[0] = x
    arrival = None
    for k in range(K):
        if arrival is not None:
            pts[k + 1] = pts[k]
            continue
        pts[k + 1] = spec.prox(h, pts[k])
        if np.linalg.norm(pts[k + 1] - pts[k]) < ARRIVAL_TOL:
            arrival = k
    vals = spec.values(pts)
    if with_slopes:
        slopes = np.empty(K + 1)
        stop = K + 1 if arrival is None else arrival + 2
        for k in range(stop):
            slopes[k] = _slope_or_nan(spec, pts[k])
        slopes[stop:] = slopes[stop - 1]
    else:
        slopes = np.full(K + 1, math.nan)
    return DescentTrajectory(h * np.arange(K + 1), pts, vals, slopes, h, arrival, spec)


def energy_identity_defect(traj: DescentTrajectory) -> float:
    """``|f(x_0) - f(x_K) - sum_k h s_f(x_k)**2|`` with left-endpoint quadrature."""
    s = traj.slopes[:-1]
    if np.any(np.isnan(s)):
        raise ValueError("slopes are missing along the trajectory")
    drop = traj.values[0] - traj.values[-1]
    return float(abs(drop - traj.h * np.sum(s ** 2)))


def _tail(n: int) -> slice:
    return slice(n - max(2, -(-n // 3)), n)


def infimizing_check(traj: DescentTrajectory, spec_g: ConvexSpec, spec_f: ConvexSpec | None = None,
                     tol: float = 1e-3, inf_g: float | None = None, integral_bound: float = 1e6) -> Verdict:
    """Whether ``g`` is infimized along the trajectory.

    Without ``spec_f`` the hypotheses are the discrete integrability
    ``sum_k s_g(x_k) ||x_{k+1} - x_k|| < integral_bound`` and a vanishing tail
    slope, and the conclusion is ``liminf_k g(x_k) = inf g``.  With
    ``spec_f`` (the function whose flow produced ``traj``) the hypotheses are
    ``s_f >= s_g`` along the curve and ``inf f > -inf``, and the conclusion is
    ``lim_k g(x_k) = inf g``.
    """
    X = traj.points
    sg = np.array([_slope_or_nan(spec_g, x) for x in X])
    gv = spec_g.values(X)
    if inf_g is None:
        inf_g = spec_inf(spec_g).value
    tail = _tail(X.shape[0])
    tol_d = {"tol": tol}
    if spec_f is None:
        integral = float(np.nansum(sg[:-1] * traj.displacements()))
        tail_slope = float(np.nanmin(sg[tail]))
        wit = [{"integral": integral, "tail_min_slope": tail_slope}]
        if np.any(np.isnan(sg)) or not integral < integral_bound or tail_slope > tol:
            return Verdict(Status.PRECONDITION_FAILED, wit, tol_d, note="integrability hypotheses not met")
        value = float(np.min(gv[tail]))
    else:
        sf = np.array([_slope_or_nan(spec_f, x) for x in X])
        gap = float(np.nanmax(sg - sf))
        try:
            inf_f = spec_inf(spec_f).value
        except Exception:  # noqa: BLE001 - any failure means inf f is not certified
            inf_f = -INF
        wit = [{"max_slope_excess": gap, "inf_f": inf_f}]
        if np.any(np.isnan(sg)) or np.any(np.isnan(sf)) or gap > tol or not inf_f > -INF:
            return Verdict(Status.PRECONDITION_FAILED, wit, tol_d, note="slope domination hypothesis not met")
        value = float(gv[-1])
        if float(np.max(gv[tail]) - np.min(gv[tail])) > tol:
            wit[0]["tail_spread"] = float(np.max(gv[tail]) - np.min(gv[tail]))
            return Verdict(Status.INCONCLUSIVE, wit, tol_d, note="g has not settled along the tail")
    wit[0].update({"tail_value": value, "inf_g": inf_g})
    ok = abs(value - inf_g) <= tol
    return Verdict(Status.HOLDS if ok else Status.FAILS, wit, tol_d)


def flow_limit_check(traj: DescentTrajectory, tol: float = 1e-3) -> Verdict:
    """``f(x_k) -> inf f`` and ``s_f(x_k) -> 0`` along the trajectory.

    Raises
    ------
    ValueError
        If the trajectory carries no function or ``inf f`` is not computable.
    """
    if traj.spec is None:
        raise ValueError("trajectory does not carry its function")
    try:
        r = spec_inf(traj.spec)
    except NotImplementedError as exc:
        raise ValueError("inf f is unknown for this function") from exc
    fK, sK = float(traj.values[-1]), float(traj.slopes[-1])
    tail = _tail(len(traj.values))
    spread = float(np.max(np.linalg.norm(traj.points[tail] - traj.points[-1], axis=1)))
    wit = [{"final_value": fK, "inf_f": r.value, "final_slope": sK, "length": traj.length(),
            "tail_spread": spread, "arrival_time": traj.arrival_time, "limit": traj.points[-1].tolist()}]
    ok = abs(fK - r.value) <= tol and sK <= tol and spread <= tol
    if ok:
        return Verdict(Status.HOLDS, wit, {"tol": tol})
    if traj.arrival is not None:
        return Verdict(Status.FAILS, wit, {"tol": tol}, note="stationary away from the infimum")
    return Verdict(Status.INCONCLUSIVE, wit, {"tol": tol}, note="curve still moving at the horizon")


def trajectory_csv(traj: DescentTrajectory) -> str:
    """Rows ``k,t,x_1..x_d,f,slope``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    d = traj.points.shape[1]
    w.writerow(["k", "t"] + [f"x{i + 1}" for i in range(d)] + ["f", "slope"])
    for k in range(len(traj.times)):
        w.writerow([k, f"{traj.times[k]:.12g}"] + [f"{v:.12g}" for v in traj.points[k]]
                   + [f"{traj.values[k]:.12g}", f"{traj.slopes[k]:.12g}"])
    return buf.getvalue()
