"""Painlevé-Kuratowski limits of sampled sets and epigraphical limits of functions.

Sets are finite point clouds with a resolution ``h``.  Epigraphical lower and
upper limits are estimated by a double ladder: for each radius ``eps`` of a
decreasing ladder and each index ``n`` of the tail of the index ladder, the
inner minimum of ``f_n`` over a grid of the ``eps``-ball around the test
point is computed; the tail liminf (resp. limsup) over ``n`` of these minima,
taken at the finest ``eps``, estimates ``f_l(x)`` (resp. ``f_u(x)``).  The
change between the two finest radii is the stabilization certificate.

None of the estimators assumes convexity of the members, so slope functions
can be fed to them directly.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .funclib.family import FunctionSeq
from .funclib.nodes import Constant, ConvexSpec, NoProxPath, Quadratic, Sum
from .slope import NotExactClass, SlopeFunction, slope
from .verdict import Status, Verdict, combine

INF = math.inf

#: estimates above this that keep growing along the tail count as +inf
BLOWUP = 1e6


def default_eps_ladder() -> tuple[float, ...]:
    """``eps_j = 2**-j`` for ``j = 0..8``."""
    return tuple(2.0 ** -j for j in range(9))


def default_n_ladder() -> tuple[int, ...]:
    """``n = 4**k`` for ``k = 0..20``."""
    return tuple(4 ** k for k in range(21))


def tail_size(N: int) -> int:
    """Length of the tail used for lim inf / lim sup: a third, at least two."""
    return max(2, -(-N // 3))


# ----------------------------------------------------------------------
# sampled sets


@dataclass(frozen=True, eq=False)
class SampledSet:
    """Finite sample of a set.

    Attributes
    ----------
    points : ndarray, shape (k, m)
    h : float
        Covering radius of the sampler on the reference box.
    box : tuple of ndarray
        ``(lo, hi)`` bounds of the reference box.
    """

    points: np.ndarray
    h: float
    box: tuple

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("resolution must be positive")
        lo, hi = (np.asarray(b, dtype=float) for b in self.box)
        P = np.asarray(self.points, dtype=float).reshape(-1, lo.size)
        slack = 1e-9 * (1 + np.abs(P).max(initial=0.0))
        if P.size and (np.any(P < lo - slack) or np.any(P > hi + slack)):
            raise ValueError("sample points must lie inside the box")
        object.__setattr__(self, "points", P)
        object.__setattr__(self, "box", (lo, hi))

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def empty(self) -> bool:
        return self.points.shape[0] == 0

    @classmethod
    def from_points(cls, points, h: float, pad: float = 0.0) -> "SampledSet":
        P = np.atleast_2d(np.asarray(points, dtype=float))
        if P.size == 0:
            raise ValueError("use an explicit box for an empty sample")
        return cls(P, h, (P.min(axis=0) - pad, P.max(axis=0) + pad))

    def tree(self) -> cKDTree:
        return cKDTree(self.points)


def pk_liminf_defect(S: SampledSet, seq: list[SampledSet]) -> float:
    """``max_{x in S} max_{n in tail} dist(x, S_n)``.

    Zero up to the resolution means ``S`` is contained in the inner limit.

    Raises
    ------
    ValueError
        With fewer than six sequence members.
    """
    if len(seq) < 6:
        raise ValueError("at least six sequence members are needed to define a tail")
    if S.empty:
        return 0.0
    worst = 0.0
    for Sn in seq[-tail_size(len(seq)):]:
        if Sn.empty:
            return INF
        dist, _ = Sn.tree().query(S.points)
        worst = max(worst, float(np.max(dist)))
    return worst


def limsup_candidates(seq: list[SampledSet], tau: float | None = None) -> np.ndarray:
    """Tail points that recur within ``tau`` in at least a third of all members."""
    if len(seq) < 6:
        raise ValueError("at least six sequence members are needed to define a tail")
    N = len(seq)
    tau = 3 * max(s.h for s in seq) if tau is None else tau
    need = -(-N // 3)
    trees = [None if s.empty else s.tree() for s in seq]
    cands = []
    for Sn in seq[-tail_size(N):]:
        if Sn.empty:
            continue
        count = np.zeros(Sn.points.shape[0], dtype=int)
        for t in trees:
            if t is None:
                continue
            d, _ = t.query(Sn.points, distance_upper_bound=tau)
            count += np.isfinite(d)
        cands.append(Sn.points[count >= need])
    return np.concatenate(cands) if cands else np.zeros((0, seq[0].points.shape[1]))


def pk_limsup_defect(S: SampledSet, seq: list[SampledSet], tau: float | None = None) -> float:
    """``max dist(y, S)`` over cluster candidates ``y`` of the sequence.

    Candidates are tail points recurring within ``tau`` (default ``3 h``)
    across at least ``ceil(N / 3)`` members.  Zero means the outer limit is
    contained in ``S``; without candidates the defect is 0.
    """
    C = limsup_candidates(seq, tau)
    if C.shape[0] == 0:
        return 0.0
    if S.empty:
        return INF
    d, _ = S.tree().query(C)
    return float(np.max(d))


# ----------------------------------------------------------------------
# subdifferential graphs


@dataclass(frozen=True, eq=False)
class GraphSample:
    """Sample of ``{(x, x*, f(x)) : x* in ∂f(x)}``.

    Attributes
    ----------
    X, XS : ndarray, shape (k, d)
    values : ndarray, shape (k,)
    h : float
    """

    X: np.ndarray
    XS: np.ndarray
    values: np.ndarray
    h: float

    @property
    def triples(self):
        return list(zip(self.X, self.XS, self.values))

    def cloud(self, with_values: bool) -> np.ndarray:
        parts = [self.X, self.XS] + ([self.values[:, None]] if with_values else [])
        return np.hstack(parts)

    def as_set(self, with_values: bool) -> SampledSet:
        P = self.cloud(with_values)
        if P.shape[0] == 0:
            m = 2 * self.X.shape[1] + int(with_values)
            return SampledSet(np.zeros((0, m)), self.h, (np.zeros(m), np.zeros(m)))
        return SampledSet.from_points(P, self.h)

    def max_subgradient_violation(self, spec: ConvexSpec, probes: np.ndarray) -> float:
        """Largest ``f(x) + <x*, y - x> - f(y)`` over triples and probe points ``y``."""
        fy = spec.values(probes)
        fin = np.isfinite(fy)
        if not np.any(fin):
            return 0.0
        P, fy = probes[fin], fy[fin]
        lin = self.values[:, None] + np.einsum("kd,kd->k", self.XS, -self.X)[:, None] + self.XS @ P.T
        return float(np.max(lin - fy[None, :], initial=0.0))


def _segment_count(length: float, h: float, minimum: int = 2) -> int:
    return int(min(max(minimum, math.ceil(length / h) + 1), 200_000))


def graph_sample(spec: ConvexSpec, h: float = 0.01, box: float = 2.0, star_box: float = 4.0) -> GraphSample:
    """Sample the subdifferential graph of an exact-class function.

    In 1-D the graph of the exact piecewise form is traced with spacing at
    most ``h`` (in the L1 sense) inside ``|x| <= box``, ``|x*| <= star_box``,
    including vertical segments at kinks and domain endpoints (at least 17
    points each).  In higher dimension only quadratics are supported: the
    gradient graph over a grid of spacing ``h``.
    """
    if spec.dim == 1:
        return _graph_1d(spec.to_pwq1d(), h, box, star_box)
    quad = spec
    if isinstance(spec, Sum):
        q, rest = spec._split()
        quad = q if not rest else None
    if isinstance(spec, Constant):
        quad = Quadratic(np.zeros((spec.dim, spec.dim)), None, spec.c)
    if not isinstance(quad, Quadratic):
        raise NotExactClass("graph samples in dimension > 1 exist only for quadratics")
    k = int(round(2 * box / h)) + 1
    axis = np.linspace(-box, box, k)
    mesh = np.meshgrid(*([axis] * spec.dim), indexing="ij")
    X = np.stack([m.ravel() for m in mesh], axis=1)
    XS = X @ quad.Q + quad.b
    keep = np.all(np.abs(XS) <= star_box, axis=1)
    X, XS = X[keep], XS[keep]
    return GraphSample(X, XS, quad.values(X), h)


def _graph_1d(g, h, box, star_box) -> GraphSample:
    lo, hi = max(float(g.lo), -box), min(float(g.hi), box)
    xs, ss, vs = [], [], []
    if lo > hi:
        return GraphSample(np.zeros((0, 1)), np.zeros((0, 1)), np.zeros(0), h)
    for i, (a, b, c) in enumerate(g.pieces):
        l, r = (float(t) for t in g.piece_bounds(i))
        a, b, c = float(a), float(b), float(c)
        l, r = max(l, lo), min(r, hi)
        if l > r:
            continue
        # window where |f'| <= star_box
        if a > 0:
            l = max(l, (-star_box - b) / (2 * a))
            r = min(r, (star_box - b) / (2 * a))
        elif abs(b) > star_box:
            continue
        if l > r:
            continue
        d_l, d_r = 2 * a * l + b, 2 * a * r + b
        f_l, f_r = (a * l + b) * l + c, (a * r + b) * r + c
        n = _segment_count((r - l) + abs(d_r - d_l) + abs(f_r - f_l), h)
        x = np.linspace(l, r, n)
        xs.append(x)
        ss.append(2 * a * x + b)
        vs.append((a * x + b) * x + c)
    for t in g.knots():
        t = float(t)
        if not (lo <= t <= hi) or not math.isfinite(t):
            continue
        sub = g.exact_subdiff(t)
        sl, sr = max(float(sub[0]), -star_box), min(float(sub[1]), star_box)
        if sl >= sr:
            continue
        n = _segment_count(sr - sl, h, 17)
        xs.append(np.full(n, t))
        ss.append(np.linspace(sl, sr, n))
        vs.append(np.full(n, float(g(t))))
    if not xs:
        return GraphSample(np.zeros((0, 1)), np.zeros((0, 1)), np.zeros(0), h)
    X, S, V = (np.concatenate(v) for v in (xs, ss, vs))
    return GraphSample(X[:, None], S[:, None], V, h)


# ----------------------------------------------------------------------
# epigraphical limits


@dataclass
class EpiLimitEstimate:
    """Lower and upper epigraphical limit estimates at one point.

    Attributes
    ----------
    x : ndarray
    lower, upper : float
        Estimates of ``f_l(x)`` and ``f_u(x)`` (finest radius).
    lower_drift, upper_drift : float
        Change between the two finest radii (``inf`` if one side is infinite).
    minima : ndarray, shape (len(eps), len(tail))
        Inner minima per radius and tail index.
    eps : tuple of float
    tail : tuple of int
    """

    x: np.ndarray
    lower: float
    upper: float
    lower_drift: float
    upper_drift: float
    minima: np.ndarray = field(repr=False)
    eps: tuple = ()
    tail: tuple = ()
    lower_by_eps: np.ndarray = field(default=None, repr=False)
    upper_by_eps: np.ndarray = field(default=None, repr=False)


def ball_grid(x: np.ndarray, eps: float) -> np.ndarray:
    """Uniform grid of the closed ``eps``-ball with at least ``2**d * 17`` nodes before clipping."""
    d = x.size
    k = 3
    while k ** d < 17 * 2 ** d:
        k += 2
    axis = np.linspace(-1.0, 1.0, k)
    mesh = np.meshgrid(*([axis] * d), indexing="ij")
    U = np.stack([m.ravel() for m in mesh], axis=1)
    U = U[np.linalg.norm(U, axis=1) <= 1.0 + 1e-12]
    return x + eps * U


def _prox_points(member, x, eps):
    spec = member.spec if isinstance(member, SlopeFunction) else member
    out = []
    if not isinstance(spec, ConvexSpec):
        return out
    p = spec.project_domain(x)
    if p is not None:
        out.append(p)
    if spec.has_prox:
        for lam in (eps, eps / 16):
            try:
                out.append(spec.prox(lam, x))
            except (NoProxPath, ArithmeticError):
                break
    return [q for q in out if np.linalg.norm(q - x) <= eps]


def _blown_up(vals) -> bool:
    vals = np.asarray(vals)
    if np.all(np.isinf(vals)):
        return True
    if not np.all(np.isfinite(vals)):
        return False
    return bool(np.all(vals >= BLOWUP) and np.all(np.diff(vals) > 0))


def _drift(a: float, b: float) -> float:
    if math.isinf(a) and math.isinf(b):
        return 0.0
    if math.isinf(a) or math.isinf(b):
        return INF
    return abs(a - b)


def inner_minima(seqF: FunctionSeq, x, eps_ladder, ns, augment: bool = True) -> np.ndarray:
    """Matrix of ``min_{grid of B(x, eps)} f_n`` for each radius and index."""
    x = np.asarray(x, dtype=float).reshape(-1)
    M = np.empty((len(eps_ladder), len(ns)))
    for i, n in enumerate(ns):
        f = seqF.member(n)
        for j, eps in enumerate(eps_ladder):
            Y = ball_grid(x, eps)
            extra = _prox_points(f, x, eps) if augment else []
            if extra:
                Y = np.vstack([Y] + [e[None, :] for e in extra])
            M[j, i] = float(np.min(f.values(Y)))
    return M


def epi_limits(seqF: FunctionSeq, x, eps_ladder=None, n_ladder=None, augment: bool = True) -> EpiLimitEstimate:
    """Estimate ``f_l(x)`` and ``f_u(x)`` from one minima matrix."""
    eps = tuple(eps_ladder) if eps_ladder is not None else default_eps_ladder()
    ns = tuple(n_ladder) if n_ladder is not None else seqF.ladder
    if not eps or not ns:
        raise ValueError("empty ladders")
    if any(a <= b for a, b in zip(eps, eps[1:])) or any(a >= b for a, b in zip(ns, ns[1:])):
        raise ValueError("eps ladder must decrease and n ladder must increase")
    tail = ns[-tail_size(len(ns)):]
    x = np.asarray(x, dtype=float).reshape(-1)
    M = inner_minima(seqF, x, eps, tail, augment)
    lo_e, up_e = np.empty(len(eps)), np.empty(len(eps))
    for j in range(len(eps)):
        row = M[j]
        lo_e[j] = INF if _blown_up(row) else float(np.min(row))
        up_e[j] = INF if _blown_up(row) else float(np.max(row))
    # sup over eps; the inner minima increase as the ball shrinks
    lower, upper = float(np.max(lo_e)), float(np.max(up_e))
    if len(eps) > 1:
        dl, du = _drift(lo_e[-1], lo_e[-2]), _drift(up_e[-1], up_e[-2])
    else:
        dl = du = INF
    return EpiLimitEstimate(x, lower, upper, dl, du, M, eps, tail, lo_e, up_e)


def epi_lower_limit(seqF: FunctionSeq, x, eps_ladder=None, n_ladder=None) -> EpiLimitEstimate:
    """``f_l(x) = inf_{x_n -> x} liminf f_n(x_n)`` (the ``lower`` field)."""
    return epi_limits(seqF, x, eps_ladder, n_ladder)


def epi_upper_limit(seqF: FunctionSeq, x, eps_ladder=None, n_ladder=None) -> EpiLimitEstimate:
    """``f_u(x) = inf_{x_n -> x} limsup f_n(x_n)`` (the ``upper`` field)."""
    return epi_limits(seqF, x, eps_ladder, n_ladder)


def _match(a: float, b: float, tol: float) -> bool:
    if math.isinf(a) or math.isinf(b):
        return a == b
    return abs(a - b) <= tol


def _gap_closing(est: EpiLimitEstimate, fx: float) -> bool:
    # the finest-radius minima approach f(x) monotonically along the index tail
    row = est.minima[-1]
    if not (math.isfinite(fx) and np.all(np.isfinite(row))) or row.size < 2:
        return False
    gap = np.abs(row - fx)
    return bool(np.all(np.diff(gap) <= 0) and gap[-1] < 0.5 * gap[0])


def classify(est: EpiLimitEstimate, fx: float, tol: float) -> Status:
    """Per-point status: a stabilized match holds, a stabilized mismatch fails.

    A mismatch is not stabilized when either radius drift exceeds ``tol`` or
    the gap to ``f(x)`` is still closing monotonically along the index tail.
    """
    stable = est.lower_drift <= tol and est.upper_drift <= tol
    match = _match(est.lower, fx, tol) and _match(est.upper, fx, tol)
    if not stable:
        return Status.INCONCLUSIVE
    if match:
        return Status.HOLDS
    return Status.INCONCLUSIVE if _gap_closing(est, fx) else Status.FAILS


def epi_converges(seqF: FunctionSeq, test_points, tol: float = 1e-2, eps_ladder=None, n_ladder=None) -> Verdict:
    """Verdict on ``f_n ->e f`` via ``f_l = f = f_u`` at the test points."""
    pts = np.atleast_2d(np.asarray(test_points, dtype=float))
    if seqF.dim == 1 and pts.shape[0] == 1 and pts.shape[1] != 1:
        pts = pts.T
    statuses, wit, ests = [], [], []
    for x in pts:
        est = epi_limits(seqF, x, eps_ladder, n_ladder)
        fx = float(seqF.limit.values(x[None, :])[0])
        st = classify(est, fx, tol)
        statuses.append(st)
        ests.append((est, fx, st))
        wit.append({"point": x.tolist(), "f_l": est.lower, "f_u": est.upper, "f": fx,
                    "drift": max(est.lower_drift, est.upper_drift), "status": st.value})
    status = combine(statuses) if statuses else Status.INCONCLUSIVE
    # the decisive witnesses first
    order = sorted(range(len(wit)), key=lambda i: {Status.FAILS: 0, Status.INCONCLUSIVE: 1}.get(statuses[i], 2))
    wit = [wit[i] for i in order]
    return Verdict(status, wit, {"tol": tol}, data={"estimates": ests})


def epi_csv(scenario_id: str, verdict: Verdict, label: str = "epi") -> str:
    """Rows ``scenario,check,point,f_l,f_u,f,status`` in test-point order."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["scenario", "check", "point", "f_l", "f_u", "f", "status"])
    for est, fx, st in verdict.data.get("estimates", []):
        w.writerow([scenario_id, label, " ".join(f"{v:.12g}" for v in est.x),
                    f"{est.lower:.12g}", f"{est.upper:.12g}", f"{fx:.12g}", st.value])
    return buf.getvalue()


# ----------------------------------------------------------------------
# lemma-level diagnostics


def _tail_pairs(witness):
    wit = sorted(((int(n), np.asarray(x, dtype=float).reshape(-1)) for n, x in witness), key=lambda t: t[0])
    return wit[-tail_size(len(wit)):]


def tightness_check(seqF: FunctionSeq, witness, tol: float = 1e-2, xbar=None, slope_bound: float = 1e6,
                    eps_ladder=None) -> Verdict:
    """Compare epi-limits at ``xbar`` with tail lim inf / lim sup of ``f_n(x_n)``.

    ``witness`` is a list of ``(n, x_n)``; the slopes ``s_{f_n}(x_n)`` must
    stay below ``slope_bound``, otherwise the verdict is precondition-failed.
    """
    if len(witness) < 2:
        raise ValueError("witness needs at least two indices")
    tail = _tail_pairs(witness)
    slopes = []
    for n, x in tail:
        try:
            slopes.append(slope(seqF.member(n), x).value)
        except (NotExactClass, NoProxPath):
            slopes.append(INF)
    if not all(s <= slope_bound for s in slopes):
        return Verdict(Status.PRECONDITION_FAILED, [{"n": n, "slope": s} for (n, _), s in zip(tail, slopes)],
                       {"slope_bound": slope_bound}, note="witness slopes unbounded")
    xbar = np.mean([x for _, x in tail], axis=0) if xbar is None else np.asarray(xbar, dtype=float).reshape(-1)
    move = max(float(np.linalg.norm(x - xbar)) for _, x in tail)
    vals = [float(seqF.member(n).values(x[None, :])[0]) for n, x in tail]
    lim_inf, lim_sup = min(vals), max(vals)
    if _blown_up(vals):
        lim_inf = lim_sup = INF
    est = epi_limits(seqF, xbar, eps_ladder)
    wit = [{"point": xbar.tolist(), "f_l": est.lower, "f_u": est.upper, "liminf": lim_inf, "limsup": lim_sup,
            "max_slope": max(slopes), "spread": move}]
    if move > tol or est.lower_drift > tol or est.upper_drift > tol:
        return Verdict(Status.INCONCLUSIVE, wit, {"tol": tol}, note="witness or ladder not settled")
    ok = _match(est.lower, lim_inf, tol) and _match(est.upper, lim_sup, tol)
    return Verdict(Status.HOLDS if ok else Status.FAILS, wit, {"tol": tol})


def domain_sandwich_check(seqF: FunctionSeq, test_points, h: float = 1e-2, tol: float = 1e-2,
                          eps_ladder=None) -> Verdict:
    """``dom s_f ⊂ dom f_l ∩ dom f_u`` and finite epi-limits only near ``dom f``.

    For every test point where the limit slope is finite, both epi-limit
    estimates must be finite; for every test point with a finite estimate,
    ``dom f`` must come within ``h`` (checked with the exact domain
    projection when known, else a local grid).
    """
    f = seqF.limit
    pts = np.atleast_2d(np.asarray(test_points, dtype=float))
    if f.dim == 1 and pts.shape[0] == 1 and pts.shape[1] != 1:
        pts = pts.T
    wit, bad, shaky = [], 0, 0
    for x in pts:
        try:
            s = slope(f, x).value
        except (NotExactClass, NoProxPath):
            s = INF
        est = epi_limits(seqF, x, eps_ladder)
        finite_est = math.isfinite(est.lower) or math.isfinite(est.upper)
        p = f.project_domain(x) if isinstance(f, ConvexSpec) else None
        if p is not None:
            near = float(np.linalg.norm(p - x)) <= h
        else:
            near = bool(np.any(np.isfinite(f.values(ball_grid(x, h)))))
        ok1 = not math.isfinite(s) or (math.isfinite(est.lower) and math.isfinite(est.upper))
        ok2 = not finite_est or near
        settled = est.lower_drift <= tol and est.upper_drift <= tol
        if not (ok1 and ok2):
            if settled:
                bad += 1
            else:
                shaky += 1
        wit.append({"point": x.tolist(), "slope": s, "f_l": est.lower, "f_u": est.upper, "near_dom": near,
                    "ok": ok1 and ok2})
    status = Status.FAILS if bad else (Status.INCONCLUSIVE if shaky else Status.HOLDS)
    return Verdict(status, wit, {"h": h, "tol": tol})
