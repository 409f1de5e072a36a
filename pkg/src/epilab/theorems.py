"""Verdict harnesses: normalization conditions, comparison principle, Attouch's
theorem and its slope counterpart.

Each harness evaluates the assertions of an equivalence independently and
reports one sub-verdict per assertion together with a consistency flag; a
definitive disagreement between assertions that are supposed to be
equivalent (or a comparison failure under satisfied hypotheses) is a
*red alert*: it contradicts the theorem, so it points at an implementation
bug rather than at the mathematics.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .funclib.conjugate import fenchel_subgradient_check
from .funclib.family import FunctionSeq
from .funclib.infimum import spec_inf
from .flow import descend, energy_identity_defect, flow_limit_check, infimizing_check
from .funclib.nodes import ConvexSpec, as_point
from .funclib.serialize import eval_expr, spec_from_json
from .oracle1d import UnboundedBelowError
from .scenario import Scenario, ScenarioError, fmt, load_scenario
from .setconv import (GraphSample, domain_sandwich_check, epi_converges, epi_limits, graph_sample,
                      pk_liminf_defect, pk_limsup_defect, tail_size, tightness_check)
from .slope import NotExactClass, SlopeFunction, slope, subdifferential
from .verdict import Status, Verdict, combine

INF = math.inf

#: relative feasibility tolerance of witness triples
FEAS_TOL = 1e-7


def seed() -> int:
    """Seed of randomized probes (``EPILAB_SEED``, default 0)."""
    return int(os.environ.get("EPILAB_SEED", "0"))


# ----------------------------------------------------------------------
# normalization condition


@dataclass(eq=False)
class NCWitness:
    """Triples ``(x_n, x_n*, f_n(x_n))`` and a limit triple.

    Attributes
    ----------
    ns : tuple of int
    X, XS : ndarray, shape (N, d)
    values : ndarray, shape (N,)
    limit : tuple
        ``(x, x*, f(x))``.
    """

    ns: tuple
    X: np.ndarray
    XS: np.ndarray
    values: np.ndarray
    limit: tuple

    def defects(self) -> np.ndarray:
        """Per-index ``(|x_n - x|, |x_n* - x*|, |f_n(x_n) - f(x)|)``."""
        x, xs, fx = self.limit
        dv = np.abs(self.values - fx)
        dv[np.isinf(self.values) & (self.values == fx)] = 0.0
        return np.stack([np.linalg.norm(self.X - x, axis=1), np.linalg.norm(self.XS - xs, axis=1), dv], axis=1)

    def points(self):
        return [(n, x) for n, x in zip(self.ns, self.X)]


def prox_witness(seqF: FunctionSeq, anchor, lam: float = 1.0) -> NCWitness:
    """Witness through resolvents: ``x_n = prox_{lam f_n}(a)``, ``x_n* = (a - x_n) / lam``."""
    a = as_point(anchor, seqF.dim)
    X, XS, V = [], [], []
    for n in seqF.ladder:
        f = seqF.member(n)
        p = f.prox(lam, a)
        X.append(p)
        XS.append((a - p) / lam)
        V.append(f(p))
    f = seqF.limit
    p = f.prox(lam, a)
    return NCWitness(seqF.ladder, np.array(X), np.array(XS), np.array(V), (p, (a - p) / lam, f(p)))


def in_subdifferential(spec: ConvexSpec, x, xs, tol: float = FEAS_TOL) -> bool:
    """``x* ∈ ∂f(x)`` within ``tol`` (relative), exactly where possible."""
    x = as_point(x, spec.dim)
    xs = as_point(xs, spec.dim)
    scale = 1.0 + float(np.linalg.norm(xs))
    try:
        S = subdifferential(spec, x)
        return (not S.empty) and S.dist(xs) <= tol * scale
    except NotExactClass:
        pass
    fx = spec(x)
    if not math.isfinite(fx):
        return False
    if spec.dim == 1:
        return fenchel_subgradient_check(spec, x, xs, tol * scale * (1 + abs(fx)))
    # random probes of the subgradient inequality
    rng = np.random.default_rng(seed())
    Y = x + rng.normal(size=(512, spec.dim)) * rng.choice([1e-3, 1e-1, 1.0], size=(512, 1))
    fy = spec.values(Y)
    ok = np.isinf(fy) | (fy >= fx + (Y - x) @ xs - tol * scale * (1 + abs(fx)))
    return bool(np.all(ok))


def _still_shrinking(col) -> bool:
    """Tail defects above ``tol`` that keep decaying are not a settled failure."""
    col = np.asarray(col, dtype=float)
    if not np.all(np.isfinite(col)):
        return False
    return bool(col[-1] < 0.5 * col.max())


def nc_check(seqF: FunctionSeq, witness: NCWitness, tol: float = 1e-2) -> Verdict:
    """Normalization condition: the witness triples converge to a triple of ``△f``.

    Raises
    ------
    ValueError
        If a witness triple is not in the graph of ``∂f_n`` (configuration error).
    """
    for n, x, xs, v in zip(witness.ns, witness.X, witness.XS, witness.values):
        f = seqF.member(n)
        fx = f(x)
        if not in_subdifferential(f, x, xs) or not (fx == v or abs(fx - v) <= FEAS_TOL * (1 + abs(fx))):
            raise ValueError(f"witness triple at n={n} is not in the subdifferential graph")
    D = witness.defects()
    tail = slice(len(witness.ns) - tail_size(len(witness.ns)), None)
    worst = D[tail].max(axis=0)
    x, xs, fx = witness.limit
    in_lim = math.isfinite(fx) and in_subdifferential(seqF.limit, x, xs, max(FEAS_TOL, tol))
    wit = [{"n": int(n), "dx": float(d[0]), "dxs": float(d[1]), "dvalue": float(d[2])}
           for n, d in zip(witness.ns[tail], D[tail])]
    wit.insert(0, {"limit": [np.asarray(x).tolist(), np.asarray(xs).tolist(), fx], "limit_in_graph": in_lim,
                   "max_tail_defects": worst.tolist()})
    ok = bool(np.all(worst <= tol)) and in_lim
    if not ok and in_lim and all(_still_shrinking(D[tail][:, k]) for k in range(3) if worst[k] > tol):
        return Verdict(Status.INCONCLUSIVE, wit, {"tol": tol}, note="defects above tol but still decreasing")
    return Verdict(Status.HOLDS if ok else Status.FAILS, wit, {"tol": tol})


def nc_weak_check(seqF: FunctionSeq, witness, tol: float = 1e-2, x=None, slope_bound: float = 1e6) -> Verdict:
    """Weakened normalization: ``(x_n, f_n(x_n)) -> (x, f(x))`` with bounded slopes.

    ``witness`` is a list of ``(n, x_n)``; ``x`` defaults to the last point.
    """
    pairs = sorted(((int(n), as_point(p, seqF.dim)) for n, p in witness), key=lambda t: t[0])
    if len(pairs) < 2:
        raise ValueError("witness needs at least two indices")
    x = pairs[-1][1] if x is None else as_point(x, seqF.dim)
    f = seqF.limit
    fx = f(x)
    s_lim = slope(f, x).value if math.isfinite(fx) else INF
    slopes, dx, dv = [], [], []
    for n, p in pairs:
        fn = seqF.member(n)
        slopes.append(slope(fn, p).value)
        dx.append(float(np.linalg.norm(p - x)))
        v = fn(p)
        dv.append(0.0 if v == fx else abs(v - fx))
    tail = slice(len(pairs) - tail_size(len(pairs)), None)
    wit = [{"x": x.tolist(), "f(x)": fx, "slope_at_limit": s_lim, "sup_slope": max(slopes),
            "max_tail_dx": max(dx[tail]), "max_tail_dvalue": max(dv[tail])}]
    ok = (max(dx[tail]) <= tol and max(dv[tail]) <= tol and math.isfinite(s_lim) and max(slopes) <= slope_bound)
    if not ok and math.isfinite(s_lim) and max(slopes) <= slope_bound and \
            all(_still_shrinking(c[tail]) for c in (dx, dv) if max(c[tail]) > tol):
        return Verdict(Status.INCONCLUSIVE, wit, {"tol": tol, "slope_bound": slope_bound},
                       note="defects above tol but still decreasing")
    return Verdict(Status.HOLDS if ok else Status.FAILS, wit, {"tol": tol, "slope_bound": slope_bound})


# ----------------------------------------------------------------------
# comparison principle


def _points(grid, dim):
    P = np.atleast_2d(np.asarray(grid, dtype=float))
    if dim == 1 and P.shape[0] == 1 and P.shape[1] != 1:
        P = P.T
    return P


def comparison_check(f: ConvexSpec, g: ConvexSpec, grid, tol: float = 1e-9) -> Verdict:
    """``inf f >= inf g`` and ``s_f >= s_g`` on the grid imply ``f >= g`` there.

    Raises
    ------
    ValueError
        If ``f`` or ``g`` is unbounded below or its infimum is not computable.
    """
    try:
        inf_f, inf_g = spec_inf(f).value, spec_inf(g).value
    except (UnboundedBelowError, NotImplementedError) as exc:
        raise ValueError(f"comparison needs computable finite infima: {exc}") from exc
    P = _points(grid, f.dim)
    tol_d = {"tol": tol}
    if inf_f < inf_g - tol:
        return Verdict(Status.PRECONDITION_FAILED, [{"inf_f": inf_f, "inf_g": inf_g}], tol_d,
                       note="inf f < inf g")
    for x in P:
        sf, sg = slope(f, x).value, slope(g, x).value
        if sg > sf + tol * (1 + sf if math.isfinite(sf) else 1):
            return Verdict(Status.PRECONDITION_FAILED, [{"point": x.tolist(), "s_f": sf, "s_g": sg}], tol_d,
                           note="s_f < s_g")
    fv, gv = f.values(P), g.values(P)
    with np.errstate(invalid="ignore"):
        margin = np.where(np.isinf(fv), INF, fv - gv)
    i = int(np.argmin(margin))
    wit = [{"point": P[i].tolist(), "f": float(fv[i]), "g": float(gv[i]), "margin": float(margin[i]),
            "inf_f": inf_f, "inf_g": inf_g}]
    ok = bool(margin[i] >= -tol * (1 + abs(gv[i]) if math.isfinite(gv[i]) else 1))
    return Verdict(Status.HOLDS if ok else Status.FAILS, wit, tol_d,
                   note="" if ok else "red alert: f < g under the hypotheses")


# ----------------------------------------------------------------------
# equivalence harnesses


def _consistency(parts: dict) -> tuple[Status, bool | None]:
    sts = [v.status for v in parts.values()]
    definitive = {s for s in sts if s.definitive}
    if len(definitive) > 1:
        return Status.INCONCLUSIVE, False
    if all(s.definitive for s in sts):
        return sts[0], True
    return Status.INCONCLUSIVE, None


def graph_family(seqF: FunctionSeq, h: float = 0.01, box: float = 2.0, star_box: float = 4.0):
    """Graph samples of every ladder member and of the limit."""
    return ([graph_sample(seqF.member(n), h, box, star_box) for n in seqF.ladder],
            graph_sample(seqF.limit, h, box, star_box))


def _pk_verdict(limit: GraphSample, seq: list[GraphSample], with_values: bool, tol: float) -> Verdict:
    S = limit.as_set(with_values)
    Sn = [g.as_set(with_values) for g in seq]
    inner, outer = pk_liminf_defect(S, Sn), pk_limsup_defect(S, Sn)
    ptol = tol + 2 * max(g.h for g in seq + [limit])
    ok = inner <= ptol and outer <= ptol
    return Verdict(Status.HOLDS if ok else Status.FAILS, [{"liminf_defect": inner, "limsup_defect": outer}],
                   {"pk_tol": ptol})


def attouch_check(seqF: FunctionSeq, test_points, witness: NCWitness, graphs=None, tol: float = 1e-2,
                  epi: Verdict | None = None, eps_ladder=None, h: float = 0.01, box: float = 2.0,
                  star_box: float = 4.0) -> Verdict:
    """Epi-convergence, graph convergence of ``∂f_n`` plus NC, and convergence of ``△f_n``.

    ``graphs`` is ``(member_graphs, limit_graph)``; it is sampled from the
    exact 1-D form (or quadratic gradients) when omitted.  ``epi`` may carry
    a precomputed epi-convergence verdict.
    """
    if graphs is None:
        graphs = graph_family(seqF, h, box, star_box)
    seq, lim = graphs
    if not seq or lim is None:
        raise ValueError("missing graph samples")
    p1 = epi if epi is not None else epi_converges(seqF, test_points, tol, eps_ladder)
    sub = _pk_verdict(lim, seq, False, tol)
    nc = nc_check(seqF, witness, tol)
    p2 = Verdict(combine([sub.status, nc.status]), sub.witnesses + nc.witnesses[:1], sub.tolerances,
                 parts={"graph": sub, "nc": nc})
    p3 = _pk_verdict(lim, seq, True, tol)
    parts = {"i": p1, "ii": p2, "iii": p3}
    status, cons = _consistency(parts)
    wit = [{"i": p1.status.value, "ii": p2.status.value, "iii": p3.status.value}]
    return Verdict(status, wit, {"tol": tol}, parts=parts, consistent=cons)


def inf_condition(seqF: FunctionSeq, epi: Verdict, inf_f: float, tol_inf: float = 1e-3, tol: float = 1e-2,
                  eps_ladder=None) -> Verdict:
    """``inf f_l = inf f = inf f_u`` from the epi-limit estimates of ``epi``.

    The minimum over the test grid is refined once around the grid argmin.
    """
    ests = epi.data["estimates"]
    if not ests:
        raise ValueError("epi verdict carries no estimates")
    X = np.array([e.x for e, _, _ in ests])
    lows = np.array([e.lower for e, _, _ in ests])
    best = [(e.lower, e.upper, e) for e, _, _ in ests]
    i = int(np.argmin(lows))
    spacing = np.min(np.linalg.norm(X - X[i], axis=1)[np.arange(len(X)) != i], initial=0.1) if len(X) > 1 else 0.1
    d = X.shape[1]
    for k in range(d):
        for s in (-0.5, -0.25, 0.25, 0.5):
            y = X[i].copy()
            y[k] += s * spacing
            e = epi_limits(seqF, y, eps_ladder)
            best.append((e.lower, e.upper, e))
    inf_l = min(b[0] for b in best)
    inf_u = min(b[1] for b in best)
    el = min(best, key=lambda b: b[0])[2]
    eu = min(best, key=lambda b: b[1])[2]
    stable = el.lower_drift <= tol and eu.upper_drift <= tol
    wit = [{"inf_f_l": inf_l, "inf_f_u": inf_u, "inf_f": inf_f, "argmin_l": el.x.tolist()}]
    ok = (abs(inf_l - inf_f) <= tol_inf if math.isfinite(inf_l) else False) and \
         (abs(inf_u - inf_f) <= tol_inf if math.isfinite(inf_u) else False)
    if ok:
        return Verdict(Status.HOLDS, wit, {"tol_inf": tol_inf})
    if not stable:
        return Verdict(Status.INCONCLUSIVE, wit, {"tol_inf": tol_inf}, note="inf estimates not stabilized")
    return Verdict(Status.FAILS, wit, {"tol_inf": tol_inf})


def main_theorem_check(seqF: FunctionSeq, test_points, witness: NCWitness | None = None, tol: float = 1e-2,
                       tol_inf: float = 1e-3, epi: Verdict | None = None, eps_ladder=None,
                       slope_epi: Verdict | None = None) -> Verdict:
    """Epi-convergence versus slope epi-convergence plus NC or plus the inf condition.

    Parts ``i``, ``ii`` and ``iii`` are the three assertions; ``slope-epi``,
    ``nc`` and ``inf`` are their ingredients.  ``witness=None`` skips NC and
    evaluates ``ii`` as inconclusive.  ``epi`` and ``slope_epi`` may carry
    precomputed epi-convergence verdicts of the family and of its slopes.
    """
    try:
        r = spec_inf(seqF.limit)
        inf_f = r.value
    except (UnboundedBelowError, NotImplementedError) as exc:
        return Verdict(Status.PRECONDITION_FAILED, [{"inf_f": str(exc)}], note="inf f is not a finite number")
    if not math.isfinite(inf_f):
        return Verdict(Status.PRECONDITION_FAILED, [{"inf_f": inf_f}], note="inf f is not a finite number")
    p1 = epi if epi is not None else epi_converges(seqF, test_points, tol, eps_ladder)
    if slope_epi is None:
        slope_epi = epi_converges(seqF.map(SlopeFunction), test_points, tol, eps_ladder)
    if witness is not None:
        nc = nc_check(seqF, witness, tol)
    else:
        nc = Verdict(Status.INCONCLUSIVE, note="no witness")
    infc = inf_condition(seqF, p1, inf_f, tol_inf, tol, eps_ladder)
    p2 = Verdict(combine([slope_epi.status, nc.status]),
                 slope_epi.witnesses[:1] + nc.witnesses[:1], {"tol": tol})
    p3 = Verdict(combine([slope_epi.status, infc.status]),
                 slope_epi.witnesses[:1] + infc.witnesses[:1], {"tol": tol, "tol_inf": tol_inf})
    parts = {"i": p1, "ii": p2, "iii": p3}
    status, cons = _consistency(parts)
    wit = [{"i": p1.status.value, "ii": p2.status.value, "iii": p3.status.value, "inf_f": inf_f}]
    allparts = dict(parts)
    allparts.update({"slope-epi": slope_epi, "nc": nc, "inf": infc})
    return Verdict(status, wit, {"tol": tol, "tol_inf": tol_inf}, parts=allparts, consistent=cons)


# ----------------------------------------------------------------------
# scenario suite

EXIT_CLEAN = 0
EXIT_MISMATCH = 1
EXIT_RED_ALERT = 2
EXIT_INCONCLUSIVE = 3
EXIT_ERROR = 4

REPORT_HEADER = ("scenario", "check", "part", "status", "expected", "outcome", "consistent")
SUMMARY_HEADER = ("scenario", "checks", "rows", "mismatches", "inconclusive", "red_alerts", "errors", "exit")
PLOT_HEADER = ("series", "x", "y")

MAIN_PARTS = ("i", "ii", "iii", "slope-epi", "nc", "inf")
ATTOUCH_PARTS = ("i", "ii", "iii")


@dataclass
class ScenarioResult:
    """Plain-data outcome of one scenario (picklable across processes).

    ``rows`` follow :data:`REPORT_HEADER`; ``plots`` are ``(series, x, y)``
    string triples; ``red_alerts`` and ``errors`` are messages.
    """

    id: str
    rows: list
    plots: list
    red_alerts: list
    errors: list

    @property
    def mismatches(self) -> int:
        return sum(r[5] == "mismatch" for r in self.rows)

    @property
    def inconclusive(self) -> int:
        return sum(r[3] == Status.INCONCLUSIVE.value for r in self.rows)

    @property
    def exit_code(self) -> int:
        if self.red_alerts:
            return EXIT_RED_ALERT
        if self.errors:
            return EXIT_ERROR
        if self.inconclusive:
            return EXIT_INCONCLUSIVE
        if self.mismatches:
            return EXIT_MISMATCH
        return EXIT_CLEAN


@dataclass
class Report:
    """Aggregate of scenario results in corpus order."""

    results: list

    @property
    def exit_code(self) -> int:
        codes = {r.exit_code for r in self.results}
        for c in (EXIT_RED_ALERT, EXIT_ERROR, EXIT_INCONCLUSIVE, EXIT_MISMATCH):
            if c in codes:
                return c
        return EXIT_CLEAN

    def rows(self) -> list:
        return [row for r in self.results for row in r.rows]

    def summary_rows(self) -> list:
        out = []
        for r in self.results:
            checks = len({row[1] for row in r.rows})
            out.append((r.id, str(checks), str(len(r.rows)), str(r.mismatches), str(r.inconclusive),
                        str(len(r.red_alerts)), str(len(r.errors)), str(r.exit_code)))
        return out

    def summary_text(self) -> str:
        label = {EXIT_CLEAN: "ok", EXIT_MISMATCH: "expectation mismatch", EXIT_RED_ALERT: "RED ALERT",
                 EXIT_INCONCLUSIVE: "inconclusive", EXIT_ERROR: "error"}
        lines = []
        for r in self.results:
            lines.append(f"{r.id}: {label[r.exit_code]} ({len(r.rows)} rows, {r.mismatches} mismatches, "
                         f"{r.inconclusive} inconclusive)")
            lines.extend(f"  red alert: {m}" for m in r.red_alerts)
            lines.extend(f"  error: {m}" for m in r.errors)
            lines.extend(f"  mismatch: {row[1]}/{row[2]} is {row[3]}, expected {row[4]}"
                         for row in r.rows if row[5] == "mismatch")
        lines.append(f"{len(self.results)} scenarios, exit {self.exit_code}")
        return "\n".join(lines) + "\n"


class _Context:
    """Lazily shared ingredients of one scenario's checks."""

    def __init__(self, sc, tol):
        self.sc = sc
        self.tol = tol
        self._cache = {}

    def _get(self, key, make):
        if key not in self._cache:
            self._cache[key] = make()
        return self._cache[key]

    @property
    def seq(self) -> FunctionSeq:
        return self._get("seq", self.sc.family)

    @property
    def epi(self) -> Verdict:
        return self._get("epi", lambda: epi_converges(self.seq, self.sc.test_points, self.tol,
                                                      self.sc.eps_ladder))

    @property
    def slope_epi(self) -> Verdict:
        return self._get("slope-epi", lambda: epi_converges(self.seq.map(SlopeFunction), self.sc.test_points,
                                                            self.tol, self.sc.eps_ladder))

    @property
    def witness(self) -> NCWitness:
        def make():
            w = self.sc.witness
            if w["kind"] == "prox":
                return prox_witness(self.seq, w["anchor"], w["lambda"])
            return _explicit_witness(self.seq, w)
        return self._get("witness", make)

    @property
    def flow_spec(self) -> ConvexSpec:
        return self._get("flow_spec", lambda: spec_from_json(self.sc.flow["spec"], None, self.sc.dimension))

    @property
    def traj(self):
        fl = self.sc.flow
        return self._get("traj", lambda: descend(self.flow_spec, fl["x0"], fl["h"], fl["T"]))


def _explicit_witness(seqF: FunctionSeq, w: dict) -> NCWitness:
    def vec(v, n):
        vals = v if isinstance(v, list) else [v] * seqF.dim
        return np.array([float(eval_expr(t, n)) for t in vals])

    X = np.array([vec(w["x"], n) for n in seqF.ladder])
    XS = np.array([vec(w["xstar"], n) for n in seqF.ladder])
    V = np.array([seqF.member(n).values(x[None, :])[0] for n, x in zip(seqF.ladder, X)])
    x, xs = vec(w["limit"]["x"], None), vec(w["limit"]["xstar"], None)
    return NCWitness(seqF.ladder, X, XS, V, (x, xs, float(seqF.limit.values(x[None, :])[0])))


def _epi_plots(label: str, v: Verdict):
    out = []
    for i, (est, fx, _) in enumerate(v.data.get("estimates", [])):
        x = fmt(est.x[0]) if est.x.size == 1 else str(i)
        out += [(f"{label}.f_l", x, fmt(est.lower)), (f"{label}.f_u", x, fmt(est.upper)), (f"{label}.f", x, fmt(fx))]
    return out


def _flow_plots(traj):
    K = len(traj.times)
    idx = range(0, K, max(1, (K - 1) // 500))
    out = []
    for k in idx:
        t = fmt(traj.times[k])
        out.append(("flow.f", t, fmt(traj.values[k])))
        out.append(("flow.slope", t, fmt(traj.slopes[k])))
        out += [(f"flow.x{j + 1}", t, fmt(c)) for j, c in enumerate(traj.points[k])]
    return out


def _run_check(ctx: _Context, check: str):
    """Return ``[(part, verdict)]``, plot triples and red-alert messages."""
    sc, tol = ctx.sc, ctx.tol
    T = sc.tolerances
    if check == "epi":
        return [("-", ctx.epi)], _epi_plots("epi", ctx.epi), []
    if check == "slope-epi":
        return [("-", ctx.slope_epi)], _epi_plots("slope-epi", ctx.slope_epi), []
    if check == "nc":
        v = nc_check(ctx.seq, ctx.witness, tol)
        D = ctx.witness.defects()
        plots = [(f"nc.{name}", str(n), fmt(d[k])) for k, name in enumerate(("dx", "dxs", "dvalue"))
                 for n, d in zip(ctx.witness.ns, D)]
        return [("-", v)], plots, []
    if check == "nc-weak":
        w = ctx.witness
        return [("-", nc_weak_check(ctx.seq, w.points(), tol, x=w.limit[0]))], [], []
    if check == "tightness":
        w = ctx.witness
        return [("-", tightness_check(ctx.seq, w.points(), tol, xbar=w.limit[0], eps_ladder=sc.eps_ladder))], [], []
    if check == "sandwich":
        return [("-", domain_sandwich_check(ctx.seq, sc.test_points, sc.graph["h"], tol, sc.eps_ladder))], [], []
    if check == "main":
        v = main_theorem_check(ctx.seq, sc.test_points, ctx.witness, tol, T["tol_inf"], epi=ctx.epi,
                               eps_ladder=sc.eps_ladder, slope_epi=ctx.slope_epi)
        alerts = [f"main: definitive sub-verdicts disagree ({v.witnesses[0]})"] if v.consistent is False else []
        return [("all", v)] + [(p, v.parts[p]) for p in MAIN_PARTS if p in v.parts], [], alerts
    if check == "attouch":
        g = sc.graph
        v = attouch_check(ctx.seq, sc.test_points, ctx.witness, tol=tol, epi=ctx.epi, eps_ladder=sc.eps_ladder,
                          h=g["h"], box=g["box"], star_box=g["star_box"])
        alerts = [f"attouch: definitive sub-verdicts disagree ({v.witnesses[0]})"] if v.consistent is False else []
        return [("all", v)] + [(p, v.parts[p]) for p in ATTOUCH_PARTS], [], alerts
    if check == "comparison":
        out, alerts = [], []
        for pair in sc.comparison:
            f = spec_from_json(pair["f"], None, sc.dimension)
            g = spec_from_json(pair["g"], None, sc.dimension)
            v = comparison_check(f, g, pair["grid"], T["comparison"])
            if v.fails:
                alerts.append(f"comparison {pair['name']}: f < g under the hypotheses ({v.witnesses[0]})")
            out.append((pair["name"], v))
        return out, [], alerts
    if check == "flow":
        return [("-", flow_limit_check(ctx.traj, T["flow"]))], _flow_plots(ctx.traj), []
    if check == "energy":
        d = energy_identity_defect(ctx.traj)
        st = Status.HOLDS if d <= T["energy"] else Status.FAILS
        return [("-", Verdict(st, [{"defect": d}], {"energy": T["energy"]}))], [], []
    if check == "infimizing":
        g = spec_from_json(sc.flow["g"], None, sc.dimension)
        return [("-", infimizing_check(ctx.traj, g, ctx.flow_spec, T["flow"]))], [], []
    raise ValueError(f"unknown check {check!r}")


def _expectation(sc, check: str, part: str):
    exp = sc.expected.get(check)
    if isinstance(exp, dict):
        return exp.get(part)
    if exp is not None and (part in ("-", "all") or check == "comparison"):
        return exp
    return None


def _outcome(status: str, expected) -> str:
    if expected is None:
        return "-"
    if status != expected:
        return "mismatch"
    return "fails-as-expected" if status == Status.FAILS.value else "as-expected"


def run_scenario(sc, tol: float | None = None) -> ScenarioResult:
    """Run every configured check of a resolved scenario.

    ``tol`` overrides the scenario's main tolerance.  Exceptions raised by a
    check are recorded as ``error`` rows rather than propagated.
    """
    ctx = _Context(sc, sc.tolerances["tol"] if tol is None else tol)
    rows, plots, alerts, errors = [], [], [], []
    for check in sc.checks:
        try:
            verdicts, pl, al = _run_check(ctx, check)
        except Exception as exc:  # noqa: BLE001 - reported per check, never swallowed silently
            errors.append(f"{check}: {type(exc).__name__}: {exc}")
            exp = _expectation(sc, check, "-")
            rows.append((sc.id, check, "-", "error", exp or "", _outcome("error", exp), ""))
            continue
        for part, v in verdicts:
            exp = _expectation(sc, check, part)
            cons = "" if v.consistent is None else ("true" if v.consistent else "false")
            rows.append((sc.id, check, part, v.status.value, exp or "", _outcome(v.status.value, exp), cons))
        plots.extend(pl)
        alerts.extend(al)
    return ScenarioResult(sc.id, rows, plots, alerts, errors)


def _run_one(args):
    sc, tol = args
    return run_scenario(sc, tol)


def scenario_suite(corpus, jobs: int = 1, tol: float | None = None) -> Report:
    """Run scenarios (resolved objects or file paths) and aggregate in input order.

    Raises
    ------
    ScenarioError
        If a path does not hold a valid scenario or ids repeat.
    """
    scs = [c if isinstance(c, Scenario) else load_scenario(c) for c in corpus]
    seen = set()
    for sc in scs:
        if sc.id in seen:
            raise ScenarioError(sc.path, [f"duplicate scenario id {sc.id!r}"])
        seen.add(sc.id)
    if jobs <= 1 or len(scs) <= 1:
        return Report([run_scenario(sc, tol) for sc in scs])
    with ProcessPoolExecutor(max_workers=min(jobs, len(scs))) as pool:
        return Report(list(pool.map(_run_one, [(sc, tol) for sc in scs])))
