import math
from fractions import Fraction as Fr

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from epilab.funclib import (Constant, FunctionSeq, IndicatorBox, MaxAffine, Quadratic, ScaledNorm, Sum,
                            Translate)
from epilab.scenario import corpus_paths, load_scenario
from epilab.setconv import (SampledSet, default_n_ladder, domain_sandwich_check, epi_converges, epi_csv, epi_limits,
                            epi_lower_limit, epi_upper_limit, graph_sample, inner_minima, pk_liminf_defect,
                            pk_limsup_defect, tightness_check)
from epilab.slope import NotExactClass
from epilab.verdict import Status

from corpus1d import corpus

INF = math.inf
H = 0.01
EPS = tuple(2.0 ** -j for j in range(9))
LADDER = default_n_ladder()


def _pts(*vals):
    return SampledSet.from_points(np.array(vals, dtype=float).reshape(len(vals), -1), H)


def _circle(r, h=H):
    k = int(math.ceil(2 * math.pi * r / h))
    t = np.linspace(0, 2 * math.pi, k, endpoint=False)
    return SampledSet.from_points(np.c_[r * np.cos(t), r * np.sin(t)], h)


def _segment(a, b, h=H):
    return SampledSet.from_points(np.linspace(a, b, int(math.ceil((b - a) / h)) + 1)[:, None], h)


# ---------------------------------------------------------------------------
# Painleve-Kuratowski defects


def test_liminf_examples():
    seq = [_pts(1.0 / n) for n in range(1, 61)]
    assert pk_liminf_defect(_pts(0.0), seq) <= 1 / 40
    assert pk_liminf_defect(_pts(0.0, 1.0), seq) == pytest.approx(1.0, abs=1 / 40)


def test_liminf_circles():
    seq = [_circle(1 + 1.0 / n) for n in range(1, 61)]
    d = pk_liminf_defect(_circle(1.0), seq)
    # oracle: the radial distance to the circle of radius 1 + 1/n is 1/n, the samples add at most h
    assert d <= 1 / 41 + 2 * H
    assert d >= 1 / 41 - 1e-12


def test_limsup_examples():
    seq = [_pts(float(n % 2)) for n in range(1, 31)]
    assert pk_limsup_defect(_pts(0.0, 1.0), seq) <= H
    assert pk_limsup_defect(_pts(0.0), seq) == pytest.approx(1.0)
    escaping = [_pts(float(n)) for n in range(1, 31)]
    assert pk_limsup_defect(_pts(0.0), escaping) == 0.0


def test_limsup_segments():
    seq = [_segment(0.0, 1 + 1.0 / n) for n in range(1, 61)]
    d = pk_limsup_defect(_segment(0.0, 1.0), seq)
    # oracle: interval distance of [0, 1 + 1/n] to [0, 1] is 1/n
    assert d <= 1 / 40 + 2 * H
    assert pk_liminf_defect(_segment(0.0, 1.0), seq) <= H


def test_pk_needs_six_members():
    seq = [_pts(1.0 / n) for n in range(1, 6)]
    with pytest.raises(ValueError):
        pk_liminf_defect(_pts(0.0), seq)
    with pytest.raises(ValueError):
        pk_limsup_defect(_pts(0.0), seq)


def test_sampled_set_validation():
    with pytest.raises(ValueError):
        SampledSet(np.zeros((1, 1)), 0.0, ([0.0], [1.0]))
    with pytest.raises(ValueError):
        SampledSet(np.array([[2.0]]), 0.1, ([0.0], [1.0]))


# ---------------------------------------------------------------------------
# graph samples


@pytest.mark.parametrize("name,spec,oracle", corpus(), ids=[c[0] for c in corpus()])
def test_graph_sample_triples_are_subgradients(name, spec, oracle):
    G = graph_sample(spec, h=0.05)
    probes = np.linspace(-4, 4, 801)[:, None]
    assert G.max_subgradient_violation(spec, probes) <= 1e-9


def test_graph_sample_2d_quadratic():
    f = Quadratic([[2.0, 0.5], [0.5, 1.0]], [1.0, -1.0])
    G = graph_sample(f, h=0.1, box=1.0, star_box=3.0)
    np.testing.assert_allclose(G.XS, G.X @ f.Q + f.b)
    assert np.all(np.abs(G.XS) <= 3.0)
    with pytest.raises(NotExactClass):
        graph_sample(ScaledNorm(1.0, 2))


def test_graph_sample_of_abs_has_vertical_segment():
    G = graph_sample(MaxAffine([[1.0], [-1.0]], [0.0, 0.0]), h=0.01)
    at0 = G.XS[G.X[:, 0] == 0.0, 0]
    assert at0.min() == -1.0 and at0.max() == 1.0
    assert np.max(np.diff(np.sort(at0))) <= 0.01 + 1e-12


# ---------------------------------------------------------------------------
# epigraphical limits


def _shift_abs():
    return FunctionSeq(lambda n: Translate([1.0 / n], ScaledNorm(1.0, 1)), ScaledNorm(1.0, 1), LADDER)


def _steep():
    return FunctionSeq(lambda n: Quadratic([[2.0 * n]]), IndicatorBox([0.0], [0.0]), LADDER)


def test_epi_limits_of_shifted_abs():
    seq = _shift_abs()
    est = epi_lower_limit(seq, [0.0], EPS)
    assert est.lower == pytest.approx(0.0, abs=1e-12)
    assert epi_upper_limit(seq, [0.0], EPS).upper == pytest.approx(0.0, abs=1e-12)
    # oracle: inf over |y| <= eps of |y - 1/n| is max(0, 1/n - eps)
    M = inner_minima(seq, [0.0], EPS, est.tail)
    exact = np.maximum(0.0, 1.0 / np.array(est.tail)[None, :] - np.array(EPS)[:, None])
    np.testing.assert_allclose(M, exact, atol=1e-12)


def test_epi_limits_of_constant_n():
    seq = FunctionSeq(lambda n: Constant(float(n), 1), Constant(0.0, 1), LADDER)
    for x in (-1.0, 0.0, 2.5):
        est = epi_limits(seq, [x], EPS)
        assert est.lower == INF and est.upper == INF


def test_epi_limits_of_steep_quadratics():
    seq = _steep()
    assert epi_limits(seq, [0.0], EPS).lower == 0.0
    est = epi_limits(seq, [0.3], EPS)
    assert est.lower == INF and est.upper == INF
    # oracle: min over |y - x| <= eps of n y^2 is n max(0, |x| - eps)^2
    M = inner_minima(seq, [0.3], EPS, est.tail)
    n = np.array(est.tail, dtype=float)[None, :]
    exact = n * np.maximum(0.0, 0.3 - np.array(EPS)[:, None]) ** 2
    np.testing.assert_allclose(M, exact, rtol=1e-12, atol=1e-9)


def test_epi_limits_of_alternating_constants():
    seq = FunctionSeq(lambda n: Constant(float(n % 2), 1), Constant(0.0, 1), tuple(range(1, 31)))
    est = epi_limits(seq, [0.4], EPS)
    assert est.upper == 1.0
    assert est.lower == 0.0


def test_constant_sequence_identity():
    for name, spec, oracle in corpus():
        seq = FunctionSeq(lambda n, s=spec: s, spec, (1, 2, 3, 4, 5, 6))
        for x in (-1.25, 0.0, 0.5, 1.0, 2.0):
            est = epi_limits(seq, [x], EPS)
            fx = spec([x])
            assert est.lower == est.upper
            if fx == INF:
                assert est.lower == INF
                continue
            # oracle: exact infimum over the finest ball bounds the estimate from below
            e = Fr(EPS[-1])
            ball = oracle.restrict(max(oracle.lo, Fr(x) - e), min(oracle.hi, Fr(x) + e))
            assert float(ball.exact_inf().value) - 1e-12 <= est.lower <= fx + 1e-12
        # the finest radius times the local slope must stay below tol
        fine = tuple(2.0 ** -j for j in range(13))
        assert epi_converges(seq, [[-0.75], [0.25], [1.0]], eps_ladder=fine).status is Status.HOLDS, name


def test_epi_limits_ladder_validation():
    with pytest.raises(ValueError):
        epi_limits(_shift_abs(), [0.0], ())
    with pytest.raises(ValueError):
        epi_limits(_shift_abs(), [0.0], (0.5, 1.0))
    with pytest.raises(ValueError):
        epi_limits(_shift_abs(), [0.0], EPS, (4, 2, 8))


@settings(max_examples=60, deadline=None)
@given(i=st.integers(0, 27), shift=st.floats(-1, 1), x=st.floats(-2, 2))
def test_lower_never_exceeds_upper(i, shift, x):
    spec = corpus()[i][1]
    seq = FunctionSeq(lambda n: Translate([shift / n], spec), spec, (1, 2, 4, 8, 16, 32))
    est = epi_limits(seq, [x], EPS[:5])
    assert est.lower <= est.upper + 1e-12


# ---------------------------------------------------------------------------
# verdicts


def test_epi_converges_examples():
    v = epi_converges(_shift_abs(), np.linspace(-1, 1, 21)[:, None], eps_ladder=EPS)
    assert v.status is Status.HOLDS
    seq = FunctionSeq(lambda n: Constant(float(n), 1), Constant(0.0, 1), LADDER)
    v = epi_converges(seq, [[-1.0], [0.0], [1.0]], eps_ladder=EPS)
    assert v.status is Status.FAILS
    assert all(w["status"] == "fails" for w in v.witnesses)
    v = epi_converges(_steep(), [[-0.5], [0.0], [0.5]], eps_ladder=EPS)
    assert v.status is Status.HOLDS


def test_epi_csv():
    v = epi_converges(_shift_abs(), [[0.0], [1.0]], eps_ladder=EPS)
    lines = epi_csv("abs-shift", v).splitlines()
    assert lines[0] == "scenario,check,point,f_l,f_u,f,status"
    assert lines[1].startswith("abs-shift,epi,0,")
    assert lines[2].endswith(",1,holds")


def _bundled(ids):
    return [sc for sc in (load_scenario(p) for p in corpus_paths()) if sc.id in ids]


def test_enlarging_the_index_ladder_keeps_holds():
    for sc in _bundled({"abs-shift", "quad-lift", "huber-abs", "box-shift", "const-n"}):
        seq = sc.family()
        short = epi_converges(seq, sc.test_points, sc.tolerances["tol"], sc.eps_ladder, seq.ladder[:12])
        full = epi_converges(seq, sc.test_points, sc.tolerances["tol"], sc.eps_ladder, seq.ladder)
        if short.status is Status.HOLDS:
            assert full.status is not Status.FAILS, sc.id


# ---------------------------------------------------------------------------
# lemma-level diagnostics


def test_tightness_examples():
    half_sq = FunctionSeq(lambda n: Quadratic([[1.0]]), Quadratic([[1.0]]), LADDER)
    wit = [(n, [1.0 / n]) for n in LADDER]
    assert tightness_check(half_sq, wit, xbar=[0.0], eps_ladder=EPS).status is Status.HOLDS
    assert tightness_check(_shift_abs(), wit, xbar=[0.0], eps_ladder=EPS).status is Status.HOLDS
    v = tightness_check(_steep(), wit, xbar=[0.0], eps_ladder=EPS)
    # slopes s(x_n) = 2n (1/n) = 2 stay bounded and liminf f_n(x_n) = liminf 1/n = 0
    assert v.status is Status.HOLDS
    assert v.witnesses[0]["max_slope"] == pytest.approx(2.0)
    assert v.witnesses[0]["liminf"] == pytest.approx(0.0, abs=1e-6)


def test_tightness_unbounded_slopes():
    seq = FunctionSeq(lambda n: Sum([Quadratic([[2.0 * n * n]])]), Quadratic([[0.0]]), LADDER)
    v = tightness_check(seq, [(n, [1.0 / n]) for n in LADDER], xbar=[0.0], eps_ladder=EPS)
    assert v.status is Status.PRECONDITION_FAILED


def test_tightness_needs_witness():
    with pytest.raises(ValueError):
        tightness_check(_shift_abs(), [(1, [0.0])])


def test_domain_sandwich():
    assert domain_sandwich_check(_shift_abs(), np.linspace(-1, 1, 9)[:, None], eps_ladder=EPS).holds
    assert domain_sandwich_check(_steep(), [[-0.5], [0.0], [0.5]], eps_ladder=EPS).holds
    box = FunctionSeq(lambda n: IndicatorBox([1.0 / n], [1.0]), IndicatorBox([0.0], [1.0]), LADDER)
    assert domain_sandwich_check(box, [[-0.5], [0.0], [0.5], [1.5]], eps_ladder=EPS).holds
    # when the values escape to +inf the inclusion can break: f_n = n has f_l = +inf on dom s_f = R
    seq = FunctionSeq(lambda n: Constant(float(n), 1), Constant(0.0, 1), LADDER)
    assert domain_sandwich_check(seq, [[0.0]], eps_ladder=EPS).status is Status.FAILS
