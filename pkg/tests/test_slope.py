import math
from fractions import Fraction as Fr

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from epilab.funclib import (IndicatorBall, IndicatorBox, MaxAffine, NonnegScale, Quadratic, ScaledNorm, Sum, Tilt,
                            Translate)
from epilab.oracle1d import PWQuad1D
from epilab.slope import (NonMonotoneTrace, NotExactClass, SlopeFunction, default_ladder, min_norm_subgradient,
                          moreau_envelope, slope, slope_exact, slope_prox_estimate, trace_csv)

from corpus1d import corpus, sample_points

INF = math.inf
ABS = MaxAffine([[1.0], [-1.0]], [0.0, 0.0])
KINKED = MaxAffine([[1.0], [-1.0], [2.0]], [0.0, 0.0, -1.0])


def test_slope_exact_examples():
    assert slope_exact(Quadratic(np.eye(2)), [3.0, 4.0]).value == 5.0
    assert slope_exact(Quadratic(np.eye(2)), [3.0, 4.0]).method == "exact-quadratic"
    assert slope_exact(ABS, [0.0]).value == 0.0
    sv = slope_exact(KINKED, [1.0])
    assert sv.method == "exact-polyhedral"
    oracle = PWQuad1D.max_affine([(1, 0), (-1, 0), (2, -1)]).exact_slope(1)
    assert oracle == 1.0
    assert sv.value == pytest.approx(oracle, abs=1e-12)


def test_slope_exact_indicators():
    box = IndicatorBox([0.0, 0.0], [1.0, 1.0])
    assert slope_exact(box, [1.0, 0.5]).value == 0.0
    assert slope_exact(box, [2.0, 0.5]).value == INF
    tilted = Tilt([1.0, -2.0], box)
    # subdifferential at a corner is (1, -2) plus the normal cone there
    assert slope_exact(tilted, [1.0, 0.0]).value == pytest.approx(math.sqrt(5.0))
    assert slope_exact(tilted, [1.0, 1.0]).value == pytest.approx(1.0)
    assert slope_exact(tilted, [0.0, 1.0]).value == 0.0
    ball = Tilt([0.0, -1.0], IndicatorBall([0.0, 0.0], 1.0))
    assert slope_exact(ball, [0.0, 1.0]).value == pytest.approx(0.0, abs=1e-12)
    assert slope_exact(ball, [1.0, 0.0]).value == pytest.approx(1.0)


def test_not_exact_class_falls_back_to_ladder():
    from epilab.funclib import RestrictSegment
    f = RestrictSegment([-1.0, -1.0], [1.0, 1.0], Quadratic(np.eye(2)))
    with pytest.raises(NotExactClass):
        slope_exact(f, [0.5, 0.5])
    sv = slope(f, [0.5, 0.5])
    assert sv.method == "prox-ladder"
    # along the segment the restricted gradient is (0.5, 0.5)
    assert sv.value == pytest.approx(math.sqrt(0.5), abs=1e-6)


def test_ladder_examples():
    lad = (1.0, 0.5, 0.25)
    sv = slope_prox_estimate(ABS, [1.0], lad)
    assert [e for _, e in sv.trace] == [1.0, 1.0, 1.0]
    assert sv.value == 1.0
    # prox of x^2/2 is x / (1 + lam), so the estimate is 1 / (1 + lam)
    sv = slope_prox_estimate(Quadratic([[1.0]]), [1.0], lad)
    np.testing.assert_allclose([e for _, e in sv.trace], [1 / 2, 2 / 3, 4 / 5], rtol=1e-15)
    sv = slope_prox_estimate(IndicatorBox([0.0], [1.0]), [0.5], lad)
    assert [e for _, e in sv.trace] == [0.0, 0.0, 0.0]
    assert sv.value == 0.0


def test_ladder_limit_of_half_square():
    sv = slope_prox_estimate(Quadratic([[1.0]]), [1.0])
    assert sv.value == pytest.approx(1.0, abs=1e-8)


def test_ladder_validation():
    with pytest.raises(ValueError):
        slope_prox_estimate(ABS, [1.0], [0.5, 1.0])
    with pytest.raises(ValueError):
        slope_prox_estimate(ABS, [1.0], [1.0, 0.0])
    with pytest.raises(ValueError):
        slope_prox_estimate(ABS, [1.0], [])


def test_infinite_slope_outside_domain():
    sv = slope_prox_estimate(IndicatorBox([0.0], [1.0]), [2.0])
    assert sv.value == INF
    assert slope(IndicatorBox([0.0], [1.0]), [2.0]).value == INF


class _BrokenNorm(ScaledNorm):
    # shrinks by a fixed amount on small rungs: estimates drop
    def _prox(self, lam, x):
        return x - (lam if lam > 0.2 else lam / 2) * np.sign(x)


def test_nonmonotone_trace_is_reported():
    with pytest.raises(NonMonotoneTrace):
        slope_prox_estimate(_BrokenNorm(1.0, 1), [1.0], default_ladder(5))


def test_trace_csv():
    sv = slope_prox_estimate(Quadratic([[1.0]]), [1.0], (1.0, 0.5))
    assert trace_csv(sv) == "lambda,estimate\n1,0.5\n0.5,0.666666666667\n"


def test_min_norm_subgradient_examples():
    m = min_norm_subgradient(Quadratic(np.eye(2)), [3.0, 4.0])
    np.testing.assert_allclose(m.vector, [3.0, 4.0])
    assert m.norm == 5.0
    assert min_norm_subgradient(ABS, [0.0]).vector[0] == 0.0
    # oracle: exact subdifferential endpoint of |x| at -2 closest to 0
    sub = PWQuad1D.max_affine([(1, 0), (-1, 0)]).exact_subdiff(-2)
    assert sub.lo == sub.hi == -1
    assert min_norm_subgradient(ABS, [-2.0]).vector[0] == -1.0
    with pytest.raises(ValueError):
        min_norm_subgradient(IndicatorBox([0.0], [1.0]), [2.0])


def _exact_2d():
    return [
        Quadratic([[2.0, 0.5], [0.5, 1.0]], [1.0, -1.0]),
        ScaledNorm(1.5, 2),
        MaxAffine([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0], [1.0, 1.0]], [0.0, 0.0, 0.0, 0.0, -0.5]),
        NonnegScale(2.0, Translate([1.0, -1.0], ScaledNorm(1.0, 2))),
        Tilt([0.5, -0.5], MaxAffine([[1.0, 1.0], [-1.0, 0.0]], [0.0, 1.0])),
        Sum([Quadratic(np.diag([1.0, 3.0]), [0.5, 0.0]), IndicatorBox([0.0, 0.0], [1.0, 1.0])]),
        Sum([Quadratic(np.eye(2)), ScaledNorm(1.0, 2)]),
    ]


def test_min_norm_subgradient_is_a_subgradient():
    rng = np.random.default_rng(5)
    for f in _exact_2d():
        for x in rng.uniform(-1.5, 1.5, (10, 2)):
            if not math.isfinite(f(x)):
                continue
            m = min_norm_subgradient(f, x)
            assert m.norm == pytest.approx(np.linalg.norm(m.vector))
            assert m.norm == pytest.approx(slope_exact(f, x).value, abs=1e-12)
            Y = rng.uniform(-3, 3, (200, 2))
            fy = f.values(Y)
            fin = np.isfinite(fy)
            assert np.all(fy[fin] >= f(x) + (Y[fin] - x) @ m.vector - 1e-8)


@pytest.mark.parametrize("f", _exact_2d(), ids=lambda f: f.kind)
def test_estimate_agrees_with_exact_in_2d(f):
    rng = np.random.default_rng(6)
    lad = default_ladder(20)
    pts = list(rng.uniform(-1.5, 1.5, (8, 2))) + [np.zeros(2), np.array([1.0, 0.0])]
    for x in pts:
        ex = slope_exact(f, x).value
        est = slope_prox_estimate(f, x, lad)
        e = [v for _, v in est.trace]
        assert all(b >= a - 1e-9 * max(1, a) for a, b in zip(e, e[1:]))
        if math.isfinite(ex):
            assert est.value == pytest.approx(ex, abs=1e-5)


def test_moreau_examples():
    assert moreau_envelope(Quadratic([[1.0]]), 1.0, [2.0]) == pytest.approx(1.0)
    assert moreau_envelope(ABS, 1.0, [0.5]) == pytest.approx(0.125)
    # grid oracles: min_u f(u) + (u - x)^2 / (2 lam)
    U = np.linspace(-4, 4, 800001)
    assert np.min(0.5 * U ** 2 + (U - 2.0) ** 2 / 2) == pytest.approx(1.0, abs=1e-9)
    assert np.min(np.abs(U) + (U - 0.5) ** 2 / 2) == pytest.approx(0.125, abs=1e-9)
    f = Sum([Quadratic([[1.0]], [-1.0]), ABS])
    assert moreau_envelope(f, 0.7, [0.0]) == pytest.approx(0.0)  # 0 is a minimizer


@settings(max_examples=100, deadline=None)
@given(i=st.integers(0, 27), x=st.floats(-3, 3))
def test_moreau_envelope_increases_to_f(i, x):
    f = corpus()[i][1]
    fx = f([x])
    vals = [moreau_envelope(f, lam, [x]) for lam in (1.0, 0.25, 1 / 16, 1 / 256)]
    assert all(b >= a - 1e-12 * (1 + abs(a)) for a, b in zip(vals, vals[1:]))
    if math.isfinite(fx):
        assert all(v <= fx + 1e-12 * (1 + abs(fx)) for v in vals)


@pytest.mark.parametrize("name,spec,oracle", corpus(), ids=[c[0] for c in corpus()])
def test_zero_slope_iff_argmin_1d(name, spec, oracle):
    r = oracle.exact_inf()
    if not r.attained:
        return
    lo, hi = r.argmin
    pts = [float(v) for v in (lo, hi) if math.isfinite(v)]
    pts += [float(Fr(k, 8)) for k in range(-32, 33)]
    for x in pts:
        if not oracle.in_domain(x):
            continue
        in_argmin = lo <= Fr(x) <= hi
        assert (slope_exact(spec, [x]).value == 0.0) == in_argmin, x


def test_zero_slope_iff_argmin_quadratic():
    f = Quadratic([[2.0, 0.5], [0.5, 1.0]], [1.0, -1.0])
    xstar = np.linalg.solve(f.Q, -f.b)
    assert slope_exact(f, xstar).value == pytest.approx(0.0, abs=1e-14)
    for x in np.random.default_rng(7).normal(size=(10, 2)):
        assert slope_exact(f, x).value > 0


@pytest.mark.parametrize("name,spec,oracle", corpus(), ids=[c[0] for c in corpus()])
def test_slope_lower_semicontinuity_probe(name, spec, oracle):
    rng = np.random.default_rng(8)
    for x in sample_points(oracle, rng, 20):
        s0 = slope_exact(spec, [x]).value
        for d in (-1.0, 1.0):
            # liminf estimated on the last rungs; smooth pieces move by O(t)
            near = [slope_exact(spec, [x + d * t]).value for t in np.geomspace(1e-7, 1e-10, 4)]
            assert min(near) >= s0 - 1e-5


def test_slope_function_oracle():
    sf = SlopeFunction(Quadratic([[1.0]]))
    np.testing.assert_allclose(sf.values(np.array([[-2.0], [0.5]])), [2.0, 0.5])
    sa = SlopeFunction(ABS)
    assert sa([0.0]) == 0.0 and sa([3.0]) == 1.0
