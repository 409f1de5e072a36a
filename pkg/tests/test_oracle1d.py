import math
from fractions import Fraction as Fr

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corpus1d import corpus, sample_points
from epilab.funclib import evaluate, prox
from epilab.oracle1d import (Interval, OracleError, PWQuad1D, UnboundedBelowError, exact_conjugate, exact_inf,
                             exact_prox, exact_slope, exact_subdiff, huber)
from epilab.slope import slope_exact

INF = math.inf
ABS = PWQuad1D.max_affine([(1, 0), (-1, 0)])
HALF_SQ = PWQuad1D.quadratic(Fr(1, 2))
BOX01 = PWQuad1D.indicator(0, 1)


# ----------------------------------------------------------------------
# construction


def test_convexity_violation_is_rejected():
    with pytest.raises(OracleError):
        PWQuad1D.build(-INF, INF, [0], [(0, 1, 0), (0, -1, 0)])


def test_discontinuity_is_rejected():
    with pytest.raises(OracleError):
        PWQuad1D.build(-INF, INF, [0], [(0, -1, 0), (0, 1, 1)])


def test_unbounded_below_needs_opt_in():
    with pytest.raises(UnboundedBelowError):
        PWQuad1D.build(-INF, INF, [], [(0, 1, 0)])
    g = PWQuad1D.build(-INF, INF, [], [(0, 1, 0)], allow_unbounded_below=True)
    with pytest.raises(UnboundedBelowError):
        exact_inf(g)


def test_identical_neighbours_are_merged():
    g = PWQuad1D.build(-INF, INF, [0, 1], [(0, 1, 0), (0, 1, 0), (0, 1, 0)], allow_unbounded_below=True)
    assert g.breakpoints == ()


# ----------------------------------------------------------------------
# documented examples


@pytest.mark.parametrize("g, x, expected", [
    (ABS, 0, Interval(-1.0, 1.0)),
    (HALF_SQ, 3, Interval(3.0, 3.0)),
    (BOX01, 1, Interval(0.0, INF)),
])
def test_exact_subdiff_examples(g, x, expected):
    assert exact_subdiff(g, x) == expected


def test_subdifferential_is_empty_outside_domain():
    assert exact_subdiff(BOX01, 1.5) is None


@pytest.mark.parametrize("g, x, expected", [(ABS, 0, 0.0), (ABS, 2, 1.0), (BOX01, 1.5, INF)])
def test_exact_slope_examples(g, x, expected):
    assert exact_slope(g, x) == expected


@pytest.mark.parametrize("g, lam, x, expected", [(ABS, 0.5, 1, 0.5), (HALF_SQ, 2, 3, 1.0), (BOX01, 7, -4, 0.0)])
def test_exact_prox_examples(g, lam, x, expected):
    assert exact_prox(g, lam, x) == expected


def test_prox_is_exact_rational():
    assert HALF_SQ.prox_exact(Fr(1, 3), Fr(1)) == Fr(3, 4)


def test_conjugate_of_half_square_is_itself():
    assert exact_conjugate(HALF_SQ) == HALF_SQ


def test_conjugate_of_abs_is_indicator_of_unit_interval():
    conj = exact_conjugate(ABS)
    assert conj == PWQuad1D.indicator(-1, 1)
    # grid oracle: inside [-1, 1] the sup is 0, outside it grows with the box
    X = np.linspace(-50.0, 50.0, 200001)
    for s in np.linspace(-0.95, 0.95, 20):
        assert float(np.max(s * X - np.abs(X))) == pytest.approx(conj(s), abs=1e-9)
    assert float(np.max(1.5 * X - np.abs(X))) > 20


def test_conjugate_of_unit_box_indicator_is_positive_part():
    conj = exact_conjugate(BOX01)
    assert conj == PWQuad1D.max_affine([(0, 0), (1, 0)])
    for s in np.linspace(-3, 3, 20):
        X = np.linspace(0, 1, 10001)
        assert float(np.max(s * X)) == pytest.approx(conj(s), abs=1e-12)


@pytest.mark.parametrize("g, value, argmin", [
    (ABS.translate(2), 0.0, Interval(2.0, 2.0)),
    (PWQuad1D.max_affine([(0, 0), (-1, 0)]), 0.0, Interval(0.0, INF)),
])
def test_exact_inf_examples(g, value, argmin):
    r = exact_inf(g)
    assert r.value == value and r.argmin == argmin and r.attained


def test_huber_values_and_slopes():
    h = huber(Fr(1, 2))
    assert h(0.25) == pytest.approx(0.0625)
    assert h(2.0) == pytest.approx(1.75)
    assert exact_slope(h, 0.25) == pytest.approx(0.5)
    assert exact_slope(h, -3) == 1.0


def test_json_roundtrip_is_exact():
    for _, _, g in corpus():
        assert PWQuad1D.from_json(g.to_json()) == g


# ----------------------------------------------------------------------
# invariants


@pytest.mark.parametrize("name, spec, g", corpus(), ids=[c[0] for c in corpus()])
def test_generic_paths_agree_with_oracle(name, spec, g):
    rng = np.random.default_rng(7)
    for x in sample_points(g, rng):
        fv, fo = evaluate(spec, [x]), g(x)
        assert fv == fo or abs(fv - fo) <= 1e-10 * (1 + abs(fo))
        lam = float(rng.uniform(0.05, 3.0))
        assert abs(prox(spec, lam, [x])[0] - exact_prox(g, lam, x)) <= 1e-10
        sv, so = slope_exact(spec, [x]).value, exact_slope(g, x)
        assert sv == so or abs(sv - so) <= 1e-10


@pytest.mark.parametrize("name, spec, g", corpus(), ids=[c[0] for c in corpus()])
def test_conjugate_is_an_involution(name, spec, g):
    assert exact_conjugate(exact_conjugate(g)) == g


_CORPUS = corpus()


@settings(max_examples=200, deadline=None)
@given(i=st.integers(0, len(_CORPUS) - 1), x=st.fractions(-5, 5, max_denominator=64),
       s=st.fractions(-5, 5, max_denominator=64))
def test_fenchel_young(i, x, s):
    g = _CORPUS[i][2]
    gs = exact_conjugate(g)
    if not (g.in_domain(x) and gs.in_domain(s)):
        return
    gap = g.value_exact(x) + gs.value_exact(s) - x * s
    assert gap >= 0
    d = g.derivatives_exact(x)
    assert (gap == 0) == (d is not None and d[0] <= s <= d[1])


@settings(max_examples=200, deadline=None)
@given(i=st.integers(0, len(_CORPUS) - 1), x=st.fractions(-5, 5, max_denominator=64),
       lam=st.fractions(Fr(1, 16), 4, max_denominator=16))
def test_moreau_decomposition(i, x, lam):
    # prox_{lam g}(x) + lam prox_{g*/lam}(x/lam) = x, with prox_{g*/lam}(y) = prox_{(1/lam) g*}(y)
    g = _CORPUS[i][2]
    gs = exact_conjugate(g)
    assert g.prox_exact(lam, x) + lam * gs.prox_exact(1 / lam, x / lam) == x


@settings(max_examples=200, deadline=None)
@given(i=st.integers(0, len(_CORPUS) - 1), x=st.fractions(-5, 5, max_denominator=64))
def test_zero_slope_iff_minimizer(i, x):
    g = _CORPUS[i][2]
    r = exact_inf(g)
    assert (exact_slope(g, x) == 0) == (r.argmin.lo <= x <= r.argmin.hi)
