import math

import pytest

from epilab import extreal

INF = math.inf


def test_infinity_absorbs_finite_values():
    assert extreal.add(INF, 3.0) == INF
    assert extreal.add(-2.0, 3.0) == 1.0


@pytest.mark.parametrize("a", [INF, 1.0])
def test_subtracting_infinity_is_rejected(a):
    with pytest.raises(extreal.ExtRealError):
        extreal.sub(a, INF)


@pytest.mark.parametrize("bad", [-INF, math.nan])
def test_minus_infinity_and_nan_are_not_extended_reals(bad):
    with pytest.raises(extreal.ExtRealError):
        extreal.check(bad)


def test_order_puts_infinity_on_top():
    assert extreal.le(1e300, INF)
    assert extreal.le(INF, INF)
    assert not extreal.le(INF, 1e300)
    assert extreal.le(1.0, 1.0 + 1e-12)


def test_scaling_rules():
    assert extreal.scale(2.0, INF) == INF
    assert extreal.scale(0.0, 5.0) == 0.0
    with pytest.raises(extreal.ExtRealError):
        extreal.scale(0.0, INF)
    with pytest.raises(extreal.ExtRealError):
        extreal.scale(-1.0, 1.0)


def test_close_matches_infinities_symbolically():
    assert extreal.close(INF, INF, 0.0)
    assert not extreal.close(INF, 1e9, 1.0)
    assert extreal.close(1.0, 1.05, 0.1)
