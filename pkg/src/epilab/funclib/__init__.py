"""Proper convex lsc functions on R^d as composable builder trees."""

from .conjugate import ConjugateGrid, conjugate_grid, conjugate_grid_detail, conjugate_value, fenchel_subgradient_check
from .family import FunctionSeq
from .infimum import SpecInf, spec_inf
from .nodes import (ACTIVE_TOL, Constant, ConvexSpec, DimensionError, DomainInfo, IndicatorBall, IndicatorBox,
                    MaxAffine, NoProxPath, NonnegScale, PWQ1D, Quadratic, RestrictSegment, ScaledNorm, SpecError,
                    Sum, Tilt, Translate, as_point, bisect_prox_1d, evaluate, prox, walk)
from .serialize import KINDS, eval_expr, spec_from_json, spec_to_json

__all__ = [
    "ACTIVE_TOL", "ConjugateGrid", "Constant", "ConvexSpec", "DimensionError", "DomainInfo", "FunctionSeq",
    "IndicatorBall", "IndicatorBox", "KINDS", "MaxAffine", "NoProxPath", "NonnegScale", "PWQ1D", "Quadratic",
    "RestrictSegment", "ScaledNorm", "SpecError", "SpecInf", "Sum", "Tilt", "Translate", "as_point",
    "bisect_prox_1d", "conjugate_grid", "conjugate_grid_detail", "conjugate_value", "eval_expr", "evaluate",
    "fenchel_subgradient_check", "prox", "spec_from_json", "spec_inf", "spec_to_json", "walk",
]
