"""JSON dialect for builder trees.

A document is a node ``{"kind": ..., parameters...}``; the root additionally
carries ``"dimension"``.  Numeric parameters may be numbers, the strings
``"inf"``/``"-inf"``, or arithmetic expressions in the sequence index
``n`` (``"1/n"``, ``"1 + 1/n"``, ``"n**2"``), which is how a single document
describes a whole family ``n -> f_n``.  Expressions are evaluated with exact
rationals, so ``"1/3"`` inside a ``pwq1d`` node stays exactly one third.
"""

from __future__ import annotations

import ast
import math
import operator
from fractions import Fraction

import numpy as np

from ..oracle1d import PWQuad1D, huber
from .nodes import (Constant, ConvexSpec, IndicatorBall, IndicatorBox, MaxAffine, NonnegScale,
                    PWQ1D, Quadratic, RestrictSegment, ScaledNorm, SpecError, Sum, Tilt, Translate)

KINDS = ("quadratic", "scaled_norm", "max_affine", "indicator_box", "indicator_ball", "constant",
         "sum", "scale", "tilt", "translate", "restrict_segment", "pwq1d", "huber")

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_FUNCS = {"sqrt": math.sqrt, "exp": math.exp, "log": math.log, "abs": abs}


def eval_expr(expr, n=None):
    """Evaluate a numeric parameter; ``n`` is the family index (or ``None``)."""
    if isinstance(expr, bool):
        raise SpecError(f"not a number: {expr!r}")
    if isinstance(expr, int):
        return Fraction(expr)
    if isinstance(expr, float):
        return expr if math.isinf(expr) else Fraction(expr)
    if not isinstance(expr, str):
        raise SpecError(f"not a number: {expr!r}")
    s = expr.strip()
    if s.lower() in ("inf", "+inf", "infinity"):
        return math.inf
    if s.lower() in ("-inf", "-infinity"):
        return -math.inf
    try:
        tree = ast.parse(s, mode="eval")
    except SyntaxError as exc:
        raise SpecError(f"bad expression {expr!r}") from exc

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) \
                and not isinstance(node.value, bool):
            return Fraction(str(node.value))
        if isinstance(node, ast.Name):
            if node.id == "n":
                if n is None:
                    raise SpecError(f"expression {expr!r} needs the family index n")
                return Fraction(n)
            if node.id == "inf":
                return math.inf
            raise SpecError(f"unknown name {node.id!r} in {expr!r}")
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            a, b = ev(node.left), ev(node.right)
            if isinstance(node.op, ast.Pow) and isinstance(b, Fraction) and b.denominator != 1:
                return float(a) ** float(b)
            return _BINOPS[type(node.op)](a, b)
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _FUNCS \
                and len(node.args) == 1:
            return _FUNCS[node.func.id](float(ev(node.args[0])))
        raise SpecError(f"unsupported syntax in {expr!r}")

    try:
        return ev(tree)
    except ZeroDivisionError as exc:
        raise SpecError(f"division by zero in {expr!r}") from exc


def _num(v, n) -> float:
    return float(eval_expr(v, n))


def _vec(v, n, dim=None) -> np.ndarray:
    if isinstance(v, list):
        return np.array([_num(x, n) for x in v], dtype=float)
    a = np.array([_num(v, n)])
    return np.full(dim, a[0]) if dim else a


def _mat(v, n, dim) -> np.ndarray:
    if isinstance(v, list) and v and isinstance(v[0], list):
        return np.array([[_num(x, n) for x in row] for row in v], dtype=float)
    if isinstance(v, list):  # diagonal
        return np.diag([_num(x, n) for x in v])
    return _num(v, n) * np.eye(dim)


def _require(doc, *keys):
    for k in keys:
        if k not in doc:
            raise SpecError(f"node of kind {doc.get('kind')!r} is missing field {k!r}")


def spec_from_json(doc: dict, n=None, dim: int | None = None) -> ConvexSpec:
    """Build a tree; ``dim`` defaults to the document's ``"dimension"``."""
    if not isinstance(doc, dict) or "kind" not in doc:
        raise SpecError("a node must be an object with a 'kind'")
    if dim is None:
        if "dimension" not in doc:
            raise SpecError("root node must declare 'dimension'")
        dim = int(doc["dimension"])
    kind = doc["kind"]
    if kind == "quadratic":
        _require(doc, "Q")
        Q = _mat(doc["Q"], n, dim)
        b = _vec(doc.get("b", 0), n, dim)
        node = Quadratic(Q, b, _num(doc.get("c", 0), n))
    elif kind == "scaled_norm":
        node = ScaledNorm(_num(doc.get("alpha", 1), n), dim)
    elif kind == "max_affine":
        _require(doc, "pieces")
        G = np.array([_vec(p["g"], n) for p in doc["pieces"]], dtype=float).reshape(len(doc["pieces"]), -1)
        beta = [_num(p.get("beta", 0), n) for p in doc["pieces"]]
        node = MaxAffine(G, beta)
    elif kind == "indicator_box":
        _require(doc, "lo", "hi")
        node = IndicatorBox(_vec(doc["lo"], n, dim), _vec(doc["hi"], n, dim))
    elif kind == "indicator_ball":
        _require(doc, "radius")
        node = IndicatorBall(_vec(doc.get("center", 0), n, dim), _num(doc["radius"], n))
    elif kind == "constant":
        node = Constant(_num(doc.get("c", 0), n), dim)
    elif kind == "sum":
        _require(doc, "terms")
        node = Sum([spec_from_json(t, n, dim) for t in doc["terms"]])
    elif kind == "scale":
        _require(doc, "alpha", "inner")
        node = NonnegScale(_num(doc["alpha"], n), spec_from_json(doc["inner"], n, dim))
    elif kind == "tilt":
        _require(doc, "v", "inner")
        node = Tilt(_vec(doc["v"], n, dim), spec_from_json(doc["inner"], n, dim))
    elif kind == "translate":
        _require(doc, "shift", "inner")
        node = Translate(_vec(doc["shift"], n, dim), spec_from_json(doc["inner"], n, dim))
    elif kind == "restrict_segment":
        _require(doc, "a", "b", "inner")
        node = RestrictSegment(_vec(doc["a"], n, dim), _vec(doc["b"], n, dim), spec_from_json(doc["inner"], n, dim))
    elif kind == "pwq1d":
        _require(doc, "pieces")
        ev = lambda v: eval_expr(v, n)  # noqa: E731
        node = PWQ1D(PWQuad1D.build(ev(doc.get("lo", "-inf")), ev(doc.get("hi", "inf")),
                                    [ev(t) for t in doc.get("breakpoints", [])],
                                    [[ev(v) for v in p] for p in doc["pieces"]],
                                    allow_unbounded_below=True))
    elif kind == "huber":
        _require(doc, "mu")
        node = PWQ1D(huber(eval_expr(doc["mu"], n)))
    else:
        raise SpecError(f"unknown builder kind {kind!r}")
    if node.dim != dim:
        raise SpecError(f"node of kind {kind!r} has dimension {node.dim}, expected {dim}")
    return node


def _enc(v: float):
    v = float(v)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


def _enc_vec(a) -> list:
    return [_enc(x) for x in np.asarray(a).reshape(-1)]


def spec_to_json(spec: ConvexSpec, root: bool = True) -> dict:
    if isinstance(spec, Quadratic):
        doc = {"kind": "quadratic", "Q": spec.Q.tolist(), "b": _enc_vec(spec.b), "c": spec.c}
    elif isinstance(spec, ScaledNorm):
        doc = {"kind": "scaled_norm", "alpha": spec.alpha}
    elif isinstance(spec, MaxAffine):
        doc = {"kind": "max_affine",
               "pieces": [{"g": _enc_vec(g), "beta": float(b)} for g, b in zip(spec.G, spec.beta)]}
    elif isinstance(spec, IndicatorBox):
        doc = {"kind": "indicator_box", "lo": _enc_vec(spec.lo), "hi": _enc_vec(spec.hi)}
    elif isinstance(spec, IndicatorBall):
        doc = {"kind": "indicator_ball", "center": _enc_vec(spec.center), "radius": spec.radius}
    elif isinstance(spec, Constant):
        doc = {"kind": "constant", "c": spec.c}
    elif isinstance(spec, Sum):
        doc = {"kind": "sum", "terms": [spec_to_json(t, False) for t in spec.terms]}
    elif isinstance(spec, NonnegScale):
        doc = {"kind": "scale", "alpha": spec.alpha, "inner": spec_to_json(spec.inner, False)}
    elif isinstance(spec, Tilt):
        doc = {"kind": "tilt", "v": _enc_vec(spec.v), "inner": spec_to_json(spec.inner, False)}
    elif isinstance(spec, Translate):
        doc = {"kind": "translate", "shift": _enc_vec(spec.z), "inner": spec_to_json(spec.inner, False)}
    elif isinstance(spec, RestrictSegment):
        doc = {"kind": "restrict_segment", "a": _enc_vec(spec.a), "b": _enc_vec(spec.b),
               "inner": spec_to_json(spec.inner, False)}
    elif isinstance(spec, PWQ1D):
        doc = spec.g.to_json()
    else:
        raise SpecError(f"cannot serialize {type(spec).__name__}")
    if root:
        doc = {"dimension": spec.dim, **doc}
    return doc
