"""Declarative experiment descriptions.

A scenario is a JSON document (``"schema": 1``) naming a function family
``n -> f_n``, its candidate limit, the checks to run and optional expected
sub-verdicts.  :func:`load_scenario` validates the document against the
bundled JSON schema, builds every function tree once to surface unknown
builder kinds early, and fills in module defaults.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .funclib.family import FunctionSeq
from .funclib.nodes import SpecError
from .funclib.serialize import eval_expr, spec_from_json
from .setconv import default_eps_ladder, default_n_ladder
from .slope import default_ladder

SCHEMA_VERSION = 1

FAMILY_CHECKS = frozenset({"epi", "slope-epi", "nc", "nc-weak", "attouch", "main", "tightness", "sandwich"})
FLOW_CHECKS = frozenset({"flow", "energy", "infimizing"})

DEFAULT_TOLERANCES = {"tol": 1e-2, "tol_inf": 1e-3, "comparison": 1e-9, "flow": 1e-3, "energy": 5e-3}
DEFAULT_GRAPH = {"h": 0.01, "box": 2.0, "star_box": 4.0}
DEFAULT_GRID = {"lo": -1.0, "hi": 1.0, "num": 9}
DEFAULT_WITNESS = {"kind": "prox", "anchor": 0.3, "lambda": 1.0}


class ScenarioError(ValueError):
    """Malformed scenario; ``diagnostics`` holds one message per problem."""

    def __init__(self, path, diagnostics):
        self.path = str(path)
        self.diagnostics = list(diagnostics)
        super().__init__(f"{self.path}: " + "; ".join(self.diagnostics))


def schema() -> dict:
    """The bundled scenario JSON schema."""
    text = resources.files("epilab").joinpath("schema/scenario.schema.json").read_text()
    return json.loads(text)


def corpus_paths() -> list[Path]:
    """Golden corpus files shipped with the package, sorted by name."""
    root = resources.files("epilab").joinpath("corpus")
    return sorted(Path(str(p)) for p in root.iterdir() if p.name.endswith(".json"))


@dataclass(eq=False)
class Scenario:
    """Fully resolved scenario.

    Attributes
    ----------
    id : str
    dimension : int
    checks : tuple of str
    member, limit : dict or None
        Builder documents of ``f_n`` (expressions may use ``n``) and ``f``.
    n_ladder : tuple of int
    test_points : ndarray, shape (m, d)
    eps_ladder, lambda_ladder : tuple of float
    tolerances : dict
    witness : dict
    graph : dict
    comparison : list of dict
    flow : dict or None
    expected : dict
    path : str
    """

    id: str
    dimension: int
    checks: tuple
    member: dict | None
    limit: dict | None
    n_ladder: tuple
    test_points: np.ndarray
    eps_ladder: tuple
    lambda_ladder: tuple
    tolerances: dict
    witness: dict
    graph: dict
    comparison: list = field(default_factory=list)
    flow: dict | None = None
    expected: dict = field(default_factory=dict)
    description: str = ""
    path: str = ""

    def family(self) -> FunctionSeq:
        if self.member is None:
            raise ValueError(f"scenario {self.id!r} has no family")
        return FunctionSeq.from_json(self.member, self.limit, self.n_ladder, self.dimension)

    def to_json(self) -> dict:
        """Resolved document (defaults made explicit)."""
        doc = {"schema": SCHEMA_VERSION, "id": self.id, "dimension": self.dimension,
               "description": self.description, "checks": list(self.checks)}
        if self.member is not None:
            doc["family"] = {"member": self.member, "limit": self.limit, "n_ladder": list(self.n_ladder)}
        doc["test_points"] = self.test_points.tolist()
        doc["ladders"] = {"eps": list(self.eps_ladder), "lambda": list(self.lambda_ladder)}
        doc["tolerances"] = dict(self.tolerances)
        doc["witness"] = self.witness
        doc["graph"] = dict(self.graph)
        if self.comparison:
            doc["comparison"] = self.comparison
        if self.flow is not None:
            doc["flow"] = self.flow
        doc["expected"] = self.expected
        return doc


def _line_of(text: str, path) -> int | None:
    # best effort: the first line mentioning the innermost named field
    keys = [p for p in path if isinstance(p, str)]
    if not keys:
        return None
    needle = json.dumps(keys[-1])
    for i, line in enumerate(text.splitlines(), 1):
        if needle + ":" in line.replace('" :', '":'):
            return i
    return None


def _diagnose(text: str, err: jsonschema.ValidationError) -> str:
    loc = "/".join(str(p) for p in err.absolute_path) or "<root>"
    line = _line_of(text, list(err.absolute_path))
    where = f"line {line}, " if line is not None else ""
    return f"{where}field {loc}: {err.message}"


def _grid(spec: dict, dim: int) -> np.ndarray:
    axis = np.linspace(spec["lo"], spec["hi"], spec["num"])
    return np.array(list(itertools.product(axis, repeat=dim)), dtype=float)


def _test_points(doc, dim: int) -> np.ndarray:
    if doc is None:
        return _grid(DEFAULT_GRID, dim)
    if isinstance(doc, dict):
        return _grid(doc["grid"], dim)
    P = np.array(doc, dtype=float)
    if P.ndim != 2 or P.shape[1] != dim:
        raise ValueError(f"test points must have {dim} coordinates")
    return P


def _vector(v, dim):
    if isinstance(v, list):
        out = [float(eval_expr(t)) for t in v]
        if len(out) != dim:
            raise ValueError(f"vector has {len(out)} entries, expected {dim}")
        return out
    return [float(eval_expr(v))] * dim


def _ladder(doc) -> tuple:
    if doc is None:
        return default_n_ladder()
    if isinstance(doc, dict):
        return tuple(doc["base"] ** k for k in range(doc["kmax"] + 1))
    return tuple(int(n) for n in doc)


def _semantic(doc: dict) -> list[str]:
    errs = []
    checks = set(doc["checks"])
    if checks & FAMILY_CHECKS and "family" not in doc:
        errs.append(f"checks {sorted(checks & FAMILY_CHECKS)} need a 'family'")
    if "comparison" in checks and not doc.get("comparison"):
        errs.append("check 'comparison' needs a 'comparison' list")
    if checks & FLOW_CHECKS and "flow" not in doc:
        errs.append(f"checks {sorted(checks & FLOW_CHECKS)} need a 'flow' block")
    if "infimizing" in checks and "g" not in doc.get("flow", {}):
        errs.append("check 'infimizing' needs 'flow.g'")
    if "flow" in doc and "spec" not in doc["flow"] and "family" not in doc:
        errs.append("'flow' needs a 'spec' when there is no family")
    for name in doc.get("expected", {}):
        if name not in checks:
            errs.append(f"expectation for check {name!r} which is not run")
    for key in ("eps", "lambda"):
        lad = doc.get("ladders", {}).get(key)
        if lad is not None and any(a <= b for a, b in zip(lad, lad[1:])):
            errs.append(f"ladders/{key} must be strictly decreasing")
    fam = doc.get("family", {})
    lad = fam.get("n_ladder")
    if isinstance(lad, list) and any(a >= b for a, b in zip(lad, lad[1:])):
        errs.append("family/n_ladder must be strictly increasing")
    return errs


def _build_all(doc: dict, dim: int, ladder) -> list[str]:
    # surface unknown kinds and bad parameters at load time
    errs = []

    def attempt(label, node, n=None):
        try:
            spec_from_json(node, n, dim)
        except (SpecError, ValueError, TypeError, KeyError, ZeroDivisionError) as exc:
            errs.append(f"{label}: {exc}")

    if "family" in doc:
        attempt("family/limit", doc["family"]["limit"])
        for n in (ladder[0], ladder[-1]):
            attempt(f"family/member (n={n})", doc["family"]["member"], n)
    for i, pair in enumerate(doc.get("comparison", [])):
        attempt(f"comparison/{i}/f", pair["f"])
        attempt(f"comparison/{i}/g", pair["g"])
    for key in ("spec", "g"):
        if key in doc.get("flow", {}):
            attempt(f"flow/{key}", doc["flow"][key])
    return errs


def parse_scenario(text: str, path="<string>") -> Scenario:
    """Validate and resolve a scenario document given as JSON text.

    Raises
    ------
    ScenarioError
        On invalid JSON, schema violations, missing inputs of requested
        checks and unknown builder kinds.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(path, [f"line {exc.lineno}, column {exc.colno}: {exc.msg}"]) from exc
    validator = jsonschema.Draft202012Validator(schema())
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        raise ScenarioError(path, [_diagnose(text, e) for e in errors])
    errs = _semantic(doc)
    if errs:
        raise ScenarioError(path, errs)
    dim = doc["dimension"]
    fam = doc.get("family")
    ladder = _ladder(fam.get("n_ladder") if fam else None)
    errs = _build_all(doc, dim, ladder)
    if errs:
        raise ScenarioError(path, errs)

    tol = dict(DEFAULT_TOLERANCES)
    tol.update(doc.get("tolerances", {}))
    graph = dict(DEFAULT_GRAPH)
    graph.update(doc.get("graph", {}))
    wit = dict(DEFAULT_WITNESS) if doc.get("witness", {}).get("kind", "prox") == "prox" else {}
    wit.update(doc.get("witness", {}))
    try:
        if wit["kind"] == "prox":
            wit["anchor"] = _vector(wit["anchor"], dim)
        P = _test_points(doc.get("test_points"), dim)
        comparison = []
        for i, pair in enumerate(doc.get("comparison", [])):
            grid = _test_points(pair["grid"], dim) if "grid" in pair else P
            comparison.append({"name": pair.get("name", f"pair{i}"), "f": pair["f"], "g": pair["g"],
                               "grid": grid.tolist()})
    except ValueError as exc:
        raise ScenarioError(path, [str(exc)]) from exc
    flow = None
    if "flow" in doc:
        flow = {"h": 1e-3, "T": 20.0}
        flow.update(doc["flow"])
        if len(flow["x0"]) != dim:
            raise ScenarioError(path, [f"flow/x0 must have {dim} coordinates"])
        flow.setdefault("spec", fam["limit"] if fam else None)
    ladders = doc.get("ladders", {})
    return Scenario(
        id=doc["id"], dimension=dim, checks=tuple(doc["checks"]),
        member=fam["member"] if fam else None, limit=fam["limit"] if fam else None,
        n_ladder=ladder, test_points=P,
        eps_ladder=tuple(ladders.get("eps", default_eps_ladder())),
        lambda_ladder=tuple(ladders.get("lambda", default_ladder(20))),
        tolerances=tol, witness=wit, graph=graph, comparison=comparison, flow=flow,
        expected=doc.get("expected", {}), description=doc.get("description", ""), path=str(path))


def load_scenario(path) -> Scenario:
    """Read, validate and resolve a scenario file.

    Raises
    ------
    FileNotFoundError
    ScenarioError
    """
    path = Path(path)
    return parse_scenario(path.read_text(), path)


def load_corpus(paths) -> list[Scenario]:
    """Load files and directories (``*.json`` inside, sorted); ids must be unique.

    Raises
    ------
    ScenarioError
        On any malformed file or a duplicated id.
    """
    files = []
    for p in map(Path, paths):
        files.extend(sorted(p.glob("*.json")) if p.is_dir() else [p])
    out, seen = [], {}
    for f in files:
        sc = load_scenario(f)
        if sc.id in seen:
            raise ScenarioError(f, [f"duplicate scenario id {sc.id!r} (also in {seen[sc.id]})"])
        seen[sc.id] = str(f)
        out.append(sc)
    return out


def fmt(v) -> str:
    """Deterministic number formatting for CSV bodies."""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.12g}"
