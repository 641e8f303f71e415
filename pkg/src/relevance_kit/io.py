"""JSON instance files.

Every file carries ``"schema": 1`` and a ``"kind"``.  Rationals are written
as integers or ``"numerator/denominator"`` strings; floats are rejected so
values stay exact.
"""
from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Any

from .circuit import BoolCircuit, SuccinctProblem
from .core import DecisionProblem, DecisionTable, rational
from .errors import FormatError
from .sequential import SequentialProblem
from .stochastic import StochasticProblem
from .tractable import PairwiseUtility, TensorRankUtility, TreeUtility

SCHEMA = 1
KINDS = ("explicit", "table", "succinct", "stochastic", "sequential", "tensor", "tree", "pairwise")


def encode_rational(x) -> int | str:
    x = rational(x)
    return x if isinstance(x, int) else f"{x.numerator}/{x.denominator}"


def _enc(obj):
    """Recursively encode nested rationals."""
    if isinstance(obj, (list, tuple)):
        return [_enc(x) for x in obj]
    return encode_rational(obj)


def _dec(obj):
    if isinstance(obj, (list, tuple)):
        return tuple(_dec(x) for x in obj)
    return rational(obj)


def _field(data: dict, name: str, kind: str):
    if name not in data:
        raise FormatError(f"{kind} instance is missing {name!r}")
    return data[name]


# --------------------------------------------------------------------------
# Encoders


def _explicit_body(p: DecisionProblem) -> dict:
    return {"actions": list(p.actions), "domains": list(p.domains), "utilities": _enc(p.utilities)}


def _circuit_body(c: BoolCircuit) -> dict:
    return {"gates": [list(g) for g in c.gates], "output": c.output}


def to_json(instance) -> dict:
    """Encode any supported instance as a JSON-ready dict."""
    if isinstance(instance, DecisionProblem):
        return {"schema": SCHEMA, "kind": "explicit", **_explicit_body(instance)}
    if isinstance(instance, DecisionTable):
        return {"schema": SCHEMA, "kind": "table", "actions": list(instance.actions),
                "domains": list(instance.domains), "rows": [list(r) for r in instance.rows],
                "utilities": _enc(instance.utilities)}
    if isinstance(instance, SuccinctProblem):
        return {"schema": SCHEMA, "kind": "succinct", "n": instance.n, "actions": list(instance.actions),
                "terms": [[{"circuit": _circuit_body(c), "weight": encode_rational(w)} for c, w in row]
                          for row in instance.terms]}
    if isinstance(instance, StochasticProblem):
        return {"schema": SCHEMA, "kind": "stochastic", "base": _explicit_body(instance.base),
                "distribution": _enc(instance.dist)}
    if isinstance(instance, SequentialProblem):
        out = {"schema": SCHEMA, "kind": "sequential", "base": _explicit_body(instance.base),
               "horizon": instance.horizon, "mode": instance.mode}
        if instance.transitions is not None:
            out["transitions"] = [[[[t, encode_rational(p)] for t, p in row] for row in per_state]
                                  for per_state in instance.transitions]
        if instance.observations is not None:
            out["observations"] = list(instance.observations)
        return out
    if isinstance(instance, TensorRankUtility):
        return {"schema": SCHEMA, "kind": "tensor", "actions": list(instance.actions),
                "domains": list(instance.domains), "weights": _enc(instance.weights),
                "action_factors": _enc(instance.action_factors), "coord_factors": _enc(instance.coord_factors)}
    if isinstance(instance, TreeUtility):
        return {"schema": SCHEMA, "kind": "tree", "actions": list(instance.actions),
                "domains": list(instance.domains), "parent": list(instance.parent),
                "local": _enc(instance.local)}
    if isinstance(instance, PairwiseUtility):
        return {"schema": SCHEMA, "kind": "pairwise", "actions": list(instance.actions),
                "domains": list(instance.domains), "unary": _enc(instance.unary),
                "edges": [{"edge": list(e), "table": _enc(t)} for e, t in sorted(instance.edges.items())],
                "bags": [list(b) for b in instance.bags], "bag_edges": [list(e) for e in instance.bag_edges],
                "width": instance.width}
    raise TypeError(f"cannot encode {type(instance).__name__}")


def dumps(instance) -> str:
    return json.dumps(to_json(instance), indent=1)


# --------------------------------------------------------------------------
# Decoders


def _explicit(data: dict, kind: str = "explicit") -> DecisionProblem:
    return DecisionProblem(_field(data, "actions", kind), _field(data, "domains", kind),
                           _dec(_field(data, "utilities", kind)))


def _circuit(data: dict) -> BoolCircuit:
    if not isinstance(data, dict):
        raise FormatError("a circuit is an object with gates and output")
    gates = _field(data, "gates", "circuit")
    return BoolCircuit(tuple(tuple(g) for g in gates), _field(data, "output", "circuit"))


def from_json(data: Any):
    """Decode a dict produced by :func:`to_json` (or written by hand)."""
    if not isinstance(data, dict):
        raise FormatError("an instance file must hold a JSON object")
    if data.get("schema") != SCHEMA:
        raise FormatError(f"unsupported schema {data.get('schema')!r}; expected {SCHEMA}")
    kind = data.get("kind")
    try:
        return _decode(kind, data)
    except (KeyError, TypeError, IndexError) as exc:
        raise FormatError(f"malformed {kind} instance: {exc}") from exc


def _decode(kind: str, data: dict):
    if kind == "explicit":
        return _explicit(data)
    if kind == "table":
        return DecisionTable(tuple(_field(data, "actions", kind)), _field(data, "domains", kind),
                             tuple(tuple(r) for r in _field(data, "rows", kind)),
                             _dec(_field(data, "utilities", kind)))
    if kind == "succinct":
        terms = tuple(tuple((_circuit(t["circuit"]), rational(t.get("weight", 1))) for t in row)
                      for row in _field(data, "terms", kind))
        return SuccinctProblem(_field(data, "n", kind), tuple(_field(data, "actions", kind)), terms)
    if kind == "stochastic":
        return StochasticProblem(_explicit(_field(data, "base", kind)), _dec(_field(data, "distribution", kind)))
    if kind == "sequential":
        base = _explicit(_field(data, "base", kind))
        transitions = None
        if "transitions" in data:
            transitions = tuple(tuple(tuple((int(t), Fraction(rational(p))) for t, p in row) for row in per_state)
                                for per_state in data["transitions"])
        elif "successor" in data:
            transitions = tuple(tuple(((int(t), Fraction(1)),) for t in per_state)
                                for per_state in data["successor"])
        obs = data.get("observations")
        return SequentialProblem(base, transitions, int(data.get("horizon", 0)), data.get("mode", "backup"),
                                 None if obs is None else tuple(obs))
    if kind == "tensor":
        return TensorRankUtility(tuple(_field(data, "actions", kind)), tuple(_field(data, "domains", kind)),
                                 _dec(_field(data, "weights", kind)), _dec(_field(data, "action_factors", kind)),
                                 _dec(_field(data, "coord_factors", kind)))
    if kind == "tree":
        return TreeUtility(tuple(_field(data, "actions", kind)), tuple(_field(data, "domains", kind)),
                           tuple(_field(data, "parent", kind)), _dec(_field(data, "local", kind)))
    if kind == "pairwise":
        edges = {tuple(e["edge"]): _dec(e["table"]) for e in data.get("edges", [])}
        bag_edges = data.get("bag_edges")
        return PairwiseUtility(tuple(_field(data, "actions", kind)), tuple(_field(data, "domains", kind)),
                               _dec(_field(data, "unary", kind)), edges,
                               tuple(tuple(b) for b in _field(data, "bags", kind)), int(_field(data, "width", kind)),
                               None if bag_edges is None else tuple(tuple(e) for e in bag_edges))
    raise FormatError(f"unknown instance kind {kind!r}; expected one of {', '.join(KINDS)}")


def loads(text: str):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    return from_json(data)


def load(path: str | Path):
    return loads(Path(path).read_text())


def dump(instance, path: str | Path) -> None:
    Path(path).write_text(dumps(instance) + "\n")
