"""JSON file formats for models, affects sets, posets and embeddings.

Every schema problem raises :class:`SchemaError` naming the file, the JSON
path of the offending value, and the field.
"""
from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Any, List, Optional, Union

from .affects_engine import AffectsRelation, AffectsSet, RelationFlags
from .core_model import (DETERMINISTIC, EXOGENOUS, STOCHASTIC, CausalStructure, Mechanism, Node, StructuralModel,
                         ValidationError)
from .embedding import Embedding
from .poset import Poset, validate_poset

KIND_ALIASES = {
    "exogenous": EXOGENOUS, EXOGENOUS: EXOGENOUS,
    "deterministic": DETERMINISTIC, DETERMINISTIC: DETERMINISTIC,
    "stochastic": STOCHASTIC, STOCHASTIC: STOCHASTIC,
}


class SchemaError(ValidationError):
    def __init__(self, file: Optional[str], path: str, message: str, line: Optional[int] = None):
        self.file = file or "<input>"
        self.path = path
        self.line = line
        self.field = path.rsplit(".", 1)[-1] if path else ""
        where = f"{self.file}:{line}" if line else self.file
        super().__init__(f"{where}: {path or '<root>'}: {message}")


def load_json(path: Union[str, Path]) -> Any:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise SchemaError(str(path), "", f"cannot read file ({exc.strerror})") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(str(path), "", f"invalid JSON: {exc.msg} (column {exc.colno})", exc.lineno) from None


def dump_json(data: Any) -> str:
    """Deterministic JSON text: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def fraction_str(p: Fraction) -> str:
    return str(p.numerator) if p.denominator == 1 else f"{p.numerator}/{p.denominator}"


def _need(cond, file, path, message):
    if not cond:
        raise SchemaError(file, path, message)


def _name_list(value, file, path) -> List[str]:
    _need(isinstance(value, list) and all(isinstance(v, str) and v for v in value), file, path,
          "expected a list of node names")
    return value


# ---- models ----

def model_from_json(data: Any, file: Optional[str] = None) -> StructuralModel:
    _need(isinstance(data, dict) and isinstance(data.get("nodes"), list), file, "nodes",
          "expected an object with a 'nodes' list")
    nodes, parents, specs = [], {}, {}
    for i, item in enumerate(data["nodes"]):
        base = f"nodes[{i}]"
        _need(isinstance(item, dict), file, base, "expected an object")
        name = item.get("name")
        _need(isinstance(name, str) and name, file, f"{base}.name", "expected a non-empty string")
        card = item.get("cardinality", 2)
        _need(isinstance(card, int) and not isinstance(card, bool) and card >= 1, file, f"{base}.cardinality",
              "expected a positive integer")
        observed = item.get("observed", True)
        _need(isinstance(observed, bool), file, f"{base}.observed", "expected true or false")
        _need(name not in parents, file, f"{base}.name", f"duplicate node name {name!r}")
        nodes.append(Node(name, card, observed))
        parents[name] = _name_list(item.get("parents", []), file, f"{base}.parents")
        mech = item.get("mechanism")
        _need(isinstance(mech, dict), file, f"{base}.mechanism", "expected an object with 'kind' and 'table'")
        specs[name] = (base, mech)
    try:
        structure = CausalStructure(nodes, parents)
    except ValidationError as exc:
        raise SchemaError(file, "nodes", str(exc)) from None
    mechanisms = {}
    for node in nodes:
        base, mech = specs[node.name]
        kind = KIND_ALIASES.get(mech.get("kind"))
        _need(kind is not None, file, f"{base}.mechanism.kind",
              f"expected one of {sorted(set(KIND_ALIASES))}, got {mech.get('kind')!r}")
        pcards = tuple(structure.node(p).cardinality for p in structure.parents(node.name))
        table = mech.get("table")
        _need(isinstance(table, list), file, f"{base}.mechanism.table", "expected a list")
        try:
            if kind == EXOGENOUS:
                _need(not pcards, file, f"{base}.parents", "an exogenous node cannot have parents")
                row = table[0] if table and isinstance(table[0], list) else table
                mechanisms[node.name] = Mechanism(EXOGENOUS, node.cardinality, (), [row])
            elif kind == DETERMINISTIC and all(isinstance(v, int) for v in table):
                mechanisms[node.name] = Mechanism.deterministic(node.cardinality, pcards, table)
            else:
                mechanisms[node.name] = Mechanism(kind, node.cardinality, pcards, table)
        except ValidationError as exc:
            if isinstance(exc, SchemaError):
                raise
            raise SchemaError(file, f"{base}.mechanism.table", str(exc)) from None
    try:
        return StructuralModel(structure, mechanisms)
    except ValidationError as exc:
        raise SchemaError(file, "nodes", str(exc)) from None


def model_to_json(model: StructuralModel) -> dict:
    out = []
    for name in model.structure.names:
        node = model.structure.node(name)
        mech = model.mechanisms[name]
        if mech.kind == EXOGENOUS:
            table: Any = [fraction_str(p) for p in mech.rows[0]]
        elif mech.kind == DETERMINISTIC:
            table = [row.index(1) for row in mech.rows]
        else:
            table = [[fraction_str(p) for p in row] for row in mech.rows]
        out.append({"name": name, "cardinality": node.cardinality, "observed": node.observed,
                    "parents": list(model.structure.parents(name)),
                    "mechanism": {"kind": mech.kind, "table": table}})
    return {"nodes": out}


def load_model(path) -> StructuralModel:
    return model_from_json(load_json(path), str(path))


# ---- affects sets ----

def _relation_from_json(item, file, base) -> AffectsRelation:
    _need(isinstance(item, dict), file, base, "expected an object with X, Y, Z, W")
    parts = {}
    for key in "XYZW":
        parts[key] = _name_list(item.get(key, []), file, f"{base}.{key}")
    try:
        return AffectsRelation(frozenset(parts["X"]), frozenset(parts["Y"]), frozenset(parts["Z"]),
                               frozenset(parts["W"]))
    except ValidationError as exc:
        raise SchemaError(file, base, str(exc)) from None


def affects_from_json(data: Any, file: Optional[str] = None) -> AffectsSet:
    _need(isinstance(data, dict), file, "", "expected an object with 'present' and 'absent' lists")
    present = {}
    for i, item in enumerate(data.get("present", [])):
        base = f"present[{i}]"
        r = _relation_from_json(item, file, base)
        flags = []
        for key in ("irreducible", "indecreasable", "strong"):
            v = item.get(key)
            _need(v is None or isinstance(v, bool), file, f"{base}.{key}", "expected true, false or null")
            flags.append(v)
        present[r] = RelationFlags(*flags)
    absent = set()
    for i, item in enumerate(data.get("absent", [])):
        absent.add(_relation_from_json(item, file, f"absent[{i}]"))
    try:
        return AffectsSet(present, frozenset(absent))
    except ValidationError as exc:
        raise SchemaError(file, "", str(exc)) from None


def load_affects(path) -> AffectsSet:
    return affects_from_json(load_json(path), str(path))


# ---- posets and embeddings ----

def poset_from_json(data: Any, file: Optional[str] = None) -> Poset:
    _need(isinstance(data, dict), file, "", "expected an object with 'elements' and 'relations'")
    elements = _name_list(data.get("elements"), file, "elements")
    rels = data.get("relations", [])
    _need(isinstance(rels, list), file, "relations", "expected a list of pairs")
    for i, pair in enumerate(rels):
        _need(isinstance(pair, list) and len(pair) == 2 and all(isinstance(v, str) for v in pair), file,
              f"relations[{i}]", "expected a pair of element names")
    try:
        return validate_poset(elements, rels)
    except ValidationError as exc:
        raise SchemaError(file, "relations", str(exc)) from None


def load_poset(path) -> Poset:
    return poset_from_json(load_json(path), str(path))


def embedding_from_json(data: Any, file: Optional[str] = None) -> Embedding:
    _need(isinstance(data, dict) and isinstance(data.get("map"), dict), file, "map",
          "expected an object with a 'map' object")
    for k, v in data["map"].items():
        _need(isinstance(v, str), file, f"map.{k}", "expected an element name")
    return Embedding.from_map(data["map"])


def load_embedding(path) -> Embedding:
    return embedding_from_json(load_json(path), str(path))
