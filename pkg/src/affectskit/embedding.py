"""Embeddings of affects-relation sets into finite posets: compatibility, stability, search."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

from .affects_engine import AffectsRelation, AffectsSet, RelationFlags, conditionality_transform
from .core_model import ValidationError
from .loop_analysis import CapExceeded
from .poset import Poset

COMPAT_MODES = ("irreducible", "strong-indecreasable", "indecreasable")
DEFAULT_SEARCH_CAP = 10 ** 7


@dataclass(frozen=True)
class Embedding:
    ordering: Tuple[Tuple[str, str], ...]

    @classmethod
    def from_map(cls, mapping: Mapping[str, str]) -> "Embedding":
        return cls(tuple(sorted(mapping.items())))

    @property
    def map(self) -> Dict[str, str]:
        return dict(self.ordering)

    def __getitem__(self, rv: str) -> str:
        return self.map[rv]

    def is_injective(self) -> bool:
        points = [p for _, p in self.ordering]
        return len(set(points)) == len(points)

    def to_dict(self) -> dict:
        return {"map": dict(self.ordering)}


@dataclass
class EmbeddingReport:
    mode: str
    compat: Dict[str, bool]
    violations: Dict[str, List[str]]
    support_stable: bool
    minimum_stable: bool
    degenerate: bool
    trivial: bool
    stability_violations: List[str] = field(default_factory=list)
    minimum_violations: List[str] = field(default_factory=list)
    meaningless: List[str] = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return self.compat[self.mode]

    def to_dict(self) -> dict:
        return {
            "mode": self.mode, "compat": dict(self.compat), "violations": self.violations,
            "support_stable": self.support_stable, "minimum_stable": self.minimum_stable,
            "degenerate": self.degenerate, "trivial": self.trivial,
            "stability_violations": self.stability_violations, "minimum_violations": self.minimum_violations,
            "operationally_meaningless": self.meaningless,
        }


def _flags(r: AffectsRelation, f: RelationFlags) -> Tuple[bool, bool, bool]:
    irreducible = len(r.x) == 1 or bool(f.irreducible)
    indecreasable = bool(f.indecreasable) or not r.z
    strong = bool(f.strong)
    if strong and f.indecreasable is False:
        raise ValidationError(f"{r} is flagged strongly indecreasable but decreasable")
    return irreducible, indecreasable or strong, strong


def _is_simple(r: AffectsRelation) -> bool:
    return len(r.x) == 1 and len(r.y) == 1 and not r.z and not r.w


class _RelationCheck:
    """Everything check_embedding needs about one relation, evaluated on bitmask locations."""

    def __init__(self, r: AffectsRelation, flags: RelationFlags):
        self.r = r
        self.irreducible, self.indecreasable, self.strong = _flags(r, flags)
        self.simple = _is_simple(r)

    def evaluate(self, p: Poset, loc: Mapping[str, int]) -> dict:
        def fs(names):
            m = 0
            for n in names:
                m |= 1 << loc[n]
            return p.fs_mask(m)

        r = self.r
        fx, fz = fs(r.x), fs(r.z)
        fywz = fs(r.y | r.w | r.z)
        fywx = fs(r.y | r.w | r.x)
        irr_ok = not self.irreducible or fywz & ~fx == 0
        z_ok = fywx & ~fz == 0
        return {
            "irreducible": irr_ok,
            "strong-indecreasable": irr_ok and (not self.strong or z_ok),
            "indecreasable": irr_ok and (not self.indecreasable or z_ok),
            "support": fywz & ~fx == 0 and fywz != fx,
            "minimum": fywz & ~(fx & ~p.min_mask(fx)) == 0,
            "meaningless": fywz == 0,
            "trivial": self.simple and loc[next(iter(r.x))] == loc[next(iter(r.y))],
        }


def _checks(affects: AffectsSet) -> List[_RelationCheck]:
    return [_RelationCheck(r, affects.present[r]) for r in affects.sorted_present()]


def _locations(poset: Poset, emb, rvs) -> Dict[str, int]:
    mapping = emb.map if isinstance(emb, Embedding) else dict(emb)
    loc = {}
    for rv in rvs:
        if rv not in mapping:
            raise ValidationError(f"random variable {rv!r} is not embedded")
        point = mapping[rv]
        if point not in poset.index:
            raise ValidationError(f"{rv!r} is mapped to {point!r}, which is not in the poset")
        loc[rv] = poset.index[point]
    return loc


def check_embedding(affects: AffectsSet, poset: Poset, emb, mode: str = "irreducible") -> EmbeddingReport:
    """Compatibility in all three modes (``mode`` selects the headline verdict), stability, degeneracy and triviality.

    Accessible regions are support futures.  Relations whose Y ∪ Z ∪ W has an
    empty support future are listed as operationally meaningless; they pass
    the compatibility conditions vacuously.
    """
    if mode not in COMPAT_MODES:
        raise ValidationError(f"unknown compatibility mode {mode!r}")
    mapping = emb.map if isinstance(emb, Embedding) else dict(emb)
    loc = _locations(poset, mapping, affects.nodes())
    compat = {m: True for m in COMPAT_MODES}
    violations: Dict[str, List[str]] = {m: [] for m in COMPAT_MODES}
    report = EmbeddingReport(mode, compat, violations, True, True,
                             degenerate=len(set(mapping.values())) != len(mapping), trivial=False)
    for c in _checks(affects):
        res = c.evaluate(poset, loc)
        for m in COMPAT_MODES:
            if not res[m]:
                compat[m] = False
                violations[m].append(str(c.r))
        if not res["support"]:
            report.support_stable = False
            report.stability_violations.append(str(c.r))
        if not res["minimum"]:
            report.minimum_stable = False
            report.minimum_violations.append(str(c.r))
        if res["meaningless"]:
            report.meaningless.append(str(c.r))
        if res["trivial"]:
            report.trivial = True
    assert compat["irreducible"] or not compat["strong-indecreasable"]
    assert compat["strong-indecreasable"] or not compat["indecreasable"]
    return report


def normalize_requirements(require) -> Dict[str, object]:
    """Accept a mapping or an iterable of tokens like ``support-stable`` and ``non-degenerate``."""
    out = {"mode": "irreducible", "compat": True, "support_stable": False, "minimum_stable": False,
           "non_degenerate": False, "non_trivial": False}
    if require is None:
        return out
    if isinstance(require, Mapping):
        for k, v in require.items():
            key = k.replace("-", "_")
            if key not in out:
                raise ValidationError(f"unknown requirement {k!r}")
            out[key] = v
    else:
        for token in require:
            key = token.replace("-", "_")
            if token in COMPAT_MODES:
                out["mode"] = token
            elif key in out and key not in ("mode",):
                out[key] = True
            else:
                raise ValidationError(f"unknown requirement {token!r}")
    if out["mode"] not in COMPAT_MODES:
        raise ValidationError(f"unknown compatibility mode {out['mode']!r}")
    return out


def iter_embeddings(affects: AffectsSet, poset: Poset, require=None, rvs: Optional[Sequence[str]] = None,
                    cap: int = DEFAULT_SEARCH_CAP) -> Iterator[Embedding]:
    """Yield every ordering satisfying the requirements, in lexicographic order of point indices.

    A relation is checked as soon as all of its variables are placed, so
    failing prefixes are cut off early.
    """
    req = normalize_requirements(require)
    rvs = sorted(rvs if rvs is not None else affects.nodes())
    missing = set(affects.nodes()) - set(rvs)
    if missing:
        raise ValidationError(f"random variables {sorted(missing)} appear in relations but are not embedded")
    size = len(poset) ** len(rvs)
    if size > cap:
        raise CapExceeded(f"{len(poset)}^{len(rvs)} = {size} orderings exceed the cap of {cap}")
    checks = _checks(affects)
    pos = {rv: i for i, rv in enumerate(rvs)}
    due: Dict[int, List[_RelationCheck]] = {}
    for c in checks:
        due.setdefault(max(pos[n] for n in c.r.nodes), []).append(c)
    loc: Dict[str, int] = {}
    used: List[int] = []

    def ok(c: _RelationCheck) -> bool:
        res = c.evaluate(poset, loc)
        if req["compat"] and not res[req["mode"]]:
            return False
        if req["support_stable"] and not res["support"]:
            return False
        if req["minimum_stable"] and not res["minimum"]:
            return False
        if req["non_trivial"] and res["trivial"]:
            return False
        return True

    def place(k: int):
        if k == len(rvs):
            yield Embedding(tuple((rv, poset.elements[loc[rv]]) for rv in rvs))
            return
        for i in range(len(poset)):
            if req["non_degenerate"] and i in used:
                continue
            loc[rvs[k]] = i
            used.append(i)
            if all(ok(c) for c in due.get(k, ())):
                yield from place(k + 1)
            used.pop()
        loc.pop(rvs[k], None)

    yield from place(0)


def search_embeddings(affects: AffectsSet, poset: Poset, require=None, rvs: Optional[Sequence[str]] = None,
                      cap: int = DEFAULT_SEARCH_CAP) -> List[Embedding]:
    """All orderings of the variables into the poset that meet ``require``; empty means none exists."""
    return list(iter_embeddings(affects, poset, require, rvs, cap))


def reduce_ho_relations(affects: AffectsSet) -> AffectsSet:
    """Map every irreducible and indecreasable (X, Y, Z, W) to the unconditional (XZ, YW).

    The result is meant for loop and compatibility analysis of abstract sets;
    a model may well have X ⊨ Y | do(Z) while XZ ⊭ Y.
    """
    present = {}
    for r in affects.sorted_present():
        f = affects.present[r]
        irreducible = len(r.x) == 1 or f.irreducible
        indecreasable = f.indecreasable or f.strong or not r.z
        if not (irreducible and indecreasable):
            raise ValidationError(f"{r} must be flagged irreducible and indecreasable")
        if r.z:
            reduced = AffectsRelation(r.x | r.z, r.y | r.w)
        else:
            reduced = conditionality_transform(r)
        present[reduced] = RelationFlags(irreducible=True, indecreasable=True, strong=False)
    return AffectsSet(present)


def all_orderings(rvs: Sequence[str], poset: Poset) -> Iterator[Embedding]:
    """Every map from ``rvs`` to the poset, without any filtering."""
    rvs = sorted(rvs)
    for points in itertools.product(poset.elements, repeat=len(rvs)):
        yield Embedding(tuple(zip(rvs, points)))
