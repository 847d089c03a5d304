"""Deciding, enumerating and classifying affects relations of a structural model.

``X ⊨ Y | {do(Z), W}`` holds when some values x, z, w give

    P_do(XZ)(Y | x, z, w)  !=  P_do(Z)(Y | z, w),

where a context w that is possible in exactly one of the two distributions also
counts as a difference (see ``zero_context``).
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from math import lcm
from typing import Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .core_model import StructuralModel, ValidationError, post_intervention_distribution

NameSet = FrozenSet[str]


def _fs(items) -> NameSet:
    if isinstance(items, str):
        return frozenset([items])
    return frozenset(items)


# single letters, optionally primed, are written side by side as in "KM⊨M'"
_SHORT_NAME = re.compile(r"[A-Za-z0-9]['′]*")


def render_set(names: Iterable[str]) -> str:
    names = sorted(names)
    if all(_SHORT_NAME.fullmatch(n) for n in names):
        return "".join(names)
    return ",".join(names)


@dataclass(frozen=True)
class AffectsRelation:
    """The statement X ⊨ Y | {do(Z), W} over observed node names."""

    x: NameSet
    y: NameSet
    z: NameSet = frozenset()
    w: NameSet = frozenset()

    def __post_init__(self):
        for f in ("x", "y", "z", "w"):
            object.__setattr__(self, f, _fs(getattr(self, f)))
        if not self.x or not self.y:
            raise ValidationError(f"affects relation needs non-empty X and Y: {self}")
        parts = [self.x, self.y, self.z, self.w]
        for a, b in itertools.combinations(parts, 2):
            if a & b:
                raise ValidationError(f"affects relation sets must be disjoint: {self}")

    def __str__(self):
        s = f"{render_set(self.x)}⊨{render_set(self.y)}"
        cond = []
        if self.z:
            cond.append(f"do({render_set(self.z)})")
        if self.w:
            cond.append(render_set(self.w))
        if len(cond) == 1:
            s += "|" + cond[0]
        elif cond:
            s += "|{" + ",".join(cond) + "}"
        return s

    __repr__ = __str__

    @property
    def order(self) -> int:
        return len(self.z)

    @property
    def nodes(self) -> NameSet:
        return self.x | self.y | self.z | self.w

    def sort_key(self):
        return (len(self.z), len(self.w), len(self.x), len(self.y),
                sorted(self.x), sorted(self.y), sorted(self.z), sorted(self.w))

    def to_dict(self) -> dict:
        return {"X": sorted(self.x), "Y": sorted(self.y), "Z": sorted(self.z), "W": sorted(self.w)}

    @classmethod
    def from_dict(cls, d: Mapping) -> "AffectsRelation":
        return cls(frozenset(d["X"]), frozenset(d["Y"]), frozenset(d.get("Z", ())), frozenset(d.get("W", ())))


def rel(x, y, z=(), w=()) -> AffectsRelation:
    """Shorthand constructor.  A string is split into single-character names with
    any trailing primes, so ``rel("MK", "M'")`` is KM ⊨ M'; pass lists for longer names.
    """
    def names(v):
        return frozenset(_SHORT_NAME.findall(v)) if isinstance(v, str) else frozenset(v)
    return AffectsRelation(names(x), names(y), names(z), names(w))


@dataclass(frozen=True)
class RelationFlags:
    irreducible: Optional[bool] = None
    indecreasable: Optional[bool] = None
    strong: Optional[bool] = None

    def to_dict(self) -> dict:
        return {"irreducible": self.irreducible, "indecreasable": self.indecreasable, "strong": self.strong}


@dataclass
class AffectsSet:
    """Present relations (with flags) and relations known to be absent."""

    present: Dict[AffectsRelation, RelationFlags] = field(default_factory=dict)
    absent: FrozenSet[AffectsRelation] = frozenset()

    def __post_init__(self):
        if not isinstance(self.present, dict):
            self.present = {r: RelationFlags() for r in self.present}
        self.absent = frozenset(self.absent)
        both = set(self.present) & self.absent
        if both:
            raise ValidationError(f"relations listed as both present and absent: {sorted(map(str, both))}")

    @classmethod
    def from_relations(cls, relations: Iterable[AffectsRelation], irreducible: Optional[bool] = True,
                       absent: Iterable[AffectsRelation] = ()) -> "AffectsSet":
        """Build a set whose present relations all carry the same irreducibility flag.

        Relations with a single-element X are always marked irreducible.
        """
        present = {}
        for r in relations:
            flag = True if len(r.x) == 1 else irreducible
            indec = True if not r.z else None
            present[r] = RelationFlags(irreducible=flag, indecreasable=indec, strong=False if not r.z else None)
        return cls(present, frozenset(absent))

    def holds(self, r: AffectsRelation) -> Optional[bool]:
        if r in self.present:
            return True
        if r in self.absent:
            return False
        return None

    def sorted_present(self) -> List[AffectsRelation]:
        return sorted(self.present, key=AffectsRelation.sort_key)

    def nodes(self) -> List[str]:
        out = set()
        for r in list(self.present) + list(self.absent):
            out |= r.nodes
        return sorted(out)

    def irreducible_present(self) -> List[AffectsRelation]:
        return [r for r in self.sorted_present() if self.present[r].irreducible]

    def to_dict(self) -> dict:
        return {
            "present": [dict(r.to_dict(), **self.present[r].to_dict()) for r in self.sorted_present()],
            "absent": [r.to_dict() for r in sorted(self.absent, key=AffectsRelation.sort_key)],
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "AffectsSet":
        present = {}
        for item in d.get("present", []):
            r = AffectsRelation.from_dict(item)
            present[r] = RelationFlags(item.get("irreducible"), item.get("indecreasable"), item.get("strong"))
        absent = frozenset(AffectsRelation.from_dict(item) for item in d.get("absent", []))
        return cls(present, absent)


def conditionality_transform(r: AffectsRelation) -> AffectsRelation:
    """Map a 0th-order relation X ⊨ Y | W to the unconditional X ⊨ YW."""
    if r.z:
        raise ValidationError(f"conditionality transform needs an empty do-set: {r}")
    return AffectsRelation(r.x, r.y | r.w)


# How a context (x, z, w) is treated when w has zero probability in one of the
# two compared distributions.  DEFINEDNESS (the default) counts a conditional
# that exists on one side only as a difference; BOTH_POSITIVE skips the context.
# Under BOTH_POSITIVE the rule XZ1 ⊨ Y | {do(Z2), W} ⇒ X ⊨ Y | {do(Z), W} ∨
# Z1 ⊨ Y | {do(Z2), W} fails for some models with W non-empty.
BOTH_POSITIVE = "both-positive"
DEFINEDNESS = "definedness"
ZERO_CONTEXT_MODES = (BOTH_POSITIVE, DEFINEDNESS)


class AffectsEvaluator:
    """Decides affects relations of one model, caching post-intervention tables.

    For every do-set D the evaluator stores one integer array of shape
    ``cards(D) + cards(observed)``; each do-assignment's slice holds that
    distribution scaled by its own common denominator.  The scale cancels in
    the cross-multiplied comparison of conditionals, so comparisons are exact.
    """

    def __init__(self, model: StructuralModel, zero_context: str = DEFINEDNESS):
        if zero_context not in ZERO_CONTEXT_MODES:
            raise ValidationError(f"unknown zero_context {zero_context!r}; expected one of {ZERO_CONTEXT_MODES}")
        self.model = model
        self.zero_context = zero_context
        self.names: Tuple[str, ...] = model.observed
        self.pos = {n: i for i, n in enumerate(self.names)}
        self.cards = tuple(model.cardinality(n) for n in self.names)
        self._tables: Dict[Tuple[str, ...], np.ndarray] = {}
        self._holds: Dict[AffectsRelation, bool] = {}

    def _ordered(self, names: Iterable[str]) -> Tuple[str, ...]:
        return tuple(sorted(names, key=self.pos.__getitem__))

    def table(self, do_set: Iterable[str]) -> np.ndarray:
        key = self._ordered(do_set)
        t = self._tables.get(key)
        if t is not None:
            return t
        do_cards = [self.cards[self.pos[n]] for n in key]
        slices = []
        big = False
        for vals in itertools.product(*(range(c) for c in do_cards)):
            dist = post_intervention_distribution(self.model, dict(zip(key, vals)))
            den = 1
            for p in dist.probs.values():
                den = lcm(den, p.denominator)
            arr = {k: p.numerator * (den // p.denominator) for k, p in dist.probs.items()}
            big = big or den >= 2 ** 31
            slices.append(arr)
        dtype = object if big else np.int64
        t = np.zeros(tuple(do_cards) + self.cards, dtype=dtype)
        for idx, vals in enumerate(itertools.product(*(range(c) for c in do_cards))):
            for k, v in slices[idx].items():
                t[vals + k] = v
        self._tables[key] = t
        return t

    def _project(self, do_set: Sequence[str], first: Sequence[str], keep: Sequence[str]) -> np.ndarray:
        """Marginal of the do_set table onto ``keep``, do-axes reordered as ``first``."""
        key = self._ordered(do_set)
        t = self.table(key)
        nd = len(key)
        keep_pos = [self.pos[n] for n in keep]
        drop = tuple(nd + i for i in range(len(self.names)) if i not in keep_pos)
        m = t.sum(axis=drop) if drop else t
        # remaining observed axes are in observed order; reorder to ``keep``
        remaining = sorted(keep_pos)
        perm = [key.index(n) for n in first] + [nd + remaining.index(p) for p in keep_pos]
        return np.transpose(m, perm)

    def holds(self, r: AffectsRelation) -> bool:
        cached = self._holds.get(r)
        if cached is not None:
            return cached
        for n in r.nodes:
            if n not in self.pos:
                raise ValidationError(f"{n!r} is not an observed node of the model")
        xs, ys, zs, ws = (self._ordered(s) for s in (r.x, r.y, r.z, r.w))
        ny = len(ys)
        # a: axes (x..., z..., y..., w...);  b: axes (z..., y..., w...)
        a = self._project(xs + zs, xs + zs, ys + ws)
        b = self._project(zs, zs, ys + ws)
        nx_, nz = len(xs), len(zs)
        y_axes_a = tuple(range(nx_ + nz, nx_ + nz + ny))
        y_axes_b = tuple(range(nz, nz + ny))
        aw = a.sum(axis=y_axes_a, keepdims=True)
        bw = b.sum(axis=y_axes_b, keepdims=True)
        b = b.reshape((1,) * nx_ + b.shape)
        bw = bw.reshape((1,) * nx_ + bw.shape)
        differs = (a * bw) != (b * aw)
        pa, pb = aw > 0, bw > 0
        result = bool(np.any(differs & pa & pb))
        if not result and self.zero_context == DEFINEDNESS:
            result = bool(np.any(pa != pb))
        self._holds[r] = result
        return result

    def classify(self, r: AffectsRelation) -> RelationFlags:
        if not self.holds(r):
            raise ValidationError(f"cannot classify a relation that does not hold: {r}")
        return RelationFlags(irreducible=not self.is_reducible(r),
                             indecreasable=self.is_indecreasable(r),
                             strong=self.is_strongly_indecreasable(r))

    def reducing_subsets(self, r: AffectsRelation) -> List[NameSet]:
        """Non-empty s ⊊ X with s ⊭ Y | {do(Z ∪ (X∖s)), W}."""
        out = []
        for s in proper_subsets(r.x):
            if not self.holds(AffectsRelation(s, r.y, r.z | (r.x - s), r.w)):
                out.append(s)
        return out

    def is_reducible(self, r: AffectsRelation) -> bool:
        return bool(self.reducing_subsets(r))

    def is_indecreasable(self, r: AffectsRelation) -> bool:
        return all(not self.holds(AffectsRelation(r.x, r.y, r.z - {e}, r.w)) for e in r.z)

    def is_strongly_indecreasable(self, r: AffectsRelation) -> bool:
        return self.is_indecreasable(r) and not self.holds(AffectsRelation(r.x, r.y, frozenset(), r.w))


def proper_subsets(s: Iterable[str]) -> Iterator[NameSet]:
    """Non-empty proper subsets, smallest first, deterministic order."""
    items = sorted(s)
    for k in range(1, len(items)):
        for combo in itertools.combinations(items, k):
            yield frozenset(combo)


def subsets(s: Iterable[str], min_size: int = 0) -> Iterator[NameSet]:
    items = sorted(s)
    for k in range(min_size, len(items) + 1):
        for combo in itertools.combinations(items, k):
            yield frozenset(combo)


Bounds = Union[int, Mapping[str, int], Sequence[int]]


def normalize_bounds(bounds: Bounds) -> Dict[str, int]:
    if isinstance(bounds, int):
        out = {k: bounds for k in "XYZW"}
    elif isinstance(bounds, Mapping):
        out = {k: int(bounds.get(k, bounds.get(k.lower(), 2))) for k in "XYZW"}
    else:
        out = dict(zip("XYZW", (int(b) for b in bounds)))
    if out["X"] < 1 or out["Y"] < 1:
        raise ValidationError("bounds for |X| and |Y| must be at least 1")
    if min(out.values()) < 0:
        raise ValidationError("bounds must be non-negative")
    return out


def candidate_relations(names: Sequence[str], bounds: Bounds = 2) -> List[AffectsRelation]:
    """Every well-formed relation over ``names`` within the size bounds, in canonical order."""
    b = normalize_bounds(bounds)
    out = []
    for labels in itertools.product(range(5), repeat=len(names)):
        parts = [[n for n, l in zip(names, labels) if l == k] for k in range(1, 5)]
        x, y, z, w = parts
        if not x or not y:
            continue
        if len(x) > b["X"] or len(y) > b["Y"] or len(z) > b["Z"] or len(w) > b["W"]:
            continue
        out.append(AffectsRelation(frozenset(x), frozenset(y), frozenset(z), frozenset(w)))
    out.sort(key=AffectsRelation.sort_key)
    return out


def affects_holds(model: StructuralModel, r: AffectsRelation, zero_context: str = DEFINEDNESS) -> bool:
    return AffectsEvaluator(model, zero_context).holds(r)


def classify_relation(model: Union[StructuralModel, AffectsEvaluator], r: AffectsRelation) -> RelationFlags:
    ev = model if isinstance(model, AffectsEvaluator) else AffectsEvaluator(model)
    return ev.classify(r)


def enumerate_affects(model: Union[StructuralModel, AffectsEvaluator], bounds: Bounds = 2,
                      nodes: Optional[Sequence[str]] = None) -> AffectsSet:
    """Classify every relation within ``bounds`` (over ``nodes``, default all observed) as present or absent."""
    ev = model if isinstance(model, AffectsEvaluator) else AffectsEvaluator(model)
    names = list(nodes) if nodes is not None else list(ev.names)
    present: Dict[AffectsRelation, RelationFlags] = {}
    absent = []
    for r in candidate_relations(names, bounds):
        if ev.holds(r):
            present[r] = ev.classify(r)
        else:
            absent.append(r)
    return AffectsSet(present, frozenset(absent))
