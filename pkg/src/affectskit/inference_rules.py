"""Causal knowledge derived from affects relations, and the transformation rules between relations."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, Iterable, List, Optional, Union

from .affects_engine import (AffectsEvaluator, AffectsRelation, AffectsSet, Bounds, candidate_relations,
                             enumerate_affects, proper_subsets, render_set, subsets)
from .core_model import CausalStructure, StructuralModel, ValidationError


class RuleId(str, Enum):
    ZO = "ZO"
    AFFECTS_TO_HO = "AFFECTS_TO_HO"
    HO_TRANSFER = "HO_TRANSFER"
    HO_SWITCH = "HO_SWITCH"
    CONDITIONAL_SPLIT = "CONDITIONAL_SPLIT"
    REDUCIBLE_DESCENT = "REDUCIBLE_DESCENT"


# Checks run by verify_rules_on_model in addition to the rules above.  They need
# the model's causal structure: CAUSAL_PATH asks that some element of X has a
# directed path into Y ∪ W; CAUSE_INFERENCE asks that every disjunctive cause
# emitted by infer_causes is realized by a directed path.
STRUCTURAL_CHECKS = ("CAUSAL_PATH", "CAUSE_INFERENCE")


class RuleShapeError(ValidationError):
    pass


class InconsistentFlags(ValidationError):
    pass


@dataclass(frozen=True)
class DisjunctiveCause:
    """``source`` is a cause of at least one node in ``targets``."""

    source: str
    targets: FrozenSet[str]

    def __post_init__(self):
        object.__setattr__(self, "targets", frozenset(self.targets))
        if not self.targets:
            raise ValidationError("a disjunctive cause needs at least one target")
        if self.source in self.targets:
            raise ValidationError(f"source {self.source!r} cannot be among its own targets")

    def __str__(self):
        return f"{self.source}⇝{{{render_set(self.targets)}}}"

    __repr__ = __str__

    def sort_key(self):
        return (self.source, len(self.targets), sorted(self.targets))

    def to_dict(self) -> dict:
        return {"source": self.source, "targets": sorted(self.targets)}

    def realized_in(self, structure: CausalStructure) -> bool:
        return structure.has_path(self.source, self.targets)


@dataclass(frozen=True)
class Conclusion:
    """One alternative of a rule's disjunction.

    ``irreducible`` marks alternatives the rule promises to be irreducible when
    present; ``inherits_irreducible`` marks alternatives that are irreducible
    whenever the premise is.
    """

    relation: AffectsRelation
    irreducible: bool = False
    inherits_irreducible: bool = False

    def __str__(self):
        tag = " (irreducible)" if self.irreducible else ""
        return f"{self.relation}{tag}"


def _is_irreducible(r: AffectsRelation, flags) -> bool:
    if len(r.x) == 1:
        if flags.irreducible is False:
            raise InconsistentFlags(f"{r} has a single-element X but is flagged reducible")
        return True
    return bool(flags.irreducible)


def infer_causes(affects: AffectsSet) -> List[DisjunctiveCause]:
    """Disjunctive causes implied by the present relations.

    Each irreducible X ⊨ Y | {do(Z), W} makes every element of X a cause of some
    node in Y ∪ W.  Each e in Z with a witnessed absence X ⊭ Y | {do(Z∖e), W}
    (listed as absent, or implied by the indecreasable flag) is a cause of some
    node in Y ∪ W.  A cause is dropped when the same source has a strictly
    smaller target set.
    """
    found = set()
    for r, flags in affects.present.items():
        if flags.strong and flags.indecreasable is False:
            raise InconsistentFlags(f"{r} is flagged strongly indecreasable but decreasable")
        targets = r.y | r.w
        if _is_irreducible(r, flags):
            for e in r.x:
                found.add(DisjunctiveCause(e, targets))
        for e in r.z:
            smaller = AffectsRelation(r.x, r.y, r.z - {e}, r.w)
            if flags.indecreasable or flags.strong or smaller in affects.absent:
                found.add(DisjunctiveCause(e, targets))
    return minimize_causes(found)


def minimize_causes(causes: Iterable[DisjunctiveCause]) -> List[DisjunctiveCause]:
    causes = set(causes)
    kept = [c for c in causes
            if not any(o.source == c.source and o.targets < c.targets for o in causes)]
    return sorted(kept, key=DisjunctiveCause.sort_key)


def _need(cond: bool, message: str):
    if not cond:
        raise RuleShapeError(message)


def _as_set(split) -> FrozenSet[str]:
    if split is None:
        return frozenset()
    if isinstance(split, str):
        return frozenset([split])
    return frozenset(split)


def apply_transformation_rule(rule: Union[RuleId, str], r: AffectsRelation, split=None) -> List[Conclusion]:
    """The disjunction of relations implied by ``r`` under ``rule``, in the order the rule states them.

    ``split`` selects Z1 ⊆ Z (ZO, HO_TRANSFER; default all of Z), the part Z1 ⊊ X
    moved into the do-set (AFFECTS_TO_HO), the removed element e_Z (HO_SWITCH),
    or the part W ⊊ Y moved into the conditioning set (CONDITIONAL_SPLIT).
    HO_SWITCH additionally presumes the absence X ⊭ Y | {do(Z∖e_Z), W}, and
    REDUCIBLE_DESCENT presumes that ``r`` is reducible; neither is checked here.
    """
    rule = RuleId(rule)
    x, y, z, w = r.x, r.y, r.z, r.w
    if rule is RuleId.ZO:
        z1 = _as_set(split) or z
        _need(bool(z1) and z1 <= z, "ZO needs a non-empty Z1 inside the do-set")
        z2 = z - z1
        return [Conclusion(AffectsRelation(z1, y, z2, w)), Conclusion(AffectsRelation(x | z1, y, z2, w))]
    if rule is RuleId.AFFECTS_TO_HO:
        z1 = _as_set(split)
        _need(bool(z1) and z1 < x, "AFFECTS_TO_HO needs a non-empty Z1 strictly inside X")
        xr = x - z1
        return [Conclusion(AffectsRelation(xr, y, z | z1, w)), Conclusion(AffectsRelation(z1, y, z, w))]
    if rule is RuleId.HO_TRANSFER:
        z1 = _as_set(split) or z
        _need(bool(z1) and z1 <= z, "HO_TRANSFER needs a non-empty Z1 inside the do-set")
        z2 = z - z1
        return [Conclusion(AffectsRelation(x, y, z2, w)),
                Conclusion(AffectsRelation(z1, y, z2, w)),
                Conclusion(AffectsRelation(z1, y, x | z2, w))]
    if rule is RuleId.HO_SWITCH:
        e = _as_set(split)
        _need(len(e) == 1 and e <= z, "HO_SWITCH needs one element of the do-set")
        zt = z - e
        return [Conclusion(AffectsRelation(e, y, zt, w), irreducible=True),
                Conclusion(AffectsRelation(e, y, zt | x, w), irreducible=True)]
    if rule is RuleId.CONDITIONAL_SPLIT:
        if split is None:
            _need(bool(w), "CONDITIONAL_SPLIT without a split merges W into Y and needs a non-empty W")
            return [Conclusion(AffectsRelation(x, y | w, z), inherits_irreducible=True)]
        wn = _as_set(split)
        _need(not w, "CONDITIONAL_SPLIT with a split needs an unconditional relation")
        _need(bool(wn) and wn < y, "CONDITIONAL_SPLIT needs a non-empty W strictly inside Y")
        return [Conclusion(AffectsRelation(x, y - wn, z, wn)), Conclusion(AffectsRelation(x, wn, z))]
    if rule is RuleId.REDUCIBLE_DESCENT:
        _need(len(x) > 1, "REDUCIBLE_DESCENT needs |X| > 1")
        return [Conclusion(AffectsRelation(s, y, z, w), irreducible=True) for s in proper_subsets(x)]
    raise RuleShapeError(f"unknown rule {rule}")


@dataclass
class VerificationReport:
    checked: Dict[str, int] = field(default_factory=dict)
    violations: List[dict] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {"checked": dict(sorted(self.checked.items())), "violations": self.violations}


def verify_rules_on_model(model: Union[StructuralModel, AffectsEvaluator], bounds: Bounds = 2,
                          affects: Optional[AffectsSet] = None) -> VerificationReport:
    """Check every rule instance whose premise holds in the model.

    Premises range over the relations within ``bounds``; conclusions are
    evaluated on the model whatever their size.
    """
    ev = model if isinstance(model, AffectsEvaluator) else AffectsEvaluator(model)
    structure = ev.model.structure
    report = VerificationReport()
    if affects is None:
        affects = enumerate_affects(ev, bounds)

    def count(kind):
        report.checked[kind] = report.checked.get(kind, 0) + 1

    def fail(kind, premise, split, conclusions, note=""):
        report.violations.append({
            "rule": kind, "premise": str(premise),
            "split": sorted(split) if isinstance(split, frozenset) else split,
            "conclusions": [str(c) for c in conclusions], "note": note})

    def discharged(conclusions: List[Conclusion], premise_irreducible: bool = False) -> bool:
        for c in conclusions:
            if not ev.holds(c.relation):
                continue
            need_irr = c.irreducible or (c.inherits_irreducible and premise_irreducible)
            if need_irr and ev.is_reducible(c.relation):
                continue
            return True
        return False

    for r in affects.sorted_present():
        irreducible = not ev.is_reducible(r)
        for z1 in subsets(r.z, 1):
            for rule in (RuleId.ZO, RuleId.HO_TRANSFER):
                count(rule.value)
                concl = apply_transformation_rule(rule, r, z1)
                if not discharged(concl):
                    fail(rule.value, r, z1, concl)
        for e in sorted(r.z):
            if ev.holds(AffectsRelation(r.x, r.y, r.z - {e}, r.w)):
                continue
            count(RuleId.HO_SWITCH.value)
            concl = apply_transformation_rule(RuleId.HO_SWITCH, r, e)
            if not discharged(concl):
                fail(RuleId.HO_SWITCH.value, r, e, concl)
        for z1 in proper_subsets(r.x):
            count(RuleId.AFFECTS_TO_HO.value)
            concl = apply_transformation_rule(RuleId.AFFECTS_TO_HO, r, z1)
            if not discharged(concl):
                fail(RuleId.AFFECTS_TO_HO.value, r, z1, concl)
        if r.w:
            count(RuleId.CONDITIONAL_SPLIT.value)
            concl = apply_transformation_rule(RuleId.CONDITIONAL_SPLIT, r)
            if not discharged(concl, irreducible):
                fail(RuleId.CONDITIONAL_SPLIT.value, r, None, concl, "merging W into Y")
        else:
            for wn in proper_subsets(r.y):
                count(RuleId.CONDITIONAL_SPLIT.value)
                concl = apply_transformation_rule(RuleId.CONDITIONAL_SPLIT, r, wn)
                if not discharged(concl):
                    fail(RuleId.CONDITIONAL_SPLIT.value, r, wn, concl, "splitting Y")
        if not irreducible:
            count(RuleId.REDUCIBLE_DESCENT.value)
            concl = apply_transformation_rule(RuleId.REDUCIBLE_DESCENT, r)
            if not discharged(concl):
                fail(RuleId.REDUCIBLE_DESCENT.value, r, None, concl)
        count("CAUSAL_PATH")
        if not any(structure.has_path(e, r.y | r.w) for e in r.x):
            fail("CAUSAL_PATH", r, None, [], "no element of X has a directed path into Y ∪ W")

    # the reverse direction of the split equivalence: X ⊨ W | do(Z) implies X ⊨ YW | do(Z)
    names = ev.names
    for t in candidate_relations(names, bounds):
        if not t.w:
            continue
        merged = AffectsRelation(t.x, t.y | t.w, t.z)
        side = AffectsRelation(t.x, t.w, t.z)
        count(RuleId.CONDITIONAL_SPLIT.value)
        if ev.holds(merged) != (ev.holds(t) or ev.holds(side)):
            fail(RuleId.CONDITIONAL_SPLIT.value, merged, sorted(t.w), [Conclusion(t), Conclusion(side)],
                 "equivalence of the merged and split forms")

    for c in infer_causes(affects):
        count("CAUSE_INFERENCE")
        if not c.realized_in(structure):
            report.violations.append({"rule": "CAUSE_INFERENCE", "premise": str(c), "split": None,
                                      "conclusions": [], "note": "no directed path from source to any target"})
    return report


def reconstruct_edges(model: Union[StructuralModel, AffectsEvaluator]) -> FrozenSet[tuple]:
    """Edges X → Y read off as X ⊨ Y | do(S ∖ XY) over the observed nodes.

    This recovers the structure exactly for hidden-free models whose mechanisms
    depend on every parent.
    """
    ev = model if isinstance(model, AffectsEvaluator) else AffectsEvaluator(model)
    names = ev.names
    edges = set()
    for a, b in itertools.permutations(names, 2):
        rest = frozenset(names) - {a, b}
        if ev.holds(AffectsRelation(frozenset([a]), frozenset([b]), rest)):
            edges.add((a, b))
    return frozenset(edges)
