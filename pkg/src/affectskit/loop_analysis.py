"""Potential cause graphs, loop graphs, the resolution oracle, and affects chains."""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from math import prod
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

from .affects_engine import AffectsRelation, AffectsSet, render_set
from .core_model import ValidationError

DEFAULT_RESOLUTION_CAP = 10 ** 6
DEFAULT_CHAIN_CAP = 10 ** 5


class CapExceeded(RuntimeError):
    """A search would exceed its configured size limit."""


@dataclass(frozen=True, order=True)
class IndexedArrow:
    source: str
    target: str
    index: Tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "index", tuple(sorted(self.index)))
        if self.target not in self.index:
            raise ValidationError(f"arrow target {self.target!r} must belong to its index {self.index}")
        if self.source in self.index:
            raise ValidationError(f"arrow source {self.source!r} cannot belong to its index {self.index}")

    @property
    def family(self) -> Tuple[str, Tuple[str, ...]]:
        return (self.source, self.index)

    def __str__(self):
        return f"{self.source}⇝{{{render_set(self.index)}}}{self.target}"

    def to_dict(self) -> dict:
        return {"source": self.source, "target": self.target, "index": list(self.index)}


@dataclass(frozen=True)
class PotentialCauseGraph:
    nodes: FrozenSet[str]
    arrows: FrozenSet[IndexedArrow]

    def __post_init__(self):
        object.__setattr__(self, "nodes", frozenset(self.nodes))
        object.__setattr__(self, "arrows", frozenset(self.arrows))
        for a in self.arrows:
            if a.source not in self.nodes or a.target not in self.nodes:
                raise ValidationError(f"arrow {a} leaves the node set")

    @classmethod
    def from_families(cls, families: Iterable[Tuple[str, Iterable[str]]], nodes: Iterable[str] = ()):
        arrows = set()
        node_set = set(nodes)
        for source, index in families:
            index = tuple(sorted(index))
            node_set.add(source)
            node_set.update(index)
            arrows.update(IndexedArrow(source, t, index) for t in index)
        return cls(frozenset(node_set), frozenset(arrows))

    def __bool__(self):
        return bool(self.nodes)

    def families(self) -> Dict[Tuple[str, Tuple[str, ...]], FrozenSet[str]]:
        out: Dict[Tuple[str, Tuple[str, ...]], Set[str]] = {}
        for a in self.arrows:
            out.setdefault(a.family, set()).add(a.target)
        return {k: frozenset(v) for k, v in sorted(out.items())}

    def edges(self) -> FrozenSet[Tuple[str, str]]:
        return frozenset((a.source, a.target) for a in self.arrows)

    def sorted_arrows(self) -> List[IndexedArrow]:
        return sorted(self.arrows)

    def to_dict(self) -> dict:
        return {"nodes": sorted(self.nodes), "arrows": [a.to_dict() for a in self.sorted_arrows()]}

    def to_dot(self, name: str = "G") -> str:
        lines = [f"digraph {name} {{"]
        for n in sorted(self.nodes):
            lines.append(f'  "{n}";')
        for a in self.sorted_arrows():
            lines.append(f'  "{a.source}" -> "{a.target}" [label="{{{render_set(a.index)}}}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


# A loop graph has the same shape as the graph it was pruned from.
LoopGraph = PotentialCauseGraph


def _irreducible_or_none(r: AffectsRelation, flags) -> Optional[bool]:
    if len(r.x) == 1:
        return True
    return flags.irreducible


def cause_families(affects: AffectsSet, extended: bool = False, on_unflagged: str = "error"
                   ) -> Tuple[List[Tuple[str, FrozenSet[str]]], List[str]]:
    """Raw (source, index) pairs before deduplication, plus warnings about skipped relations."""
    families = []
    warnings = []
    for r in affects.sorted_present():
        flags = affects.present[r]
        targets = r.y | r.w
        irr = _irreducible_or_none(r, flags)
        if irr is None:
            if on_unflagged == "error":
                raise ValidationError(f"{r} has |X| > 1 and no irreducibility flag")
            warnings.append(f"ignored {r}: irreducibility unknown")
        elif irr:
            families.extend((e, targets) for e in sorted(r.x))
        else:
            warnings.append(f"ignored {r}: reducible")
        if extended:
            for e in sorted(r.z):
                witness = AffectsRelation(r.x, r.y, r.z - {e}, r.w)
                if flags.indecreasable or flags.strong or witness in affects.absent:
                    families.append((e, targets))
    return families, warnings


def deduplicate_families(families: Iterable[Tuple[str, Iterable[str]]]) -> List[Tuple[str, FrozenSet[str]]]:
    """Drop a source's family B when the same source also has a family A ⊊ B."""
    uniq = {(s, frozenset(t)) for s, t in families}
    kept = [(s, t) for s, t in uniq if not any(s2 == s and t2 < t for s2, t2 in uniq)]
    return sorted(kept, key=lambda f: (f[0], sorted(f[1])))


def build_potential_cause_graph(affects: AffectsSet, extended: bool = False,
                                on_unflagged: str = "error") -> PotentialCauseGraph:
    """Arrows e_X ⇝_{Y∪W} e for every irreducible present relation.

    With ``extended`` each do-set element e_Z whose removal is witnessed to
    destroy the relation contributes a family as well.  Relations with |X| > 1
    and no irreducibility flag raise unless ``on_unflagged="ignore"``.
    """
    families, _ = cause_families(affects, extended, on_unflagged)
    nodes = set()
    for r in affects.present:
        nodes |= r.nodes
    return PotentialCauseGraph.from_families(deduplicate_families(families), nodes)


def build_loop_graph(g: PotentialCauseGraph, rng: Optional[random.Random] = None) -> LoopGraph:
    """Prune childless nodes together with the arrow families pointing at them, then parentless nodes.

    Without ``rng`` all childless nodes are removed at once in each round; with
    ``rng`` one randomly chosen childless node is removed per step.  Both orders
    reach the same fixed point.
    """
    nodes = set(g.nodes)
    arrows = set(g.arrows)
    while True:
        sources = {a.source for a in arrows}
        childless = sorted(nodes - sources)
        if not childless:
            break
        doomed = {rng.choice(childless)} if rng is not None else set(childless)
        nodes -= doomed
        dropped = {a.family for a in arrows if a.target in doomed}
        arrows = {a for a in arrows if a.family not in dropped}
    # Removing a parentless node deletes only its outgoing arrows, so no new childless nodes appear.
    while True:
        targets = {a.target for a in arrows}
        parentless = sorted(nodes - targets)
        if not parentless:
            break
        doomed = {rng.choice(parentless)} if rng is not None else set(parentless)
        nodes -= doomed
        arrows = {a for a in arrows if a.source not in doomed}
    return PotentialCauseGraph(frozenset(nodes), frozenset(arrows))


def find_acyclic_resolution(families: Sequence[Tuple[str, FrozenSet[str]]],
                            cap: int = DEFAULT_RESOLUTION_CAP) -> Optional[List[Tuple[str, str]]]:
    """Choose one target per (source, index) pair so that the chosen edges form an acyclic digraph.

    Returns the lexicographically first such choice, or ``None`` when every
    resolution contains a directed cycle.  Partial choices that already close a
    cycle are abandoned, since adding edges never removes a cycle.
    """
    fams = sorted({(s, frozenset(t)) for s, t in families}, key=lambda f: (f[0], sorted(f[1])))
    total = prod(len(t) for _, t in fams)
    if total > cap:
        raise CapExceeded(f"{total} resolutions exceed the cap of {cap}")
    succ: Dict[str, Dict[str, int]] = {}

    def reaches(a: str, b: str) -> bool:
        stack, seen = [a], {a}
        while stack:
            u = stack.pop()
            if u == b:
                return True
            for v in succ.get(u, ()):
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return False

    chosen: List[Tuple[str, str]] = []

    def search(k: int) -> bool:
        if k == len(fams):
            return True
        s, targets = fams[k]
        for t in sorted(targets):
            if reaches(t, s):
                continue
            out = succ.setdefault(s, {})
            out[t] = out.get(t, 0) + 1
            chosen.append((s, t))
            if search(k + 1):
                return True
            chosen.pop()
            out[t] -= 1
            if not out[t]:
                del out[t]
        return False

    if search(0):
        return sorted(set(chosen))
    return None


def count_resolutions(families: Sequence[Tuple[str, FrozenSet[str]]]) -> int:
    return prod(len(t) for _, t in {(s, frozenset(t)) for s, t in families})


@dataclass
class AclReport:
    acl_present: Optional[bool]
    mode: str
    extended: bool = False
    loop_graph: Optional[LoopGraph] = None
    acyclic_resolution: Optional[List[Tuple[str, str]]] = None
    oracle_acl: Optional[bool] = None
    agree: Optional[bool] = None
    warnings: List[str] = field(default_factory=list)

    @property
    def verdict(self) -> str:
        if self.acl_present is None:
            return "unknown"
        return "acl" if self.acl_present else "no-acl"

    def to_dict(self) -> dict:
        out = {"acl_present": self.acl_present, "verdict": self.verdict, "mode": self.mode,
               "extended": self.extended}
        if self.loop_graph is not None:
            out["loop_graph"] = self.loop_graph.to_dict()
        if self.mode != "loop-graph":
            out["oracle_acl"] = self.oracle_acl
            out["acyclic_resolution"] = [list(e) for e in self.acyclic_resolution or []]
        if self.agree is not None:
            out["agree"] = self.agree
        if self.warnings:
            out["warnings"] = self.warnings
        return out


def detect_acl(affects: AffectsSet, mode: str = "loop-graph", extended: bool = False,
               cap: int = DEFAULT_RESOLUTION_CAP) -> AclReport:
    """Decide whether the relations force a causal loop.

    ``loop-graph`` looks at the loop graph, ``oracle`` searches for an acyclic
    resolution, ``both`` runs the two and records whether they agree.  On the
    extended graph only a non-empty loop graph is conclusive; an empty one
    yields ``acl_present=None``.
    """
    if mode not in ("loop-graph", "oracle", "both"):
        raise ValidationError(f"unknown mode {mode!r}")
    families, warnings = cause_families(affects, extended, on_unflagged="ignore")
    report = AclReport(None, mode, extended, warnings=warnings)
    if mode in ("loop-graph", "both"):
        nodes = set()
        for r in affects.present:
            nodes |= r.nodes
        pcg = PotentialCauseGraph.from_families(deduplicate_families(families), nodes)
        report.loop_graph = build_loop_graph(pcg)
        graph_acl = bool(report.loop_graph)
        report.acl_present = graph_acl if (graph_acl or not extended) else None
    if mode in ("oracle", "both"):
        report.acyclic_resolution = find_acyclic_resolution(families, cap)
        report.oracle_acl = report.acyclic_resolution is None
        if mode == "oracle":
            report.acl_present = report.oracle_acl if (report.oracle_acl or not extended) else None
        else:
            report.agree = bool(report.loop_graph) == report.oracle_acl
    return report


# ---- complete affects chains ---------------------------------------------------------------

def chain_relations(affects: AffectsSet) -> List[AffectsRelation]:
    """Irreducible unconditional 0th-order present relations, the building blocks of chains."""
    out = []
    for r in affects.sorted_present():
        if r.z or r.w:
            continue
        if _irreducible_or_none(r, affects.present[r]):
            out.append(r)
    return out


@dataclass(frozen=True)
class AffectsChain:
    """Relations r1..rm with Y(ri) ⊆ X(ri+1); it leads from any subset of X(r1) to Y(rm)."""

    relations: Tuple[AffectsRelation, ...]

    @property
    def start(self) -> FrozenSet[str]:
        return self.relations[0].x

    @property
    def end(self) -> FrozenSet[str]:
        return self.relations[-1].y

    def __str__(self):
        return " → ".join(str(r) for r in self.relations)

    def to_dict(self) -> dict:
        return {"start": sorted(self.start), "end": sorted(self.end), "relations": [str(r) for r in self.relations]}


def _successors(rels: Sequence[AffectsRelation]) -> Dict[int, List[int]]:
    return {i: [j for j, s in enumerate(rels) if r.y <= s.x] for i, r in enumerate(rels)}


def find_chains(affects: AffectsSet, cap: int = DEFAULT_CHAIN_CAP) -> List[AffectsChain]:
    """Every chain that uses no relation twice."""
    rels = chain_relations(affects)
    succ = _successors(rels)
    out: List[AffectsChain] = []

    def extend(path: List[int]):
        if len(out) >= cap:
            raise CapExceeded(f"more than {cap} affects chains")
        out.append(AffectsChain(tuple(rels[i] for i in path)))
        for j in succ[path[-1]]:
            if j not in path:
                path.append(j)
                extend(path)
                path.pop()

    for i in range(len(rels)):
        extend([i])
    return out


def _chain_ends(rels, succ) -> Dict[int, Set[FrozenSet[str]]]:
    """For each relation, the end sets of chains starting with it."""
    ends = {}
    for i in range(len(rels)):
        seen = {i}
        stack = [i]
        while stack:
            u = stack.pop()
            for v in succ[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        ends[i] = {rels[j].y for j in seen}
    return ends


def _find_cycle(succ: Dict[int, List[int]], allowed: Set[int]) -> Optional[List[int]]:
    """A directed cycle among ``allowed`` relation indices, lexicographically first by start."""
    for start in sorted(allowed):
        prev = {start: None}
        queue = [start]
        while queue:
            u = queue.pop(0)
            for v in succ[u]:
                if v not in allowed:
                    continue
                if v == start:
                    path = [u]
                    while prev[path[-1]] is not None:
                        path.append(prev[path[-1]])
                    return path[::-1]
                if v not in prev:
                    prev[v] = u
                    queue.append(v)
    return None


def _acl6a_witness(rels, succ) -> Optional[dict]:
    ends = _chain_ends(rels, succ)
    # chains starting from a single element e: every relation with e in X starts one
    reach_from: Dict[str, Set[FrozenSet[str]]] = {}
    for i, r in enumerate(rels):
        for e in r.x:
            reach_from.setdefault(e, set()).update(ends[i])
    candidates = sorted({r.y for r in rels}, key=lambda s: (len(s), sorted(s)))
    for i, r1 in enumerate(rels):
        s1 = r1.x
        # least fixed point: a set T is good when each element reaches a subset of S1 or a good set disjoint from T
        good: Set[FrozenSet[str]] = set()
        changed = True
        while changed:
            changed = False
            for t in candidates:
                if t in good:
                    continue
                if all(any(end <= s1 or (not (end & t) and end in good) for end in reach_from.get(e, ()))
                       for e in t):
                    good.add(t)
                    changed = True
        for s2 in sorted(ends[i], key=lambda s: (len(s), sorted(s))):
            if s2 in good:
                return {"S1": sorted(s1), "S2": sorted(s2), "first": str(r1)}
    return None


def find_affects_chains_and_classify(affects: AffectsSet, cap: int = DEFAULT_CHAIN_CAP) -> dict:
    """Enumerate complete affects chains and report every matched loop class with a witness.

    Classes: ACL2a (a cycle of single-element relations), ACL3 (S1⊨e2 and
    S2⊨e1 with e1 ∈ S1, e2 ∈ S2 and S1, S2 disjoint), ACL5 (a chain from a set
    back to itself) and ACL6a (a chain from S1 to S2 whose elements all lead,
    possibly through further disjoint sets, back into S1).  Only irreducible
    relations with empty do-set and conditioning set take part.
    """
    rels = chain_relations(affects)
    succ = _successors(rels)
    chains = find_chains(affects, cap)
    classes: Dict[str, dict] = {}

    cycle = _find_cycle(succ, set(range(len(rels))))
    if cycle is not None:
        classes["ACL5"] = {"relations": [str(rels[i]) for i in cycle], "S1": sorted(rels[cycle[-1]].y)}
    singles = {i for i, r in enumerate(rels) if len(r.x) == 1 and len(r.y) == 1}
    cycle = _find_cycle(succ, singles)
    if cycle is not None:
        classes["ACL2a"] = {"relations": [str(rels[i]) for i in cycle]}
    for r, s in itertools.permutations(rels, 2):
        if len(r.y) == 1 and len(s.y) == 1 and not (r.x & s.x) and r.y <= s.x and s.y <= r.x:
            classes["ACL3"] = {"relations": [str(r), str(s)]}
            break
    witness = _acl6a_witness(rels, succ)
    if witness is not None:
        classes["ACL6a"] = witness
    return {"chains": chains, "classes": dict(sorted(classes.items()))}
