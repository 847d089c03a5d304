"""Finite classical causal structures and structural models.

Distributions are computed exactly with :class:`fractions.Fraction`.  Acyclic
models are solved with the Markov factorization; cyclic models are solved by
enumerating, for every assignment of the exogenous nodes, the joint solutions
of the structural equations and spreading that assignment's weight uniformly
over them.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import networkx as nx

EXOGENOUS = "exogenous-distribution"
DETERMINISTIC = "deterministic-table"
STOCHASTIC = "stochastic-table"
MECHANISM_KINDS = (EXOGENOUS, DETERMINISTIC, STOCHASTIC)


class ModelError(Exception):
    """Base class for model construction and solving failures."""


class ValidationError(ModelError, ValueError):
    pass


class InconsistentModel(ModelError):
    """Some exogenous assignment with positive weight admits no solution."""

    def __init__(self, message: str, assignment: Optional[Dict[str, int]] = None):
        super().__init__(message)
        self.assignment = assignment


class UnsupportedCyclicStochastic(ModelError):
    """A node inside a directed cycle carries a properly stochastic mechanism."""


@dataclass(frozen=True)
class Node:
    name: str
    cardinality: int = 2
    observed: bool = True

    def __post_init__(self):
        if not isinstance(self.cardinality, int) or self.cardinality < 1:
            raise ValidationError(f"node {self.name!r}: cardinality must be a positive integer")


class CausalStructure:
    """A directed graph over named nodes.  Cycles are allowed, self-loops are not.

    Parents are kept in the order they were declared because mechanism tables
    are keyed by parent assignments in that order.
    """

    def __init__(self, nodes: Sequence[Node], parents: Mapping[str, Sequence[str]]):
        names = [n.name for n in nodes]
        if len(set(names)) != len(names):
            raise ValidationError("node names must be unique")
        self.nodes: Tuple[Node, ...] = tuple(nodes)
        self._by_name = {n.name: n for n in nodes}
        pa: Dict[str, Tuple[str, ...]] = {}
        for name in names:
            plist = tuple(parents.get(name, ()))
            for p in plist:
                if p not in self._by_name:
                    raise ValidationError(f"node {name!r}: unknown parent {p!r}")
                if p == name:
                    raise ValidationError(f"node {name!r}: self-loops are not allowed")
            if len(set(plist)) != len(plist):
                raise ValidationError(f"node {name!r}: repeated parent")
            pa[name] = plist
        for name in parents:
            if name not in self._by_name:
                raise ValidationError(f"parents given for unknown node {name!r}")
        self._parents = pa
        ch: Dict[str, List[str]] = {n: [] for n in names}
        for child in names:
            for p in pa[child]:
                ch[p].append(child)
        self._children = {k: tuple(v) for k, v in ch.items()}

    @classmethod
    def from_edges(cls, nodes: Sequence[Node], edges: Iterable[Tuple[str, str]]):
        parents: Dict[str, List[str]] = {n.name: [] for n in nodes}
        for a, b in edges:
            if b not in parents:
                raise ValidationError(f"edge endpoint {b!r} is not a node")
            parents[b].append(a)
        return cls(nodes, parents)

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(n.name for n in self.nodes)

    @property
    def observed(self) -> Tuple[str, ...]:
        return tuple(n.name for n in self.nodes if n.observed)

    @property
    def edges(self) -> frozenset:
        return frozenset((p, c) for c, ps in self._parents.items() for p in ps)

    def node(self, name: str) -> Node:
        try:
            return self._by_name[name]
        except KeyError:
            raise ValidationError(f"unknown node {name!r}") from None

    def __contains__(self, name) -> bool:
        return name in self._by_name

    def parents(self, name: str) -> Tuple[str, ...]:
        self.node(name)
        return self._parents[name]

    def children(self, name: str) -> Tuple[str, ...]:
        self.node(name)
        return self._children[name]

    def _reach(self, start: str, step: Callable[[str], Tuple[str, ...]]) -> frozenset:
        seen = set()
        todo = deque(step(start))
        while todo:
            n = todo.popleft()
            if n in seen:
                continue
            seen.add(n)
            todo.extend(step(n))
        return frozenset(seen)

    def ancestors(self, name: str) -> frozenset:
        """Nodes with a directed path of length >= 1 into ``name``.

        On a cycle the node itself is included.
        """
        self.node(name)
        return self._reach(name, lambda n: self._parents[n])

    def descendants(self, name: str) -> frozenset:
        self.node(name)
        return self._reach(name, lambda n: self._children[n])

    def is_exogenous(self, name: str) -> bool:
        return not self.parents(name)

    def query(self, name: str, kind: str):
        """Dispatch for the structure queries exposed on the command line."""
        if kind == "parents":
            return frozenset(self.parents(name))
        if kind == "children":
            return frozenset(self.children(name))
        if kind == "ancestors":
            return self.ancestors(name)
        if kind == "descendants":
            return self.descendants(name)
        if kind in ("exogenous", "exogenous?"):
            return self.is_exogenous(name)
        raise ValidationError(f"unknown structure query {kind!r}")

    def has_path(self, source: str, targets: Iterable[str]) -> bool:
        """True if some target is reachable from ``source`` by a path of length >= 1."""
        return bool(self.descendants(source) & set(targets))

    def to_networkx(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(self.names)
        g.add_edges_from(self.edges)
        return g

    def is_cyclic(self) -> bool:
        return not nx.is_directed_acyclic_graph(self.to_networkx())

    def cycle_nodes(self) -> frozenset:
        """Nodes lying on at least one directed cycle."""
        out = set()
        for comp in nx.strongly_connected_components(self.to_networkx()):
            if len(comp) > 1:
                out |= comp
        return frozenset(out)


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise ValidationError(f"probabilities must be exact rationals, got float {value!r}")
    try:
        return Fraction(value)
    except (ValueError, TypeError, ZeroDivisionError):
        raise ValidationError(f"cannot read {value!r} as a rational") from None


def parent_assignments(parent_cards: Sequence[int]):
    """All parent assignments in lexicographic order, first parent most significant."""
    return itertools.product(*(range(c) for c in parent_cards))


class Mechanism:
    """A node's conditional distribution, stored as one row per parent assignment.

    ``rows[i]`` is the outcome distribution for the i-th parent assignment in
    :func:`parent_assignments` order.
    """

    def __init__(self, kind: str, cardinality: int, parent_cards: Sequence[int], rows):
        if kind not in MECHANISM_KINDS:
            raise ValidationError(f"unknown mechanism kind {kind!r}")
        self.kind = kind
        self.cardinality = cardinality
        self.parent_cards = tuple(parent_cards)
        n_rows = 1
        for c in self.parent_cards:
            n_rows *= c
        rows = [tuple(_as_fraction(p) for p in row) for row in rows]
        if len(rows) != n_rows:
            raise ValidationError(f"table has {len(rows)} rows, expected {n_rows}")
        for row in rows:
            if len(row) != cardinality:
                raise ValidationError(f"row {row} does not have {cardinality} entries")
            if any(p < 0 for p in row):
                raise ValidationError("negative probability in table")
            if sum(row) != 1:
                raise ValidationError(f"row {[str(p) for p in row]} does not sum to 1")
        if kind == EXOGENOUS and self.parent_cards:
            raise ValidationError("an exogenous distribution cannot have parents")
        if kind == DETERMINISTIC and not all(_is_point(r) for r in rows):
            raise ValidationError("deterministic table has a non-0/1 row")
        self.rows: Tuple[Tuple[Fraction, ...], ...] = tuple(rows)
        self._strides = _strides(self.parent_cards)

    @classmethod
    def exogenous(cls, dist: Sequence) -> "Mechanism":
        return cls(EXOGENOUS, len(dist), (), [dist])

    @classmethod
    def point(cls, cardinality: int, value: int) -> "Mechanism":
        row = [Fraction(int(i == value)) for i in range(cardinality)]
        return cls(EXOGENOUS, cardinality, (), [row])

    @classmethod
    def deterministic(cls, cardinality: int, parent_cards: Sequence[int], outcomes) -> "Mechanism":
        """``outcomes`` is either a callable on parent values or a list in table order."""
        if callable(outcomes):
            outcomes = [outcomes(*vals) for vals in parent_assignments(parent_cards)]
        rows = []
        for v in outcomes:
            if not isinstance(v, int) or not 0 <= v < cardinality:
                raise ValidationError(f"deterministic outcome {v!r} out of range")
            rows.append([Fraction(int(i == v)) for i in range(cardinality)])
        return cls(DETERMINISTIC, cardinality, parent_cards, rows)

    @classmethod
    def stochastic(cls, cardinality: int, parent_cards: Sequence[int], rows) -> "Mechanism":
        return cls(STOCHASTIC, cardinality, parent_cards, rows)

    def row(self, parent_values: Sequence[int]) -> Tuple[Fraction, ...]:
        idx = 0
        for v, s in zip(parent_values, self._strides):
            idx += v * s
        return self.rows[idx]

    @property
    def is_deterministic(self) -> bool:
        return all(_is_point(r) for r in self.rows)

    def outcome(self, parent_values: Sequence[int]) -> int:
        row = self.row(parent_values)
        return row.index(1)

    def essential_parents(self) -> Tuple[bool, ...]:
        """For each parent, whether some change of it alone changes the row."""
        flags = []
        for k, card in enumerate(self.parent_cards):
            essential = False
            for vals in parent_assignments(self.parent_cards):
                if vals[k] != 0:
                    continue
                base = self.row(vals)
                for alt in range(1, card):
                    other = vals[:k] + (alt,) + vals[k + 1:]
                    if self.row(other) != base:
                        essential = True
                        break
                if essential:
                    break
            flags.append(essential)
        return tuple(flags)


def _is_point(row) -> bool:
    return all(p in (0, 1) for p in row)


def _strides(cards: Sequence[int]) -> Tuple[int, ...]:
    out = []
    s = 1
    for c in reversed(cards):
        out.append(s)
        s *= c
    return tuple(reversed(out))


class JointDistribution:
    """Exact distribution over an ordered scope.  Zero entries are not stored."""

    def __init__(self, scope: Sequence[str], cards: Sequence[int], probs: Mapping[Tuple[int, ...], Fraction]):
        self.scope = tuple(scope)
        self.cards = tuple(cards)
        self.probs: Dict[Tuple[int, ...], Fraction] = {k: v for k, v in probs.items() if v != 0}
        self._index = {n: i for i, n in enumerate(self.scope)}

    def __eq__(self, other):
        if not isinstance(other, JointDistribution):
            return NotImplemented
        return self.scope == other.scope and self.probs == other.probs

    def __repr__(self):
        body = ", ".join(f"{k}: {v}" for k, v in sorted(self.probs.items()))
        return f"JointDistribution({self.scope}, {{{body}}})"

    def total(self) -> Fraction:
        return sum(self.probs.values(), Fraction(0))

    def __getitem__(self, key: Tuple[int, ...]) -> Fraction:
        return self.probs.get(tuple(key), Fraction(0))

    def support(self):
        return sorted(self.probs)

    def prob(self, event: Mapping[str, int]) -> Fraction:
        """Probability of a partial assignment."""
        idx = [(self._index[n], v) for n, v in event.items()]
        return sum((p for k, p in self.probs.items() if all(k[i] == v for i, v in idx)), Fraction(0))

    def marginal(self, names: Sequence[str]) -> "JointDistribution":
        names = tuple(names)
        pos = [self._index[n] for n in names]
        out: Dict[Tuple[int, ...], Fraction] = {}
        for k, p in self.probs.items():
            key = tuple(k[i] for i in pos)
            out[key] = out.get(key, Fraction(0)) + p
        return JointDistribution(names, [self.cards[i] for i in pos], out)

    def condition(self, event: Mapping[str, int]) -> "JointDistribution":
        """The distribution given a partial assignment of positive probability."""
        norm = self.prob(event)
        if norm == 0:
            raise ValueError(f"conditioning on a zero-probability event {dict(event)}")
        idx = [(self._index[n], v) for n, v in event.items()]
        return JointDistribution(
            self.scope, self.cards,
            {k: p / norm for k, p in self.probs.items() if all(k[i] == v for i, v in idx)})

    def to_dict(self) -> dict:
        return {
            "scope": list(self.scope),
            "probabilities": [
                {"assignment": dict(zip(self.scope, k)), "p": str(v)}
                for k, v in sorted(self.probs.items())
            ],
        }


class StructuralModel:
    """A causal structure with one mechanism per node.

    Parameters
    ----------
    structure : CausalStructure
    mechanisms : mapping from node name to :class:`Mechanism`
    check_dependence : reject mechanisms that ignore one of their parents
    """

    def __init__(self, structure: CausalStructure, mechanisms: Mapping[str, Mechanism],
                 check_dependence: bool = True):
        self.structure = structure
        missing = [n for n in structure.names if n not in mechanisms]
        if missing:
            raise ValidationError(f"no mechanism for node(s) {missing}")
        extra = [n for n in mechanisms if n not in structure]
        if extra:
            raise ValidationError(f"mechanism given for unknown node(s) {extra}")
        for name in structure.names:
            mech = mechanisms[name]
            node = structure.node(name)
            pcards = tuple(structure.node(p).cardinality for p in structure.parents(name))
            if mech.cardinality != node.cardinality:
                raise ValidationError(f"node {name!r}: mechanism has {mech.cardinality} outcomes, "
                                      f"node has {node.cardinality}")
            if mech.parent_cards != pcards:
                raise ValidationError(f"node {name!r}: table is not keyed by its parents {structure.parents(name)}")
            if check_dependence and mech.kind != EXOGENOUS:
                for p, ok in zip(structure.parents(name), mech.essential_parents()):
                    if not ok:
                        raise ValidationError(f"node {name!r}: mechanism does not depend on parent {p!r}")
        self.mechanisms: Dict[str, Mechanism] = dict(mechanisms)
        self._plans: Dict[frozenset, "_Plan"] = {}

    @property
    def observed(self) -> Tuple[str, ...]:
        return self.structure.observed

    def cardinality(self, name: str) -> int:
        return self.structure.node(name).cardinality

    def intervene(self, do: Mapping[str, int]) -> "StructuralModel":
        """The mutilated model: do-targets lose their parents and become point masses."""
        _check_do(self, do)
        parents = {n: (() if n in do else self.structure.parents(n)) for n in self.structure.names}
        structure = CausalStructure(self.structure.nodes, parents)
        mechs = dict(self.mechanisms)
        for n, v in do.items():
            mechs[n] = Mechanism.point(self.cardinality(n), v)
        return StructuralModel(structure, mechs, check_dependence=False)

    def _plan(self, targets: frozenset) -> "_Plan":
        plan = self._plans.get(targets)
        if plan is None:
            plan = _Plan(self, targets)
            self._plans[targets] = plan
        return plan


def _check_do(model: StructuralModel, do: Mapping[str, int]) -> None:
    for n, v in do.items():
        node = model.structure.node(n)
        if not node.observed:
            raise ValidationError(f"cannot intervene on unobserved node {n!r}")
        if not isinstance(v, int) or not 0 <= v < node.cardinality:
            raise ValidationError(f"intervention value {v!r} out of range for {n!r}")


class _Plan:
    """Evaluation order for the model mutilated on a fixed set of do-targets."""

    def __init__(self, model: StructuralModel, targets: frozenset):
        s = model.structure
        names = s.names
        self.index = {n: i for i, n in enumerate(names)}
        self.cards = [s.node(n).cardinality for n in names]
        self.targets = targets
        self.parents = [() if n in targets else tuple(self.index[p] for p in s.parents(n)) for n in names]
        g = nx.DiGraph()
        g.add_nodes_from(range(len(names)))
        for i, ps in enumerate(self.parents):
            g.add_edges_from((p, i) for p in ps)
        cond = nx.condensation(g)
        order = list(nx.lexicographical_topological_sort(cond, key=lambda c: min(cond.nodes[c]["members"])))
        self.exogenous = [i for i in range(len(names)) if not self.parents[i]]
        self.steps: List[Tuple[str, Tuple[int, ...]]] = []
        self.cyclic = False
        for c in order:
            members = tuple(sorted(cond.nodes[c]["members"]))
            if len(members) == 1:
                if not self.parents[members[0]]:
                    continue
                self.steps.append(("node", members))
            else:
                self.cyclic = True
                for m in members:
                    if not model.mechanisms[names[m]].is_deterministic:
                        raise UnsupportedCyclicStochastic(
                            f"node {names[m]!r} lies on a cycle but has a stochastic mechanism")
                self.steps.append(("cycle", members))
        self.mechs = [model.mechanisms[n] for n in names]
        self.observed_pos = [i for i, n in enumerate(names) if s.node(n).observed]


def _solve(model: StructuralModel, do: Mapping[str, int]) -> JointDistribution:
    _check_do(model, do)
    plan = model._plan(frozenset(do))
    names = model.structure.names
    n = len(names)
    mechs = plan.mechs
    parents = plan.parents
    obs = plan.observed_pos
    forced = {plan.index[k]: v for k, v in do.items()}
    result: Dict[Tuple[int, ...], Fraction] = {}

    exo_rows = []
    for i in plan.exogenous:
        if i in forced:
            exo_rows.append([(forced[i], Fraction(1))])
        else:
            exo_rows.append([(v, p) for v, p in enumerate(mechs[i].rows[0]) if p != 0])

    steps = plan.steps
    values = [0] * n

    def descend(k: int, weight: Fraction, leaves: list):
        if k == len(steps):
            leaves.append((tuple(values[i] for i in obs), weight))
            return
        kind, members = steps[k]
        if kind == "node":
            i = members[0]
            row = mechs[i].row([values[p] for p in parents[i]])
            for v, p in enumerate(row):
                if p != 0:
                    values[i] = v
                    descend(k + 1, weight * p, leaves)
            return
        for combo in itertools.product(*(range(plan.cards[m]) for m in members)):
            for m, v in zip(members, combo):
                values[m] = v
            if all(mechs[m].outcome([values[p] for p in parents[m]]) == values[m] for m in members):
                descend(k + 1, weight, leaves)

    for combo in itertools.product(*exo_rows):
        weight = Fraction(1)
        for i, (v, p) in zip(plan.exogenous, combo):
            values[i] = v
            weight *= p
        leaves: list = []
        descend(0, Fraction(1), leaves)
        total = sum((w for _, w in leaves), Fraction(0))
        if total == 0:
            assignment = {names[i]: values[i] for i in plan.exogenous}
            raise InconsistentModel(
                f"the structural equations have no solution for exogenous assignment {assignment}",
                assignment)
        scale = weight / total if plan.cyclic else weight
        for key, w in leaves:
            result[key] = result.get(key, Fraction(0)) + w * scale

    return JointDistribution([names[i] for i in obs], [plan.cards[i] for i in obs], result)


def solve_observed_distribution(model: StructuralModel) -> JointDistribution:
    """Joint distribution of the observed nodes.

    Acyclic models use the Markov factorization.  For cyclic models every
    cycle node must be deterministic; for each exogenous assignment the
    solutions of the equations share its weight uniformly (stochastic factors
    of nodes outside cycles weight the solutions).  Raises
    :class:`InconsistentModel` when some positive-weight exogenous assignment
    has no solution.
    """
    return _solve(model, {})


def post_intervention_distribution(model: StructuralModel, do: Mapping[str, int]) -> JointDistribution:
    """Observed distribution of the model with every do-target cut from its parents and forced."""
    return _solve(model, dict(do))
