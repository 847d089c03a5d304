"""Seeded corpora of small models and abstract affects sets for exhaustive and randomized checks.

The seed defaults to the CAUSAL_AFFECTS_SEED environment variable (0 when unset).
"""
from __future__ import annotations

import itertools
import os
import random
from fractions import Fraction
from typing import Iterator, List, Optional, Sequence, Tuple

from .affects_engine import AffectsRelation, AffectsSet
from .core_model import CausalStructure, Mechanism, Node, StructuralModel

SEED_ENV = "CAUSAL_AFFECTS_SEED"


def default_seed() -> int:
    return int(os.environ.get(SEED_ENV, "0"))


def make_rng(seed: Optional[int] = None) -> random.Random:
    return random.Random(default_seed() if seed is None else seed)


def labeled_dags(n: int) -> Iterator[List[Tuple[int, int]]]:
    """Every DAG on nodes 0..n-1 as an edge list (543 of them for n = 4)."""
    pairs = list(itertools.combinations(range(n), 2))
    # each unordered pair is absent, forward or backward; keep the acyclic choices
    for choice in itertools.product((0, 1, 2), repeat=len(pairs)):
        edges = []
        for (a, b), c in zip(pairs, choice):
            if c == 1:
                edges.append((a, b))
            elif c == 2:
                edges.append((b, a))
        if _acyclic(n, edges):
            yield edges


def _acyclic(n: int, edges) -> bool:
    indeg = [0] * n
    out = [[] for _ in range(n)]
    for a, b in edges:
        out[a].append(b)
        indeg[b] += 1
    stack = [v for v in range(n) if indeg[v] == 0]
    seen = 0
    while stack:
        v = stack.pop()
        seen += 1
        for w in out[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                stack.append(w)
    return seen == n


def _depends_on_all(table: Sequence[int], k: int) -> bool:
    for j in range(k):
        stride = 2 ** (k - 1 - j)
        if all(table[i] == table[i + stride] for i in range(2 ** k) if not (i // stride) % 2):
            return False
    return True


def random_full_table(k: int, rng: random.Random) -> List[int]:
    """A binary function of k binary parents that genuinely depends on each of them."""
    while True:
        table = [rng.randrange(2) for _ in range(2 ** k)]
        if _depends_on_all(table, k):
            return table


NAMES = "ABCDEF"


def dag_model(n: int, edges, rng: random.Random) -> StructuralModel:
    names = NAMES[:n]
    parents = {names[v]: [names[a] for a, b in sorted(edges) if b == v] for v in range(n)}
    nodes = [Node(name, 2) for name in names]
    mechs = {}
    for name in names:
        ps = parents[name]
        if ps:
            mechs[name] = Mechanism.deterministic(2, (2,) * len(ps), random_full_table(len(ps), rng))
        else:
            mechs[name] = Mechanism.exogenous([Fraction(1, 2), Fraction(1, 2)])
    return StructuralModel(CausalStructure(nodes, parents), mechs)


def dag_model_corpus(max_nodes: int = 4, per_dag: int = 2, seed: Optional[int] = None) -> List[StructuralModel]:
    """``per_dag`` random deterministic models for every labeled DAG on 1..max_nodes binary nodes."""
    rng = make_rng(seed)
    out = []
    for n in range(1, max_nodes + 1):
        for edges in labeled_dags(n):
            for _ in range(per_dag):
                out.append(dag_model(n, edges, rng))
    return out


def random_affects_set(rng: random.Random, max_nodes: int = 6, max_relations: int = 5, max_x: int = 3,
                       max_y: int = 2) -> AffectsSet:
    """Irreducible 0th-order relations X ⊨ Y over at most ``max_nodes`` labelled nodes."""
    n = rng.randint(2, max_nodes)
    names = [f"e{i}" for i in range(1, n + 1)]
    rels = set()
    for _ in range(rng.randint(1, max_relations)):
        x = rng.sample(names, rng.randint(1, min(max_x, n - 1)))
        rest = [v for v in names if v not in x]
        y = rng.sample(rest, rng.randint(1, min(max_y, len(rest))))
        rels.add(AffectsRelation(frozenset(x), frozenset(y)))
    return AffectsSet.from_relations(rels, irreducible=True)
