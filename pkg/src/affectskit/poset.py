"""Finite strict partial orders and the order-theoretic properties used for spacetime embeddings.

Point sets are handled internally as integer bitmasks over the element list,
which keeps the exhaustive property checks cheap.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple

import networkx as nx

from .core_model import ValidationError

GRID_POINT_LIMIT = 20000


class CycleDetected(ValidationError):
    def __init__(self, witness: Sequence[str]):
        self.witness = list(witness)
        super().__init__("order relation contains a cycle: " + " ≺ ".join(self.witness + self.witness[:1]))


class Poset:
    """A finite strict partial order, stored transitively closed.

    ``up[i]`` is the bitmask of the inclusive future of element ``i``.
    """

    def __init__(self, elements: Sequence[str], up: Sequence[int]):
        self.elements: Tuple[str, ...] = tuple(elements)
        self.index: Dict[str, int] = {e: i for i, e in enumerate(self.elements)}
        self.up: Tuple[int, ...] = tuple(up)
        self.full = (1 << len(self.elements)) - 1
        down = [0] * len(self.elements)
        for i, m in enumerate(self.up):
            for j in _bits(m):
                down[j] |= 1 << i
        self.down: Tuple[int, ...] = tuple(down)

    def __len__(self):
        return len(self.elements)

    def __repr__(self):
        return f"Poset({list(self.elements)}, covers={self.covers()})"

    def __eq__(self, other):
        return isinstance(other, Poset) and self.elements == other.elements and self.up == other.up

    def __hash__(self):
        return hash((self.elements, self.up))

    # -- conversions between names and masks --
    def mask(self, points: Iterable[str]) -> int:
        m = 0
        for p in points:
            if p not in self.index:
                raise ValidationError(f"unknown element {p!r}")
            m |= 1 << self.index[p]
        return m

    def names(self, mask: int) -> FrozenSet[str]:
        return frozenset(self.elements[i] for i in _bits(mask))

    # -- order relation --
    def leq(self, a: str, b: str) -> bool:
        return bool(self.up[self.index[a]] >> self.index[b] & 1)

    def lt(self, a: str, b: str) -> bool:
        return a != b and self.leq(a, b)

    def comparable(self, a: str, b: str) -> bool:
        return self.leq(a, b) or self.leq(b, a)

    def relations(self) -> List[Tuple[str, str]]:
        return sorted((a, b) for a in self.elements for b in self.elements if self.lt(a, b))

    def covers(self) -> List[Tuple[str, str]]:
        out = []
        for i, a in enumerate(self.elements):
            strict = self.up[i] & ~(1 << i)
            for j in _bits(strict):
                between = strict & self.down[j] & ~(1 << j)
                if not between:
                    out.append((a, self.elements[j]))
        return sorted(out)

    # -- futures and minima on masks --
    def fs_mask(self, mask: int) -> int:
        """Support future: intersection of inclusive futures; the whole poset for the empty set."""
        out = self.full
        for i in _bits(mask):
            out &= self.up[i]
        return out

    def min_mask(self, mask: int) -> int:
        out = 0
        for i in _bits(mask):
            if not (self.down[i] & ~(1 << i) & mask):
                out |= 1 << i
        return out

    def span_mask(self, mask: int) -> int:
        # only non-empty subsets count, so a global bottom element spans itself
        target = self.fs_mask(mask)
        members = list(_bits(mask))
        out = 0
        minimal: List[int] = []
        for size in range(1, len(members) + 1):
            for combo in itertools.combinations(members, size):
                s = sum(1 << i for i in combo)
                if any(m & s == m for m in minimal):
                    continue
                if self.fs_mask(s) == target:
                    minimal.append(s)
                    out |= s
        return out

    # -- named queries --
    def future(self, x: str) -> FrozenSet[str]:
        return self.names(self.up[self.index[x]])

    def exclusive_future(self, x: str) -> FrozenSet[str]:
        return self.future(x) - {x}

    def support_future(self, points: Iterable[str]) -> FrozenSet[str]:
        return self.names(self.fs_mask(self.mask(points)))

    def minimal(self, points: Iterable[str]) -> FrozenSet[str]:
        return self.names(self.min_mask(self.mask(points)))

    def span(self, points: Iterable[str]) -> FrozenSet[str]:
        return self.names(self.span_mask(self.mask(points)))

    def join(self, x: str, y: str) -> Optional[str]:
        upper = self.up[self.index[x]] & self.up[self.index[y]]
        for i in _bits(upper):
            if self.up[i] & upper == upper:
                return self.elements[i]
        return None

    def meet(self, x: str, y: str) -> Optional[str]:
        lower = self.down[self.index[x]] & self.down[self.index[y]]
        for i in _bits(lower):
            if self.down[i] & lower == lower:
                return self.elements[i]
        return None

    def to_dict(self) -> dict:
        return {"elements": list(self.elements), "relations": [list(c) for c in self.covers()]}

    def to_dot(self, name: str = "hasse") -> str:
        lines = [f"digraph {name} {{", "  rankdir=BT;"]
        lines += [f'  "{e}";' for e in self.elements]
        lines += [f'  "{a}" -> "{b}";' for a, b in self.covers()]
        return "\n".join(lines + ["}"]) + "\n"


def _bits(mask: int) -> Iterator[int]:
    i = 0
    while mask:
        if mask & 1:
            yield i
        mask >>= 1
        i += 1


def validate_poset(elements: Sequence[str], relations: Iterable[Sequence[str]]) -> Poset:
    """Build a poset from generating pairs (a, b) meaning a ≺ b; the transitive closure is added."""
    elements = list(elements)
    if len(set(elements)) != len(elements):
        raise ValidationError("duplicate poset elements")
    g = nx.DiGraph()
    g.add_nodes_from(elements)
    for pair in relations:
        if len(pair) != 2:
            raise ValidationError(f"relation {pair!r} must be a pair")
        a, b = pair
        for e in (a, b):
            if e not in g:
                raise ValidationError(f"unknown element {e!r} in relation {list(pair)}")
        if a == b:
            raise CycleDetected([a])
        g.add_edge(a, b)
    if not nx.is_directed_acyclic_graph(g):
        raise CycleDetected([u for u, _ in nx.find_cycle(g)])
    closure = nx.transitive_closure_dag(g)
    index = {e: i for i, e in enumerate(elements)}
    up = []
    for e in elements:
        m = 1 << index[e]
        for f in closure.successors(e):
            m |= 1 << index[f]
        up.append(m)
    return Poset(elements, up)


def order_query(p: Poset, kind: str, *args):
    """Dispatch for the named order queries; point-set arguments are iterables of element names."""
    if kind == "future":
        return p.future(*args)
    if kind == "exclusive-future":
        return p.exclusive_future(*args)
    if kind == "support-future":
        return p.support_future(*args)
    if kind == "min":
        return p.minimal(*args)
    if kind == "covers":
        return p.covers()
    if kind in ("join", "meet"):
        if len(args) != 2 or not all(isinstance(a, str) and a for a in args):
            raise ValidationError(f"{kind} needs two points")
        return p.join(*args) if kind == "join" else p.meet(*args)
    if kind == "span":
        return p.span(*args)
    raise ValidationError(f"unknown order query {kind!r}")


@dataclass
class PosetClassification:
    k: int
    flags: Dict[str, bool] = field(default_factory=dict)
    counterexamples: Dict[str, object] = field(default_factory=dict)

    def __getitem__(self, key):
        return self.flags[key]

    def to_dict(self) -> dict:
        return {"k": self.k, "flags": dict(self.flags),
                "counterexamples": {k: _jsonable(v) for k, v in sorted(self.counterexamples.items())}}


def _jsonable(v):
    if isinstance(v, (frozenset, set)):
        return sorted(v)
    if isinstance(v, (tuple, list)):
        return [_jsonable(x) for x in v]
    return v


ALL_CHECKS = ("join-semilattice", "meet-semilattice", "lattice", "join-free", "meet-free",
              "conical", "location-symmetric", "union-property")


def point_sets(p: Poset, k: int, min_size: int = 1) -> List[int]:
    n = len(p)
    out = []
    for size in range(min_size, min(k, n) + 1):
        for combo in itertools.combinations(range(n), size):
            out.append(sum(1 << i for i in combo))
    return out


def _pair_property(p: Poset, op) -> Tuple[bool, Optional[Tuple[str, str]]]:
    for a, b in itertools.combinations(p.elements, 2):
        if op(a, b) is None:
            return False, (a, b)
    return True, None


def _free_property(p: Poset, op) -> Tuple[bool, Optional[Tuple[str, str]]]:
    for a, b in itertools.combinations(p.elements, 2):
        if p.comparable(a, b):
            continue
        j = op(a, b)
        if j is not None:
            return False, (a, b, j)
    return True, None


def check_conical(p: Poset, k: int = 3):
    """Equal support futures force equal spanning sets, for point sets of size ≤ k."""
    seen: Dict[int, Tuple[int, int]] = {}
    for s in point_sets(p, k):
        f = p.fs_mask(s)
        sp = p.span_mask(s)
        if f in seen and seen[f][1] != sp:
            return False, (p.names(seen[f][0]), p.names(s))
        seen.setdefault(f, (s, sp))
    return True, None


def check_location_symmetric(p: Poset, k: int = 3):
    """The two-set form: F̄s(XY1) = F̄s(XY2) implies F̄s(X) ⊆ F̄s(Y1Y2), or some
    non-empty s1 ⊆ Y1 and s2 ⊆ Y2 have equal support futures.  All sets are
    non-empty and of size ≤ k."""
    sets = point_sets(p, k)
    fs = {s: p.fs_mask(s) for s in sets}
    sub_futures = {}
    for s in sets:
        sub_futures[s] = frozenset(p.fs_mask(t) for t in _submasks(s))
    for x in sets:
        fx = fs[x]
        groups: Dict[int, List[int]] = {}
        for y in sets:
            groups.setdefault(fx & fs[y], []).append(y)
        for ys in groups.values():
            for i, y1 in enumerate(ys):
                for y2 in ys[i:]:
                    if fx & ~p.fs_mask(y1 | y2) == 0:
                        continue
                    if sub_futures[y1] & sub_futures[y2]:
                        continue
                    return False, (p.names(x), p.names(y1), p.names(y2))
    return True, None


def check_union_property(p: Poset, k: int = 3):
    """For point sets X (|X| ≤ k) and points y outside X: F̄(y) ⊇ F̄s(X) rules out
    F̄(y) ⊊ the union of the futures of span(X)."""
    for x in point_sets(p, k):
        fx = p.fs_mask(x)
        sp = p.span_mask(x)
        union = 0
        for i in _bits(sp):
            union |= p.up[i]
        for j in range(len(p)):
            if x >> j & 1:
                continue
            fy = p.up[j]
            if fx & ~fy:
                continue
            if fy & ~union == 0 and fy != union:
                return False, (p.names(x), p.elements[j])
    return True, None


def _submasks(mask: int) -> Iterator[int]:
    sub = mask
    while sub:
        yield sub
        sub = (sub - 1) & mask


def classify_poset(p: Poset, k: int = 3, checks: Sequence[str] = ALL_CHECKS) -> PosetClassification:
    """Lattice-type flags plus the bounded (≤ k) spacetime properties, each with a counterexample when false."""
    if k < 2:
        raise ValidationError("k must be at least 2")
    unknown = set(checks) - set(ALL_CHECKS)
    if unknown:
        raise ValidationError(f"unknown checks {sorted(unknown)}")
    out = PosetClassification(k)

    def record(name, result):
        ok, cex = result
        out.flags[name] = ok
        if not ok:
            out.counterexamples[name] = cex

    wanted = set(checks)
    if wanted & {"join-semilattice", "lattice"}:
        record("join-semilattice", _pair_property(p, p.join))
    if wanted & {"meet-semilattice", "lattice"}:
        record("meet-semilattice", _pair_property(p, p.meet))
    if "lattice" in wanted:
        out.flags["lattice"] = out.flags["join-semilattice"] and out.flags["meet-semilattice"]
    if "join-free" in wanted:
        record("join-free", _free_property(p, p.join))
    if "meet-free" in wanted:
        record("meet-free", _free_property(p, p.meet))
    if "conical" in wanted:
        record("conical", check_conical(p, k))
    if "location-symmetric" in wanted:
        record("location-symmetric", check_location_symmetric(p, k))
    if "union-property" in wanted:
        record("union-property", check_union_property(p, k))
    out.flags = {c: out.flags[c] for c in ALL_CHECKS if c in out.flags}
    return out


def generate_minkowski_grid(dims: str, extent: int) -> Poset:
    """Integer points with every coordinate in [-extent, extent]; p ≺ q when q lies in p's closed future light cone.

    Elements are named ``"t,x"`` or ``"t,x,y"``.
    """
    if dims not in ("1+1", "2+1"):
        raise ValidationError(f"unknown grid dimensions {dims!r}")
    if extent < 1:
        raise ValidationError("extent must be at least 1")
    space = 1 if dims == "1+1" else 2
    side = 2 * extent + 1
    if side ** (space + 1) > GRID_POINT_LIMIT:
        raise ValidationError(f"grid with {side ** (space + 1)} points exceeds the limit of {GRID_POINT_LIMIT}")
    coords = list(itertools.product(range(-extent, extent + 1), repeat=space + 1))
    up = []
    for i, p in enumerate(coords):
        m = 1 << i
        for j, q in enumerate(coords):
            dt = q[0] - p[0]
            if dt > 0 and dt * dt >= sum((a - b) ** 2 for a, b in zip(q[1:], p[1:])):
                m |= 1 << j
        up.append(m)
    return Poset([",".join(map(str, c)) for c in coords], up)


def grid_point(*coords: int) -> str:
    return ",".join(map(str, coords))


def _closed_masks(n: int) -> Iterator[List[int]]:
    """Strict orders on 0..n-1 contained in the natural order i < j, as strict-upset masks."""
    pairs = [(i, j) for j in range(n) for i in range(j)]
    for bits in range(1 << len(pairs)):
        ups = [0] * n
        for b, (i, j) in enumerate(pairs):
            if bits >> b & 1:
                ups[i] |= 1 << j
        ok = True
        for i in range(n):
            for j in _bits(ups[i]):
                if ups[j] & ~ups[i]:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            yield ups


def _canonical(n: int, ups: List[int]) -> Tuple[int, ...]:
    best = None
    for perm in itertools.permutations(range(n)):
        image = [0] * n
        for i in range(n):
            m = 0
            for j in _bits(ups[i]):
                m |= 1 << perm[j]
            image[perm[i]] = m
        key = tuple(image)
        if best is None or key < best:
            best = key
    return best


def all_posets(n: int, up_to_isomorphism: bool = True) -> List[Poset]:
    """Every poset on n elements named ``a, b, c, ...``.

    Each poset has a linear extension, so orders contained in the natural order
    already cover all isomorphism classes.  Without deduplication the result
    lists every such naturally labelled order.
    """
    names = [chr(ord("a") + i) for i in range(n)]
    out = []
    seen = set()
    for ups in _closed_masks(n):
        if up_to_isomorphism:
            key = _canonical(n, ups)
            if key in seen:
                continue
            seen.add(key)
        out.append(Poset(names, [ups[i] | 1 << i for i in range(n)]))
    return out
