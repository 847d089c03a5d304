"""d-separation on possibly cyclic directed graphs, and Markov compatibility reports."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, List, Sequence, Tuple

from .core_model import CausalStructure, JointDistribution, ValidationError

# Collider rules.  "children" is the blocking condition used throughout this
# package: a collider blocks unless it or one of its direct children is
# conditioned on.  "descendants" is the textbook rule and is kept for
# comparison; the two agree on every acyclic graph with fewer than five nodes.
CHILDREN = "children"
DESCENDANTS = "descendants"

# A path is a tuple of nodes plus, for every step, the edge direction used:
# ">" means the edge points from the earlier node to the later one.
Path = Tuple[Tuple[str, ...], Tuple[str, ...]]


def simple_paths(structure: CausalStructure, a: str, b: str) -> List[Path]:
    """All undirected paths from ``a`` to ``b`` that never revisit a node.

    When both ``u -> v`` and ``v -> u`` exist, each direction gives its own path.
    """
    out: List[Path] = []
    nodes = [a]
    dirs: List[str] = []
    on_path = {a}

    def step(u: str):
        if u == b:
            out.append((tuple(nodes), tuple(dirs)))
            return
        moves = [(v, ">") for v in structure.children(u)] + [(v, "<") for v in structure.parents(u)]
        for v, d in sorted(moves):
            if v in on_path:
                continue
            nodes.append(v)
            dirs.append(d)
            on_path.add(v)
            step(v)
            on_path.discard(v)
            nodes.pop()
            dirs.pop()

    step(a)
    return out


def path_blocked(structure: CausalStructure, path: Path, z: FrozenSet[str], collider_rule: str = CHILDREN) -> bool:
    nodes, dirs = path
    for k in range(1, len(nodes) - 1):
        m = nodes[k]
        collider = dirs[k - 1] == ">" and dirs[k] == "<"
        if not collider:
            if m in z:
                return True
            continue
        if m in z:
            continue
        near = structure.children(m) if collider_rule == CHILDREN else structure.descendants(m)
        if not (set(near) & z):
            return True
    return False


class SeparationOracle:
    """Caches the simple paths of one structure so that many queries stay cheap."""

    def __init__(self, structure: CausalStructure, collider_rule: str = CHILDREN):
        if collider_rule not in (CHILDREN, DESCENDANTS):
            raise ValueError(f"unknown collider rule {collider_rule!r}")
        self.structure = structure
        self.collider_rule = collider_rule
        self._paths: Dict[Tuple[str, str], List[Path]] = {}

    def paths(self, a: str, b: str) -> List[Path]:
        key = (a, b)
        if key not in self._paths:
            self._paths[key] = simple_paths(self.structure, a, b)
        return self._paths[key]

    def d_separated(self, x: Iterable[str], y: Iterable[str], z: Iterable[str] = ()) -> bool:
        x, y, z = frozenset(x), frozenset(y), frozenset(z)
        _check_query(self.structure, x, y, z)
        for a in sorted(x):
            for b in sorted(y):
                for path in self.paths(a, b):
                    if not path_blocked(self.structure, path, z, self.collider_rule):
                        return False
        return True


def _check_query(structure, x, y, z):
    if not x or not y:
        raise ValidationError("x and y must be non-empty")
    if x & y or x & z or y & z:
        raise ValidationError("query sets must be pairwise disjoint")
    for n in x | y | z:
        structure.node(n)


def d_separated(structure: CausalStructure, x: Iterable[str], y: Iterable[str], z: Iterable[str] = (),
                collider_rule: str = CHILDREN) -> bool:
    """Whether every path between ``x`` and ``y`` is blocked by ``z``."""
    return SeparationOracle(structure, collider_rule).d_separated(x, y, z)


def conditionally_independent(dist: JointDistribution, x: Sequence[str], y: Sequence[str],
                              z: Sequence[str] = ()) -> bool:
    """P(XY|z) = P(X|z) P(Y|z) for every z of positive probability.

    Checked in the cross-multiplied form P(xyz) P(z) = P(xz) P(yz).
    """
    x, y, z = tuple(sorted(x)), tuple(sorted(y)), tuple(sorted(z))
    joint = dist.marginal(x + y + z)
    nx_, ny = len(x), len(y)
    pxyz: Dict[tuple, Fraction] = joint.probs
    pz: Dict[tuple, Fraction] = {}
    pxz: Dict[tuple, Fraction] = {}
    pyz: Dict[tuple, Fraction] = {}
    for k, p in pxyz.items():
        kx, ky, kz = k[:nx_], k[nx_:nx_ + ny], k[nx_ + ny:]
        pz[kz] = pz.get(kz, 0) + p
        pxz[kx + kz] = pxz.get(kx + kz, 0) + p
        pyz[ky + kz] = pyz.get(ky + kz, 0) + p
    for kz, w in pz.items():
        # pairs with P(xz) = 0 or P(yz) = 0 have P(xyz) = 0 and match trivially
        xs = [k[:nx_] for k in pxz if k[nx_:] == kz]
        ys = [k[:ny] for k in pyz if k[ny:] == kz]
        for kx in xs:
            for ky in ys:
                if pxyz.get(kx + ky + kz, 0) * w != pxz[kx + kz] * pyz[ky + kz]:
                    return False
    return True


@dataclass
class CompatibilityReport:
    holds: bool
    violations: List[Dict[str, List[str]]] = field(default_factory=list)
    cyclic: bool = False
    mode: str = "compatible"

    def to_dict(self) -> dict:
        return {"holds": self.holds, "violations": self.violations, "mode": self.mode, "cyclic": self.cyclic}


def disjoint_triples(names: Sequence[str]):
    """Unordered (x, y) pairs of non-empty disjoint sets with a disjoint z, canonically ordered."""
    names = sorted(names)
    for labels in itertools.product(range(4), repeat=len(names)):
        x = tuple(n for n, l in zip(names, labels) if l == 1)
        y = tuple(n for n, l in zip(names, labels) if l == 2)
        if not x or not y or x > y:
            continue
        z = tuple(n for n, l in zip(names, labels) if l == 3)
        yield x, y, z


def compatibility_report(structure: CausalStructure, dist: JointDistribution, mode: str = "compatible",
                         collider_rule: str = CHILDREN) -> CompatibilityReport:
    """Check d-separation against conditional independence on the observed nodes.

    ``compatible`` checks that every d-separation yields an independence;
    ``faithful`` checks the converse as well.
    """
    if mode not in ("compatible", "faithful"):
        raise ValidationError(f"unknown mode {mode!r}")
    if set(dist.scope) != set(structure.observed):
        raise ValidationError(f"distribution scope {sorted(dist.scope)} does not match the observed nodes "
                              f"{sorted(structure.observed)}")
    oracle = SeparationOracle(structure, collider_rule)
    violations = []
    for x, y, z in sorted(disjoint_triples(structure.observed), key=lambda t: (len(t[2]), t)):
        sep = oracle.d_separated(x, y, z)
        if not sep and mode == "compatible":
            continue
        indep = conditionally_independent(dist, x, y, z)
        if sep != indep:
            violations.append({"x": list(x), "y": list(y), "z": list(z)})
    return CompatibilityReport(not violations, violations, structure.is_cyclic(), mode)
