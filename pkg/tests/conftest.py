import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from affectskit.affects_engine import AffectsEvaluator, AffectsSet, enumerate_affects
from affectskit.corpus import dag_model_corpus
from affectskit.embedding import iter_embeddings
from affectskit.poset import all_posets, classify_poset

DATA = Path(__file__).resolve().parents[1] / "src" / "affectskit" / "recipes" / "data"


@pytest.fixture(scope="session")
def data_dir():
    return DATA


@pytest.fixture(scope="session")
def corpus():
    """(model, evaluator, complete affects set within bounds 2) for every corpus model."""
    out = []
    for model in dag_model_corpus():
        ev = AffectsEvaluator(model)
        out.append((model, ev, enumerate_affects(ev, 2)))
    return out


@pytest.fixture(scope="session")
def distinct_sets(corpus):
    """The distinct complete affects sets of the corpus, with their relation flags."""
    seen = {}
    for _, _, s in corpus:
        key = tuple(sorted((str(r), s.present[r]) for r in s.present))
        seen.setdefault(key, s)
    return list(seen.values())


@pytest.fixture(scope="session")
def conical_posets():
    """Posets with at most 5 elements that are conical≤3; each tagged with location symmetry≤3."""
    out = []
    for n in range(1, 6):
        for p in all_posets(n):
            c = classify_poset(p, 3, ("conical", "location-symmetric"))
            if c["conical"]:
                out.append((p, c["location-symmetric"]))
    return out


@pytest.fixture(scope="session")
def conical_embeddings(distinct_sets, conical_posets):
    """Every non-degenerate compat-irreducible embedding of a distinct corpus set into a conical poset."""
    out = []
    for s in distinct_sets:
        nodes = s.nodes()
        for p, symmetric in conical_posets:
            if len(p) < len(nodes):
                continue
            for emb in iter_embeddings(s, p, ["irreducible", "non-degenerate"]):
                out.append((s, p, symmetric, emb))
    return out


def irreducible_part(s: AffectsSet) -> AffectsSet:
    return AffectsSet({r: f for r, f in s.present.items() if len(r.x) == 1 or f.irreducible})


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
