import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from affectskit.affects_engine import (BOTH_POSITIVE, DEFINEDNESS, AffectsEvaluator, AffectsRelation, AffectsSet,
                                       affects_holds, candidate_relations, classify_relation,
                                       conditionality_transform, enumerate_affects, rel)
from affectskit.core_model import ValidationError
from affectskit.io import load_model

from builders import HALF, make_model, random_model, relabel
from oracles import brute_affects

def present_strings(model, zero_context=DEFINEDNESS, bounds=2):
    return sorted(str(r) for r in enumerate_affects(AffectsEvaluator(model, zero_context), bounds).present)


def simple_jamming():
    # hidden L, A = L, C = L xor B
    return make_model(("L", [], HALF, False), ("B", [], HALF), ("A", ["L"], [0, 1]),
                      ("C", ["L", "B"], [0, 1, 1, 0]))


def negation_chain():
    # A -> D -> B -> C with D = not A, B = D, C = not B
    return make_model(("A", [], HALF), ("D", ["A"], [1, 0]), ("B", ["D"], [0, 1]), ("C", ["B"], [1, 0]))


def test_rendering():
    assert str(rel("MK", "M'")) == "KM⊨M'"
    assert str(rel("B", "D", "C")) == "B⊨D|do(C)"
    assert str(rel("A", "B", "D", "C")) == "A⊨B|{do(D),C}"
    assert str(AffectsRelation(frozenset(["e1", "e3"]), frozenset(["e2"]))) == "e1,e3⊨e2"


def test_relation_shape_checked():
    with pytest.raises(ValidationError):
        rel("A", "A")
    with pytest.raises(ValidationError):
        AffectsRelation(frozenset(), frozenset("B"))
    with pytest.raises(ValidationError):
        AffectsSet({rel("A", "B"): None}, frozenset([rel("A", "B")]))


def test_otp_listing(data_dir):
    ev = AffectsEvaluator(load_model(data_dir / "otp.model.json"))
    assert not ev.holds(rel("M", "M'")) and not ev.holds(rel("K", "M'"))
    assert ev.holds(rel("MK", "M'"))
    assert ev.holds(rel("M", "M'", "K")) and ev.holds(rel("M", "M'", (), "K"))
    assert ev.classify(rel("MK", "M'")).irreducible


def test_simple_jamming_model_matches_bundled_model(data_dir):
    expected = sorted(["B⊨AC", "B⊨A|C", "B⊨C|A"])
    assert present_strings(simple_jamming()) == expected
    assert present_strings(load_model(data_dir / "jamming.model.json")) == expected


def test_simple_ex_iv7_model():
    m = make_model(("L", [], HALF, False), ("B", [], HALF), ("A", ["L"], [0, 1]),
                   ("C", ["L", "B"], [0, 1, 1, 0]), ("D", ["A", "C"], [0, 1, 1, 0]))
    ev = AffectsEvaluator(m)
    assert ev.holds(rel("B", "D")) and ev.holds(rel("AC", "D"))
    for r in (rel("A", "D"), rel("C", "D"), rel("B", "A"), rel("B", "C")):
        assert not ev.holds(r)


def test_ex_iv4_flags(data_dir):
    ev = AffectsEvaluator(load_model(data_dir / "ex-iv4.model.json"))
    assert ev.holds(rel("C", "D")) and not ev.holds(rel("BC", "D"))
    ho = rel("B", "D", "C")
    assert ev.holds(ho) and not ev.holds(rel("B", "D"))
    flags = ev.classify(ho)
    assert flags.irreducible and flags.indecreasable and flags.strong


def test_reducible_relation():
    # C copies A; B is an unrelated root
    m = make_model(("A", [], HALF), ("B", [], HALF), ("C", ["A"], [0, 1]))
    ev = AffectsEvaluator(m)
    r = rel("AB", "C")
    assert ev.holds(r)
    assert ev.is_reducible(r)
    assert ev.reducing_subsets(r) == [frozenset("B")]
    with pytest.raises(ValidationError):
        ev.classify(rel("B", "C"))


def test_zeroth_order_flags():
    m = make_model(("A", [], HALF), ("C", ["A"], [0, 1]))
    flags = classify_relation(m, rel("A", "C"))
    assert flags.irreducible and flags.indecreasable and not flags.strong


def test_both_positive_counterexample_frozen():
    m = negation_chain()
    strict = AffectsEvaluator(m, BOTH_POSITIVE)
    premise = rel("AB", "D", (), "C")
    assert strict.holds(premise)
    assert not strict.holds(rel("A", "D", (), "C"))
    assert not strict.holds(rel("B", "D", "A", "C"))
    loose = AffectsEvaluator(m, DEFINEDNESS)
    assert loose.holds(premise)
    assert loose.holds(rel("A", "D", (), "C")) or loose.holds(rel("B", "D", "A", "C"))


def test_unknown_zero_context_rejected():
    with pytest.raises(ValidationError):
        AffectsEvaluator(negation_chain(), "sometimes")


def test_enumeration_deterministic(data_dir):
    m = load_model(data_dir / "ex-iv4.model.json")
    a = enumerate_affects(m, 2).to_dict()
    b = enumerate_affects(load_model(data_dir / "ex-iv4.model.json"), 2).to_dict()
    assert a == b


def test_candidate_relations_bounds():
    cands = candidate_relations("ABC", 1)
    assert all(len(r.x) == len(r.y) == 1 and len(r.z) <= 1 and len(r.w) <= 1 for r in cands)
    # ordered pairs (x, y) times the placement of the third name: absent, in Z or in W
    assert len(cands) == 6 * 3


def test_conditionality_transform():
    assert conditionality_transform(rel("A", "B", (), "C")) == rel("A", "BC")
    with pytest.raises(ValidationError):
        conditionality_transform(rel("A", "B", "C"))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 9), st.integers(2, 4), st.sampled_from([DEFINEDNESS, BOTH_POSITIVE]))
def test_holds_matches_brute_force(seed, n, mode):
    rng = random.Random(seed)
    m = random_model(rng, n, max_card=3)
    if len(m.observed) < 2:
        return
    ev = AffectsEvaluator(m, mode)
    cands = candidate_relations(list(m.observed), 2)
    for r in rng.sample(cands, min(25, len(cands))):
        assert ev.holds(r) == brute_affects(m, r.x, r.y, r.z, r.w, mode == DEFINEDNESS), str(r)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 9), st.integers(2, 4))
def test_flags_match_brute_force(seed, n):
    rng = random.Random(seed)
    m = random_model(rng, n, stochastic=False, hidden=False)
    ev = AffectsEvaluator(m)
    for r in candidate_relations(list(m.observed), 2):
        if not ev.holds(r) or rng.random() > 0.3:
            continue
        f = ev.classify(r)
        reducible = any(not brute_affects(m, s, r.y, r.z | (r.x - s), r.w) for s in _proper(r.x))
        indec = all(not brute_affects(m, r.x, r.y, r.z - {e}, r.w) for e in r.z)
        assert f.irreducible == (not reducible)
        assert f.indecreasable == indec
        assert f.strong == (indec and not brute_affects(m, r.x, r.y, (), r.w))


def _proper(x):
    items = sorted(x)
    return [frozenset(c) for k in range(1, len(items)) for c in itertools.combinations(items, k)]


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 9), st.integers(2, 4))
def test_renaming_invariance(seed, n):
    rng = random.Random(seed)
    m = random_model(rng, n)
    names = list(m.structure.names)
    shuffled = names[:]
    rng.shuffle(shuffled)
    mapping = dict(zip(names, [s.lower() for s in shuffled]))
    renamed = relabel(m, mapping)
    observed = list(m.observed)
    for r in candidate_relations(observed, 1):
        image = AffectsRelation(*(frozenset(mapping[v] for v in part) for part in (r.x, r.y, r.z, r.w)))
        assert affects_holds(m, r) == affects_holds(renamed, image)


def test_conditional_split_on_corpus(corpus):
    # X ⊨ YW | do(Z)  iff  X ⊨ Y | {do(Z), W}  or  X ⊨ W | do(Z), for every split within bounds
    for _, ev, s in corpus:
        for r in candidate_relations(list(ev.names), 2):
            if r.w or len(r.y) < 2:
                continue
            for w in r.y:
                left = s.holds(r)
                right = ev.holds(AffectsRelation(r.x, r.y - {w}, r.z, frozenset([w]))) or \
                    ev.holds(AffectsRelation(r.x, frozenset([w]), r.z))
                assert left == right, (str(r), w)


def test_reducible_relations_descend_to_irreducible(corpus):
    for _, ev, s in corpus:
        for r, f in s.present.items():
            if f.irreducible or len(r.x) == 1:
                continue
            subs = [AffectsRelation(t, r.y, r.z, r.w) for t in _proper(r.x)]
            assert any(ev.holds(q) and not ev.is_reducible(q) for q in subs), str(r)
