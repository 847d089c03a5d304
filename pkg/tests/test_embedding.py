import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from affectskit.affects_engine import (AffectsEvaluator, AffectsRelation, AffectsSet, RelationFlags,
                                       conditionality_transform, rel)
from affectskit.core_model import ValidationError
from affectskit.io import load_affects, load_embedding, load_model, load_poset
from affectskit.loop_analysis import CapExceeded, find_affects_chains_and_classify
from affectskit.embedding import (Embedding, all_orderings, check_embedding, iter_embeddings, reduce_ho_relations,
                                  search_embeddings)
from affectskit.poset import all_posets, validate_poset

from conftest import irreducible_part
from oracles import PairPoset

FLAGS = RelationFlags(True, True, False)


def small_posets(top=5):
    return [p for n in range(1, top + 1) for p in all_posets(n)]


def random_poset(rng, n):
    names = ["t%d" % i for i in range(n)]
    return validate_poset(names, [(names[i], names[j]) for i in range(n) for j in range(i + 1, n)
                                  if rng.random() < 0.35])


def random_flagged_set(rng, names="ABCD", count=3):
    present = {}
    for _ in range(count):
        parts = [[], [], [], []]
        for v in names:
            slot = rng.randrange(6)
            if slot < 4:
                parts[slot].append(v)
        if not parts[0] or not parts[1]:
            continue
        r = rel(*parts)
        indec = rng.random() < 0.6
        present[r] = RelationFlags(irreducible=len(r.x) == 1 or rng.random() < 0.7, indecreasable=indec,
                                   strong=indec and rng.random() < 0.5)
    return AffectsSet(present)


def oracle_report(s, p, mapping):
    """Compatibility and stability straight from the definitions, with explicit point sets."""
    q = PairPoset.of(p)

    def fs(names):
        return q.support_future([mapping[n] for n in names])

    out = {"irreducible": True, "strong-indecreasable": True, "indecreasable": True, "support": True,
           "minimum": True}
    for r, f in s.present.items():
        fx, fywz, fywx = fs(r.x), fs(r.y | r.w | r.z), fs(r.y | r.w | r.x)
        if len(r.x) == 1 or f.irreducible:
            if not fywz <= fx:
                out["irreducible"] = out["strong-indecreasable"] = out["indecreasable"] = False
        if r.z and not fywx <= fs(r.z):
            if f.strong:
                out["strong-indecreasable"] = False
            if f.indecreasable or f.strong:
                out["indecreasable"] = False
        if not (fywz < fx):
            out["support"] = False
        if not fywz <= fx - q.minimal(fx):
            out["minimum"] = False
    return out


def test_acl5_witness(data_dir):
    s = load_affects(data_dir / "acl5.affects.json")
    p = load_poset(data_dir / "acl5.poset.json")
    rep = check_embedding(s, p, load_embedding(data_dir / "acl5.embedding.json"))
    assert rep.compat["irreducible"] and not rep.support_stable and not rep.degenerate
    assert search_embeddings(s, p, ["non-degenerate"])
    assert search_embeddings(s, p, ["support-stable"]) == []


def test_acl5_not_embeddable_in_join_free_poset():
    s = AffectsSet.from_relations([rel("B", "AC"), rel("AC", "B")])
    p = validate_poset("abcd", [("a", "c"), ("a", "d"), ("b", "c"), ("b", "d")])
    assert search_embeddings(s, p, ["non-degenerate"]) == []


def test_acl5_has_no_stable_embedding_on_small_posets(data_dir):
    s = load_affects(data_dir / "acl5.affects.json")
    for p in small_posets():
        assert search_embeddings(s, p, ["support-stable"]) == []


def test_acl5_on_chain_is_not_stable(data_dir):
    s = load_affects(data_dir / "acl5.affects.json")
    assert search_embeddings(s, load_poset(data_dir / "chain4.poset.json"), ["support-stable"]) == []


@pytest.mark.parametrize("name", ["acl7", "acl12"])
def test_reference_embeddings_are_stable(data_dir, name):
    rep = check_embedding(load_affects(data_dir / f"{name}.affects.json"), load_poset(data_dir / f"{name}.poset.json"),
                          load_embedding(data_dir / f"{name}.embedding.json"), "indecreasable")
    assert rep.holds and all(rep.compat.values())
    assert rep.support_stable and rep.minimum_stable
    assert not rep.degenerate and not rep.trivial


def test_empty_set_admits_every_ordering():
    p = validate_poset("abc", [("a", "b")])
    found = search_embeddings(AffectsSet({}), p, rvs=["A", "B"])
    assert found == list(all_orderings(["A", "B"], p))
    assert len(found) == 9


def test_trivial_embedding_is_not_stable():
    s = AffectsSet.from_relations([rel("A", "B")])
    p = validate_poset("ab", [("a", "b")])
    rep = check_embedding(s, p, {"A": "a", "B": "a"})
    assert rep.trivial and rep.degenerate and not rep.support_stable and not rep.minimum_stable
    good = check_embedding(s, p, {"A": "a", "B": "b"})
    assert not good.trivial and good.support_stable and good.minimum_stable
    assert search_embeddings(s, p, ["non-trivial"]) == [Embedding.from_map({"A": "a", "B": "b"})]


def test_meaningless_relation_is_vacuously_compatible():
    s = AffectsSet.from_relations([rel("A", "BC")])
    p = validate_poset("abc", [("a", "b")])
    rep = check_embedding(s, p, {"A": "a", "B": "b", "C": "c"})
    assert rep.meaningless == ["A⊨BC"]
    assert rep.compat["irreducible"]


def test_support_stable_but_not_minimum_stable():
    # x, y below both a and b; Z sits on a minimal element of the joint future of XY
    s = AffectsSet.from_relations([rel("XY", "Z")])
    p = validate_poset("xyab", [("x", "a"), ("y", "a"), ("x", "b"), ("y", "b")])
    rep = check_embedding(s, p, {"X": "x", "Y": "y", "Z": "a"})
    assert rep.compat["irreducible"] and rep.support_stable and not rep.minimum_stable
    assert rep.minimum_violations == ["XY⊨Z"]
    chain = validate_poset("abc", [("a", "b"), ("b", "c")])
    rep = check_embedding(AffectsSet.from_relations([rel("A", "B")]), chain, {"A": "a", "B": "b"})
    assert rep.support_stable and rep.minimum_stable


def test_errors():
    s = AffectsSet.from_relations([rel("A", "B")])
    p = validate_poset("ab", [("a", "b")])
    with pytest.raises(ValidationError):
        check_embedding(s, p, {"A": "a"})
    with pytest.raises(ValidationError):
        check_embedding(s, p, {"A": "a", "B": "z"})
    with pytest.raises(ValidationError):
        check_embedding(s, p, {"A": "a", "B": "b"}, "sometimes")
    with pytest.raises(ValidationError):
        search_embeddings(s, p, ["stable-ish"])
    with pytest.raises(ValidationError):
        search_embeddings(s, p, rvs=["A"])
    with pytest.raises(CapExceeded):
        search_embeddings(AffectsSet.from_relations([rel("A", "BCDEFGH")]), all_posets(5)[0], cap=1000)


def test_search_respects_requirement_mapping():
    s = AffectsSet.from_relations([rel("A", "B")])
    p = validate_poset("abc", [("a", "b"), ("b", "c")])
    found = search_embeddings(s, p, {"mode": "irreducible", "minimum-stable": True})
    assert [(e["A"], e["B"]) for e in found] == [("a", "b"), ("a", "c"), ("b", "c")]


def test_reduce_ho_relations():
    s = AffectsSet({rel("A", "B", "C"): RelationFlags(True, True, False),
                    rel("D", "B", (), "C"): RelationFlags(True, True, False)})
    assert sorted(str(r) for r in reduce_ho_relations(s).present) == ["AC⊨B", "D⊨BC"]
    with pytest.raises(ValidationError):
        reduce_ho_relations(AffectsSet({rel("A", "B", "C"): RelationFlags(True, False, False)}))
    with pytest.raises(ValidationError):
        reduce_ho_relations(AffectsSet({rel("A", "B", "C"): RelationFlags()}))


def test_reduction_is_not_a_model_identity(data_dir):
    ev = AffectsEvaluator(load_model(data_dir / "ex-iv4.model.json"))
    ho = rel("B", "D", "C")
    reduced = reduce_ho_relations(AffectsSet({ho: ev.classify(ho)}))
    assert list(reduced.present) == [rel("BC", "D")]
    assert not ev.holds(rel("BC", "D"))


def test_conditionality_transform_keeps_verdicts():
    # exhaustive over posets up to five elements for a few sets on four variables
    rng = random.Random(11)
    for _ in range(3):
        present = {}
        while len(present) < 3:
            names = list("ABCD")
            rng.shuffle(names)
            x, y, w = names[:1], names[1:2 + rng.randrange(2)], names[3:]
            present[rel(x, y, (), w)] = FLAGS
        s = AffectsSet(present)
        t = AffectsSet({conditionality_transform(r): f for r, f in present.items()})
        for p in small_posets():
            for emb in all_orderings("ABCD", p):
                a, b = check_embedding(s, p, emb), check_embedding(t, p, emb)
                assert a.compat["irreducible"] == b.compat["irreducible"]
                assert a.support_stable == b.support_stable


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10 ** 9))
def test_report_matches_set_oracle(seed):
    rng = random.Random(seed)
    s = random_flagged_set(rng)
    if not s.present:
        return
    p = random_poset(rng, rng.randint(1, 6))
    for _ in range(15):
        mapping = {v: rng.choice(p.elements) for v in s.nodes()}
        rep = check_embedding(s, p, mapping)
        want = oracle_report(s, p, mapping)
        for mode in ("irreducible", "strong-indecreasable", "indecreasable"):
            assert rep.compat[mode] == want[mode], mode
        assert rep.support_stable == want["support"]
        assert rep.minimum_stable == want["minimum"]
        assert rep.degenerate == (len(set(mapping.values())) < len(mapping))
        assert not rep.compat["indecreasable"] or rep.compat["strong-indecreasable"]
        assert not rep.compat["strong-indecreasable"] or rep.compat["irreducible"]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 9))
def test_search_equals_filtered_orderings(seed):
    rng = random.Random(seed)
    s = random_flagged_set(rng, "ABC")
    if not s.present:
        return
    p = random_poset(rng, rng.randint(1, 4))
    require = rng.sample(["support-stable", "minimum-stable", "non-degenerate", "non-trivial"], rng.randint(0, 2))
    mode = rng.choice(["irreducible", "strong-indecreasable", "indecreasable"])
    found = search_embeddings(s, p, require + [mode])
    expected = []
    for emb in all_orderings(s.nodes(), p):
        rep = check_embedding(s, p, emb, mode)
        if not rep.holds:
            continue
        if "support-stable" in require and not rep.support_stable:
            continue
        if "minimum-stable" in require and not rep.minimum_stable:
            continue
        if "non-degenerate" in require and rep.degenerate:
            continue
        if "non-trivial" in require and rep.trivial:
            continue
        expected.append(emb)
    assert found == expected


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 9), st.integers(2, 4))
def test_chain_support_futures_shrink(seed, length):
    rng = random.Random(seed)
    names = list("ABCDEF")
    chain = []
    for _ in range(length):
        rng.shuffle(names)
        chain.append(frozenset(names[:rng.randint(1, 2)]))
    if any(a & b for a, b in zip(chain, chain[1:])):
        return
    s = AffectsSet({AffectsRelation(a, b): FLAGS for a, b in zip(chain, chain[1:])})
    p = random_poset(rng, rng.randint(2, 5))
    q = PairPoset.of(p)
    for emb in itertools.islice(iter_embeddings(s, p), 200):
        m = emb.map
        first = q.support_future([m[v] for v in chain[0]])
        last = q.support_future([m[v] for v in chain[-1]])
        assert last <= first
        if check_embedding(s, p, emb).support_stable:
            assert last < first


def random_acl5(rng):
    names = list("ABCD")
    sets = []
    for _ in range(rng.randint(2, 3)):
        rng.shuffle(names)
        sets.append(frozenset(names[:rng.randint(1, 2)]))
    pairs = list(zip(sets, sets[1:] + sets[:1]))
    if any(a & b for a, b in pairs):
        return None
    s = AffectsSet({AffectsRelation(a, b): FLAGS for a, b in pairs})
    return s if "ACL5" in find_affects_chains_and_classify(s)["classes"] else None


def test_no_stable_acl5_embeddings_up_to_six():
    rng = random.Random(3)
    sets = []
    while len(sets) < 4:
        s = random_acl5(rng)
        if s is not None and len(s.nodes()) <= 3:
            sets.append(s)
    posets = small_posets(6)
    for s in sets:
        for p in posets:
            assert search_embeddings(s, p, ["support-stable"]) == [], (s.to_dict(), p.to_dict())


def test_no_stable_acl6a_embeddings_up_to_five(data_dir):
    s = load_affects(data_dir / "acl6a.affects.json")
    assert "ACL6a" in find_affects_chains_and_classify(s)["classes"]
    for p in small_posets():
        assert search_embeddings(s, p, ["support-stable"]) == []


def test_reducible_relation_breaks_stability_on_conical_poset():
    # AB ⊨ C is reducible, so compatibility ignores it, yet support stability covers every relation
    s = AffectsSet({rel("A", "C"): FLAGS, rel("AB", "C"): RelationFlags(False, True, False)})
    p = validate_poset("pqr", [("p", "r")])
    rep = check_embedding(s, p, {"A": "p", "B": "q", "C": "r"})
    assert rep.compat["irreducible"] and not rep.degenerate
    assert rep.stability_violations == ["AB⊨C"]
    assert check_embedding(irreducible_part(s), p, {"A": "p", "B": "q", "C": "r"}).support_stable


def test_stable_degenerate_on_conical_posets(conical_embeddings):
    assert conical_embeddings
    for s, p, _, emb in conical_embeddings:
        assert check_embedding(irreducible_part(s), p, emb).support_stable, (s.to_dict(), emb.map)


def test_irreducible_indecreasable_compat_on_conical_posets(conical_embeddings):
    checked = 0
    for s, p, symmetric, emb in conical_embeddings:
        if not symmetric or not check_embedding(s, p, emb).compat["indecreasable"]:
            continue
        q = PairPoset.of(p)
        m = emb.map
        for r, f in s.present.items():
            if not r.z or not (f.indecreasable and (len(r.x) == 1 or f.irreducible)):
                continue
            fs = {k: q.support_future([m[v] for v in part]) for k, part in
                  (("yw", r.y | r.w), ("x", r.x), ("z", r.z))}
            assert fs["yw"] <= fs["x"] & fs["z"]
            checked += 1
    assert checked


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 9))
def test_strong_sets_intersection_identity(seed):
    rng = random.Random(seed)
    s = random_flagged_set(rng, count=4)
    p = random_poset(rng, rng.randint(1, 5))
    q = PairPoset.of(p)
    for emb in itertools.islice(iter_embeddings(s, p, ["indecreasable"]), 100):
        m = emb.map
        for r, f in s.present.items():
            if not (f.indecreasable and (len(r.x) == 1 or f.irreducible)):
                continue
            ryw = q.support_future([m[v] for v in r.y | r.w])
            rx = q.support_future([m[v] for v in r.x])
            rz = q.support_future([m[v] for v in r.z])
            assert ryw & rx == ryw & rz
            assert ryw & rx <= rx & rz >= ryw & rz
