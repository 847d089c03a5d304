import random

import pytest
from hypothesis import given, settings, strategies as st

from affectskit.affects_engine import AffectsEvaluator, AffectsSet, RelationFlags, enumerate_affects, rel
from affectskit.inference_rules import (DisjunctiveCause, InconsistentFlags, RuleId, RuleShapeError,
                                        apply_transformation_rule, infer_causes, minimize_causes,
                                        reconstruct_edges, verify_rules_on_model)
from affectskit.io import load_model

from builders import HALF, make_model, random_model


def conclusions(rule, r, split=None):
    return [str(c.relation) for c in apply_transformation_rule(rule, r, split)]


def test_rule_shapes():
    r = rel("A", "B", "CD", "E")
    assert conclusions("ZO", r, "C") == ["C⊨B|{do(D),E}", "AC⊨B|{do(D),E}"]
    assert conclusions("HO_TRANSFER", r, "C") == ["A⊨B|{do(D),E}", "C⊨B|{do(D),E}", "C⊨B|{do(AD),E}"]
    assert conclusions("HO_SWITCH", r, "C") == ["C⊨B|{do(D),E}", "C⊨B|{do(AD),E}"]
    assert conclusions("AFFECTS_TO_HO", rel("AF", "B", "C", "E"), "F") == ["A⊨B|{do(CF),E}", "F⊨B|{do(C),E}"]
    assert conclusions("CONDITIONAL_SPLIT", rel("A", "BC", "D"), "C") == ["A⊨B|{do(D),C}", "A⊨C|do(D)"]
    assert conclusions("CONDITIONAL_SPLIT", rel("A", "B", "D", "C")) == ["A⊨BC|do(D)"]
    assert conclusions("REDUCIBLE_DESCENT", rel("AF", "B")) == ["A⊨B", "F⊨B"]


def test_switch_conclusions_are_marked_irreducible():
    assert all(c.irreducible for c in apply_transformation_rule(RuleId.HO_SWITCH, rel("AF", "B", "C"), "C"))


def test_rule_shape_errors():
    with pytest.raises(RuleShapeError):
        apply_transformation_rule("ZO", rel("A", "B"))
    with pytest.raises(RuleShapeError):
        apply_transformation_rule("AFFECTS_TO_HO", rel("A", "B"), "A")
    with pytest.raises(RuleShapeError):
        apply_transformation_rule("HO_SWITCH", rel("A", "B", "CD"), "CD")
    with pytest.raises(ValueError):
        apply_transformation_rule("NO_SUCH_RULE", rel("A", "B"))


def test_causes_from_irreducible_relations():
    s = AffectsSet.from_relations([rel("MK", "M'")])
    assert [str(c) for c in infer_causes(s)] == ["K⇝{M'}", "M⇝{M'}"]
    reducible = AffectsSet.from_relations([rel("MK", "M'")], irreducible=False)
    assert infer_causes(reducible) == []


def test_causes_from_absence_witness():
    s = AffectsSet({rel("B", "D", "C"): RelationFlags(True, None, None)}, frozenset([rel("B", "D")]))
    assert "C⇝{D}" in [str(c) for c in infer_causes(s)]
    without = AffectsSet({rel("B", "D", "C"): RelationFlags(True, None, None)})
    assert "C⇝{D}" not in [str(c) for c in infer_causes(without)]


def test_subsumption_keeps_smaller_target_sets():
    kept = minimize_causes([DisjunctiveCause("A", "BC"), DisjunctiveCause("A", "B"), DisjunctiveCause("C", "AB")])
    assert [str(c) for c in kept] == ["A⇝{B}", "C⇝{AB}"]


def test_inconsistent_flags_rejected():
    s = AffectsSet({rel("A", "B"): RelationFlags(irreducible=False)})
    with pytest.raises(InconsistentFlags):
        infer_causes(s)


def test_ex_iv4_rules_and_causes(data_dir):
    ev = AffectsEvaluator(load_model(data_dir / "ex-iv4.model.json"))
    rep = verify_rules_on_model(ev)
    assert rep.ok, rep.violations
    assert rep.checked["HO_SWITCH"] > 0
    assert "C⇝{D}" in [str(c) for c in infer_causes(enumerate_affects(ev))]


def test_reconstruct_edges_simple():
    m = make_model(("A", [], HALF), ("B", ["A"], [1, 0]), ("C", ["A", "B"], [0, 1, 1, 0]))
    assert reconstruct_edges(m) == frozenset([("A", "B"), ("A", "C"), ("B", "C")])


def test_causes_realized_and_switch_conclusions_irreducible_on_corpus(corpus):
    for model, ev, s in corpus:
        for c in infer_causes(s):
            assert c.realized_in(model.structure), (str(c), sorted(model.structure.edges))
        for r in s.present:
            for e in r.z:
                if s.holds(rel(r.x, r.y, r.z - {e}, r.w)) is not False:
                    continue
                for c in apply_transformation_rule(RuleId.HO_SWITCH, r, e):
                    if ev.holds(c.relation):
                        assert not ev.is_reducible(c.relation)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 9), st.integers(2, 4))
def test_rules_sound_on_stochastic_models_with_hidden_nodes(seed, n):
    m = random_model(random.Random(seed), n, max_card=3)
    if len(m.observed) < 2:
        return
    rep = verify_rules_on_model(m, 2)
    assert rep.ok, rep.violations[:3]


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 9))
def test_infer_causes_monotone(seed):
    rng = random.Random(seed)
    m = random_model(rng, 4, stochastic=False, hidden=False)
    full = enumerate_affects(m, 2)
    rels = full.sorted_present()
    small = {r: full.present[r] for r in rng.sample(rels, len(rels) // 2)}
    big = dict(small)
    big.update({r: full.present[r] for r in rng.sample(rels, len(rels) // 3)})
    before = infer_causes(AffectsSet(small, full.absent))
    after = infer_causes(AffectsSet(big, full.absent))
    # every earlier cause is still implied, possibly by a sharper one with fewer targets
    for c in before:
        assert any(d.source == c.source and d.targets <= c.targets for d in after)
