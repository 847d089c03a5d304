#!/usr/bin/env python3
"""Signalling relations of small causal models.

Shows the one-time pad (no single input signals to the output, the pair does),
the jamming model (B signals only to A and C jointly) and the higher-order
relation of the ex-iv4 model together with the cause it implies.
"""
from affectskit.affects_engine import AffectsEvaluator, AffectsSet, enumerate_affects, rel
from affectskit.inference_rules import infer_causes
from affectskit.io import load_model
from affectskit.recipes import data_path


def listing(name):
    ev = AffectsEvaluator(load_model(data_path(f"{name}.model.json")))
    full = enumerate_affects(ev, 2)
    print(f"{name}: {len(full.present)} relations")
    for r in full.sorted_present():
        print("   ", r)
    return ev, full


ev, _ = listing("otp")
print("    M ⊨ M' alone:", ev.holds(rel("M", "M'")))

listing("jamming")

ev = AffectsEvaluator(load_model(data_path("ex-iv4.model.json")))
ho = rel("B", "D", "C")
print("ex-iv4:", ho, ev.holds(ho), "flags", ev.classify(ho).to_dict())
witness = AffectsSet({ho: ev.classify(ho)}, frozenset([rel("B", "D")]))
print("    causes from the relation plus B ⊭ D:", [str(c) for c in infer_causes(witness)])
