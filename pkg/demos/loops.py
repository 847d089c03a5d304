#!/usr/bin/env python3
"""Deciding whether a set of affects relations forces a causal loop.

The loop graph prunes arrow families whose targets cannot lead back; an
empty result means some resolution is acyclic.  The resolution search is
run alongside as a cross-check.
"""
from affectskit.io import load_affects
from affectskit.loop_analysis import detect_acl, find_affects_chains_and_classify
from affectskit.recipes import data_path

for name in ("noacl", "acl3", "acl5", "acl6a", "acl11"):
    s = load_affects(data_path(f"{name}.affects.json"))
    rep = detect_acl(s, "both")
    classes = sorted(find_affects_chains_and_classify(s)["classes"])
    print(f"{name}: loop forced={rep.acl_present} (oracle agrees: {rep.agree})")
    print("    loop graph:", [str(a) for a in rep.loop_graph.sorted_arrows()])
    if rep.acyclic_resolution:
        print("    acyclic resolution:", rep.acyclic_resolution)
    print("    chain classes:", classes)
