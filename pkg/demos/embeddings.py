#!/usr/bin/env python3
"""Placing affects relations in finite spacetimes.

ACL5 fits into the four-point poset {p, q ≺ r ≺ s} but never stably; the
ACL7 and ACL12 sets have stable embeddings.  Finally the discrete 1+1 and
2+1 Minkowski grids are compared: joint futures in 1+1 have a single
minimal point, in 2+1 they need not.
"""
from affectskit.embedding import check_embedding, search_embeddings
from affectskit.io import load_affects, load_embedding, load_poset
from affectskit.poset import all_posets, generate_minkowski_grid, grid_point
from affectskit.recipes import data_path

acl5 = load_affects(data_path("acl5.affects.json"))
pqrs = load_poset(data_path("acl5.poset.json"))
print("ACL5 non-degenerate embeddings into pqrs:",
      [e.map for e in search_embeddings(acl5, pqrs, ["non-degenerate"])])
stable = sum(len(search_embeddings(acl5, p, ["support-stable"])) for n in range(1, 6) for p in all_posets(n))
print("ACL5 support-stable embeddings into any poset with at most 5 points:", stable)

for name in ("acl7", "acl12"):
    rep = check_embedding(load_affects(data_path(f"{name}.affects.json")), load_poset(data_path(f"{name}.poset.json")),
                          load_embedding(data_path(f"{name}.embedding.json")))
    print(f"{name}: compatible={rep.holds} support-stable={rep.support_stable} minimum-stable={rep.minimum_stable}")

g1 = generate_minkowski_grid("1+1", 3)
a, b = grid_point(0, -1), grid_point(0, 1)
print("1+1 join of", a, "and", b, "->", g1.join(a, b))
g2 = generate_minkowski_grid("2+1", 2)
a, b = grid_point(0, -1, 0), grid_point(0, 1, 1)
print("2+1 minimal points of the joint future of", a, "and", b, "->", sorted(g2.minimal(g2.support_future([a, b]))))
