"""Partition a small graph by factorizing its weight matrix.

At 10 vertices the ratio-association optimum is still cheap to compute
exactly, so the NMF partition can be scored against the true best one
rather than against a heuristic.
"""

from nmfcluster import (
    SolverOptions,
    SyntheticSpec,
    assign_items,
    brute_force_ratio_assoc,
    gen_planted_graph,
    nmf_multiplicative,
    normalize_factors,
    ratio_association,
)

print("planted 2-cluster graphs, 10 vertices, rising cross-cluster noise")
print("(same seed throughout, so the in-cluster edges are identical and only")
print("the cross-cluster clutter grows)")
print()
for noise in (0.0, 0.1, 0.2):
    spec = SyntheticSpec(kind="planted-graph", n=10, k=2, noise=noise, seed=7)
    graph, planted = gen_planted_graph(spec)
    w = graph.matrix
    same = planted.labels[:, None] == planted.labels[None, :]
    cross = float(w[~same].sum()) / float(w.sum())

    pair, _ = nmf_multiplicative(w, 2, SolverOptions(seed=7))
    _, nc = normalize_factors(pair.basis, pair.coefficients)
    found = assign_items(nc)
    achieved = ratio_association(graph, found)

    best_part, optimum = brute_force_ratio_assoc(graph, 2)
    print(f"noise {noise:.1f}: {cross:.1%} of edge weight crosses the planted cut;")
    print(f"          NMF ratio association {achieved:.4f}, exhaustive optimum "
          f"{optimum:.4f} ({achieved / optimum:.1%} of optimal)")
    print(f"          NMF labels  {found.labels.tolist()}")
    print(f"          best labels {best_part.labels.tolist()}")

print()
print("the optimum value never moves: cross-cluster edges do not enter any")
print("within-cluster sum, so at this noise range the planted split stays")
print("the argmax and its score depends only on the (unchanged) block edges.")
