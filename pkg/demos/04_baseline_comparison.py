"""NMF vs k-means vs spectral on one synthetic corpus, via run_compare."""

import json

from nmfcluster import SolverOptions, SyntheticSpec, gen_mixture_docs, run_compare

spec = SyntheticSpec(
    kind="mixture-docs", m=100, n=90, k=3, overlap=0.3, noise=0.2, seed=1
)
a, items = gen_mixture_docs(spec)
print(f"mixture corpus: {a.shape[0]} features x {a.shape[1]} documents, "
      f"3 topics, overlap {spec.overlap}, noise {spec.noise}")
print()

report = run_compare(
    a,
    3,
    options=SolverOptions(seed=1, restarts=5),
    item_labels=items,
    source={"spec": spec.as_dict()},
)

rows = [
    ("nmf (mu)", report["nmf"]["accuracy"], report["nmf"]["nmi"],
     report["nmf"]["ra_items"], report["nmf"]["seconds"]),
    ("k-means", report["kmeans"]["accuracy"], report["kmeans"]["nmi"],
     report["kmeans"]["ra_items"], report["kmeans"]["seconds"]),
    ("spectral", report["spectral"]["accuracy"], report["spectral"]["nmi"],
     report["spectral"]["ra_items"], report["spectral"]["seconds"]),
]
print(f"{'method':<10} {'accuracy':>9} {'nmi':>7} {'ratio assoc':>12} {'seconds':>8}")
for name, acc, score, ra, secs in rows:
    print(f"{name:<10} {acc:>9.3f} {score:>7.3f} {ra:>12.3f} {secs:>8.2f}")

print()
print("the merged report is plain JSON; the same structure the CLI's")
print("`compare` subcommand writes:")
print(json.dumps({k: report[k] for k in ("schema_version", "rank", "seed")}))
