"""The acceptance gate.

Nine checks, each a statistical or identity-level claim about the whole
package, each with a stated tolerance and a wall-clock budget.  Every
check prints one PASS/FAIL verdict line (run pytest with -s to see them
on success; they surface automatically on failure).

The thresholds are load-bearing: they quantify what the package
promises, so a red line here is a finding about the code, never
something to tune away.
"""

import time

import numpy as np

from nmfcluster.affinity import item_affinity, symmetrize
from nmfcluster.baselines import KmeansOptions, kmeans
from nmfcluster.core import (
    frobenius_objective,
    gradient_basis,
    gradient_coefficients,
    kkt_residual,
    normalize_factors,
)
from nmfcluster.data_io import (
    SyntheticSpec,
    gen_block_diagonal,
    gen_mixture_docs,
    gen_planted_graph,
)
from nmfcluster.metrics import (
    Partition,
    assign_features,
    assign_items,
    brute_force_ratio_assoc,
    cluster_accuracy,
    orthogonality_deviation,
    ratio_association,
)
from nmfcluster.solvers import (
    NnlsProblem,
    SolverOptions,
    nmf_anls,
    nmf_multiplicative,
    nmf_orthogonal,
    nnls_solve,
)

from oracles import nnls_enumerate, numeric_gradient, ratio_assoc_indicator


def _verdict(name, ok, detail):
    print(f"{name} {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, f"{name} {detail}"


def test_ac1_mu_objective_monotone():
    started = time.perf_counter()
    worst = -np.inf
    for seed in range(50):
        rng = np.random.default_rng(seed)
        m = int(rng.integers(5, 31))
        n = int(rng.integers(5, 31))
        k = int(rng.integers(2, 6))
        a = rng.random((m, n))
        _, trace = nmf_multiplicative(a, k, SolverOptions(seed=seed))
        obj = trace.objective
        rises = np.diff(obj) / (1.0 + obj[:-1])
        worst = max(worst, float(rises.max()))
    elapsed = time.perf_counter() - started
    ok = worst <= 1e-9 and elapsed < 10.0
    _verdict(
        "AC-1",
        ok,
        f"largest relative objective rise {worst:.2e} over 50 mu traces "
        f"(bound 1e-9), {elapsed:.1f}s / 10s",
    )


def test_ac2_kkt_residuals_at_convergence():
    started = time.perf_counter()
    rng = np.random.default_rng(2)
    worst_mu = worst_anls = 0.0
    for i in range(20):
        m = int(rng.integers(8, 25))
        n = int(rng.integers(8, 25))
        k = int(rng.integers(2, 5))
        a = rng.random((m, n))
        bound = 1e-3 * (1.0 + np.linalg.norm(a))
        pair, _ = nmf_multiplicative(
            a,
            k,
            SolverOptions(
                seed=i, restarts=5, max_iterations=8000, tolerance=1e-12, window=10
            ),
        )
        kb, kc = kkt_residual(a, pair.basis, pair.coefficients)
        worst_mu = max(worst_mu, kb / bound, kc / bound)
        pair, _ = nmf_anls(
            a, k, SolverOptions(seed=i, max_iterations=150, tolerance=1e-12, window=5)
        )
        kb, kc = kkt_residual(a, pair.basis, pair.coefficients)
        worst_anls = max(worst_anls, kb / bound, kc / bound)
    elapsed = time.perf_counter() - started
    ok = worst_mu <= 1.0 and worst_anls <= 1.0 and elapsed < 30.0
    _verdict(
        "AC-2",
        ok,
        f"worst KKT component / bound: mu {worst_mu:.2f}, anls {worst_anls:.2f} "
        f"(both must be <= 1) over 20 instances, {elapsed:.1f}s / 30s",
    )


def test_ac3_nnls_matches_support_enumeration():
    started = time.perf_counter()
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(200):
        m = int(rng.integers(2, 11))
        k = int(rng.integers(1, 9))
        design = rng.random((m, k))
        target = rng.random(m)
        c = nnls_solve(NnlsProblem(design, target))
        resid = design @ c - target
        got = 0.5 * float(resid @ resid)
        _, best = nnls_enumerate(design, target)
        worst = max(worst, got - best)
    elapsed = time.perf_counter() - started
    ok = worst <= 1e-8 and elapsed < 5.0
    _verdict(
        "AC-3",
        ok,
        f"largest objective excess over enumeration {worst:.2e} "
        f"(bound 1e-8) on 200 problems, {elapsed:.1f}s / 5s",
    )


def test_ac4_factors_nearly_orthogonal_on_planted_blocks():
    started = time.perf_counter()
    jb, jc, acc_items, acc_features = [], [], [], []
    for seed in range(20):
        spec = SyntheticSpec(
            kind="block-diagonal", m=60, n=60, k=3, noise=0.05, seed=seed
        )
        a, items, features = gen_block_diagonal(spec)
        pair, _ = nmf_multiplicative(a, 3, SolverOptions(seed=seed, restarts=5))
        nb, nc = normalize_factors(pair.basis, pair.coefficients)
        jb.append(orthogonality_deviation(nb, axis="columns")[1])
        jc.append(orthogonality_deviation(nc, axis="rows")[1])
        acc_items.append(cluster_accuracy(assign_items(nc), items))
        acc_features.append(cluster_accuracy(assign_features(nb), features))
    med = (
        float(np.median(jb)),
        float(np.median(jc)),
        float(np.median(acc_items)),
        float(np.median(acc_features)),
    )
    elapsed = time.perf_counter() - started
    ok = (
        med[0] <= 0.35
        and med[1] <= 0.35
        and med[2] >= 0.95
        and med[3] >= 0.95
        and elapsed < 60.0
    )
    _verdict(
        "AC-4",
        ok,
        f"median normalized deviations jb2 {med[0]:.4f}, jc2 {med[1]:.4f} "
        f"(<= 0.35); median accuracies items {med[2]:.3f}, features {med[3]:.3f} "
        f"(>= 0.95); {elapsed:.1f}s / 60s",
    )


def test_ac5_penalty_drives_deviation_down():
    started = time.perf_counter()
    lambdas = (0.0, 0.1, 1.0, 10.0)
    summaries = []
    ok = True
    for mode, axis in (("rows_of_C", "rows"), ("cols_of_B", "columns")):
        medians = []
        for lam in lambdas:
            vals = []
            for seed in range(10):
                spec = SyntheticSpec(
                    kind="block-diagonal", m=60, n=60, k=3, noise=0.05, seed=seed
                )
                a, _, _ = gen_block_diagonal(spec)
                pair, _ = nmf_orthogonal(
                    a, 3, SolverOptions(seed=seed, ortho_mode=mode, penalty=lam)
                )
                nb, nc = normalize_factors(pair.basis, pair.coefficients)
                f = nc if axis == "rows" else nb
                vals.append(orthogonality_deviation(f, axis=axis)[1])
            medians.append(float(np.median(vals)))
        non_increasing = all(
            medians[i + 1] <= medians[i] for i in range(len(medians) - 1)
        )
        halved = medians[-1] <= 0.5 * medians[0]
        ok = ok and non_increasing and halved
        summaries.append(
            f"{mode} medians " + "/".join(f"{v:.1e}" for v in medians)
        )
    elapsed = time.perf_counter() - started
    ok = ok and elapsed < 180.0
    _verdict(
        "AC-5",
        ok,
        "; ".join(summaries)
        + f" (non-increasing in lambda, last <= half of first); "
        f"{elapsed:.1f}s / 180s",
    )


def test_ac6_nmf_partition_near_brute_force_optimum():
    started = time.perf_counter()
    hits = trials = 0
    worst = np.inf
    for noise in (0.0, 0.1, 0.2):
        for seed in range(50):
            spec = SyntheticSpec(
                kind="planted-graph", n=10, k=2, noise=noise, seed=seed
            )
            graph, _ = gen_planted_graph(spec)
            pair, _ = nmf_multiplicative(
                graph.matrix, 2, SolverOptions(seed=seed)
            )
            _, nc = normalize_factors(pair.basis, pair.coefficients)
            achieved = ratio_association(graph, assign_items(nc))
            _, optimum = brute_force_ratio_assoc(graph, 2)
            ratio = achieved / optimum
            worst = min(worst, ratio)
            hits += ratio >= 0.9
            trials += 1
    rate = hits / trials
    elapsed = time.perf_counter() - started
    ok = rate >= 0.8 and elapsed < 120.0
    _verdict(
        "AC-6",
        ok,
        f"RA within 0.9x of brute-force optimum in {hits}/{trials} trials "
        f"({rate:.1%}, need >= 80%); worst ratio {worst:.3f}; "
        f"{elapsed:.1f}s / 120s",
    )


def test_ac7_nmf_keeps_pace_with_kmeans():
    started = time.perf_counter()
    nmf_acc, km_acc = [], []
    for seed in range(20):
        spec = SyntheticSpec(
            kind="mixture-docs", m=100, n=90, k=3, overlap=0.3, noise=0.2, seed=seed
        )
        a, items = gen_mixture_docs(spec)
        pair, _ = nmf_multiplicative(a, 3, SolverOptions(seed=seed, restarts=5))
        _, nc = normalize_factors(pair.basis, pair.coefficients)
        nmf_acc.append(cluster_accuracy(assign_items(nc), items))
        part, _ = kmeans(
            np.ascontiguousarray(a.T), KmeansOptions(k=3, seed=seed, restarts=10)
        )
        km_acc.append(cluster_accuracy(part, items))
    med_nmf = float(np.median(nmf_acc))
    med_km = float(np.median(km_acc))
    elapsed = time.perf_counter() - started
    ok = med_nmf >= med_km - 0.05 and elapsed < 120.0
    _verdict(
        "AC-7",
        ok,
        f"median accuracy nmf {med_nmf:.3f} vs kmeans {med_km:.3f} "
        f"(nmf >= kmeans - 0.05); {elapsed:.1f}s / 120s",
    )


def test_ac8_directed_graphs_recovered_after_symmetrizing():
    started = time.perf_counter()
    accs = []
    for seed in range(10):
        spec = SyntheticSpec(
            kind="directed-planted-graph", n=40, k=2, noise=0.1, seed=seed
        )
        raw, truth = gen_planted_graph(spec)
        w = symmetrize(raw)
        pair, _ = nmf_multiplicative(
            w.matrix, 2, SolverOptions(seed=seed, restarts=5)
        )
        _, nc = normalize_factors(pair.basis, pair.coefficients)
        accs.append(cluster_accuracy(assign_items(nc), truth))
    med = float(np.median(accs))
    elapsed = time.perf_counter() - started
    ok = med >= 0.9 and elapsed < 60.0
    _verdict(
        "AC-8",
        ok,
        f"median accuracy {med:.3f} over 10 directed graphs (>= 0.9); "
        f"{elapsed:.1f}s / 60s",
    )


def test_ac9_metric_identities():
    started = time.perf_counter()
    rng = np.random.default_rng(9)

    worst_ra = 0.0
    for _ in range(100):
        n = int(rng.integers(4, 12))
        k = int(rng.integers(1, 5))
        half = rng.random((n, n))
        w = half + half.T
        labels = rng.integers(0, k, n)
        got = ratio_association(w, Partition(labels, k))
        want = ratio_assoc_indicator(w, labels, k)
        worst_ra = max(worst_ra, abs(got - want) / (1.0 + abs(want)))

    worst_split = 0.0
    for _ in range(100):
        m = int(rng.integers(2, 9))
        p = int(rng.integers(1, 6))
        f = rng.uniform(0.1, 2.0, (m, p))
        gram = f.T @ f
        total = float(np.sum(gram * gram))
        diag = float(np.sum(np.diagonal(gram) ** 2))
        raw, _ = orthogonality_deviation(f, axis="columns")
        worst_split = max(worst_split, abs(total - (diag + raw)) / total)

    worst_grad = 0.0
    for _ in range(100):
        m = int(rng.integers(2, 6))
        n = int(rng.integers(2, 6))
        k = int(rng.integers(1, 4))
        a = rng.random((m, n))
        b = rng.uniform(0.1, 1.5, (m, k))
        c = rng.uniform(0.1, 1.5, (k, n))
        gb = gradient_basis(a, b, c)
        gc = gradient_coefficients(a, b, c)
        fb = numeric_gradient(lambda x: frobenius_objective(a, x, c), b)
        fc = numeric_gradient(lambda x: frobenius_objective(a, b, x), c)
        worst_grad = max(
            worst_grad, float(np.abs(gb - fb).max()), float(np.abs(gc - fc).max())
        )

    elapsed = time.perf_counter() - started
    ok = (
        worst_ra <= 1e-10
        and worst_split <= 1e-10
        and worst_grad <= 1e-6
        and elapsed < 10.0
    )
    _verdict(
        "AC-9",
        ok,
        f"RA trace identity {worst_ra:.1e} (<= 1e-10), Gram split identity "
        f"{worst_split:.1e} (<= 1e-10), gradient vs finite differences "
        f"{worst_grad:.1e} (<= 1e-6), 100 instances each; {elapsed:.1f}s / 10s",
    )
