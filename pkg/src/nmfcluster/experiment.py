"""Experiment orchestration shared by the CLI and the demo scripts.

``run_experiment`` runs one solver on one matrix and returns a plain-dict
report: solver options, final objective, KKT residuals, orthogonality
deviations, ratio-association scores, accuracy/NMI against planted labels
when given, the factors themselves, and optionally the full trace.  The
report is JSON-ready; floats serialize via repr so a stored report
re-evaluates to the same numbers exactly.

``evaluate_report`` recomputes every metric from a report's stored
factors (reloading or regenerating the data named by its input
descriptor) and ``run_sweep`` fans one experiment grid out over a thread
pool, one report per (solver, seed, lambda) cell plus a deterministic
summary table.
"""

import os
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .affinity import feature_affinity, item_affinity
from .baselines import KmeansOptions, kmeans, spectral_ratio_assoc
from .core import as_matrix, frobenius_objective, kkt_residual, normalize_factors
from .data_io import (
    SyntheticSpec,
    generate,
    read_csv_matrix,
    read_matrix_market,
)
from .errors import SpecError
from .metrics import (
    BRUTE_FORCE_MAX_N,
    Partition,
    assign_features,
    assign_items,
    brute_force_ratio_assoc,
    cluster_accuracy,
    nmi,
    orthogonality_deviation,
    ratio_association,
)
from .solvers import SolverOptions, nmf_anls, nmf_multiplicative, nmf_orthogonal

__all__ = [
    "SCHEMA_VERSION",
    "SUMMARY_COLUMNS",
    "run_experiment",
    "run_compare",
    "evaluate_report",
    "evaluate_factors",
    "run_sweep",
    "summary_rows_to_csv",
]

SCHEMA_VERSION = "1"

SOLVERS = ("mu", "anls", "ortho")

SUMMARY_COLUMNS = (
    "solver",
    "seed",
    "lambda",
    "objective",
    "kkt_b",
    "kkt_c",
    "jb2_norm",
    "jc2_norm",
    "ra_items",
    "accuracy",
    "nmi",
    "seconds",
)


def _options_dict(options):
    return {
        "max_iterations": options.max_iterations,
        "tolerance": options.tolerance,
        "window": options.window,
        "seed": options.seed,
        "restarts": options.restarts,
        "epsilon_guard": options.epsilon_guard,
        "ortho_mode": options.ortho_mode,
        "lambda": options.penalty,
    }


def _trace_dict(trace):
    out = {
        "iteration": trace.iteration.tolist(),
        "objective": trace.objective.tolist(),
        "kkt_basis": trace.kkt_basis.tolist(),
        "kkt_coef": trace.kkt_coef.tolist(),
        "basis_offdiag": trace.basis_offdiag.tolist(),
        "coef_offdiag": trace.coef_offdiag.tolist(),
    }
    if trace.penalized is not None:
        out["penalized"] = trace.penalized.tolist()
    return out


def _run_solver(data, k, solver, options):
    if solver == "mu":
        return nmf_multiplicative(data, k, options)
    if solver == "anls":
        return nmf_anls(data, k, options)
    if solver == "ortho":
        return nmf_orthogonal(data, k, options)
    raise SpecError(f"solver must be one of {SOLVERS}, got {solver!r}")


def evaluate_factors(data, basis, coef, item_labels=None, feature_labels=None):
    """Score one factor pair against the data (and labels when given).

    Everything downstream of the solver lives here so that a report can
    be re-checked from its stored factors alone.  Returns a dict of
    metrics; accuracy/NMI entries are None without labels.
    """
    data = as_matrix(data, "data")
    kkt_b, kkt_c = kkt_residual(data, basis, coef)
    nbasis, ncoef = normalize_factors(basis, coef)
    jb2, jb2_norm = orthogonality_deviation(nbasis, axis="columns")
    jc2, jc2_norm = orthogonality_deviation(ncoef, axis="rows")
    items = assign_items(ncoef)
    features = assign_features(nbasis)

    aff_items = item_affinity(data)
    aff_features = feature_affinity(data)
    ra_items = ratio_association(aff_items, items)
    ra_features = ratio_association(aff_features, features)
    k = items.n_clusters
    ra_items_oracle = None
    if data.shape[1] <= BRUTE_FORCE_MAX_N:
        ra_items_oracle = brute_force_ratio_assoc(aff_items, k)[1]
    ra_features_oracle = None
    if data.shape[0] <= BRUTE_FORCE_MAX_N:
        ra_features_oracle = brute_force_ratio_assoc(aff_features, k)[1]

    out = {
        "kkt_b": kkt_b,
        "kkt_c": kkt_c,
        "jb2": jb2,
        "jb2_norm": jb2_norm,
        "jc2": jc2,
        "jc2_norm": jc2_norm,
        "item_labels_pred": items.labels.tolist(),
        "feature_labels_pred": features.labels.tolist(),
        "ra_items": ra_items,
        "ra_features": ra_features,
        "ra_items_oracle": ra_items_oracle,
        "ra_features_oracle": ra_features_oracle,
        "accuracy": None,
        "nmi": None,
        "feature_accuracy": None,
        "feature_nmi": None,
    }
    if item_labels is not None:
        out["accuracy"] = cluster_accuracy(items, item_labels)
        out["nmi"] = nmi(items, item_labels)
    if feature_labels is not None:
        out["feature_accuracy"] = cluster_accuracy(features, feature_labels)
        out["feature_nmi"] = nmi(features, feature_labels)
    return out


def run_experiment(
    data,
    k,
    solver="mu",
    options=None,
    item_labels=None,
    feature_labels=None,
    source=None,
    include_trace=False,
):
    """Run one solver and assemble the full report dict.

    ``source`` is the input descriptor recorded for later re-evaluation:
    either {"path": ..., "format": "mtx"|"csv"} for file inputs or
    {"spec": {...}} for synthetic data.  Wall-clock time covers the
    solver only, not the metric pass.
    """
    if options is None:
        options = SolverOptions()
    data = as_matrix(data, "data")
    started = time.perf_counter()
    pair, trace = _run_solver(data, k, solver, options)
    seconds = time.perf_counter() - started

    report = {
        "schema_version": SCHEMA_VERSION,
        "input": source if source is not None else {"shape": list(data.shape)},
        "solver": solver,
        "options": _options_dict(options),
        "rank": k,
        "seed": options.seed,
        "objective": pair.objective,
        "iterations": pair.iterations,
        "converged": pair.converged,
        "seconds": seconds,
        "basis": pair.basis.tolist(),
        "coefficients": pair.coefficients.tolist(),
        "item_labels": None if item_labels is None else item_labels.labels.tolist(),
        "feature_labels": None
        if feature_labels is None
        else feature_labels.labels.tolist(),
    }
    report.update(
        evaluate_factors(
            data,
            pair.basis,
            pair.coefficients,
            item_labels=item_labels,
            feature_labels=feature_labels,
        )
    )
    if include_trace:
        report["trace"] = _trace_dict(trace)
    return report


def _symmetric_square(data):
    return data.shape[0] == data.shape[1] and float(np.abs(data - data.T).max()) <= 1e-10


def run_compare(
    data,
    k,
    options=None,
    item_labels=None,
    feature_labels=None,
    source=None,
):
    """Factorize plus both baselines on one input; single merged report.

    K-means clusters the data columns as points.  The spectral baseline
    partitions the item affinity graph, or the matrix itself when the
    input is already a symmetric affinity matrix.
    """
    if options is None:
        options = SolverOptions()
    data = as_matrix(data, "data")
    nmf_report = run_experiment(
        data,
        k,
        solver="mu",
        options=options,
        item_labels=item_labels,
        feature_labels=feature_labels,
        source=source,
    )

    started = time.perf_counter()
    km_part, inertia = kmeans(
        data.T, KmeansOptions(k=k, seed=options.seed, restarts=options.restarts)
    )
    km_seconds = time.perf_counter() - started

    started = time.perf_counter()
    if _symmetric_square(data):
        spectral_input = data
        spectral_on = "input matrix"
    else:
        spectral_input = item_affinity(data)
        spectral_on = "item affinity"
    sp_part = spectral_ratio_assoc(spectral_input, k, seed=options.seed)
    sp_seconds = time.perf_counter() - started

    aff_items = item_affinity(data)
    comparison = {
        "schema_version": SCHEMA_VERSION,
        "input": source if source is not None else {"shape": list(data.shape)},
        "rank": k,
        "seed": options.seed,
        "nmf": nmf_report,
        "kmeans": {
            "labels": km_part.labels.tolist(),
            "inertia": inertia,
            "ra_items": ratio_association(aff_items, km_part),
            "accuracy": None
            if item_labels is None
            else cluster_accuracy(km_part, item_labels),
            "nmi": None if item_labels is None else nmi(km_part, item_labels),
            "seconds": km_seconds,
        },
        "spectral": {
            "labels": sp_part.labels.tolist(),
            "operates_on": spectral_on,
            "ra_items": ratio_association(aff_items, sp_part),
            "accuracy": None
            if item_labels is None
            else cluster_accuracy(sp_part, item_labels),
            "nmi": None if item_labels is None else nmi(sp_part, item_labels),
            "seconds": sp_seconds,
        },
    }
    return comparison


def _load_report_data(report):
    source = report.get("input") or {}
    if "spec" in source:
        spec = SyntheticSpec(**source["spec"])
        data, items, features = generate(spec)
        return data, items, features
    if "path" in source:
        if source.get("format") == "csv":
            data = read_csv_matrix(source["path"])
        else:
            data = read_matrix_market(source["path"])
        return data, None, None
    raise SpecError(
        "report input descriptor has neither a spec nor a path; cannot re-evaluate"
    )


def evaluate_report(report, item_labels=None, feature_labels=None):
    """Recompute all metrics of a report from its stored factors.

    Labels fall back to the ones recorded in the report (or planted by
    the regenerated spec).  Metrics missing their inputs come back as
    explicit None.  Matches the original report within 1e-10 because the
    stored factors and the reloaded data round-trip exactly.
    """
    data, spec_items, spec_features = _load_report_data(report)
    basis = np.asarray(report["basis"])
    coef = np.asarray(report["coefficients"])

    if item_labels is None and report.get("item_labels") is not None:
        item_labels = Partition(
            np.asarray(report["item_labels"]),
            int(max(report["item_labels"])) + 1,
        )
    if item_labels is None:
        item_labels = spec_items
    if feature_labels is None and report.get("feature_labels") is not None:
        feature_labels = Partition(
            np.asarray(report["feature_labels"]),
            int(max(report["feature_labels"])) + 1,
        )
    if feature_labels is None:
        feature_labels = spec_features

    out = {
        "schema_version": report.get("schema_version", SCHEMA_VERSION),
        "objective": frobenius_objective(data, basis, coef),
    }
    out.update(
        evaluate_factors(
            data, basis, coef, item_labels=item_labels, feature_labels=feature_labels
        )
    )
    return out


def _thread_cap():
    raw = os.environ.get("NMF_CLUSTER_THREADS", "").strip()
    if raw:
        try:
            value = int(raw)
        except ValueError:
            raise SpecError(
                f"NMF_CLUSTER_THREADS must be an integer, got {raw!r}"
            ) from None
        if value < 1:
            raise SpecError(f"NMF_CLUSTER_THREADS must be >= 1, got {value}")
        return value
    return os.cpu_count() or 1


def _sweep_cell(spec, solver, seed, lam, base_options):
    cell_spec = SyntheticSpec(
        kind=spec.kind,
        n=spec.n,
        k=spec.k,
        m=spec.m,
        noise=spec.noise,
        overlap=spec.overlap,
        seed=seed,
    )
    data, items, features = generate(cell_spec)
    mode = base_options.ortho_mode if solver == "ortho" else "none"
    options = SolverOptions(
        max_iterations=base_options.max_iterations,
        tolerance=base_options.tolerance,
        window=base_options.window,
        seed=seed,
        restarts=base_options.restarts,
        epsilon_guard=base_options.epsilon_guard,
        ortho_mode=mode,
        penalty=lam if solver == "ortho" else 0.0,
    )
    report = run_experiment(
        data,
        cell_spec.k,
        solver=solver,
        options=options,
        item_labels=items,
        feature_labels=features,
        source={"spec": cell_spec.as_dict()},
    )
    report["lambda"] = lam
    return report


def run_sweep(spec, solvers, seeds, lambdas, base_options=None, max_workers=None):
    """Run the (solver, seed, lambda) grid, in parallel, deterministically.

    Every cell regenerates its dataset with the cell's seed (which also
    seeds the solver) so cells are independent.  Returns the reports in a
    fixed (solver, seed, lambda) sort order regardless of scheduling.
    ``max_workers`` defaults to the NMF_CLUSTER_THREADS environment
    variable, falling back to the machine's CPU count.
    """
    if base_options is None:
        base_options = SolverOptions()
    solvers = list(solvers)
    seeds = list(seeds)
    lambdas = list(lambdas)
    if not seeds:
        raise SpecError("empty seed range")
    if not solvers:
        raise SpecError("no solvers selected")
    if not lambdas:
        lambdas = [0.0]
    for solver in solvers:
        if solver not in SOLVERS:
            raise SpecError(f"unknown solver {solver!r}; choose from {SOLVERS}")
    cells = [
        (solver, seed, lam)
        for solver in solvers
        for seed in seeds
        for lam in lambdas
    ]
    workers = max_workers if max_workers is not None else _thread_cap()
    workers = max(1, min(workers, len(cells)))
    if workers == 1:
        reports = [
            _sweep_cell(spec, solver, seed, lam, base_options)
            for solver, seed, lam in cells
        ]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(
                pool.map(
                    lambda cell: _sweep_cell(spec, *cell, base_options),
                    cells,
                )
            )
    order = sorted(
        range(len(cells)), key=lambda i: (cells[i][0], cells[i][1], cells[i][2])
    )
    return [reports[i] for i in order]


def summary_rows_to_csv(reports):
    """Render sweep reports as the summary CSV text (header + one row/cell)."""
    lines = [",".join(SUMMARY_COLUMNS)]
    for rep in reports:
        row = {
            "solver": rep["solver"],
            "seed": rep["seed"],
            "lambda": rep.get("lambda", rep["options"]["lambda"]),
            "objective": rep["objective"],
            "kkt_b": rep["kkt_b"],
            "kkt_c": rep["kkt_c"],
            "jb2_norm": rep["jb2_norm"],
            "jc2_norm": rep["jc2_norm"],
            "ra_items": rep["ra_items"],
            "accuracy": rep["accuracy"],
            "nmi": rep["nmi"],
            "seconds": rep["seconds"],
        }
        rendered = []
        for col in SUMMARY_COLUMNS:
            value = row[col]
            if value is None:
                rendered.append("")
            elif isinstance(value, float):
                rendered.append(repr(value))
            else:
                rendered.append(str(value))
        lines.append(",".join(rendered))
    return "\n".join(lines) + "\n"
