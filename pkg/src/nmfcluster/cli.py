"""The nmf-cluster command line tool.

Subcommands: gen (synthetic datasets), factorize (one solver run with a
JSON report), evaluate (recompute metrics from a stored report), sweep
(a (solver, seed, lambda) grid with a summary CSV), and compare
(factorization against the k-means and spectral baselines).

Exit codes: 0 success (a non-converged solver run still succeeds and
reports converged=false), 1 usage or invalid specification, 2 I/O or
parse failure, 3 data outside the valid domain.
"""

import argparse
import json
import os
import sys

import numpy as np

from .data_io import (
    KINDS,
    SyntheticSpec,
    generate,
    read_csv_matrix,
    read_labels,
    read_matrix_market,
    write_labels,
    write_matrix_market,
)
from .errors import (
    ConvergenceError,
    DegenerateFactorError,
    DomainError,
    ParseError,
    RankError,
    SizeLimitError,
    SpecError,
)
from .experiment import (
    SOLVERS,
    evaluate_report,
    run_compare,
    run_experiment,
    run_sweep,
    summary_rows_to_csv,
)
from .solvers import ORTHO_MODES, SolverOptions

__all__ = ["main"]


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # route argparse's own failures through the exit-code policy
    def error(self, message):
        raise _UsageError(message)


def _json_default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    raise TypeError(f"not JSON serializable: {type(obj)!r}")


def _emit(payload, out_path):
    text = json.dumps(payload, indent=2, default=_json_default)
    if out_path:
        with open(out_path, "w", encoding="ascii") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _add_spec_flags(p):
    p.add_argument("--kind", required=True, choices=KINDS, help="dataset family")
    p.add_argument("--m", type=int, default=0,
                   help="feature count (matrix kinds only)")
    p.add_argument("--n", type=int, required=True,
                   help="item count, or vertex count for graph kinds")
    p.add_argument("--k", type=int, required=True, help="planted cluster count")
    p.add_argument("--noise", type=float, default=0.0,
                   help="off-block / additive noise level in [0, 1)")
    p.add_argument("--overlap", type=float, default=0.0,
                   help="non-dominant topic weight (mixture-docs)")


def _add_solver_flags(p, with_seed=True):
    p.add_argument("--max-iterations", type=int, default=500)
    p.add_argument("--tolerance", type=float, default=1e-6)
    p.add_argument("--window", type=int, default=10)
    if with_seed:
        p.add_argument("--seed", type=int, default=0)
    p.add_argument("--restarts", type=int, default=1)
    p.add_argument("--epsilon-guard", type=float, default=1e-12)


def _spec_from_args(args, seed):
    return SyntheticSpec(
        kind=args.kind,
        n=args.n,
        k=args.k,
        m=args.m,
        noise=args.noise,
        overlap=args.overlap,
        seed=seed,
    )


def _options_from_args(args, ortho_mode="none", penalty=0.0):
    try:
        return SolverOptions(
            max_iterations=args.max_iterations,
            tolerance=args.tolerance,
            window=args.window,
            seed=getattr(args, "seed", 0),
            restarts=args.restarts,
            epsilon_guard=args.epsilon_guard,
            ortho_mode=ortho_mode,
            penalty=penalty,
        )
    except ValueError as exc:
        raise _UsageError(str(exc)) from None


def _load_matrix(path):
    if path.endswith(".csv"):
        return read_csv_matrix(path), "csv"
    return read_matrix_market(path), "mtx"


def _parse_seeds(text):
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            seeds = list(range(int(lo), int(hi) + 1))
        else:
            seeds = [int(text)]
    except ValueError:
        raise _UsageError(f"--seeds wants an integer or a..b range, got {text!r}") from None
    if not seeds:
        raise _UsageError(f"empty seed range {text!r}")
    return seeds


def cmd_gen(args):
    spec = _spec_from_args(args, args.seed)
    matrix, items, features = generate(spec)
    write_matrix_market(args.out_matrix, matrix)
    write_labels(args.out_labels, items)
    if args.out_feature_labels:
        if features is None:
            raise _UsageError(
                f"kind {spec.kind!r} has no separate feature labels"
            )
        write_labels(args.out_feature_labels, features)
    print(json.dumps(spec.as_dict(), indent=2))
    return 0


def _check_ortho_flags(args):
    if args.solver == "ortho":
        if args.ortho_mode == "none":
            raise _UsageError("--solver ortho needs --ortho-mode "
                              "rows_of_C, cols_of_B, or both")
    else:
        if args.ortho_mode != "none":
            raise _UsageError("--ortho-mode requires --solver ortho")
        if args.penalty != 0.0:
            raise _UsageError("--lambda requires --solver ortho")


def cmd_factorize(args):
    _check_ortho_flags(args)
    data, fmt = _load_matrix(args.input)
    item_labels = read_labels(args.labels) if args.labels else None
    feature_labels = (
        read_labels(args.feature_labels) if args.feature_labels else None
    )
    options = _options_from_args(
        args, ortho_mode=args.ortho_mode, penalty=args.penalty
    )
    report = run_experiment(
        data,
        args.k,
        solver=args.solver,
        options=options,
        item_labels=item_labels,
        feature_labels=feature_labels,
        source={"path": args.input, "format": fmt},
        include_trace=args.trace,
    )
    _emit(report, args.out)
    return 0


def cmd_evaluate(args):
    with open(args.report, "r", encoding="ascii") as fh:
        report = json.load(fh)
    item_labels = read_labels(args.labels) if args.labels else None
    feature_labels = (
        read_labels(args.feature_labels) if args.feature_labels else None
    )
    metrics = evaluate_report(
        report, item_labels=item_labels, feature_labels=feature_labels
    )
    _emit(metrics, args.out)
    return 0


def cmd_sweep(args):
    if "ortho" in args.solvers and args.ortho_mode == "none":
        raise _UsageError("sweeping the ortho solver needs --ortho-mode")
    if args.ortho_mode != "none" and "ortho" not in args.solvers:
        raise _UsageError("--ortho-mode requires the ortho solver")
    seeds = _parse_seeds(args.seeds)
    spec = _spec_from_args(args, seeds[0])
    base_options = _options_from_args(args, ortho_mode=args.ortho_mode)
    reports = run_sweep(
        spec,
        solvers=args.solvers,
        seeds=seeds,
        lambdas=args.lambdas,
        base_options=base_options,
    )
    os.makedirs(args.out, exist_ok=True)
    for rep in reports:
        name = (
            f"report_{rep['solver']}_seed{rep['seed']}_lam{rep['lambda']:g}.json"
        )
        with open(os.path.join(args.out, name), "w", encoding="ascii") as fh:
            fh.write(json.dumps(rep, indent=2, default=_json_default) + "\n")
    summary_path = os.path.join(args.out, "summary.csv")
    with open(summary_path, "w", encoding="ascii") as fh:
        fh.write(summary_rows_to_csv(reports))
    print(summary_path)
    return 0


def cmd_compare(args):
    data, fmt = _load_matrix(args.input)
    item_labels = read_labels(args.labels) if args.labels else None
    feature_labels = (
        read_labels(args.feature_labels) if args.feature_labels else None
    )
    options = _options_from_args(args)
    report = run_compare(
        data,
        args.k,
        options=options,
        item_labels=item_labels,
        feature_labels=feature_labels,
        source={"path": args.input, "format": fmt},
    )
    _emit(report, args.out)
    return 0


def _build_parser():
    parser = _Parser(
        prog="nmf-cluster",
        description="NMF-based clustering: solvers, metrics, and baselines.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic dataset")
    _add_spec_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-matrix", default="matrix.mtx",
                   help="MatrixMarket output path")
    p.add_argument("--out-labels", default="labels.csv",
                   help="planted item/vertex label path")
    p.add_argument("--out-feature-labels", default=None,
                   help="planted feature label path (block-diagonal only)")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("factorize", help="run one solver, write a report")
    p.add_argument("--input", required=True,
                   help="matrix file (.csv for CSV, MatrixMarket otherwise)")
    p.add_argument("--k", type=int, required=True, help="factorization rank")
    p.add_argument("--solver", default="mu", choices=SOLVERS)
    p.add_argument("--ortho-mode", default="none", choices=ORTHO_MODES)
    p.add_argument("--lambda", dest="penalty", type=float, default=0.0,
                   help="orthogonality penalty weight")
    _add_solver_flags(p)
    p.add_argument("--labels", default=None, help="planted item labels")
    p.add_argument("--feature-labels", default=None)
    p.add_argument("--trace", action="store_true",
                   help="include the per-iteration trace in the report")
    p.add_argument("--out", default=None, help="report path (default: stdout)")
    p.set_defaults(func=cmd_factorize)

    p = sub.add_parser("evaluate", help="recompute metrics from a report")
    p.add_argument("--report", required=True)
    p.add_argument("--labels", default=None,
                   help="item labels (defaults to the ones in the report)")
    p.add_argument("--feature-labels", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("sweep", help="run a (solver, seed, lambda) grid")
    _add_spec_flags(p)
    p.add_argument("--solvers", nargs="+", default=["mu"], choices=SOLVERS)
    p.add_argument("--seeds", required=True,
                   help="a..b inclusive range (or a single integer)")
    p.add_argument("--lambdas", nargs="+", type=float, default=[0.0])
    p.add_argument("--ortho-mode", default="none", choices=ORTHO_MODES)
    _add_solver_flags(p, with_seed=False)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("compare",
                       help="factorize vs k-means vs spectral on one input")
    p.add_argument("--input", required=True)
    p.add_argument("--k", type=int, required=True)
    _add_solver_flags(p)
    p.add_argument("--labels", default=None)
    p.add_argument("--feature-labels", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as exc:
        print(f"error: invalid JSON: {exc}", file=sys.stderr)
        return 2
    except (DomainError, DegenerateFactorError, ConvergenceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (SpecError, RankError, SizeLimitError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
