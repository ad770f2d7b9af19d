"""Multiplicative, ANLS, and penalized solvers.

Expected numbers for the empirical examples (the init scaling range, the
capacity ladder, the large-lambda orthogonality run) were measured once
with the seeds used here and then frozen.
"""

import numpy as np
import pytest

from nmfcluster.core import frobenius_objective, kkt_residual, normalize_factors
from nmfcluster.errors import DegenerateInputError, DomainError, RankError, ShapeError
from nmfcluster.metrics import assign_items, cluster_accuracy
from nmfcluster.solvers import (
    SolverOptions,
    init_factors,
    mu_step,
    nmf_anls,
    nmf_multiplicative,
    nmf_orthogonal,
    anls_basis_step,
    anls_coefficient_step,
    penalty_value,
)

from oracles import offdiag_energy


# ---------------------------------------------------------------- options

def test_options_defaults():
    o = SolverOptions()
    assert o.max_iterations == 500
    assert o.tolerance == 1e-6
    assert o.window == 10
    assert o.restarts == 1
    assert o.ortho_mode == "none"
    assert o.effective_penalty == 0.0


def test_options_validation():
    for bad in (
        dict(max_iterations=0),
        dict(tolerance=0.0),
        dict(tolerance=-1.0),
        dict(window=0),
        dict(seed=-1),
        dict(restarts=0),
        dict(epsilon_guard=0.0),
        dict(ortho_mode="sideways"),
        dict(penalty=-0.1),
    ):
        with pytest.raises(ValueError):
            SolverOptions(**bad)


def test_effective_penalty_zeroed_without_mode():
    o = SolverOptions(ortho_mode="none", penalty=5.0)
    assert o.effective_penalty == 0.0
    o = SolverOptions(ortho_mode="rows_of_C", penalty=5.0)
    assert o.effective_penalty == 5.0


# ----------------------------------------------------------- init_factors

def test_init_deterministic_and_positive():
    a = np.full((6, 4), 0.5)
    p1 = init_factors(6, 4, 2, a, seed=3)
    p2 = init_factors(6, 4, 2, a, seed=3)
    assert np.array_equal(p1.basis, p2.basis)
    assert np.array_equal(p1.coefficients, p2.coefficients)
    assert np.all(p1.basis > 0.0)
    assert np.all(p1.coefficients > 0.0)
    assert p1.iterations == 0 and not p1.converged


def test_init_zero_data_warns_and_zeroes():
    with pytest.warns(RuntimeWarning, match="all zeros"):
        pair = init_factors(3, 3, 2, np.zeros((3, 3)), seed=0)
    assert np.all(pair.basis == 0.0)
    assert np.all(pair.coefficients == 0.0)


def test_init_rank_and_shape_errors():
    a = np.ones((4, 3))
    with pytest.raises(RankError):
        init_factors(4, 3, 4, a, seed=0)
    with pytest.raises(RankError):
        init_factors(4, 3, 0, a, seed=0)
    with pytest.raises(ShapeError):
        init_factors(5, 3, 2, a, seed=0)


def test_init_scaling_keeps_product_on_scale():
    """mean(A)/mean(BC) stays in a fixed band.

    The sqrt(mean/K) scale gives E[mean(BC)] = mean(A)/4, and 100 trials
    with this rng measured the ratio in [2.90, 6.11] with median 4.10, so
    the assertion bands are those numbers with margin.
    """
    rng = np.random.default_rng(99)
    ratios = []
    for trial in range(100):
        m = int(rng.integers(5, 30))
        n = int(rng.integers(5, 30))
        k = int(rng.integers(2, 5))
        a = rng.random((m, n)) * rng.uniform(0.5, 3.0)
        pair = init_factors(m, n, k, a, seed=trial)
        ratios.append(a.mean() / (pair.basis @ pair.coefficients).mean())
    ratios = np.array(ratios)
    assert ratios.min() > 2.0
    assert ratios.max() < 8.0
    assert 3.0 < np.median(ratios) < 5.5


# ---------------------------------------------------------------- mu_step

def test_mu_step_fixed_point():
    rng = np.random.default_rng(2)
    b = rng.uniform(0.5, 1.5, (5, 2))
    c = rng.uniform(0.5, 1.5, (2, 6))
    a = b @ c
    nb, nc = mu_step(a, b, c)
    assert np.abs(nb - b).max() <= 1e-9 * np.abs(b).max()
    assert np.abs(nc - c).max() <= 1e-9 * np.abs(c).max()


def test_mu_step_monotone_on_random_instances():
    rng = np.random.default_rng(8)
    for trial in range(20):
        a = rng.random((5, 4))
        b = rng.random((5, 2)) + 0.01
        c = rng.random((2, 4)) + 0.01
        before = frobenius_objective(a, b, c)
        b, c = mu_step(a, b, c)
        after = frobenius_objective(a, b, c)
        assert after <= before + 1e-9 * (1.0 + before)


def test_mu_step_preserves_zeros():
    a = np.ones((3, 3))
    b = np.array([[0.0, 1.0], [0.5, 0.5], [1.0, 0.0]])
    c = np.full((2, 3), 0.5)
    nb, _ = mu_step(a, b, c)
    assert nb[0, 0] == 0.0
    assert nb[2, 1] == 0.0


def test_mu_step_penalized_matches_written_form():
    """One penalized step recomputed longhand, both penalty sides."""
    rng = np.random.default_rng(4)
    a = rng.random((4, 5))
    b0 = rng.random((4, 2)) + 0.1
    c0 = rng.random((2, 5)) + 0.1
    lam, eps = 0.7, 1e-12

    opts = SolverOptions(ortho_mode="rows_of_C", penalty=lam, epsilon_guard=eps)
    nb, nc = mu_step(a, b0, c0, opts)
    eb = b0 * (a @ c0.T) / (b0 @ (c0 @ c0.T) + eps)
    ec = c0 * (eb.T @ a + 2.0 * lam * c0) / (
        eb.T @ eb @ c0 + 2.0 * lam * (c0 @ c0.T @ c0) + eps
    )
    assert np.abs(nb - eb).max() < 1e-14
    assert np.abs(nc - ec).max() < 1e-14

    opts = SolverOptions(ortho_mode="cols_of_B", penalty=lam, epsilon_guard=eps)
    nb, nc = mu_step(a, b0, c0, opts)
    eb = b0 * (a @ c0.T + 2.0 * lam * b0) / (
        b0 @ (c0 @ c0.T) + 2.0 * lam * (b0 @ (b0.T @ b0)) + eps
    )
    ec = c0 * (eb.T @ a) / (eb.T @ eb @ c0 + eps)
    assert np.abs(nb - eb).max() < 1e-14
    assert np.abs(nc - ec).max() < 1e-14


# ------------------------------------------------------ nmf_multiplicative

def test_mu_recovers_planted_blocks():
    a = np.zeros((4, 4))
    a[:2, :2] = 1.0
    a[2:, 2:] = 1.0
    pair, _ = nmf_multiplicative(
        a, 2, SolverOptions(seed=0, restarts=5, max_iterations=2000, tolerance=1e-12)
    )
    assert pair.objective <= 1e-6
    _, nc = normalize_factors(pair.basis, pair.coefficients)
    assert cluster_accuracy(assign_items(nc), np.array([0, 0, 1, 1])) == 1.0


def test_mu_trace_monotone():
    rng = np.random.default_rng(12)
    a = rng.random((10, 8))
    _, trace = nmf_multiplicative(a, 3, SolverOptions(seed=1))
    j = trace.objective
    assert np.all(np.diff(j) <= 1e-9 * (1.0 + j[:-1]))


def test_mu_capacity_ladder():
    """K = min(M,N) reaches at least as low as every smaller K."""
    rng = np.random.default_rng(7)
    a = rng.uniform(0.2, 1.0, (6, 5))
    opts = dict(seed=11, restarts=3, max_iterations=20000, tolerance=1e-12)
    objs = {
        k: nmf_multiplicative(a, k, SolverOptions(**opts))[0].objective
        for k in range(1, 6)
    }
    for k in range(1, 5):
        assert objs[5] <= objs[k]


def test_mu_trace_consistent_with_final_pair():
    rng = np.random.default_rng(21)
    a = rng.random((7, 6))
    pair, trace = nmf_multiplicative(a, 2, SolverOptions(seed=2, max_iterations=50))
    assert len(trace) == pair.iterations + 1
    recomputed = frobenius_objective(a, pair.basis, pair.coefficients)
    assert trace.objective[-1] == pytest.approx(recomputed, rel=1e-12)
    assert pair.objective == pytest.approx(recomputed, rel=1e-12)
    kb, kc = kkt_residual(a, pair.basis, pair.coefficients)
    assert trace.kkt_basis[-1] == pytest.approx(kb, rel=1e-12, abs=1e-15)
    assert trace.kkt_coef[-1] == pytest.approx(kc, rel=1e-12, abs=1e-15)
    assert trace.basis_offdiag[-1] == pytest.approx(
        offdiag_energy(np.asarray(pair.basis), "columns"), rel=1e-10, abs=1e-12
    )
    assert trace.coef_offdiag[-1] == pytest.approx(
        offdiag_energy(np.asarray(pair.coefficients), "rows"), rel=1e-10, abs=1e-12
    )
    assert trace.penalized is None


def test_mu_bit_deterministic():
    rng = np.random.default_rng(30)
    a = rng.random((8, 6))
    p1, t1 = nmf_multiplicative(a, 2, SolverOptions(seed=4, max_iterations=60))
    p2, t2 = nmf_multiplicative(a, 2, SolverOptions(seed=4, max_iterations=60))
    assert np.array_equal(p1.basis, p2.basis)
    assert np.array_equal(p1.coefficients, p2.coefficients)
    assert np.array_equal(t1.objective, t2.objective)


def test_mu_restarts_pick_best_objective():
    rng = np.random.default_rng(31)
    a = rng.random((9, 7))
    singles = [
        nmf_multiplicative(a, 3, SolverOptions(seed=s, max_iterations=80))[0].objective
        for s in (20, 21, 22)
    ]
    best, _ = nmf_multiplicative(
        a, 3, SolverOptions(seed=20, restarts=3, max_iterations=80)
    )
    assert best.objective == min(singles)


def test_mu_stops_by_cap_or_by_window():
    rng = np.random.default_rng(32)
    a = rng.random((6, 5))
    capped, trace = nmf_multiplicative(
        a, 2, SolverOptions(seed=0, max_iterations=3, tolerance=1e-15)
    )
    assert capped.iterations == 3
    assert not capped.converged
    settled, _ = nmf_multiplicative(
        a, 2, SolverOptions(seed=0, max_iterations=5000, tolerance=1e-3, window=5)
    )
    assert settled.converged
    assert settled.iterations < 5000


def test_mu_input_errors():
    with pytest.raises(DomainError):
        nmf_multiplicative(np.array([[1.0, -1.0]]), 1, SolverOptions())
    with pytest.raises(DegenerateInputError):
        nmf_multiplicative(np.zeros((3, 3)), 2, SolverOptions())
    with pytest.raises(RankError):
        nmf_multiplicative(np.ones((3, 3)), 4, SolverOptions())


# ---------------------------------------------------------------- nmf_anls

def test_anls_exact_rank_k():
    rng = np.random.default_rng(5)
    b0 = rng.uniform(0.2, 1.0, (6, 2))
    c0 = rng.uniform(0.2, 1.0, (2, 7))
    a = b0 @ c0
    for seed in (0, 1):
        pair, _ = nmf_anls(
            a, 2, SolverOptions(seed=seed, max_iterations=200, tolerance=1e-14, window=5)
        )
        assert pair.objective <= 1e-8


def test_anls_half_sweep_monotone():
    """Each block solve is a global block optimum, so the objective may
    not rise at either half-sweep beyond arithmetic slack."""
    rng = np.random.default_rng(6)
    for trial in range(20):
        m, n, k = int(rng.integers(3, 8)), int(rng.integers(3, 8)), int(rng.integers(1, 4))
        a = rng.random((m, n))
        pair = init_factors(m, n, k, a, seed=trial)
        b = np.asarray(pair.basis).copy()
        c = np.asarray(pair.coefficients).copy()
        for sweep in range(3):
            j0 = frobenius_objective(a, b, c)
            c = anls_coefficient_step(a, b)
            j1 = frobenius_objective(a, b, c)
            assert j1 <= j0 + 1e-12
            b = anls_basis_step(a, c)
            j2 = frobenius_objective(a, b, c)
            assert j2 <= j1 + 1e-12


def test_anls_single_column_reduces_to_nnls():
    from nmfcluster.solvers import NnlsProblem, nnls_solve

    rng = np.random.default_rng(3)
    a = rng.uniform(0.1, 1.0, (5, 1))
    pair, _ = nmf_anls(a, 1, SolverOptions(seed=2, max_iterations=50, tolerance=1e-12, window=5))
    c = nnls_solve(NnlsProblem(np.asarray(pair.basis), a[:, 0]))
    resid = a[:, 0] - np.asarray(pair.basis) @ c
    assert abs(pair.objective - 0.5 * float(resid @ resid)) <= 1e-12


def test_anls_bit_deterministic():
    rng = np.random.default_rng(40)
    a = rng.random((7, 5))
    p1, t1 = nmf_anls(a, 2, SolverOptions(seed=1, max_iterations=30))
    p2, t2 = nmf_anls(a, 2, SolverOptions(seed=1, max_iterations=30))
    assert np.array_equal(p1.basis, p2.basis)
    assert np.array_equal(t1.objective, t2.objective)


# ---------------------------------------------------------- nmf_orthogonal

def test_ortho_requires_a_mode():
    with pytest.raises(ValueError, match="ortho_mode"):
        nmf_orthogonal(np.ones((3, 3)), 2, SolverOptions(ortho_mode="none"))


def test_ortho_lambda_zero_reproduces_mu_exactly():
    rng = np.random.default_rng(14)
    a = rng.random((8, 7))
    plain, t_plain = nmf_multiplicative(a, 3, SolverOptions(seed=5, max_iterations=40))
    pen, t_pen = nmf_orthogonal(
        a, 3, SolverOptions(seed=5, max_iterations=40, ortho_mode="rows_of_C", penalty=0.0)
    )
    assert np.array_equal(plain.basis, pen.basis)
    assert np.array_equal(plain.coefficients, pen.coefficients)
    assert np.array_equal(t_plain.objective, t_pen.objective)


def test_ortho_penalized_trace_is_objective_plus_penalty():
    rng = np.random.default_rng(15)
    a = rng.random((6, 9))
    opts = SolverOptions(seed=3, max_iterations=30, ortho_mode="both", penalty=2.5)
    pair, trace = nmf_orthogonal(a, 2, opts)
    assert trace.penalized is not None
    expected = pair.objective + penalty_value(pair.basis, pair.coefficients, opts)
    assert trace.penalized[-1] == pytest.approx(expected, rel=1e-12)
    assert np.all(trace.penalized >= trace.objective - 1e-12)


def test_ortho_penalty_reduces_row_gram_deviation():
    """Paired seeds on planted blocks: lambda=10 beats lambda=0 in median."""
    from nmfcluster.data_io import SyntheticSpec, gen_block_diagonal
    from nmfcluster.metrics import orthogonality_deviation

    def median_jc2(lam):
        vals = []
        for seed in range(10):
            spec = SyntheticSpec(kind="block-diagonal", n=20, k=2, m=20, noise=0.05, seed=seed)
            a, _, _ = gen_block_diagonal(spec)
            pair, _ = nmf_orthogonal(
                a, 2, SolverOptions(seed=seed, ortho_mode="rows_of_C", penalty=lam)
            )
            _, nc = normalize_factors(pair.basis, pair.coefficients)
            vals.append(orthogonality_deviation(nc, axis="rows")[1])
        return float(np.median(vals))

    assert median_jc2(10.0) <= median_jc2(0.0)


def test_ortho_both_large_lambda_near_orthogonal():
    """eye(4), K=2, lambda=1e3.

    The penalized update oscillates with period 2 at this lambda (the map
    is locally x -> 1/x), so the run needs an even window longer than the
    transient before the swing contracts.  Measured deviations land near
    5e-5; the asserted 0.2 is the frozen acceptance-style threshold.
    """
    pair, _ = nmf_orthogonal(
        np.eye(4),
        2,
        SolverOptions(
            seed=0, ortho_mode="both", penalty=1e3,
            max_iterations=20000, tolerance=1e-15, window=200,
        ),
    )
    b, c = np.asarray(pair.basis), np.asarray(pair.coefficients)
    assert np.linalg.norm(b.T @ b - np.eye(2)) <= 0.2
    assert np.linalg.norm(c @ c.T - np.eye(2)) <= 0.2


def test_all_iterates_nonnegative():
    rng = np.random.default_rng(50)
    a = rng.random((6, 6))
    b = np.asarray(init_factors(6, 6, 2, a, seed=0).basis).copy()
    c = np.asarray(init_factors(6, 6, 2, a, seed=1).coefficients).copy()
    opts = SolverOptions(ortho_mode="both", penalty=3.0)
    for it in range(25):
        b, c = mu_step(a, b, c, opts)
        assert np.all(b >= 0.0)
        assert np.all(c >= 0.0)
