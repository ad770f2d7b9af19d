"""Factorization solvers.

Three families, all minimizing J(B, C) = 0.5 * ||A - B C||_F^2 over
nonnegative factors:

* ``nmf_multiplicative``: classic multiplicative updates.
* ``nmf_orthogonal``: multiplicative updates on the penalized objective
  J + (lambda/2) * ||B^T B - I||_F^2 and/or (lambda/2) * ||C C^T - I||_F^2,
  selected by ``ortho_mode``.  Row-orthogonal C and column-orthogonal B are
  the two one-sided regimes; ``both`` penalizes both Gram matrices.
* ``nmf_anls``: alternating nonnegative least squares, each half-sweep
  solved exactly column by column with an active-set kernel.

Every solver returns a (FactorPair, ConvergenceTrace) pair and is
deterministic given (data, rank, options).
"""

import warnings
from dataclasses import dataclass, replace

import numpy as np

from .core import (
    ConvergenceTrace,
    FactorPair,
    as_matrix,
    as_vector,
    frobenius_objective,
    require_nonnegative,
    _conforming,
)
from .errors import (
    ConvergenceError,
    DegenerateInputError,
    DomainError,
    RankError,
    ShapeError,
)

__all__ = [
    "ORTHO_MODES",
    "SolverOptions",
    "NnlsProblem",
    "init_factors",
    "mu_step",
    "penalty_value",
    "nmf_multiplicative",
    "nmf_orthogonal",
    "nnls_solve",
    "anls_coefficient_step",
    "anls_basis_step",
    "nmf_anls",
]

ORTHO_MODES = ("none", "rows_of_C", "cols_of_B", "both")


@dataclass(frozen=True)
class SolverOptions:
    """Knobs shared by all solvers.

    ``tolerance`` and ``window`` define the stopping rule: stop once the
    relative decrease of the monitored objective over the last ``window``
    iterations falls below ``tolerance``.  ``penalty`` is the
    orthogonality weight (the lambda of the penalized objective; the name
    ``lambda`` is reserved in Python) and is ignored when
    ``ortho_mode == "none"``.
    """

    max_iterations: int = 500
    tolerance: float = 1e-6
    window: int = 10
    seed: int = 0
    restarts: int = 1
    epsilon_guard: float = 1e-12
    ortho_mode: str = "none"
    penalty: float = 0.0

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if not self.tolerance > 0.0:
            raise ValueError(f"tolerance must be > 0, got {self.tolerance}")
        if self.window < 1:
            raise ValueError(f"window must be >= 1, got {self.window}")
        if self.seed < 0:
            raise ValueError(f"seed must be >= 0, got {self.seed}")
        if self.restarts < 1:
            raise ValueError(f"restarts must be >= 1, got {self.restarts}")
        if not self.epsilon_guard > 0.0:
            raise ValueError(f"epsilon_guard must be > 0, got {self.epsilon_guard}")
        if self.ortho_mode not in ORTHO_MODES:
            raise ValueError(
                f"ortho_mode must be one of {ORTHO_MODES}, got {self.ortho_mode!r}"
            )
        if self.penalty < 0.0:
            raise ValueError(f"penalty must be >= 0, got {self.penalty}")

    @property
    def effective_penalty(self):
        """The penalty weight actually applied (0 when ortho_mode is none)."""
        return 0.0 if self.ortho_mode == "none" else self.penalty


def init_factors(m, n, k, data, seed):
    """Random nonnegative starting factors for an m-by-n data matrix.

    Entries are i.i.d. uniform draws scaled by sqrt(mean(data)/k), which
    puts mean(B @ C) on the same order as mean(data).  Draws use the
    half-open interval flipped to (0, 1] so every entry is strictly
    positive and no multiplicative update starts zero-locked.  An all-zero
    data matrix yields all-zero factors and a RuntimeWarning.
    """
    data = as_matrix(data, "data")
    require_nonnegative(data, "data")
    if data.shape != (m, n):
        raise ShapeError(f"data has shape {data.shape}, expected ({m}, {n})")
    if not 1 <= k <= min(m, n):
        raise RankError(f"k must be in [1, {min(m, n)}] for a {m}x{n} matrix, got {k}")
    rng = np.random.default_rng(seed)
    scale = float(np.sqrt(data.mean() / k))
    if scale == 0.0:
        warnings.warn(
            "data matrix is all zeros; initial factors are identically zero",
            RuntimeWarning,
            stacklevel=2,
        )
    basis = (1.0 - rng.random((m, k))) * scale
    coef = (1.0 - rng.random((k, n))) * scale
    return FactorPair(
        basis=basis,
        coefficients=coef,
        rank=k,
        objective=frobenius_objective(data, basis, coef),
        iterations=0,
        converged=False,
    )


def mu_step(data, basis, coef, options=None):
    """One multiplicative update of B then C.

    B' = B * (A C^T) / (B C C^T + eps), then
    C' = C * (B'^T A) / (B'^T B' C + eps).

    With an active ortho_mode the penalty gradient splits into the ratio:
    its negative part joins the numerator, its positive part the
    denominator (e.g. rows_of_C adds 2*lambda*C on top and
    2*lambda*C C^T C below).  Zeros stay zero; nonnegativity is preserved
    by construction.
    """
    if options is None:
        options = SolverOptions()
    data, basis, coef = _conforming(data, basis, coef)
    eps = options.epsilon_guard
    lam = options.effective_penalty
    mode = options.ortho_mode

    numer = data @ coef.T
    denom = basis @ (coef @ coef.T)
    if lam > 0.0 and mode in ("cols_of_B", "both"):
        numer = numer + 2.0 * lam * basis
        denom = denom + 2.0 * lam * (basis @ (basis.T @ basis))
    basis = basis * numer / (denom + eps)

    numer = basis.T @ data
    denom = (basis.T @ basis) @ coef
    if lam > 0.0 and mode in ("rows_of_C", "both"):
        numer = numer + 2.0 * lam * coef
        denom = denom + 2.0 * lam * ((coef @ coef.T) @ coef)
    coef = coef * numer / (denom + eps)
    return basis, coef


def penalty_value(basis, coef, options):
    """Current value of the orthogonality penalty terms.

    (lambda/2) * ||B^T B - I||_F^2 for cols_of_B, (lambda/2) *
    ||C C^T - I||_F^2 for rows_of_C, the sum of both for mode both,
    0.0 when the mode is none or lambda is 0.
    """
    lam = options.effective_penalty
    if lam == 0.0:
        return 0.0
    total = 0.0
    if options.ortho_mode in ("cols_of_B", "both"):
        g = basis.T @ basis
        g = g - np.eye(g.shape[0])
        total += float(np.vdot(g, g))
    if options.ortho_mode in ("rows_of_C", "both"):
        g = coef @ coef.T
        g = g - np.eye(g.shape[0])
        total += float(np.vdot(g, g))
    return 0.5 * lam * total


def _gram_offdiag(gram):
    off = gram.copy()
    np.fill_diagonal(off, 0.0)
    return float(np.vdot(off, off))


class _Recorder:
    """Accumulates the per-iteration trace of one solver run."""

    def __init__(self, data, penalized):
        self.data = data
        self.iteration = []
        self.objective = []
        self.kkt_basis = []
        self.kkt_coef = []
        self.basis_offdiag = []
        self.coef_offdiag = []
        self.penalized = [] if penalized else None

    def add(self, t, basis, coef, options):
        residual = basis @ coef - self.data
        obj = 0.5 * float(np.vdot(residual, residual))
        gb = residual @ coef.T
        gc = basis.T @ residual
        self.iteration.append(t)
        self.objective.append(obj)
        self.kkt_basis.append(float(np.linalg.norm(np.minimum(basis, gb))))
        self.kkt_coef.append(float(np.linalg.norm(np.minimum(coef, gc))))
        self.basis_offdiag.append(_gram_offdiag(basis.T @ basis))
        self.coef_offdiag.append(_gram_offdiag(coef @ coef.T))
        if self.penalized is not None:
            self.penalized.append(obj + penalty_value(basis, coef, options))
        return obj

    def monitored(self):
        return self.objective if self.penalized is None else self.penalized

    def trace(self):
        return ConvergenceTrace(
            iteration=np.asarray(self.iteration),
            objective=np.asarray(self.objective),
            kkt_basis=np.asarray(self.kkt_basis),
            kkt_coef=np.asarray(self.kkt_coef),
            basis_offdiag=np.asarray(self.basis_offdiag),
            coef_offdiag=np.asarray(self.coef_offdiag),
            penalized=None if self.penalized is None else np.asarray(self.penalized),
        )


def _window_stop(values, window, tolerance):
    # values[0] is the initial point; need window+1 entries for one test
    if len(values) <= window:
        return False
    prev = values[-1 - window]
    cur = values[-1]
    if prev <= 0.0:
        return True
    return (prev - cur) / prev < tolerance


def _validate_problem(data, k):
    data = as_matrix(data, "data")
    require_nonnegative(data, "data")
    if not np.any(data):
        raise DegenerateInputError("data matrix is all zeros; nothing to factorize")
    if not 1 <= k <= min(data.shape):
        raise RankError(
            f"k must be in [1, {min(data.shape)}] for a "
            f"{data.shape[0]}x{data.shape[1]} matrix, got {k}"
        )
    return data


def _run_multiplicative(data, k, options, seed):
    m, n = data.shape
    start = init_factors(m, n, k, data, seed)
    basis = np.array(start.basis)
    coef = np.array(start.coefficients)
    rec = _Recorder(data, penalized=options.ortho_mode != "none")
    rec.add(0, basis, coef, options)
    converged = False
    iterations = 0
    for t in range(1, options.max_iterations + 1):
        basis, coef = mu_step(data, basis, coef, options)
        rec.add(t, basis, coef, options)
        iterations = t
        if _window_stop(rec.monitored(), options.window, options.tolerance):
            converged = True
            break
    pair = FactorPair(
        basis=basis,
        coefficients=coef,
        rank=k,
        objective=frobenius_objective(data, basis, coef),
        iterations=iterations,
        converged=converged,
    )
    return pair, rec.trace()


def _best_of_restarts(data, k, options, run_one, key):
    best = None
    best_key = None
    for r in range(options.restarts):
        pair, trace = run_one(data, k, options, options.seed + r)
        candidate = key(pair, trace)
        if best is None or candidate < best_key:
            best = (pair, trace)
            best_key = candidate
    return best


def nmf_multiplicative(data, k, options=None):
    """Standard NMF by multiplicative updates.

    Runs ``options.restarts`` independent starts (seeds seed, seed+1, ...)
    and keeps the run with the lowest final objective, ties going to the
    earliest restart.  The trace covers the winning run only, starting at
    the initial point (iteration 0).  ortho_mode is ignored here; use
    nmf_orthogonal for the penalized regimes.
    """
    if options is None:
        options = SolverOptions()
    if options.ortho_mode != "none":
        options = replace(options, ortho_mode="none")
    data = _validate_problem(data, k)
    return _best_of_restarts(
        data, k, options, _run_multiplicative, key=lambda pair, trace: pair.objective
    )


def nmf_orthogonal(data, k, options):
    """Penalized multiplicative updates for the orthogonal regimes.

    Requires ortho_mode in {rows_of_C, cols_of_B, both}.  The stopping
    rule and the restart selection both monitor the penalized objective
    (trace field ``penalized``); the trace and FactorPair keep the raw J
    alongside it.  With penalty=0 the arithmetic reduces exactly to
    nmf_multiplicative, iterate for iterate.
    """
    if options is None or options.ortho_mode == "none":
        raise ValueError("nmf_orthogonal requires ortho_mode in "
                         "{rows_of_C, cols_of_B, both}; use nmf_multiplicative "
                         "for the unpenalized problem")
    data = _validate_problem(data, k)
    return _best_of_restarts(
        data, k, options, _run_multiplicative,
        key=lambda pair, trace: float(trace.penalized[-1]),
    )


@dataclass(frozen=True)
class NnlsProblem:
    """One nonnegative least squares instance: min 0.5*||target - design @ c||^2
    over c >= 0, with nonnegative design and target (data vectors here are
    always nonnegative)."""

    design: np.ndarray
    target: np.ndarray

    def __post_init__(self):
        design = as_matrix(self.design, "design")
        target = as_vector(self.target, "target")
        require_nonnegative(design, "design")
        if target.shape[0] != design.shape[0]:
            raise ShapeError(
                f"target length {target.shape[0]} does not match design rows "
                f"{design.shape[0]}"
            )
        if np.any(target < 0.0):
            i = int(np.flatnonzero(target < 0.0)[0])
            raise DomainError(f"target has negative entry at index {i}")
        design = design.copy()
        design.flags.writeable = False
        target = target.copy()
        target.flags.writeable = False
        object.__setattr__(self, "design", design)
        object.__setattr__(self, "target", target)


def _nnls_kernel(design, target, swap_limit):
    """Lawson-Hanson active set iteration.

    Returns the optimal coefficient vector.  ``swap_limit`` caps the total
    number of active-set changes (insertions plus releases); exceeding it
    raises ConvergenceError carrying the best iterate seen.
    """
    m, k = design.shape
    c = np.zeros(k)
    passive = np.zeros(k, dtype=bool)
    # dual feasibility tolerance, scaled to the data magnitude
    scale = max(1.0, float(np.abs(design).max())) * max(1.0, float(np.abs(target).max()))
    tol = 10.0 * np.finfo(np.float64).eps * max(m, k) * scale
    best_c = c.copy()
    best_obj = 0.5 * float(target @ target)
    swaps = 0
    while True:
        w = design.T @ (target - design @ c)
        w[passive] = -np.inf
        if passive.all() or float(w.max()) <= tol:
            return c
        j = int(np.argmax(w))
        passive[j] = True
        swaps += 1
        if swaps > swap_limit:
            raise ConvergenceError(
                f"active-set limit of {swap_limit} swaps exceeded", best=best_c
            )
        while True:
            z, *_ = np.linalg.lstsq(design[:, passive], target, rcond=None)
            if z.size and float(z.min()) > 0.0:
                c = np.zeros(k)
                c[passive] = z
                break
            cp = c[passive]
            neg = z <= 0.0
            steps = cp[neg] / (cp[neg] - z[neg])
            alpha = float(steps.min())
            moved = cp + alpha * (z - cp)
            moved[moved <= tol] = 0.0
            c = np.zeros(k)
            c[passive] = moved
            release = np.flatnonzero(passive)[moved == 0.0]
            if release.size == 0:
                # numerically stalled step; force out the blocking variable
                blocked = np.flatnonzero(passive)[neg]
                release = blocked[[int(np.argmin(steps))]]
            passive[release] = False
            c[release] = 0.0
            swaps += int(release.size)
            if swaps > swap_limit:
                raise ConvergenceError(
                    f"active-set limit of {swap_limit} swaps exceeded", best=best_c
                )
        resid = target - design @ c
        obj = 0.5 * float(resid @ resid)
        if obj < best_obj:
            best_obj = obj
            best_c = c.copy()


def nnls_solve(problem, target=None):
    """Solve one NNLS problem exactly.

    Accepts either an NnlsProblem or a (design, target) pair.  The result
    satisfies the KKT conditions: g = design^T (design @ c - target) has
    g_i >= -1e-8 everywhere and |c_i * g_i| <= 1e-8.
    """
    if target is not None:
        problem = NnlsProblem(problem, target)
    elif not isinstance(problem, NnlsProblem):
        raise ShapeError("nnls_solve expects an NnlsProblem or (design, target)")
    k = problem.design.shape[1]
    return _nnls_kernel(problem.design, problem.target, swap_limit=3 * k)


def anls_coefficient_step(data, basis):
    """Exact C update: one NNLS solve per data column against the basis."""
    data = as_matrix(data, "data")
    basis = as_matrix(basis, "basis")
    if basis.shape[0] != data.shape[0]:
        raise ShapeError(
            f"basis rows {basis.shape[0]} do not match data rows {data.shape[0]}"
        )
    k = basis.shape[1]
    coef = np.empty((k, data.shape[1]))
    for j in range(data.shape[1]):
        coef[:, j] = _nnls_kernel(basis, data[:, j], swap_limit=3 * k)
    return coef


def anls_basis_step(data, coef):
    """Exact B update: one NNLS solve per data row against C^T."""
    data = as_matrix(data, "data")
    coef = as_matrix(coef, "coefficients")
    if coef.shape[1] != data.shape[1]:
        raise ShapeError(
            f"coefficient columns {coef.shape[1]} do not match data columns "
            f"{data.shape[1]}"
        )
    k = coef.shape[0]
    design = np.ascontiguousarray(coef.T)
    basis = np.empty((data.shape[0], k))
    for i in range(data.shape[0]):
        basis[i, :] = _nnls_kernel(design, data[i, :], swap_limit=3 * k)
    return basis


def _run_anls(data, k, options, seed):
    m, n = data.shape
    start = init_factors(m, n, k, data, seed)
    basis = np.array(start.basis)
    coef = np.array(start.coefficients)
    rec = _Recorder(data, penalized=False)
    rec.add(0, basis, coef, options)
    converged = False
    iterations = 0
    for t in range(1, options.max_iterations + 1):
        coef = anls_coefficient_step(data, basis)
        basis = anls_basis_step(data, coef)
        rec.add(t, basis, coef, options)
        iterations = t
        if _window_stop(rec.objective, options.window, options.tolerance):
            converged = True
            break
    pair = FactorPair(
        basis=basis,
        coefficients=coef,
        rank=k,
        objective=frobenius_objective(data, basis, coef),
        iterations=iterations,
        converged=converged,
    )
    return pair, rec.trace()


def nmf_anls(data, k, options=None):
    """NMF by alternating exact NNLS sweeps (C given B, then B given C).

    Each half-sweep is a global optimum of its block, so the objective is
    non-increasing per half-sweep up to arithmetic noise.  Restart and
    stopping semantics match nmf_multiplicative.
    """
    if options is None:
        options = SolverOptions()
    data = _validate_problem(data, k)
    return _best_of_restarts(
        data, k, options, _run_anls, key=lambda pair, trace: pair.objective
    )
