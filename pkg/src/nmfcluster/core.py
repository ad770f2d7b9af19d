"""Core quantities for the nonnegative factorization A ~ B C.

A is an m-by-n data matrix, B an m-by-k basis and C a k-by-n coefficient
matrix, all nonnegative.  The objective throughout the package is

    J(B, C) = 0.5 * ||A - B C||_F^2

and the gradients and first-order (KKT) residuals below are the building
blocks every solver and diagnostic shares.

Matrices are plain float64 ndarrays.  ``as_matrix`` and
``require_nonnegative`` are the validation choke points; public entry
points call them instead of trusting the caller.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateFactorError, DomainError, ShapeError

__all__ = [
    "as_matrix",
    "as_vector",
    "require_nonnegative",
    "frobenius_objective",
    "gradient_basis",
    "gradient_coefficients",
    "kkt_residual",
    "normalize_factors",
    "FactorPair",
    "ConvergenceTrace",
]


def as_matrix(values, name="matrix"):
    """Coerce ``values`` to a C-contiguous 2-D float64 array.

    Raises ShapeError for anything that is not a nonempty 2-D array and
    DomainError if any entry is NaN or infinite.
    """
    try:
        a = np.ascontiguousarray(values, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ShapeError(f"{name} is not a numeric array: {exc}") from None
    if a.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got ndim={a.ndim}")
    if a.shape[0] == 0 or a.shape[1] == 0:
        raise ShapeError(f"{name} must be nonempty, got shape {a.shape}")
    if not np.isfinite(a).all():
        i, j = np.argwhere(~np.isfinite(a))[0]
        raise DomainError(f"{name} has non-finite entry at ({i}, {j})")
    return a


def as_vector(values, name="vector"):
    """Coerce to a 1-D float64 array, rejecting NaN/Inf."""
    try:
        v = np.ascontiguousarray(values, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ShapeError(f"{name} is not a numeric array: {exc}") from None
    if v.ndim != 1:
        raise ShapeError(f"{name} must be 1-D, got ndim={v.ndim}")
    if not np.isfinite(v).all():
        i = int(np.flatnonzero(~np.isfinite(v))[0])
        raise DomainError(f"{name} has non-finite entry at index {i}")
    return v


def require_nonnegative(a, name="matrix"):
    """Raise DomainError naming the first negative coordinate, if any."""
    if np.any(a < 0.0):
        i, j = np.argwhere(a < 0.0)[0]
        raise DomainError(f"{name} has negative entry {a[i, j]:g} at ({i}, {j})")
    return a


def _conforming(data, basis, coef):
    data = as_matrix(data, "data")
    basis = as_matrix(basis, "basis")
    coef = as_matrix(coef, "coefficients")
    m, n = data.shape
    if basis.shape[0] != m or coef.shape[1] != n or basis.shape[1] != coef.shape[0]:
        raise ShapeError(
            f"shapes do not conform: data {data.shape}, basis {basis.shape}, "
            f"coefficients {coef.shape}"
        )
    return data, basis, coef


def frobenius_objective(data, basis, coef):
    """Return J = 0.5 * ||data - basis @ coef||_F^2."""
    data, basis, coef = _conforming(data, basis, coef)
    residual = data - basis @ coef
    return 0.5 * float(np.vdot(residual, residual))


def gradient_basis(data, basis, coef):
    """Gradient of J with respect to the basis: (B C - A) C^T."""
    data, basis, coef = _conforming(data, basis, coef)
    return (basis @ coef - data) @ coef.T


def gradient_coefficients(data, basis, coef):
    """Gradient of J with respect to the coefficients: B^T (B C - A)."""
    data, basis, coef = _conforming(data, basis, coef)
    return basis.T @ (basis @ coef - data)


def kkt_residual(data, basis, coef):
    """Projected first-order residual of the nonnegativity-constrained problem.

    For a stationary pair the elementwise min(factor, gradient) vanishes:
    where a factor entry is positive the gradient must be zero, and where
    it sits at the bound the gradient must be nonnegative.  Returns the
    Frobenius norms of those projected gradients as a ``(for B, for C)``
    tuple; both are zero exactly at a KKT point.
    """
    data, basis, coef = _conforming(data, basis, coef)
    gb = (basis @ coef - data) @ coef.T
    gc = basis.T @ (basis @ coef - data)
    rb = np.minimum(basis, gb)
    rc = np.minimum(coef, gc)
    return float(np.linalg.norm(rb)), float(np.linalg.norm(rc))


def normalize_factors(basis, coef):
    """Rescale so every basis column has unit Euclidean norm.

    The inverse scale moves into the matching coefficient row, so the
    product ``basis @ coef`` is unchanged.  Raises DegenerateFactorError
    if some basis column is identically zero.
    """
    basis = as_matrix(basis, "basis")
    coef = as_matrix(coef, "coefficients")
    if basis.shape[1] != coef.shape[0]:
        raise ShapeError(
            f"basis {basis.shape} and coefficients {coef.shape} do not conform"
        )
    norms = np.linalg.norm(basis, axis=0)
    dead = np.flatnonzero(norms == 0.0)
    if dead.size:
        raise DegenerateFactorError(f"basis column {dead[0]} is all zeros")
    return basis / norms, coef * norms[:, None]


def _frozen(a):
    out = np.array(a, dtype=np.float64, copy=True)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class FactorPair:
    """A factorization result: nonnegative basis and coefficients plus the
    bookkeeping a caller needs to judge it (final objective, iterations
    spent, whether the stopping rule fired).  Arrays are stored read-only.
    """

    basis: np.ndarray
    coefficients: np.ndarray
    rank: int
    objective: float
    iterations: int
    converged: bool

    def __post_init__(self):
        basis = as_matrix(self.basis, "basis")
        coef = as_matrix(self.coefficients, "coefficients")
        require_nonnegative(basis, "basis")
        require_nonnegative(coef, "coefficients")
        if basis.shape[1] != self.rank or coef.shape[0] != self.rank:
            raise ShapeError(
                f"rank {self.rank} inconsistent with basis {basis.shape} and "
                f"coefficients {coef.shape}"
            )
        if not np.isfinite(self.objective) or self.objective < 0.0:
            raise DomainError(f"objective must be finite and >= 0, got {self.objective}")
        if self.iterations < 0:
            raise DomainError(f"iterations must be >= 0, got {self.iterations}")
        object.__setattr__(self, "basis", _frozen(basis))
        object.__setattr__(self, "coefficients", _frozen(coef))

    @property
    def shape(self):
        return self.basis.shape[0], self.coefficients.shape[1]


@dataclass(frozen=True)
class ConvergenceTrace:
    """Per-iteration history of a solver run.

    Index 0 is the initial point, before any update.  ``objective`` is the
    raw J; when a solver minimizes a penalized surrogate the surrogate's
    values appear in ``penalized`` (otherwise None).  ``basis_offdiag`` and
    ``coef_offdiag`` are the raw off-diagonal Gram energies: the sum of
    squared inner products between distinct basis columns and distinct
    coefficient rows, without normalization.
    """

    iteration: np.ndarray
    objective: np.ndarray
    kkt_basis: np.ndarray
    kkt_coef: np.ndarray
    basis_offdiag: np.ndarray
    coef_offdiag: np.ndarray
    penalized: np.ndarray | None = field(default=None)

    def __post_init__(self):
        it = np.asarray(self.iteration, dtype=np.int64)
        series = {
            "objective": self.objective,
            "kkt_basis": self.kkt_basis,
            "kkt_coef": self.kkt_coef,
            "basis_offdiag": self.basis_offdiag,
            "coef_offdiag": self.coef_offdiag,
        }
        if self.penalized is not None:
            series["penalized"] = self.penalized
        if it.ndim != 1 or it.size == 0:
            raise ShapeError("trace must hold at least the initial record")
        if it[0] != 0 or np.any(np.diff(it) <= 0):
            raise ShapeError("iteration indices must increase strictly from 0")
        for name, values in series.items():
            v = np.asarray(values, dtype=np.float64)
            if v.shape != it.shape:
                raise ShapeError(f"trace field {name} has shape {v.shape}, "
                                 f"expected {it.shape}")
            if not np.isfinite(v).all():
                raise DomainError(f"trace field {name} has non-finite values")
            frozen = v.copy()
            frozen.flags.writeable = False
            object.__setattr__(self, name, frozen)
        it = it.copy()
        it.flags.writeable = False
        object.__setattr__(self, "iteration", it)

    def __len__(self):
        return int(self.iteration.size)
