"""Cluster extraction from factors and partition-quality metrics.

Assignments follow the indicator reading of the factors: item n joins
argmax_k of column n of C, feature m joins argmax_k of row m of B, with
B's columns unit-normalized first (use core.normalize_factors) so the
coefficient rows are on a common scale.  Scoring covers ratio association
(with a brute-force oracle for desk-scale n), orthogonality deviation of
a factor's Gram matrix, matched accuracy, and NMI.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .affinity import weights_array
from .core import as_matrix, require_nonnegative
from .errors import DegenerateFactorError, DomainError, ShapeError, SizeLimitError

__all__ = [
    "Partition",
    "as_partition",
    "assign_items",
    "assign_features",
    "ratio_association",
    "brute_force_ratio_assoc",
    "orthogonality_deviation",
    "cluster_accuracy",
    "nmi",
]

BRUTE_FORCE_MAX_N = 12
MATCHING_MAX_K = 64


@dataclass(frozen=True)
class Partition:
    """Hard cluster labels over n elements, values in [0, n_clusters)."""

    labels: np.ndarray
    n_clusters: int

    def __post_init__(self):
        arr = np.asarray(self.labels)
        if arr.ndim != 1 or arr.size == 0:
            raise ShapeError(f"labels must be a nonempty 1-D array, got shape {arr.shape}")
        if not np.issubdtype(arr.dtype, np.integer):
            if not np.all(arr == np.floor(arr)):
                raise DomainError("labels must be integers")
        arr = arr.astype(np.int64)
        if self.n_clusters < 1:
            raise DomainError(f"n_clusters must be >= 1, got {self.n_clusters}")
        if arr.min() < 0 or arr.max() >= self.n_clusters:
            bad = int(np.flatnonzero((arr < 0) | (arr >= self.n_clusters))[0])
            raise DomainError(
                f"label {arr[bad]} at position {bad} outside [0, {self.n_clusters})"
            )
        arr.flags.writeable = False
        object.__setattr__(self, "labels", arr)

    @property
    def n(self):
        return int(self.labels.size)

    @property
    def sizes(self):
        return np.bincount(self.labels, minlength=self.n_clusters)

    @property
    def empty_clusters(self):
        """Cluster ids with no members (they contribute nothing to RA)."""
        return tuple(int(c) for c in np.flatnonzero(self.sizes == 0))


def as_partition(labels, n_clusters=None):
    """Coerce a label array into a Partition; pass Partitions through.

    Without an explicit cluster count the labels are taken at face value
    and the count is max(labels) + 1.
    """
    if isinstance(labels, Partition):
        return labels
    arr = np.asarray(labels)
    if n_clusters is None:
        if arr.size == 0:
            raise ShapeError("labels must be a nonempty 1-D array, got shape (0,)")
        n_clusters = int(np.max(arr)) + 1
    return Partition(arr, n_clusters)


def assign_items(coef, *, zero_to_first=False):
    """Partition the N items by per-column argmax of the K x N coefficients.

    Ties go to the lowest cluster index.  An all-zero column has no
    argmax to speak of; that raises DegenerateFactorError unless
    ``zero_to_first`` maps such items to cluster 0.
    """
    c = as_matrix(coef, "coefficients")
    require_nonnegative(c, "coefficients")
    if not zero_to_first:
        dead = np.flatnonzero(~c.any(axis=0))
        if dead.size:
            raise DegenerateFactorError(
                f"item {dead[0]} has an all-zero coefficient column; "
                "pass zero_to_first=True to map it to cluster 0"
            )
    return Partition(np.argmax(c, axis=0), c.shape[0])


def assign_features(basis, *, zero_to_first=False):
    """Partition the M features by per-row argmax of the M x K basis."""
    b = as_matrix(basis, "basis")
    require_nonnegative(b, "basis")
    if not zero_to_first:
        dead = np.flatnonzero(~b.any(axis=1))
        if dead.size:
            raise DegenerateFactorError(
                f"feature {dead[0]} has an all-zero basis row; "
                "pass zero_to_first=True to map it to cluster 0"
            )
    return Partition(np.argmax(b, axis=1), b.shape[1])


def ratio_association(affinity, partition):
    """RA = sum over nonempty clusters of (within-cluster weight)/(size).

    Equals tr(X W X^T) for the size-normalized indicator X whose row k is
    the indicator of cluster k divided by sqrt(|cluster k|).
    """
    w = weights_array(affinity)
    partition = as_partition(partition)
    if w.shape[0] != partition.n:
        raise ShapeError(
            f"affinity is {w.shape[0]}x{w.shape[0]} but partition has "
            f"{partition.n} elements"
        )
    total = 0.0
    for c in range(partition.n_clusters):
        idx = np.flatnonzero(partition.labels == c)
        if idx.size:
            total += float(w[np.ix_(idx, idx)].sum()) / idx.size
    return total


def brute_force_ratio_assoc(affinity, n_clusters):
    """Exact RA maximizer over all partitions into at most n_clusters groups.

    Enumerates canonical labelings (restricted growth strings) so label
    permutations are visited once; among maximizers the lexicographically
    smallest labeling wins.  Capped at n <= 12 elements.
    """
    w = weights_array(affinity)
    n = w.shape[0]
    if n > BRUTE_FORCE_MAX_N:
        raise SizeLimitError(
            f"brute force enumeration is capped at n <= {BRUTE_FORCE_MAX_N}, got {n}"
        )
    if n_clusters < 1:
        raise DomainError(f"n_clusters must be >= 1, got {n_clusters}")

    labels = np.zeros(n, dtype=np.int64)
    members = [[] for _ in range(n_clusters)]
    sums = np.zeros(n_clusters)
    sizes = np.zeros(n_clusters, dtype=np.int64)
    best_value = -np.inf
    best_labels = None

    def visit(i, used):
        nonlocal best_value, best_labels
        if i == n:
            value = 0.0
            for c in range(used):
                value += sums[c] / sizes[c]
            if value > best_value:
                best_value = value
                best_labels = labels.copy()
            return
        for c in range(min(used + 1, n_clusters)):
            grown = w[i, i] + 2.0 * sum(w[i, j] for j in members[c])
            kept = sums[c]
            sums[c] = kept + grown
            sizes[c] += 1
            members[c].append(i)
            labels[i] = c
            visit(i + 1, max(used, c + 1))
            members[c].pop()
            sizes[c] -= 1
            sums[c] = kept

    visit(0, 0)
    best = Partition(best_labels, n_clusters)
    # report the value through the same code path callers use for scoring
    return best, ratio_association(w, best)


def orthogonality_deviation(factor, axis="columns"):
    """Off-diagonal Gram energy of a factor, raw and normalized.

    Raw j2 is the sum of squared inner products over distinct pairs of
    columns (axis="columns") or rows (axis="rows"); it is zero exactly
    when the vectors are mutually orthogonal.  The normalized variant is
    the mean squared cosine over distinct pairs, a scale-free number in
    [0, 1]; it needs every vector nonzero and raises
    DegenerateFactorError naming the first zero vector otherwise.
    Returns (raw, normalized).
    """
    f = as_matrix(factor, "factor")
    require_nonnegative(f, "factor")
    if axis == "columns":
        gram = f.T @ f
    elif axis == "rows":
        gram = f @ f.T
    else:
        raise DomainError(f"axis must be 'columns' or 'rows', got {axis!r}")
    diag = np.diagonal(gram).copy()
    off = gram.copy()
    np.fill_diagonal(off, 0.0)
    raw = float(np.vdot(off, off))
    p = gram.shape[0]
    if p == 1:
        return 0.0, 0.0
    dead = np.flatnonzero(diag == 0.0)
    if dead.size:
        raise DegenerateFactorError(
            f"{axis[:-1]} {dead[0]} of the factor is identically zero; "
            "normalized deviation is undefined"
        )
    cos2 = gram * gram / np.outer(diag, diag)
    normalized = float((cos2.sum() - p) / (p * (p - 1)))
    return raw, normalized


def _confusion(pred, truth):
    if pred.n != truth.n:
        raise ShapeError(
            f"partitions disagree on length: {pred.n} vs {truth.n}"
        )
    table = np.zeros((pred.n_clusters, truth.n_clusters))
    np.add.at(table, (pred.labels, truth.labels), 1.0)
    return table


def cluster_accuracy(pred, truth):
    """Fraction of elements explained by the best one-to-one cluster matching.

    Maximum-weight matching on the confusion table (Hungarian assignment),
    so the score is invariant to label permutations of either side and
    symmetric in its arguments.  1.0 means identical up to relabeling.
    """
    pred = as_partition(pred)
    truth = as_partition(truth)
    if pred.n_clusters > MATCHING_MAX_K or truth.n_clusters > MATCHING_MAX_K:
        raise SizeLimitError(
            f"matching is capped at {MATCHING_MAX_K} clusters, got "
            f"{pred.n_clusters} and {truth.n_clusters}"
        )
    table = _confusion(pred, truth)
    rows, cols = linear_sum_assignment(table, maximize=True)
    return float(table[rows, cols].sum()) / pred.n


def nmi(pred, truth):
    """Normalized mutual information with arithmetic-mean normalization.

    2*I(pred; truth) / (H(pred) + H(truth)), in [0, 1].  Two one-cluster
    partitions are identical, so the degenerate 0/0 case maps to 1.0;
    one trivial partition against a non-trivial one gives 0.
    """
    pred = as_partition(pred)
    truth = as_partition(truth)
    table = _confusion(pred, truth)
    n = pred.n
    joint = table / n
    pi = joint.sum(axis=1)
    pj = joint.sum(axis=0)
    nz = joint > 0.0
    outer = np.outer(pi, pj)
    info = float(np.sum(joint[nz] * np.log(joint[nz] / outer[nz])))
    hp = float(-np.sum(pi[pi > 0.0] * np.log(pi[pi > 0.0])))
    ht = float(-np.sum(pj[pj > 0.0] * np.log(pj[pj > 0.0])))
    if hp + ht == 0.0:
        return 1.0
    value = 2.0 * info / (hp + ht)
    # clamp arithmetic slop at the boundaries
    return float(min(1.0, max(0.0, value)))
