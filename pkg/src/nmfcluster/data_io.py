"""File formats and synthetic dataset generators.

Formats kept deliberately small:

* MatrixMarket dense real matrices, ``coordinate`` (written when density
  < 0.5) or ``array`` (column-major values) layout, 1-based indices,
  ``%`` comment lines.  Values render with 17 significant digits so a
  write/read round trip reproduces every float64 exactly.
* CSV matrices: comma-separated decimals, no header.
* Label files: one integer per line; on read the labels are re-indexed
  to a dense [0, K) range in order of first appearance.

Generators plant known cluster structure (block-diagonal matrices, topic
mixtures, undirected and directed partition graphs) and are
bit-deterministic per (spec, seed) via the PCG64 generator numpy names
``default_rng``.
"""

from dataclasses import dataclass

import numpy as np

from .affinity import AffinityMatrix
from .core import as_matrix
from .errors import ParseError, SpecError
from .metrics import Partition

__all__ = [
    "SyntheticSpec",
    "read_matrix_market",
    "write_matrix_market",
    "read_csv_matrix",
    "write_csv_matrix",
    "read_labels",
    "write_labels",
    "gen_block_diagonal",
    "gen_mixture_docs",
    "gen_planted_graph",
    "generate",
]

KINDS = ("block-diagonal", "mixture-docs", "planted-graph", "directed-planted-graph")
GRAPH_KINDS = ("planted-graph", "directed-planted-graph")


@dataclass(frozen=True)
class SyntheticSpec:
    """Parameters of one synthetic dataset.

    ``m`` is the feature count and ``n`` the item count; graph kinds use
    ``n`` as the vertex count and ignore ``m``.  ``overlap`` only matters
    for mixture-docs (weight of the non-dominant topics); ``noise`` is the
    off-block level for block/graph kinds and the additive noise scale
    for mixtures.
    """

    kind: str
    n: int
    k: int
    m: int = 0
    noise: float = 0.0
    overlap: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SpecError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.n < 1:
            raise SpecError(f"n must be >= 1, got {self.n}")
        if self.kind in GRAPH_KINDS:
            if not 1 <= self.k <= self.n:
                raise SpecError(
                    f"k must be in [1, {self.n}] for {self.kind}, got {self.k}"
                )
        else:
            if self.m < 1:
                raise SpecError(f"m must be >= 1, got {self.m}")
            if not 1 <= self.k <= min(self.m, self.n):
                raise SpecError(
                    f"k must be in [1, min(m, n)] = [1, {min(self.m, self.n)}], "
                    f"got {self.k}"
                )
        if not 0.0 <= self.noise < 1.0:
            raise SpecError(f"noise must be in [0, 1), got {self.noise}")
        if self.overlap < 0.0:
            raise SpecError(f"overlap must be >= 0, got {self.overlap}")
        if self.kind == "mixture-docs" and not self.overlap < 1.0:
            raise SpecError(
                f"overlap must be < 1 for mixture-docs (the dominant topic "
                f"keeps weight 1-overlap), got {self.overlap}"
            )
        if self.seed < 0:
            raise SpecError(f"seed must be >= 0, got {self.seed}")

    def as_dict(self):
        return {
            "kind": self.kind,
            "m": self.m,
            "n": self.n,
            "k": self.k,
            "noise": self.noise,
            "overlap": self.overlap,
            "seed": self.seed,
        }


# ---------------------------------------------------------------------------
# MatrixMarket

_MM_COORD = ("matrix", "coordinate", "real", "general")
_MM_ARRAY = ("matrix", "array", "real", "general")


def write_matrix_market(path, matrix):
    """Write a dense matrix, picking coordinate layout below 0.5 density."""
    a = as_matrix(matrix, "matrix")
    rows, cols = a.shape
    nnz = int(np.count_nonzero(a))
    lines = []
    if nnz / a.size < 0.5:
        lines.append("%%MatrixMarket matrix coordinate real general")
        lines.append(f"{rows} {cols} {nnz}")
        for i in range(rows):
            for j in range(cols):
                if a[i, j] != 0.0:
                    lines.append(f"{i + 1} {j + 1} {a[i, j]:.17g}")
    else:
        lines.append("%%MatrixMarket matrix array real general")
        lines.append(f"{rows} {cols}")
        for j in range(cols):
            for i in range(rows):
                lines.append(f"{a[i, j]:.17g}")
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def _parse_floats(parts, lineno, path):
    try:
        return [float(p) for p in parts]
    except ValueError:
        raise ParseError(f"{path}:{lineno}: expected numeric values, got {parts!r}") from None


def read_matrix_market(path):
    """Read a real general MatrixMarket file (coordinate or array layout)."""
    with open(path, "r", encoding="ascii") as fh:
        raw = fh.read().splitlines()
    if not raw:
        raise ParseError(f"{path}:1: empty file")
    header = raw[0].split()
    if len(header) != 5 or header[0] != "%%MatrixMarket":
        raise ParseError(f"{path}:1: malformed MatrixMarket header {raw[0]!r}")
    layout = tuple(tok.lower() for tok in header[1:])
    if layout not in (_MM_COORD, _MM_ARRAY):
        raise ParseError(
            f"{path}:1: unsupported format {' '.join(header[1:])!r}; only "
            "'matrix coordinate real general' and 'matrix array real general' "
            "are understood"
        )
    coordinate = layout == _MM_COORD

    body = [
        (lineno, line)
        for lineno, line in enumerate(raw[1:], start=2)
        if line.strip() and not line.lstrip().startswith("%")
    ]
    if not body:
        raise ParseError(f"{path}: missing size line")

    lineno, size_line = body[0]
    parts = size_line.split()
    expected = 3 if coordinate else 2
    if len(parts) != expected:
        raise ParseError(
            f"{path}:{lineno}: size line needs {expected} integers, got {size_line!r}"
        )
    try:
        dims = [int(p) for p in parts]
    except ValueError:
        raise ParseError(f"{path}:{lineno}: size line must be integers, got {size_line!r}") from None
    if dims[0] < 1 or dims[1] < 1 or (coordinate and dims[2] < 0):
        raise ParseError(f"{path}:{lineno}: non-positive dimensions in {size_line!r}")
    rows, cols = dims[0], dims[1]
    out = np.zeros((rows, cols))

    if coordinate:
        nnz = dims[2]
        entries = body[1:]
        if len(entries) != nnz:
            raise ParseError(
                f"{path}: header promises {nnz} entries, file has {len(entries)}"
            )
        for lineno, line in entries:
            parts = line.split()
            if len(parts) != 3:
                raise ParseError(f"{path}:{lineno}: entry needs 'i j value', got {line!r}")
            try:
                i, j = int(parts[0]), int(parts[1])
            except ValueError:
                raise ParseError(f"{path}:{lineno}: indices must be integers, got {line!r}") from None
            value = _parse_floats(parts[2:], lineno, path)[0]
            if not 1 <= i <= rows or not 1 <= j <= cols:
                raise ParseError(
                    f"{path}:{lineno}: index ({i}, {j}) outside 1-based bounds "
                    f"({rows}, {cols})"
                )
            out[i - 1, j - 1] = value
    else:
        values = []
        for lineno, line in body[1:]:
            values.extend(_parse_floats(line.split(), lineno, path))
        if len(values) != rows * cols:
            raise ParseError(
                f"{path}: array layout needs {rows * cols} values, file has "
                f"{len(values)}"
            )
        out = np.asarray(values).reshape((cols, rows)).T.copy()
    return out


# ---------------------------------------------------------------------------
# CSV matrices and label files

def read_csv_matrix(path):
    """Rectangular numeric CSV, no header row."""
    rows = []
    width = None
    with open(path, "r", encoding="ascii") as fh:
        for ridx, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if width is None:
                width = len(parts)
            elif len(parts) != width:
                raise ParseError(
                    f"{path}: ragged row {ridx}: expected {width} values, got "
                    f"{len(parts)}"
                )
            try:
                rows.append([float(p) for p in parts])
            except ValueError:
                raise ParseError(f"{path}: non-numeric value in row {ridx}") from None
    if not rows:
        raise ParseError(f"{path}: no data rows")
    return np.asarray(rows)


def write_csv_matrix(path, matrix):
    a = as_matrix(matrix, "matrix")
    with open(path, "w", encoding="ascii") as fh:
        for row in a:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def read_labels(path):
    """One integer per line, re-indexed densely by first appearance."""
    raw = []
    with open(path, "r", encoding="ascii") as fh:
        for ridx, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                raw.append(int(line))
            except ValueError:
                raise ParseError(
                    f"{path}: non-integer label {line!r} at line {ridx}"
                ) from None
    if not raw:
        raise ParseError(f"{path}: no labels")
    remap = {}
    dense = []
    for value in raw:
        if value not in remap:
            remap[value] = len(remap)
        dense.append(remap[value])
    return Partition(np.asarray(dense), len(remap))


def write_labels(path, partition):
    with open(path, "w", encoding="ascii") as fh:
        for value in partition.labels:
            fh.write(f"{int(value)}\n")


# ---------------------------------------------------------------------------
# Generators

def _split_sizes(total, k):
    # as equal as possible, earlier groups take the remainder
    base, rem = divmod(total, k)
    return [base + (1 if i < rem else 0) for i in range(k)]


def _contiguous_labels(total, k):
    return np.repeat(np.arange(k), _split_sizes(total, k))


def gen_block_diagonal(spec):
    """Planted co-clusters: K aligned feature/item blocks.

    In-block entries are uniform [0.5, 1], everything else uniform
    [0, noise].  Returns (matrix, item partition, feature partition).
    """
    if spec.kind != "block-diagonal":
        raise SpecError(f"expected kind block-diagonal, got {spec.kind!r}")
    rng = np.random.default_rng(spec.seed)
    feature_labels = _contiguous_labels(spec.m, spec.k)
    item_labels = _contiguous_labels(spec.n, spec.k)
    a = rng.uniform(0.0, spec.noise, size=(spec.m, spec.n))
    for block in range(spec.k):
        rows = feature_labels == block
        cols = item_labels == block
        a[np.ix_(rows, cols)] = rng.uniform(0.5, 1.0, size=(rows.sum(), cols.sum()))
    return a, Partition(item_labels, spec.k), Partition(feature_labels, spec.k)


def gen_mixture_docs(spec):
    """Topic mixtures: K topic vectors on disjoint feature blocks.

    Item n with planted topic z gets column (1-overlap)*t_z plus
    overlap/(K-1) of every other topic, then noise * a Poisson(1) draw
    per entry.  Returns (matrix, item partition).
    """
    if spec.kind != "mixture-docs":
        raise SpecError(f"expected kind mixture-docs, got {spec.kind!r}")
    rng = np.random.default_rng(spec.seed)
    feature_labels = _contiguous_labels(spec.m, spec.k)
    item_labels = _contiguous_labels(spec.n, spec.k)
    topics = np.zeros((spec.m, spec.k))
    for block in range(spec.k):
        rows = feature_labels == block
        topics[rows, block] = rng.uniform(0.5, 1.0, size=int(rows.sum()))
    weights = np.full((spec.k, spec.n), 0.0)
    for n in range(spec.n):
        z = item_labels[n]
        if spec.k > 1:
            weights[:, n] = spec.overlap / (spec.k - 1)
        weights[z, n] = 1.0 - spec.overlap
    a = topics @ weights
    if spec.noise > 0.0:
        a = a + spec.noise * rng.poisson(1.0, size=(spec.m, spec.n))
    return a, Partition(item_labels, spec.k)


def gen_planted_graph(spec):
    """Planted-partition graphs over n vertices.

    Within-cluster weights are uniform [0.5, 1], cross-cluster uniform
    [0, noise], diagonal zero.  The undirected kind draws each unordered
    pair once and returns an AffinityMatrix; the directed kind draws
    every ordered pair independently and returns the raw asymmetric
    ndarray (symmetrize it before spectral or NMF use).
    """
    if spec.kind not in GRAPH_KINDS:
        raise SpecError(f"expected a graph kind, got {spec.kind!r}")
    rng = np.random.default_rng(spec.seed)
    n = spec.n
    labels = _contiguous_labels(n, spec.k)
    same = labels[:, None] == labels[None, :]
    inside = rng.uniform(0.5, 1.0, size=(n, n))
    outside = rng.uniform(0.0, spec.noise, size=(n, n))
    weights = np.where(same, inside, outside)
    np.fill_diagonal(weights, 0.0)
    part = Partition(labels, spec.k)
    if spec.kind == "planted-graph":
        w = np.triu(weights, 1)
        return AffinityMatrix(w + w.T, kind="undirected"), part
    return weights, part


def generate(spec):
    """Dispatch on spec.kind.

    Returns (matrix, item partition, feature partition or None); graph
    kinds put the vertex partition in the item slot and, being square,
    reuse it for the features too.
    """
    if spec.kind == "block-diagonal":
        return gen_block_diagonal(spec)
    if spec.kind == "mixture-docs":
        a, items = gen_mixture_docs(spec)
        return a, items, None
    graph, part = gen_planted_graph(spec)
    matrix = graph.matrix if isinstance(graph, AffinityMatrix) else graph
    return matrix, part, part
