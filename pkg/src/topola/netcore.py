"""Graph/matrix data model, ingestion and serialization.

Everything is stored densely. Edge lists are whitespace separated ``u v [w]``
lines, ``#`` starts a comment. Dense matrices are header-less CSV.
"""
from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

SYMMETRY_RTOL = 1e-12

# Comment pragma written by save_edge_list so isolated nodes and ordering survive.
_NODE_PRAGMA = "# node\t"


class IngestError(ValueError):
    """Raised when an input file cannot be turned into a valid matrix."""

    def __init__(self, message, path=None, line=None, col=None):
        loc = []
        if path is not None:
            loc.append(str(path))
        if line is not None:
            loc.append(f"line {line}")
        if col is not None:
            loc.append(f"col {col}")
        super().__init__(f"{', '.join(loc)}: {message}" if loc else message)
        self.path = path
        self.line = line
        self.col = col


def is_symmetric(values: np.ndarray, rtol: float = SYMMETRY_RTOL) -> bool:
    values = np.asarray(values)
    if values.ndim != 2 or values.shape[0] != values.shape[1]:
        return False
    scale = np.max(np.abs(values)) if values.size else 0.0
    return bool(np.max(np.abs(values - values.T), initial=0.0) <= rtol * scale)


@dataclass(frozen=True, eq=False)
class AdjacencyMatrix:
    """Dense real n x m network or similarity matrix.

    ``symmetric`` may be passed explicitly (it is then verified) or left as
    ``None`` to be detected. The stored array is read-only.
    """

    values: np.ndarray
    labels_row: tuple | None = None
    labels_col: tuple | None = None
    symmetric: bool | None = None

    def __post_init__(self):
        vals = np.array(self.values, dtype=float, copy=True)
        if vals.ndim == 1:
            vals = vals[None, :]
        if vals.ndim != 2:
            raise ValueError(f"adjacency must be 2-D, got shape {vals.shape}")
        if vals.shape[0] < 1 or vals.shape[1] < 1:
            raise ValueError("adjacency needs at least one row and one column")
        if not np.all(np.isfinite(vals)):
            raise ValueError("adjacency contains NaN or Inf")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

        for name, size in (("labels_row", vals.shape[0]), ("labels_col", vals.shape[1])):
            labels = getattr(self, name)
            if labels is not None:
                labels = tuple(labels)
                if len(labels) != size:
                    raise ValueError(f"{name} has {len(labels)} entries for {size} rows/cols")
                object.__setattr__(self, name, labels)

        detected = is_symmetric(vals)
        if self.symmetric is None:
            object.__setattr__(self, "symmetric", detected)
        elif self.symmetric and not detected:
            raise ValueError("matrix declared symmetric but is not (1e-12 relative)")
        else:
            object.__setattr__(self, "symmetric", bool(self.symmetric))

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.values
        return self.values.astype(dtype)

    def __repr__(self):
        kind = "symmetric" if self.symmetric else "general"
        return f"AdjacencyMatrix({self.rows}x{self.cols}, {kind})"


@dataclass(frozen=True)
class NodeIndex:
    """Bijection between node labels and zero-based indices."""

    labels: tuple
    _lookup: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        labels = tuple(self.labels)
        lookup = {lab: i for i, lab in enumerate(labels)}
        if len(lookup) != len(labels):
            raise ValueError("node labels must be unique")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "_lookup", lookup)

    @classmethod
    def from_size(cls, n: int) -> "NodeIndex":
        return cls(tuple(str(i) for i in range(n)))

    def index(self, label) -> int:
        try:
            return self._lookup[label]
        except KeyError:
            raise KeyError(f"unknown node label {label!r}") from None

    def label(self, i: int):
        return self.labels[i]

    def __len__(self):
        return len(self.labels)

    def __contains__(self, label):
        return label in self._lookup


@dataclass(frozen=True)
class EdgeList:
    edges: tuple  # of (u, v, w)

    def __post_init__(self):
        for u, v, w in self.edges:
            if not np.isfinite(w):
                raise ValueError(f"non-finite weight on edge {u}-{v}")


def as_array(A) -> np.ndarray:
    """Return the float ndarray behind ``A`` (AdjacencyMatrix or array-like)."""
    if isinstance(A, AdjacencyMatrix):
        return A.values
    arr = np.asarray(A, dtype=float)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {arr.shape}")
    return arr


def _parse_float(token, path, lineno, col):
    try:
        val = float(token)
    except ValueError:
        raise IngestError(f"non-numeric value {token!r}", path, lineno, col) from None
    if not np.isfinite(val):
        raise IngestError(f"non-finite value {token!r}", path, lineno, col)
    return val


def parse_edge_lines(lines: Iterable[str], directed=False, weighted=False,
                     sort_labels=False, path=None):
    """Parse edge-list lines into (EdgeList, NodeIndex)."""
    order: dict = {}
    seen: dict = {}
    edges = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n").rstrip("\r")
        if line.startswith(_NODE_PRAGMA):
            label = line[len(_NODE_PRAGMA):]
            if label:
                order.setdefault(label, len(order))
            continue
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        fields = stripped.split()
        if len(fields) not in (2, 3):
            raise IngestError(f"expected 'u v [w]', got {len(fields)} fields", path, lineno)
        u, v = fields[0], fields[1]
        w = 1.0
        if weighted and len(fields) == 3:
            w = _parse_float(fields[2], path, lineno, 3)
        key = (u, v) if directed else tuple(sorted((u, v)))
        if key in seen:
            prev_w, prev_line = seen[key]
            if prev_w != w:
                raise IngestError(
                    f"edge {u}-{v} repeated with weight {w!r} (was {prev_w!r} on line {prev_line})",
                    path, lineno)
            continue
        seen[key] = (w, lineno)
        order.setdefault(u, len(order))
        order.setdefault(v, len(order))
        edges.append((u, v, w))
    if not edges:
        raise IngestError("no edges found", path)
    labels = sorted(order) if sort_labels else list(order)
    return EdgeList(tuple(edges)), NodeIndex(tuple(labels))


def edges_to_matrix(edges: EdgeList, index: NodeIndex, directed=False) -> AdjacencyMatrix:
    n = len(index)
    values = np.zeros((n, n))
    for u, v, w in edges.edges:
        i, j = index.index(u), index.index(v)
        values[i, j] = w
        if not directed:
            values[j, i] = w
    return AdjacencyMatrix(values, index.labels, index.labels, symmetric=None if directed else True)


def load_edge_list(path, directed=False, weighted=False, sort_labels=False):
    """Read an edge-list file into ``(AdjacencyMatrix, NodeIndex)``."""
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        edges, index = parse_edge_lines(fh, directed=directed, weighted=weighted,
                                        sort_labels=sort_labels, path=path)
    return edges_to_matrix(edges, index, directed=directed), index


def load_dense_matrix(path) -> AdjacencyMatrix:
    path = Path(path)
    rows = []
    width = None
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            cells = line.split(",")
            if width is None:
                width = len(cells)
            elif len(cells) != width:
                raise IngestError(f"ragged row: {len(cells)} cells, expected {width}", path, lineno)
            rows.append([_parse_float(c.strip(), path, lineno, col)
                         for col, c in enumerate(cells, start=1)])
    if not rows:
        raise IngestError("empty matrix file", path)
    return AdjacencyMatrix(np.array(rows))


def _atomic_write(path, text: str):
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def format_float(x) -> str:
    # repr of a Python float is the shortest string that round-trips
    return repr(float(x))


def dense_to_csv(A) -> str:
    values = as_array(A)
    return "".join(",".join(format_float(x) for x in row) + "\n" for row in values)


def save_dense_matrix(A, path):
    _atomic_write(path, dense_to_csv(A))


def edge_list_text(A, index: NodeIndex | None = None, directed: bool | None = None) -> str:
    mat = A if isinstance(A, AdjacencyMatrix) else AdjacencyMatrix(A)
    if mat.rows != mat.cols:
        raise ValueError("edge lists need a square matrix")
    if index is None:
        index = NodeIndex(mat.labels_row) if mat.labels_row is not None else NodeIndex.from_size(mat.rows)
    if len(index) != mat.rows:
        raise ValueError("node index size does not match matrix")
    if directed is None:
        directed = not mat.symmetric
    out = [f"{_NODE_PRAGMA}{lab}\n" for lab in index.labels]
    values = mat.values
    for i in range(mat.rows):
        for j in range(mat.cols) if directed else range(i, mat.cols):
            w = values[i, j]
            if w == 0:
                continue
            u, v = index.label(i), index.label(j)
            out.append(f"{u} {v}\n" if w == 1.0 else f"{u} {v} {format_float(w)}\n")
    return "".join(out)


def save_edge_list(A, index: NodeIndex | None, path, directed: bool | None = None):
    """Write ``A`` as an edge list; node pragmas keep isolated nodes and ordering."""
    _atomic_write(path, edge_list_text(A, index, directed))


def load_matrix(path, fmt="auto", **edge_kwargs):
    """Load either format; ``auto`` picks dense CSV for ``.csv`` files."""
    path = Path(path)
    if fmt == "auto":
        fmt = "dense" if path.suffix.lower() == ".csv" else "edges"
    if fmt == "dense":
        mat = load_dense_matrix(path)
        return mat, NodeIndex.from_size(mat.rows)
    if fmt == "edges":
        return load_edge_list(path, **edge_kwargs)
    raise ValueError(f"unknown matrix format {fmt!r}")


def figs9_path() -> Path:
    return Path(__file__).with_name("data") / "figS9.edges"


def figs9_graph(sort_labels=False):
    """Eight-node example network from the n-hop path walkthrough."""
    return load_edge_list(figs9_path(), sort_labels=sort_labels)
