"""Sparse undirected graphs, loaders, relabelling and edge perturbation.

Graphs are stored in compressed sparse row form: ``indices[indptr[i]:indptr[i+1]]``
holds the strictly increasing neighbour list of node ``i``. Every undirected
edge therefore appears twice in ``indices``.
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Sequence, TextIO, Union

import numpy as np

from .exceptions import DatasetError, GraphFormatError

logger = logging.getLogger(__name__)

PathLike = Union[str, "os.PathLike[str]"]


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable simple undirected graph in CSR form.

    Use :meth:`from_edges` rather than the raw constructor unless the arrays
    are already canonical (symmetric, sorted, loop-free).
    """

    n: int
    indptr: np.ndarray
    indices: np.ndarray

    def __post_init__(self):
        indptr = np.ascontiguousarray(self.indptr, dtype=np.int64)
        indices = np.ascontiguousarray(self.indices, dtype=np.int64)
        if self.n < 0:
            raise GraphFormatError(f"node count must be non-negative, got {self.n}")
        if indptr.shape != (self.n + 1,) or indptr[0] != 0 or indptr[-1] != len(indices):
            raise GraphFormatError("indptr is inconsistent with n and indices")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "indptr", _readonly(indptr))
        object.__setattr__(self, "indices", _readonly(indices))

    @classmethod
    def from_edges(cls, n: int, edges, allow_self_loops: bool = False) -> "Graph":
        """Build a graph from an iterable of ``(i, j)`` pairs.

        Reverse and repeated pairs are merged. Self-loops raise
        :class:`GraphFormatError` unless ``allow_self_loops`` is set, in which
        case they are dropped.
        """
        arr = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges)
        if arr.size == 0:
            arr = np.empty((0, 2), dtype=np.int64)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise GraphFormatError("edges must be a sequence of pairs")
        if not np.issubdtype(arr.dtype, np.integer):
            raise GraphFormatError("edge endpoints must be integers")
        arr = arr.astype(np.int64, copy=False)
        if n < 0:
            raise GraphFormatError(f"node count must be non-negative, got {n}")
        bad = (arr < 0) | (arr >= n)
        if bad.any():
            row = arr[np.nonzero(bad.any(axis=1))[0][0]]
            raise GraphFormatError(f"edge ({row[0]}, {row[1]}) has an index outside [0, {n})")
        loops = arr[:, 0] == arr[:, 1]
        if loops.any():
            if not allow_self_loops:
                raise GraphFormatError(f"self-loop at node {arr[loops][0, 0]}")
            logger.warning("dropped %d self-loop(s)", int(loops.sum()))
            arr = arr[~loops]

        lo = np.minimum(arr[:, 0], arr[:, 1])
        hi = np.maximum(arr[:, 0], arr[:, 1])
        und = np.unique(np.stack([lo, hi], axis=1), axis=0) if len(arr) else arr
        rows = np.concatenate([und[:, 0], und[:, 1]])
        cols = np.concatenate([und[:, 1], und[:, 0]])
        order = np.lexsort((cols, rows))
        rows, cols = rows[order], cols[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(rows, minlength=n), out=indptr[1:])
        return cls(n, indptr, cols)

    @classmethod
    def from_adjacency(cls, adjacency) -> "Graph":
        """Build a graph from a dense or scipy-sparse 0/1 symmetric matrix."""
        if hasattr(adjacency, "tocoo"):
            coo = adjacency.tocoo()
            n = coo.shape[0]
            if coo.shape != (n, n):
                raise GraphFormatError("adjacency matrix must be square")
            mask = coo.data != 0
            edges = np.stack([coo.row[mask], coo.col[mask]], axis=1)
        else:
            a = np.asarray(adjacency)
            if a.ndim != 2 or a.shape[0] != a.shape[1]:
                raise GraphFormatError("adjacency matrix must be square")
            n = a.shape[0]
            edges = np.argwhere(a != 0)
        if len(edges) and (edges[:, 0] == edges[:, 1]).any():
            raise GraphFormatError("adjacency matrix has non-zero diagonal")
        return cls.from_edges(n, edges)

    @cached_property
    def degrees(self) -> np.ndarray:
        return _readonly(np.diff(self.indptr))

    @property
    def edge_count(self) -> int:
        return len(self.indices) // 2

    def neighbors(self, i: int) -> np.ndarray:
        return self.indices[self.indptr[i] : self.indptr[i + 1]]

    def edges(self) -> np.ndarray:
        """Undirected edges as an ``(E, 2)`` array with ``i < j``, sorted."""
        rows = np.repeat(np.arange(self.n, dtype=np.int64), self.degrees)
        keep = rows < self.indices
        return np.stack([rows[keep], self.indices[keep]], axis=1)

    def has_edge(self, i: int, j: int) -> bool:
        nb = self.neighbors(i)
        pos = np.searchsorted(nb, j)
        return bool(pos < len(nb) and nb[pos] == j)

    def to_dense(self) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=np.int64)
        rows = np.repeat(np.arange(self.n), self.degrees)
        a[rows, self.indices] = 1
        return a

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.indptr, other.indptr)
            and np.array_equal(self.indices, other.indices)
        )

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, edge_count={self.edge_count})"


@dataclass(frozen=True, eq=False)
class Permutation:
    """Bijection on ``{0, ..., n-1}``; node ``i`` is relabelled ``map[i]``."""

    map: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.map)
        if m.ndim != 1 or (m.size and not np.issubdtype(m.dtype, np.integer)):
            raise ValueError("permutation must be a 1-d integer array")
        m = m.astype(np.int64)
        if not np.array_equal(np.sort(m), np.arange(len(m))):
            raise ValueError("permutation map is not a bijection on 0..n-1")
        object.__setattr__(self, "map", _readonly(m))

    def __len__(self) -> int:
        return len(self.map)

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(np.arange(n))

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> "Permutation":
        return cls(rng.permutation(n))

    def inverse(self) -> "Permutation":
        inv = np.empty_like(self.map)
        inv[self.map] = np.arange(len(self.map))
        return Permutation(inv)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Permutation):
            return NotImplemented
        return np.array_equal(self.map, other.map)

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True)
class GraphDataset:
    graphs: tuple
    labels: np.ndarray
    name: str = ""

    def __post_init__(self):
        graphs = tuple(self.graphs)
        labels = np.asarray(self.labels, dtype=np.int64).reshape(-1)
        if len(graphs) != len(labels):
            raise DatasetError(f"{len(graphs)} graphs but {len(labels)} labels")
        object.__setattr__(self, "graphs", graphs)
        object.__setattr__(self, "labels", _readonly(labels))

    def __len__(self) -> int:
        return len(self.graphs)

    def __getitem__(self, i) -> Graph:
        return self.graphs[i]

    @property
    def classes(self) -> np.ndarray:
        return np.unique(self.labels)

    def subset(self, idx: Sequence[int]) -> "GraphDataset":
        idx = list(idx)
        return GraphDataset(tuple(self.graphs[i] for i in idx), self.labels[idx], self.name)


def degree_vector(g: Graph) -> np.ndarray:
    """Number of neighbours of every node."""
    return np.array(g.degrees)


def apply_permutation(g: Graph, p: Permutation) -> Graph:
    """Relabel node ``i`` as ``p.map[i]``; the result is ``P A P^T``."""
    if len(p) != g.n:
        raise ValueError(f"permutation of length {len(p)} applied to graph with n={g.n}")
    return Graph.from_edges(g.n, p.map[g.edges()])


def flip_edge(g: Graph, i: int, j: int) -> Graph:
    """Delete edge ``{i, j}`` if present, otherwise add it."""
    if i == j:
        raise ValueError("cannot flip a self-loop")
    edges = g.edges()
    a, b = min(i, j), max(i, j)
    if g.has_edge(a, b):
        edges = edges[~((edges[:, 0] == a) & (edges[:, 1] == b))]
    else:
        edges = np.vstack([edges, [[a, b]]])
    return Graph.from_edges(g.n, edges)


def flip_random_edge(g: Graph, rng: np.random.Generator) -> Graph:
    """Flip the presence of a node pair drawn uniformly from all ``C(n, 2)`` pairs."""
    if g.n < 2:
        raise ValueError(f"need at least 2 nodes to flip an edge, got n={g.n}")
    i, j = rng.choice(g.n, size=2, replace=False)
    return flip_edge(g, int(i), int(j))


def erdos_renyi(n: int, p: float, rng: np.random.Generator) -> Graph:
    """G(n, p) random graph: every unordered pair is an edge with probability ``p``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"edge probability must lie in [0, 1], got {p}")
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(len(iu)) < p
    return Graph.from_edges(n, np.stack([iu[keep], ju[keep]], axis=1))


def random_sparse_graph(n_edges: int, avg_degree: float, rng: np.random.Generator) -> Graph:
    """Graph with roughly ``n_edges`` edges and fixed average degree.

    Endpoints are sampled uniformly, so ``n`` grows linearly with ``n_edges``.
    Self-loops and duplicates are discarded, which loses a small fraction of
    the requested edges.
    """
    if n_edges == 0:
        return Graph.from_edges(max(int(avg_degree) + 1, 2), [])
    n = max(int(round(2 * n_edges / avg_degree)), 2)
    e = rng.integers(0, n, size=(n_edges, 2))
    e = e[e[:, 0] != e[:, 1]]
    return Graph.from_edges(n, e)


# -- loaders ---------------------------------------------------------------


def _open_text(source) -> tuple[TextIO, bool]:
    if isinstance(source, (str, os.PathLike)):
        return open(source, encoding="utf-8"), True
    return source, False


def load_edge_list(source: Union[TextIO, PathLike], allow_self_loops: bool = False) -> Graph:
    """Parse the plain edge-list format.

    The first non-comment line is the header ``n <count>`` (``n=<count>`` is
    accepted too), followed by one ``i j`` pair per line with 0-based
    indices. ``#`` starts a comment.
    """
    fh, close = _open_text(source)
    try:
        n = None
        edges = []
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if n is None:
                parts = line.replace("=", " ").split()
                if len(parts) != 2 or parts[0] != "n":
                    raise GraphFormatError(f"line {lineno}: expected header 'n <count>', got {raw.strip()!r}")
                try:
                    n = int(parts[1])
                except ValueError:
                    raise GraphFormatError(f"line {lineno}: bad node count {parts[1]!r}") from None
                if n < 0:
                    raise GraphFormatError(f"line {lineno}: negative node count")
                continue
            parts = line.replace(",", " ").split()
            if len(parts) != 2:
                raise GraphFormatError(f"line {lineno}: expected 'i j', got {raw.strip()!r}")
            try:
                i, j = int(parts[0]), int(parts[1])
            except ValueError:
                raise GraphFormatError(f"line {lineno}: non-integer node index in {raw.strip()!r}") from None
            if not (0 <= i < n and 0 <= j < n):
                raise GraphFormatError(f"line {lineno}: index out of range [0, {n}) in {raw.strip()!r}")
            if i == j and not allow_self_loops:
                raise GraphFormatError(f"line {lineno}: self-loop at node {i}")
            edges.append((i, j))
    finally:
        if close:
            fh.close()
    if n is None:
        raise GraphFormatError("missing 'n <count>' header")
    return Graph.from_edges(n, edges, allow_self_loops=allow_self_loops)


def dump_edge_list(g: Graph, sink: TextIO) -> None:
    sink.write(f"n {g.n}\n")
    for i, j in g.edges():
        sink.write(f"{i} {j}\n")


def _read_int_column(path: Path) -> np.ndarray:
    with open(path, encoding="utf-8") as fh:
        vals = [int(tok) for tok in (line.strip() for line in fh) if tok]
    return np.asarray(vals, dtype=np.int64)


def load_tu_dataset(directory: PathLike, name: str, allow_self_loops: bool = False) -> GraphDataset:
    """Load a TU-Dortmund style benchmark (``<name>_A.txt`` etc.).

    Node ids in the files are 1-based and global; each graph is re-based to
    0. Node/edge labels and attributes are ignored.
    """
    root = Path(directory)
    if (root / name).is_dir() and not (root / f"{name}_A.txt").exists():
        root = root / name
    paths = {suffix: root / f"{name}_{suffix}.txt" for suffix in ("A", "graph_indicator", "graph_labels")}
    for p in paths.values():
        if not p.exists():
            raise DatasetError(f"missing file {p}")

    indicator = _read_int_column(paths["graph_indicator"])
    labels = _read_int_column(paths["graph_labels"])
    n_graphs = len(labels)
    if len(indicator) and (indicator.min() < 1 or indicator.max() > n_graphs):
        raise DatasetError(f"graph indicator references graph ids outside 1..{n_graphs}")

    pairs = []
    with open(paths["A"], encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line:
                continue
            parts = line.replace(",", " ").split()
            if len(parts) != 2:
                raise DatasetError(f"{paths['A'].name}:{lineno}: expected a node pair, got {line!r}")
            pairs.append((int(parts[0]), int(parts[1])))
    edges = np.asarray(pairs, dtype=np.int64).reshape(-1, 2) - 1
    n_nodes = len(indicator)
    if len(edges) and (edges.min() < 0 or edges.max() >= n_nodes):
        bad = edges[(edges < 0).any(axis=1) | (edges >= n_nodes).any(axis=1)][0] + 1
        raise DatasetError(f"edge ({bad[0]}, {bad[1]}) references a node assigned to no graph")

    gid = indicator - 1
    # nodes of one graph are assumed contiguous in the indicator file
    order = np.argsort(gid, kind="stable")
    if not np.array_equal(order, np.arange(n_nodes)):
        raise DatasetError("graph indicator is not grouped by graph id")
    sizes = np.bincount(gid, minlength=n_graphs)
    offsets = np.concatenate([[0], np.cumsum(sizes)])

    eg = gid[edges[:, 0]] if len(edges) else np.empty(0, dtype=np.int64)
    if len(edges):
        cross = eg != gid[edges[:, 1]]
        if cross.any():
            a, b = edges[cross][0] + 1
            raise DatasetError(f"edge ({a}, {b}) crosses graphs {gid[a - 1] + 1} and {gid[b - 1] + 1}")
    order = np.argsort(eg, kind="stable")
    edges, eg = edges[order], eg[order]
    bounds = np.searchsorted(eg, np.arange(n_graphs + 1))

    graphs = []
    for g in range(n_graphs):
        local = edges[bounds[g] : bounds[g + 1]] - offsets[g]
        try:
            graphs.append(Graph.from_edges(int(sizes[g]), local, allow_self_loops=allow_self_loops))
        except GraphFormatError as exc:
            raise DatasetError(f"graph {g + 1}: {exc}") from exc
    return GraphDataset(tuple(graphs), labels, name)


def synthetic_dataset(n: int, p: float, count: int, seed: int = 0, name: str | None = None) -> GraphDataset:
    """``count`` independent G(n, p) graphs, one child seed per graph, all labelled 0."""
    children = np.random.SeedSequence(seed).spawn(count)
    graphs = tuple(erdos_renyi(n, p, np.random.default_rng(s)) for s in children)
    return GraphDataset(graphs, np.zeros(count, dtype=np.int64), name or f"er_n{n}_p{p}")
