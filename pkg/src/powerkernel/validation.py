"""Input coercion for the estimator API."""

from __future__ import annotations

import numpy as np

from .graph import Graph, GraphDataset


def check_graph(obj) -> Graph:
    """Coerce one graph-like object into a :class:`Graph`.

    Accepts ``Graph``, a square dense or scipy-sparse adjacency matrix, or a
    networkx graph (nodes are re-indexed in iteration order).
    """
    if isinstance(obj, Graph):
        return obj
    if hasattr(obj, "nodes") and hasattr(obj, "edges") and hasattr(obj, "is_directed"):
        if obj.is_directed():
            raise ValueError("directed graphs are not supported")
        index = {node: i for i, node in enumerate(obj.nodes())}
        edges = [(index[u], index[v]) for u, v in obj.edges() if u != v]
        return Graph.from_edges(len(index), edges)
    if hasattr(obj, "tocoo"):
        if obj.shape[0] != obj.shape[1] or (obj != obj.T).nnz:
            raise ValueError("adjacency matrix must be square and symmetric")
        return Graph.from_adjacency(obj)
    if isinstance(obj, (np.ndarray, list)):
        a = np.asarray(obj)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or not np.array_equal(a, a.T):
            raise ValueError("adjacency matrix must be square and symmetric")
        return Graph.from_adjacency(a)
    raise TypeError(f"cannot interpret {type(obj).__name__} as a graph")


def check_graphs(X) -> list[Graph]:
    """Coerce a collection of graph-like objects; empty collections are rejected."""
    if isinstance(X, GraphDataset):
        graphs = list(X.graphs)
    elif isinstance(X, (Graph, np.ndarray)) and not (isinstance(X, np.ndarray) and X.dtype == object):
        raise TypeError("expected a collection of graphs, got a single graph or matrix")
    else:
        graphs = [check_graph(g) for g in X]
    if not graphs:
        raise ValueError("expected at least one graph")
    for i, g in enumerate(graphs):
        if g.n < 1:
            raise ValueError(f"graph {i} has no nodes")
    return graphs
