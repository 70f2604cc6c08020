import os
from pathlib import Path

import numpy as np
import pytest
from hypothesis import strategies as st

from powerkernel.graph import Graph, Permutation

DATASET_ROOT = os.environ.get("POWERKERNEL_DATASET_ROOT")


def path3():
    return Graph.from_edges(3, [(0, 1), (1, 2)])


def triangle():
    return Graph.from_edges(3, [(0, 1), (1, 2), (0, 2)])


def star(leaves, center=0):
    others = [i for i in range(leaves + 1) if i != center]
    return Graph.from_edges(leaves + 1, [(center, j) for j in others])


@pytest.fixture
def P3():
    return path3()


@pytest.fixture
def K3():
    return triangle()


@st.composite
def graphs(draw, min_n=1, max_n=12):
    n = draw(st.integers(min_n, max_n))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True, max_size=len(pairs))) if pairs else []
    return Graph.from_edges(n, chosen)


@st.composite
def graphs_with_permutation(draw, min_n=1, max_n=12):
    g = draw(graphs(min_n, max_n))
    perm = draw(st.permutations(list(range(g.n))))
    return g, Permutation(np.asarray(perm, dtype=np.int64))


def mutag_dir():
    if not DATASET_ROOT:
        return None
    root = Path(DATASET_ROOT)
    for cand in (root, root / "MUTAG"):
        if (cand / "MUTAG_A.txt").exists():
            return cand
    return None


requires_mutag = pytest.mark.skipif(mutag_dir() is None, reason="set POWERKERNEL_DATASET_ROOT to a directory with MUTAG")


def write_tu(directory: Path, name: str, edges, indicator, labels, sep=", "):
    directory.mkdir(parents=True, exist_ok=True)
    (directory / f"{name}_A.txt").write_text("".join(f"{a}{sep}{b}\n" for a, b in edges))
    (directory / f"{name}_graph_indicator.txt").write_text("".join(f"{g}\n" for g in indicator))
    (directory / f"{name}_graph_labels.txt").write_text("".join(f"{y}\n" for y in labels))
