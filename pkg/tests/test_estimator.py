import networkx as nx
import numpy as np
import pytest
from scipy import sparse
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.model_selection import cross_val_score
from sklearn.pipeline import make_pipeline
from sklearn.svm import SVC

from powerkernel import PowerKernel, compute_gram
from powerkernel.graph import Graph, GraphDataset, erdos_renyi
from powerkernel.kernel import KernelParams
from powerkernel.validation import check_graph, check_graphs

from .conftest import path3, triangle


def two_class_graphs(count=40, seed=0):
    rng = np.random.default_rng(seed)
    graphs, labels = [], []
    for i in range(count):
        p = 0.1 if i % 2 == 0 else 0.35
        graphs.append(erdos_renyi(int(rng.integers(15, 25)), p, rng))
        labels.append(i % 2)
    return graphs, np.array(labels)


def test_params_roundtrip():
    est = PowerKernel(k=4, ridge=1e-5, variant="literal", normalize=True)
    assert est.get_params() == {"k": 4, "ridge": 1e-5, "variant": "literal", "normalize": True, "n_jobs": None}
    c = clone(est)
    assert c.get_params() == est.get_params()
    est.set_params(k=6)
    assert est.k == 6


def test_fit_transform_equals_gram():
    graphs, labels = two_class_graphs(12)
    K = PowerKernel().fit_transform(graphs)
    ref = compute_gram(GraphDataset(tuple(graphs), labels), KernelParams()).values
    assert np.array_equal(K, ref)


def test_transform_shape_and_consistency():
    graphs, _ = two_class_graphs(10)
    est = PowerKernel(k=3).fit(graphs[:6])
    K = est.transform(graphs[6:])
    assert K.shape == (4, 6)
    np.testing.assert_allclose(est.transform(graphs[:6]), est.fit_transform(graphs[:6]), atol=1e-15)
    assert est.n_graphs_fit_ == 6


def test_not_fitted():
    with pytest.raises(NotFittedError):
        PowerKernel().transform([path3()])


def test_pipeline_with_precomputed_svc():
    graphs, labels = two_class_graphs(40)
    pipe = make_pipeline(PowerKernel(), SVC(kernel="precomputed", C=10.0))
    scores = cross_val_score(pipe, np.array(graphs, dtype=object), labels, cv=4)
    assert scores.mean() > 0.8


def test_normalize_literal_diag_one():
    graphs = [Graph.from_edges(4, [(0, 1), (1, 2), (2, 3)]), Graph.from_edges(4, [(0, 1), (0, 2), (0, 3)])]
    K = PowerKernel(k=2, ridge=1.0, variant="literal", normalize=True).fit_transform(graphs)
    np.testing.assert_allclose(np.diag(K), 1.0, rtol=1e-14)
    est = PowerKernel(k=2, ridge=1.0, variant="literal", normalize=True).fit(graphs)
    np.testing.assert_allclose(est.transform(graphs), K, rtol=1e-12)


class TestValidation:
    def test_graph_passthrough(self):
        g = path3()
        assert check_graph(g) is g

    def test_dense_and_sparse_adjacency(self):
        A = triangle().to_dense()
        assert check_graph(A) == triangle()
        assert check_graph(sparse.csr_matrix(A)) == triangle()
        assert check_graph(A.tolist()) == triangle()

    def test_networkx(self):
        G = nx.path_graph(["a", "b", "c"])
        assert check_graph(G) == path3()
        with pytest.raises(ValueError, match="directed"):
            check_graph(nx.DiGraph([(0, 1)]))

    def test_asymmetric_rejected(self):
        with pytest.raises(ValueError, match="symmetric"):
            check_graph(np.array([[0, 1], [0, 0]]))
        with pytest.raises(ValueError, match="symmetric"):
            check_graph(sparse.csr_matrix(np.array([[0, 1], [0, 0]])))

    def test_unknown_type(self):
        with pytest.raises(TypeError):
            check_graph("not a graph")

    def test_collections(self):
        assert len(check_graphs([path3(), triangle().to_dense()])) == 2
        assert len(check_graphs(GraphDataset((path3(),), [0]))) == 1
        with pytest.raises(ValueError):
            check_graphs([])
        with pytest.raises(TypeError):
            check_graphs(path3())
        with pytest.raises(ValueError, match="no nodes"):
            check_graphs([Graph.from_edges(0, [])])
