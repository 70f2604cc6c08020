import json

import numpy as np
import pytest
from hypothesis import given, settings

from powerkernel.embedding import GaussianEmbedding, embed, embed_graph
from powerkernel.exceptions import EmbeddingError
from powerkernel.graph import Graph, apply_permutation, erdos_renyi
from powerkernel.summary import power_summary

from .conftest import graphs, graphs_with_permutation, path3, triangle


def test_path_raw_covariance_is_singular():
    S = power_summary(path3(), 2)
    with pytest.raises(EmbeddingError, match="ridge"):
        embed(S, ridge=0.0)
    # the raw moments themselves, computed by hand
    np.testing.assert_allclose(S.data.mean(axis=0), [4 / 9, 1 / 2], atol=1e-15)
    np.testing.assert_allclose(np.cov(S.data.T, bias=True), [[2 / 81, 0], [0, 0]], atol=1e-15)


def test_path_with_ridge():
    e = embed(power_summary(path3(), 2), ridge=1e-6)
    np.testing.assert_allclose(e.mu, [4 / 9, 1 / 2], atol=1e-15)
    np.testing.assert_allclose(e.sigma, [[2 / 81 + 1e-6, 0], [0, 1e-6]], rtol=1e-12, atol=1e-18)
    assert np.all(np.diag(e.chol) > 0)


def test_triangle_regular_degeneracy():
    e = embed(power_summary(triangle(), 2), ridge=1e-6)
    np.testing.assert_allclose(e.mu, [2 / 3, 2 / 3], atol=1e-15)
    np.testing.assert_allclose(e.sigma, 1e-6 * np.eye(2), rtol=1e-12, atol=1e-20)


def test_single_node_graph_needs_ridge():
    s = power_summary(Graph.from_edges(1, []), 3)
    with pytest.raises(EmbeddingError):
        embed(s, 0.0)
    e = embed(s, 1e-6)
    np.testing.assert_array_equal(e.mu, np.zeros(3))


def test_negative_ridge():
    with pytest.raises(ValueError):
        embed(power_summary(path3(), 2), -1.0)


def test_cached_quantities():
    e = embed_graph(erdos_renyi(30, 0.2, np.random.default_rng(0)), 5)
    np.testing.assert_allclose(e.chol @ e.chol.T, e.sigma, rtol=1e-12, atol=1e-18)
    assert e.log_det == pytest.approx(2 * np.log(np.diag(e.chol)).sum(), rel=0, abs=0)
    sign, logdet = np.linalg.slogdet(e.sigma)
    assert sign == 1 and e.log_det == pytest.approx(logdet, rel=1e-10)
    np.testing.assert_allclose(e.sigma @ e.precision_mu, e.mu, rtol=1e-8)


@settings(max_examples=100, deadline=None)
@given(graphs(min_n=2, max_n=30))
def test_moments_match_numpy(g):
    S = power_summary(g, 5).data
    e = embed(power_summary(g, 5), 1e-6)
    np.testing.assert_allclose(e.mu, S.mean(axis=0), rtol=1e-13, atol=1e-16)
    raw = e.sigma - 1e-6 * np.eye(5)
    np.testing.assert_allclose(raw, np.cov(S.T, bias=True), rtol=1e-9, atol=1e-15)
    assert np.abs(e.sigma - e.sigma.T).max() <= 1e-12
    # raw covariance is PSD up to round-off
    assert np.linalg.eigvalsh(raw).min() >= -1e-10 * np.trace(e.sigma)
    # first mean component is the mean normalised degree 2E/n^2
    assert e.mu[0] == pytest.approx(2 * g.edge_count / g.n**2, rel=1e-12, abs=1e-15)


@settings(max_examples=100, deadline=None)
@given(graphs_with_permutation(min_n=1, max_n=30))
def test_permutation_invariance(gp):
    g, p = gp
    a = embed_graph(g, 5)
    b = embed_graph(apply_permutation(g, p), 5)
    assert np.abs(a.mu - b.mu).max() <= 1e-9
    assert np.abs(a.sigma - b.sigma).max() <= 1e-9


def test_deterministic():
    g = erdos_renyi(40, 0.1, np.random.default_rng(11))
    a, b = embed_graph(g), embed_graph(g)
    assert np.array_equal(a.mu, b.mu) and np.array_equal(a.sigma, b.sigma)


def test_json_roundtrip_bit_exact():
    e = embed_graph(erdos_renyi(25, 0.25, np.random.default_rng(4)), 5)
    back = GaussianEmbedding.from_json(e.to_json())
    assert np.array_equal(back.mu, e.mu)
    assert np.array_equal(back.sigma, e.sigma)
    assert back.ridge == e.ridge and back.k == 5
    assert back.log_det == e.log_det
    rec = json.loads(e.to_json())
    assert set(rec) == {"k", "ridge", "mu", "sigma"}


def test_json_k_mismatch():
    rec = embed_graph(path3(), 2).to_dict()
    rec["k"] = 3
    with pytest.raises(ValueError):
        GaussianEmbedding.from_dict(rec)


def test_logpdf_matches_scipy():
    from scipy.stats import multivariate_normal

    e = embed_graph(erdos_renyi(20, 0.3, np.random.default_rng(8)), 3)
    x = np.random.default_rng(0).normal(size=(7, 3)) * 0.05 + e.mu
    np.testing.assert_allclose(e.logpdf(x), multivariate_normal(e.mu, e.sigma).logpdf(x), rtol=1e-10)
