"""scikit-learn compatible transformer producing power-kernel matrices."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .embedding import DEFAULT_RIDGE
from .gram import compute_embeddings, gram_from_embeddings
from .kernel import KernelParams, evaluate
from .summary import DEFAULT_K
from .validation import check_graphs


class PowerKernel(TransformerMixin, BaseEstimator):
    """Map graphs to their kernel values against the training graphs.

    ``fit`` embeds the training graphs; ``transform`` returns the
    ``(n_queries, n_train)`` kernel matrix, so the output plugs straight into
    estimators that take ``kernel="precomputed"``.

    Parameters
    ----------
    k : int, default=5
        Number of power iterations per graph.
    ridge : float, default=1e-6
        Diagonal regulariser added to every covariance.
    variant : {"corrected", "literal"}, default="corrected"
        Closed form used for the Bhattacharyya coefficient.
    normalize : bool, default=False
        Divide by ``sqrt(K(a, a) K(b, b))``. Only meaningful for ``"literal"``.
    n_jobs : int or None
        Worker threads for embedding and pair evaluation.

    Attributes
    ----------
    embeddings_ : list of GaussianEmbedding
        Embeddings of the training graphs.
    n_graphs_fit_ : int
    """

    def __init__(self, k=DEFAULT_K, ridge=DEFAULT_RIDGE, variant="corrected", normalize=False, n_jobs=None):
        self.k = k
        self.ridge = ridge
        self.variant = variant
        self.normalize = normalize
        self.n_jobs = n_jobs

    def _params(self) -> KernelParams:
        return KernelParams(self.k, self.ridge, self.variant)

    def fit(self, X, y=None):
        params = self._params()
        graphs = check_graphs(X)
        self.embeddings_ = compute_embeddings(graphs, params.k, params.ridge, self.n_jobs or 1)
        self.n_graphs_fit_ = len(graphs)
        if self.normalize:
            self._train_diag = np.array([evaluate(e, e, params.variant) for e in self.embeddings_])
        return self

    def transform(self, X):
        check_is_fitted(self, "embeddings_")
        params = self._params()
        queries = compute_embeddings(check_graphs(X), params.k, params.ridge, self.n_jobs or 1)
        K = np.array([[evaluate(q, e, params.variant) for e in self.embeddings_] for q in queries])
        if self.normalize:
            qd = np.array([evaluate(q, q, params.variant) for q in queries])
            K = K / np.sqrt(np.outer(qd, self._train_diag))
        return K

    def fit_transform(self, X, y=None, **fit_params):
        self.fit(X, y)
        return gram_from_embeddings(self.embeddings_, self.variant, self.n_jobs or 1, self.normalize)

    def __sklearn_tags__(self):
        tags = super().__sklearn_tags__()
        tags.input_tags.two_d_array = False
        tags.input_tags.pairwise = False
        return tags
