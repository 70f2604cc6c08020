"""Gaussian embedding of a power summary: mean, ridged covariance, factor."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any

import numpy as np
from scipy.linalg import solve_triangular

from .exceptions import EmbeddingError
from .graph import Graph
from .summary import DEFAULT_K, PowerSummary, power_summary

DEFAULT_RIDGE = 1e-6


def _cholesky(sigma: np.ndarray) -> np.ndarray:
    try:
        L = np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError as exc:
        raise EmbeddingError(
            "covariance is not positive definite; increase the ridge"
        ) from exc
    if not np.all(np.diag(L) > 0):
        raise EmbeddingError("covariance factor has a non-positive pivot; increase the ridge")
    return L


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class GaussianEmbedding:
    """Normal density ``N(mu, sigma)`` fitted to the rows of a power summary.

    ``sigma`` already includes ``ridge * I``. The lower Cholesky factor,
    log-determinant and ``sigma^{-1} mu`` are cached at construction.
    """

    mu: np.ndarray
    sigma: np.ndarray
    ridge: float = 0.0

    def __post_init__(self):
        mu = np.array(self.mu, dtype=np.float64).reshape(-1)
        sigma = np.array(self.sigma, dtype=np.float64)
        k = len(mu)
        if sigma.shape != (k, k):
            raise ValueError(f"sigma has shape {sigma.shape}, expected ({k}, {k})")
        if self.ridge < 0:
            raise ValueError("ridge must be non-negative")
        L = _cholesky(sigma)
        object.__setattr__(self, "mu", _freeze(mu))
        object.__setattr__(self, "sigma", _freeze(sigma))
        object.__setattr__(self, "ridge", float(self.ridge))
        object.__setattr__(self, "chol", _freeze(L))
        object.__setattr__(self, "log_det", float(2.0 * np.log(np.diag(L)).sum()))
        y = solve_triangular(L, mu, lower=True)
        object.__setattr__(self, "precision_mu", _freeze(solve_triangular(L.T, y, lower=False)))

    @property
    def k(self) -> int:
        return len(self.mu)

    def logpdf(self, x: np.ndarray) -> np.ndarray:
        """Log density at the rows of ``x`` (shape ``(..., k)``)."""
        x = np.asarray(x, dtype=np.float64)
        d = (x - self.mu).reshape(-1, self.k)
        z = solve_triangular(self.chol, d.T, lower=True)
        quad = np.einsum("ij,ij->j", z, z)
        out = -0.5 * (quad + self.log_det + self.k * np.log(2 * np.pi))
        return out.reshape(x.shape[:-1])

    def to_dict(self) -> dict[str, Any]:
        return {
            "k": self.k,
            "ridge": self.ridge,
            "mu": [float(v) for v in self.mu],
            "sigma": [[float(v) for v in row] for row in self.sigma],
        }

    @classmethod
    def from_dict(cls, record: dict[str, Any]) -> "GaussianEmbedding":
        emb = cls(np.asarray(record["mu"], dtype=np.float64), np.asarray(record["sigma"], dtype=np.float64), record["ridge"])
        if emb.k != record["k"]:
            raise ValueError(f"record declares k={record['k']} but mu has length {emb.k}")
        return emb

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "GaussianEmbedding":
        return cls.from_dict(json.loads(text))


def embed(s: PowerSummary, ridge: float = DEFAULT_RIDGE) -> GaussianEmbedding:
    """Fit mean and population (1/n) covariance to the node rows of ``s``."""
    if ridge < 0:
        raise ValueError(f"ridge must be non-negative, got {ridge}")
    S = s.data
    mu = S.mean(axis=0)
    centered = S - mu
    sigma = centered.T @ centered / s.n
    sigma = 0.5 * (sigma + sigma.T)
    sigma[np.diag_indices_from(sigma)] += ridge
    return GaussianEmbedding(mu, sigma, ridge)


def embed_graph(g: Graph, k: int = DEFAULT_K, ridge: float = DEFAULT_RIDGE) -> GaussianEmbedding:
    return embed(power_summary(g, k), ridge)
