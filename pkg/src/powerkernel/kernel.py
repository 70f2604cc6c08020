"""Bhattacharyya kernel between Gaussian graph embeddings.

The default ``"corrected"`` variant is the Bhattacharyya coefficient of two
normal densities. In harmonic-mean form it reads

    K = |S1|^-1/4 |S2|^-1/4 |H|^1/2
        * exp(-1/4 m1' S1^-1 m1 - 1/4 m2' S2^-1 m2 + 1/2 h' H h)

with ``H = ((S1^-1 + S2^-1) / 2)^-1`` and ``h = (S1^-1 m1 + S2^-1 m2) / 2``.
Substituting ``S1^-1 + S2^-1 = S1^-1 (S1 + S2) S2^-1`` collapses the three
quadratic forms into ``-1/4 d' (S1 + S2)^-1 d`` with ``d = m1 - m2`` and the
determinants into ``|S1|^1/4 |S2|^1/4 |(S1 + S2)/2|^-1/2``. That form is what
gets evaluated: it needs one Cholesky factor per pair and avoids subtracting
quadratic forms that are individually of order ``1/ridge``.

``"literal"`` evaluates the arithmetic-mean formula with the
``|S|^{1/4}`` prefactor term by term, for comparison only; its value on
identical inputs is generally not 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import log_ndtr

from .embedding import DEFAULT_RIDGE, GaussianEmbedding
from .exceptions import KernelError
from .summary import DEFAULT_K

Variant = Literal["corrected", "literal"]
VARIANTS = ("corrected", "literal")


@dataclass(frozen=True)
class KernelParams:
    k: int = DEFAULT_K
    ridge: float = DEFAULT_RIDGE
    variant: Variant = "corrected"

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ValueError(f"k must be a positive integer, got {self.k}")
        if not self.ridge >= 0:
            raise ValueError(f"ridge must be non-negative, got {self.ridge}")
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")

    def to_dict(self) -> dict:
        return {"k": int(self.k), "ridge": float(self.ridge), "variant": self.variant}


def _check_pair(e1: GaussianEmbedding, e2: GaussianEmbedding) -> None:
    if e1.k != e2.k:
        raise KernelError(f"dimension mismatch: k={e1.k} vs k={e2.k}")


def _chol(m: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.cholesky(m)
    except np.linalg.LinAlgError as exc:
        raise KernelError(f"pooled covariance is not positive definite (cond={np.linalg.cond(m):.3g})") from exc


def _finite(value: float, what: str, pooled: np.ndarray) -> float:
    if not math.isfinite(value):
        raise KernelError(f"non-finite {what} ({value}); pooled covariance condition number {np.linalg.cond(pooled):.3g}")
    return value


def log_kernel(e1: GaussianEmbedding, e2: GaussianEmbedding) -> float:
    """Natural log of the Bhattacharyya coefficient between two embeddings."""
    _check_pair(e1, e2)
    pooled = e1.sigma + e2.sigma
    L = _chol(pooled)
    logdet_pooled = 2.0 * np.log(np.diag(L)).sum()
    z = solve_triangular(L, e1.mu - e2.mu, lower=True)
    value = (
        0.25 * (e1.log_det + e2.log_det)
        + 0.5 * e1.k * math.log(2.0)
        - 0.5 * logdet_pooled
        - 0.25 * float(z @ z)
    )
    return _finite(float(value), "log kernel", pooled)


def kernel(e1: GaussianEmbedding, e2: GaussianEmbedding) -> float:
    """Bhattacharyya coefficient ``integral sqrt(psi1 * psi2)`` in closed form.

    The result lies in ``[0, 1]``; it is exactly positive mathematically but
    can underflow to ``0.0`` for very dissimilar embeddings (log kernel
    below about -745). Use :func:`log_kernel` when that matters.
    """
    return math.exp(log_kernel(e1, e2))


def log_kernel_literal_eq5(e1: GaussianEmbedding, e2: GaussianEmbedding) -> float:
    """Log of the arithmetic-mean variant, evaluated term by term."""
    _check_pair(e1, e2)
    mean_sigma = 0.5 * (e1.sigma + e2.sigma)
    L = _chol(mean_sigma)
    logdet_mean = 2.0 * np.log(np.diag(L)).sum()
    t1 = -0.25 * float(e1.mu @ e1.precision_mu)
    t2 = -0.25 * float(e2.mu @ e2.precision_mu)
    m = 0.5 * (e1.precision_mu + e2.precision_mu)
    y = solve_triangular(L, m, lower=True)
    t3 = 0.5 * float(y @ y)
    value = 0.25 * (logdet_mean - (e1.log_det + e2.log_det)) + ((t1 + t2) + t3)
    return _finite(float(value), "log kernel", mean_sigma)


def kernel_literal_eq5(e1: GaussianEmbedding, e2: GaussianEmbedding) -> float:
    """Arithmetic-mean variant; raises :class:`KernelError` if it overflows."""
    value = log_kernel_literal_eq5(e1, e2)
    out = math.exp(value) if value < 709.0 else math.inf
    if not math.isfinite(out):
        raise KernelError(f"literal kernel overflows: log value {value:.6g}")
    return out


def evaluate(e1: GaussianEmbedding, e2: GaussianEmbedding, variant: Variant = "corrected") -> float:
    if variant == "corrected":
        return kernel(e1, e2)
    if variant == "literal":
        return kernel_literal_eq5(e1, e2)
    raise ValueError(f"unknown variant {variant!r}")


# -- numerical oracle ------------------------------------------------------


@dataclass(frozen=True)
class OracleResult:
    """Estimate of the overlap integral with an absolute error bound.

    ``log_estimate``/``log_error`` carry the same information in log space,
    which stays meaningful when the estimate underflows.
    """

    estimate: float
    error: float
    log_estimate: float
    log_error: float

    def __iter__(self):
        yield self.estimate
        yield self.error

    def contains(self, value: float) -> bool:
        return abs(value - self.estimate) <= self.error


def _trapezoid_nd(values: np.ndarray, h: float) -> float:
    v = values
    for _ in range(values.ndim):
        w = np.full(v.shape[0], h)
        w[0] = w[-1] = 0.5 * h
        v = np.tensordot(w, v, axes=([0], [0]))
    return float(v)


def _grid(e1, e2, points_per_dim: int, radius: float) -> OracleResult:
    k = e1.k
    if k > 3:
        raise ValueError(f"grid oracle supports k <= 3, got k={k}")
    if points_per_dim < 5 or points_per_dim % 2 == 0:
        raise ValueError("points_per_dim must be an odd integer >= 5")
    center = 0.5 * (e1.mu + e2.mu)
    spread = 0.5 * (e1.sigma + e2.sigma)
    C = np.linalg.cholesky(spread)
    log_jac = float(np.log(np.diag(C)).sum())

    axis = np.linspace(-radius, radius, points_per_dim)
    h = axis[1] - axis[0]
    mesh = np.stack(np.meshgrid(*([axis] * k), indexing="ij"), axis=-1)
    x = center + mesh @ C.T
    log_f = 0.5 * (e1.logpdf(x) + e2.logpdf(x)) + log_jac
    shift = float(log_f.max())
    f = np.exp(log_f - shift)
    fine = _trapezoid_nd(f, h)
    coarse = _trapezoid_nd(f[(slice(None, None, 2),) * k], 2 * h)

    # mass of each density outside the box, measured in the whitened frame
    tails = []
    for e in (e1, e2):
        m = solve_triangular(C, e.mu - center, lower=True)
        Ci = solve_triangular(C, np.eye(k), lower=True)
        s = np.sqrt(np.einsum("ij,jk,ik->i", Ci, e.sigma, Ci))
        upper = np.exp(log_ndtr((m - radius) / s))
        lower = np.exp(log_ndtr((-radius - m) / s))
        tails.append(min(1.0, float((upper + lower).sum())))
    tail = math.sqrt(tails[0] * tails[1])
    # fine/coarse are in units of exp(shift); the tail bound is absolute
    rel = abs(fine - coarse) / fine + 1e-13
    scaled_tail = tail * math.exp(min(-shift, 700.0)) / fine
    log_est = shift + math.log(fine)
    estimate = math.exp(log_est) if log_est > -745 else 0.0
    error = estimate * rel + tail
    return OracleResult(estimate, error, log_est, rel + scaled_tail)


def _monte_carlo(e1, e2, samples: int, seed) -> OracleResult:
    rng = np.random.default_rng(seed)
    proposal = GaussianEmbedding(0.5 * (e1.mu + e2.mu), 0.5 * (e1.sigma + e2.sigma))
    x = proposal.mu + rng.standard_normal((samples, e1.k)) @ proposal.chol.T
    log_w = 0.5 * (e1.logpdf(x) + e2.logpdf(x)) - proposal.logpdf(x)
    shift = float(log_w.max())
    w = np.exp(log_w - shift)
    mean = float(w.mean())
    se = float(w.std(ddof=1)) / math.sqrt(samples)
    log_est = shift + math.log(mean)
    rel = 3.0 * se / mean
    return OracleResult(math.exp(log_est), 3.0 * se * math.exp(shift), log_est, rel)


def bhattacharyya_oracle(
    e1: GaussianEmbedding,
    e2: GaussianEmbedding,
    method: Literal["grid", "monte_carlo"] = "grid",
    *,
    points_per_dim: int = 101,
    radius: float = 8.0,
    samples: int = 200_000,
    seed=0,
) -> OracleResult:
    """Numerically integrate ``sqrt(psi1 * psi2)`` without the closed form.

    ``grid`` applies the trapezoid rule on a box of ``+-radius`` standard
    deviations of the averaged covariance (``k <= 3``). The error bound adds
    the fine/coarse grid difference to a Cauchy-Schwarz bound on the mass
    outside the box. ``monte_carlo`` importance-samples from the
    moment-matched normal and reports three standard errors.
    """
    _check_pair(e1, e2)
    if method == "grid":
        return _grid(e1, e2, points_per_dim, radius)
    if method == "monte_carlo":
        return _monte_carlo(e1, e2, samples, seed)
    raise ValueError(f"unknown oracle method {method!r}")
