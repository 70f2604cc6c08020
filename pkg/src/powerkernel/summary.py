"""Power-iteration summary of a graph and exact walk counts."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .graph import Graph

DEFAULT_K = 5
_UINT64_MAX = 2**64 - 1


def _matvec(g: Graph, x: np.ndarray) -> np.ndarray:
    """``A @ x`` in O(E) by summing each node's neighbour values in order."""
    out = np.zeros(g.n, dtype=x.dtype)
    deg = g.degrees
    nonempty = deg > 0
    if not nonempty.any():
        return out
    gathered = x[g.indices]
    # consecutive non-empty rows are contiguous in ``indices``, so reduceat
    # over their start offsets sums exactly one row per segment
    out[nonempty] = np.add.reduceat(gathered, g.indptr[:-1][nonempty])
    return out


@dataclass(frozen=True, eq=False)
class PowerSummary:
    """``n x k`` matrix whose column ``t-1`` is the ``t``-th power iterate."""

    data: np.ndarray

    def __post_init__(self):
        data = np.array(self.data, dtype=np.float64)
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def k(self) -> int:
        return self.data.shape[1]

    def to_csv(self, sink) -> None:
        for row in self.data:
            sink.write(",".join(repr(float(v)) for v in row) + "\n")


def power_summary(g: Graph, k: int = DEFAULT_K, start: Optional[np.ndarray] = None) -> PowerSummary:
    """Run ``k`` L1-normalised power iterations from the all-ones vector.

    ``x_t = A (x_{t-1} / |x_{t-1}|_1)`` is stored as column ``t-1``. A zero
    iterate stays zero instead of dividing by zero. ``start`` overrides the
    initial vector; anything other than a constant vector breaks the
    relabelling equivariance of the result.
    """
    if k < 1:
        raise ValueError(f"k must be a positive integer, got {k}")
    if g.n < 1:
        raise ValueError("power summary of an empty graph is undefined")
    if start is None:
        x = np.ones(g.n)
    else:
        x = np.asarray(start, dtype=np.float64)
        if x.ndim == 0:
            x = np.full(g.n, float(x))
        if x.shape != (g.n,):
            raise ValueError(f"start vector must have length {g.n}")
    S = np.empty((g.n, k))
    for t in range(k):
        norm = np.abs(x).sum()
        x = _matvec(g, x / norm) if norm > 0 else np.zeros(g.n)
        S[:, t] = x
    return PowerSummary(S)


def path_counts(g: Graph, t: int) -> np.ndarray:
    """Exact ``A^t 1``: number of length-``t`` walks starting at each node.

    Accumulation uses Python integers; an ``OverflowError`` naming the step
    is raised as soon as any count leaves the unsigned 64-bit range.
    """
    if t < 1:
        raise ValueError(f"t must be a positive integer, got {t}")
    x = np.ones(g.n, dtype=object)
    for step in range(1, t + 1):
        x = _matvec(g, x)
        if g.n and max(x) > _UINT64_MAX:
            raise OverflowError(f"walk counts exceed 64-bit range at t={step}")
    return x.astype(np.uint64)
