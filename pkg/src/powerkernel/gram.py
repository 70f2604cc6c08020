"""Dataset-level kernel matrices: computation, export and PSD diagnostics."""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, TextIO, Union

import numpy as np

from .embedding import GaussianEmbedding, embed
from .exceptions import EmbeddingError, KernelError
from .graph import Graph, GraphDataset
from .kernel import KernelParams, evaluate
from .summary import power_summary

FORMATS = ("csv", "json", "svm")


@dataclass(frozen=True, eq=False)
class GramMatrix:
    values: np.ndarray
    labels: np.ndarray
    params: KernelParams

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise ValueError(f"Gram matrix must be square, got shape {values.shape}")
        labels = np.asarray(self.labels, dtype=np.int64).reshape(-1)
        if len(labels) != values.shape[0]:
            raise ValueError(f"{len(labels)} labels for a {values.shape[0]}x{values.shape[0]} matrix")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "labels", labels)

    @property
    def m(self) -> int:
        return self.values.shape[0]


def _map(fn, items, workers: int):
    if workers is None or workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def compute_embeddings(
    graphs: Sequence[Graph], k: int, ridge: float, workers: int = 1
) -> list[GaussianEmbedding]:
    """Embed every graph; a failure names the offending graph index."""

    def one(i):
        try:
            return embed(power_summary(graphs[i], k), ridge)
        except (EmbeddingError, ValueError) as exc:
            raise EmbeddingError(f"graph {i}: {exc}") from exc

    return _map(one, range(len(graphs)), workers)


def save_embeddings(path: Union[str, os.PathLike], embeddings: Sequence[GaussianEmbedding], k: int, ridge: float) -> None:
    records = [dict(index=i, **e.to_dict()) for i, e in enumerate(embeddings)]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump({"k": k, "ridge": ridge, "records": records}, fh)
        fh.write("\n")


def load_embeddings(path: Union[str, os.PathLike], k: int, ridge: float) -> Optional[list[GaussianEmbedding]]:
    """Cached embeddings for ``(k, ridge)``, or ``None`` if the file does not match."""
    try:
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
    except FileNotFoundError:
        return None
    if payload.get("k") != k or payload.get("ridge") != ridge:
        return None
    records = sorted(payload["records"], key=lambda r: r["index"])
    return [GaussianEmbedding.from_dict(r) for r in records]


def gram_from_embeddings(
    embeddings: Sequence[GaussianEmbedding],
    variant: str = "corrected",
    workers: int = 1,
    normalize: bool = False,
) -> np.ndarray:
    """Evaluate all ``m(m+1)/2`` pairs and mirror the upper triangle."""
    m = len(embeddings)
    iu, ju = np.triu_indices(m)

    def one(idx):
        i, j = int(iu[idx]), int(ju[idx])
        try:
            return evaluate(embeddings[i], embeddings[j], variant)
        except KernelError as exc:
            raise KernelError(f"pair ({i}, {j}): {exc}") from exc

    vals = _map(one, range(len(iu)), workers)
    K = np.empty((m, m))
    K[iu, ju] = vals
    K[ju, iu] = vals
    if normalize:
        d = np.sqrt(np.diag(K))
        K = K / np.outer(d, d)
    return K


def compute_gram(
    ds: GraphDataset,
    params: KernelParams = KernelParams(),
    workers: int = 1,
    cache: Optional[Union[str, os.PathLike]] = None,
    normalize: bool = False,
) -> GramMatrix:
    """Embed each graph once, then evaluate every pair.

    ``cache`` names a JSON file of precomputed embeddings; it is read when its
    ``(k, ridge)`` match and the record count equals the dataset size, and
    (re)written otherwise. ``normalize`` divides by ``sqrt(K_ii K_jj)``, which
    only changes anything for the literal variant.
    """
    embeddings = None
    if cache is not None:
        embeddings = load_embeddings(cache, params.k, params.ridge)
        if embeddings is not None and len(embeddings) != len(ds):
            embeddings = None
    if embeddings is None:
        embeddings = compute_embeddings(ds.graphs, params.k, params.ridge, workers)
        if cache is not None:
            save_embeddings(cache, embeddings, params.k, params.ridge)
    K = gram_from_embeddings(embeddings, params.variant, workers, normalize)
    return GramMatrix(K, ds.labels, params)


# -- export ----------------------------------------------------------------


def _fmt(v) -> str:
    return repr(float(v))


def _write(g: GramMatrix, fmt: str, fh: TextIO) -> None:
    if fmt == "csv":
        fh.write(",".join(str(i) for i in range(g.m)) + "\n")
        for row in g.values:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    elif fmt == "json":
        json.dump(
            {
                "m": g.m,
                "labels": [int(v) for v in g.labels],
                "params": g.params.to_dict(),
                "values": [float(v) for v in g.values.ravel()],
            },
            fh,
        )
        fh.write("\n")
    elif fmt in ("svm", "svm_precomputed"):
        for i, row in enumerate(g.values):
            fields = [str(int(g.labels[i])), f"0:{i + 1}"]
            fields += [f"{j + 1}:{_fmt(v)}" for j, v in enumerate(row)]
            fh.write(" ".join(fields) + "\n")
    else:
        raise ValueError(f"unknown export format {fmt!r}; expected one of {FORMATS}")


def export_gram(g: GramMatrix, fmt: str, sink: Union[TextIO, str, os.PathLike]) -> None:
    """Write ``g`` as ``csv``, ``json`` or ``svm`` (LIBSVM precomputed kernel).

    Values use the shortest decimal that round-trips to the same double.
    """
    if isinstance(sink, (str, os.PathLike)):
        with open(sink, "w", encoding="utf-8", newline="\n") as fh:
            _write(g, fmt, fh)
    else:
        _write(g, fmt, sink)


def read_gram_json(source: Union[TextIO, str, os.PathLike]) -> GramMatrix:
    if isinstance(source, (str, os.PathLike)):
        with open(source, encoding="utf-8") as fh:
            payload = json.load(fh)
    else:
        payload = json.load(source)
    m = payload["m"]
    values = np.asarray(payload["values"], dtype=np.float64).reshape(m, m)
    return GramMatrix(values, payload["labels"], KernelParams(**payload["params"]))


def read_gram_csv(source: Union[TextIO, str, os.PathLike]) -> np.ndarray:
    text = Path(source).read_text(encoding="utf-8") if isinstance(source, (str, os.PathLike)) else source.read()
    rows = text.strip("\n").split("\n")[1:]
    return np.array([[float(v) for v in r.split(",")] for r in rows], dtype=np.float64).reshape(len(rows), -1)


def read_gram_svm(source: Union[TextIO, str, os.PathLike]) -> tuple[np.ndarray, np.ndarray]:
    """Parse a precomputed-kernel file back into ``(values, labels)``."""
    text = Path(source).read_text(encoding="utf-8") if isinstance(source, (str, os.PathLike)) else source.read()
    labels, rows = [], []
    for i, line in enumerate(text.strip("\n").split("\n")):
        fields = line.split()
        labels.append(int(fields[0]))
        serial = fields[1].split(":")
        if serial != ["0", str(i + 1)]:
            raise ValueError(f"line {i + 1}: expected serial field 0:{i + 1}, got {fields[1]}")
        rows.append([float(f.split(":", 1)[1]) for f in fields[2:]])
    return np.array(rows, dtype=np.float64), np.array(labels, dtype=np.int64)


# -- diagnostics -----------------------------------------------------------


@dataclass(frozen=True)
class PSDReport:
    min_eigenvalue: float
    trace: float
    tol: float
    passed: bool

    def to_dict(self) -> dict:
        return {"min_eigenvalue": self.min_eigenvalue, "trace": self.trace, "tol": self.tol, "pass": self.passed}


def psd_check(g: Union[GramMatrix, np.ndarray], tol: float = 1e-8) -> PSDReport:
    """Pass iff the smallest eigenvalue is at least ``-tol * trace``."""
    K = g.values if isinstance(g, GramMatrix) else np.asarray(g, dtype=np.float64)
    if K.ndim != 2 or K.shape[0] != K.shape[1] or K.shape[0] < 1:
        raise ValueError("psd_check needs a non-empty square matrix")
    K = 0.5 * (K + K.T)
    if K.shape[0] > 3000:
        from scipy.sparse.linalg import eigsh

        lam = float(eigsh(K, k=1, which="SA", return_eigenvectors=False)[0])
    else:
        lam = float(np.linalg.eigvalsh(K)[0])
    trace = float(np.trace(K))
    return PSDReport(lam, trace, tol, lam >= -tol * trace)
