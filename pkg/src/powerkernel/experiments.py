"""Desk-scale experiments: perturbation stability, invariance battery,
scaling benchmark and Gram production with a 1-NN sanity score."""

from __future__ import annotations

import csv
import json
import math
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from scipy.stats import spearmanr

from .embedding import DEFAULT_RIDGE, embed
from .exceptions import DatasetError, EmbeddingError, KernelError
from .graph import (
    Graph,
    GraphDataset,
    Permutation,
    apply_permutation,
    erdos_renyi,
    flip_random_edge,
    random_sparse_graph,
)
from .gram import FORMATS, compute_gram, export_gram, psd_check
from .kernel import KernelParams, evaluate
from .summary import DEFAULT_K, power_summary

THEOREM1_TOL = 1e-10
THEOREM2_TOL = 1e-9
SELF_KERNEL_TOL = 1e-9


def _map(fn, items, workers):
    if not workers or workers <= 1:
        return [fn(x) for x in items]
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _csv_row(values) -> list[str]:
    return [repr(float(v)) if isinstance(v, (float, np.floating)) else str(v) for v in values]


# -- perturbation ----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PerturbationTrace:
    flips: np.ndarray
    mean_kernel: np.ndarray
    stderr: np.ndarray
    sample_count: int
    seed: int

    def spearman(self) -> float:
        return float(spearmanr(self.flips, self.mean_kernel).statistic)

    def to_csv(self, sink) -> None:
        w = csv.writer(sink, lineterminator="\n")
        w.writerow(["flips", "mean_kernel", "stderr"])
        for f, m, s in zip(self.flips, self.mean_kernel, self.stderr):
            w.writerow(_csv_row([int(f), float(m), float(s)]))


def run_perturbation(
    graphs: Sequence[Graph],
    sample: int = 100,
    flips: int = 20,
    params: KernelParams = KernelParams(),
    seed: int = 0,
    workers: int = 1,
) -> PerturbationTrace:
    """Mean kernel between each sampled graph and its cumulatively flipped copies.

    ``sample`` graphs with at least two nodes are drawn once without
    replacement. Each gets its own child random stream, so the trace does not
    depend on ``workers``. Row 0 compares every graph with itself.
    """
    eligible = [i for i, g in enumerate(graphs) if g.n >= 2]
    if len(eligible) < sample:
        raise DatasetError(f"need {sample} graphs with n >= 2, only {len(eligible)} available")
    pick_seed, flip_seed = np.random.SeedSequence(seed).spawn(2)
    chosen = np.random.default_rng(pick_seed).choice(eligible, size=sample, replace=False)
    streams = flip_seed.spawn(sample)

    def one(j):
        g = graphs[int(chosen[j])]
        rng = np.random.default_rng(streams[j])
        try:
            base = embed(power_summary(g, params.k), params.ridge)
            row = [evaluate(base, base, params.variant)]
            h = g
            for _ in range(flips):
                h = flip_random_edge(h, rng)
                row.append(evaluate(base, embed(power_summary(h, params.k), params.ridge), params.variant))
        except (EmbeddingError, KernelError) as exc:
            raise type(exc)(f"sampled graph {int(chosen[j])}: {exc}") from exc
        return row

    values = np.array(_map(one, range(sample), workers))
    stderr = values.std(axis=0, ddof=1) / math.sqrt(sample) if sample > 1 else np.zeros(flips + 1)
    return PerturbationTrace(np.arange(flips + 1), values.mean(axis=0), stderr, sample, seed)


# -- invariance battery ----------------------------------------------------


def circulant_graph(n: int, offsets: Sequence[int]) -> Graph:
    """Regular graph joining ``i`` to ``i +- d (mod n)`` for each offset ``d``."""
    i = np.arange(n)
    edges = [np.stack([i, (i + d) % n], axis=1) for d in offsets if d % n]
    return Graph.from_edges(n, np.concatenate(edges) if edges else [])


def _random_graph(rng: np.random.Generator, max_n: int, family: str) -> Graph:
    n = int(rng.integers(2, max_n + 1))
    if family == "regular":
        n = max(n, 3)
        offsets = rng.choice(np.arange(1, n // 2 + 1), size=min(2, n // 2), replace=False)
        return circulant_graph(n, offsets)
    return erdos_renyi(n, float(rng.uniform(0.05, 0.5)), rng)


@dataclass
class InvarianceReport:
    trials: int
    theorem1_max_err: float = 0.0
    theorem2_max_err: float = 0.0
    self_kernel_max_dev: float = 0.0
    embedding_failures: int = 0
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return (
            not self.failures
            and self.embedding_failures == 0
            and self.theorem1_max_err <= THEOREM1_TOL
            and self.theorem2_max_err <= THEOREM2_TOL
            and self.self_kernel_max_dev <= SELF_KERNEL_TOL
        )

    def to_dict(self) -> dict:
        return {
            "trials": self.trials,
            "theorem1_max_err": self.theorem1_max_err,
            "theorem2_max_err": self.theorem2_max_err,
            "self_kernel_max_dev": self.self_kernel_max_dev,
            "embedding_failures": self.embedding_failures,
            "tolerances": {"theorem1": THEOREM1_TOL, "theorem2": THEOREM2_TOL, "self_kernel": SELF_KERNEL_TOL},
            "failures": self.failures,
            "pass": self.passed,
        }


def run_invariance_suite(
    trials: int = 100,
    max_n: int = 50,
    k: int = DEFAULT_K,
    max_k: int = 8,
    ridge: float = DEFAULT_RIDGE,
    seed: int = 0,
    identity: bool = False,
    family: str = "er",
) -> InvarianceReport:
    """Check relabelling equivariance of the summary, invariance of the
    embedding and unit self-kernel over random graphs and permutations.

    The summary is computed once with ``max(k, max_k)`` columns; because the
    iteration is prefix-consistent this covers every smaller ``k``.
    """
    report = InvarianceReport(trials)
    kk = max(k, max_k)
    for t, ss in enumerate(np.random.SeedSequence(seed).spawn(trials)):
        rng = np.random.default_rng(ss)
        g = _random_graph(rng, max_n, family)
        p = Permutation.identity(g.n) if identity else Permutation.random(g.n, rng)
        h = apply_permutation(g, p)

        S = power_summary(g, kk).data
        Sh = power_summary(h, kk).data
        err1 = float(np.abs(Sh[p.map] - S).max())
        report.theorem1_max_err = max(report.theorem1_max_err, err1)

        try:
            eg = embed(power_summary(g, k), ridge)
            eh = embed(power_summary(h, k), ridge)
        except EmbeddingError as exc:
            report.embedding_failures += 1
            report.failures.append({"trial": t, "n": g.n, "error": str(exc)})
            continue
        err2 = max(float(np.abs(eg.mu - eh.mu).max()), float(np.abs(eg.sigma - eh.sigma).max()))
        report.theorem2_max_err = max(report.theorem2_max_err, err2)
        dev = abs(evaluate(eg, eh, "corrected") - 1.0)
        report.self_kernel_max_dev = max(report.self_kernel_max_dev, dev)
    return report


# -- scaling benchmark -----------------------------------------------------


def run_scaling_benchmark(
    sizes: Sequence[int],
    avg_degree: float = 10.0,
    k: int = DEFAULT_K,
    ridge: float = DEFAULT_RIDGE,
    repeats: int = 7,
    seed: int = 0,
    min_batch_time: float = 0.02,
) -> list[dict]:
    """Median wall time of ``power_summary`` + ``embed`` per target edge count.

    Each repeat times a batch of calls lasting at least ``min_batch_time``
    seconds and records the per-call average; the median over ``repeats``
    is reported.
    """
    if list(sizes) != sorted(sizes):
        raise ValueError("sizes must be ascending")
    if repeats < 5:
        raise ValueError("repeats must be at least 5")
    rows = []
    for E, ss in zip(sizes, np.random.SeedSequence(seed).spawn(len(sizes))):
        g = random_sparse_graph(int(E), avg_degree, np.random.default_rng(ss))

        def work():
            embed(power_summary(g, k), ridge)

        work()
        number = 1
        while True:
            t0 = time.perf_counter()
            for _ in range(number):
                work()
            if time.perf_counter() - t0 >= min_batch_time or number >= 1 << 16:
                break
            number *= 2
        times = []
        for _ in range(repeats):
            t0 = time.perf_counter()
            for _ in range(number):
                work()
            times.append((time.perf_counter() - t0) / number)
        rows.append({"target_E": int(E), "E": g.edge_count, "n": g.n, "wall_time": float(np.median(times))})
    return rows


def write_benchmark_csv(rows: Sequence[dict], sink) -> None:
    w = csv.writer(sink, lineterminator="\n")
    w.writerow(["E", "n", "wall_time"])
    for r in rows:
        w.writerow(_csv_row([r["E"], r["n"], r["wall_time"]]))


# -- gram production -------------------------------------------------------


def knn_cv_accuracy(K: np.ndarray, labels: np.ndarray, folds: int = 10, seed: int = 0) -> float:
    """10-fold cross-validated accuracy of kernel 1-nearest-neighbour.

    The neighbour of a test graph is the training graph with the largest
    kernel value. This is a sanity statistic, not an SVM protocol.
    """
    from sklearn.model_selection import KFold, StratifiedKFold

    labels = np.asarray(labels)
    m = len(labels)
    folds = min(folds, m)
    if folds < 2:
        return float("nan")
    _, counts = np.unique(labels, return_counts=True)
    splitter = (
        StratifiedKFold(folds, shuffle=True, random_state=seed)
        if counts.min() >= folds
        else KFold(folds, shuffle=True, random_state=seed)
    )
    correct = 0
    for train, test in splitter.split(np.zeros(m), labels):
        nearest = train[np.argmax(K[np.ix_(test, train)], axis=1)]
        correct += int((labels[nearest] == labels[test]).sum())
    return correct / m


def run_gram(
    ds: GraphDataset,
    params: KernelParams,
    out_dir,
    workers: int = 1,
    formats: Sequence[str] = FORMATS,
    tol: float = 1e-8,
    cache: Optional[os.PathLike] = None,
    normalize: bool = False,
    seed: int = 0,
) -> dict:
    """Compute the Gram matrix, export it and write a JSON report next to it."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    gram = compute_gram(ds, params, workers=workers, cache=cache, normalize=normalize)
    stem = ds.name or "gram"
    files = {}
    for fmt in formats:
        path = out / f"{stem}.{fmt}"
        export_gram(gram, fmt, path)
        files[fmt] = str(path)
    psd = psd_check(gram, tol)
    report = {
        "dataset": ds.name,
        "m": gram.m,
        "params": params.to_dict(),
        "psd": psd.to_dict(),
        "knn_cv_accuracy": knn_cv_accuracy(gram.values, gram.labels, seed=seed),
        "files": files,
    }
    path = out / f"{stem}.report.json"
    path.write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
    report["files"]["report"] = str(path)
    return report
