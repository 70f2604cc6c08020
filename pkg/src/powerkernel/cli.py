"""Command-line entry point: ``powerkernel {gram,perturb,invariance,bench,embed-dump}``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 invariance failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from contextlib import contextmanager
from pathlib import Path

from .embedding import DEFAULT_RIDGE
from .exceptions import DatasetError, EmbeddingError, GraphFormatError, KernelError
from .graph import GraphDataset, load_tu_dataset, synthetic_dataset
from .gram import FORMATS, compute_embeddings, save_embeddings
from .kernel import VARIANTS, KernelParams
from .summary import DEFAULT_K, power_summary

DATASET_ENV = "POWERKERNEL_DATASET_ROOT"

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INVARIANCE = 0, 1, 2, 3

log = logging.getLogger("powerkernel")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _synthetic(text: str):
    try:
        n, p, count = text.split(",")
        return int(n), float(p), int(count)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected n,p,count, got {text!r}") from None


def _int_list(text: str):
    try:
        return [int(float(v)) for v in text.split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _shared() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    src = p.add_argument_group("data source")
    src.add_argument("--dataset", metavar="DIR", help=f"TU dataset directory (fallback: ${DATASET_ENV})")
    src.add_argument("--name", help="TU dataset name, e.g. MUTAG")
    src.add_argument("--synthetic", type=_synthetic, metavar="n,p,count", help="Erdos-Renyi graphs instead of a dataset")
    src.add_argument("--allow-self-loops", action="store_true", help="drop self-loops in input files instead of failing")
    p.add_argument("--k", type=int, default=DEFAULT_K)
    p.add_argument("--ridge", type=float, default=DEFAULT_RIDGE)
    p.add_argument("--variant", choices=VARIANTS, default="corrected")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="output path (file or directory, per command)")
    p.add_argument("--format", choices=("csv", "json", "svm"), help="restrict output format")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    shared = _shared()
    parser = _Parser(prog="powerkernel", description="Power kernel between unlabeled graphs.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gram", parents=[shared], help="compute and export the Gram matrix")
    g.add_argument("--normalize", action="store_true", help="cosine-normalise (useful with --variant literal)")
    g.add_argument("--cache", help="JSON file of precomputed embeddings")
    g.add_argument("--tol", type=float, default=1e-8, help="PSD tolerance relative to the trace")

    p = sub.add_parser("perturb", parents=[shared], help="kernel decay under random edge flips")
    p.add_argument("--sample", type=int, default=100)
    p.add_argument("--flips", type=int, default=20)

    i = sub.add_parser("invariance", parents=[shared], help="relabelling invariance battery")
    i.add_argument("--trials", type=int, default=100)
    i.add_argument("--max-n", type=int, default=50)
    i.add_argument("--max-k", type=int, default=8)
    i.add_argument("--identity", action="store_true", help="use identity permutations")
    i.add_argument("--family", choices=("er", "regular"), default="er")

    b = sub.add_parser("bench", parents=[shared], help="embedding time versus edge count")
    b.add_argument("--sizes", type=_int_list, default=[10_000, 20_000, 40_000])
    b.add_argument("--avg-degree", type=float, default=10.0)
    b.add_argument("--repeats", type=int, default=7)

    e = sub.add_parser("embed-dump", parents=[shared], help="write embeddings (and optionally summaries)")
    e.add_argument("--summary-dir", help="also write each power summary as <index>.csv here")
    return parser


def _load(args) -> GraphDataset:
    if args.synthetic:
        if args.dataset or args.name:
            raise UsageError("--synthetic cannot be combined with --dataset/--name")
        n, p, count = args.synthetic
        return synthetic_dataset(n, p, count, seed=args.seed)
    root = args.dataset or os.environ.get(DATASET_ENV)
    if not root or not args.name:
        raise UsageError(f"need --synthetic or --name with --dataset (or ${DATASET_ENV})")
    return load_tu_dataset(root, args.name, allow_self_loops=args.allow_self_loops)


@contextmanager
def _sink(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            yield fh


def _params(args) -> KernelParams:
    try:
        return KernelParams(args.k, args.ridge, args.variant)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_gram(args) -> int:
    from .experiments import run_gram

    params = _params(args)
    ds = _load(args)
    formats = [args.format] if args.format else list(FORMATS)
    report = run_gram(
        ds, params, args.out or ".", workers=args.workers, formats=formats,
        tol=args.tol, cache=args.cache, normalize=args.normalize, seed=args.seed,
    )
    json.dump(report, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return EXIT_OK


def cmd_perturb(args) -> int:
    from .experiments import run_perturbation

    params = _params(args)
    ds = _load(args)
    trace = run_perturbation(ds.graphs, args.sample, args.flips, params, args.seed, args.workers)
    with _sink(args.out) as fh:
        trace.to_csv(fh)
    log.info("spearman(flips, mean_kernel) = %.4f", trace.spearman())
    return EXIT_OK


def cmd_invariance(args) -> int:
    from .experiments import run_invariance_suite

    _params(args)
    report = run_invariance_suite(
        trials=args.trials, max_n=args.max_n, k=args.k, max_k=args.max_k,
        ridge=args.ridge, seed=args.seed, identity=args.identity, family=args.family,
    )
    with _sink(args.out) as fh:
        json.dump(report.to_dict(), fh, indent=2)
        fh.write("\n")
    return EXIT_OK if report.passed else EXIT_INVARIANCE


def cmd_bench(args) -> int:
    from .experiments import run_scaling_benchmark, write_benchmark_csv

    _params(args)
    try:
        rows = run_scaling_benchmark(args.sizes, args.avg_degree, args.k, args.ridge, args.repeats, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    with _sink(args.out) as fh:
        write_benchmark_csv(rows, fh)
    return EXIT_OK


def cmd_embed_dump(args) -> int:
    params = _params(args)
    ds = _load(args)
    embeddings = compute_embeddings(ds.graphs, params.k, params.ridge, args.workers)
    if args.summary_dir:
        d = Path(args.summary_dir)
        d.mkdir(parents=True, exist_ok=True)
        for idx, g in enumerate(ds.graphs):
            with open(d / f"{idx}.csv", "w", encoding="utf-8", newline="\n") as fh:
                power_summary(g, params.k).to_csv(fh)
    if args.out in (None, "-"):
        payload = {"k": params.k, "ridge": params.ridge, "records": [dict(index=i, **e.to_dict()) for i, e in enumerate(embeddings)]}
        json.dump(payload, sys.stdout)
        sys.stdout.write("\n")
    else:
        save_embeddings(args.out, embeddings, params.k, params.ridge)
    return EXIT_OK


COMMANDS = {
    "gram": cmd_gram,
    "perturb": cmd_perturb,
    "invariance": cmd_invariance,
    "bench": cmd_bench,
    "embed-dump": cmd_embed_dump,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits on --help and on bad arguments; report the code instead
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"powerkernel: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DatasetError, GraphFormatError, EmbeddingError, KernelError, OSError) as exc:
        print(f"powerkernel: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
