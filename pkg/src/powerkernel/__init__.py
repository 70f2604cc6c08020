"""Power kernel: Bhattacharyya kernel between Gaussian embeddings of graph
power-iteration summaries."""

from .embedding import DEFAULT_RIDGE, GaussianEmbedding, embed, embed_graph
from .estimator import PowerKernel
from .exceptions import DatasetError, EmbeddingError, GraphFormatError, KernelError, PowerKernelError
from .graph import (
    Graph,
    GraphDataset,
    Permutation,
    apply_permutation,
    degree_vector,
    erdos_renyi,
    flip_edge,
    flip_random_edge,
    load_edge_list,
    load_tu_dataset,
    synthetic_dataset,
)
from .gram import GramMatrix, PSDReport, compute_gram, export_gram, psd_check, read_gram_json
from .kernel import (
    KernelParams,
    OracleResult,
    bhattacharyya_oracle,
    kernel,
    kernel_literal_eq5,
    log_kernel,
    log_kernel_literal_eq5,
)
from .summary import DEFAULT_K, PowerSummary, path_counts, power_summary

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_K",
    "DEFAULT_RIDGE",
    "DatasetError",
    "EmbeddingError",
    "GaussianEmbedding",
    "GramMatrix",
    "Graph",
    "GraphDataset",
    "GraphFormatError",
    "KernelError",
    "KernelParams",
    "OracleResult",
    "PSDReport",
    "Permutation",
    "PowerKernel",
    "PowerKernelError",
    "PowerSummary",
    "apply_permutation",
    "bhattacharyya_oracle",
    "compute_gram",
    "degree_vector",
    "embed",
    "embed_graph",
    "erdos_renyi",
    "export_gram",
    "flip_edge",
    "flip_random_edge",
    "kernel",
    "kernel_literal_eq5",
    "load_edge_list",
    "load_tu_dataset",
    "log_kernel",
    "log_kernel_literal_eq5",
    "path_counts",
    "power_summary",
    "psd_check",
    "read_gram_json",
    "synthetic_dataset",
]
