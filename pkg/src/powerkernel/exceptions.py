"""Exception hierarchy shared across the package."""


class PowerKernelError(Exception):
    """Base class for all errors raised by powerkernel."""


class GraphFormatError(PowerKernelError, ValueError):
    """Malformed graph input (bad line, index out of range, self-loop)."""


class DatasetError(PowerKernelError, ValueError):
    """A benchmark dataset directory is missing files or is inconsistent."""


class EmbeddingError(PowerKernelError, ValueError):
    """The ridged covariance of a power summary is not positive definite."""


class KernelError(PowerKernelError, ArithmeticError):
    """Kernel evaluation produced a non-finite value or got mismatched inputs."""
