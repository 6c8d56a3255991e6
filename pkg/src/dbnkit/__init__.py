"""Deep belief network training toolkit.

Dense kernels run on top of numpy/BLAS. For reproducibility the package
pins the BLAS thread pool to a single thread at import time; parallelism
is provided explicitly through :class:`dbnkit.linalg.ParallelPolicy`,
which partitions work so that results are bitwise identical for any
thread count.
"""

import os

# Must happen before numpy is first imported anywhere in the process.
# Harmless (and ineffective) if numpy is already loaded; threadpoolctl
# below then enforces the limit at runtime.
for _var in (
    "OPENBLAS_NUM_THREADS",
    "MKL_NUM_THREADS",
    "OMP_NUM_THREADS",
    "NUMEXPR_NUM_THREADS",
):
    os.environ.setdefault(_var, "1")

try:
    import threadpoolctl

    # Keep a reference so the limit stays active for the process lifetime.
    _BLAS_LIMIT = threadpoolctl.threadpool_limits(limits=1, user_api="blas")
except ImportError:  # pragma: no cover - env vars above are the fallback
    _BLAS_LIMIT = None

__version__ = "0.1.0"

from .linalg import ParallelPolicy  # noqa: E402
from .pipeline import ExperimentConfig, run_experiment  # noqa: E402
from .rng import Rng, derive_seed  # noqa: E402

__all__ = [
    "ExperimentConfig",
    "ParallelPolicy",
    "Rng",
    "derive_seed",
    "run_experiment",
    "__version__",
]
