"""Dense double-precision kernels with deterministic parallelism.

Matrices are C-contiguous 2-D float64 arrays, vectors 1-D float64
arrays. :func:`matmul` may fan work out over threads, but the output is
bitwise identical for every thread count: the rows of the result are
partitioned into blocks of a fixed size chosen by the
:class:`ParallelPolicy` (never by the thread count), each block is
computed by one BLAS call of identical shape no matter which thread runs
it, and the process-wide BLAS pool is pinned to a single thread at
package import. Changing ``block_rows`` may change low-order result
bits (different BLAS call shapes); changing ``max_threads`` cannot.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import BadRange, ShapeMismatch
from .rng import Rng


@dataclass(frozen=True)
class ParallelPolicy:
    """Row-block work partition for kernels that parallelize.

    max_threads: worker threads the kernel may use (>= 1).
    block_rows: rows per dispatch unit; part of the numeric contract,
        fixed independently of max_threads.
    """

    max_threads: int = 1
    block_rows: int = 128

    def __post_init__(self):
        if self.max_threads < 1:
            raise ValueError("max_threads must be >= 1")
        if self.block_rows < 1:
            raise ValueError("block_rows must be >= 1")


SERIAL = ParallelPolicy(max_threads=1)


def _check_matrix(a: np.ndarray, name: str) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise ShapeMismatch(f"{name} must be 2-D, got shape {a.shape}")
    return a


def _check_vector(x: np.ndarray, name: str) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ShapeMismatch(f"{name} must be 1-D, got shape {x.shape}")
    return x


def matmul(a: np.ndarray, b: np.ndarray, policy: ParallelPolicy = SERIAL) -> np.ndarray:
    """Matrix product a @ b under the deterministic row-block policy."""
    a = _check_matrix(a, "a")
    b = _check_matrix(b, "b")
    if a.shape[1] != b.shape[0]:
        raise ShapeMismatch(f"inner dimensions differ: {a.shape} @ {b.shape}")
    m = a.shape[0]
    out = np.empty((m, b.shape[1]))
    blocks = [(i, min(i + policy.block_rows, m)) for i in range(0, m, policy.block_rows)]

    def run_block(span):
        i0, i1 = span
        np.matmul(a[i0:i1], b, out=out[i0:i1])

    if policy.max_threads == 1 or len(blocks) <= 1:
        for span in blocks:
            run_block(span)
    else:
        with ThreadPoolExecutor(max_workers=policy.max_threads) as pool:
            list(pool.map(run_block, blocks))
    return out


def matvec(a: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Matrix-vector product a @ x."""
    a = _check_matrix(a, "a")
    x = _check_vector(x, "x")
    if a.shape[1] != x.shape[0]:
        raise ShapeMismatch(f"inner dimensions differ: {a.shape} @ {x.shape}")
    return a @ x


def outer(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Outer product u v^T."""
    u = _check_vector(u, "u")
    v = _check_vector(v, "v")
    return np.outer(u, v)


def axpy(alpha: float, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """alpha * x + y."""
    x = _check_vector(x, "x")
    y = _check_vector(y, "y")
    if x.shape != y.shape:
        raise ShapeMismatch(f"lengths differ: {x.shape} vs {y.shape}")
    return alpha * x + y


def transpose(a: np.ndarray) -> np.ndarray:
    """Transposed copy (row-major, contiguous)."""
    a = _check_matrix(a, "a")
    return np.ascontiguousarray(a.T)


def uniform_init(rng: Rng, rows: int, cols: int, lo: float, hi: float) -> np.ndarray:
    """rows x cols matrix of i.i.d. uniforms on [lo, hi), row-major draw order."""
    if lo > hi:
        raise BadRange(f"lo={lo} exceeds hi={hi}")
    if rows < 0 or cols < 0:
        raise ShapeMismatch("rows and cols must be non-negative")
    return rng.uniforms(rows * cols, lo, hi).reshape(rows, cols)


def gaussian(rng: Rng, mean: float, stddev: float) -> float:
    """One draw from N(mean, stddev^2) via the documented Box-Muller rule."""
    return rng.gaussian(mean, stddev)
