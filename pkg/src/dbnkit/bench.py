"""Serial-vs-parallel kernel benchmark.

Times :func:`dbnkit.linalg.matmul` for each policy x shape combination
and reports median wall time, GFLOP/s, and speedup relative to the
1-thread policy for the same shape (the first listed policy when no
1-thread entry is present).
"""

import statistics
import time
from dataclasses import dataclass

import numpy as np

from .linalg import ParallelPolicy, matmul

CSV_HEADER = "kernel,m,k,n,threads,median_seconds,gflops,speedup"


@dataclass
class BenchRow:
    kernel: str
    m: int
    k: int
    n: int
    threads: int
    median_seconds: float
    gflops: float
    speedup: float


@dataclass
class BenchReport:
    rows: list[BenchRow]

    def to_csv(self) -> str:
        lines = [CSV_HEADER]
        for r in self.rows:
            lines.append(
                f"{r.kernel},{r.m},{r.k},{r.n},{r.threads},"
                f"{r.median_seconds:.9f},{r.gflops:.3f},{r.speedup:.3f}"
            )
        return "\n".join(lines) + "\n"

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_csv())


def _time_matmul(a, b, policy, runs):
    matmul(a, b, policy)  # warmup, untimed
    times = []
    for _ in range(runs):
        t0 = time.perf_counter()
        matmul(a, b, policy)
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def bench_kernels(
    policies: list[ParallelPolicy],
    shapes: list[tuple[int, int, int]],
    runs: int = 5,
) -> BenchReport:
    """Median-of-``runs`` matmul timings for each policy and shape."""
    if runs < 1:
        raise ValueError("runs must be >= 1")
    rows = []
    gen = np.random.default_rng(0)  # timing inputs only; values are irrelevant
    for m, k, n in shapes:
        a = gen.standard_normal((m, k))
        b = gen.standard_normal((k, n))
        medians = [_time_matmul(a, b, p, runs) for p in policies]
        baseline = None
        for p, med in zip(policies, medians):
            if p.max_threads == 1:
                baseline = med
                break
        if baseline is None and medians:
            baseline = medians[0]
        flop = 2.0 * m * k * n
        for p, med in zip(policies, medians):
            rows.append(
                BenchRow(
                    kernel="matmul",
                    m=m,
                    k=k,
                    n=n,
                    threads=p.max_threads,
                    median_seconds=med,
                    gflops=flop / med / 1e9 if med > 0 and flop > 0 else 0.0,
                    speedup=baseline / med if med > 0 else 0.0,
                )
            )
    return BenchReport(rows)
