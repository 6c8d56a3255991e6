"""Experiment front-end: wire data, pretraining, fine-tuning, selection.

An experiment loads the four canonical IDX files from ``data_dir``,
normalizes pixels, carves a validation slice off the training file (one
sixth, capped at 10,000 samples, last samples in file order), optionally
pretrains a stack of RBMs to initialize the network, fine-tunes with
online backpropagation, selects the snapshot with the lowest validation
error, and evaluates it on the test set. Outputs land in ``out_dir``:

* ``metrics.csv``   per-epoch rows (phase, epoch, lr, train_loss,
                    train_err, valid_err, seconds)
* ``model.dbnm``    the selected snapshot (DBNM binary checkpoint)
* ``summary.txt``   ``key = value`` lines: selected_epoch, valid_err,
                    test_err, best_test_err, best_test_epoch,
                    wall_seconds, wall_hours

The test set is additionally evaluated after every epoch so the summary
can report both the selected-model test error and the minimum test error
over all epochs.

Seed streams (all derived from the experiment seed): 0 fresh network
init, 1 pretraining, 2 the output layer appended after pretraining.
Epoch shuffles derive from the experiment seed inside the trainer.
"""

import re
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bench import BenchReport, bench_kernels
from .checkpoint import save_checkpoint
from .errors import (
    BadToken,
    ConfigInvalid,
    EmptyArch,
    IoError,
    ZeroSize,
)
from .layers import N_CLASSES, init_network
from .linalg import ParallelPolicy
from .mnist import Dataset, SplitSpec, load_mnist, split_train_validation
from .rbm import CdConfig, to_network, train_rbm
from .rng import Rng, derive_seed
from .training import TrainConfig, evaluate, fit

STREAM_INIT = 0
STREAM_PRETRAIN = 1
STREAM_OUTPUT_LAYER = 2

METRICS_HEADER = "phase,epoch,lr,train_loss,train_err,valid_err,seconds"

METRICS_FILE = "metrics.csv"
MODEL_FILE = "model.dbnm"
SUMMARY_FILE = "summary.txt"
BENCH_FILE = "bench.csv"

_ARCH_REPEAT = re.compile(r"^\s*(\d+)\s*[xX]\s*(\d+)\s*$")


def parse_arch(s: str) -> list[int]:
    """Hidden-layer sizes from "1000, 500" or the repetition form "9 x 1000"."""
    if not s.strip():
        raise EmptyArch("architecture string is empty")
    m = _ARCH_REPEAT.match(s)
    if m:
        n, size = int(m.group(1)), int(m.group(2))
        if n == 0:
            raise EmptyArch("zero repetitions")
        if size == 0:
            raise ZeroSize("layer size 0")
        return [size] * n
    sizes = []
    for token in s.split(","):
        token = token.strip()
        if not token.isdigit():
            raise BadToken(f"bad layer size {token!r}")
        size = int(token)
        if size == 0:
            raise ZeroSize("layer size 0")
        sizes.append(size)
    return sizes


def format_arch(sizes: list[int]) -> str:
    """Canonical comma form; parse_arch(format_arch(x)) == x."""
    return ", ".join(str(s) for s in sizes)


@dataclass
class MetricsRow:
    phase: str  # "pretrain" | "finetune"
    epoch: int
    lr: float
    train_loss: float
    train_err: float
    valid_err: float
    seconds: float


def _g17(x: float) -> str:
    return format(float(x), ".17g")


def emit_metrics(rows: list[MetricsRow], path) -> None:
    """CSV with 17-significant-digit floats (exact float64 round trip)."""
    lines = [METRICS_HEADER]
    for r in rows:
        lines.append(
            f"{r.phase},{r.epoch},{_g17(r.lr)},{_g17(r.train_loss)},"
            f"{_g17(r.train_err)},{_g17(r.valid_err)},{_g17(r.seconds)}"
        )
    try:
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    except OSError as exc:
        raise IoError(f"writing {path}: {exc}") from exc


def read_metrics(path) -> list[MetricsRow]:
    """Parse a metrics.csv back into rows."""
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise IoError(f"reading {path}: {exc}") from exc
    rows = []
    for line in lines[1:]:
        phase, epoch, lr, loss, terr, verr, secs = line.split(",")
        rows.append(
            MetricsRow(
                phase, int(epoch), float(lr), float(loss), float(terr), float(verr), float(secs)
            )
        )
    return rows


@dataclass
class ExperimentConfig:
    arch: list[int]
    data_dir: Path
    out_dir: Path
    epochs: int = 30
    lr_start: float = 1e-3
    lr_end: float = 1e-6
    weight_decay: float = 0.01
    seed: int = 42
    pretrain: bool = True
    pretrain_epochs: int = 10
    threads: int = 1
    limit_train: int | None = None

    def validate(self) -> None:
        if not self.arch:
            raise ConfigInvalid("architecture must have at least one hidden layer")
        if any(s < 1 for s in self.arch):
            raise ConfigInvalid("hidden layer sizes must be >= 1")
        if self.epochs < 1:
            raise ConfigInvalid("epochs must be >= 1")
        if not 0 < self.lr_end <= self.lr_start:
            raise ConfigInvalid("need 0 < lr_end <= lr_start")
        if self.weight_decay < 0:
            raise ConfigInvalid("weight_decay must be >= 0")
        if self.pretrain_epochs < 0:
            raise ConfigInvalid("pretrain_epochs must be >= 0")
        if self.threads < 1:
            raise ConfigInvalid("threads must be >= 1")
        if self.limit_train is not None and self.limit_train < 1:
            raise ConfigInvalid("limit_train must be >= 1")


@dataclass
class ExperimentResult:
    selected_epoch: int
    valid_err: float
    test_err: float
    best_test_err: float
    best_test_epoch: int
    wall_seconds: float
    out_dir: Path
    files: dict = field(default_factory=dict)

    @property
    def wall_hours(self) -> float:
        return self.wall_seconds / 3600.0


def _write_summary(path, result: ExperimentResult) -> None:
    text = (
        f"selected_epoch = {result.selected_epoch}\n"
        f"valid_err = {_g17(result.valid_err)}\n"
        f"test_err = {_g17(result.test_err)}\n"
        f"best_test_err = {_g17(result.best_test_err)}\n"
        f"best_test_epoch = {result.best_test_epoch}\n"
        f"wall_seconds = {result.wall_seconds:.3f}\n"
        f"wall_hours = {result.wall_hours:.1f}\n"
    )
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise IoError(f"writing {path}: {exc}") from exc


def read_summary(path) -> dict:
    """Parse a summary.txt into a {key: float} dict."""
    out = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        key, _, value = line.partition(" = ")
        out[key] = float(value)
    return out


def _default_validation_count(n: int) -> int:
    # One sixth of the training file, capped at the canonical 10,000
    # (a 60,000-image file therefore splits 50,000 / 10,000).
    return min(10_000, max(1, n // 6))


def _limited_counts(limit: int, n_train: int, n_valid: int) -> tuple[int, int]:
    # --limit-train N: first N training samples, validation shrunk to N/5
    return min(limit, n_train), max(1, min(limit // 5, n_valid))


def _pretrain_stack(train: Dataset, cfg: ExperimentConfig, rows: list[MetricsRow]):
    """Greedy layer-wise pretraining, collecting per-epoch metrics rows.

    Mirrors rbm.greedy_stack (same per-layer seed derivation) while
    keeping each machine's report for the metrics file.
    """
    sizes = [train.feature_count] + list(cfg.arch)
    cd_base_seed = derive_seed(cfg.seed, STREAM_PRETRAIN)
    stack = []
    current = train.samples
    for i, (n_vis, n_hid) in enumerate(zip(sizes, sizes[1:])):
        cd_cfg = CdConfig(
            learning_rate=cfg.lr_start,
            epochs=cfg.pretrain_epochs,
            weight_decay=cfg.weight_decay,
            sample_hidden=True,
            seed=cd_base_seed if i == 0 else derive_seed(cd_base_seed, i),
        )
        rbm, report = train_rbm(current, (n_vis, n_hid), cd_cfg)
        n_epochs = max(1, len(report.reconstruction_errors))
        for e, err in enumerate(report.reconstruction_errors):
            rows.append(
                MetricsRow(
                    phase="pretrain",
                    epoch=i * cfg.pretrain_epochs + e,
                    lr=cfg.lr_start,
                    train_loss=err,
                    train_err=float("nan"),
                    valid_err=float("nan"),
                    seconds=report.wall_seconds / n_epochs,
                )
            )
        stack.append(rbm)
        current = np.maximum(0.0, current @ rbm.weights.T + rbm.hid_bias)
    return stack


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """Full pipeline; writes metrics.csv, model.dbnm, summary.txt to out_dir."""
    cfg.validate()
    t0 = time.perf_counter()

    train_full, test = load_mnist(cfg.data_dir)
    split = SplitSpec(validation_count=_default_validation_count(len(train_full)))
    train, valid = split_train_validation(train_full, split)
    if cfg.limit_train is not None:
        n_train, n_valid = _limited_counts(cfg.limit_train, len(train), len(valid))
        train = train.take(n_train)
        valid = valid.take(n_valid)

    rows: list[MetricsRow] = []
    if cfg.pretrain:
        stack = _pretrain_stack(train, cfg, rows)
        params = to_network(stack, N_CLASSES, Rng(derive_seed(cfg.seed, STREAM_OUTPUT_LAYER)))
    else:
        sizes = [train.feature_count] + list(cfg.arch) + [N_CLASSES]
        params = init_network(sizes, Rng(derive_seed(cfg.seed, STREAM_INIT)))

    policy = ParallelPolicy(max_threads=cfg.threads)
    train_cfg = TrainConfig(
        epochs=cfg.epochs,
        lr_start=cfg.lr_start,
        lr_end=cfg.lr_end,
        weight_decay=cfg.weight_decay,
        shuffle_seed=cfg.seed,
    )
    test_errors: list[float] = []
    selection, epoch_metrics = fit(
        params,
        train,
        valid,
        train_cfg,
        policy=policy,
        on_epoch=lambda e, p: test_errors.append(evaluate(p, test, policy)),
    )
    rows.extend(
        MetricsRow("finetune", m.epoch, m.learning_rate, m.train_loss, m.train_err, m.valid_err, m.seconds)
        for m in epoch_metrics
    )

    test_err = evaluate(selection.best_params, test, policy)
    best_test_epoch = min(range(len(test_errors)), key=lambda e: test_errors[e])

    out_dir = Path(cfg.out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoError(f"creating {out_dir}: {exc}") from exc
    metrics_path = out_dir / METRICS_FILE
    model_path = out_dir / MODEL_FILE
    summary_path = out_dir / SUMMARY_FILE
    emit_metrics(rows, metrics_path)
    save_checkpoint(selection.best_params, model_path)

    result = ExperimentResult(
        selected_epoch=selection.best_epoch,
        valid_err=selection.best_validation_error,
        test_err=test_err,
        best_test_err=test_errors[best_test_epoch],
        best_test_epoch=best_test_epoch,
        wall_seconds=time.perf_counter() - t0,
        out_dir=out_dir,
        files={
            "metrics": str(metrics_path),
            "model": str(model_path),
            "summary": str(summary_path),
        },
    )
    _write_summary(summary_path, result)
    return result


def run_bench(
    out_dir: Path,
    threads: int = 1,
    shapes: list[tuple[int, int, int]] | None = None,
    runs: int = 5,
) -> BenchReport:
    """Kernel benchmark mode; writes bench.csv to out_dir and returns the report."""
    if shapes is None:
        shapes = [(1024, 1024, 1024)]
    policies = [ParallelPolicy(max_threads=1)]
    if threads > 1:
        policies.append(ParallelPolicy(max_threads=threads))
    report = bench_kernels(policies, shapes, runs=runs)
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoError(f"creating {out_dir}: {exc}") from exc
    report.write_csv(out_dir / BENCH_FILE)
    return report
