"""Request/response models for the experiment service."""

import math
from typing import Literal

from pydantic import BaseModel, Field

from ..pipeline import ExperimentConfig, ExperimentResult, MetricsRow, parse_arch


class ExperimentRequest(BaseModel):
    """Everything needed to run one training experiment on the server.

    ``arch`` uses the CLI syntax: comma-separated hidden sizes
    ("1000, 500") or a repetition form ("9 x 1000"). Paths are resolved
    on the server's filesystem.
    """

    arch: str = "500, 300"
    data_dir: str
    out_dir: str
    epochs: int = Field(default=30, ge=1)
    lr_start: float = 1e-3
    lr_end: float = 1e-6
    weight_decay: float = Field(default=0.01, ge=0.0)
    seed: int = 42
    pretrain: bool = True
    pretrain_epochs: int = Field(default=10, ge=0)
    threads: int = Field(default=1, ge=1)
    limit_train: int | None = Field(default=None, ge=1)

    def to_config(self) -> ExperimentConfig:
        cfg = ExperimentConfig(
            arch=parse_arch(self.arch),
            data_dir=self.data_dir,
            out_dir=self.out_dir,
            epochs=self.epochs,
            lr_start=self.lr_start,
            lr_end=self.lr_end,
            weight_decay=self.weight_decay,
            seed=self.seed,
            pretrain=self.pretrain,
            pretrain_epochs=self.pretrain_epochs,
            threads=self.threads,
            limit_train=self.limit_train,
        )
        cfg.validate()
        return cfg


class ExperimentSummary(BaseModel):
    selected_epoch: int
    valid_err: float
    test_err: float
    best_test_err: float
    best_test_epoch: int
    wall_seconds: float
    wall_hours: float
    out_dir: str
    files: dict[str, str]

    @classmethod
    def from_result(cls, result: ExperimentResult) -> "ExperimentSummary":
        return cls(
            selected_epoch=result.selected_epoch,
            valid_err=result.valid_err,
            test_err=result.test_err,
            best_test_err=result.best_test_err,
            best_test_epoch=result.best_test_epoch,
            wall_seconds=result.wall_seconds,
            wall_hours=result.wall_hours,
            out_dir=str(result.out_dir),
            files=result.files,
        )


JobState = Literal["queued", "running", "done", "failed"]


class JobStatus(BaseModel):
    job_id: str
    state: JobState
    error: str | None = None
    result: ExperimentSummary | None = None


class MetricsRowModel(BaseModel):
    """One metrics.csv row; not-applicable columns come back as null."""

    phase: str
    epoch: int
    lr: float
    train_loss: float
    train_err: float | None
    valid_err: float | None
    seconds: float

    @classmethod
    def from_row(cls, row: MetricsRow) -> "MetricsRowModel":
        def opt(x: float) -> float | None:
            return None if math.isnan(x) else x

        return cls(
            phase=row.phase,
            epoch=row.epoch,
            lr=row.lr,
            train_loss=row.train_loss,
            train_err=opt(row.train_err),
            valid_err=opt(row.valid_err),
            seconds=row.seconds,
        )


class BenchRequest(BaseModel):
    shapes: list[tuple[int, int, int]] = [(256, 256, 256)]
    threads: list[int] = [1, 2]
    runs: int = Field(default=5, ge=1)


class BenchRowModel(BaseModel):
    kernel: str
    m: int
    k: int
    n: int
    threads: int
    median_seconds: float
    gflops: float
    speedup: float


class BenchResponse(BaseModel):
    rows: list[BenchRowModel]
    csv_text: str


class HealthResponse(BaseModel):
    status: str
    version: str
