"""FastAPI application: submit experiments, poll status, fetch metrics.

Experiments run in background threads (training is minutes-long, so the
submit endpoint returns a job id immediately). Jobs live in process
memory; restarting the server forgets them, though their output files
remain on disk.
"""

import threading
import uuid
from dataclasses import dataclass, field

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..bench import bench_kernels
from ..errors import DbnError
from ..linalg import ParallelPolicy
from ..pipeline import METRICS_FILE, read_metrics, run_experiment
from .schemas import (
    BenchRequest,
    BenchResponse,
    BenchRowModel,
    ExperimentRequest,
    ExperimentSummary,
    HealthResponse,
    JobStatus,
    MetricsRowModel,
)


@dataclass
class Job:
    job_id: str
    request: ExperimentRequest
    state: str = "queued"
    error: str | None = None
    result: ExperimentSummary | None = None
    thread: threading.Thread | None = field(default=None, repr=False)

    def status(self) -> JobStatus:
        return JobStatus(
            job_id=self.job_id, state=self.state, error=self.error, result=self.result
        )


class JobRegistry:
    def __init__(self):
        self._jobs: dict[str, Job] = {}
        self._lock = threading.Lock()

    def submit(self, request: ExperimentRequest) -> Job:
        cfg = request.to_config()  # validate before accepting the job
        job = Job(job_id=uuid.uuid4().hex[:12], request=request)

        def work():
            with self._lock:
                job.state = "running"
            try:
                result = run_experiment(cfg)
            except DbnError as exc:
                with self._lock:
                    job.error = str(exc)  # set before the state flips
                    job.state = "failed"
            else:
                with self._lock:
                    job.result = ExperimentSummary.from_result(result)
                    job.state = "done"

        job.thread = threading.Thread(target=work, daemon=True)
        with self._lock:
            self._jobs[job.job_id] = job
        job.thread.start()
        return job

    def get(self, job_id: str) -> Job | None:
        with self._lock:
            return self._jobs.get(job_id)

    def all(self) -> list[Job]:
        with self._lock:
            return list(self._jobs.values())


def create_app() -> FastAPI:
    app = FastAPI(title="dbnkit", version=__version__)
    registry = JobRegistry()
    app.state.registry = registry

    @app.get("/health", response_model=HealthResponse)
    def health():
        return HealthResponse(status="ok", version=__version__)

    @app.post("/experiments", response_model=JobStatus, status_code=202)
    def submit_experiment(request: ExperimentRequest):
        try:
            job = registry.submit(request)
        except DbnError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return job.status()

    @app.get("/experiments", response_model=list[JobStatus])
    def list_experiments():
        return [job.status() for job in registry.all()]

    @app.get("/experiments/{job_id}", response_model=JobStatus)
    def get_experiment(job_id: str):
        job = registry.get(job_id)
        if job is None:
            raise HTTPException(status_code=404, detail=f"no job {job_id}")
        return job.status()

    @app.get("/experiments/{job_id}/metrics", response_model=list[MetricsRowModel])
    def get_experiment_metrics(job_id: str):
        job = registry.get(job_id)
        if job is None:
            raise HTTPException(status_code=404, detail=f"no job {job_id}")
        if job.state != "done" or job.result is None:
            raise HTTPException(status_code=409, detail=f"job is {job.state}, not done")
        path = job.result.files.get("metrics", str(job.result.out_dir) + "/" + METRICS_FILE)
        try:
            rows = read_metrics(path)
        except DbnError as exc:
            raise HTTPException(status_code=500, detail=str(exc)) from exc
        return [MetricsRowModel.from_row(r) for r in rows]

    @app.post("/bench", response_model=BenchResponse)
    def run_bench_endpoint(request: BenchRequest):
        try:
            policies = [ParallelPolicy(max_threads=t) for t in request.threads]
            report = bench_kernels(policies, request.shapes, runs=request.runs)
        except (DbnError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        rows = [BenchRowModel(**vars(r)) for r in report.rows]
        return BenchResponse(rows=rows, csv_text=report.to_csv())

    return app


app = create_app()
