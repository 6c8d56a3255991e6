import time

import pytest
from fastapi.testclient import TestClient

from dbnkit import __version__
from dbnkit.service import create_app
from dbnkit.service.app import Job
from dbnkit.service.schemas import ExperimentRequest


@pytest.fixture
def client():
    return TestClient(create_app())


def _wait_done(client, job_id, timeout=60.0):
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        payload = client.get(f"/experiments/{job_id}").json()
        if payload["state"] in ("done", "failed"):
            return payload
        time.sleep(0.05)
    raise TimeoutError(f"job {job_id} did not finish")


def test_health(client):
    resp = client.get("/health")
    assert resp.status_code == 200
    assert resp.json() == {"status": "ok", "version": __version__}


def test_submit_poll_and_metrics(client, small_synthetic_data_dir, tmp_path):
    body = {
        "arch": "6, 4",
        "data_dir": str(small_synthetic_data_dir),
        "out_dir": str(tmp_path / "out"),
        "epochs": 2,
        "seed": 5,
        "pretrain": True,
        "pretrain_epochs": 1,
        "limit_train": 40,
    }
    resp = client.post("/experiments", json=body)
    assert resp.status_code == 202
    job_id = resp.json()["job_id"]
    assert resp.json()["state"] in ("queued", "running")

    payload = _wait_done(client, job_id)
    assert payload["state"] == "done", payload
    result = payload["result"]
    assert 0.0 <= result["test_err"] <= 1.0
    assert result["selected_epoch"] in (0, 1)
    assert (tmp_path / "out" / "model.dbnm").is_file()

    rows = client.get(f"/experiments/{job_id}/metrics").json()
    phases = {r["phase"] for r in rows}
    assert phases == {"pretrain", "finetune"}
    pre = [r for r in rows if r["phase"] == "pretrain"]
    assert all(r["train_err"] is None for r in pre)  # JSON null, not NaN

    listing = client.get("/experiments").json()
    assert any(j["job_id"] == job_id for j in listing)


def test_submit_invalid_arch_rejected(client, tmp_path):
    body = {"arch": "abc", "data_dir": str(tmp_path), "out_dir": str(tmp_path / "o")}
    resp = client.post("/experiments", json=body)
    assert resp.status_code == 422


def test_submit_missing_data_dir_fails_job(client, tmp_path):
    body = {
        "arch": "4",
        "data_dir": str(tmp_path / "no-such-dir"),
        "out_dir": str(tmp_path / "o"),
        "epochs": 1,
        "pretrain": False,
    }
    resp = client.post("/experiments", json=body)
    assert resp.status_code == 202
    payload = _wait_done(client, resp.json()["job_id"])
    assert payload["state"] == "failed"
    assert "train-images" in payload["error"]


def test_unknown_job(client):
    assert client.get("/experiments/deadbeef").status_code == 404
    assert client.get("/experiments/deadbeef/metrics").status_code == 404


def test_metrics_before_done_conflicts(client, tmp_path):
    app = client.app
    registry = app.state.registry
    job = Job(job_id="pending1", request=ExperimentRequest(data_dir=".", out_dir="."))
    with registry._lock:
        registry._jobs[job.job_id] = job
    assert client.get("/experiments/pending1/metrics").status_code == 409


def test_bench_endpoint(client):
    resp = client.post("/bench", json={"shapes": [[32, 32, 32]], "threads": [1, 2], "runs": 3})
    assert resp.status_code == 200
    payload = resp.json()
    assert len(payload["rows"]) == 2
    assert payload["csv_text"].startswith("kernel,m,k,n,threads,median_seconds,gflops,speedup")
    for row in payload["rows"]:
        assert row["kernel"] == "matmul"
        assert row["median_seconds"] > 0


def test_bench_validation(client):
    resp = client.post("/bench", json={"shapes": [[8, 8, 8]], "threads": [0]})
    assert resp.status_code == 422
