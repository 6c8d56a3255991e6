import hashlib
import socket
import subprocess
import sys
import threading
import time

import pytest
from click.testing import CliRunner

from dbnkit.cli import main
from dbnkit.pipeline import read_summary


@pytest.fixture
def runner():
    return CliRunner()


def test_help_lists_commands(runner):
    result = runner.invoke(main, ["--help"])
    assert result.exit_code == 0
    assert "run" in result.output and "serve" in result.output


def test_run_smoke(runner, synthetic_data_dir, tmp_path):
    out = tmp_path / "out"
    result = runner.invoke(
        main,
        [
            "run",
            "--arch", "16,8",
            "--data-dir", str(synthetic_data_dir),
            "--out-dir", str(out),
            "--epochs", "2",
            "--seed", "11",
            "--no-pretrain",
            "--limit-train", "500",
        ],
    )
    assert result.exit_code == 0, result.output
    assert "test_err = " in result.output
    assert (out / "model.dbnm").is_file()
    assert (out / "metrics.csv").is_file()
    summary = read_summary(out / "summary.txt")
    assert 0.0 <= summary["test_err"] <= 1.0


def test_run_missing_data_exits_nonzero(runner, tmp_path):
    result = runner.invoke(
        main,
        ["run", "--data-dir", str(tmp_path / "none"), "--out-dir", str(tmp_path / "o"),
         "--no-pretrain", "--epochs", "1"],
    )
    assert result.exit_code == 1
    assert "train-images" in result.output


def test_run_bad_arch_exits_nonzero(runner, synthetic_data_dir, tmp_path):
    result = runner.invoke(
        main,
        ["run", "--arch", "16,x,8", "--data-dir", str(synthetic_data_dir),
         "--out-dir", str(tmp_path / "o")],
    )
    assert result.exit_code == 1


def test_run_bench_writes_csv(runner, tmp_path):
    out = tmp_path / "bench-out"
    result = runner.invoke(
        main,
        ["run", "--bench", "--bench-shape", "48,48,48", "--threads", "2",
         "--out-dir", str(out)],
    )
    assert result.exit_code == 0, result.output
    assert result.output.startswith("kernel,m,k,n,threads,median_seconds,gflops,speedup")
    assert (out / "bench.csv").is_file()


def test_run_bench_bad_shape_exits_nonzero(runner, tmp_path):
    result = runner.invoke(
        main,
        ["run", "--bench", "--bench-shape", "48x48", "--out-dir", str(tmp_path)],
    )
    assert result.exit_code != 0
    assert "M,K,N" in result.output


def test_determinism_across_separate_processes(synthetic_data_dir, tmp_path):
    """Two fresh interpreter runs with the same seed write identical
    checkpoints; same-process reruns can mask state leaks, so shell out."""
    digests = []
    for name in ("p1", "p2"):
        out = tmp_path / name
        proc = subprocess.run(
            [
                sys.executable, "-m", "dbnkit.cli", "run",
                "--arch", "16,8",
                "--data-dir", str(synthetic_data_dir),
                "--out-dir", str(out),
                "--epochs", "1",
                "--seed", "5",
                "--no-pretrain",
                "--limit-train", "100",
            ],
            capture_output=True,
            text=True,
            timeout=120,
        )
        assert proc.returncode == 0, proc.stderr
        digests.append(hashlib.sha256((out / "model.dbnm").read_bytes()).hexdigest())
    assert digests[0] == digests[1]


@pytest.fixture
def live_server(small_synthetic_data_dir):
    """Real uvicorn instance on an ephemeral port."""
    import uvicorn

    from dbnkit.service import create_app

    sock = socket.socket()
    sock.bind(("127.0.0.1", 0))
    port = sock.getsockname()[1]
    sock.close()

    config = uvicorn.Config(create_app(), host="127.0.0.1", port=port, log_level="error")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.monotonic() + 10
    while not server.started:
        if time.monotonic() > deadline:
            raise TimeoutError("server did not start")
        time.sleep(0.02)
    yield f"http://127.0.0.1:{port}"
    server.should_exit = True
    thread.join(timeout=5)


def test_run_against_live_server(runner, live_server, small_synthetic_data_dir, tmp_path):
    out = tmp_path / "remote-out"
    result = runner.invoke(
        main,
        [
            "run",
            "--server", live_server,
            "--arch", "6,4",
            "--data-dir", str(small_synthetic_data_dir),
            "--out-dir", str(out),
            "--epochs", "1",
            "--no-pretrain",
            "--limit-train", "40",
        ],
    )
    assert result.exit_code == 0, result.output
    assert "test_err = " in result.output
    assert (out / "model.dbnm").is_file()


def test_bench_against_live_server(runner, live_server, tmp_path):
    result = runner.invoke(
        main,
        ["run", "--server", live_server, "--bench", "--bench-shape", "32,32,32",
         "--threads", "2", "--out-dir", str(tmp_path)],
    )
    assert result.exit_code == 0, result.output
    assert result.output.startswith("kernel,m,k,n,threads,median_seconds,gflops,speedup")
