"""Command-line front-end.

``dbnkit run`` executes one experiment (or the kernel benchmark with
``--bench``) in-process by default; with ``--server`` it becomes a thin
HTTP client that submits the job to a running ``dbnkit serve`` instance
and polls until completion. Paths are interpreted on whichever machine
does the work.
"""

import sys
import time

import click

from . import __version__
from .errors import DbnError
from .pipeline import ExperimentConfig, parse_arch, run_bench, run_experiment


@click.group()
@click.version_option(version=__version__)
def main():
    """Deep belief network training toolkit."""


@main.command("run")
@click.option("--arch", default="500, 300", show_default=True,
              help="Hidden layer sizes: '1000, 500' or repetition '9 x 1000'.")
@click.option("--data-dir", default="data", show_default=True,
              help="Directory with the four canonical MNIST IDX files.")
@click.option("--out-dir", default="out", show_default=True,
              help="Where metrics.csv, model.dbnm, summary.txt land.")
@click.option("--epochs", default=30, show_default=True)
@click.option("--lr-start", default=1e-3, show_default=True)
@click.option("--lr-end", default=1e-6, show_default=True)
@click.option("--weight-decay", default=0.01, show_default=True)
@click.option("--seed", default=42, show_default=True)
@click.option("--pretrain/--no-pretrain", default=True, show_default=True,
              help="Greedy RBM pretraining before fine-tuning.")
@click.option("--pretrain-epochs", default=10, show_default=True)
@click.option("--threads", default=1, show_default=True,
              help="Worker threads for the parallel kernels.")
@click.option("--limit-train", default=None, type=int,
              help="Desk-scale subsetting: first N training samples "
                   "(validation shrinks to N/5).")
@click.option("--bench", is_flag=True,
              help="Run the serial-vs-parallel kernel benchmark instead of training.")
@click.option("--bench-shape", default="1024,1024,1024", show_default=True,
              metavar="M,K,N", help="Matrix shape for --bench.")
@click.option("--server", default=None, metavar="URL",
              help="Submit to a dbnkit server instead of running locally.")
def run(arch, data_dir, out_dir, epochs, lr_start, lr_end, weight_decay, seed,
        pretrain, pretrain_epochs, threads, limit_train, bench, bench_shape, server):
    """Run one experiment (load, split, pretrain, fine-tune, select, test)."""
    if server is not None:
        _run_remote(server, arch, data_dir, out_dir, epochs, lr_start, lr_end,
                    weight_decay, seed, pretrain, pretrain_epochs, threads,
                    limit_train, bench, bench_shape)
        return
    try:
        if bench:
            report = run_bench(out_dir, threads=threads, shapes=[_parse_shape(bench_shape)])
            click.echo(report.to_csv(), nl=False)
            return
        cfg = ExperimentConfig(
            arch=parse_arch(arch),
            data_dir=data_dir,
            out_dir=out_dir,
            epochs=epochs,
            lr_start=lr_start,
            lr_end=lr_end,
            weight_decay=weight_decay,
            seed=seed,
            pretrain=pretrain,
            pretrain_epochs=pretrain_epochs,
            threads=threads,
            limit_train=limit_train,
        )
        result = run_experiment(cfg)
    except DbnError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    _echo_summary(
        selected_epoch=result.selected_epoch,
        valid_err=result.valid_err,
        test_err=result.test_err,
        best_test_err=result.best_test_err,
        best_test_epoch=result.best_test_epoch,
        wall_seconds=round(result.wall_seconds, 3),
        wall_hours=round(result.wall_hours, 1),
    )


def _echo_summary(**kv):
    for key, value in kv.items():
        click.echo(f"{key} = {value}")


def _parse_shape(text: str) -> tuple[int, int, int]:
    try:
        m, k, n = (int(t) for t in text.split(","))
    except ValueError:
        raise click.BadParameter(f"expected M,K,N integers, got {text!r}") from None
    if min(m, k, n) < 0:
        raise click.BadParameter("shape dimensions must be non-negative")
    return m, k, n


def _run_remote(server, arch, data_dir, out_dir, epochs, lr_start, lr_end,
                weight_decay, seed, pretrain, pretrain_epochs, threads,
                limit_train, bench, bench_shape):
    import httpx

    base = server.rstrip("/")
    try:
        if bench:
            resp = httpx.post(
                f"{base}/bench",
                json={"shapes": [_parse_shape(bench_shape)],
                      "threads": sorted({1, threads}), "runs": 5},
                timeout=600.0,
            )
            resp.raise_for_status()
            click.echo(resp.json()["csv_text"], nl=False)
            return
        body = {
            "arch": arch, "data_dir": data_dir, "out_dir": out_dir,
            "epochs": epochs, "lr_start": lr_start, "lr_end": lr_end,
            "weight_decay": weight_decay, "seed": seed, "pretrain": pretrain,
            "pretrain_epochs": pretrain_epochs, "threads": threads,
            "limit_train": limit_train,
        }
        resp = httpx.post(f"{base}/experiments", json=body, timeout=60.0)
        resp.raise_for_status()
        job_id = resp.json()["job_id"]
        click.echo(f"job {job_id} submitted", err=True)
        while True:
            status = httpx.get(f"{base}/experiments/{job_id}", timeout=60.0)
            status.raise_for_status()
            payload = status.json()
            if payload["state"] in ("done", "failed"):
                break
            time.sleep(1.0)
    except httpx.HTTPError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    if payload["state"] == "failed":
        click.echo(f"error: {payload['error']}", err=True)
        sys.exit(1)
    _echo_summary(**{k: v for k, v in payload["result"].items() if k != "files"})


@main.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
def serve(host, port):
    """Start the experiment job-runner HTTP service."""
    import uvicorn

    uvicorn.run("dbnkit.service.app:app", host=host, port=port)


if __name__ == "__main__":
    main()
