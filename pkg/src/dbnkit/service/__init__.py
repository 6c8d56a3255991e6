"""HTTP job-runner service wrapping the training pipeline."""

from .app import create_app

__all__ = ["create_app"]
