import struct
from pathlib import Path

import numpy as np
import pytest

import dbnkit  # noqa: F401  (pins the BLAS pool before numpy kernels run)
from dbnkit import mnist


def idx_image_bytes(count, rows, cols, pixels):
    """Hand-packed IDX image file."""
    return struct.pack(">IIII", 0x00000803, count, rows, cols) + bytes(pixels)


def idx_label_bytes(labels):
    """Hand-packed IDX label file."""
    return struct.pack(">II", 0x00000801, len(labels)) + bytes(labels)


def synthetic_digits(n, rows=28, cols=28, seed=0):
    """Learnable stand-in digit data: one bright pixel block per class.

    Returns (pixels uint8 array (n, rows*cols), labels uint8 array (n,)).
    """
    gen = np.random.default_rng(seed)
    d = rows * cols
    labels = np.arange(n, dtype=np.uint8) % 10
    block = max(1, d // 10)
    pixels = np.full((n, d), 30, dtype=np.int64)
    for i, lab in enumerate(labels):
        lo = int(lab) * block
        pixels[i, lo : lo + block] = 220
    pixels = pixels + gen.integers(-30, 31, size=(n, d))
    return np.clip(pixels, 0, 255).astype(np.uint8), labels


def write_idx_dir(dir_path, n_train=600, n_test=100, rows=28, cols=28, seed=0):
    """Write the four canonical IDX files with synthetic digits."""
    dir_path = Path(dir_path)
    dir_path.mkdir(parents=True, exist_ok=True)
    train_px, train_lab = synthetic_digits(n_train, rows, cols, seed)
    test_px, test_lab = synthetic_digits(n_test, rows, cols, seed + 1)
    (dir_path / mnist.TRAIN_IMAGES).write_bytes(
        idx_image_bytes(n_train, rows, cols, train_px.tobytes())
    )
    (dir_path / mnist.TRAIN_LABELS).write_bytes(idx_label_bytes(train_lab.tobytes()))
    (dir_path / mnist.TEST_IMAGES).write_bytes(
        idx_image_bytes(n_test, rows, cols, test_px.tobytes())
    )
    (dir_path / mnist.TEST_LABELS).write_bytes(idx_label_bytes(test_lab.tobytes()))
    return dir_path


@pytest.fixture
def synthetic_data_dir(tmp_path):
    return write_idx_dir(tmp_path / "data")


@pytest.fixture
def small_synthetic_data_dir(tmp_path):
    """4x4 images: cheap enough for pretraining tests."""
    return write_idx_dir(tmp_path / "small", n_train=80, n_test=30, rows=4, cols=4)
