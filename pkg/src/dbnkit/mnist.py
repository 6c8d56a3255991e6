"""MNIST IDX ingestion: bit-exact parsing, pixel normalization, splits.

IDX layout (normative, big-endian): an image file is magic 0x00000803,
count, rows, cols (four u32) followed by count*rows*cols unsigned pixel
bytes, row-major per image; a label file is magic 0x00000801 and count
followed by count label bytes. Files must be uncompressed and contain
exactly the promised number of bytes.

Pixels map to doubles via ``pixel / 127.5 - 1.0``, so 0 (background)
becomes -1.0 and 255 (full ink) becomes 1.0.
"""

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    CountMismatch,
    LabelOutOfRange,
    MissingDataFile,
    TrailingBytes,
    Truncated,
    ValidationTooLarge,
    WrongMagic,
)
from .rng import Rng

IMAGES_MAGIC = 0x00000803
LABELS_MAGIC = 0x00000801

TRAIN_IMAGES = "train-images-idx3-ubyte"
TRAIN_LABELS = "train-labels-idx1-ubyte"
TEST_IMAGES = "t10k-images-idx3-ubyte"
TEST_LABELS = "t10k-labels-idx1-ubyte"

DEFAULT_VALIDATION_COUNT = 10_000


@dataclass
class RawIdxImages:
    count: int
    rows: int
    cols: int
    pixels: bytes


@dataclass
class RawIdxLabels:
    count: int
    labels: bytes


@dataclass
class Dataset:
    """Normalized samples in [-1, 1] with integer labels."""

    samples: np.ndarray  # (n, d) float64
    labels: np.ndarray  # (n,) int64, values 0..9

    def __post_init__(self):
        if self.samples.shape[0] != self.labels.shape[0]:
            raise CountMismatch(
                f"{self.samples.shape[0]} samples vs {self.labels.shape[0]} labels"
            )

    def __len__(self) -> int:
        return self.samples.shape[0]

    @property
    def feature_count(self) -> int:
        return self.samples.shape[1]

    def take(self, n: int) -> "Dataset":
        """First n samples, original order."""
        return Dataset(self.samples[:n], self.labels[:n])


@dataclass
class SplitSpec:
    validation_count: int
    shuffle_seed: int | None = None


def parse_idx_images(data: bytes) -> RawIdxImages:
    """Parse an uncompressed IDX image file."""
    if len(data) < 16:
        raise Truncated(f"image header needs 16 bytes, got {len(data)}")
    magic, count, rows, cols = struct.unpack(">IIII", data[:16])
    if magic != IMAGES_MAGIC:
        raise WrongMagic(f"expected 0x{IMAGES_MAGIC:08x}, got 0x{magic:08x}")
    expected = 16 + count * rows * cols
    if len(data) < expected:
        raise Truncated(f"expected {expected} bytes, got {len(data)}")
    if len(data) > expected:
        raise TrailingBytes(f"expected {expected} bytes, got {len(data)}")
    return RawIdxImages(count, rows, cols, data[16:])


def parse_idx_labels(data: bytes) -> RawIdxLabels:
    """Parse an uncompressed IDX label file."""
    if len(data) < 8:
        raise Truncated(f"label header needs 8 bytes, got {len(data)}")
    magic, count = struct.unpack(">II", data[:8])
    if magic != LABELS_MAGIC:
        raise WrongMagic(f"expected 0x{LABELS_MAGIC:08x}, got 0x{magic:08x}")
    expected = 8 + count
    if len(data) < expected:
        raise Truncated(f"expected {expected} bytes, got {len(data)}")
    if len(data) > expected:
        raise TrailingBytes(f"expected {expected} bytes, got {len(data)}")
    labels = data[8:]
    for i, v in enumerate(labels):
        if v > 9:
            raise LabelOutOfRange(f"label {v} at index {i}")
    return RawIdxLabels(count, labels)


def serialize_idx_images(raw: RawIdxImages) -> bytes:
    """Inverse of parse_idx_images, byte-exact."""
    return struct.pack(">IIII", IMAGES_MAGIC, raw.count, raw.rows, raw.cols) + raw.pixels


def serialize_idx_labels(raw: RawIdxLabels) -> bytes:
    """Inverse of parse_idx_labels, byte-exact."""
    return struct.pack(">II", LABELS_MAGIC, raw.count) + raw.labels


def normalize(raw: RawIdxImages, raw_labels: RawIdxLabels) -> Dataset:
    """Map pixels to [-1, 1] doubles and pair them with labels."""
    if raw.count != raw_labels.count:
        raise CountMismatch(f"{raw.count} images vs {raw_labels.count} labels")
    pixels = np.frombuffer(raw.pixels, dtype=np.uint8).astype(np.float64)
    samples = pixels / 127.5 - 1.0
    samples = samples.reshape(raw.count, raw.rows * raw.cols)
    labels = np.frombuffer(raw_labels.labels, dtype=np.uint8).astype(np.int64)
    return Dataset(samples, labels)


def denormalize(x):
    """Inverse pixel map, exact for all byte values: (x + 1) * 127.5."""
    return (np.asarray(x) + 1.0) * 127.5


def split_train_validation(full: Dataset, spec: SplitSpec) -> tuple[Dataset, Dataset]:
    """Split off the last ``validation_count`` samples.

    Without a seed the original order is preserved: the first
    n - validation_count samples train, the rest validate. With a seed a
    seeded permutation is applied before the order-based split.
    """
    n = len(full)
    v = spec.validation_count
    if v > n:
        raise ValidationTooLarge(f"validation_count {v} > dataset size {n}")
    samples, labels = full.samples, full.labels
    if spec.shuffle_seed is not None:
        perm = Rng(spec.shuffle_seed).permutation(n)
        samples, labels = samples[perm], labels[perm]
    cut = n - v
    return (
        Dataset(samples[:cut], labels[:cut]),
        Dataset(samples[cut:], labels[cut:]),
    )


def load_dataset(images_path: Path, labels_path: Path) -> Dataset:
    """Parse and normalize one images/labels file pair."""
    for p in (images_path, labels_path):
        if not Path(p).is_file():
            raise MissingDataFile(str(p))
    raw_images = parse_idx_images(Path(images_path).read_bytes())
    raw_labels = parse_idx_labels(Path(labels_path).read_bytes())
    return normalize(raw_images, raw_labels)


def load_mnist(data_dir: Path) -> tuple[Dataset, Dataset]:
    """Load (train, test) from a directory holding the canonical files."""
    data_dir = Path(data_dir)
    train = load_dataset(data_dir / TRAIN_IMAGES, data_dir / TRAIN_LABELS)
    test = load_dataset(data_dir / TEST_IMAGES, data_dir / TEST_LABELS)
    return train, test
