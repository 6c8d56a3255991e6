"""Online backpropagation fine-tuning with model selection.

Updates are strictly sequential with batch size 1 and no momentum. The
learning rate decays geometrically across epochs between the configured
endpoints (1e-3 down to 1e-6 by default), weight decay is an L2 term
folded into each step and never applied to biases, and the kept model is
the parameter snapshot with the lowest validation error seen so far
(ties keep the earlier epoch).
"""

import time
from dataclasses import dataclass

import numpy as np

from .errors import EmptyData, EpochOutOfRange, LabelOutOfRange, ShapeMismatch
from .layers import (
    NetworkParams,
    activate,
    Gradients,
    loss_mse,
    network_backward,
    network_forward,
)
from .linalg import ParallelPolicy, SERIAL, matmul, transpose
from .rng import Rng, derive_seed


@dataclass
class TrainConfig:
    epochs: int = 30
    lr_start: float = 1e-3
    lr_end: float = 1e-6
    weight_decay: float = 0.01
    shuffle_seed: int = 0
    init_lo: float = -0.05
    init_hi: float = 0.05

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if not 0 < self.lr_end <= self.lr_start:
            raise ValueError("need 0 < lr_end <= lr_start")
        if self.weight_decay < 0:
            raise ValueError("weight_decay must be >= 0")


@dataclass
class EpochMetrics:
    epoch: int
    learning_rate: float
    train_loss: float
    train_err: float
    valid_err: float
    seconds: float


@dataclass
class SelectionState:
    best_params: NetworkParams
    best_validation_error: float
    best_epoch: int


def lr_at_epoch(cfg: TrainConfig, e: int) -> float:
    """Geometric interpolation hitting lr_start at 0 and lr_end at the last epoch."""
    if not 0 <= e < cfg.epochs:
        raise EpochOutOfRange(f"epoch {e} outside 0..{cfg.epochs - 1}")
    if cfg.epochs == 1:
        return cfg.lr_start
    return cfg.lr_start * (cfg.lr_end / cfg.lr_start) ** (e / (cfg.epochs - 1))


def sgd_step(
    params: NetworkParams, grads: Gradients, lr: float, weight_decay: float
) -> NetworkParams:
    """One in-place step: w -= lr*(g + weight_decay*w); biases decay-free."""
    if len(grads.d_weights) != len(params.layers):
        raise ShapeMismatch("gradient layer count != network layer count")
    for layer, gw, gb in zip(params.layers, grads.d_weights, grads.d_biases):
        if gw.shape != layer.weights.shape or gb.shape != layer.bias.shape:
            raise ShapeMismatch("gradient shapes do not match layer")
        layer.weights -= lr * (gw + weight_decay * layer.weights)
        layer.bias -= lr * gb
    return params


def train_epoch(
    params: NetworkParams, train, cfg: TrainConfig, e: int
) -> tuple[NetworkParams, float, float]:
    """One online pass in a freshly seeded order.

    The visit order is the Fisher-Yates permutation seeded with
    ``derive_seed(cfg.shuffle_seed, e)``. Returns the updated params,
    the mean per-sample loss, and the running-classification error rate
    (both measured on the evolving network during the pass).
    """
    n = len(train)
    if n == 0:
        raise EmptyData("no training samples")
    lr = lr_at_epoch(cfg, e)
    perm = Rng(derive_seed(cfg.shuffle_seed, e)).permutation(n)
    n_out = params.layers[-1].fan_out
    targets = [np.full(n_out, -1.0) for _ in range(n_out)]
    for k in range(n_out):
        targets[k][k] = 1.0
    total_loss = 0.0
    wrong = 0
    for idx in perm:
        x = train.samples[idx]
        label = int(train.labels[idx])
        if label >= n_out:
            raise LabelOutOfRange(f"label {label} >= network outputs {n_out}")
        trace = network_forward(params, x)
        output = trace.post_activations[-1]
        total_loss += loss_mse(output, targets[label])
        if int(np.argmax(output)) != label:
            wrong += 1
        grads = network_backward(params, trace, targets[label])
        sgd_step(params, grads, lr, cfg.weight_decay)
    return params, total_loss / n, wrong / n


def evaluate(params: NetworkParams, data, policy: ParallelPolicy = SERIAL) -> float:
    """Fraction misclassified: argmax of the outputs vs the label.

    Runs the whole set through batched kernels (read-only params, fixed
    row blocks, integer aggregation), so the result is deterministic for
    any thread count. Ties pick the lowest class index.
    """
    if len(data) == 0:
        raise EmptyData("no evaluation samples")
    acts = data.samples
    for layer in params.layers:
        pre = matmul(acts, transpose(layer.weights), policy) + layer.bias
        acts = activate(layer.activation, pre)
    preds = np.argmax(acts, axis=1)
    return float(np.mean(preds != data.labels))


def fit(
    initial: NetworkParams,
    train,
    valid,
    cfg: TrainConfig,
    policy: ParallelPolicy = SERIAL,
    on_epoch=None,
) -> tuple[SelectionState, list[EpochMetrics]]:
    """Train for cfg.epochs, snapshotting the lowest-validation-error model.

    ``on_epoch(e, params)`` runs after each epoch's evaluation; the
    harness uses it for extra reporting (e.g. per-epoch test error).
    """
    if len(train) == 0 or len(valid) == 0:
        raise EmptyData("train and validation sets must be non-empty")
    params = initial
    metrics: list[EpochMetrics] = []
    best: SelectionState | None = None
    for e in range(cfg.epochs):
        t0 = time.perf_counter()
        params, mean_loss, train_err = train_epoch(params, train, cfg, e)
        valid_err = evaluate(params, valid, policy)
        seconds = time.perf_counter() - t0
        metrics.append(
            EpochMetrics(e, lr_at_epoch(cfg, e), mean_loss, train_err, valid_err, seconds)
        )
        if best is None or valid_err < best.best_validation_error:
            best = SelectionState(params.copy(), valid_err, e)
        if on_epoch is not None:
            on_epoch(e, params)
    return best, metrics
