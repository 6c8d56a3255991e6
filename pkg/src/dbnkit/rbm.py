"""Gaussian-visible / rectified-hidden RBMs trained with CD-1.

Hidden units are noisy rectified linear: a hidden pre-activation x
samples as ``max(0, x + eps)`` with ``eps ~ N(0, sigmoid(x))`` (variance
given by the logistic of x), and its mean-field value is ``max(0, x)``.
Visible units are Gaussian with fixed unit variance around the linear
mean, matching data normalized to [-1, 1]. One contrastive-divergence
step reconstructs once; the negative-phase hidden statistics always use
the mean-field value.

Machines stack greedily: each one trains on the mean-field hidden
activations of the one below, and the stack converts into a feedforward
network initialization for fine-tuning.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import BadSizes, EmptyData, EmptyStack, ShapeMismatch
from .layers import Activation, DenseLayer, NetworkParams
from .linalg import uniform_init
from .rng import Rng, derive_seed

INIT_LO = -0.05
INIT_HI = 0.05


def _sigmoid(x):
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


@dataclass
class Rbm:
    weights: np.ndarray  # (n_hidden, n_visible)
    vis_bias: np.ndarray  # (n_visible,)
    hid_bias: np.ndarray  # (n_hidden,)
    vis_kind: str = "gaussian_unit_variance"
    hid_kind: str = "rectified_noisy"

    def __post_init__(self):
        if self.vis_bias.shape[0] != self.weights.shape[1]:
            raise ShapeMismatch("vis_bias length != n_visible")
        if self.hid_bias.shape[0] != self.weights.shape[0]:
            raise ShapeMismatch("hid_bias length != n_hidden")

    @property
    def n_visible(self) -> int:
        return self.weights.shape[1]

    @property
    def n_hidden(self) -> int:
        return self.weights.shape[0]


@dataclass
class CdConfig:
    learning_rate: float = 1e-3
    epochs: int = 10
    weight_decay: float = 0.01
    sample_hidden: bool = True  # noisy units; False runs fully mean-field
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be >= 0")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.weight_decay < 0:
            raise ValueError("weight_decay must be >= 0")


@dataclass
class ParameterDelta:
    d_weights: np.ndarray
    d_vis_bias: np.ndarray
    d_hid_bias: np.ndarray


@dataclass
class PretrainReport:
    reconstruction_errors: list[float] = field(default_factory=list)
    wall_seconds: float = 0.0


def hidden_mean(rbm: Rbm, v: np.ndarray) -> np.ndarray:
    """Mean-field rectified hidden activation max(0, W v + c)."""
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (rbm.n_visible,):
        raise ShapeMismatch(f"visible shape {v.shape} != ({rbm.n_visible},)")
    return np.maximum(0.0, rbm.weights @ v + rbm.hid_bias)


def hidden_sample(rbm: Rbm, v: np.ndarray, rng: Rng) -> np.ndarray:
    """Noisy rectified sample max(0, x + eps), eps ~ N(0, sigmoid(x)).

    Consumes one standard-normal draw per hidden unit, in unit order.
    """
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (rbm.n_visible,):
        raise ShapeMismatch(f"visible shape {v.shape} != ({rbm.n_visible},)")
    x = rbm.weights @ v + rbm.hid_bias
    eps = np.sqrt(_sigmoid(x)) * rng.gaussians(rbm.n_hidden)
    return np.maximum(0.0, x + eps)


def visible_reconstruct(rbm: Rbm, h: np.ndarray, rng: Rng, sample: bool) -> np.ndarray:
    """Visible mean W^T h + b, plus unit-variance Gaussian noise if sampling."""
    h = np.asarray(h, dtype=np.float64)
    if h.shape != (rbm.n_hidden,):
        raise ShapeMismatch(f"hidden shape {h.shape} != ({rbm.n_hidden},)")
    mu = rbm.weights.T @ h + rbm.vis_bias
    if sample:
        return mu + rng.gaussians(rbm.n_visible)
    return mu


def _cd1(rbm: Rbm, v0: np.ndarray, cfg: CdConfig, rng: Rng):
    """One CD-1 step; returns (delta, squared mean-field reconstruction error)."""
    if cfg.sample_hidden:
        h0 = hidden_sample(rbm, v0, rng)
        v1 = visible_reconstruct(rbm, h0, rng, sample=True)
        v1_mean = rbm.weights.T @ h0 + rbm.vis_bias
    else:
        h0 = hidden_mean(rbm, v0)
        v1 = visible_reconstruct(rbm, h0, rng, sample=False)
        v1_mean = v1
    h1 = hidden_mean(rbm, v1)
    eta = cfg.learning_rate
    d_weights = eta * (np.outer(h0, v0) - np.outer(h1, v1)) - eta * cfg.weight_decay * rbm.weights
    d_vis_bias = eta * (v0 - v1)
    d_hid_bias = eta * (h0 - h1)
    err = v0 - v1_mean
    return ParameterDelta(d_weights, d_vis_bias, d_hid_bias), float(err @ err) / rbm.n_visible


def cd1_update(rbm: Rbm, v0: np.ndarray, cfg: CdConfig, rng: Rng) -> ParameterDelta:
    """Parameter deltas for one CD-1 step on one data vector (not applied)."""
    v0 = np.asarray(v0, dtype=np.float64)
    if v0.shape != (rbm.n_visible,):
        raise ShapeMismatch(f"visible shape {v0.shape} != ({rbm.n_visible},)")
    delta, _ = _cd1(rbm, v0, cfg, rng)
    return delta


def train_rbm(
    data: np.ndarray, shape: tuple[int, int], cfg: CdConfig
) -> tuple[Rbm, PretrainReport]:
    """Online CD-1 training over ``data`` rows.

    Weights start uniform on [-0.05, 0.05), biases at zero. Every epoch
    reshuffles with the single sequential stream seeded by ``cfg.seed``
    (draw order: init, then per epoch one permutation followed by the
    per-sample noise). The report tracks per-epoch mean squared
    mean-field reconstruction error per visible unit.
    """
    data = np.asarray(data, dtype=np.float64)
    n_visible, n_hidden = shape
    if data.ndim != 2 or data.shape[1] != n_visible:
        raise ShapeMismatch(f"data shape {data.shape} incompatible with n_visible {n_visible}")
    if data.shape[0] == 0:
        raise EmptyData("no training samples")
    rng = Rng(cfg.seed)
    rbm = Rbm(
        weights=uniform_init(rng, n_hidden, n_visible, INIT_LO, INIT_HI),
        vis_bias=np.zeros(n_visible),
        hid_bias=np.zeros(n_hidden),
    )
    report = PretrainReport()
    t0 = time.perf_counter()
    for _ in range(cfg.epochs):
        perm = rng.permutation(data.shape[0])
        total = 0.0
        for idx in perm:
            delta, sq_err = _cd1(rbm, data[idx], cfg, rng)
            rbm.weights += delta.d_weights
            rbm.vis_bias += delta.d_vis_bias
            rbm.hid_bias += delta.d_hid_bias
            total += sq_err
        report.reconstruction_errors.append(total / data.shape[0])
    report.wall_seconds = time.perf_counter() - t0
    return rbm, report


def greedy_stack(layer_sizes: list[int], data: np.ndarray, cfg: CdConfig) -> list[Rbm]:
    """Train a stack bottom-up, feeding mean-field activations upward.

    ``layer_sizes`` runs [n_visible, h1, h2, ...]. The first machine
    trains with cfg.seed itself (a single-entry stack therefore equals
    train_rbm on the same config); machine i > 0 trains with
    ``derive_seed(cfg.seed, i)``.
    """
    if len(layer_sizes) < 2:
        raise BadSizes("need at least [n_visible, n_hidden]")
    data = np.asarray(data, dtype=np.float64)
    if data.shape[0] == 0:
        raise EmptyData("no training samples")
    if data.shape[1] != layer_sizes[0]:
        raise ShapeMismatch(
            f"data has {data.shape[1]} features, layer_sizes[0] is {layer_sizes[0]}"
        )
    stack = []
    current = data
    for i, (n_vis, n_hid) in enumerate(zip(layer_sizes, layer_sizes[1:])):
        layer_cfg = CdConfig(
            learning_rate=cfg.learning_rate,
            epochs=cfg.epochs,
            weight_decay=cfg.weight_decay,
            sample_hidden=cfg.sample_hidden,
            seed=cfg.seed if i == 0 else derive_seed(cfg.seed, i),
        )
        rbm, _ = train_rbm(current, (n_vis, n_hid), layer_cfg)
        stack.append(rbm)
        current = np.maximum(0.0, current @ rbm.weights.T + rbm.hid_bias)
    return stack


def to_network(stack: list[Rbm], n_outputs: int, rng: Rng) -> NetworkParams:
    """Stack weights as a feedforward initialization plus a fresh output layer.

    Pretrained weights and hidden biases are copied verbatim; the
    fine-tuned network applies the scaled-tanh nonlinearity everywhere,
    including the appended uniform-initialized output layer.
    """
    if not stack:
        raise EmptyStack("no pretrained machines")
    if n_outputs < 1:
        raise ValueError("n_outputs must be >= 1")
    layers = [
        DenseLayer(
            weights=rbm.weights.copy(),
            bias=rbm.hid_bias.copy(),
            activation=Activation.SCALED_TANH,
        )
        for rbm in stack
    ]
    layers.append(
        DenseLayer(
            weights=uniform_init(rng, n_outputs, stack[-1].n_hidden, INIT_LO, INIT_HI),
            bias=np.zeros(n_outputs),
            activation=Activation.SCALED_TANH,
        )
    )
    return NetworkParams(layers)
