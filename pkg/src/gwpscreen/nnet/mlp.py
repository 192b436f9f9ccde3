"""Fully connected regressor trained by mini-batch Adam on mean-squared error."""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from gwpscreen.errors import InvalidHyperparameters, NonFiniteLoss, ShapeMismatch

log = logging.getLogger(__name__)

ACTIVATIONS = ("tanh", "sigmoid")
BETA1 = 0.9
BETA2 = 0.999
EPS = 1e-8


@dataclass(frozen=True)
class Hyperparameters:
    """Architecture and optimiser settings for one network."""

    n_layers: int
    n_neurons: int
    activation: str = "tanh"
    batch_size: int = 32
    epochs: int = 1000
    learning_rate: float = 1e-3
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_layers < 1:
            raise InvalidHyperparameters(f"n_layers must be >= 1, got {self.n_layers}")
        if self.n_neurons < 1:
            raise InvalidHyperparameters(f"n_neurons must be >= 1, got {self.n_neurons}")
        if self.activation not in ACTIVATIONS:
            raise InvalidHyperparameters(f"activation must be one of {ACTIVATIONS}, got {self.activation!r}")
        if self.batch_size < 1:
            raise InvalidHyperparameters(f"batch_size must be >= 1, got {self.batch_size}")
        if self.epochs < 1:
            raise InvalidHyperparameters(f"epochs must be >= 1, got {self.epochs}")
        if not (self.learning_rate > 0 and math.isfinite(self.learning_rate)):
            raise InvalidHyperparameters(f"learning_rate must be positive, got {self.learning_rate}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> Hyperparameters:
        return cls(**d)


def layer_layout(input_dim: int, hp: Hyperparameters) -> np.ndarray:
    """``(fan_in, fan_out)`` per layer, hidden layers then the linear output."""
    dims = [input_dim] + [hp.n_neurons] * hp.n_layers + [1]
    return np.array(list(zip(dims[:-1], dims[1:])), dtype=np.int64)


def n_parameters(layout: np.ndarray) -> int:
    return int(sum(i * o + o for i, o in layout))


@dataclass(eq=False)
class MlpModel:
    """Weights in one flat vector plus the per-epoch training loss history."""

    input_dim: int
    hp: Hyperparameters
    theta: np.ndarray
    loss_history: list[float] = field(default_factory=list)

    @property
    def layout(self) -> np.ndarray:
        return layer_layout(self.input_dim, self.hp)

    @property
    def act_code(self) -> int:
        return ACTIVATIONS.index(self.hp.activation)

    def layers(self) -> list[tuple[np.ndarray, np.ndarray]]:
        """``(W, b)`` views per layer; ``W`` is ``fan_out x fan_in``."""
        from gwpscreen.nnet import _fallback

        return _fallback.unpack(self.theta, self.layout)

    def predict(self, x) -> np.ndarray:
        return forward(self, x)

    def to_dict(self) -> dict:
        """Per-layer row-major weights with explicit shapes."""
        return {
            "input_dim": self.input_dim,
            "hyperparameters": self.hp.to_dict(),
            "layers": [
                {"weight_shape": list(w.shape), "weight": w.ravel().tolist(), "bias": b.tolist()}
                for w, b in self.layers()
            ],
            "loss_history": list(self.loss_history),
        }

    @classmethod
    def from_dict(cls, d: dict) -> MlpModel:
        hp = Hyperparameters.from_dict(d["hyperparameters"])
        input_dim = int(d["input_dim"])
        layout = layer_layout(input_dim, hp)
        if len(d["layers"]) != len(layout):
            raise ShapeMismatch("stored layer count does not match the architecture")
        parts = []
        for (fan_in, fan_out), layer in zip(layout, d["layers"]):
            w = np.array(layer["weight"], dtype=float)
            b = np.array(layer["bias"], dtype=float)
            if list(layer["weight_shape"]) != [fan_out, fan_in] or w.size != fan_in * fan_out or b.size != fan_out:
                raise ShapeMismatch("stored weights do not match the architecture")
            parts += [w, b]
        return cls(input_dim, hp, np.concatenate(parts), list(d.get("loss_history", [])))


def _streams(seed: int) -> tuple[np.random.Generator, np.random.Generator]:
    init_ss, shuffle_ss = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(init_ss), np.random.default_rng(shuffle_ss)


def mlp_init(input_dim: int, hp: Hyperparameters) -> MlpModel:
    """Glorot-uniform weights, zero biases, drawn from ``hp.seed``."""
    if input_dim < 1:
        raise InvalidHyperparameters(f"input_dim must be >= 1, got {input_dim}")
    layout = layer_layout(input_dim, hp)
    rng, _ = _streams(hp.seed)
    theta = np.zeros(n_parameters(layout))
    off = 0
    for fan_in, fan_out in layout:
        limit = math.sqrt(6.0 / (fan_in + fan_out))
        size = int(fan_in * fan_out)
        theta[off:off + size] = rng.uniform(-limit, limit, size)
        off += size + int(fan_out)
    return MlpModel(input_dim, hp, theta)


def _as_input(model: MlpModel, x) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != model.input_dim:
        raise ShapeMismatch(f"expected inputs with {model.input_dim} columns, got shape {np.shape(x)}")
    return np.ascontiguousarray(arr)


def forward(model: MlpModel, x) -> np.ndarray:
    """Predictions (on the training target scale) for each row of ``x``."""
    from gwpscreen.nnet import _fallback

    return _fallback.forward(model.theta, model.layout, _as_input(model, x), model.act_code)


def train(model: MlpModel, x, y, hp: Hyperparameters | None = None) -> MlpModel:
    """Train a copy of ``model``; the input model is left untouched.

    ``hp`` overrides the batch size, epoch count, learning rate and shuffle
    seed but must keep the architecture.  Rows are reshuffled each epoch
    from a generator seeded by ``hp.seed``, so repeated calls agree exactly.

    Raises:
        NonFiniteLoss: the epoch loss became NaN or infinite.
        ShapeMismatch: ``x`` and ``y`` disagree with each other or the model.
    """
    from gwpscreen.nnet import run_epoch

    hp = model.hp if hp is None else hp
    if (hp.n_layers, hp.n_neurons, hp.activation) != (model.hp.n_layers, model.hp.n_neurons, model.hp.activation):
        raise InvalidHyperparameters("hyperparameters change the architecture of the model")
    x = _as_input(model, x)
    y = np.ascontiguousarray(np.asarray(y, dtype=float).ravel())
    if y.shape[0] != x.shape[0]:
        raise ShapeMismatch(f"{x.shape[0]} input rows but {y.shape[0]} targets")
    if x.shape[0] == 0:
        raise ShapeMismatch("no training rows")
    theta = model.theta.copy()
    m = np.zeros_like(theta)
    v = np.zeros_like(theta)
    layout = model.layout
    _, shuffle = _streams(hp.seed)
    history = list(model.loss_history)
    t = 0
    code = model.act_code
    for epoch in range(hp.epochs):
        order = shuffle.permutation(x.shape[0]).astype(np.int64)
        loss, t = run_epoch(
            theta, m, v, t, layout, x, y, order, hp.batch_size, hp.learning_rate, BETA1, BETA2, EPS, code
        )
        if not math.isfinite(loss):
            raise NonFiniteLoss(epoch, loss)
        history.append(float(loss))
    log.debug("trained %s: final loss %.3g", hp, history[-1])
    return MlpModel(model.input_dim, hp, theta, history)


def adam_step(
    theta, grad, m, v, t: int, lr: float = 1e-3, beta1: float = BETA1, beta2: float = BETA2, eps: float = EPS
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """One bias-corrected Adam update at step ``t`` (1-based); returns new arrays.

    >>> theta, m, v = adam_step([1.0], [2.0], [0.0], [0.0], 1)
    >>> round(float(theta[0]), 4)
    0.999
    """
    theta, grad, m, v = (np.asarray(a, dtype=float) for a in (theta, grad, m, v))
    m = beta1 * m + (1.0 - beta1) * grad
    v = beta2 * v + (1.0 - beta2) * grad * grad
    m_hat = m / (1.0 - beta1**t)
    v_hat = v / (1.0 - beta2**t)
    return theta - lr * m_hat / (np.sqrt(v_hat) + eps), m, v
