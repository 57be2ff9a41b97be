"""
Perceptron readout: element-wise sigmoid over W^T x, trained by per-sample
SGD on the binary cross-entropy of the C sigmoid outputs against a one-hot
label. Only this layer is trained; the reservoir has no learned parameters.
"""
import logging
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np
import numpy.typing as npt

from src.entities.training import TrainConfig

FloatArray = npt.NDArray[np.float64]

INIT_SCALE = 0.01
_LOSS_EPSILON = 1e-12
_LOG_EVERY_EPOCHS = 10

_logger = logging.getLogger(__name__)

class ReadoutError(ValueError):
    pass

def sigmoid(z: npt.ArrayLike) -> FloatArray:
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(z, dtype=np.float64)))

class ReadoutModel:
    """
    N x C weight matrix (one extra constant-input row when `bias` is on).
    """

    def __init__(self, weights: FloatArray, seed: Optional[int] = None, bias: bool = False):
        if weights.ndim != 2 or not np.all(np.isfinite(weights)):
            raise ReadoutError("Readout weights must be a finite 2D matrix.")
        self.weights = weights
        self.seed = seed
        self.bias = bias

    @property
    def feature_count(self) -> int:
        return self.weights.shape[0] - (1 if self.bias else 0)

    @property
    def class_count(self) -> int:
        return self.weights.shape[1]

    def copy(self) -> 'ReadoutModel':
        return ReadoutModel(self.weights.copy(), seed=self.seed, bias=self.bias)

    def _inputs(self, x: npt.ArrayLike) -> FloatArray:
        values = np.asarray(x, dtype=np.float64)
        if values.shape[-1] != self.feature_count:
            raise ReadoutError(f"Expected {self.feature_count} features, got {values.shape[-1]}")
        if self.bias:
            ones = np.ones(values.shape[:-1] + (1,), dtype=np.float64)
            values = np.concatenate([values, ones], axis=-1)
        return values

def init(n: int, c: int, seed: int, bias: bool = False) -> ReadoutModel:
    """
    Weights drawn i.i.d. uniform on [-0.01, 0.01] from a generator seeded with `seed`.
    """
    if n < 1 or c < 1:
        raise ReadoutError(f"Readout shape must be at least 1x1, got {n}x{c}")
    rng = np.random.default_rng(seed)
    rows = n + (1 if bias else 0)
    return ReadoutModel(rng.uniform(-INIT_SCALE, INIT_SCALE, size=(rows, c)), seed=seed, bias=bias)

def forward(model: ReadoutModel, x: npt.ArrayLike) -> FloatArray:
    """
    Class probabilities sigmoid(x W); works on one vector or a (samples, N) batch.
    """
    return sigmoid(model._inputs(x) @ model.weights)

def one_hot(labels: npt.ArrayLike, c: int) -> FloatArray:
    indices = np.asarray(labels, dtype=np.int64)
    encoded = np.zeros(indices.shape + (c,), dtype=np.float64)
    np.put_along_axis(encoded, indices[..., None], 1.0, axis=-1)
    return encoded

def bce_loss(model: ReadoutModel, x: npt.ArrayLike, targets: npt.ArrayLike) -> float:
    """
    Binary cross-entropy summed over the C outputs, averaged over samples.
    """
    y = np.clip(forward(model, x), _LOSS_EPSILON, 1.0 - _LOSS_EPSILON)
    t = np.asarray(targets, dtype=np.float64)
    per_output = -(t * np.log(y) + (1.0 - t) * np.log(1.0 - y))
    return float(np.mean(np.sum(per_output, axis=-1)))

def sgd_step(model: ReadoutModel, x: npt.ArrayLike, label: npt.ArrayLike, lr: float) -> ReadoutModel:
    """
    W <- W - lr * (x outer (forward(x) - label)), in place.
    """
    inputs = model._inputs(x)
    error = sigmoid(inputs @ model.weights) - np.asarray(label, dtype=np.float64)
    model.weights -= lr * np.outer(inputs, error)
    return model

def train(
        model: ReadoutModel,
        features: npt.ArrayLike,
        labels: npt.ArrayLike,
        cfg: TrainConfig
) -> Tuple[ReadoutModel, List[float]]:
    """
    Per-sample SGD for `cfg.epochs` epochs, reshuffling each epoch when asked.

    Returns the trained model (updated in place) and the loss trace: the mean
    BCE before training followed by the mean BCE after every epoch.
    """
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise ReadoutError("Training needs a non-empty (samples, features) matrix.")
    if y.shape != (x.shape[0],):
        raise ReadoutError(f"Got {y.shape[0]} labels for {x.shape[0]} samples.")

    inputs = model._inputs(x)
    targets = one_hot(y, model.class_count)
    weights = model.weights
    rng = np.random.default_rng(cfg.seed)

    losses = [bce_loss(model, x, targets)]
    _logger.info(
        f"Training readout {weights.shape[0]}x{weights.shape[1]} on {x.shape[0]} samples "
        f"for {cfg.epochs} epochs (lr={cfg.learning_rate}), initial loss {losses[0]:.4f}"
    )

    order = np.arange(x.shape[0])
    for epoch in range(1, cfg.epochs + 1):
        if cfg.shuffle:
            order = rng.permutation(x.shape[0])
        for index in order:
            sample = inputs[index]
            error = sigmoid(sample @ weights) - targets[index]
            weights -= cfg.learning_rate * np.outer(sample, error)

        losses.append(bce_loss(model, x, targets))
        if epoch % _LOG_EVERY_EPOCHS == 0 or epoch == cfg.epochs:
            _logger.info(f"Epoch {epoch}/{cfg.epochs}: mean BCE {losses[-1]:.4f}")

    return model, losses

def predict(model: ReadoutModel, features: npt.ArrayLike) -> npt.NDArray[np.int64]:
    # argmax keeps the lowest class index on ties
    return np.argmax(forward(model, features), axis=-1)

def evaluate(model: ReadoutModel, features: npt.ArrayLike, labels: npt.ArrayLike) -> float:
    y = np.asarray(labels, dtype=np.int64)
    if y.size == 0:
        raise ReadoutError("Cannot evaluate on an empty dataset.")
    return float(np.mean(predict(model, features) == y))

def save_weights(model: ReadoutModel, path: Path) -> None:
    """
    CSV artifact; the header line holds the matrix shape as "rows,cols".
    """
    path.parent.mkdir(parents=True, exist_ok=True)
    rows, cols = model.weights.shape
    np.savetxt(path, model.weights, delimiter=",", fmt="%.17g", header=f"{rows},{cols}", comments="")

def load_weights(path: Path, bias: bool = False) -> ReadoutModel:
    with open(path, encoding="utf-8") as f:
        header = f.readline().strip()
        try:
            rows, cols = (int(value) for value in header.split(","))
        except ValueError as e:
            raise ReadoutError(f"Missing shape header in {path}: {header!r}") from e
        weights = np.loadtxt(f, delimiter=",", dtype=np.float64, ndmin=2)

    if weights.shape != (rows, cols):
        raise ReadoutError(f"{path} declares shape {rows}x{cols} but holds {weights.shape}")
    return ReadoutModel(weights, bias=bias)
