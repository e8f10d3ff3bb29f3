"""Two-layer perceptron policies for the captor agents.

Each captor owns one small MLP: tanh hidden layer, five logistic output
units (one per direction). The outputs are independent sigmoids rather
than a softmax, so several directions can be active at once. Training is
full-batch Adam on the mean per-output binary cross-entropy against
one-hot targets; networks are rebuilt from scratch on every retrain
because the hidden width grows with the data volume.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

N_OUTPUTS = 5

LEARNING_RATE = 0.05
TRAIN_ITERATIONS = 200
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8
MIN_HIDDEN = 4
MAX_HIDDEN = 30

_CLIP = 1e-12


class DimensionMismatchError(ValueError):
    """Input shape does not match the network."""


class EmptyTrainingSetError(ValueError):
    """A batch or training set was empty."""


@dataclass
class MLPParams:
    """Weights and biases of one captor policy (also reused for gradients).

    ``w1`` is (hidden, input), ``w2`` is (5, hidden); biases are 1-D.
    """

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray

    @property
    def hidden_count(self) -> int:
        return self.w1.shape[0]

    @property
    def input_dim(self) -> int:
        return self.w1.shape[1]

    def copy(self) -> "MLPParams":
        return MLPParams(self.w1.copy(), self.b1.copy(), self.w2.copy(), self.b2.copy())


def hidden_units_for(n_samples: int) -> int:
    """Hidden width schedule: ceil(sqrt(n)) clamped to [4, 30]."""
    if n_samples < 0:
        raise ValueError("sample count must be non-negative")
    return int(min(max(math.ceil(math.sqrt(n_samples)), MIN_HIDDEN), MAX_HIDDEN))


def init_mlp(input_dim: int, hidden_count: int, rng: np.random.Generator) -> MLPParams:
    """Uniform weights in [-1/sqrt(fan_in), 1/sqrt(fan_in)], zero biases."""
    if input_dim < 1 or hidden_count < 1:
        raise ValueError("dimensions must be at least 1")
    bound1 = 1.0 / math.sqrt(input_dim)
    bound2 = 1.0 / math.sqrt(hidden_count)
    return MLPParams(
        w1=rng.uniform(-bound1, bound1, size=(hidden_count, input_dim)),
        b1=np.zeros(hidden_count),
        w2=rng.uniform(-bound2, bound2, size=(N_OUTPUTS, hidden_count)),
        b2=np.zeros(N_OUTPUTS),
    )


def zero_mlp(input_dim: int, hidden_count: int) -> MLPParams:
    """All-zero network; every output is exactly 0.5."""
    return MLPParams(
        w1=np.zeros((hidden_count, input_dim)),
        b1=np.zeros(hidden_count),
        w2=np.zeros((N_OUTPUTS, hidden_count)),
        b2=np.zeros(N_OUTPUTS),
    )


def _sigmoid(z: np.ndarray) -> np.ndarray:
    # Stable in both tails.
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def forward(params: MLPParams, x: np.ndarray) -> np.ndarray:
    """Single forward pass: five outputs strictly in (0, 1)."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (params.input_dim,):
        raise DimensionMismatchError(
            f"expected input of shape ({params.input_dim},), got {x.shape}"
        )
    hidden = np.tanh(params.w1 @ x + params.b1)
    return _sigmoid(params.w2 @ hidden + params.b2)


def _forward_batch(params: MLPParams, features: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    hidden = np.tanh(features @ params.w1.T + params.b1)
    outputs = _sigmoid(hidden @ params.w2.T + params.b2)
    return hidden, outputs


def _check_batch(params: MLPParams, features: np.ndarray, targets: np.ndarray) -> None:
    if features.ndim != 2 or features.shape[0] == 0:
        raise EmptyTrainingSetError("batch must contain at least one example")
    if features.shape[1] != params.input_dim or targets.shape != (features.shape[0], N_OUTPUTS):
        raise DimensionMismatchError(
            f"batch shapes {features.shape}/{targets.shape} do not match network"
        )


def loss(params: MLPParams, features: np.ndarray, targets: np.ndarray) -> float:
    """Mean per-output binary cross-entropy over the batch."""
    features = np.asarray(features, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    _check_batch(params, features, targets)
    _, outputs = _forward_batch(params, features)
    clipped = np.clip(outputs, _CLIP, 1.0 - _CLIP)
    bce = -(targets * np.log(clipped) + (1.0 - targets) * np.log1p(-clipped))
    return float(bce.mean())


def _loss_and_gradient(
    params: MLPParams, features: np.ndarray, targets: np.ndarray
) -> tuple[float, MLPParams]:
    hidden, outputs = _forward_batch(params, features)
    clipped = np.clip(outputs, _CLIP, 1.0 - _CLIP)
    bce = -(targets * np.log(clipped) + (1.0 - targets) * np.log1p(-clipped))
    # d(mean BCE)/d(output logit) = (y - t) / (N * 5)
    dz2 = (outputs - targets) / targets.size
    gw2 = dz2.T @ hidden
    gb2 = dz2.sum(axis=0)
    dhidden = dz2 @ params.w2
    dz1 = dhidden * (1.0 - hidden * hidden)
    gw1 = dz1.T @ features
    gb1 = dz1.sum(axis=0)
    return float(bce.mean()), MLPParams(gw1, gb1, gw2, gb2)


def gradient(params: MLPParams, features: np.ndarray, targets: np.ndarray) -> MLPParams:
    """Exact analytic gradient of the mean loss, same shapes as the params."""
    features = np.asarray(features, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    _check_batch(params, features, targets)
    _, grads = _loss_and_gradient(params, features, targets)
    return grads


def _adam_step(
    value: np.ndarray, grad: np.ndarray, m: np.ndarray, v: np.ndarray, t: int
) -> None:
    m *= ADAM_BETA1
    m += (1.0 - ADAM_BETA1) * grad
    v *= ADAM_BETA2
    v += (1.0 - ADAM_BETA2) * (grad * grad)
    m_hat = m / (1.0 - ADAM_BETA1**t)
    v_hat = v / (1.0 - ADAM_BETA2**t)
    value -= LEARNING_RATE * m_hat / (np.sqrt(v_hat) + ADAM_EPS)


def train(
    features: np.ndarray, targets: np.ndarray, rng: np.random.Generator
) -> MLPParams:
    """Train a fresh network on the whole set; returns the best params seen.

    Hidden width follows hidden_units_for(n); the optimiser is full-batch
    Adam for a fixed iteration budget. Keeping the lowest-loss iterate
    guarantees final loss <= initial loss.
    """
    features = np.asarray(features, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if features.ndim != 2 or features.shape[0] == 0:
        raise EmptyTrainingSetError("training set must contain at least one example")
    n = features.shape[0]
    params = init_mlp(features.shape[1], hidden_units_for(n), rng)
    _check_batch(params, features, targets)

    slots = ("w1", "b1", "w2", "b2")
    m = {s: np.zeros_like(getattr(params, s)) for s in slots}
    v = {s: np.zeros_like(getattr(params, s)) for s in slots}
    best = params.copy()
    best_loss = math.inf
    for t in range(1, TRAIN_ITERATIONS + 1):
        current_loss, grads = _loss_and_gradient(params, features, targets)
        if current_loss < best_loss:
            best_loss = current_loss
            best = params.copy()
        for s in slots:
            _adam_step(getattr(params, s), getattr(grads, s), m[s], v[s], t)
    if loss(params, features, targets) < best_loss:
        best = params
    return best


def params_to_dict(params: MLPParams) -> dict:
    """Flat JSON-ready dict; weight matrices flattened row-major."""
    return {
        "hidden_count": params.hidden_count,
        "w1": params.w1.ravel().tolist(),
        "b1": params.b1.tolist(),
        "w2": params.w2.ravel().tolist(),
        "b2": params.b2.tolist(),
    }


def params_from_dict(data: dict) -> MLPParams:
    hidden = int(data["hidden_count"])
    w1 = np.asarray(data["w1"], dtype=np.float64).reshape(hidden, -1)
    w2 = np.asarray(data["w2"], dtype=np.float64).reshape(N_OUTPUTS, hidden)
    b1 = np.asarray(data["b1"], dtype=np.float64)
    b2 = np.asarray(data["b2"], dtype=np.float64)
    if b1.shape != (hidden,) or b2.shape != (N_OUTPUTS,):
        raise DimensionMismatchError("bias lengths do not match hidden_count")
    return MLPParams(w1, b1, w2, b2)


def save_params(params: MLPParams, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(params_to_dict(params), fh)


def load_params(path: str) -> MLPParams:
    with open(path, "r", encoding="utf-8") as fh:
        return params_from_dict(json.load(fh))
