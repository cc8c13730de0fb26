"""Two-class MLP trained from scratch with Adam.

One ReLU hidden layer of 100 units by default (the grid search may vary
depth and width), softmax output over (natural, emitted), mean
cross-entropy loss. Training shuffles with a seeded generator, evaluates
validation accuracy every epoch and returns the best-validation snapshot;
everything is float64 and bit-reproducible for a fixed seed.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass

import numpy as np

from ..errors import DimensionMismatch, NonFiniteLoss, SingleClassTrainingSet
from ..preprocess import EMITTED, NATURAL

CLASSES = (NATURAL, EMITTED)  # class index 0 = natural, 1 = emitted


@dataclass(frozen=True)
class MlpConfig:
    hidden_sizes: tuple[int, ...] = (100,)
    lr: float = 0.00005
    batch: int = 5000
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    max_epochs: int = 500
    patience: int = 20
    seed: int = 0
    optimizer: str = "adam"  # or "sgd"
    class_weighted: bool = False


@dataclass
class MlpModel:
    input_dim: int
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    config: MlpConfig

    @property
    def hidden_sizes(self) -> tuple[int, ...]:
        return tuple(w.shape[1] for w in self.weights[:-1])

    def n_params(self) -> int:
        return sum(w.size for w in self.weights) + sum(b.size for b in self.biases)


def param_count(input_dim: int, hidden_sizes: tuple[int, ...]) -> int:
    dims = [input_dim, *hidden_sizes, 2]
    return sum(dims[i] * dims[i + 1] + dims[i + 1] for i in range(len(dims) - 1))


def init_params(input_dim: int, hidden_sizes: tuple[int, ...],
                rng: np.random.Generator) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Glorot-uniform weights, zero biases."""
    dims = [input_dim, *hidden_sizes, 2]
    weights, biases = [], []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return weights, biases


def _forward(weights, biases, X):
    """Returns (hidden activations incl. input, logits)."""
    acts = [X]
    a = X
    for W, b in zip(weights[:-1], biases[:-1]):
        a = np.maximum(a @ W + b, 0.0)
        acts.append(a)
    return acts, a @ weights[-1] + biases[-1]


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def loss_and_grads(weights, biases, X, y, sample_weights=None):
    """Mean cross-entropy and its gradients w.r.t. every parameter."""
    n = len(X)
    acts, logits = _forward(weights, biases, X)
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_probs = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    if sample_weights is None:
        sample_weights = np.full(n, 1.0 / n)
    else:
        sample_weights = sample_weights / sample_weights.sum()
    loss = -float(np.sum(sample_weights * log_probs[np.arange(n), y]))

    dlogits = np.exp(log_probs)
    dlogits[np.arange(n), y] -= 1.0
    dlogits *= sample_weights[:, None]

    grads_w = [None] * len(weights)
    grads_b = [None] * len(biases)
    delta = dlogits
    for i in range(len(weights) - 1, -1, -1):
        grads_w[i] = acts[i].T @ delta
        grads_b[i] = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ weights[i].T) * (acts[i] > 0.0)
    return loss, grads_w, grads_b


class Adam:
    """Adam with bias correction: theta -= lr * m_hat / (sqrt(v_hat) + eps)."""

    def __init__(self, lr=0.00005, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.t = 0
        self._m = None
        self._v = None

    def step(self, params: list[np.ndarray], grads: list[np.ndarray]) -> None:
        if self._m is None:
            self._m = [np.zeros_like(p) for p in params]
            self._v = [np.zeros_like(p) for p in params]
        self.t += 1
        b1c = 1.0 - self.beta1 ** self.t
        b2c = 1.0 - self.beta2 ** self.t
        for p, g, m, v in zip(params, grads, self._m, self._v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.lr * (m / b1c) / (np.sqrt(v / b2c) + self.eps)


class Sgd:
    def __init__(self, lr=0.00005):
        self.lr = lr

    def step(self, params, grads):
        for p, g in zip(params, grads):
            p -= self.lr * g


def _accuracy(weights, biases, X, y) -> float:
    _, logits = _forward(weights, biases, X)
    # argmax with ties toward class 0 (natural)
    pred = (logits[:, 1] > logits[:, 0]).astype(int)
    return float(np.mean(pred == y))


def encode_labels(labels) -> np.ndarray:
    out = []
    for label in labels:
        if label not in CLASSES:
            raise ValueError(f"label {label!r} not in {CLASSES}")
        out.append(CLASSES.index(label))
    return np.array(out, dtype=int)


def train_mlp(X_train, y_train, X_val, y_val, cfg: MlpConfig = MlpConfig()):
    """Train and return (model at best validation accuracy, history).

    history = {"train_loss": [...], "val_acc": [...], "best_epoch": int}.
    Raises SingleClassTrainingSet, DimensionMismatch or NonFiniteLoss.
    """
    X_train = np.asarray(X_train, dtype=np.float64)
    X_val = np.asarray(X_val, dtype=np.float64)
    y_train = np.asarray(y_train, dtype=int)
    y_val = np.asarray(y_val, dtype=int)
    if X_train.ndim != 2 or X_val.ndim != 2 or X_train.shape[1] != X_val.shape[1]:
        raise DimensionMismatch(
            f"train/val dims disagree: {X_train.shape} vs {X_val.shape}"
        )
    if len(set(y_train.tolist())) < 2:
        raise SingleClassTrainingSet("training set contains a single class")

    rng = np.random.default_rng(cfg.seed)
    weights, biases = init_params(X_train.shape[1], cfg.hidden_sizes, rng)

    if cfg.class_weighted:
        counts = np.bincount(y_train, minlength=2)
        per_class = len(y_train) / (2.0 * np.maximum(counts, 1))
        sample_w_full = per_class[y_train]
    else:
        sample_w_full = None

    if cfg.optimizer == "adam":
        opt = Adam(cfg.lr, cfg.beta1, cfg.beta2, cfg.eps)
    elif cfg.optimizer == "sgd":
        opt = Sgd(cfg.lr)
    else:
        raise ValueError(f"unknown optimizer {cfg.optimizer!r}")

    best = {
        "val_acc": -1.0,
        "weights": copy.deepcopy(weights),
        "biases": copy.deepcopy(biases),
        "epoch": 0,
    }
    history = {"train_loss": [], "val_acc": [], "best_epoch": 0}
    since_improved = 0

    for epoch in range(1, cfg.max_epochs + 1):
        order = rng.permutation(len(X_train))
        epoch_loss = 0.0
        n_seen = 0
        for start in range(0, len(order), cfg.batch):
            idx = order[start:start + cfg.batch]
            sw = sample_w_full[idx] if sample_w_full is not None else None
            loss, gw, gb = loss_and_grads(
                weights, biases, X_train[idx], y_train[idx], sw
            )
            if not np.isfinite(loss):
                raise NonFiniteLoss(f"loss became non-finite at epoch {epoch}")
            opt.step(weights + biases, gw + gb)
            epoch_loss += loss * len(idx)
            n_seen += len(idx)
        if not all(np.all(np.isfinite(a)) for a in weights + biases):
            raise NonFiniteLoss(f"weights became non-finite at epoch {epoch}")

        val_acc = _accuracy(weights, biases, X_val, y_val)
        history["train_loss"].append(epoch_loss / n_seen)
        history["val_acc"].append(val_acc)

        if val_acc > best["val_acc"]:
            best.update(
                val_acc=val_acc,
                weights=copy.deepcopy(weights),
                biases=copy.deepcopy(biases),
                epoch=epoch,
            )
            since_improved = 0
        else:
            since_improved += 1
            if since_improved >= cfg.patience:
                break

    history["best_epoch"] = best["epoch"]
    model = MlpModel(
        input_dim=X_train.shape[1],
        weights=best["weights"],
        biases=best["biases"],
        config=cfg,
    )
    return model, history


def predict_proba(model: MlpModel, X: np.ndarray) -> np.ndarray:
    """Softmax probabilities, shape (n, 2); columns (natural, emitted)."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != model.input_dim:
        raise DimensionMismatch(
            f"input dim {X.shape[1]} does not match model dim {model.input_dim}"
        )
    _, logits = _forward(model.weights, model.biases, X)
    return softmax(logits)


def predict_mlp(model: MlpModel, x: np.ndarray) -> tuple[np.ndarray, str]:
    """Probability pair and argmax label for one vector; ties go to natural."""
    probs = predict_proba(model, x)[0]
    return probs, CLASSES[int(probs[1] > probs[0])]


def predict_labels(model: MlpModel, X: np.ndarray) -> np.ndarray:
    probs = predict_proba(model, X)
    return (probs[:, 1] > probs[:, 0]).astype(int)
