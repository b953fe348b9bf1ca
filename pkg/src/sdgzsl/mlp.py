"""Trainable MLP that projects feature vectors into the semantic space.

The network is fit on seen-class instances only, regressing each
instance onto its class embedding with mean squared error:

    loss = (1/N) * sum_i || f(x_i) - z_{y_i} ||^2

Plain SGD, deterministic given the config seed: weight init and epoch
shuffles both come from one SplitMix64 stream.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .data import GzslDataset
from .errors import DatasetLoadError, DivergenceError, DomainError, ShapeError, ValidationError
from .linalg import matmul
from .rng import SplitMix64

_ACTIVATIONS = ("relu", "linear")


@dataclass
class MlpParams:
    """Layer weights (out x in), biases (out), and activation tags."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]
    activations: list[str]

    @property
    def in_dim(self) -> int:
        return self.weights[0].shape[1]

    @property
    def out_dim(self) -> int:
        return self.weights[-1].shape[0]

    def layer_sizes(self) -> list[int]:
        return [self.in_dim] + [w.shape[0] for w in self.weights]

    def validate(self) -> "MlpParams":
        if not (len(self.weights) == len(self.biases) == len(self.activations)):
            raise ValidationError("weights, biases, activations must have equal length")
        if not self.weights:
            raise ValidationError("network needs at least one layer")
        for k, (w, b, act) in enumerate(zip(self.weights, self.biases, self.activations)):
            if w.ndim != 2 or b.shape != (w.shape[0],):
                raise ValidationError(f"layer {k}: weight {w.shape} and bias {b.shape} mismatch")
            if k > 0 and w.shape[1] != self.weights[k - 1].shape[0]:
                raise ValidationError(
                    f"layer {k}: input dim {w.shape[1]} != previous output "
                    f"{self.weights[k - 1].shape[0]}"
                )
            if act not in _ACTIVATIONS:
                raise ValidationError(f"layer {k}: unknown activation {act!r}")
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise ValidationError(f"layer {k}: non-finite parameters")
        return self

    def freeze(self) -> "MlpParams":
        for w, b in zip(self.weights, self.biases):
            w.setflags(write=False)
            b.setflags(write=False)
        return self


@dataclass
class TrainConfig:
    learning_rate: float = 1e-2
    epochs: int = 100
    batch_size: int = 64
    seed: int = 0
    hidden_sizes: list[int] | None = None  # None -> one hidden layer of max(d, S)

    def validate(self) -> "TrainConfig":
        problems = []
        if not self.learning_rate > 0:
            problems.append(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.epochs < 1:
            problems.append(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            problems.append(f"batch_size must be >= 1, got {self.batch_size}")
        if self.hidden_sizes is not None and any(h < 1 for h in self.hidden_sizes):
            problems.append(f"hidden sizes must be >= 1, got {self.hidden_sizes}")
        if problems:
            raise ValidationError("invalid TrainConfig: " + "; ".join(problems))
        return self


def init_params(in_dim: int, hidden_sizes: list[int], out_dim: int, rng: SplitMix64) -> MlpParams:
    """Glorot-uniform init, ReLU on hidden layers, linear output."""
    sizes = [in_dim] + list(hidden_sizes) + [out_dim]
    weights, biases, acts = [], [], []
    for k in range(len(sizes) - 1):
        fan_in, fan_out = sizes[k], sizes[k + 1]
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform_array(-bound, bound, (fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
        acts.append("linear" if k == len(sizes) - 2 else "relu")
    return MlpParams(weights, biases, acts).validate()


def _apply_act(pre: np.ndarray, act: str) -> np.ndarray:
    return np.maximum(pre, 0.0) if act == "relu" else pre


def forward_batch(params: MlpParams, x: np.ndarray) -> np.ndarray:
    """Project a batch of feature rows into the semantic space."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != params.in_dim:
        raise ShapeError(f"forward: batch shape {x.shape} incompatible with input dim {params.in_dim}")
    h = x
    for w, b, act in zip(params.weights, params.biases, params.activations):
        h = _apply_act(matmul(h, w.T) + b, act)
    return h


def forward(params: MlpParams, x: np.ndarray) -> np.ndarray:
    """Project a single feature vector."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ShapeError(f"forward: expected a vector, got shape {x.shape}")
    return forward_batch(params, x[None, :])[0]


def mse_loss(params: MlpParams, xs: np.ndarray, zs: np.ndarray) -> float:
    """Mean over instances of the squared projection error."""
    xs = np.asarray(xs, dtype=np.float64)
    zs = np.asarray(zs, dtype=np.float64)
    if xs.ndim != 2 or zs.ndim != 2 or xs.shape[0] != zs.shape[0]:
        raise ShapeError(f"mse_loss: rows of {xs.shape} and {zs.shape} must match")
    if zs.shape[1] != params.out_dim:
        raise ShapeError(f"mse_loss: target dim {zs.shape[1]} != output dim {params.out_dim}")
    diff = forward_batch(params, xs) - zs
    return float(np.mean(np.sum(diff * diff, axis=1)))


def backward(params: MlpParams, xs: np.ndarray, zs: np.ndarray):
    """Analytic gradient of ``mse_loss`` over the batch.

    Returns (weight grads, bias grads) shaped like the parameters.
    """
    xs = np.asarray(xs, dtype=np.float64)
    zs = np.asarray(zs, dtype=np.float64)
    if xs.ndim != 2 or zs.ndim != 2 or xs.shape[0] != zs.shape[0]:
        raise ShapeError(f"backward: rows of {xs.shape} and {zs.shape} must match")
    if xs.shape[1] != params.in_dim or zs.shape[1] != params.out_dim:
        raise ShapeError(
            f"backward: batch dims {xs.shape[1]}->{zs.shape[1]} incompatible with "
            f"network {params.in_dim}->{params.out_dim}"
        )
    n = xs.shape[0]
    pres, acts = [], [xs]
    h = xs
    for w, b, act in zip(params.weights, params.biases, params.activations):
        pre = matmul(h, w.T) + b
        h = _apply_act(pre, act)
        pres.append(pre)
        acts.append(h)

    d_out = 2.0 * (acts[-1] - zs) / n
    grad_w = [np.empty(0)] * len(params.weights)
    grad_b = [np.empty(0)] * len(params.biases)
    for k in range(len(params.weights) - 1, -1, -1):
        d_pre = d_out if params.activations[k] == "linear" else d_out * (pres[k] > 0.0)
        grad_w[k] = matmul(d_pre.T, acts[k])
        grad_b[k] = d_pre.sum(axis=0)
        if k > 0:
            d_out = matmul(d_pre, params.weights[k])
    return grad_w, grad_b


def train(dataset: GzslDataset, cfg: TrainConfig) -> tuple[MlpParams, list[float]]:
    """Mini-batch SGD on seen training instances against their class embeddings.

    Returns the trained parameters and the per-epoch full-training-set
    loss history (length ``cfg.epochs``).
    """
    cfg.validate()
    xs = dataset.seen_train_x
    if xs.shape[0] == 0:
        raise ValidationError("train: seen_train split is empty")
    zs = dataset.seen_emb[dataset.seen_train_y]
    d, s = dataset.feature_dim, dataset.semantic_dim
    hidden = [max(d, s)] if cfg.hidden_sizes is None else list(cfg.hidden_sizes)

    rng = SplitMix64(cfg.seed)
    params = init_params(d, hidden, s, rng)
    n = xs.shape[0]
    history: list[float] = []
    for epoch in range(cfg.epochs):
        perm = rng.permutation(n)
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                for start in range(0, n, cfg.batch_size):
                    idx = perm[start : start + cfg.batch_size]
                    gw, gb = backward(params, xs[idx], zs[idx])
                    for w, b, dw, db in zip(params.weights, params.biases, gw, gb):
                        w -= cfg.learning_rate * dw
                        b -= cfg.learning_rate * db
                loss = mse_loss(params, xs, zs)
        except DomainError:
            # overflow inside a product surfaces as a substrate finiteness error
            loss = float("nan")
        if not np.isfinite(loss):
            raise DivergenceError(
                f"non-finite training loss at epoch {epoch} "
                f"(learning_rate={cfg.learning_rate}); reduce the learning rate"
            )
        history.append(loss)
    return params.validate().freeze(), history


def save_checkpoint(params: MlpParams, path, seed: int | None = None,
                    unified_norm: float | None = None) -> Path:
    """Text header (shapes, activations, seed, norm) + f64 LE parameter blob."""
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    header = {
        "layers": [[int(w.shape[0]), int(w.shape[1])] for w in params.weights],
        "activations": list(params.activations),
        "seed": seed,
        "l": unified_norm,
    }
    blob = b"".join(
        np.ascontiguousarray(a, dtype="<f8").tobytes()
        for w, b in zip(params.weights, params.biases)
        for a in (w, b)
    )
    with open(out, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode() + b"\n")
        fh.write(blob)
    return out


def load_checkpoint(path) -> tuple[MlpParams, dict]:
    """Exact round-trip of :func:`save_checkpoint`; returns (params, header)."""
    p = Path(path)
    if not p.is_file():
        raise DatasetLoadError(f"{p}: missing checkpoint file")
    blob = p.read_bytes()
    nl = blob.find(b"\n")
    if nl < 0:
        raise DatasetLoadError(f"{p}: missing checkpoint header line")
    try:
        header = json.loads(blob[:nl].decode())
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise DatasetLoadError(f"{p}: invalid checkpoint header ({exc})") from exc
    body = blob[nl + 1 :]
    layers = header.get("layers")
    acts = header.get("activations")
    if not layers or not acts or len(layers) != len(acts):
        raise DatasetLoadError(f"{p}: malformed checkpoint header")
    expected = sum(o * i + o for o, i in layers) * 8
    if len(body) != expected:
        raise DatasetLoadError(f"{p}: expected {expected} blob bytes, got {len(body)}")
    weights, biases, offset = [], [], 0
    for o, i in layers:
        w = np.frombuffer(body, dtype="<f8", count=o * i, offset=offset).reshape(o, i).copy()
        offset += o * i * 8
        b = np.frombuffer(body, dtype="<f8", count=o, offset=offset).copy()
        offset += o * 8
        weights.append(w)
        biases.append(b)
    params = MlpParams(weights, biases, list(acts)).validate().freeze()
    return params, header
