"""A small feed-forward classifier with explicit forward/backward passes.

One ReLU hidden layer and a softmax output, all NumPy. What matters here is
not capacity but the loss plumbing: cross-entropy is produced per sample
(unreduced) so the policies can weight or select individual augmented
samples, and the backward pass takes an arbitrary per-sample weight vector.
Gradients are exact and are checked against finite differences in the test
suite.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericError, ShapeError
from .rng import RngStream

PROB_FLOOR = 1e-12


@dataclass
class ClassifierParams:
    """Weights and biases: input -> hidden (ReLU) -> classes (softmax)."""

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray

    FIELDS = ("w1", "b1", "w2", "b2")

    @classmethod
    def init(cls, n_inputs: int, n_hidden: int, n_classes: int, rng: RngStream) -> "ClassifierParams":
        """Uniform init in [-1/sqrt(fan_in), 1/sqrt(fan_in)], zero biases."""
        gen = rng.generator()
        lim1 = 1.0 / np.sqrt(n_inputs)
        lim2 = 1.0 / np.sqrt(n_hidden)
        return cls(
            w1=gen.uniform(-lim1, lim1, (n_inputs, n_hidden)),
            b1=np.zeros(n_hidden),
            w2=gen.uniform(-lim2, lim2, (n_hidden, n_classes)),
            b2=np.zeros(n_classes),
        )

    def arrays(self) -> dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in self.FIELDS}

    def copy(self) -> "ClassifierParams":
        return ClassifierParams(**{k: v.copy() for k, v in self.arrays().items()})

    @property
    def n_inputs(self) -> int:
        return self.w1.shape[0]

    @property
    def n_classes(self) -> int:
        return self.w2.shape[1]


@dataclass
class Gradients:
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray

    def arrays(self) -> dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in ClassifierParams.FIELDS}


@dataclass
class RmsState:
    """Per-parameter squared-gradient accumulators."""

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray

    @classmethod
    def zeros_like(cls, params: ClassifierParams) -> "RmsState":
        return cls(**{k: np.zeros_like(v) for k, v in params.arrays().items()})

    def arrays(self) -> dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in ClassifierParams.FIELDS}


@dataclass
class ForwardCache:
    """Activations retained for the backward pass."""

    x: np.ndarray
    z1: np.ndarray
    a1: np.ndarray
    probs: np.ndarray


def forward(params: ClassifierParams, x: np.ndarray) -> tuple[np.ndarray, ForwardCache]:
    """Batch forward pass; returns row-stochastic probabilities and the cache."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != params.w1.shape[0]:
        raise ShapeError(
            f"input must be (batch, {params.w1.shape[0]}), got {x.shape}"
        )
    z1 = x @ params.w1 + params.b1
    a1 = np.maximum(z1, 0.0)
    logits = a1 @ params.w2 + params.b2
    shifted = logits - logits.max(axis=1, keepdims=True) if x.shape[0] else logits
    e = np.exp(shifted)
    probs = e / e.sum(axis=1, keepdims=True) if x.shape[0] else e
    return probs, ForwardCache(x=x, z1=z1, a1=a1, probs=probs)


def per_sample_loss(probs: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Unreduced cross-entropy: -log p(true class), floored at PROB_FLOOR."""
    probs = np.asarray(probs, dtype=np.float64)
    labels = np.asarray(labels)
    if probs.ndim != 2 or labels.shape != (probs.shape[0],):
        raise ShapeError("probs must be (batch, classes) with one label per row")
    if probs.shape[0] and (labels.min() < 0 or labels.max() >= probs.shape[1]):
        raise DomainError("label out of range")
    p_true = probs[np.arange(probs.shape[0]), labels]
    return -np.log(np.maximum(p_true, PROB_FLOOR))


def backward(
    params: ClassifierParams,
    cache: ForwardCache,
    labels: np.ndarray,
    sample_weights: np.ndarray,
) -> Gradients:
    """Gradients of sum_i weight_i * loss_i with respect to every parameter.

    Rows whose true-class probability hit the floor contribute zero gradient
    (their clamped loss is constant).
    """
    labels = np.asarray(labels)
    sample_weights = np.asarray(sample_weights, dtype=np.float64)
    n = cache.probs.shape[0]
    if labels.shape != (n,) or sample_weights.shape != (n,):
        raise ShapeError("labels and sample_weights must match the batch size")

    rows = np.arange(n)
    dlogits = cache.probs.copy()
    dlogits[rows, labels] -= 1.0
    effective = np.where(
        cache.probs[rows, labels] < PROB_FLOOR, 0.0, sample_weights
    )
    dlogits *= effective[:, None]

    dw2 = cache.a1.T @ dlogits
    db2 = dlogits.sum(axis=0)
    da1 = dlogits @ params.w2.T
    dz1 = da1 * (cache.z1 > 0.0)
    dw1 = cache.x.T @ dz1
    db1 = dz1.sum(axis=0)
    return Gradients(w1=dw1, b1=db1, w2=dw2, b2=db2)


def rmsprop_update(
    theta: np.ndarray,
    grad: np.ndarray,
    accumulator: np.ndarray,
    lr: float,
    rho: float = 0.9,
    eps: float = 1e-8,
) -> None:
    """One in-place RMSProp step on a single array.

    v <- rho * v + (1 - rho) * g^2;  theta <- theta - lr * g / (sqrt(v) + eps)
    """
    if grad.shape != theta.shape or accumulator.shape != theta.shape:
        raise ShapeError("parameter, gradient and accumulator shapes must match")
    if not np.isfinite(grad).all():
        raise NumericError("non-finite gradient; step aborted")
    accumulator *= rho
    accumulator += (1.0 - rho) * grad * grad
    theta -= lr * grad / (np.sqrt(accumulator) + eps)


def rmsprop_step(
    params: ClassifierParams,
    grads: Gradients,
    state: RmsState,
    lr: float,
    rho: float = 0.9,
    eps: float = 1e-8,
) -> None:
    """Apply :func:`rmsprop_update` to every parameter array in place."""
    g = grads.arrays()
    v = state.arrays()
    for name, theta in params.arrays().items():
        if not np.isfinite(g[name]).all():
            raise NumericError(f"non-finite gradient for {name}; step aborted")
    for name, theta in params.arrays().items():
        rmsprop_update(theta, g[name], v[name], lr, rho, eps)


# ---------------------------------------------------------------------------
# Checkpoints: one-line JSON header (names, shapes, dtype) followed by the
# raw little-endian float64 bytes of each array in header order.
# ---------------------------------------------------------------------------

_CHECKPOINT_FORMAT = "adaptaug-checkpoint"


def save_params(path, params: ClassifierParams, provenance: dict | None = None) -> None:
    arrays = params.arrays()
    header = {
        "format": _CHECKPOINT_FORMAT,
        "version": 1,
        "dtype": "<f8",
        "arrays": [{"name": k, "shape": list(v.shape)} for k, v in arrays.items()],
    }
    if provenance:
        header["provenance"] = provenance
    with open(path, "wb") as fh:
        fh.write(json.dumps(header).encode("utf-8"))
        fh.write(b"\n")
        for v in arrays.values():
            fh.write(np.ascontiguousarray(v, dtype="<f8").tobytes())


def load_params(path) -> ClassifierParams:
    with open(path, "rb") as fh:
        header = json.loads(fh.readline().decode("utf-8"))
        if header.get("format") != _CHECKPOINT_FORMAT:
            raise DomainError(f"{path} is not a classifier checkpoint")
        loaded = {}
        for entry in header["arrays"]:
            shape = tuple(entry["shape"])
            count = int(np.prod(shape)) if shape else 1
            buf = fh.read(count * 8)
            loaded[entry["name"]] = np.frombuffer(buf, dtype="<f8").reshape(shape).copy()
    return ClassifierParams(**loaded)
