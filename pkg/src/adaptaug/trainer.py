"""Mini-batch training loop wiring data, transforms, policies and the model.

Per batch, the configured policy decides what the model sees:

* ``weighted`` / ``trimmed``: every sample fans out into one row per catalog
  entry (identity first, sample-major layout), the per-row cross-entropies
  form a (batch x variants) loss matrix, and the policy turns that matrix
  into per-row backward weights.
* ``random``: one uniformly chosen transform is applied to the whole batch.
* ``none``: plain training on the raw batch.

Early stopping and learning-rate reduction are both driven by validation
loss; the parameters returned are always the best-validation snapshot.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from . import model as M
from . import policy as P
from .data import Dataset
from .errors import DomainError, NumericError, ShapeError
from .rng import RngStream
from .transforms import apply

# Stream lanes keep shuffling, augmentation draws and batch-level transform
# picks statistically independent of one another.
LANE_SHUFFLE = 0
LANE_AUGMENT = 1
LANE_PICK = 2


@dataclass(frozen=True)
class TrainConfig:
    policy: P.PolicyConfig
    batch_size: int = 128
    learning_rate: float = 1e-3
    max_epochs: int = 200
    early_stop_patience: int = 10
    plateau_patience: int = 50
    plateau_factor: float = 0.5
    min_lr: float = 0.0
    rho: float = 0.9
    eps: float = 1e-8
    hidden_units: int = 32
    freeze_policy_weights: bool = False
    seed: int = 0

    def __post_init__(self) -> None:
        if self.batch_size < 1:
            raise DomainError("batch_size must be >= 1")
        if self.early_stop_patience < 1 or self.plateau_patience < 1:
            raise DomainError("patience values must be >= 1")
        if not 0.0 < self.plateau_factor < 1.0:
            raise DomainError("plateau_factor must lie in (0, 1)")


@dataclass
class EpochStats:
    epoch: int
    train_loss: float
    train_acc: float
    val_loss: float
    val_acc: float
    lr: float


@dataclass
class TrainReport:
    epochs: list[EpochStats] = field(default_factory=list)
    weight_trace: list[list[float]] = field(default_factory=list)
    selection_counts: list[list[int]] = field(default_factory=list)
    batch_picks: list[int] = field(default_factory=list)
    transform_ids: list[str] = field(default_factory=list)
    best_epoch: int = -1
    stopped_epoch: int = -1
    forward_loss_count: int = 0
    wall_clock_s: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)

    def comparable_dict(self) -> dict:
        """Everything except wall clock, for reproducibility assertions."""
        d = self.to_dict()
        d.pop("wall_clock_s")
        return d


@dataclass
class EvalResult:
    accuracy: float
    f1: float
    probs: np.ndarray


def epoch_order(rng_root: RngStream, epoch: int, n: int) -> np.ndarray:
    """Deterministic reshuffle of sample indices for one epoch."""
    return rng_root.child(LANE_SHUFFLE, epoch).generator().permutation(n)


def expand_batch(
    samples,
    transforms,
    aug_root: RngStream,
    epoch: int,
    batch_idx: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Fan each sample out into one row per transform (sample-major).

    Row ``i * len(transforms) + j`` is sample ``i`` under transform ``j``;
    every application gets its own stream coordinates.
    """
    rows = []
    labels = []
    for pos, ts in enumerate(samples):
        for j, spec in enumerate(transforms):
            out = apply(spec, ts, aug_root.child(LANE_AUGMENT, epoch, batch_idx, pos, j))
            rows.append(out.values)
            labels.append(out.label)
    return np.stack(rows), np.asarray(labels, dtype=np.int64)


def transform_batch(
    samples,
    spec,
    variant: int,
    aug_root: RngStream,
    epoch: int,
    batch_idx: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Apply a single transform to every sample of the batch."""
    rows = [
        apply(spec, ts, aug_root.child(LANE_AUGMENT, epoch, batch_idx, pos, variant)).values
        for pos, ts in enumerate(samples)
    ]
    labels = np.asarray([ts.label for ts in samples], dtype=np.int64)
    return np.stack(rows), labels


def _batched_loss_acc(params, x, y, chunk=1024):
    total_loss = 0.0
    correct = 0
    for start in range(0, x.shape[0], chunk):
        probs, _ = M.forward(params, x[start : start + chunk])
        losses = M.per_sample_loss(probs, y[start : start + chunk])
        total_loss += float(losses.sum())
        correct += int((probs.argmax(axis=1) == y[start : start + chunk]).sum())
    n = x.shape[0]
    return total_loss / n, correct / n


def train(
    config: TrainConfig,
    train_set: Dataset,
    val_set: Dataset,
    params: M.ClassifierParams,
) -> tuple[M.ClassifierParams, TrainReport]:
    """Train ``params`` in place under the configured policy.

    Returns the trained parameters (restored to the best validation-loss
    snapshot) and the full diagnostics report.
    """
    if len(train_set.samples) == 0 or len(val_set.samples) == 0:
        raise DomainError("train and validation sets must be nonempty")
    if train_set.length != val_set.length or train_set.length != params.n_inputs:
        raise ShapeError("train/validation series length must match the model input")

    pol = config.policy
    kind = pol.kind
    n_variants = pol.n_variants
    transforms = pol.transforms
    weight_vec = P.WeightVector.initial(n_variants) if kind is P.PolicyKind.WEIGHTED else None

    rng_root = RngStream(config.seed)
    aug_seed = pol.seed if pol.seed is not None else config.seed
    aug_root = RngStream(aug_seed)

    x_train = train_set.values_matrix()
    y_train = train_set.labels_array()
    x_val = val_set.values_matrix()
    y_val = val_set.labels_array()

    state = M.RmsState.zeros_like(params)
    lr = config.learning_rate
    report = TrainReport(transform_ids=[s.transform_id for s in transforms])
    best_loss = np.inf
    best_params = params.copy()
    best_epoch = -1
    es_wait = 0
    plateau_wait = 0
    iteration = 0
    n = len(train_set.samples)
    started = time.perf_counter()

    for epoch in range(config.max_epochs):
        order = epoch_order(rng_root, epoch, n)
        sel_counts = np.zeros(n_variants, dtype=np.int64)

        for batch_idx, start in enumerate(range(0, n, config.batch_size)):
            idx = order[start : start + config.batch_size]
            batch = [train_set.samples[i] for i in idx]
            b = len(batch)

            if kind is P.PolicyKind.NONE:
                x = np.stack([ts.values for ts in batch])
                y = np.asarray([ts.label for ts in batch], dtype=np.int64)
                sample_weights = np.full(b, 1.0 / b)
            elif kind is P.PolicyKind.RANDOM:
                pick = P.random_pick(n_variants, aug_root.child(LANE_PICK, epoch, batch_idx))
                x, y = transform_batch(batch, transforms[pick], pick, aug_root, epoch, batch_idx)
                report.batch_picks.append(pick)
                sample_weights = np.full(b, 1.0 / b)
            else:
                x, y = expand_batch(batch, transforms, aug_root, epoch, batch_idx)
                sample_weights = None  # resolved from the loss matrix below

            probs, cache = M.forward(params, x)
            losses = M.per_sample_loss(probs, y)
            report.forward_loss_count += losses.shape[0]

            if kind is P.PolicyKind.WEIGHTED:
                matrix = losses.reshape(b, n_variants)
                sigma = P.softmax(weight_vec.logits)
                sample_weights = np.tile(sigma / b, b)
            elif kind is P.PolicyKind.TRIMMED:
                matrix = losses.reshape(b, n_variants)
                n_keep = n_variants - 2 * pol.alpha
                keep_weight = 1.0 / (b * n_keep)
                sample_weights = np.zeros(b * n_variants)
                for i in range(b):
                    kept = P.trim_select(matrix[i], pol.alpha)
                    sample_weights[i * n_variants + kept] = keep_weight
                    sel_counts[kept] += 1

            grads = M.backward(params, cache, y, sample_weights)
            try:
                M.rmsprop_step(params, grads, state, lr, config.rho, config.eps)
            except NumericError as err:
                raise NumericError(
                    f"training aborted at epoch {epoch}, batch {batch_idx}: {err}"
                ) from err

            if kind is P.PolicyKind.WEIGHTED:
                if not config.freeze_policy_weights:
                    wgrad = P.weighted_loss_grad(matrix, weight_vec.logits)
                    M.rmsprop_update(
                        weight_vec.logits, wgrad, weight_vec.rms_state, lr, config.rho, config.eps
                    )
                iteration += 1
                report.weight_trace.append(
                    [float(iteration)] + [float(v) for v in P.softmax(weight_vec.logits)]
                )

        train_loss, train_acc = _batched_loss_acc(params, x_train, y_train)
        val_loss, val_acc = _batched_loss_acc(params, x_val, y_val)
        report.epochs.append(
            EpochStats(epoch, train_loss, train_acc, val_loss, val_acc, lr)
        )
        if kind is P.PolicyKind.TRIMMED:
            report.selection_counts.append([int(c) for c in sel_counts])

        if val_loss < best_loss:
            best_loss = val_loss
            best_params = params.copy()
            best_epoch = epoch
            es_wait = 0
            plateau_wait = 0
        else:
            es_wait += 1
            plateau_wait += 1
            if plateau_wait >= config.plateau_patience:
                lr = max(lr * config.plateau_factor, config.min_lr)
                plateau_wait = 0

        report.stopped_epoch = epoch
        if es_wait >= config.early_stop_patience:
            break

    for name, arr in params.arrays().items():
        arr[...] = getattr(best_params, name)
    report.best_epoch = best_epoch
    report.wall_clock_s = time.perf_counter() - started
    return params, report


def evaluate(params: M.ClassifierParams, dataset: Dataset, chunk: int = 1024) -> EvalResult:
    """Accuracy, F1 and per-sample probabilities on a dataset.

    F1 is binary (positive class 1) for two-class problems, macro otherwise;
    a class absent from both predictions and labels contributes 0 with a
    warning.
    """
    if len(dataset.samples) == 0:
        raise DomainError("cannot evaluate an empty dataset")
    x = dataset.values_matrix()
    y = dataset.labels_array()
    probs = np.vstack(
        [M.forward(params, x[s : s + chunk])[0] for s in range(0, x.shape[0], chunk)]
    )
    pred = probs.argmax(axis=1)
    accuracy = float((pred == y).mean())
    n_classes = probs.shape[1]
    if n_classes == 2:
        f1 = _f1_for_class(y, pred, 1)
    else:
        scores = []
        for c in range(n_classes):
            if not ((y == c).any() or (pred == c).any()):
                warnings.warn(f"class {c} absent from labels and predictions; F1=0")
                scores.append(0.0)
            else:
                scores.append(_f1_for_class(y, pred, c))
        f1 = float(np.mean(scores))
    return EvalResult(accuracy=accuracy, f1=f1, probs=probs)


def _f1_for_class(y, pred, c) -> float:
    tp = int(((pred == c) & (y == c)).sum())
    fp = int(((pred == c) & (y != c)).sum())
    fn = int(((pred != c) & (y == c)).sum())
    if 2 * tp + fp + fn == 0:
        return 0.0
    return 2.0 * tp / (2 * tp + fp + fn)


# ---------------------------------------------------------------------------
# Trace emission (plot-ready CSV).
# ---------------------------------------------------------------------------


def write_weight_trace(path, report: TrainReport, header_comment: str | None = None) -> None:
    """CSV of softmaxed blend weights, one row per optimizer step."""
    n_weights = len(report.weight_trace[0]) - 1 if report.weight_trace else 0
    with open(path, "w", encoding="utf-8") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        cols = ",".join(f"w_{j}" for j in range(n_weights))
        fh.write(f"iteration,{cols}\n" if n_weights else "iteration\n")
        for row in report.weight_trace:
            fh.write(f"{int(row[0])}," + ",".join(repr(v) for v in row[1:]) + "\n")


def write_selection_histogram(path, report: TrainReport, header_comment: str | None = None) -> None:
    """CSV of per-epoch selection counts for the trimming policy."""
    with open(path, "w", encoding="utf-8") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        fh.write("epoch,transform_id,count\n")
        for epoch, counts in enumerate(report.selection_counts):
            for j, count in enumerate(counts):
                fh.write(f"{epoch},{report.transform_ids[j]},{count}\n")
