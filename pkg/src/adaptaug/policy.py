"""Augmentation policies: trainable loss weighting, loss-rank trimming,
and a uniform random baseline.

All three operate on an unreduced loss matrix ``losses[i][j]``: the
cross-entropy of sample ``i`` under augmentation ``j``, where ``j = 0`` is
always the untransformed sample.

* ``weighted``: the column losses are blended by a softmax-normalized
  trainable vector; the blend weights learn jointly with the network.
* ``trimmed``: per sample, the ``alpha`` largest and ``alpha`` smallest
  losses are discarded and the remainder averaged, so both useless and
  destructive augmentations drop out of the update.
* ``random``: one transform, chosen uniformly per mini-batch, is applied to
  the whole batch; never chained.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DomainError, ShapeError
from .rng import RngStream
from .transforms import (
    MAGNITUDE_MAX,
    MAGNITUDE_MIN,
    TransformSpec,
)


class PolicyKind(str, Enum):
    WEIGHTED = "weighted"
    TRIMMED = "trimmed"
    RANDOM = "random"
    NONE = "none"


@dataclass(frozen=True)
class PolicyConfig:
    """Which policy to run, over which transforms, at what strength."""

    kind: PolicyKind
    transforms: tuple[TransformSpec, ...] = ()
    magnitude: int | None = None
    alpha: int = 0
    seed: int | None = None

    def __post_init__(self) -> None:
        kind = PolicyKind(self.kind)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "transforms", tuple(self.transforms))
        if kind is not PolicyKind.NONE:
            if not self.transforms:
                raise DomainError(f"{kind.value} policy needs at least one transform")
            if self.transforms[0].transform_id != "identity":
                raise DomainError("transforms[0] must be the identity")
        if self.magnitude is not None and not (
            MAGNITUDE_MIN <= self.magnitude <= MAGNITUDE_MAX
        ):
            raise DomainError("magnitude must lie in [1, 20]")
        if self.alpha < 0:
            raise DomainError("alpha must be non-negative")
        if kind is PolicyKind.TRIMMED and 2 * self.alpha >= len(self.transforms):
            raise DomainError(
                "trimming must leave at least one loss: need 2*alpha < number of transforms"
            )

    @property
    def n_variants(self) -> int:
        """Rows produced per sample after expansion (identity included)."""
        return len(self.transforms)


@dataclass
class WeightVector:
    """Trainable blend logits over the identity + N transforms, with the
    accumulator slot of its optimizer."""

    logits: np.ndarray
    rms_state: np.ndarray

    @classmethod
    def initial(cls, n_variants: int) -> "WeightVector":
        # Constant logits; any constant gives a uniform softmax.
        value = 1.0 / n_variants
        return cls(
            logits=np.full(n_variants, value, dtype=np.float64),
            rms_state=np.zeros(n_variants, dtype=np.float64),
        )


def softmax(logits: np.ndarray) -> np.ndarray:
    """Numerically stable softmax; invariant under constant logit shifts."""
    logits = np.asarray(logits, dtype=np.float64)
    shifted = logits - np.max(logits)
    e = np.exp(shifted)
    return e / np.sum(e)


def _check_matrix(losses: np.ndarray, width: int | None = None) -> np.ndarray:
    losses = np.asarray(losses, dtype=np.float64)
    if losses.ndim != 2:
        raise ShapeError("loss matrix must be 2-d (batch x variants)")
    if width is not None and losses.shape[1] != width:
        raise ShapeError(
            f"loss matrix has {losses.shape[1]} columns, expected {width}"
        )
    return losses


def weighted_loss(losses: np.ndarray, logits: np.ndarray) -> float:
    """Mean over the batch of each row's dot product with softmax(logits)."""
    logits = np.asarray(logits, dtype=np.float64)
    losses = _check_matrix(losses, logits.shape[0])
    return float(np.mean(losses @ softmax(logits)))


def weighted_loss_grad(losses: np.ndarray, logits: np.ndarray) -> np.ndarray:
    """Gradient of :func:`weighted_loss` with respect to the logits.

    d/d logit_j = mean_i sigma_j * (losses[i, j] - sum_m sigma_m losses[i, m]);
    the components always sum to zero.
    """
    logits = np.asarray(logits, dtype=np.float64)
    losses = _check_matrix(losses, logits.shape[0])
    sigma = softmax(logits)
    blended = losses @ sigma
    return sigma * np.mean(losses - blended[:, None], axis=0)


def trim_select(losses_row: np.ndarray, alpha: int) -> np.ndarray:
    """Indices of the middle-ranked losses after dropping the alpha smallest
    and alpha largest.

    Ties are resolved by a stable sort on the variant index: among tied
    smallest losses the lowest indices are dropped first, among tied largest
    the highest indices are dropped first. Returns indices in ascending order.
    """
    losses_row = np.asarray(losses_row, dtype=np.float64)
    n = losses_row.shape[0]
    if 2 * alpha >= n:
        raise DomainError("2*alpha must be smaller than the number of losses")
    order = np.argsort(losses_row, kind="stable")
    kept = order[alpha : n - alpha] if alpha > 0 else order
    return np.sort(kept)


def trim_loss(losses: np.ndarray, alpha: int) -> float:
    """Mean of all retained entries after per-row trimming."""
    losses = _check_matrix(losses)
    total = 0.0
    n_keep = losses.shape[1] - 2 * alpha
    for row in losses:
        total += float(np.sum(row[trim_select(row, alpha)]))
    return total / (losses.shape[0] * n_keep)


def random_pick(n_choices: int, rng: RngStream) -> int:
    """Uniform transform index in [0, n_choices) for one mini-batch."""
    if n_choices < 1:
        raise DomainError("need at least one transform to pick from")
    return int(rng.generator().integers(n_choices))
