"""Deterministic, coordinate-addressed random streams.

Every stochastic draw in the package flows through an :class:`RngStream`,
which couples a 64-bit seed with a tuple of integer coordinates (split,
epoch, batch, sample, transform, ...).  Identical (seed, coordinates) pairs
yield bit-identical generators; distinct coordinates yield statistically
independent streams.  This is what makes training runs replayable and lets
augmentation fan out to parallel workers without shared state.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

_MASK64 = (1 << 64) - 1


def derive_seed(master_seed: int, *parts: object) -> int:
    """Hash (master seed, parts) into a new 64-bit seed.

    Uses BLAKE2 over the canonical repr of the parts, so the result is
    stable across processes and interpreter versions (unlike ``hash``).
    """
    key = (master_seed & _MASK64).to_bytes(8, "little")
    digest = hashlib.blake2b(repr(parts).encode("utf-8"), digest_size=8, key=key)
    return int.from_bytes(digest.digest(), "little")


@dataclass(frozen=True)
class RngStream:
    """A seed plus stream coordinates; cheap to fork, deterministic to replay."""

    seed: int
    coords: tuple[int, ...] = field(default_factory=tuple)

    def child(self, *coords: int) -> "RngStream":
        """Fork a sub-stream by appending coordinates."""
        return RngStream(self.seed, self.coords + tuple(int(c) for c in coords))

    def generator(self) -> np.random.Generator:
        """Materialize the stream as a fresh NumPy generator."""
        seq = np.random.SeedSequence(self.seed & _MASK64, spawn_key=self.coords)
        return np.random.default_rng(seq)
