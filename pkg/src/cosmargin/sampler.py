"""Contrastive triplet sampling for mini-batch training.

A triplet is (anchor, positive, negative): the positive shares the anchor's
speaker, the negative does not. Speakers with a single utterance cannot
anchor a triplet (no positive exists) but still serve as negatives, so no
data is wasted.

Sampling is uniform and independent per triplet: anchor uniform over
eligible positions, positive uniform over the anchor speaker's other
utterances, negative uniform over all other speakers' utterances. No
hard-negative mining is attempted; that is a deliberate extension point.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional, Union

import numpy as np

from .data import Dataset


class Triplet(NamedTuple):
    """Dataset positions of (anchor, positive, negative)."""

    anchor: int
    positive: int
    negative: int


@dataclass(frozen=True)
class SamplerConfig:
    """Batch shape and seeding for the triplet stream.

    batches_per_epoch may be an explicit count, or "cover" to size each
    epoch so every eligible anchor is consumed once (a shuffled pass over
    the anchors, padded at the epoch tail to keep batches full).
    """

    batch_size: int = 128
    seed: int = 0
    batches_per_epoch: Union[int, str] = "cover"

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if isinstance(self.batches_per_epoch, str):
            if self.batches_per_epoch != "cover":
                raise ValueError(
                    f"batches_per_epoch must be a count or 'cover', "
                    f"got {self.batches_per_epoch!r}"
                )
        elif self.batches_per_epoch < 1:
            raise ValueError("batches_per_epoch must be >= 1")


def eligible_anchors(dataset: Dataset) -> list[int]:
    """Positions whose speaker has at least two utterances, dataset order."""
    return [
        i
        for i, spk in enumerate(dataset.speaker_ids)
        if len(dataset.by_speaker[spk]) >= 2
    ]


class TripletSampler:
    """Stateful triplet stream over a fixed dataset.

    The stream is a pure function of (dataset, config): two samplers built
    with the same arguments produce identical batch sequences.
    """

    def __init__(self, dataset: Dataset, config: SamplerConfig,
                 rng: Optional[np.random.Generator] = None):
        if len(dataset.by_speaker) < 2:
            raise ValueError("triplet sampling needs at least 2 speakers")
        anchors = eligible_anchors(dataset)
        if not anchors:
            raise ValueError(
                "triplet sampling needs at least one speaker with >= 2 utterances"
            )
        self.dataset = dataset
        self.config = config
        self._anchors = np.array(anchors)
        self._rng = rng if rng is not None else np.random.default_rng(config.seed)
        self._cover_queue: list[int] = []

        # per-position candidate pools, precomputed once
        n = len(dataset)
        self._positives = {}
        for i in anchors:
            sibs = dataset.by_speaker[dataset.speaker_ids[i]]
            self._positives[i] = np.array([j for j in sibs if j != i])
        self._negatives = {}
        all_idx = np.arange(n)
        for spk, ix in dataset.by_speaker.items():
            mask = np.ones(n, dtype=bool)
            mask[list(ix)] = False
            self._negatives[spk] = all_idx[mask]

    @property
    def batches_per_epoch(self) -> int:
        if self.config.batches_per_epoch == "cover":
            return -(-len(self._anchors) // self.config.batch_size)
        return int(self.config.batches_per_epoch)

    def _next_anchors(self, count: int) -> np.ndarray:
        if self.config.batches_per_epoch != "cover":
            return self._rng.choice(self._anchors, size=count, replace=True)
        out = []
        while len(out) < count:
            if not self._cover_queue:
                self._cover_queue = list(self._rng.permutation(self._anchors))
            out.append(self._cover_queue.pop())
        return np.array(out)

    def sample_batch(self) -> list[Triplet]:
        """Draw exactly batch_size valid triplets."""
        batch = []
        for a in self._next_anchors(self.config.batch_size):
            a = int(a)
            pos = int(self._rng.choice(self._positives[a]))
            neg = int(self._rng.choice(self._negatives[self.dataset.speaker_ids[a]]))
            batch.append(Triplet(a, pos, neg))
        return batch


def sample_batch(dataset: Dataset, config: SamplerConfig, rng: np.random.Generator) -> list[Triplet]:
    """One-shot batch draw with a caller-owned generator.

    Convenience wrapper for code that manages its own RNG stream; training
    uses TripletSampler, which also implements epoch "cover" bookkeeping.
    """
    return TripletSampler(dataset, config, rng=rng).sample_batch()
