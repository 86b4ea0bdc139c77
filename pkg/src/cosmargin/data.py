"""Labeled embedding collections and synthetic corpus generation.

A Dataset is an immutable, ordered collection of fixed-dimension embedding
vectors, each labeled with a speaker id and a unique utterance id. Vectors
are stored as one float64 matrix (one row per utterance); zero-norm vectors
are rejected at construction time so cosine scoring never has to handle
them.

The synthetic generator draws a desk-scale speaker corpus: per-speaker
Gaussian means plus per-utterance channel noise, with an optional block of
"nuisance" coordinates whose within-speaker noise is inflated. Down-
weighting those coordinates is the analytically optimal linear cleanup,
which is what the training benchmarks exploit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Embedding:
    """One labeled vector: ``speaker_id`` owns utterance ``utterance_id``."""

    speaker_id: str
    utterance_id: str
    vector: np.ndarray


@dataclass(frozen=True)
class Trial:
    """A verification trial: compare ``enroll_utt`` against ``test_utt``.

    ``is_target`` is True when both utterances come from the same speaker.
    """

    enroll_utt: str
    test_utt: str
    is_target: bool

    def __post_init__(self):
        if self.enroll_utt == self.test_utt:
            raise ValueError(
                f"self-trial: enroll and test are both {self.enroll_utt!r}"
            )


class Dataset:
    """Ordered embeddings with a speaker index and an utterance index.

    Parameters
    ----------
    dim : int
        Declared vector dimension; every vector must match it.
    speaker_ids, utterance_ids : sequences of str
        Parallel label lists. Utterance ids must be unique.
    vectors : array of shape (n, dim)
        One row per utterance. Every row must have nonzero Euclidean norm
        and finite entries.
    """

    def __init__(self, dim, speaker_ids, utterance_ids, vectors):
        dim = int(dim)
        if dim < 1:
            raise ValueError(f"dimension must be positive, got {dim}")
        speaker_ids = tuple(str(s) for s in speaker_ids)
        utterance_ids = tuple(str(u) for u in utterance_ids)
        if len(speaker_ids) != len(utterance_ids):
            raise ValueError("speaker_ids and utterance_ids differ in length")
        vectors = np.array(vectors, dtype=np.float64)
        if vectors.size == 0:
            vectors = vectors.reshape(0, dim)
        if vectors.shape != (len(speaker_ids), dim):
            raise ValueError(
                f"vectors have shape {vectors.shape}, expected "
                f"({len(speaker_ids)}, {dim})"
            )
        if not np.all(np.isfinite(vectors)):
            bad = int(np.flatnonzero(~np.isfinite(vectors).all(axis=1))[0])
            raise ValueError(
                f"non-finite vector for utterance {utterance_ids[bad]!r}"
            )
        norms = np.linalg.norm(vectors, axis=1)
        if vectors.shape[0] and norms.min() == 0.0:
            bad = int(np.argmin(norms))
            raise ValueError(f"zero-norm vector for utterance {utterance_ids[bad]!r}")

        by_utt: dict[str, int] = {}
        for i, utt in enumerate(utterance_ids):
            if utt in by_utt:
                raise ValueError(f"duplicate utterance id {utt!r}")
            by_utt[utt] = i
        by_speaker: dict[str, list[int]] = {}
        for i, spk in enumerate(speaker_ids):
            by_speaker.setdefault(spk, []).append(i)

        vectors.setflags(write=False)
        self.dim = dim
        self.speaker_ids = speaker_ids
        self.utterance_ids = utterance_ids
        self.vectors = vectors
        self.by_utterance = by_utt
        self.by_speaker = {s: tuple(ix) for s, ix in by_speaker.items()}

    @classmethod
    def from_embeddings(cls, dim, embeddings) -> "Dataset":
        embeddings = list(embeddings)
        if embeddings:
            vectors = np.stack([e.vector for e in embeddings])
        else:
            vectors = np.empty((0, dim))
        return cls(
            dim,
            [e.speaker_id for e in embeddings],
            [e.utterance_id for e in embeddings],
            vectors,
        )

    def __len__(self) -> int:
        return len(self.utterance_ids)

    def __getitem__(self, i: int) -> Embedding:
        return Embedding(self.speaker_ids[i], self.utterance_ids[i], self.vectors[i])

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.dim == other.dim
            and self.speaker_ids == other.speaker_ids
            and self.utterance_ids == other.utterance_ids
            and np.array_equal(self.vectors, other.vectors)
        )

    @property
    def speakers(self) -> tuple[str, ...]:
        """Distinct speaker ids in first-appearance order."""
        return tuple(self.by_speaker.keys())

    def vector_of(self, utterance_id: str) -> np.ndarray:
        try:
            return self.vectors[self.by_utterance[utterance_id]]
        except KeyError:
            raise KeyError(f"unknown utterance id {utterance_id!r}") from None

    def subset_by_speakers(self, speaker_ids) -> "Dataset":
        """New Dataset with only the given speakers, in original order."""
        wanted = set(speaker_ids)
        missing = wanted - set(self.by_speaker)
        if missing:
            raise ValueError(f"unknown speakers: {sorted(missing)[:10]}")
        keep = [i for i, s in enumerate(self.speaker_ids) if s in wanted]
        return Dataset(
            self.dim,
            [self.speaker_ids[i] for i in keep],
            [self.utterance_ids[i] for i in keep],
            self.vectors[keep],
        )


@dataclass(frozen=True)
class SynthConfig:
    """Parameters of the synthetic speaker corpus.

    Speaker means are drawn from N(0, speaker_scatter^2 * I). Each utterance
    is the speaker mean plus Gaussian noise with std channel_scatter, scaled
    by nuisance_scale on the first nuisance_dims coordinates.
    """

    n_speakers: int
    utts_per_speaker: int
    dim: int
    speaker_scatter: float = 1.0
    channel_scatter: float = 1.0
    nuisance_dims: int = 0
    nuisance_scale: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n_speakers < 1:
            raise ValueError("n_speakers must be >= 1")
        if self.utts_per_speaker < 2:
            raise ValueError("utts_per_speaker must be >= 2")
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if not 0 <= self.nuisance_dims <= self.dim:
            raise ValueError(
                f"nuisance_dims must be in [0, dim]; got {self.nuisance_dims} "
                f"with dim {self.dim}"
            )
        if self.speaker_scatter <= 0 or self.channel_scatter <= 0:
            raise ValueError("scatter parameters must be positive")
        if self.nuisance_scale <= 0:
            raise ValueError("nuisance_scale must be positive")


def gen_synthetic(cfg: SynthConfig) -> Dataset:
    """Draw a deterministic synthetic corpus from ``cfg``.

    Ids are "spk%05d" per speaker and a globally increasing "utt%08d".
    """
    rng = np.random.default_rng(cfg.seed)
    noise_std = np.full(cfg.dim, cfg.channel_scatter)
    noise_std[: cfg.nuisance_dims] *= cfg.nuisance_scale

    speaker_ids = []
    utterance_ids = []
    rows = []
    utt_counter = 0
    for s in range(cfg.n_speakers):
        mean = rng.normal(0.0, cfg.speaker_scatter, size=cfg.dim)
        noise = rng.normal(0.0, 1.0, size=(cfg.utts_per_speaker, cfg.dim)) * noise_std
        for u in range(cfg.utts_per_speaker):
            speaker_ids.append(f"spk{s:05d}")
            utterance_ids.append(f"utt{utt_counter:08d}")
            rows.append(mean + noise[u])
            utt_counter += 1
    return Dataset(cfg.dim, speaker_ids, utterance_ids, np.array(rows))


def gen_trials(dataset: Dataset, n_target: int, n_nontarget: int, seed: int) -> list[Trial]:
    """Sample distinct verification trials from ``dataset``.

    Target trials are drawn uniformly (without replacement) from all ordered
    same-speaker pairs of distinct utterances; nontarget trials likewise
    from all ordered different-speaker pairs. Distinctness keeps the
    (enroll, test) keys unique, which downstream score sets require.
    """
    if n_target < 0 or n_nontarget < 0:
        raise ValueError("trial counts must be nonnegative")
    rng = np.random.default_rng(seed)
    trials: list[Trial] = []

    if n_target > 0:
        target_pairs = [
            (i, j)
            for ix in dataset.by_speaker.values()
            for i in ix
            for j in ix
            if i != j
        ]
        if n_target > len(target_pairs):
            raise ValueError(
                f"cannot draw {n_target} target trials: only "
                f"{len(target_pairs)} ordered same-speaker pairs exist"
            )
        for k in rng.choice(len(target_pairs), size=n_target, replace=False):
            i, j = target_pairs[k]
            trials.append(
                Trial(dataset.utterance_ids[i], dataset.utterance_ids[j], True)
            )

    if n_nontarget > 0:
        if len(dataset.by_speaker) < 2:
            raise ValueError("cannot draw nontarget trials: fewer than 2 speakers")
        n = len(dataset)
        code_of = {s: c for c, s in enumerate(dataset.by_speaker)}
        codes = np.array([code_of[s] for s in dataset.speaker_ids])
        enroll_idx = np.repeat(np.arange(n), n)
        test_idx = np.tile(np.arange(n), n)
        cross = codes[enroll_idx] != codes[test_idx]
        enroll_idx, test_idx = enroll_idx[cross], test_idx[cross]
        if n_nontarget > enroll_idx.size:
            raise ValueError(
                f"cannot draw {n_nontarget} nontarget trials: only "
                f"{enroll_idx.size} ordered cross-speaker pairs exist"
            )
        for k in rng.choice(enroll_idx.size, size=n_nontarget, replace=False):
            trials.append(
                Trial(
                    dataset.utterance_ids[enroll_idx[k]],
                    dataset.utterance_ids[test_idx[k]],
                    False,
                )
            )
    return trials
