"""Trial scoring and score-level fusion.

Scoring a trial is a cosine computation between the (optionally projected)
enroll and test vectors. Projections compose in tandem: a chain [P1, P2]
applies P1 then P2, which is algebraically the single matrix P2 @ P1.

Fusion linearly interpolates two systems' scores per trial. It demands the
exact same trial keys on both sides rather than intersecting silently; a
silent intersection would make error-rate comparisons across systems
meaningless.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .metric import Projection, project


class ScoreSet:
    """Ordered (enroll, test, score) entries with unique key pairs."""

    def __init__(self, entries):
        self.entries = [(str(e), str(t), float(s)) for e, t, s in entries]
        index: dict[tuple[str, str], float] = {}
        for enroll, test, score in self.entries:
            if not math.isfinite(score):
                raise ValueError(f"non-finite score for trial ({enroll}, {test})")
            key = (enroll, test)
            if key in index:
                raise ValueError(f"duplicate trial key ({enroll}, {test})")
            index[key] = score
        self._index = index

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ScoreSet):
            return NotImplemented
        return self.entries == other.entries

    def keys(self) -> set[tuple[str, str]]:
        return set(self._index)

    def get(self, enroll: str, test: str) -> float:
        try:
            return self._index[(enroll, test)]
        except KeyError:
            raise KeyError(f"no score for trial ({enroll}, {test})") from None


@dataclass(frozen=True)
class FusionConfig:
    """Interpolation weight on the first system's scores."""

    alpha: float = 0.2

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")


def score_trials(dataset: Dataset, trials, chain: list[Projection] = ()) -> ScoreSet:
    """Cosine-score each trial after applying the projection chain in order.

    An empty chain scores raw vectors. Output order equals trial order.
    """
    trials = list(trials)
    projected = dataset
    for k, proj in enumerate(chain):
        if proj.d_in != projected.dim:
            raise ValueError(
                f"chain link {k} expects input dim {proj.d_in}, "
                f"got {projected.dim}"
            )
        projected = project(proj, projected)

    missing = [
        t
        for trial in trials
        for t in (trial.enroll_utt, trial.test_utt)
        if t not in projected.by_utterance
    ]
    if missing:
        shown = sorted(set(missing))[:10]
        raise ValueError(f"trial utterances missing from dataset: {shown}")

    vecs = projected.vectors
    norms = np.linalg.norm(vecs, axis=1)
    entries = []
    for trial in trials:
        i = projected.by_utterance[trial.enroll_utt]
        j = projected.by_utterance[trial.test_utt]
        sim = float(np.clip(vecs[i] @ vecs[j] / (norms[i] * norms[j]), -1.0, 1.0))
        entries.append((trial.enroll_utt, trial.test_utt, sim))
    return ScoreSet(entries)


def fuse(a: ScoreSet, b: ScoreSet, config: FusionConfig = FusionConfig()) -> ScoreSet:
    """Per-trial alpha * a + (1 - alpha) * b; order follows ``a``."""
    only_a = sorted(a.keys() - b.keys())
    only_b = sorted(b.keys() - a.keys())
    if only_a or only_b:
        raise ValueError(
            f"fusion requires identical trial keys; "
            f"{len(only_a)} only in first (e.g. {only_a[:10]}), "
            f"{len(only_b)} only in second (e.g. {only_b[:10]})"
        )
    alpha = config.alpha
    return ScoreSet(
        (enroll, test, alpha * score + (1.0 - alpha) * b.get(enroll, test))
        for enroll, test, score in a
    )
