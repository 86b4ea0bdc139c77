"""Fisher linear discriminant analysis over speaker-labeled embeddings.

Produces a projection whose rows are the leading generalized eigenvectors
of (between-speaker scatter, within-speaker scatter): the directions along
which speakers separate most relative to their internal spread. The
generalized problem is solved by symmetric whitening: Cholesky-factor the
(ridge-regularized) within scatter, eigendecompose the whitened between
scatter, and map the eigenvectors back.

Scatters use speaker-count weighting for the between matrix (standard
multiclass Fisher). The ridge is relative to trace(S_w)/dim so behavior is
scale-free; it covers desk-scale sets whose within scatter is singular.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .data import Dataset
from .linalg import cholesky, sym_eig
from .metric import Projection


@dataclass(frozen=True)
class LdaConfig:
    d_out: int = 150
    ridge_rel: float = 1e-6

    def __post_init__(self):
        if self.d_out < 1:
            raise ValueError("d_out must be >= 1")
        if self.ridge_rel < 0:
            raise ValueError("ridge_rel must be nonnegative")


def scatter_matrices(dataset: Dataset) -> tuple[np.ndarray, np.ndarray]:
    """Within- and between-speaker scatter matrices (S_w, S_b).

    S_w sums squared deviations of utterances from their speaker mean;
    S_b sums, per speaker, n_s times the squared deviation of the speaker
    mean from the global mean.
    """
    if len(dataset.by_speaker) < 2:
        raise ValueError("scatter matrices need at least 2 speakers")
    dim = dataset.dim
    global_mean = dataset.vectors.mean(axis=0)
    s_w = np.zeros((dim, dim))
    s_b = np.zeros((dim, dim))
    for idx in dataset.by_speaker.values():
        rows = dataset.vectors[list(idx)]
        mean = rows.mean(axis=0)
        centered = rows - mean
        s_w += centered.T @ centered
        offset = mean - global_mean
        s_b += len(idx) * np.outer(offset, offset)
    # enforce exact symmetry against accumulation round-off
    return 0.5 * (s_w + s_w.T), 0.5 * (s_b + s_b.T)


def max_feasible_dout(dataset: Dataset) -> int:
    """Rank bound on the number of discriminant directions."""
    return min(dataset.dim, len(dataset.by_speaker) - 1)


def train_lda(dataset: Dataset, config: LdaConfig = LdaConfig()) -> Projection:
    """Fit the discriminant projection; rows ordered by descending eigenvalue.

    Each returned row is unit-norm. Raises when d_out exceeds the rank
    bound min(dim, n_speakers - 1).
    """
    bound = max_feasible_dout(dataset)
    if config.d_out > bound:
        raise ValueError(
            f"d_out={config.d_out} exceeds the rank bound; at most {bound} "
            f"directions are feasible for {len(dataset.by_speaker)} speakers "
            f"in dim {dataset.dim}"
        )
    s_w, s_b = scatter_matrices(dataset)
    ridge = config.ridge_rel * np.trace(s_w) / dataset.dim
    if ridge == 0.0 and config.ridge_rel > 0.0:
        ridge = config.ridge_rel  # degenerate S_w == 0: keep the solve defined
    regularized = s_w + ridge * np.eye(dataset.dim)

    lower = cholesky(regularized)
    inv_l = scipy.linalg.solve_triangular(lower, np.eye(dataset.dim), lower=True)
    whitened = inv_l @ s_b @ inv_l.T
    eigvals, eigvecs = sym_eig(0.5 * (whitened + whitened.T))
    directions = inv_l.T @ eigvecs[:, : config.d_out]

    rows = directions.T
    rows = rows / np.linalg.norm(rows, axis=1, keepdims=True)
    provenance = (
        f"lda {dataset.dim}->{config.d_out} ridge_rel={config.ridge_rel} "
        f"speakers={len(dataset.by_speaker)} utterances={len(dataset)}"
    )
    return Projection(rows, provenance)
