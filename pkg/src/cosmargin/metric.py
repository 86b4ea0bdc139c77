"""Max-margin metric learning over cosine similarity.

The model is a single linear projection applied to embedding vectors.
Training pushes the projected cosine similarity of same-speaker pairs above
that of different-speaker pairs by a margin: each sampled triplet (anchor,
positive, negative) contributes

    max(0, margin - sim(Pa, Pp) + sim(Pa, Pn))

where sim is cosine similarity and P the projection. A triplet with a
positive contribution is "active"; inactive triplets sit in the flat region
of the hinge and contribute exactly zero gradient.

Gradient
--------
With a = P@u and b = P@v, cosine similarity s = <a,b> / (|a| |b|) has

    ds/da = b / (|a| |b|)  -  s * a / |a|^2
    ds/db = a / (|a| |b|)  -  s * b / |b|^2

and by the chain rule through a = P@u, b = P@v,

    ds/dP = outer(ds/da, u) + outer(ds/db, v).

The batch gradient sums the active triplets' terms (the positive-pair
similarity enters with a minus sign, the negative-pair one with a plus).
This is accumulated with fixed-order dense matrix products, so results are
deterministic for fixed inputs.

The minimizing update is plain SGD, projection <- projection - lr * grad,
with a multiplicative learning-rate decay per epoch. Cosine similarity is
invariant to the scale of P, so the loss surface is a function of the row
space direction only; gradients shrink as |P| grows, which keeps the plain
update self-limiting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .data import Dataset
from .linalg import as_matrix, as_vector
from .sampler import SamplerConfig, Triplet, TripletSampler

# Projected vectors with norms at or below this are treated as degenerate.
MIN_PROJECTED_NORM = 1e-12


def cosine(a, b) -> float:
    """Cosine similarity <a,b> / (|a| |b|), clamped to [-1, 1].

    The clamp absorbs 1-ulp overshoot on parallel vectors so downstream
    margin arithmetic stays inside its documented bounds.
    """
    a = as_vector(a, "a")
    b = as_vector(b, "b")
    if a.shape[0] != b.shape[0]:
        raise ValueError(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise ValueError("cosine is undefined for zero-norm vectors")
    return float(np.clip(a @ b / (na * nb), -1.0, 1.0))


class Projection:
    """A learned linear transform, stored as a (d_out, d_in) matrix.

    Output dimension may not exceed input dimension: the transform reduces
    or preserves dimensionality, never expands it. ``provenance`` is a
    free-form description of how the matrix was produced.
    """

    def __init__(self, matrix, provenance: str = ""):
        matrix = np.array(matrix, dtype=np.float64)
        matrix = as_matrix(matrix, "projection matrix")
        if matrix.shape[0] > matrix.shape[1]:
            raise ValueError(
                f"projection expands dimension ({matrix.shape[1]} -> "
                f"{matrix.shape[0]}); only reduction or preservation is allowed"
            )
        matrix.setflags(write=False)
        self.matrix = matrix
        self.provenance = str(provenance)

    @property
    def d_out(self) -> int:
        return self.matrix.shape[0]

    @property
    def d_in(self) -> int:
        return self.matrix.shape[1]

    def __repr__(self) -> str:
        return f"Projection({self.d_in}->{self.d_out}, {self.provenance!r})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, Projection):
            return NotImplemented
        return (
            np.array_equal(self.matrix, other.matrix)
            and self.provenance == other.provenance
        )


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters of the max-margin trainer.

    The margin must stay below 2: projected cosine differences live in
    [-2, 2], so a margin of 2 or more keeps every triplet active forever.
    ``init`` is "identity" (square projections only) or "random", which
    takes orthonormal rows from the QR factorization of a seeded Gaussian
    matrix. Gradients are batch sums, not means; scale the learning rate
    accordingly when changing batch_size.
    """

    margin: float = 0.5
    learning_rate: float = 0.05
    lr_decay: float = 0.95
    epochs: int = 50
    sampler: SamplerConfig = field(default_factory=SamplerConfig)
    init: str = "random"
    init_seed: int = 0
    early_stop_patience: Optional[int] = None

    def __post_init__(self):
        if not 0.0 < self.margin < 2.0:
            raise ValueError(
                f"margin must be in (0, 2), got {self.margin} (cosine "
                f"differences are bounded by 2)"
            )
        if self.learning_rate <= 0.0:
            raise ValueError("learning_rate must be positive")
        if not 0.0 < self.lr_decay <= 1.0:
            raise ValueError("lr_decay must be in (0, 1]")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.init not in ("identity", "random"):
            raise ValueError(f"init must be 'identity' or 'random', got {self.init!r}")
        if self.early_stop_patience is not None and self.early_stop_patience < 1:
            raise ValueError("early_stop_patience must be >= 1 or None")


class EpochStats(NamedTuple):
    epoch: int
    mean_loss: float
    active_fraction: float
    learning_rate: float


@dataclass(frozen=True)
class TrainReport:
    """Per-epoch training trace plus the projection it produced."""

    epochs: list[EpochStats]
    projection: Projection


def initial_matrix(d_out: int, d_in: int, init: str, seed: int) -> np.ndarray:
    if d_out > d_in:
        raise ValueError(f"d_out ({d_out}) may not exceed d_in ({d_in})")
    if init == "identity":
        if d_out != d_in:
            raise ValueError(
                f"identity init needs d_out == d_in, got {d_out} != {d_in}"
            )
        return np.eye(d_in)
    if init == "random":
        rng = np.random.default_rng(seed)
        gauss = rng.standard_normal((d_in, d_out))
        q, r = np.linalg.qr(gauss)
        q = q * np.sign(np.diag(r))  # canonical sign, independent of QR details
        return q.T.copy()
    raise ValueError(f"unknown init {init!r}")


def _gather(dataset: Dataset, batch: list[Triplet]):
    idx = np.asarray(batch, dtype=np.intp)
    if idx.size == 0:
        raise ValueError("batch must be nonempty")
    if idx.min() < 0 or idx.max() >= len(dataset):
        raise ValueError("triplet position out of dataset range")
    vecs = dataset.vectors
    return vecs[idx[:, 0]], vecs[idx[:, 1]], vecs[idx[:, 2]]


def _batch_terms(matrix: np.ndarray, batch: list[Triplet], dataset: Dataset,
                 margin: float, want_grad: bool):
    """Shared core: (loss, grad or None, active count)."""
    anchors, positives, negatives = _gather(dataset, batch)

    pa = anchors @ matrix.T
    pp = positives @ matrix.T
    pn = negatives @ matrix.T
    na = np.linalg.norm(pa, axis=1)
    npos = np.linalg.norm(pp, axis=1)
    nneg = np.linalg.norm(pn, axis=1)
    if min(na.min(), npos.min(), nneg.min()) <= MIN_PROJECTED_NORM:
        raise ValueError(
            "projection maps an embedding to (near-)zero norm; the matrix is "
            "degenerate, re-initialize training"
        )

    sim_pos = np.clip(np.einsum("ij,ij->i", pa, pp) / (na * npos), -1.0, 1.0)
    sim_neg = np.clip(np.einsum("ij,ij->i", pa, pn) / (na * nneg), -1.0, 1.0)
    hinge = margin - sim_pos + sim_neg
    active = hinge > 0.0
    loss = float(hinge[active].sum())
    if not want_grad:
        return loss, None, int(active.sum())

    act = active.astype(np.float64)[:, None]
    inv_ap = (1.0 / (na * npos))[:, None]
    inv_an = (1.0 / (na * nneg))[:, None]
    inv_a2 = (1.0 / (na * na))[:, None]
    inv_p2 = (1.0 / (npos * npos))[:, None]
    inv_n2 = (1.0 / (nneg * nneg))[:, None]
    sp = sim_pos[:, None]
    sn = sim_neg[:, None]

    # d sim_pos / d(projected anchor) and /d(projected positive)
    dpos_a = pp * inv_ap - sp * pa * inv_a2
    dpos_p = pa * inv_ap - sp * pp * inv_p2
    # d sim_neg / d(projected anchor) and /d(projected negative)
    dneg_a = pn * inv_an - sn * pa * inv_a2
    dneg_n = pa * inv_an - sn * pn * inv_n2

    grad = (
        (act * (dneg_a - dpos_a)).T @ anchors
        + (act * -dpos_p).T @ positives
        + (act * dneg_n).T @ negatives
    )
    return loss, grad, int(active.sum())


def triplet_loss(proj: Projection, triplet: Triplet, dataset: Dataset,
                 margin: float) -> float:
    """Hinge value of one triplet under ``proj``; 0 means inactive."""
    if dataset.dim != proj.d_in:
        raise ValueError(
            f"dataset dim {dataset.dim} does not match projection input "
            f"dim {proj.d_in}"
        )
    loss, _, _ = _batch_terms(proj.matrix, [triplet], dataset, margin, want_grad=False)
    return loss


def batch_loss_and_grad(proj: Projection, batch: list[Triplet], dataset: Dataset,
                        margin: float) -> tuple[float, np.ndarray]:
    """Summed hinge loss of a batch and its gradient w.r.t. the matrix.

    The gradient has the projection's shape; inactive triplets contribute
    exactly zero.
    """
    if dataset.dim != proj.d_in:
        raise ValueError(
            f"dataset dim {dataset.dim} does not match projection input "
            f"dim {proj.d_in}"
        )
    loss, grad, _ = _batch_terms(proj.matrix, batch, dataset, margin, want_grad=True)
    return loss, grad


def train(dataset: Dataset, d_out: int, config: TrainConfig = TrainConfig()
          ) -> tuple[Projection, TrainReport]:
    """Train a max-margin projection with mini-batch SGD.

    Deterministic for fixed dataset, config, and seeds. Stops early when the
    mean epoch loss has not improved for ``early_stop_patience`` epochs.
    Raises if the loss turns non-finite (divergence; lower the learning
    rate).
    """
    if d_out < 1:
        raise ValueError("d_out must be >= 1")
    if d_out > dataset.dim:
        raise ValueError(f"d_out ({d_out}) exceeds dataset dim ({dataset.dim})")

    matrix = initial_matrix(d_out, dataset.dim, config.init, config.init_seed)
    provenance = (
        f"max-margin {dataset.dim}->{d_out} margin={config.margin} "
        f"lr={config.learning_rate} decay={config.lr_decay} "
        f"epochs={config.epochs} batch={config.sampler.batch_size} "
        f"per-epoch={config.sampler.batches_per_epoch} "
        f"seed={config.sampler.seed} init={config.init}/{config.init_seed}"
    )
    stats: list[EpochStats] = []
    if config.epochs == 0:
        proj = Projection(matrix, provenance)
        return proj, TrainReport(stats, proj)

    sampler = TripletSampler(dataset, config.sampler)
    n_batches = sampler.batches_per_epoch
    lr = config.learning_rate
    best_loss = math.inf
    stall = 0
    for epoch in range(config.epochs):
        loss_sum = 0.0
        active_total = 0
        for _ in range(n_batches):
            batch = sampler.sample_batch()
            loss, grad, n_active = _batch_terms(
                matrix, batch, dataset, config.margin, want_grad=True
            )
            if not math.isfinite(loss):
                raise ValueError(
                    f"training diverged at epoch {epoch}: non-finite loss; "
                    f"try a smaller learning rate"
                )
            matrix -= lr * grad
            loss_sum += loss
            active_total += n_active
        mean_loss = loss_sum / n_batches
        active_fraction = active_total / (n_batches * config.sampler.batch_size)
        stats.append(EpochStats(epoch, mean_loss, active_fraction, lr))
        lr *= config.lr_decay

        if mean_loss < best_loss:
            best_loss = mean_loss
            stall = 0
        else:
            stall += 1
            if (config.early_stop_patience is not None
                    and stall >= config.early_stop_patience):
                break

    proj = Projection(matrix, provenance)
    return proj, TrainReport(stats, proj)


def project(proj: Projection, dataset: Dataset) -> Dataset:
    """Apply ``proj`` to every embedding, preserving all labels.

    Raises if any projected vector falls below MIN_PROJECTED_NORM in norm,
    listing the offending utterances: such vectors cannot be cosine-scored.
    """
    if dataset.dim != proj.d_in:
        raise ValueError(
            f"dataset dim {dataset.dim} does not match projection input "
            f"dim {proj.d_in}"
        )
    projected = dataset.vectors @ proj.matrix.T
    norms = np.linalg.norm(projected, axis=1)
    bad = np.flatnonzero(norms < MIN_PROJECTED_NORM)
    if bad.size:
        shown = [dataset.utterance_ids[i] for i in bad[:20]]
        suffix = "" if bad.size <= 20 else f" (+{bad.size - 20} more)"
        raise ValueError(
            f"projection produced near-zero vectors for utterances "
            f"{shown}{suffix}"
        )
    return Dataset(proj.d_out, dataset.speaker_ids, dataset.utterance_ids, projected)
