"""Max-margin metric learning for cosine-scored verification.

The package trains linear projections over fixed-dimension embedding
vectors so that same-speaker pairs score higher cosine similarity than
different-speaker pairs by a margin, alongside a Fisher LDA baseline,
tandem projection composition, score fusion, and an EER/DET evaluation
harness.
"""

from .data import Dataset, Embedding, SynthConfig, Trial, gen_synthetic, gen_trials
from .evaluation import (
    EerResult,
    ErrorRates,
    det_points,
    eer,
    error_curve,
    probit,
)
from .io import (
    load_embeddings,
    load_projection,
    load_scores,
    load_trials,
    write_embeddings,
    write_projection,
    write_scores,
    write_trials,
)
from .lda import LdaConfig, scatter_matrices, train_lda
from .metric import (
    Projection,
    TrainConfig,
    TrainReport,
    batch_loss_and_grad,
    cosine,
    project,
    triplet_loss,
)
from .metric import train as train_mmml
from .sampler import SamplerConfig, Triplet, TripletSampler, eligible_anchors
from .scoring import FusionConfig, ScoreSet, fuse, score_trials

__version__ = "0.1.0"

__all__ = [
    "Dataset",
    "Embedding",
    "EerResult",
    "ErrorRates",
    "FusionConfig",
    "LdaConfig",
    "Projection",
    "SamplerConfig",
    "ScoreSet",
    "SynthConfig",
    "TrainConfig",
    "TrainReport",
    "Trial",
    "Triplet",
    "TripletSampler",
    "batch_loss_and_grad",
    "cosine",
    "det_points",
    "eer",
    "eligible_anchors",
    "error_curve",
    "fuse",
    "gen_synthetic",
    "gen_trials",
    "load_embeddings",
    "load_projection",
    "load_scores",
    "load_trials",
    "probit",
    "project",
    "scatter_matrices",
    "score_trials",
    "train_lda",
    "train_mmml",
    "triplet_loss",
    "write_embeddings",
    "write_projection",
    "write_scores",
    "write_trials",
]
