"""Experiments on temporal embeddings: smoothness, similarity, norms, shift detection."""

from ..embeddings import cosine_similarity
from .diachronic import (
    Displacement,
    TrajectoryPoint,
    known_shift_benchmark,
    pca_2d,
    semantic_displacement,
    temporal_neighbors,
    trajectory_export,
    trajectory_report,
)
from .metrics import (
    norm_frequency_correlation,
    read_similarity_pairs,
    read_word_list,
    similarity_benchmark,
    spearman,
)
from .perturbation import (
    DEFAULT_ALPHAS,
    PerturbationSpec,
    perturb_overlap,
    replace_settings_seed,
    smoothness_curve,
)
from .report import FORMATS, EvalReport

__all__ = [
    "DEFAULT_ALPHAS",
    "Displacement",
    "EvalReport",
    "FORMATS",
    "PerturbationSpec",
    "TrajectoryPoint",
    "cosine_similarity",
    "known_shift_benchmark",
    "norm_frequency_correlation",
    "pca_2d",
    "perturb_overlap",
    "read_similarity_pairs",
    "read_word_list",
    "replace_settings_seed",
    "semantic_displacement",
    "similarity_benchmark",
    "smoothness_curve",
    "spearman",
    "temporal_neighbors",
    "trajectory_export",
    "trajectory_report",
]
