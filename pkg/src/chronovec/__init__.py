"""Diachronic word embeddings in one shared space.

Period-tagged skip-gram (TSGNS) and tagged SVD learn every period's word
vectors against shared context coordinates, so vectors from different
periods can be compared directly. Procrustes and DW2V are included as
alignment baselines, plus the evaluation procedures used to compare them.
"""

__version__ = "0.1.0"

from .alignment import AlignmentMap, Dw2vProblem, align_embedding_periods, dw2v_solve, procrustes_align
from .corpus import (
    NgramRecord,
    PeriodizedCorpus,
    PeriodSpec,
    TokenFilter,
    Vocabulary,
    build_vocabulary,
    load_corpus,
    read_corpus,
    write_corpus,
)
from .cooccurrence import count_pairs, tagged_pair_stream
from .embeddings import EmbeddingSet, cosine_similarity, cross_period_cosine
from .io import read_embeddings, write_embeddings
from .methods import Dw2vConfig, MethodSettings, SvdConfig, build_embeddings
from .ppmi_svd import build_ppmi, build_temporal_ppmi, concat_tagged_ppmi, truncated_svd
from .sgns import TrainConfig, init_model, train

__all__ = [
    "AlignmentMap",
    "Dw2vConfig",
    "Dw2vProblem",
    "EmbeddingSet",
    "MethodSettings",
    "NgramRecord",
    "PeriodSpec",
    "PeriodizedCorpus",
    "SvdConfig",
    "TokenFilter",
    "TrainConfig",
    "Vocabulary",
    "align_embedding_periods",
    "build_embeddings",
    "build_ppmi",
    "build_temporal_ppmi",
    "build_vocabulary",
    "concat_tagged_ppmi",
    "cosine_similarity",
    "count_pairs",
    "cross_period_cosine",
    "dw2v_solve",
    "init_model",
    "load_corpus",
    "procrustes_align",
    "read_corpus",
    "read_embeddings",
    "tagged_pair_stream",
    "train",
    "truncated_svd",
    "write_corpus",
    "write_embeddings",
]
