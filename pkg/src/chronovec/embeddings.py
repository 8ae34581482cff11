"""Embedding sets keyed by (word, period) and the cross-period comparability guard."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .errors import (
    AlignmentRequiredError,
    PeriodError,
    VocabularyLookupError,
    ZeroVectorError,
)

METHODS = ("ppmi", "svd", "tsvd", "sgns", "tsgns", "dw2v")
# Methods whose per-period rows share one coordinate system by construction.
SHARED_SPACE_METHODS = frozenset({"ppmi", "tsvd", "tsgns", "dw2v"})


def cosine_similarity(u, v) -> float:
    """Raw cosine in [-1, 1]; zero vectors are an error, not similarity 0."""
    u = np.asarray(u, dtype=np.float64).ravel()
    v = np.asarray(v, dtype=np.float64).ravel()
    if u.shape != v.shape:
        raise ValueError(f"length mismatch: {u.shape[0]} vs {v.shape[0]}")
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise ZeroVectorError("cosine similarity is undefined for a zero vector")
    return float(np.dot(u, v) / (nu * nv))


@dataclass(frozen=True, eq=False)
class EmbeddingSet:
    """Row vectors for every (word, period) key.

    Row ``t * |V| + i`` holds word ``i`` in period ``t``. ``matrix`` is dense
    except for PPMI, where it is a CSR matrix over the context vocabulary.
    ``period_counts[t, i]`` is the word's weighted frequency in period ``t``;
    zero marks a key that is "unobserved in period".
    """

    method: str
    periods: tuple
    words: tuple
    matrix: object
    period_counts: Optional[np.ndarray] = None
    aligned: bool = False
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        n_rows = self.matrix.shape[0]
        if n_rows != len(self.periods) * len(self.words):
            raise ValueError(
                f"matrix has {n_rows} rows, expected {len(self.periods)} x {len(self.words)}"
            )
        if self.period_counts is not None and self.period_counts.shape != (len(self.periods), len(self.words)):
            raise ValueError("period_counts shape mismatch")
        object.__setattr__(self, "_index", {w: i for i, w in enumerate(self.words)})

    # shape -------------------------------------------------------------
    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    @property
    def n_periods(self) -> int:
        return len(self.periods)

    @property
    def vocab_size(self) -> int:
        return len(self.words)

    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self.matrix)

    @property
    def comparable(self) -> bool:
        """True when vectors of different periods live in one space."""
        return self.method in SHARED_SPACE_METHODS or self.aligned or self.n_periods == 1

    # lookup ------------------------------------------------------------
    def word_index(self, word: str) -> int:
        try:
            return self._index[word]
        except KeyError:
            raise VocabularyLookupError(f"word not in embedding set: {word!r}") from None

    def __contains__(self, word):
        return word in self._index

    def period_index(self, period) -> int:
        if period is None:
            if self.n_periods == 1:
                return 0
            raise PeriodError("a period is required for multi-period embeddings")
        if isinstance(period, (int, np.integer)) and not isinstance(period, bool):
            if 0 <= period < self.n_periods:
                return int(period)
        elif str(period) in self.periods:
            return self.periods.index(str(period))
        raise PeriodError(f"unknown period {period!r}; known: {', '.join(self.periods)}")

    def key_index(self, word: str, period=None) -> int:
        return self.period_index(period) * self.vocab_size + self.word_index(word)

    def vector(self, word: str, period=None) -> np.ndarray:
        row = self.matrix[self.key_index(word, period)]
        if sp.issparse(row):
            return row.toarray().ravel()
        return np.asarray(row, dtype=np.float64)

    def observed(self, word: str, period=None) -> bool:
        if self.period_counts is None:
            return True
        return bool(self.period_counts[self.period_index(period), self.word_index(word)] > 0)

    def observed_mask(self) -> np.ndarray:
        """Boolean (T, |V|) mask of keys seen in their period."""
        if self.period_counts is None:
            return np.ones((self.n_periods, self.vocab_size), dtype=bool)
        return self.period_counts > 0

    def period_block(self, period) -> np.ndarray:
        t = self.period_index(period)
        v = self.vocab_size
        block = self.matrix[t * v:(t + 1) * v]
        return block.toarray() if sp.issparse(block) else np.asarray(block)

    def dense_matrix(self) -> np.ndarray:
        return self.matrix.toarray() if self.is_sparse else np.asarray(self.matrix)

    def with_matrix(self, matrix, **changes) -> "EmbeddingSet":
        return replace(self, matrix=matrix, **changes)

    def keys(self):
        for p in self.periods:
            for w in self.words:
                yield w, p

    def require_comparable(self, what: str = "cross-period comparison") -> None:
        if not self.comparable:
            raise AlignmentRequiredError(
                f"{what} on independently trained '{self.method}' spaces needs an alignment map"
            )


def cross_period_cosine(es: EmbeddingSet, word: str, t0, t1, alignment=None,
                        allow_unaligned: bool = False) -> float:
    """Cosine between a word's vectors in two periods.

    Plain per-period spaces (``sgns``/``svd``) raise
    :class:`AlignmentRequiredError` unless an alignment map from ``t0`` to
    ``t1`` is supplied or ``allow_unaligned`` is set explicitly (the
    unaligned-baseline arm of the perturbation experiment).
    """
    u = es.vector(word, t0)
    v = es.vector(word, t1)
    if alignment is not None:
        u = u @ alignment.Q
    elif not es.comparable and not allow_unaligned:
        es.require_comparable()
    return cosine_similarity(u, v)


def apply_alignment(es: EmbeddingSet, maps: dict) -> EmbeddingSet:
    """Rotate plain per-period blocks into a common frame.

    ``maps`` sends period label -> AlignmentMap whose ``target_period`` is the
    reference frame; periods without a map are assumed to be the reference.
    """
    if es.is_sparse:
        raise ValueError("alignment applies to dense embeddings")
    out = np.array(es.matrix, dtype=np.float64, copy=True)
    v = es.vocab_size
    for label, amap in maps.items():
        t = es.period_index(label)
        out[t * v:(t + 1) * v] = out[t * v:(t + 1) * v] @ amap.Q
    meta = dict(es.meta, alignment={k: m.target_period for k, m in maps.items()})
    return es.with_matrix(out, aligned=True, meta=meta)
