"""Rank correlation, word-similarity benchmarks and the norm/frequency check."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.stats import rankdata

from ..corpus import PeriodizedCorpus
from ..embeddings import EmbeddingSet
from ..errors import EvaluationError, UndefinedCorrelationError, VocabularyLookupError
from .report import EvalReport


def spearman(xs, ys) -> float:
    """Pearson correlation of average ranks (ties share their mean rank)."""
    x = np.asarray(xs, dtype=np.float64).ravel()
    y = np.asarray(ys, dtype=np.float64).ravel()
    if x.shape != y.shape:
        raise ValueError(f"length mismatch: {x.size} vs {y.size}")
    if x.size < 2:
        raise ValueError("spearman needs at least two observations")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("spearman inputs must be finite")
    rx = rankdata(x) - (x.size + 1) / 2.0
    ry = rankdata(y) - (y.size + 1) / 2.0
    sxx = float(rx @ rx)
    syy = float(ry @ ry)
    if sxx == 0.0 or syy == 0.0:
        raise UndefinedCorrelationError("rank correlation is undefined for a constant series")
    return float(rx @ ry) / np.sqrt(sxx * syy)


def read_similarity_pairs(path) -> list:
    """``word1<TAB>word2<TAB>score`` lines; ``#`` comments and blank lines skipped.

    Whitespace-separated files (MEN ships space-separated) are accepted too.
    """
    pairs = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t") if "\t" in line else line.split()
        if len(parts) < 3:
            raise EvaluationError(f"{path}:{lineno}: expected word1, word2, score")
        try:
            score = float(parts[2])
        except ValueError:
            if not pairs:  # header row
                continue
            raise EvaluationError(f"{path}:{lineno}: bad score {parts[2]!r}") from None
        pairs.append((parts[0].lower(), parts[1].lower(), score))
    return pairs


def read_word_list(path) -> list:
    """One word per line; ``#`` starts a comment."""
    words = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        w = line.split("#", 1)[0].strip()
        if w:
            words.append(w)
    return words


def _unit(v):
    n = np.linalg.norm(v)
    return None if n == 0 else v / n


def _policy_vector(es: EmbeddingSet, word: str, policy):
    """Vector of ``word`` under the period policy, or None if unavailable."""
    if word not in es:
        return None
    if policy == "mean":
        es.require_comparable("averaging vectors across periods")
        vs = [es.vector(word, t) for t in range(es.n_periods) if es.observed(word, t)]
        vs = [u for u in map(_unit, vs) if u is not None]
        return np.mean(vs, axis=0) if vs else None
    if policy == "first":
        t = 0
    elif policy == "last":
        t = es.n_periods - 1
    else:
        t = es.period_index(policy)
    if not es.observed(word, t):
        return None
    v = es.vector(word, t)
    return v if np.any(v) else None


def similarity_benchmark(es: EmbeddingSet, pairs: Sequence, policy="last") -> EvalReport:
    """Spearman between model cosines and human scores over covered pairs.

    ``policy`` picks the period whose vectors are compared: ``"first"``,
    ``"last"``, a period label, or ``"mean"`` (average of the unit vectors
    over periods where the word occurs; needs a shared space).
    """
    model, human, items = [], [], []
    missing = 0
    for w1, w2, score in pairs:
        u = _policy_vector(es, w1, policy)
        v = _policy_vector(es, w2, policy)
        if u is None or v is None:
            missing += 1
            continue
        cos = float(u @ v / (np.linalg.norm(u) * np.linalg.norm(v)))
        model.append(cos)
        human.append(float(score))
        items.append({"word1": w1, "word2": w2, "human": float(score), "cosine": cos})
    if not items:
        raise EvaluationError("no similarity pair is covered by the embedding vocabulary")
    rho = spearman(model, human) if len(items) >= 2 else float("nan")
    return EvalReport(
        "similarity",
        params={"policy": policy, "n_pairs": len(pairs)},
        items=items,
        aggregates={"spearman": rho, "coverage": len(items) / len(pairs),
                    "covered": len(items), "missing": missing},
        provenance={"method": es.method, "periods": list(es.periods), **_emb_provenance(es)},
    )


def _emb_provenance(es: EmbeddingSet) -> dict:
    keep = ("corpus", "config_hash", "seed", "window")
    return {k: es.meta[k] for k in keep if k in es.meta}


def norm_frequency_correlation(es: EmbeddingSet, corpus: PeriodizedCorpus, words=None,
                               absent: str = "skip") -> EvalReport:
    """Per word, Spearman across periods between vector norm and relative frequency.

    Relative frequency is the period count over the period's token total.
    Words missing from some period are skipped (``absent="skip"``) or raise
    (``absent="error"``); words with a constant series are skipped with a note.
    """
    if es.n_periods < 3:
        raise EvaluationError("norm/frequency correlation needs at least three periods")
    if tuple(corpus.periods) != tuple(es.periods):
        raise EvaluationError("corpus periods do not match the embedding periods")
    totals = np.array([corpus.total_tokens(t) for t in range(corpus.n_periods)], dtype=np.float64)
    counts = [corpus.token_counts(t) for t in range(corpus.n_periods)]
    words = list(es.words if words is None else words)
    items, notes = [], []
    skipped_absent = 0
    for w in words:
        if w not in es:
            if absent == "error":
                raise VocabularyLookupError(f"word not in embeddings: {w!r}")
            skipped_absent += 1
            continue
        freq = np.array([counts[t].get(w, 0) for t in range(es.n_periods)], dtype=np.float64)
        if np.any(freq == 0):
            if absent == "error":
                raise EvaluationError(f"word {w!r} is absent from some period")
            skipped_absent += 1
            continue
        freq /= totals
        norms = np.array([np.linalg.norm(es.vector(w, t)) for t in range(es.n_periods)])
        try:
            rho = spearman(norms, freq)
        except UndefinedCorrelationError:
            notes.append(f"{w}: constant series, skipped")
            continue
        items.append({"word": w, "spearman": rho, "norms": norms.tolist(), "frequency": freq.tolist()})
    if not items:
        raise EvaluationError("no word has a usable norm/frequency series")
    return EvalReport(
        "norms",
        params={"absent": absent, "n_words": len(words)},
        items=items,
        aggregates={"mean_spearman": float(np.mean([it["spearman"] for it in items])),
                    "evaluated": len(items), "skipped_absent": skipped_absent,
                    "skipped_constant": len(notes)},
        provenance={"method": es.method, "periods": list(es.periods), **_emb_provenance(es)},
        notes=notes,
    )
