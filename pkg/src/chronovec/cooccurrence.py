"""Window co-occurrence counts and the (tagged) training-pair stream."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, NamedTuple, Optional, Sequence

import numpy as np
import scipy.sparse as sp

from .corpus import PAD, PeriodizedCorpus, Vocabulary
from .errors import ChronovecError, VocabularyLookupError


@dataclass(frozen=True, eq=False)
class CoocCounts:
    """Sparse center x context counts for one period (or the whole corpus)."""

    period: Optional[str]
    pair_counts: sp.csr_matrix
    window: int

    @property
    def center_marginals(self) -> np.ndarray:
        return np.asarray(self.pair_counts.sum(axis=1)).ravel()

    @property
    def context_marginals(self) -> np.ndarray:
        return np.asarray(self.pair_counts.sum(axis=0)).ravel()

    @property
    def total_pairs(self) -> float:
        return float(self.pair_counts.sum())

    @property
    def shape(self):
        return self.pair_counts.shape

    def get(self, i: int, j: int) -> float:
        return float(self.pair_counts[i, j])

    def __add__(self, other: "CoocCounts") -> "CoocCounts":
        if self.window != other.window or self.shape != other.shape:
            raise ValueError("cannot add counts with different window or shape")
        return CoocCounts(None, (self.pair_counts + other.pair_counts).tocsr(), self.window)


class TaggedVocabulary:
    """Index space of (word, period) pairs: ``tag(i, t) = t * |V| + i``."""

    def __init__(self, base: Vocabulary, n_periods: int):
        if n_periods < 1:
            raise ValueError("n_periods must be >= 1")
        self.base = base
        self.n_periods = n_periods

    def __len__(self):
        return self.n_periods * len(self.base)

    def tag(self, i: int, t: int) -> int:
        if not (0 <= i < len(self.base) and 0 <= t < self.n_periods):
            raise VocabularyLookupError(f"index ({i}, {t}) out of range")
        return t * len(self.base) + i

    def untag(self, k: int):
        """Return ``(i, t)`` for tagged index ``k``."""
        if not 0 <= k < len(self):
            raise VocabularyLookupError(f"tagged index {k} out of range")
        t, i = divmod(k, len(self.base))
        return i, t

    def tag_word(self, word: str, t: int) -> int:
        return self.tag(self.base.id(word), t)


class TrainingPair(NamedTuple):
    center: int
    context: int
    weight: int


@dataclass(frozen=True, eq=False)
class TrainingPairs:
    """A materialized pair stream.

    ``centers`` are tagged row indices (``t * |V| + i``) when ``n_periods > 1``
    or tagging was requested; ``contexts`` are untagged unless
    ``tagged_contexts`` is set.
    """

    centers: np.ndarray
    contexts: np.ndarray
    weights: np.ndarray
    n_rows: int
    n_outputs: int
    vocab_size: int
    n_periods: int
    tagged_contexts: bool = False

    def __len__(self):
        return len(self.centers)

    def __iter__(self) -> Iterator[TrainingPair]:
        for c, o, w in zip(self.centers.tolist(), self.contexts.tolist(), self.weights.tolist()):
            yield TrainingPair(c, o, w)

    @property
    def total_weight(self) -> int:
        return int(self.weights.sum())

    def context_frequencies(self) -> np.ndarray:
        return np.bincount(self.contexts, weights=self.weights, minlength=self.n_outputs)

    def digest(self) -> str:
        import hashlib

        h = hashlib.sha256()
        for arr in (self.centers, self.contexts, self.weights):
            h.update(np.ascontiguousarray(arr, dtype=np.int64).tobytes())
        return h.hexdigest()


def encode_records(records: Sequence, vocab: Vocabulary):
    """Flatten records into token ids (-1 for OOV/filtered), record ids, weights."""
    index = vocab.index
    ids, rec_ids, weights = [], [], []
    for r, rec in enumerate(records):
        for tok in rec.tokens:
            ids.append(-1 if tok is PAD else index.get(tok, -1))
        rec_ids.extend([r] * len(rec.tokens))
        weights.append(rec.match_count)
    return (
        np.asarray(ids, dtype=np.int64),
        np.asarray(rec_ids, dtype=np.int64),
        np.asarray(weights, dtype=np.int64),
    )


def _window_pairs(records: Sequence, vocab: Vocabulary, window: int):
    """All (center, context, weight, center_position) with |offset| <= window.

    Rows are ordered by center position in the flattened corpus, then by
    offset (-window .. -1, 1 .. window), i.e. corpus reading order.
    """
    if window < 1:
        raise ValueError("window radius must be >= 1")
    ids, rec, weights = encode_records(records, vocab)
    cs, xs, ws, ps, ks = [], [], [], [], []
    n = len(ids)
    for d in range(1, window + 1):
        if d >= n:
            break
        a, b = ids[:-d], ids[d:]
        ok = (rec[:-d] == rec[d:]) & (a >= 0) & (b >= 0)
        pos = np.nonzero(ok)[0]
        w = weights[rec[pos]]
        # forward: center at p, context at p + d
        cs.append(a[pos]); xs.append(b[pos]); ws.append(w); ps.append(pos); ks.append(np.full(len(pos), d))
        # backward: center at p + d, context at p
        cs.append(b[pos]); xs.append(a[pos]); ws.append(w); ps.append(pos + d); ks.append(np.full(len(pos), -d))
    if not cs:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty, empty, empty
    centers = np.concatenate(cs)
    contexts = np.concatenate(xs)
    wts = np.concatenate(ws)
    position = np.concatenate(ps)
    offset = np.concatenate(ks)
    order = np.lexsort((offset, position))
    return centers[order], contexts[order], wts[order], position[order]


def count_pairs(corpus: PeriodizedCorpus, vocab: Vocabulary, window: int, period=None) -> CoocCounts:
    """Weighted symmetric-window co-occurrence counts.

    Every in-vocabulary token is a center; every in-vocabulary token within
    ``window`` positions of it in the same record is a context, contributing
    the record's match count. ``period=None`` counts the whole corpus.
    """
    if period is None:
        records = list(corpus.records())
        label = None
    else:
        t = corpus.period_index(period)
        records = corpus.segments[t]
        label = corpus.periods[t]
    centers, contexts, weights, _ = _window_pairs(records, vocab, window)
    v = len(vocab)
    mat = sp.coo_matrix(
        (weights.astype(np.float64), (centers, contexts)), shape=(v, v)
    ).tocsr()
    mat.sum_duplicates()
    mat.sort_indices()
    return CoocCounts(label, mat, window)


def count_all_periods(corpus: PeriodizedCorpus, vocab: Vocabulary, window: int) -> list:
    return [count_pairs(corpus, vocab, window, t) for t in range(corpus.n_periods)]


@dataclass(frozen=True)
class StreamConfig:
    subsample_threshold: Optional[float] = None
    seed: int = 0
    tagged_contexts: bool = False


def _keep_probability(vocab: Vocabulary, threshold: float) -> np.ndarray:
    freq = np.array([vocab.counts[w] for w in vocab.words], dtype=np.float64)
    freq /= freq.sum()
    return np.minimum(1.0, (np.sqrt(freq / threshold) + 1.0) * threshold / freq)


def tagged_pair_stream(corpus: PeriodizedCorpus, vocab: Vocabulary, window: int,
                       periods=None, config: Optional[StreamConfig] = None) -> TrainingPairs:
    """Training pairs for every selected period with period-tagged centers.

    Without subsampling the multiset of (untagged center, context) pairs equals
    the union of :func:`count_pairs` over the periods. With
    ``subsample_threshold`` each pair's weight is thinned binomially using the
    word2vec keep probability of its context word.
    """
    config = config or StreamConfig()
    idx = list(range(corpus.n_periods)) if periods is None else [corpus.period_index(p) for p in periods]
    v = len(vocab)
    n_t = len(idx)
    chunks_c, chunks_o, chunks_w = [], [], []
    for rank, t in enumerate(idx):
        c, o, w, _ = _window_pairs(corpus.segments[t], vocab, window)
        chunks_c.append(c + rank * v)
        chunks_o.append(o + rank * v if config.tagged_contexts else o)
        chunks_w.append(w)
    centers = np.concatenate(chunks_c) if chunks_c else np.zeros(0, np.int64)
    contexts = np.concatenate(chunks_o) if chunks_o else np.zeros(0, np.int64)
    weights = np.concatenate(chunks_w) if chunks_w else np.zeros(0, np.int64)
    if config.subsample_threshold:
        keep = _keep_probability(vocab, config.subsample_threshold)
        rng = np.random.default_rng(config.seed)
        weights = rng.binomial(weights, keep[contexts % v])
        mask = weights > 0
        centers, contexts, weights = centers[mask], contexts[mask], weights[mask]
    return TrainingPairs(
        centers=centers,
        contexts=contexts,
        weights=weights.astype(np.int64),
        n_rows=n_t * v,
        n_outputs=n_t * v if config.tagged_contexts else v,
        vocab_size=v,
        n_periods=n_t,
        tagged_contexts=config.tagged_contexts,
    )


def period_pair_stream(corpus: PeriodizedCorpus, vocab: Vocabulary, window: int, period,
                       config: Optional[StreamConfig] = None) -> TrainingPairs:
    """Untagged pairs of a single period (input for a plain per-period SGNS)."""
    config = config or StreamConfig()
    if config.tagged_contexts:
        raise ChronovecError("tagged contexts require a tagged stream")
    return tagged_pair_stream(corpus, vocab, window, [period], config)


def _fmt_count(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def write_cooc(counts: CoocCounts, vocab: Vocabulary, path) -> None:
    """Sorted ``center<TAB>context<TAB>count`` text with a marginal-totals header."""
    m = counts.pair_counts.tocoo()
    order = np.lexsort((m.col, m.row))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# chronovec-cooc v1\n")
        fh.write(f"# period: {counts.period if counts.period is not None else '*'}\n")
        fh.write(f"# window: {counts.window}\n")
        fh.write(f"# vocab_size: {len(vocab)}\n")
        fh.write(f"# total_pairs: {_fmt_count(counts.total_pairs)}\n")
        fh.write(f"# center_marginal_total: {_fmt_count(counts.center_marginals.sum())}\n")
        fh.write(f"# context_marginal_total: {_fmt_count(counts.context_marginals.sum())}\n")
        for k in order:
            fh.write(f"{vocab.words[m.row[k]]}\t{vocab.words[m.col[k]]}\t{_fmt_count(m.data[k])}\n")


def read_cooc(path, vocab: Vocabulary) -> CoocCounts:
    header = {}
    rows, cols, vals = [], [], []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("#"):
                if ":" in line:
                    key, value = line[1:].split(":", 1)
                    header[key.strip()] = value.strip()
                continue
            a, b, c = line.rstrip("\n").split("\t")
            rows.append(vocab.id(a))
            cols.append(vocab.id(b))
            vals.append(float(c))
    v = len(vocab)
    mat = sp.csr_matrix((vals, (rows, cols)), shape=(v, v))
    period = header.get("period")
    counts = CoocCounts(None if period == "*" else period, mat, int(header.get("window", 0)))
    expected = header.get("total_pairs")
    if expected is not None and abs(float(expected) - counts.total_pairs) > 1e-9 * max(1.0, counts.total_pairs):
        raise ChronovecError(f"{path}: total_pairs header {expected} != body sum {counts.total_pairs}")
    return counts
