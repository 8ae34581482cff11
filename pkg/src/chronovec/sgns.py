"""Skip-gram with negative sampling, plain and period-tagged (TSGNS).

In tagged mode the input layer has one row per (period, word) key while the
output layer (context vectors) is shared by all periods, so every period's
word vectors are fitted against the same context coordinates.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numba
import numpy as np

from .cooccurrence import TrainingPair, TrainingPairs
from .corpus import Vocabulary
from .embeddings import EmbeddingSet
from .errors import (
    ChronovecError,
    PeriodError,
    TrainingDataError,
    TrainingDivergedError,
    VocabularyLookupError,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    dim: int = 300
    epochs: int = 5
    learning_rate: float = 0.025
    negatives: int = 5
    noise_exponent: float = 0.75
    subsample_threshold: Optional[float] = None
    seed: int = 0
    workers: int = 1
    samples_per_epoch: Optional[int] = None
    lr_floor_ratio: float = 1e-4

    def __post_init__(self):
        if self.negatives < 1:
            raise ValueError("negatives must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass(eq=False)
class SgnsModel:
    input_weights: np.ndarray
    output_weights: np.ndarray
    vocab: Vocabulary
    mode: str = "plain"
    periods: tuple = ("all",)
    tagged_contexts: bool = False
    meta: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.input_weights.shape[1]

    @property
    def n_periods(self) -> int:
        return len(self.periods)

    def copy(self) -> "SgnsModel":
        return replace(self, input_weights=self.input_weights.copy(),
                       output_weights=self.output_weights.copy(), meta=dict(self.meta))


def init_model(vocab: Vocabulary, n_periods: int = 1, dim: int = 300, mode: str = "plain",
               seed: int = 0, tagged_contexts: bool = False,
               periods: Optional[Sequence[str]] = None) -> SgnsModel:
    """Input rows uniform in ``(-0.5/N, 0.5/N)``, output rows zero."""
    if dim < 1:
        raise ValueError("hidden dimension must be >= 1")
    if mode not in ("plain", "tagged"):
        raise ValueError(f"mode must be 'plain' or 'tagged', got {mode!r}")
    if mode == "plain" and n_periods != 1:
        raise ValueError("plain mode embeds a single period; use mode='tagged' for T > 1")
    if tagged_contexts and mode != "tagged":
        raise ValueError("tagged contexts require tagged mode")
    if periods is None:
        periods = tuple(str(t) for t in range(n_periods)) if mode == "tagged" else ("all",)
    periods = tuple(str(p) for p in periods)
    if len(periods) != n_periods:
        raise ValueError("period labels do not match n_periods")
    v = len(vocab)
    rng = np.random.default_rng(seed)
    w_in = (rng.random((n_periods * v, dim)) - 0.5) / dim
    n_out = n_periods * v if tagged_contexts else v
    w_out = np.zeros((n_out, dim))
    return SgnsModel(w_in, w_out, vocab, mode, periods, tagged_contexts, {"seed": seed})


def softmax_prob(model: SgnsModel, context: int, center: int) -> float:
    """Exact softmax probability of output node ``context`` given input row ``center``."""
    logits = model.output_weights @ model.input_weights[center]
    logits = logits - logits.max()
    p = np.exp(logits)
    return float(p[context] / p.sum())


def softmax_distribution(model: SgnsModel, center: int) -> np.ndarray:
    logits = model.output_weights @ model.input_weights[center]
    p = np.exp(logits - logits.max())
    return p / p.sum()


def _log_sigmoid_neg(x):
    # -log(sigmoid(x)), stable for large |x|
    return np.logaddexp(0.0, -x)


def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def pair_loss_and_gradient(model: SgnsModel, pair, negatives: Sequence[int]):
    """Negative-sampling loss of one pair and its sparse gradient.

    ``loss = -log s(o_c . h) - sum_n log s(-o_n . h)`` with ``h`` the center's
    input row. The gradient is returned as ``(row, side, delta)`` triples with
    side ``"in"`` or ``"out"``; repeated rows (a negative equal to the true
    context, duplicate negatives) are summed into one triple.
    """
    if isinstance(pair, TrainingPair):
        center, context = pair.center, pair.context
    else:
        center, context = pair[0], pair[1]
    h = model.input_weights[center]
    o_c = model.output_weights[context]
    x = float(o_c @ h)
    loss = float(_log_sigmoid_neg(x))
    g = _sigmoid(x) - 1.0
    grad_h = g * o_c
    out_grads = {context: g * h}
    for n in negatives:
        o_n = model.output_weights[n]
        xn = float(o_n @ h)
        loss += float(_log_sigmoid_neg(-xn))
        gn = _sigmoid(xn)
        grad_h = grad_h + gn * o_n
        out_grads[n] = out_grads.get(n, 0.0) + gn * h
    sketch = [(int(center), "in", grad_h)]
    sketch.extend((int(r), "out", d) for r, d in sorted(out_grads.items()))
    return loss, sketch


@numba.njit(cache=True, nogil=True)
def _sgd_span(w_in, w_out, centers, contexts, negs, start, stop, step0, total, lr0, floor):
    dim = w_in.shape[1]
    k = negs.shape[1]
    grad = np.empty(dim)
    loss = 0.0
    for s in range(start, stop):
        frac = (step0 + s) / total
        lr = lr0 * (1.0 - frac)
        if lr < lr0 * floor:
            lr = lr0 * floor
        c = centers[s]
        o = contexts[s]
        for j in range(dim):
            grad[j] = 0.0
        for q in range(k + 1):
            if q == 0:
                target = o
                label = 1.0
            else:
                target = negs[s, q - 1]
                if target == o:
                    continue
                label = 0.0
            x = 0.0
            for j in range(dim):
                x += w_in[c, j] * w_out[target, j]
            if x > 0:
                sig = 1.0 / (1.0 + math.exp(-x))
            else:
                ex = math.exp(x)
                sig = ex / (1.0 + ex)
            if label == 1.0:
                loss += math.log1p(math.exp(-x)) if x > 0 else -x + math.log1p(math.exp(x))
            else:
                loss += math.log1p(math.exp(x)) if x < 0 else x + math.log1p(math.exp(-x))
            g = sig - label
            for j in range(dim):
                grad[j] += g * w_out[target, j]
                w_out[target, j] -= lr * g * w_in[c, j]
        for j in range(dim):
            w_in[c, j] -= lr * grad[j]
    return loss


@numba.njit(cache=True, parallel=True)
def _sgd_hogwild(w_in, w_out, centers, contexts, negs, step0, total, lr0, floor, workers):
    n = centers.shape[0]
    losses = np.zeros(workers)
    span = (n + workers - 1) // workers
    for w in numba.prange(workers):
        lo = w * span
        hi = min(n, lo + span)
        if lo < hi:
            losses[w] = _sgd_span(w_in, w_out, centers, contexts, negs, lo, hi, step0, total, lr0, floor)
    return losses.sum()


@dataclass
class TrainResult:
    model: SgnsModel
    loss_trace: list
    samples: int
    config: TrainConfig


def noise_distribution(pairs: TrainingPairs, exponent: float = 0.75) -> np.ndarray:
    freq = pairs.context_frequencies() ** exponent
    return freq / freq.sum()


def train(model: SgnsModel, pairs: TrainingPairs, config: TrainConfig,
          chunk_size: int = 1 << 18) -> TrainResult:
    """SGD over weight-proportional pair samples with linear learning-rate decay.

    Each epoch draws ``samples_per_epoch`` pairs (default: the stream's total
    weight, i.e. every weighted occurrence once in expectation) with
    probability proportional to their match-count weight. Negatives come from
    the unigram context distribution raised to ``noise_exponent``. The
    learning rate falls linearly over all samples of all epochs, floored at
    ``lr_floor_ratio * learning_rate``. With ``workers=1`` results are
    bit-reproducible for a given seed; ``workers>1`` runs lock-free
    (Hogwild-style) and is not.
    """
    if len(pairs) == 0 or pairs.total_weight == 0:
        raise TrainingDataError("no training data: the pair stream is empty")
    if pairs.n_rows != model.input_weights.shape[0]:
        raise ChronovecError(
            f"stream has {pairs.n_rows} center rows, model has {model.input_weights.shape[0]}"
        )
    if pairs.n_outputs != model.output_weights.shape[0]:
        raise ChronovecError("stream and model disagree on the output vocabulary")
    model = model.copy()
    rng = np.random.default_rng(config.seed)
    cum_w = np.cumsum(pairs.weights, dtype=np.float64)
    noise_cdf = np.cumsum(noise_distribution(pairs, config.noise_exponent))
    noise_cdf /= noise_cdf[-1]
    per_epoch = int(config.samples_per_epoch or pairs.total_weight)
    total = float(per_epoch * config.epochs)
    w_in, w_out = model.input_weights, model.output_weights
    centers_all = pairs.centers.astype(np.int64)
    contexts_all = pairs.contexts.astype(np.int64)
    trace = []
    step = 0
    for epoch in range(config.epochs):
        epoch_loss = 0.0
        done = 0
        while done < per_epoch:
            n = min(chunk_size, per_epoch - done)
            pick = np.searchsorted(cum_w, rng.random(n) * cum_w[-1], side="right")
            negs = np.searchsorted(noise_cdf, rng.random((n, config.negatives)), side="right")
            np.minimum(negs, len(noise_cdf) - 1, out=negs)
            c = centers_all[pick]
            o = contexts_all[pick]
            if config.workers == 1:
                loss = _sgd_span(w_in, w_out, c, o, negs, 0, n, float(step), total,
                                 config.learning_rate, config.lr_floor_ratio)
            else:
                loss = _sgd_hogwild(w_in, w_out, c, o, negs, float(step), total,
                                    config.learning_rate, config.lr_floor_ratio, config.workers)
            if not math.isfinite(loss):
                raise TrainingDivergedError(
                    f"non-finite loss in epoch {epoch} after {done} samples "
                    f"(learning_rate={config.learning_rate})"
                )
            epoch_loss += loss
            done += n
            step += n
        trace.append(epoch_loss / per_epoch)
        log.info("epoch %d/%d mean loss %.5f", epoch + 1, config.epochs, trace[-1])
    model.meta.update(epochs=config.epochs, seed=config.seed, samples=step)
    return TrainResult(model, trace, step, config)


def embedding_of(model: SgnsModel, word: str, period=None) -> np.ndarray:
    """Input-layer row of ``word`` (in ``period`` for tagged models)."""
    i = model.vocab.get(word)
    if i < 0:
        raise VocabularyLookupError(f"word not in vocabulary: {word!r}")
    if model.mode == "plain":
        if period is not None:
            raise PeriodError("plain models have no period; do not pass one")
        return model.input_weights[i]
    if period is None:
        raise PeriodError("tagged models need a period")
    if isinstance(period, (int, np.integer)) and 0 <= period < model.n_periods:
        t = int(period)
    elif str(period) in model.periods:
        t = model.periods.index(str(period))
    else:
        raise PeriodError(f"unknown period {period!r}")
    return model.input_weights[t * len(model.vocab) + i]


def model_embeddings(model: SgnsModel, period_counts=None, meta=None) -> EmbeddingSet:
    method = "tsgns" if model.mode == "tagged" else "sgns"
    info = {"dim": model.dim, "tagged_contexts": model.tagged_contexts, **model.meta, **(meta or {})}
    return EmbeddingSet(method, tuple(model.periods), tuple(model.vocab.words),
                        model.input_weights.copy(), period_counts=period_counts, meta=info)
