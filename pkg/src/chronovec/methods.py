"""Build an :class:`EmbeddingSet` for any supported method from a corpus."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field, replace

import numpy as np
import scipy.sparse as sp

from .alignment import Dw2vProblem, dw2v_solve
from .cooccurrence import StreamConfig, count_all_periods, period_pair_stream, tagged_pair_stream
from .corpus import PeriodizedCorpus, Vocabulary
from .embeddings import METHODS, EmbeddingSet
from .errors import ChronovecError
from .ppmi_svd import build_ppmi, concat_tagged_ppmi, temporal_ppmi_from_counts, truncated_svd
from .sgns import TrainConfig, init_model, model_embeddings, train

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SvdConfig:
    dim: int = 300
    sigma_exponent: float = 0.0
    seed: int = 0
    solver: str = "arpack"
    # "corpus": per-period joint counts with corpus-wide marginals (aligned PPMI);
    # "period": marginals from the period alone.
    tagged_marginals: str = "corpus"


@dataclass(frozen=True)
class Dw2vConfig:
    dim: int = 50
    lam: float = 10.0
    tau: float = 50.0
    max_iter: int = 500
    grad_tol: float = 1e-6
    seed: int = 0
    max_vocab: int = 5000


@dataclass(frozen=True)
class MethodSettings:
    window: int = 2
    tagged_contexts: bool = False
    svd: SvdConfig = field(default_factory=SvdConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    dw2v: Dw2vConfig = field(default_factory=Dw2vConfig)


def period_seed(seed: int, t: int) -> int:
    """Independent seed for period ``t`` derived from a run seed."""
    return int(np.random.SeedSequence([seed, t]).generate_state(1)[0])


def period_counts_matrix(corpus: PeriodizedCorpus, vocab: Vocabulary) -> np.ndarray:
    out = np.zeros((corpus.n_periods, len(vocab)))
    for t in range(corpus.n_periods):
        for w, c in corpus.token_counts(t).items():
            i = vocab.get(w)
            if i >= 0:
                out[t, i] = c
    return out


def _temporal_ppmis(corpus, vocab, window, marginals="corpus"):
    per = count_all_periods(corpus, vocab, window)
    if marginals == "period":
        return [build_ppmi(c, vocab.words) if c.total_pairs > 0 else
                temporal_ppmi_from_counts(c, c, vocab.words) for c in per]
    whole = per[0]
    for c in per[1:]:
        whole = whole + c
    return [temporal_ppmi_from_counts(c, whole, vocab.words) for c in per]


def build_embeddings(method: str, corpus: PeriodizedCorpus, vocab: Vocabulary,
                     settings: MethodSettings = MethodSettings()) -> EmbeddingSet:
    """Train or factorize ``method`` on every period of ``corpus``.

    ``ppmi``, ``tsvd``, ``tsgns`` and ``dw2v`` produce one shared space;
    ``svd`` and ``sgns`` are fitted per period independently (unaligned).
    """
    if method not in METHODS:
        raise ChronovecError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")
    L = settings.window
    periods = corpus.periods
    counts = period_counts_matrix(corpus, vocab)
    meta = {"window": L, "corpus": corpus.fingerprint(), "vocab_size": len(vocab)}

    if method == "ppmi":
        mats = _temporal_ppmis(corpus, vocab, L, "corpus")
        stacked = sp.vstack([m.matrix for m in mats], format="csr")
        return EmbeddingSet("ppmi", periods, vocab.words, stacked, counts, meta=meta)

    if method == "tsvd":
        cfg = settings.svd
        tagged = concat_tagged_ppmi(_temporal_ppmis(corpus, vocab, L, cfg.tagged_marginals))
        _, es = truncated_svd(tagged, min(cfg.dim, min(tagged.shape)), cfg.sigma_exponent,
                              seed=cfg.seed, solver=cfg.solver)
        return es.with_matrix(es.matrix, period_counts=counts,
                              meta={**meta, **es.meta, "svd": asdict(cfg)})

    if method == "svd":
        cfg = settings.svd
        blocks = []
        for c in count_all_periods(corpus, vocab, L):
            if c.total_pairs == 0:
                raise ChronovecError(f"period {c.period} has no co-occurrences")
            m = build_ppmi(c, vocab.words)
            _, rows = truncated_svd(m.matrix, min(cfg.dim, min(m.shape)), cfg.sigma_exponent,
                                   seed=cfg.seed, solver=cfg.solver)
            blocks.append(rows)
        return EmbeddingSet("svd", periods, vocab.words, np.vstack(blocks), counts,
                            meta={**meta, "svd": asdict(cfg)})

    if method == "dw2v":
        cfg = settings.dw2v
        mats = _temporal_ppmis(corpus, vocab, L, "corpus")
        problem = Dw2vProblem([m.matrix for m in mats], cfg.dim, cfg.lam, cfg.tau, cfg.max_iter,
                              cfg.grad_tol, seed=cfg.seed, max_vocab=cfg.max_vocab,
                              words=vocab.words, periods=periods)
        es = dw2v_solve(problem)
        return es.with_matrix(es.matrix, period_counts=counts, meta={**meta, **es.meta})

    tcfg = settings.train
    stream_cfg = StreamConfig(tcfg.subsample_threshold, tcfg.seed, settings.tagged_contexts)
    if method == "tsgns":
        pairs = tagged_pair_stream(corpus, vocab, L, None, stream_cfg)
        model = init_model(vocab, corpus.n_periods, tcfg.dim, "tagged", tcfg.seed,
                           settings.tagged_contexts, periods)
        result = train(model, pairs, tcfg)
        return model_embeddings(result.model, counts,
                                meta={**meta, "train": asdict(tcfg), "loss_trace": result.loss_trace})

    # sgns: one independent plain model per period, each with its own seed
    blocks, traces = [], []
    for t in range(corpus.n_periods):
        seed_t = period_seed(tcfg.seed, t)
        pairs = period_pair_stream(corpus, vocab, L, t, replace(stream_cfg, seed=seed_t))
        model = init_model(vocab, 1, tcfg.dim, "plain", seed_t)
        result = train(model, pairs, replace(tcfg, seed=seed_t))
        blocks.append(result.model.input_weights)
        traces.append(result.loss_trace)
    return EmbeddingSet("sgns", periods, vocab.words, np.vstack(blocks), counts,
                        meta={**meta, "train": asdict(tcfg), "loss_trace": traces})
