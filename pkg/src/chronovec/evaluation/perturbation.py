"""Context-overlap perturbation and the smoothness curve built on it.

For each probe word the records centred on it in period ``t + 1`` are
replaced by copies of its period-``t`` records, then the contexts of a
seeded, weight-proportional share ``alpha`` of the copies are scrambled.
With ``alpha = 0`` the probe sees identical contexts in both periods, so a
smoothly aligned method should give cosines that fall as ``alpha`` grows.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, replace
from typing import Optional, Sequence

import numpy as np

from ..corpus import PAD, NgramRecord, PeriodizedCorpus, Vocabulary, build_vocabulary
from ..embeddings import cross_period_cosine
from ..errors import EvaluationError, ProbeWordError, UndefinedCorrelationError, ZeroVectorError
from ..methods import MethodSettings, build_embeddings
from .metrics import spearman
from .report import EvalReport

log = logging.getLogger(__name__)

DEFAULT_ALPHAS = (0.0, 0.1, 0.2, 0.3, 0.4)


@dataclass(frozen=True)
class PerturbationSpec:
    probe_words: tuple
    t: object = 0
    t_plus_1: object = None
    alpha: float = 0.0
    seed: int = 0
    # per-token replacement probability inside a selected record; 1.0 replaces all contexts
    token_prob: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "probe_words", tuple(self.probe_words))
        if not self.probe_words:
            raise ValueError("at least one probe word is required")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if not 0.0 < self.token_prob <= 1.0:
            raise ValueError("token_prob must lie in (0, 1]")

    @property
    def overlap(self):
        """Share of copied context weight left intact, in percent."""
        v = round((1.0 - self.alpha) * 100.0, 6)
        return int(v) if v == int(v) else v


def _middle_index(rec: NgramRecord) -> int:
    return len(rec.tokens) // 2


def _prefix_for_share(weights: np.ndarray, share: float) -> int:
    """Length of the prefix whose cumulative weight is closest to ``share * total``."""
    if share <= 0:
        return 0
    cum = np.concatenate([[0.0], np.cumsum(weights)])
    target = share * cum[-1]
    return int(np.argmin(np.abs(cum - target)))


def perturb_overlap(corpus: PeriodizedCorpus, spec: PerturbationSpec,
                    vocabulary: Optional[Sequence[str]] = None) -> PeriodizedCorpus:
    """Return a copy of ``corpus`` with probe contexts in ``t + 1`` overwritten.

    Replacement words are drawn uniformly from ``vocabulary`` (default: every
    word of the corpus). Selection order and replacement words depend only on
    ``seed`` and the probe, not on ``alpha``, so the scrambled records at a
    small ``alpha`` are a subset of those at a larger one.
    """
    t = corpus.period_index(spec.t)
    t1 = t + 1 if spec.t_plus_1 is None else corpus.period_index(spec.t_plus_1)
    if t1 == t:
        raise EvaluationError("t and t+1 must be different periods")
    if vocabulary is None:
        vocabulary = sorted(corpus.token_counts())
    vocabulary = np.array(list(vocabulary), dtype=object)
    shift = corpus.spec.first_year(t1) - corpus.spec.first_year(t)

    by_probe = {w: [] for w in spec.probe_words}
    for rec in corpus.records(t):
        m = rec.middle()
        if m in by_probe:
            by_probe[m].append(rec)
    missing = [w for w, recs in by_probe.items() if not recs]
    if missing:
        raise ProbeWordError(missing, corpus.periods[t])

    probes = set(spec.probe_words)
    kept = [rec for rec in corpus.records(t1) if rec.middle() not in probes]
    merged = {}
    for rec in kept:
        merged[(rec.year, rec.tokens)] = rec.match_count
    for k, w in enumerate(spec.probe_words):
        recs = by_probe[w]
        rng = np.random.default_rng([spec.seed, k])
        weights = np.array([r.match_count for r in recs], dtype=np.float64)
        # weighted sampling without replacement (Efraimidis-Spirakis keys)
        keys = np.log(rng.random(len(recs))) / weights
        order = np.argsort(-keys, kind="stable")
        n_sel = _prefix_for_share(weights[order], spec.alpha)
        selected = set(order[:n_sel].tolist())
        for j in order:
            rec = recs[j]
            mid = _middle_index(rec)
            draws = rng.integers(0, len(vocabulary), size=len(rec.tokens))
            coins = rng.random(len(rec.tokens))
            tokens = rec.tokens
            if j in selected:
                tokens = tuple(
                    tok if (i == mid or tok is PAD or coins[i] >= spec.token_prob)
                    else vocabulary[draws[i]]
                    for i, tok in enumerate(rec.tokens)
                )
            key = (rec.year + shift, tokens)
            merged[key] = merged.get(key, 0) + rec.match_count
    segs = list(corpus.segments)
    segs[t1] = tuple(NgramRecord(tok, year, c) for (year, tok), c in merged.items())
    meta = dict(corpus.meta, perturbation=asdict(spec))
    return corpus.replace_segments(segs, meta)


def smoothness_curve(methods, corpus: PeriodizedCorpus, probe_words: Sequence[str], t=0,
                     alphas: Sequence[float] = DEFAULT_ALPHAS,
                     settings: MethodSettings = MethodSettings(), seed: int = 0,
                     min_count: int = 5, vocab: Optional[Vocabulary] = None) -> EvalReport:
    """Mean probe cosine between ``t`` and ``t + 1`` at each overlap level.

    The vocabulary is fixed from the unperturbed corpus and only the two
    periods are used. Every level reuses the same training seeds; only the
    perturbation differs. Per-period ``sgns``/``svd`` are compared without
    alignment on purpose: they are the unaligned baseline.
    """
    if isinstance(methods, str):
        methods = [methods]
    t0 = corpus.period_index(t)
    pair = corpus.select_periods([t0, t0 + 1])
    if vocab is None:
        vocab = build_vocabulary(pair, min_count=min_count)
    absent = [w for w in probe_words if w not in vocab]
    if absent:
        raise ProbeWordError(absent, corpus.periods[t0])
    items, aggregates, notes = [], {}, []
    for method in methods:
        means = {}
        for alpha in alphas:
            spec = PerturbationSpec(tuple(probe_words), 0, 1, alpha, seed)
            perturbed = perturb_overlap(pair, spec, vocab.words)
            es = build_embeddings(method, perturbed, vocab, settings)
            vals = []
            for w in probe_words:
                try:
                    c = cross_period_cosine(es, w, 0, 1, allow_unaligned=True)
                except ZeroVectorError:
                    c = float("nan")
                    notes.append(f"{method} alpha={alpha}: {w} has a zero vector")
                vals.append(c)
                items.append({"method": method, "word": w, "alpha": alpha,
                              "overlap": spec.overlap, "cosine": c})
            means[spec.overlap] = float(np.nanmean(vals)) if np.any(np.isfinite(vals)) else float("nan")
            log.info("%s overlap %s%%: mean cosine %.4f", method, spec.overlap, means[spec.overlap])
        overlaps = sorted(means, reverse=True)
        ys = [means[o] for o in overlaps]
        try:
            rho = spearman(overlaps, ys) if all(np.isfinite(ys)) else float("nan")
        except UndefinedCorrelationError as exc:  # flat curve
            rho = float("nan")
            notes.append(f"{method}: {exc}")
        aggregates[method] = {
            "mean_cosine": {str(o): means[o] for o in overlaps},
            "spearman": rho,
            "nonincreasing": bool(all(a >= b for a, b in zip(ys, ys[1:]))),
        }
    cfg = asdict(settings)
    return EvalReport(
        "smoothness",
        params={"methods": list(methods), "probe_words": list(probe_words), "t": pair.periods[0],
                "t_plus_1": pair.periods[1], "alphas": list(alphas), "seed": seed,
                "min_count": min_count, "settings": cfg},
        items=items,
        aggregates=aggregates,
        provenance={"corpus": corpus.fingerprint(), "seed": seed, "vocab_size": len(vocab)},
        notes=notes,
    )


def replace_settings_seed(settings: MethodSettings, seed: int) -> MethodSettings:
    """Same settings with every stochastic component seeded by ``seed``."""
    return replace(settings, svd=replace(settings.svd, seed=seed),
                   train=replace(settings.train, seed=seed), dw2v=replace(settings.dw2v, seed=seed))
