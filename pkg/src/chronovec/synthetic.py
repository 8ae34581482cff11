"""Seeded topic-model corpora with planted effects, for tests and demos.

Every word belongs to one topic. A 5-gram is generated by drawing a middle
word by frequency and four context words, mostly from the middle word's
topic. Effects are planted by changing, per period, which pool a word's
contexts come from (shifts, drifts, private context pools) or how often it
is drawn (frequency trends).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .corpus import NgramRecord, PeriodizedCorpus, PeriodSpec

_ONSETS = ("b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z",
           "br", "dr", "kl", "pr", "st", "tr")
_VOWELS = ("a", "e", "i", "o", "u", "ai", "ou")


def synthetic_words(n: int, seed: int = 0) -> tuple:
    """``n`` distinct lowercase alphabetic pseudo-words."""
    rng = np.random.default_rng(seed)
    out, seen = [], set()
    while len(out) < n:
        k = int(rng.integers(2, 4))
        w = "".join(_ONSETS[rng.integers(len(_ONSETS))] + _VOWELS[rng.integers(len(_VOWELS))]
                    for _ in range(k))
        if w not in seen:
            seen.add(w)
            out.append(w)
    return tuple(out)


@dataclass(frozen=True)
class SyntheticConfig:
    n_words: int = 2000
    n_topics: int = 20
    n_periods: int = 2
    start_year: int = 2000
    records_per_period: int = 100_000
    max_match_count: int = 20
    zipf_exponent: float = 0.5
    topic_purity: float = 0.9
    ngram: int = 5
    seed: int = 0


@dataclass
class PlantedEffects:
    """What to plant. Words are given by name, topics by index.

    ``probes``: words that appear only as middle words (never as context),
    each drawn with probability ``probe_share / len(probes)`` per record.
    ``shifts``: word -> (new topic, first period of the new topic).
    ``drifts``: word -> (topic A, topic B); the chance of drawing contexts
    from B grows linearly from 0 in the first period to 1 in the last.
    ``trends``: word -> multiplicative frequency factor per period.
    ``pools``: (word, period) -> list of context words used instead of the topic.
    """

    probes: tuple = ()
    probe_share: float = 0.0
    shifts: dict = field(default_factory=dict)
    drifts: dict = field(default_factory=dict)
    trends: dict = field(default_factory=dict)
    pools: dict = field(default_factory=dict)


@dataclass(frozen=True, eq=False)
class SyntheticCorpus:
    corpus: PeriodizedCorpus
    words: tuple
    topic_of: np.ndarray
    effects: PlantedEffects
    config: SyntheticConfig

    def topic_words(self, k: int) -> tuple:
        return tuple(w for w, t in zip(self.words, self.topic_of) if t == k)


def make_corpus(cfg: SyntheticConfig = SyntheticConfig(),
                effects: Optional[PlantedEffects] = None) -> SyntheticCorpus:
    effects = effects or PlantedEffects()
    rng = np.random.default_rng(cfg.seed)
    words = synthetic_words(cfg.n_words, cfg.seed)
    index = {w: i for i, w in enumerate(words)}
    V, K, L = cfg.n_words, cfg.n_topics, cfg.ngram
    topic_of = np.arange(V) % K
    base = 1.0 / (rng.permutation(V) + 10.0) ** cfg.zipf_exponent

    probe_ids = np.array([index[w] for w in effects.probes], dtype=np.int64)
    ctx_weight = base.copy()
    ctx_weight[probe_ids] = 0.0
    topic_pools = []
    for k in range(K):
        members = np.flatnonzero((topic_of == k) & (ctx_weight > 0))
        p = ctx_weight[members]
        topic_pools.append((members, p / p.sum()))
    glob = np.flatnonzero(ctx_weight > 0)
    glob_pool = (glob, ctx_weight[glob] / ctx_weight[glob].sum())

    mid = L // 2
    spec = PeriodSpec(cfg.start_year, cfg.start_year + cfg.n_periods)
    records = []
    for t in range(cfg.n_periods):
        w = base.copy()
        w[probe_ids] = 0.0
        for word, factor in effects.trends.items():
            w[index[word]] *= factor ** t
        w /= w.sum()
        p = w * (1.0 - effects.probe_share)
        if len(probe_ids):
            p[probe_ids] = effects.probe_share / len(probe_ids)
        R = cfg.records_per_period
        centers = rng.choice(V, size=R, p=p / p.sum())

        # pool id per record: topic index, or K + j for an explicit pool
        pool_id = topic_of[centers].copy()
        for word, (new_topic, start) in effects.shifts.items():
            if t >= start:
                pool_id[centers == index[word]] = new_topic
        frac = t / max(1, cfg.n_periods - 1)
        for word, (a, b) in effects.drifts.items():
            sel = np.flatnonzero(centers == index[word])
            pool_id[sel] = np.where(rng.random(sel.size) < frac, b, a)
        extra = []
        for (word, period), pool in effects.pools.items():
            if period == t:
                ids = np.array([index[x] for x in pool])
                pool_id[centers == index[word]] = K + len(extra)
                extra.append((ids, np.full(ids.size, 1.0 / ids.size)))
        pools = topic_pools + extra

        ctx = np.empty((R, L - 1), dtype=np.int64)
        for j, (members, probs) in enumerate(pools):
            rows = np.flatnonzero(pool_id == j)
            if rows.size:
                ctx[rows] = members[rng.choice(members.size, size=(rows.size, L - 1), p=probs)]
        # off-topic noise (explicit pools stay pure)
        noise = (rng.random((R, L - 1)) > cfg.topic_purity) & (pool_id < K)[:, None]
        ctx[noise] = glob_pool[0][rng.choice(glob_pool[0].size, size=int(noise.sum()), p=glob_pool[1])]
        counts = rng.integers(1, cfg.max_match_count + 1, size=R)
        year = cfg.start_year + t
        for c, row, n in zip(centers, ctx, counts):
            toks = [words[x] for x in row]
            toks.insert(mid, words[c])
            records.append(NgramRecord(tuple(toks), year, int(n)))
    corpus = PeriodizedCorpus.from_records(records, spec, meta={"synthetic": cfg.seed})
    return SyntheticCorpus(corpus, words, topic_of, effects, cfg)
