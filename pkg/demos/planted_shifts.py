"""Recover words whose meaning was moved between two periods.

Five words switch topic in the second period. One TSGNS model is trained over
both periods, so every word gets a vector per period in a shared space and
displacement is just 1 - cosine, no alignment step needed. The planted words
should sit at the top of the ranking.

    python demos/planted_shifts.py
"""

from chronovec import MethodSettings, TrainConfig, build_embeddings, build_vocabulary
from chronovec.evaluation.diachronic import known_shift_benchmark, semantic_displacement
from chronovec.synthetic import PlantedEffects, SyntheticConfig, make_corpus, synthetic_words

N_WORDS, N_TOPICS, SEED = 500, 10, 3
words = synthetic_words(N_WORDS, SEED)
shifted = words[:5]
# word i belongs to topic i % N_TOPICS; send it halfway round from period 1 on
shifts = {w: ((i + N_TOPICS // 2) % N_TOPICS, 1) for i, w in enumerate(shifted)}

syn = make_corpus(SyntheticConfig(n_words=N_WORDS, n_topics=N_TOPICS, records_per_period=40_000, seed=SEED),
                  PlantedEffects(shifts=shifts))
vocab = build_vocabulary(syn.corpus, min_count=5)
settings = MethodSettings(train=TrainConfig(dim=50, epochs=3, samples_per_epoch=600_000, seed=SEED))
es = build_embeddings("tsgns", syn.corpus, vocab, settings)

print("top displaced words (* = planted):")
for rank, (w, d) in enumerate(semantic_displacement(es, 0, 1, top_k=10).ranking, 1):
    print(f"{rank:3d}  {w:12s} {d:.3f} {'*' if w in shifted else ''}")

control = [w for w in words[5:] if w in vocab][:100]
report = known_shift_benchmark(es, shifted, control)
print()
for k, v in sorted(report.aggregates.items()):
    print(f"{k}: {v}")
