"""Smoothness under context perturbation, on a small synthetic corpus.

A handful of probe words occur only as middle words. For each overlap level
a share of their period-t records is copied into period t+1 with every
context token replaced, and we watch the probe's cross-period cosine fall.
The shared-space methods (tsvd, ppmi) decline steadily. Independently fitted
svd starts low even at full overlap, since its periods live in unrelated
coordinate frames.

    python demos/smoothness.py
"""

from chronovec import MethodSettings, SvdConfig
from chronovec.evaluation.perturbation import smoothness_curve
from chronovec.synthetic import PlantedEffects, SyntheticConfig, make_corpus, synthetic_words

N_WORDS = 300
probes = synthetic_words(N_WORDS, 1)[:4]

syn = make_corpus(SyntheticConfig(n_words=N_WORDS, n_topics=10, records_per_period=20_000, seed=1),
                  PlantedEffects(probes=probes, probe_share=0.05))
settings = MethodSettings(svd=SvdConfig(dim=30))

report = smoothness_curve(["tsvd", "ppmi", "svd"], syn.corpus, probes,
                          alphas=(0.0, 0.2, 0.4, 0.6, 0.8, 1.0), settings=settings, min_count=5)

print(report.to_csv())
for method, agg in report.aggregates.items():
    curve = "  ".join(f"{o}%:{c:.3f}" for o, c in agg["mean_cosine"].items())
    print(f"{method:5s} {curve}  nonincreasing={agg['nonincreasing']}")
