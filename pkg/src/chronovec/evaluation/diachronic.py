"""Semantic displacement, known-shift scoring, temporal neighbors and trajectories."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp

from ..embeddings import EmbeddingSet
from ..errors import EvaluationError, ZeroVectorError
from ..ppmi_svd import _fix_signs
from .metrics import _emb_provenance, spearman
from .report import EvalReport


def _row_norms(block):
    if sp.issparse(block):
        return np.sqrt(np.asarray(block.multiply(block).sum(axis=1)).ravel())
    return np.linalg.norm(block, axis=1)


def _block(es: EmbeddingSet, t: int):
    v = es.vocab_size
    return es.matrix[t * v:(t + 1) * v]


@dataclass(frozen=True)
class Displacement:
    ranking: tuple      # ((word, displacement), ...) descending
    excluded: int
    t0: str
    t1: str

    def top(self, k: int) -> tuple:
        return self.ranking[:k]

    def as_dict(self) -> dict:
        return dict(self.ranking)


def semantic_displacement(es: EmbeddingSet, t0, t1, top_k: Optional[int] = None,
                          alignment=None) -> Displacement:
    """Rank words by ``1 - cos(w@t0, w@t1)``, largest first, ties by word.

    Words unobserved in either period (or with a zero vector) are left out and
    counted in ``excluded``. Plain per-period spaces need ``alignment`` (a map
    from ``t0`` into ``t1``'s frame).
    """
    if alignment is None:
        es.require_comparable("semantic displacement")
    i0, i1 = es.period_index(t0), es.period_index(t1)
    a, b = _block(es, i0), _block(es, i1)
    if alignment is not None:
        a = np.asarray(a) @ alignment.Q
    if sp.issparse(a):
        dots = np.asarray(a.multiply(b).sum(axis=1)).ravel()
    else:
        dots = np.einsum("ij,ij->i", np.asarray(a), np.asarray(b))
    na, nb = _row_norms(a), _row_norms(b)
    mask = es.observed_mask()
    valid = mask[i0] & mask[i1] & (na > 0) & (nb > 0)
    with np.errstate(invalid="ignore", divide="ignore"):
        disp = 1.0 - dots / (na * nb)
    idx = np.flatnonzero(valid)
    words = np.array(es.words, dtype=object)
    order = sorted(idx, key=lambda i: (-disp[i], words[i]))
    if top_k is not None:
        order = order[:max(0, int(top_k))]
    ranking = tuple((str(words[i]), float(disp[i])) for i in order)
    return Displacement(ranking, int(len(valid) - valid.sum()), es.periods[i0], es.periods[i1])


def known_shift_benchmark(es: EmbeddingSet, shifted: Sequence[str], control: Sequence[str],
                          t0=0, t1=-1, ks=(10, 50), alignment=None) -> EvalReport:
    """Score displacement against shifted / control word labels.

    Reports the Spearman correlation between displacement and the binary label
    (1 = shifted), the mean displacement gap (shifted minus control) and
    precision@k: the share of the global top-k displacement ranking made of
    labeled shifted words, out of ``min(k, n_shifted)``.
    """
    overlap = set(shifted) & set(control)
    if overlap:
        raise EvaluationError(f"shifted and control lists overlap: {sorted(overlap)}")
    if t1 == -1:
        t1 = es.n_periods - 1
    disp = semantic_displacement(es, t0, t1, alignment=alignment)
    table = disp.as_dict()
    s_in = [w for w in shifted if w in table]
    c_in = [w for w in control if w in table]
    if not s_in or not c_in:
        raise EvaluationError(
            f"after vocabulary filtering: {len(s_in)} shifted and {len(c_in)} control words remain"
        )
    values = [table[w] for w in s_in] + [table[w] for w in c_in]
    labels = [1] * len(s_in) + [0] * len(c_in)
    rho = spearman(values, labels)
    gap = float(np.mean([table[w] for w in s_in]) - np.mean([table[w] for w in c_in]))
    ranked = [w for w, _ in disp.ranking]
    s_set = set(s_in)
    precision = {}
    for k in ks:
        hits = sum(w in s_set for w in ranked[:k])
        precision[f"precision@{k}"] = hits / min(k, len(s_in))
    rank_of = {w: r + 1 for r, w in enumerate(ranked)}
    items = [{"word": w, "label": "shifted" if lab else "control", "displacement": d,
              "rank": rank_of[w]} for w, lab, d in zip(s_in + c_in, labels, values)]
    return EvalReport(
        "shifts",
        params={"t0": disp.t0, "t1": disp.t1, "ks": list(ks), "aligned": alignment is not None},
        items=items,
        aggregates={"label_spearman": rho, "mean_gap": gap, **precision,
                    "shifted_used": len(s_in), "control_used": len(c_in),
                    "shifted_missing": len(shifted) - len(s_in),
                    "control_missing": len(control) - len(c_in), "excluded": disp.excluded},
        provenance={"method": es.method, **_emb_provenance(es)},
    )


def temporal_neighbors(es: EmbeddingSet, word: str, period, k: int,
                       target_periods=None) -> list:
    """Top-``k`` ``(word, period, cosine)`` keys closest to ``word@period``.

    Searches the listed target periods (default: all), skips the query key and
    keys unobserved in their period, and breaks ties by cosine descending,
    then word, then period order.
    """
    es.require_comparable("temporal neighbor search")
    if k < 0:
        raise ValueError("k must be >= 0")
    q = es.vector(word, period)
    qn = np.linalg.norm(q)
    if qn == 0:
        raise ZeroVectorError(f"{word!r} has a zero vector in period {period!r}")
    qi = es.key_index(word, period)
    if k == 0:
        return []
    targets = range(es.n_periods) if target_periods is None else [es.period_index(p) for p in target_periods]
    mask = es.observed_mask()
    v = es.vocab_size
    cands = []
    for t in sorted(set(targets)):
        block = _block(es, t)
        dots = np.asarray(block @ q).ravel()
        norms = _row_norms(block)
        ok = mask[t] & (norms > 0)
        if t * v <= qi < (t + 1) * v:
            ok[qi - t * v] = False
        idx = np.flatnonzero(ok)
        cos = dots[idx] / (norms[idx] * qn)
        cands.extend(zip(-cos, (es.words[i] for i in idx), [t] * len(idx)))
    cands.sort()
    return [(w, es.periods[t], float(-c)) for c, w, t in cands[:k]]


@dataclass(frozen=True)
class TrajectoryPoint:
    word: str
    period: str
    x: float
    y: float
    query: bool


def pca_2d(X: np.ndarray) -> np.ndarray:
    """Project rows of ``X`` onto their top two principal axes (deterministic signs)."""
    Xc = X - X.mean(axis=0)
    U, s, Vt = np.linalg.svd(Xc, full_matrices=False)
    U, _ = _fix_signs(U, Vt.T)
    scores = U * s
    if scores.shape[1] < 2:
        scores = np.hstack([scores, np.zeros((scores.shape[0], 2 - scores.shape[1]))])
    return scores[:, :2]


def trajectory_export(es: EmbeddingSet, word: str, periods=None, k: int = 5) -> list:
    """The word's vector in each period plus its ``k`` same-period neighbors, in 2-D."""
    es.require_comparable("trajectory export")
    idx = list(range(es.n_periods)) if periods is None else [es.period_index(p) for p in periods]
    keys = []
    for t in idx:
        if not es.observed(word, t) or not np.any(es.vector(word, t)):
            continue
        keys.append((word, t, True))
        for w, _, _ in temporal_neighbors(es, word, t, k, [t]):
            keys.append((w, t, False))
    if len(keys) < 2:
        raise EvaluationError(f"only {len(keys)} vector(s) gathered for {word!r}; need at least 2")
    X = np.vstack([es.vector(w, t) for w, t, _ in keys])
    P = pca_2d(X)
    return [TrajectoryPoint(w, es.periods[t], float(x), float(y), q)
            for (w, t, q), (x, y) in zip(keys, P)]


def trajectory_report(es: EmbeddingSet, word: str, periods=None, k: int = 5) -> EvalReport:
    pts = trajectory_export(es, word, periods, k)
    return EvalReport(
        "trajectory",
        params={"word": word, "periods": None if periods is None else list(periods), "k": k},
        items=[{"word": p.word, "period": p.period, "x": p.x, "y": p.y, "query": p.query} for p in pts],
        aggregates={"points": len(pts)},
        provenance={"method": es.method, **_emb_provenance(es)},
    )
