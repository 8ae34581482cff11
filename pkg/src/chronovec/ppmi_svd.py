"""PPMI matrices (per period, whole-corpus-marginal, tagged stacks) and truncated SVD."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackNoConvergence, svds

from .cooccurrence import CoocCounts, count_pairs
from .corpus import PeriodizedCorpus, Vocabulary
from .embeddings import EmbeddingSet
from .errors import ChronovecError, DimensionMismatchError, SolverError

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class PpmiMatrix:
    """Sparse nonnegative PPMI matrix; rows are words or (period, word) keys."""

    matrix: sp.csr_matrix
    window: int
    periods: tuple = ()
    words: tuple = ()
    meta: dict = field(default_factory=dict)

    @property
    def shape(self):
        return self.matrix.shape

    @property
    def rows(self) -> int:
        return self.matrix.shape[0]

    @property
    def cols(self) -> int:
        return self.matrix.shape[1]

    @property
    def nnz(self) -> int:
        return self.matrix.nnz

    def to_embedding_set(self, period_counts=None) -> EmbeddingSet:
        return EmbeddingSet("ppmi", tuple(self.periods), tuple(self.words), self.matrix,
                            period_counts=period_counts, meta={"window": self.window, **self.meta})


def _ppmi_from_counts(counts: sp.csr_matrix, row_marg, col_marg, total, scale=1.0) -> sp.csr_matrix:
    coo = counts.tocoo()
    nw = row_marg[coo.row]
    nc = col_marg[coo.col]
    if np.any(nw <= 0) or np.any(nc <= 0):
        raise ChronovecError("internal inconsistency: a counted pair has a zero marginal")
    with np.errstate(divide="ignore"):
        vals = np.log(coo.data * total / (nw * nc) * scale)
    keep = vals > 0
    out = sp.csr_matrix((vals[keep], (coo.row[keep], coo.col[keep])), shape=counts.shape)
    out.sort_indices()
    return out


def build_ppmi(counts: CoocCounts, words: Sequence[str] = ()) -> PpmiMatrix:
    """PPMI with marginals and pair total taken from ``counts`` itself.

    ``M_ij = max(log(#(w_i, c_j) * |D| / (#(w_i) * #(c_j))), 0)`` with ``|D|``
    the total number of counted pairs; zero entries are not stored.
    """
    total = counts.total_pairs
    if total <= 0:
        raise ChronovecError("cannot build PPMI from zero pair counts")
    mat = _ppmi_from_counts(counts.pair_counts, counts.center_marginals,
                            counts.context_marginals, total)
    periods = (counts.period,) if counts.period is not None else ()
    return PpmiMatrix(mat, counts.window, periods, tuple(words), {"marginals": "period"})


def temporal_ppmi_from_counts(period_counts: CoocCounts, corpus_counts: CoocCounts,
                              words: Sequence[str] = (), joint_total: str = "segment") -> PpmiMatrix:
    """PPMI of one period with word and context marginals from the whole corpus.

    With ``joint_total="segment"`` the joint probability is normalized within
    the period, ``p(w, c) = #_t(w, c) / |D_t|``, while ``p(w)`` and ``p(c)``
    come from the corpus-wide counts, so rows of different periods share one
    scale. ``joint_total="corpus"`` divides the joint count by the corpus
    total instead, which lowers every value by ``log(|D| / |D_t|)``.
    """
    if joint_total not in ("segment", "corpus"):
        raise ValueError(f"joint_total must be 'segment' or 'corpus', got {joint_total!r}")
    if period_counts.shape != corpus_counts.shape or period_counts.window != corpus_counts.window:
        raise DimensionMismatchError("period and corpus counts disagree in shape or window")
    total = corpus_counts.total_pairs
    seg_total = period_counts.total_pairs
    periods = (period_counts.period,) if period_counts.period is not None else ()
    meta = {"marginals": "corpus", "joint_total": joint_total, "empty": seg_total == 0}
    if seg_total == 0:
        return PpmiMatrix(sp.csr_matrix(period_counts.shape), period_counts.window, periods, tuple(words), meta)
    mat = _ppmi_from_counts(period_counts.pair_counts, corpus_counts.center_marginals,
                            corpus_counts.context_marginals, total,
                            scale=total / seg_total if joint_total == "segment" else 1.0)
    return PpmiMatrix(mat, period_counts.window, periods, tuple(words), meta)


def build_temporal_ppmi(corpus: PeriodizedCorpus, vocab: Vocabulary, window: int, t,
                        joint_total: str = "segment") -> PpmiMatrix:
    """Naturally aligned PPMI of period ``t`` (corpus-wide marginals)."""
    return temporal_ppmi_from_counts(count_pairs(corpus, vocab, window, t),
                                     count_pairs(corpus, vocab, window, None), vocab.words, joint_total)


def concat_tagged_ppmi(per_period: Sequence[PpmiMatrix]) -> PpmiMatrix:
    """Row-stack per-period matrices: row ``t * |V| + i`` is row ``i`` of input ``t``."""
    if len(per_period) < 2:
        raise ChronovecError("tagged PPMI needs at least two periods")
    first = per_period[0]
    for m in per_period[1:]:
        if m.shape != first.shape:
            raise DimensionMismatchError(f"shape mismatch: {m.shape} vs {first.shape}")
        if m.window != first.window:
            raise DimensionMismatchError("window mismatch between period matrices")
    stacked = sp.vstack([m.matrix for m in per_period], format="csr")
    periods = tuple(p for m in per_period for p in m.periods)
    return PpmiMatrix(stacked, first.window, periods, first.words,
                      {"marginals": first.meta.get("marginals"), "tagged": True})


@dataclass(frozen=True, eq=False)
class SvdFactors:
    U: np.ndarray
    sigma: np.ndarray
    I: np.ndarray
    iterations: int = 0
    residual: float = 0.0

    @property
    def d(self) -> int:
        return len(self.sigma)

    def reconstruct(self) -> np.ndarray:
        return (self.U * self.sigma) @ self.I.T


def _orth(x):
    q, _ = np.linalg.qr(x, mode="reduced")
    return q


def _fix_signs(U, V):
    pivot = np.argmax(np.abs(U), axis=0)
    signs = np.sign(U[pivot, np.arange(U.shape[1])])
    signs[signs == 0] = 1.0
    return U * signs, V * signs


def randomized_svd(A, d: int, seed: int = 0, oversample: Optional[int] = None,
                   min_power_iter: int = 4, max_iter: int = 1000, tol: float = 1e-10) -> SvdFactors:
    """Top-``d`` singular triplets by randomized subspace iteration.

    Iterates until every Ritz triplet satisfies
    ``||A v_i - s_i u_i|| <= tol * s_1``; at least ``min_power_iter`` power
    iterations are always performed. Works on sparse or dense ``A``.
    """
    m, n = A.shape
    k = min(m, n)
    if not 1 <= d <= k:
        raise ValueError(f"rank d={d} outside [1, {k}]")
    if oversample is None:
        oversample = max(10, d)
    width = min(k, d + oversample)
    rng = np.random.default_rng(seed)
    Q = _orth(A @ rng.standard_normal((n, width)))
    residual = np.inf
    for it in range(1, max_iter + 1):
        Q = _orth(A @ _orth(A.T @ Q))
        if it < min_power_iter:
            continue
        B = np.asarray((A.T @ Q).T)
        Ub, s, Vt = np.linalg.svd(B, full_matrices=False)
        U = Q @ Ub[:, :d]
        V = Vt[:d].T
        s = s[:d]
        R = A @ V - U * s
        residual = float(np.max(np.linalg.norm(R, axis=0)))
        scale = s[0] if s[0] > 0 else 1.0
        if residual <= tol * scale or width == k and it >= min_power_iter:
            U, V = _fix_signs(U, V)
            return SvdFactors(U, s, V, it, residual)
    raise SolverError(
        f"truncated SVD did not converge in {max_iter} iterations",
        {"residual": residual, "tolerance": tol, "d": d, "width": width},
    )


def arpack_svd(A, d: int, seed: int = 0) -> SvdFactors:
    """Top-``d`` singular triplets via ARPACK (dense LAPACK for tiny or full-rank requests).

    The Lanczos start vector is drawn from ``seed`` so repeated calls agree
    bit for bit.
    """
    m, n = A.shape
    k = min(m, n)
    if not 1 <= d <= k:
        raise ValueError(f"rank d={d} outside [1, {k}]")
    if d >= k - 1 or k <= 32:
        dense = A.toarray() if sp.issparse(A) else np.asarray(A, dtype=np.float64)
        U, s, Vt = np.linalg.svd(dense, full_matrices=False)
        U, V, s = U[:, :d], Vt[:d].T, s[:d]
    else:
        v0 = np.random.default_rng(seed).standard_normal(k)
        try:
            U, s, Vt = svds(A.astype(np.float64), k=d, v0=v0, tol=0, solver="arpack")
        except ArpackNoConvergence as exc:
            raise SolverError("ARPACK did not converge", {"d": d, "shape": (m, n)}) from exc
        order = np.argsort(-s, kind="stable")
        U, s, V = U[:, order], s[order], Vt[order].T
    residual = float(np.max(np.linalg.norm(A @ V - U * s, axis=0))) if d else 0.0
    U, V = _fix_signs(U, V)
    return SvdFactors(U, s, V, 0, residual)


SOLVERS = {"arpack": arpack_svd, "randomized": randomized_svd}


def truncated_svd(m, d: int, sigma_exponent: float = 0.0, seed: int = 0,
                  solver: str = "arpack", **options):
    """Rank-``d`` SVD of a PPMI matrix and its embedding rows ``U_d * sigma_d**p``.

    Returns ``(factors, embeddings)``; ``embeddings`` is an :class:`EmbeddingSet`
    when ``m`` is a :class:`PpmiMatrix` carrying words and periods, else the raw
    row matrix. ``solver`` is ``"arpack"`` (default) or ``"randomized"``;
    extra ``options`` go to the randomized solver.
    """
    if not 0.0 <= sigma_exponent <= 1.0:
        raise ValueError("sigma_exponent must lie in [0, 1]")
    if solver not in SOLVERS:
        raise ValueError(f"unknown SVD solver {solver!r}; choose from {', '.join(SOLVERS)}")
    A = m.matrix if isinstance(m, PpmiMatrix) else m
    factors = SOLVERS[solver](A, d, seed=seed, **options)
    rows = factors.U * factors.sigma ** sigma_exponent if sigma_exponent else factors.U.copy()
    if isinstance(m, PpmiMatrix) and m.words:
        periods = tuple(m.periods) or ("all",)
        method = "tsvd" if len(periods) > 1 else "svd"
        es = EmbeddingSet(method, periods, tuple(m.words), rows,
                          meta={"d": d, "sigma_exponent": sigma_exponent, "seed": seed,
                                "solver": solver, "window": m.window})
        return factors, es
    return factors, rows
