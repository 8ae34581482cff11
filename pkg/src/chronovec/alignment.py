"""Post-hoc and joint alignment baselines: orthogonal Procrustes and DW2V."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp

from .embeddings import EmbeddingSet
from .errors import CapacityError, DimensionMismatchError, SolverError

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class AlignmentMap:
    """Orthogonal ``Q`` minimizing ``||W_src Q - W_dst||_F``."""

    Q: np.ndarray
    source_period: Optional[str] = None
    target_period: Optional[str] = None
    residual: float = 0.0
    degenerate: bool = False

    def apply(self, W: np.ndarray) -> np.ndarray:
        return np.asarray(W) @ self.Q

    def compose(self, other: "AlignmentMap") -> "AlignmentMap":
        """Map ``self.source -> other.target`` (apply ``self`` first)."""
        return AlignmentMap(self.Q @ other.Q, self.source_period, other.target_period,
                            float("nan"), self.degenerate or other.degenerate)


def procrustes_align(W_src, W_dst, source_period=None, target_period=None,
                     rank_tol: float = 1e-10) -> AlignmentMap:
    """Orthogonal Procrustes: ``Q = A B^T`` where ``W_src^T W_dst = A S B^T``.

    No centering, scaling or translation. A rank-deficient cross-covariance
    still yields an orthogonal ``Q`` but sets ``degenerate``.
    """
    W_src = np.asarray(W_src, dtype=np.float64)
    W_dst = np.asarray(W_dst, dtype=np.float64)
    if W_src.ndim != 2 or W_src.shape != W_dst.shape:
        raise DimensionMismatchError(f"shapes differ: {W_src.shape} vs {W_dst.shape}")
    A, s, Bt = np.linalg.svd(W_src.T @ W_dst)
    Q = A @ Bt
    residual = float(np.linalg.norm(W_src @ Q - W_dst))
    degenerate = bool(s.size == 0 or s[-1] <= rank_tol * max(s[0], 1e-300))
    return AlignmentMap(Q, None if source_period is None else str(source_period),
                        None if target_period is None else str(target_period), residual, degenerate)


def align_embedding_periods(es: EmbeddingSet, reference=None) -> tuple:
    """Chain adjacent Procrustes maps so every period lands in ``reference``'s frame.

    Returns the aligned set and the adjacent maps ``t -> t+1``.
    """
    if es.is_sparse:
        raise ValueError("Procrustes needs dense embeddings")
    T = es.n_periods
    ref = T - 1 if reference is None else es.period_index(reference)
    blocks = [es.period_block(t) for t in range(T)]
    adjacent = [procrustes_align(blocks[t], blocks[t + 1], es.periods[t], es.periods[t + 1])
                for t in range(T - 1)]
    maps = {}
    for t in range(T):
        if t == ref:
            continue
        if t < ref:
            m = adjacent[t]
            for u in range(t + 1, ref):
                m = m.compose(adjacent[u])
        else:
            m = AlignmentMap(adjacent[t - 1].Q.T, es.periods[t], es.periods[t - 1])
            for u in range(t - 2, ref - 1, -1):
                m = m.compose(AlignmentMap(adjacent[u].Q.T, es.periods[u + 1], es.periods[u]))
        maps[es.periods[t]] = m
    from .embeddings import apply_alignment

    return apply_alignment(es, maps), adjacent


@dataclass(eq=False)
class Dw2vProblem:
    """Joint factorization of temporal PPMI matrices with a smoothing penalty.

    Minimizes ``1/2 sum_t ||M_t - W_t W_t^T||^2 + lam/2 sum_t ||W_t||^2
    + tau/2 sum_{t>=2} ||W_{t-1} - W_t||^2``.
    """

    M_list: Sequence
    d: int
    lam: float = 10.0
    tau: float = 50.0
    max_iter: int = 2000
    grad_tol: float = 1e-6
    init_scale: float = 0.1
    seed: int = 0
    max_vocab: int = 5000
    words: tuple = ()
    periods: tuple = ()

    def __post_init__(self):
        shapes = {tuple(M.shape) for M in self.M_list}
        if len(shapes) != 1:
            raise DimensionMismatchError(f"M matrices disagree in shape: {sorted(shapes)}")
        (v, v2), = shapes
        if v != v2:
            raise DimensionMismatchError("M matrices must be square (word x context, same vocabulary)")
        if not (np.isfinite(self.lam) and np.isfinite(self.tau)) or self.lam < 0 or self.tau < 0:
            raise ValueError("lam and tau must be finite and >= 0")

    @property
    def T(self) -> int:
        return len(self.M_list)

    @property
    def V(self) -> int:
        return self.M_list[0].shape[0]

    def dense(self) -> list:
        return [M.toarray() if sp.issparse(M) else np.asarray(M, dtype=np.float64) for M in self.M_list]


def _check_shapes(W_list, problem):
    if len(W_list) != problem.T:
        raise DimensionMismatchError(f"expected {problem.T} factors, got {len(W_list)}")
    for W in W_list:
        if W.shape != (problem.V, problem.d):
            raise DimensionMismatchError(f"factor shape {W.shape} != {(problem.V, problem.d)}")


def dw2v_objective(W_list, problem: Dw2vProblem, dense=None) -> float:
    _check_shapes(W_list, problem)
    Ms = dense if dense is not None else problem.dense()
    fit = sum(np.sum((M - W @ W.T) ** 2) for M, W in zip(Ms, W_list))
    reg = sum(np.sum(W ** 2) for W in W_list)
    smooth = sum(np.sum((W_list[t - 1] - W_list[t]) ** 2) for t in range(1, len(W_list)))
    return float(0.5 * fit + 0.5 * problem.lam * reg + 0.5 * problem.tau * smooth)


def dw2v_gradient(W_list, problem: Dw2vProblem, dense=None) -> list:
    _check_shapes(W_list, problem)
    Ms = dense if dense is not None else problem.dense()
    T = len(W_list)
    grads = []
    for t, (M, W) in enumerate(zip(Ms, W_list)):
        R = M - W @ W.T
        g = -(R + R.T) @ W + problem.lam * W
        if t > 0:
            g += problem.tau * (W - W_list[t - 1])
        if t < T - 1:
            g += problem.tau * (W - W_list[t + 1])
        grads.append(g)
    return grads


@dataclass
class Dw2vResult:
    W_list: list
    objective: float
    grad_norm: float
    iterations: int
    trace: list = field(default_factory=list)
    converged: bool = False


def dw2v_minimize(problem: Dw2vProblem, W0=None) -> Dw2vResult:
    """Gradient descent with Barzilai-Borwein trial steps and Armijo backtracking.

    Every accepted step strictly lowers the objective, so ``trace`` is
    monotone nonincreasing.
    """
    if problem.V > problem.max_vocab:
        raise CapacityError(
            f"DW2V refuses |V|={problem.V} > cap {problem.max_vocab}: all T dense V x V "
            "matrices must fit in memory"
        )
    Ms = problem.dense()
    rng = np.random.default_rng(problem.seed)
    if W0 is None:
        W = [problem.init_scale * rng.standard_normal((problem.V, problem.d)) for _ in range(problem.T)]
    else:
        W = [np.array(w, dtype=np.float64) for w in W0]
    f = dw2v_objective(W, problem, Ms)
    g = dw2v_gradient(W, problem, Ms)
    gnorm = float(np.sqrt(sum(np.sum(x ** 2) for x in g)))
    g0 = max(gnorm, 1e-300)
    trace = [f]
    step = 1.0 / max(1.0, gnorm)
    converged = False
    for _ in range(problem.max_iter):
        if gnorm <= problem.grad_tol * max(1.0, g0):
            converged = True
            break
        gg = gnorm ** 2
        accepted = False
        while step > 1e-30:
            W_new = [w - step * gw for w, gw in zip(W, g)]
            f_new = dw2v_objective(W_new, problem, Ms)
            if not np.isfinite(f_new):
                step *= 0.5
                continue
            if f_new <= f - 1e-4 * step * gg:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            converged = True
            break
        g_new = dw2v_gradient(W_new, problem, Ms)
        s_vec = sum(np.sum((a - b) ** 2) for a, b in zip(W_new, W))
        y_dot = sum(np.sum((a - b) * (c - e)) for a, b, c, e in zip(W_new, W, g_new, g))
        W, f, g = W_new, f_new, g_new
        gnorm = float(np.sqrt(sum(np.sum(x ** 2) for x in g)))
        trace.append(f)
        step = s_vec / y_dot if y_dot > 0 else step * 2.0
    if not np.isfinite(f):
        raise SolverError("DW2V diverged", {"trace": trace[-10:]})
    return Dw2vResult(W, f, gnorm, len(trace) - 1, trace, converged)


def dw2v_solve(problem: Dw2vProblem) -> EmbeddingSet:
    """Solve the DW2V problem and return period-tagged rows as an EmbeddingSet."""
    res = dw2v_minimize(problem)
    if not res.converged:
        log.warning("DW2V stopped at max_iter=%d with gradient norm %.3g", problem.max_iter, res.grad_norm)
    words = tuple(problem.words) or tuple(str(i) for i in range(problem.V))
    periods = tuple(problem.periods) or tuple(str(t) for t in range(problem.T))
    return EmbeddingSet(
        "dw2v", periods, words, np.vstack(res.W_list),
        meta={"d": problem.d, "lam": problem.lam, "tau": problem.tau, "seed": problem.seed,
              "objective": res.objective, "grad_norm": res.grad_norm,
              "iterations": res.iterations, "converged": res.converged},
    )

