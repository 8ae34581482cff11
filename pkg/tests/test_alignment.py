import numpy as np
import pytest
from scipy.stats import ortho_group

from chronovec.alignment import (
    AlignmentMap,
    Dw2vProblem,
    align_embedding_periods,
    dw2v_gradient,
    dw2v_minimize,
    dw2v_objective,
    dw2v_solve,
    procrustes_align,
)
from chronovec.embeddings import EmbeddingSet, cross_period_cosine
from chronovec.errors import AlignmentRequiredError, CapacityError, DimensionMismatchError
from oracles import central_difference, dw2v_static_optimum, relative_error


def _planted(seed, V=30, N=5):
    rng = np.random.default_rng(seed)
    W = rng.normal(size=(V, N))
    R = ortho_group.rvs(N, random_state=seed)
    return W, R


def test_procrustes_recovers_rotation():
    W, R = _planted(0)
    m = procrustes_align(W, W @ R, "a", "b")
    assert np.linalg.norm(m.Q - R) < 1e-10
    assert m.residual < 1e-10 and not m.degenerate
    np.testing.assert_allclose(m.Q @ m.Q.T, np.eye(5), atol=1e-12)


def test_procrustes_degenerate_and_shapes():
    W = np.zeros((6, 3))
    W[:, 0] = 1.0
    m = procrustes_align(W, W)
    assert m.degenerate
    np.testing.assert_allclose(m.Q @ m.Q.T, np.eye(3), atol=1e-12)
    with pytest.raises(DimensionMismatchError):
        procrustes_align(np.ones((3, 2)), np.ones((3, 3)))


def test_compose():
    _, R1 = _planted(1)
    _, R2 = _planted(2)
    m = AlignmentMap(R1, "a", "b").compose(AlignmentMap(R2, "b", "c"))
    np.testing.assert_allclose(m.Q, R1 @ R2)
    assert (m.source_period, m.target_period) == ("a", "c")


def _three_period_set():
    rng = np.random.default_rng(4)
    base = rng.normal(size=(20, 4))
    rots = [ortho_group.rvs(4, random_state=s) for s in range(3)]
    blocks = [base @ R for R in rots]
    words = tuple(f"w{i}" for i in range(20))
    return EmbeddingSet("sgns", ("a", "b", "c"), words, np.vstack(blocks)), base


@pytest.mark.parametrize("reference", ["a", "b", None])
def test_align_embedding_periods_chains_maps(reference):
    es, _ = _three_period_set()
    aligned, adjacent = align_embedding_periods(es, reference)
    assert len(adjacent) == 2 and aligned.aligned and aligned.comparable
    ref = es.periods.index(reference) if reference else 2
    for t in range(3):
        np.testing.assert_allclose(aligned.period_block(t), es.period_block(ref), atol=1e-10)
    assert cross_period_cosine(aligned, "w3", "a", "c") == pytest.approx(1.0)


def test_unaligned_comparison_is_guarded():
    es, _ = _three_period_set()
    with pytest.raises(AlignmentRequiredError):
        cross_period_cosine(es, "w0", "a", "b")
    m = procrustes_align(es.period_block(0), es.period_block(1))
    assert cross_period_cosine(es, "w0", "a", "b", alignment=m) == pytest.approx(1.0)


def _problem(seed, T=3, V=8, d=3, lam=0.7, tau=2.0, **kw):
    rng = np.random.default_rng(seed)
    Ms = [np.maximum(rng.normal(size=(V, V)), 0) for _ in range(T)]
    return Dw2vProblem(Ms, d, lam=lam, tau=tau, seed=seed, **kw)


@pytest.mark.parametrize("seed", range(5))
def test_dw2v_gradient(seed):
    p = _problem(seed)
    rng = np.random.default_rng(seed + 50)
    W = [rng.normal(size=(p.V, p.d)) for _ in range(p.T)]
    analytic = np.stack(dw2v_gradient(W, p))
    numeric = central_difference(lambda x: dw2v_objective(list(x), p), np.stack(W))
    assert relative_error(analytic, numeric) < 1e-4


def test_dw2v_tau_zero_matches_static_oracle():
    p = _problem(0, lam=0.5, tau=0.0, max_iter=5000, grad_tol=1e-10)
    res = dw2v_minimize(p)
    oracle = sum(dw2v_static_optimum(M, p.d, p.lam) for M in p.dense())
    assert abs(res.objective - oracle) < 1e-6


def test_dw2v_large_tau_ties_periods():
    p = _problem(1, lam=0.5, tau=1e6, max_iter=200)
    W = dw2v_minimize(p).W_list
    diff = max(np.linalg.norm(W[t] - W[0]) / np.linalg.norm(W[0]) for t in range(p.T))
    assert diff < 1e-2


def test_dw2v_trace_monotone():
    res = dw2v_minimize(_problem(2, max_iter=300))
    assert all(b <= a for a, b in zip(res.trace, res.trace[1:]))


def test_dw2v_validation():
    with pytest.raises(CapacityError):
        dw2v_minimize(_problem(0, max_vocab=5))
    with pytest.raises(DimensionMismatchError):
        Dw2vProblem([np.eye(3), np.eye(4)], 2)
    with pytest.raises(DimensionMismatchError):
        Dw2vProblem([np.ones((3, 4))], 2)
    with pytest.raises(ValueError):
        Dw2vProblem([np.eye(3)], 2, tau=-1)
    p = _problem(0)
    with pytest.raises(DimensionMismatchError):
        dw2v_objective([np.zeros((p.V, p.d))], p)


def test_dw2v_solve_embedding_set():
    p = _problem(3, max_iter=100)
    p.words = tuple("abcdefgh")
    es = dw2v_solve(p)
    assert es.method == "dw2v" and es.comparable
    assert es.matrix.shape == (3 * 8, 3) and es.periods == ("0", "1", "2")
