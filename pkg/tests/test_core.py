import warnings

import numpy as np
import pytest
from conftest import random_orthonormal, random_orthonormal_batch, random_symmetric
from oracles import naive_joint_loglik

from mgraf.core import (
    CiseRunner,
    MgrafModel,
    cise_fit,
    deviance_matrices,
    edge_prob_matrix,
    edge_prob_stack,
    joint_log_likelihood,
    load_model,
    logit,
    save_model,
    sigmoid,
    sign_count,
    trace_surrogate,
    update_Q_step,
)
from mgraf.netdata import NetworkStack, vectorize_lower
from mgraf.penlogit import build_design, objective
from mgraf.simulate import SimulationSpec, simulate


@pytest.fixture(scope="module")
def small_data():
    stack, truth = simulate(SimulationSpec(V=12, n=15, K=2, seed=11))
    return stack, truth


def test_sigmoid_logit_pair():
    assert sigmoid(0.0) == 0.5
    assert logit(0.5) == 0.0
    assert sigmoid(logit(0.3)) == pytest.approx(0.3, abs=1e-12)
    x = np.linspace(-40, 40, 101)
    assert np.all(np.diff(sigmoid(x)) >= 0)
    for bad in (0.0, 1.0):
        with pytest.raises(ValueError):
            logit(bad)


def _model(rng, n=3, V=6, K=2, variant="full"):
    Z = random_symmetric(rng, V)
    np.fill_diagonal(Z, 0)
    Q = random_orthonormal_batch(rng, n, V, K)
    lam = rng.normal(scale=3, size=(n, K))
    return MgrafModel(variant, Z, Q, lam)


def test_edge_prob_zero_model():
    m = MgrafModel("full", np.zeros((4, 4)), np.tile(np.eye(4)[:, :1], (2, 1, 1)), np.zeros((2, 1)))
    P = edge_prob_matrix(m, 1)
    off = ~np.eye(4, dtype=bool)
    assert np.all(P[off] == 0.5) and np.all(np.diag(P) == 0)


def test_edge_prob_hand_example():
    q = np.array([[1.0], [-1.0]]) / np.sqrt(2)
    m = MgrafModel("full", np.zeros((2, 2)), q[None], np.array([[4.0]]))
    assert edge_prob_matrix(m, 0)[1, 0] == pytest.approx(sigmoid(-2.0), abs=1e-15)


def test_edge_prob_shift_in_z(rng):
    m = _model(rng)
    Z2 = m.Z.copy()
    Z2[3, 1] += 0.7
    Z2[1, 3] += 0.7
    m2 = MgrafModel("full", Z2, m.Q, m.lam)
    for i in range(m.n):
        a, b = logit(edge_prob_matrix(m, i)[3, 1]), logit(edge_prob_matrix(m2, i)[3, 1])
        assert b - a == pytest.approx(0.7, abs=1e-9)
    assert np.allclose(edge_prob_stack(m), np.stack([edge_prob_matrix(m, i) for i in range(m.n)]))


def test_joint_loglik_single_bernoulli():
    A = np.array([[0, 1], [1, 0]], dtype=np.uint8)
    m = MgrafModel("full", np.zeros((2, 2)), np.ones((1, 2, 1)) / np.sqrt(2), np.zeros((1, 1)))
    assert joint_log_likelihood(NetworkStack(A), m) == pytest.approx(np.log(0.5), abs=1e-12)


def test_joint_loglik_additive_and_oracle(rng, small_data):
    stack, _ = small_data
    m = _model(rng, n=1, V=stack.V)
    one = joint_log_likelihood(stack.subset([0]), m)
    two = MgrafModel("full", m.Z, np.concatenate([m.Q, m.Q]), np.concatenate([m.lam, m.lam]))
    assert joint_log_likelihood(stack.subset([0, 0]), two) == pytest.approx(2 * one, rel=1e-14)
    m3 = _model(rng, n=3, V=stack.V)
    sub = stack.subset([0, 1, 2])
    assert joint_log_likelihood(sub, m3) == pytest.approx(
        naive_joint_loglik(sub.adjacency, edge_prob_stack(m3)), abs=1e-10)


def test_joint_loglik_no_overflow():
    A = np.array([[0, 1], [1, 0]], dtype=np.uint8)
    Z = np.array([[0, -800.0], [-800.0, 0]])
    m = MgrafModel("full", Z, np.ones((1, 2, 1)) / np.sqrt(2), np.zeros((1, 1)))
    assert joint_log_likelihood(NetworkStack(A), m) == pytest.approx(-800.0)


def test_trace_surrogate_examples(rng):
    A = np.ones((2, 2)) - np.eye(2)
    D = np.array([[0.0, 1.0], [1.0, 0.0]])
    assert trace_surrogate(A, np.zeros((2, 2)), D) == pytest.approx(0.5)
    assert trace_surrogate(A, np.zeros((2, 2)), np.zeros((2, 2))) == 0.0
    V = 5
    A = (random_symmetric(rng, V) > 0).astype(float)
    np.fill_diagonal(A, 0)
    Z = random_symmetric(rng, V)
    D1, D2 = random_symmetric(rng, V), random_symmetric(rng, V)
    lhs = trace_surrogate(A, Z, 2.0 * D1 - 3.0 * D2)
    assert lhs == pytest.approx(2 * trace_surrogate(A, Z, D1) - 3 * trace_surrogate(A, Z, D2), abs=1e-12)


def test_sign_count():
    assert sign_count([2.0, -1.5, 0.3]) == 2
    assert sign_count([0.0, 0.0]) == 0


def test_update_q_all_positive_is_top_k(rng):
    V = 7
    A = (random_symmetric(rng, V) > 0).astype(float)
    np.fill_diagonal(A, 0)
    Z = random_symmetric(rng, V)
    Q = update_Q_step(A, Z, [3.0, 1.0])
    B = A - sigmoid(Z)
    np.fill_diagonal(B, 0)
    w, U = np.linalg.eigh(B)
    assert np.allclose(np.abs(Q.T @ U[:, [-1, -2]]), np.eye(2), atol=1e-8)


def test_update_q_monte_carlo_optimality(rng):
    V = 6
    A = (random_symmetric(rng, V) > 0).astype(float)
    np.fill_diagonal(A, 0)
    Z = random_symmetric(rng, V)
    lam = np.array([2.5, -1.0, 0.4])
    Q = update_Q_step(A, Z, lam)
    best = trace_surrogate(A, Z, (Q * lam) @ Q.T)
    cands = random_orthonormal_batch(rng, 5000, V, 3)
    B = A - sigmoid(Z)
    np.fill_diagonal(B, 0)
    vals = 0.5 * np.einsum("cvk,vu,cuk,k->c", cands, B, cands, lam)
    assert np.all(vals <= best + 1e-10)


def test_deviance_examples(rng):
    m = MgrafModel("full", np.zeros((4, 4)), random_orthonormal_batch(rng, 2, 4, 2), np.zeros((2, 2)))
    assert all(not D.any() for D in deviance_matrices(m))
    q = random_orthonormal(rng, 5, 1)
    m = MgrafModel("full", np.zeros((5, 5)), q[None], np.array([[2.0]]))
    D = deviance_matrices(m)[0]
    assert np.allclose(D, 2 * q @ q.T) and np.trace(D) == pytest.approx(2.0)


def test_deviance_rank_and_spectrum(rng):
    m = _model(rng, n=4, V=9, K=3)
    for i, D in enumerate(deviance_matrices(m)):
        s = np.linalg.svd(D, compute_uv=False)
        assert np.sum(s > 1e-10 * s[0]) <= 3
        ev = np.sort(np.linalg.eigvalsh(D))
        expect = np.sort(np.concatenate([m.lam[i], np.zeros(6)]))
        assert np.allclose(ev, expect, atol=1e-8)
        assert np.allclose(D, D.T)


def test_model_invariants_after_fit(small_data):
    stack, _ = small_data
    model, report = cise_fit(stack, 2)
    for Q in model.Q:
        assert np.allclose(Q.T @ Q, np.eye(2), atol=1e-8)
    assert np.allclose(model.Z, model.Z.T) and not np.diag(model.Z).any()
    assert len(report.loglik_trace) == report.iterations + 1
    assert report.epsilon == 0.01 and report.max_iter == 50 and report.gamma == 1.0


def test_stopping_rule(small_data):
    stack, _ = small_data
    for eps in (0.05, 1e-3, 1e-6):
        _, r = cise_fit(stack, 2, epsilon=eps, max_iter=40)
        t = np.asarray(r.loglik_trace)
        rel = np.abs(np.diff(t)) / np.abs(t[:-1])
        if r.converged:
            assert rel[-1] < eps and np.all(rel[:-1] >= eps)
        else:
            assert r.iterations == 40


def test_k_bounds(small_data):
    stack, _ = small_data
    with pytest.raises(ValueError):
        cise_fit(stack, stack.V)
    with pytest.raises(ValueError):
        cise_fit(stack, 0)
    with pytest.raises(ValueError):
        cise_fit(stack, 2, epsilon=0)


def test_single_network_runs(small_data):
    stack, _ = small_data
    model, report = cise_fit(stack.subset([0]), 2)
    assert model.Q.shape == (1, stack.V, 2)
    assert np.isfinite(report.loglik_trace[-1])
    assert np.linalg.matrix_rank(model.deviance(0), tol=1e-8) <= 2


def test_logistic_step_monotone_given_q(small_data):
    stack, _ = small_data
    runner = CiseRunner(stack, 2)
    for _ in range(3):
        design = build_design(runner.Y, runner.predictors(), runner.gamma)
        before = objective(design, runner.z, runner.lam)
        runner.logistic_step()
        after = objective(design, runner.z, runner.lam)
        assert after >= before - 1e-9 * abs(before)
        runner.q_step()


def test_q_step_maximizes_surrogate(small_data, rng):
    stack, _ = small_data
    runner = CiseRunner(stack, 2)
    runner.logistic_step()
    runner.q_step()
    Z = vectorize_lower  # noqa: F841 (keeps import used for readability below)
    from mgraf.netdata import devectorize

    Zm = devectorize(runner.z, stack.V)
    cands = random_orthonormal_batch(rng, 2000, stack.V, 2)
    for i in range(3):
        lam = runner.lam[i]
        Q = runner.Q[i]
        best = trace_surrogate(stack[i], Zm, (Q * lam) @ Q.T)
        B = stack[i] - sigmoid(Zm)
        np.fill_diagonal(B, 0)
        vals = 0.5 * np.einsum("cvk,vu,cuk,k->c", cands, B, cands, lam)
        assert np.all(vals <= best + 1e-10)


def test_label_permutation_equivariance(small_data):
    stack, _ = small_data
    perm = np.random.default_rng(3).permutation(stack.V)
    permuted = NetworkStack(stack.adjacency[:, perm][:, :, perm])
    m1, r1 = cise_fit(stack, 2, epsilon=1e-4)
    m2, r2 = cise_fit(permuted, 2, epsilon=1e-4)
    assert r1.iterations == r2.iterations
    assert np.allclose(m2.Z, m1.Z[np.ix_(perm, perm)], atol=1e-6)
    for i in range(stack.n):
        assert np.allclose(m2.deviance(i), m1.deviance(i)[np.ix_(perm, perm)], atol=1e-6)


def test_deviance_sign_flip_invariance(rng):
    m = _model(rng)
    Q = m.Q.copy()
    Q[:, :, 1] *= -1
    flipped = MgrafModel("full", m.Z, Q, m.lam)
    for i in range(m.n):
        assert np.allclose(m.deviance(i), flipped.deviance(i), atol=1e-14)


def test_mask_fit_ignores_hidden_cells(small_data):
    stack, _ = small_data
    mask = np.ones((stack.n, stack.L), dtype=bool)
    mask[:, ::3] = False
    m, r = cise_fit(stack, 2, mask=mask)
    flipped = stack.vectors()
    flipped[~mask] = 1 - flipped[~mask]
    from mgraf.netdata import devectorize

    other = NetworkStack(devectorize(flipped, stack.V).astype(np.uint8))
    m2, _ = cise_fit(other, 2, mask=mask)
    assert np.allclose(m.Z, m2.Z, atol=1e-10)


def test_nonconverged_logistic_step_warns(small_data):
    stack, _ = small_data
    from mgraf import core

    with pytest.warns(RuntimeWarning):
        core.run_cise(stack, 2, tolerance=1e-30, max_iter=1)


def test_model_round_trip(tmp_path, small_data):
    stack, _ = small_data
    for variant in ("full", "shared_lambda", "shared_q"):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            from mgraf.core import fit_variant

            model, report = fit_variant(stack, 2, variant=variant, max_iter=3)
        meta = save_model(tmp_path / f"{variant}.npz", model, report)
        back, meta2 = load_model(tmp_path / f"{variant}.npz")
        assert back.variant == variant and meta2["K"] == 2 and meta2["V"] == stack.V
        for key in ("Z", "Q", "lam"):
            assert np.array_equal(getattr(back, key), getattr(model, key))
        assert meta2["report"]["loglik_trace"] == meta["report"]["loglik_trace"]


def test_load_model_rejects_foreign_archive(tmp_path):
    np.savez(tmp_path / "x.npz", Z=np.zeros(2), Q=np.zeros(2), lam=np.zeros(2), meta=np.array('{"format": "x"}'))
    with pytest.raises(ValueError):
        load_model(tmp_path / "x.npz")
