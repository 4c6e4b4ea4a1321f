import csv

import numpy as np
import pytest
from conftest import random_orthonormal, random_orthonormal_batch
from scipy.stats import false_discovery_control

from mgraf.core import MgrafModel
from mgraf.metrics import (
    bh_reject,
    classify_proximity,
    direct_distance,
    edge_group_ttest,
    loocv_identification,
    pairwise_distance,
    repeated_kfold_classification,
    stratified_folds,
    welch_t,
)
from mgraf.simulate import sample_scan_rescan
from mgraf.variants import fit_shared_lambda


def _model(rng, n=5, V=10, K=3, variant="full"):
    Q = random_orthonormal_batch(rng, n, V, K)
    lam = rng.normal(scale=4, size=(n, K))
    return MgrafModel(variant, np.zeros((V, V)), Q, lam)


def _cluster_distances(rng, per_class=10, sep=20.0, spread=1.0):
    pts = np.concatenate([rng.normal(0, spread, (per_class, 2)),
                          rng.normal(0, spread, (per_class, 2)) + [sep, 0]])
    d = np.linalg.norm(pts[:, None] - pts[None], axis=-1)
    return d, ["a"] * per_class + ["b"] * per_class


def test_distance_matches_direct(rng):
    m = _model(rng)
    d = pairwise_distance(m)
    D = np.stack([m.deviance(i) for i in range(m.n)])
    assert np.allclose(d, direct_distance(D), atol=1e-10)
    assert np.all(np.diag(d) == 0) and np.allclose(d, d.T)


def test_distance_shared_variants(rng):
    V, K, n = 9, 2, 4
    Q = random_orthonormal(rng, V, K)
    lam = rng.normal(size=(n, K))
    m = MgrafModel("shared_q", np.zeros((V, V)), Q, lam)
    D = np.stack([m.deviance(i) for i in range(n)])
    assert np.allclose(pairwise_distance(m), direct_distance(D), atol=1e-10)
    m = MgrafModel("shared_lambda", np.zeros((V, V)), random_orthonormal_batch(rng, n, V, K), lam[0])
    D = np.stack([m.deviance(i) for i in range(n)])
    assert np.allclose(pairwise_distance(m), direct_distance(D), atol=1e-10)


def test_distance_orthogonal_subspaces():
    V = 6
    E = np.eye(V)
    lam = np.array([[2.0, -1.0], [2.0, -1.0]])
    m = MgrafModel("full", np.zeros((V, V)), np.stack([E[:, :2], E[:, 2:4]]), lam)
    assert pairwise_distance(m)[0, 1] == pytest.approx(np.sqrt(2 * np.sum(lam[0] ** 2)), abs=1e-12)


def test_distance_sign_and_rotation_invariance(rng):
    m = _model(rng)
    Q = m.Q.copy()
    Q[1, :, 0] *= -1
    Q[3, :, 2] *= -1
    d0 = pairwise_distance(m)
    assert np.allclose(pairwise_distance(MgrafModel("full", m.Z, Q, m.lam)), d0, atol=1e-10)
    # rotate inside a degenerate eigenvalue block
    lam = m.lam.copy()
    lam[2, 1] = lam[2, 0]
    m = MgrafModel("full", m.Z, m.Q, lam)
    c, s = np.cos(0.7), np.sin(0.7)
    R = np.eye(3)
    R[:2, :2] = [[c, -s], [s, c]]
    Q = m.Q.copy()
    Q[2] = Q[2] @ R
    assert np.allclose(pairwise_distance(MgrafModel("full", m.Z, Q, lam)), pairwise_distance(m), atol=1e-10)


def test_classify_examples():
    d = np.array([[0.0, 0.0, 9.0, 9.0],
                  [0.0, 0.0, 9.0, 9.0],
                  [9.0, 9.0, 0.0, 1.0],
                  [9.0, 9.0, 1.0, 0.0]])
    labels = ["A", "A", "B", "B"]
    assert classify_proximity(d, labels, 0) == "A"
    assert classify_proximity(d, labels, 2, [0, 1, 3]) == "B"
    tie = np.array([[0.0, 1.0, 1.0], [1.0, 0.0, 2.0], [1.0, 2.0, 0.0]])
    assert classify_proximity(tie, ["x", "B", "A"], 0) == "A"
    assert classify_proximity(tie, [0, 2, 1], 0) == 1


def test_classify_planted_clusters(rng):
    d, labels = _cluster_distances(rng)
    assert all(classify_proximity(d, labels, i) == labels[i] for i in range(len(labels)))
    mean, sd = repeated_kfold_classification(d, labels, folds=5, repeats=5, seed=1)
    assert mean == 1.0 and sd == 0.0


def test_kfold_null_and_determinism(rng):
    n = 40
    pts = rng.normal(size=(n, 3))
    d = np.linalg.norm(pts[:, None] - pts[None], axis=-1)
    labels = [0, 1] * (n // 2)
    mean, _ = repeated_kfold_classification(d, labels, folds=10, repeats=30, seed=3)
    assert abs(mean - 0.5) < 0.15
    assert repeated_kfold_classification(d, labels, seed=9, repeats=4) == \
        repeated_kfold_classification(d, labels, seed=9, repeats=4)


def test_stratified_folds_balance():
    labels = ["a"] * 20 + ["b"] * 10
    f = stratified_folds(labels, 10, np.random.default_rng(0))
    for k in range(10):
        assert np.sum((f == k)[:20]) == 2 and np.sum((f == k)[20:]) == 1
    with pytest.raises(ValueError):
        stratified_folds(["a"] * 3 + ["b"] * 30, 5, np.random.default_rng(0))


def test_loocv_duplicates_and_errors(rng):
    pts = rng.normal(size=(6, 4))
    dup = np.repeat(pts, 2, axis=0)
    d = np.linalg.norm(dup[:, None] - dup[None], axis=-1)
    ids = np.repeat(np.arange(6), 2)
    assert loocv_identification(d, ids) == 1.0
    with pytest.raises(ValueError):
        loocv_identification(d[:5, :5], [0, 0, 1, 1, 2])
    with pytest.raises(ValueError):
        loocv_identification(d, ids[:5])


def test_loocv_shuffled_is_chance(rng):
    subj = 15
    pts = np.repeat(rng.normal(scale=10, size=(subj, 3)), 2, axis=0) + rng.normal(scale=0.1, size=(2 * subj, 3))
    d = np.linalg.norm(pts[:, None] - pts[None], axis=-1)
    ids = np.repeat(np.arange(subj), 2)
    accs = [loocv_identification(d, rng.permutation(ids)) for _ in range(400)]
    chance = 1.0 / (2 * subj - 1)
    se = np.std(accs) / np.sqrt(len(accs))
    assert abs(np.mean(accs) - chance) < 4 * se


def test_loocv_rank_trend_on_scan_rescan():
    stack, _ = sample_scan_rescan(V=40, subjects=30, K=8, spread=0.3, seed=0)
    acc = {}
    for K in (2, 8):
        model, _ = fit_shared_lambda(stack, K)
        acc[K] = loocv_identification(pairwise_distance(model), stack.ids)
    assert acc[8] >= acc[2]


def test_bh_hand_example():
    assert bh_reject([0.01, 0.02, 0.2], 0.15).tolist() == [True, True, False]
    assert bh_reject([0.2, 0.01, 0.02], 0.15).tolist() == [False, True, True]
    assert bh_reject([], 0.1).size == 0


def test_bh_matches_adjusted_pvalues_and_is_monotone(rng):
    for _ in range(20):
        p = np.concatenate([rng.uniform(size=80), rng.uniform(0, 1e-3, size=rng.integers(0, 20))])
        adj = false_discovery_control(p, method="bh")
        prev = np.zeros(p.size, dtype=bool)
        for q in (0.01, 0.05, 0.1, 0.2, 0.5):
            r = bh_reject(p, q)
            assert np.array_equal(r, adj <= q)
            assert np.all(r[prev])
            prev = r


def test_welch_against_hand_formula(rng):
    a = rng.normal(size=(7, 3))
    b = rng.normal(2, 3, size=(11, 3))
    t, p = welch_t(a, b)
    va, vb = a.var(0, ddof=1) / 7, b.var(0, ddof=1) / 11
    t_hand = (a.mean(0) - b.mean(0)) / np.sqrt(va + vb)
    assert np.allclose(t, t_hand)
    assert np.all((p > 0) & (p <= 1))


def test_edge_test_identical_groups(rng):
    D = rng.normal(size=(1, 6, 6))
    D = np.repeat(D + D.transpose(0, 2, 1), 8, axis=0)
    rep = edge_group_ttest(D, [0, 1] * 4)
    assert np.all(rep.t == 0) and not rep.reject.any() and np.all(rep.p == 1)


def test_edge_test_planted_signal(rng):
    V, n = 12, 40
    L = V * (V - 1) // 2
    planted = rng.choice(L, 10, replace=False)
    false_frac = []
    for _ in range(20):
        X = rng.normal(size=(n, L))
        X[n // 2:, planted] += 3.0
        from mgraf.netdata import devectorize

        rep = edge_group_ttest(devectorize(X, V), [0] * (n // 2) + [1] * (n // 2), q=0.15)
        assert rep.reject[planted].all()
        false_frac.append(rep.reject.sum() - 10)
    assert np.mean(false_frac) <= 0.15 * L


def test_edge_test_csv(tmp_path, rng):
    D = rng.normal(size=(6, 4, 4))
    D = D + D.transpose(0, 2, 1)
    D[3:, 2, 0] += 50
    D[3:, 0, 2] += 50
    rep = edge_group_ttest(D, ["x"] * 3 + ["y"] * 3, q=0.15)
    rep.to_csv(tmp_path / "all.csv")
    rep.to_csv(tmp_path / "rej.csv", only_rejected=True)
    rows = list(csv.DictReader(open(tmp_path / "all.csv")))
    assert len(rows) == 6 and {r["u"] for r in rows} <= {"2", "3", "4"}
    rej = list(csv.DictReader(open(tmp_path / "rej.csv")))
    assert all(r["reject"] == "1" for r in rej)
    assert any(r["u"] == "3" and r["v"] == "1" for r in rej)


def test_edge_test_errors(rng):
    D = np.zeros((4, 3, 3))
    with pytest.raises(ValueError):
        edge_group_ttest(D, [0, 1, 2, 0])
    with pytest.raises(ValueError):
        edge_group_ttest(D, [0, 1, 1, 1])
