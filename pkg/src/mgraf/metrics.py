"""Deviation-space distances, nearest-class classification, scan-rescan identification
and per-edge group tests with Benjamini-Hochberg control."""
from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import stats

from . import _kernels as kern
from .core import MgrafModel
from .netdata import pair_index, vectorize_lower


def pairwise_distance(model: MgrafModel) -> np.ndarray:
    """d(i, j) = ||D_i - D_j||_F from K x K traces; no V x V difference is formed.

    For a shared basis the distance reduces to ||lam_i - lam_j||_2.
    """
    if model.variant == "shared_q":
        lam = model.lam
        diff = lam[:, None, :] - lam[None, :, :]
        return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    Q = np.ascontiguousarray(model.Q, dtype=float)
    lam = np.ascontiguousarray(model.lam_matrix(), dtype=float)
    return kern.pair_distances(Q, lam)


def direct_distance(D) -> np.ndarray:
    """||D_i - D_j||_F from materialized matrices (reference path)."""
    D = np.asarray(D, dtype=float)
    flat = D.reshape(D.shape[0], -1)
    diff = flat[:, None, :] - flat[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


def _class_order(labels):
    return sorted(set(labels))


def classify_proximity(distances, labels, test_index, train_index=None):
    """Class whose training members are closest on average to ``test_index``.

    Ties go to the smallest class label. ``labels`` covers every subject;
    ``train_index`` defaults to all subjects other than the test subject.
    """
    distances = np.asarray(distances)
    n = distances.shape[0]
    if train_index is None:
        train_index = [j for j in range(n) if j != test_index]
    train_index = np.asarray(train_index, dtype=int)
    train_labels = [labels[j] for j in train_index]
    classes = _class_order(train_labels)
    if not classes:
        raise ValueError("no training subjects")
    best, best_d = None, np.inf
    for c in classes:
        members = train_index[[lab == c for lab in train_labels]]
        if members.size == 0:
            raise ValueError(f"class {c!r} has no training subjects")
        m = float(distances[test_index, members].mean())
        if m < best_d:
            best, best_d = c, m
    return best


def loocv_identification(distances, ids) -> float:
    """Fraction of scans whose nearest other scan belongs to the same subject."""
    distances = np.asarray(distances, dtype=float)
    ids = list(ids)
    n = len(ids)
    if distances.shape != (n, n):
        raise ValueError("distance matrix and ids disagree in size")
    counts = {}
    for s in ids:
        counts[s] = counts.get(s, 0) + 1
    single = [s for s, c in counts.items() if c < 2]
    if single:
        raise ValueError(f"subjects with a single scan: {single[:5]}")
    d = distances.copy()
    np.fill_diagonal(d, np.inf)
    # argmin takes the first minimum, so ties resolve to the lowest index
    nearest = np.argmin(d, axis=1)
    return float(np.mean([ids[i] == ids[j] for i, j in enumerate(nearest)]))


def stratified_folds(labels, folds: int, rng) -> np.ndarray:
    """Fold index per subject; each class is shuffled and dealt round-robin."""
    labels = list(labels)
    out = np.empty(len(labels), dtype=int)
    for c in _class_order(labels):
        idx = np.flatnonzero([lab == c for lab in labels])
        if idx.size < folds:
            raise ValueError(f"class {c!r} has {idx.size} members, fewer than {folds} folds")
        idx = rng.permutation(idx)
        out[idx] = np.arange(idx.size) % folds
    return out


def repeated_kfold_classification(distances, labels, folds: int = 10, repeats: int = 30, seed=0):
    """Mean and sd over repeats of stratified k-fold accuracy of :func:`classify_proximity`."""
    if folds < 2:
        raise ValueError("folds must be >= 2")
    distances = np.asarray(distances)
    labels = list(labels)
    rng = np.random.default_rng(seed)
    accs = []
    for _ in range(repeats):
        assign = stratified_folds(labels, folds, rng)
        hits = 0
        for f in range(folds):
            test = np.flatnonzero(assign == f)
            train = np.flatnonzero(assign != f)
            for t in test:
                hits += classify_proximity(distances, labels, t, train) == labels[t]
        accs.append(hits / len(labels))
    accs = np.asarray(accs)
    return float(accs.mean()), float(accs.std(ddof=1)) if accs.size > 1 else 0.0


# --------------------------------------------------------------------------- edge tests

def bh_reject(p, q: float) -> np.ndarray:
    """Benjamini-Hochberg step-up: reject the k smallest p-values, k = max{i : p_(i) <= i q / m}."""
    p = np.asarray(p, dtype=float)
    m = p.size
    if m == 0:
        return np.zeros(0, dtype=bool)
    order = np.argsort(p, kind="stable")
    below = p[order] <= q * np.arange(1, m + 1) / m
    reject = np.zeros(m, dtype=bool)
    if below.any():
        k = np.flatnonzero(below)[-1]
        reject[order[: k + 1]] = True
    return reject


@dataclass
class EdgeTestReport:
    u: np.ndarray
    v: np.ndarray
    t: np.ndarray
    p: np.ndarray
    reject: np.ndarray
    q: float

    def to_csv(self, path, only_rejected: bool = False) -> None:
        with open(Path(path), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["u", "v", "t", "p", "reject"])
            for u, v, t, p, r in zip(self.u, self.v, self.t, self.p, self.reject):
                if only_rejected and not r:
                    continue
                w.writerow([int(u) + 1, int(v) + 1, repr(float(t)), repr(float(p)), int(r)])


def welch_t(a, b) -> tuple[np.ndarray, np.ndarray]:
    """Column-wise two-sided Welch t statistic and p-value; p = 1 where both groups are constant."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    va = a.var(axis=0, ddof=1)
    vb = b.var(axis=0, ddof=1)
    flat = (va == 0) & (vb == 0)
    with np.errstate(divide="ignore", invalid="ignore"), warnings.catch_warnings():
        # constant columns are handled below; scipy's precision warning is noise there
        warnings.simplefilter("ignore", RuntimeWarning)
        t, p = stats.ttest_ind(a, b, axis=0, equal_var=False)
    t = np.where(flat, 0.0, t)
    p = np.where(flat, 1.0, p)
    return np.asarray(t, dtype=float), np.asarray(p, dtype=float)


def edge_group_ttest(D, groups, q: float = 0.15) -> EdgeTestReport:
    """Welch t-test per node pair of D_i[uv] between two groups, BH at level ``q``.

    ``D`` is (n, V, V); ``groups`` holds two distinct values, the first in
    sorted order is group "a". Node indices in the report are 0-based.
    """
    D = np.asarray(D, dtype=float)
    groups = np.asarray(groups)
    levels = np.unique(groups)
    if levels.size != 2:
        raise ValueError(f"need exactly two groups, got {levels.size}")
    ga, gb = groups == levels[0], groups == levels[1]
    if ga.sum() < 2 or gb.sum() < 2:
        raise ValueError("each group needs at least two members")
    X = vectorize_lower(D)
    t, p = welch_t(X[ga], X[gb])
    rows, cols = pair_index(D.shape[1])
    return EdgeTestReport(rows, cols, t, p, bh_reject(p, q), float(q))
