"""Goodness of fit: edge-prediction AUC/RSS, topology predictive checks and the elbow scan."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.stats import rankdata

from . import _kernels as kern
from .core import DEFAULT_EPSILON, DEFAULT_MAX_ITER, fit_variant
from .netdata import NetworkStack, vectorize_lower

MEASURES = ("density", "apl", "transitivity", "degree_mean")


# --------------------------------------------------------------------------- AUC / RSS

def auc_score(y, score) -> float:
    """Mann-Whitney AUC with average ranks for ties; NaN when one class is absent."""
    y = np.asarray(y).astype(bool)
    n1 = int(y.sum())
    n0 = y.size - n1
    if n1 == 0 or n0 == 0:
        return float("nan")
    r = rankdata(score)
    return float((r[y].sum() - n1 * (n1 + 1) / 2.0) / (n1 * n0))


@dataclass
class AucRss:
    auc: np.ndarray
    rss: np.ndarray

    def summary(self) -> dict:
        def ms(x):
            x = x[np.isfinite(x)]
            sd = float(x.std(ddof=1)) if x.size > 1 else 0.0
            return (float(x.mean()) if x.size else float("nan")), sd

        (am, asd), (rm, rsd) = ms(self.auc), ms(self.rss)
        return {"auc_mean": am, "auc_sd": asd, "rss_mean": rm, "rss_sd": rsd,
                "auc_missing": int(np.sum(~np.isfinite(self.auc)))}


def auc_rss(stack: NetworkStack, probs) -> AucRss:
    """Per-network AUC of lower-triangle probabilities and RSS = ||vec(A_i) - vec(P_i)||_2."""
    P = np.asarray(probs, dtype=float)
    if P.shape != stack.adjacency.shape:
        raise ValueError(f"probabilities have shape {P.shape}, stack {stack.adjacency.shape}")
    Y = stack.vectors()
    Pv = vectorize_lower(P)
    auc = np.array([auc_score(y, p) for y, p in zip(Y, Pv)])
    rss = np.linalg.norm(Y - Pv, axis=1)
    return AucRss(auc, rss)


# --------------------------------------------------------------------------- topology

@dataclass
class TopologySummary:
    density: float
    apl: float
    transitivity: float
    degree_mean: float
    disconnected_fraction: float = 0.0

    def as_tuple(self):
        return (self.density, self.apl, self.transitivity, self.degree_mean)


def topology_summary(A) -> TopologySummary:
    """Density, mean BFS distance over connected pairs, transitivity and mean degree.

    The path length is NaN when no pair is connected; transitivity is 0 when
    the graph has no connected triple.
    """
    A = np.ascontiguousarray(A, dtype=np.uint8)
    V = A.shape[0]
    deg = A.sum(axis=1).astype(float)
    edges = deg.sum() / 2.0
    Af = A.astype(float)
    closed = float(np.einsum("ij,jk,ki->", Af, Af, Af))  # trace(A^3) = 6 * triangles
    triples = float(np.sum(deg * (deg - 1)))
    total, count = kern.bfs_path_stats(A)
    ordered = V * (V - 1)
    return TopologySummary(
        density=edges / (ordered / 2) if V > 1 else 0.0,
        apl=total / count if count else float("nan"),
        transitivity=closed / triples if triples > 0 else 0.0,
        degree_mean=float(deg.mean()),
        disconnected_fraction=1.0 - count / ordered if V > 1 else 0.0,
    )


@dataclass
class TopologyCheck:
    observed: np.ndarray  # (n, 4)
    pred_mean: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    replicates: int

    def coverage(self, measure: str) -> float:
        j = MEASURES.index(measure)
        o, lo, hi = self.observed[:, j], self.lo[:, j], self.hi[:, j]
        ok = np.isfinite(o) & np.isfinite(lo)
        return float(np.mean((o[ok] >= lo[ok]) & (o[ok] <= hi[ok]))) if ok.any() else float("nan")

    def rows(self):
        for i in range(self.observed.shape[0]):
            for j, name in enumerate(MEASURES):
                yield (i + 1, name, self.observed[i, j], self.pred_mean[i, j], self.lo[i, j], self.hi[i, j])

    def to_csv(self, path) -> None:
        with open(Path(path), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["subject", "measure", "observed", "pred_mean", "lo", "hi"])
            for r in self.rows():
                w.writerow([r[0], r[1], *(repr(float(x)) for x in r[2:])])


def predictive_topology_check(probs, stack: NetworkStack, replicates: int = 100, seed=None,
                              level: float = 0.95) -> TopologyCheck:
    """Simulate ``replicates`` networks per subject from its fitted probabilities.

    Returns observed summaries with the predictive mean and central ``level``
    interval of each measure.
    """
    from .simulate import sample_adjacency, spawn_rngs

    P = np.asarray(probs, dtype=float)
    n = stack.n
    if P.shape != stack.adjacency.shape:
        raise ValueError("probabilities and stack differ in shape")
    tail = 100 * (1 - level) / 2
    obs = np.array([topology_summary(A).as_tuple() for A in stack.adjacency])
    mean = np.full_like(obs, np.nan)
    lo = np.full_like(obs, np.nan)
    hi = np.full_like(obs, np.nan)
    for i, rng in enumerate(spawn_rngs(seed, n)):
        sims = np.array([topology_summary(sample_adjacency(P[i], rng)).as_tuple()
                         for _ in range(replicates)])
        for j in range(sims.shape[1]):
            col = sims[:, j][np.isfinite(sims[:, j])]
            if col.size:
                mean[i, j] = col.mean()
                lo[i, j], hi[i, j] = np.percentile(col, [tail, 100 - tail])
    return TopologyCheck(obs, mean, lo, hi, int(replicates))


# --------------------------------------------------------------------------- elbow

def n_free_parameters(variant: str, n: int, V: int, K: int) -> int:
    """z (L) + lambdas + Stiefel dimensions of the bases."""
    L = V * (V - 1) // 2
    stiefel = V * K - K * (K + 1) // 2
    if variant == "shared_lambda":
        return L + K + n * stiefel
    if variant == "shared_q":
        return L + n * K + stiefel
    return L + n * K + n * stiefel


def bend_point(grid, values):
    """Grid point with the most negative divided second difference; None for < 3 points."""
    x = np.asarray(grid, dtype=float)
    y = np.asarray(values, dtype=float)
    if x.size < 3 or not np.all(np.isfinite(y)):
        return None
    s = np.diff(y) / np.diff(x)
    curv = np.diff(s) / (0.5 * (x[2:] - x[:-2]))
    return int(grid[1 + int(np.argmin(curv))])


@dataclass
class ElbowScan:
    grid: list
    variant: str
    loglik: np.ndarray  # (repetitions, len(grid)); NaN where a fit failed
    n: int
    V: int
    failures: list = field(default_factory=list)

    @property
    def mean(self) -> np.ndarray:
        return np.nanmean(self.loglik, axis=0)

    @property
    def halfwidth(self) -> np.ndarray:
        r = np.sum(np.isfinite(self.loglik), axis=0)
        sd = np.nanstd(self.loglik, axis=0, ddof=1) if self.loglik.shape[0] > 1 else np.zeros(len(self.grid))
        return 1.96 * sd / np.sqrt(np.maximum(r, 1))

    def suggestion(self):
        return bend_point(self.grid, self.mean)

    def rep_suggestions(self) -> list:
        return [bend_point(self.grid, row) for row in self.loglik]

    def information_criteria(self) -> dict:
        N = self.n * self.V * (self.V - 1) // 2
        p = np.array([n_free_parameters(self.variant, self.n, self.V, K) for K in self.grid])
        ll = self.mean
        return {"aic": (2 * p - 2 * ll).tolist(), "bic": (p * np.log(N) - 2 * ll).tolist()}

    def to_csv(self, path) -> None:
        h = self.halfwidth
        with open(Path(path), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["K", "mean_ll", "lo", "hi"])
            for K, m, hw in zip(self.grid, self.mean, h):
                w.writerow([K, repr(float(m)), repr(float(m - hw)), repr(float(m + hw))])

    def to_dict(self) -> dict:
        return {
            "grid": list(self.grid), "variant": self.variant,
            "mean_ll": self.mean.tolist(), "halfwidth": self.halfwidth.tolist(),
            "loglik": self.loglik.tolist(), "suggested_K": self.suggestion(),
            "rep_suggestions": self.rep_suggestions(), "failures": self.failures,
            **self.information_criteria(),
        }


def elbow_scan(data, grid, gamma: float = 1.0, epsilon: float = DEFAULT_EPSILON, repetitions: int = 1,
               seed=None, variant: str = "full", max_iter: int = DEFAULT_MAX_ITER, progress=None) -> ElbowScan:
    """Converged joint log-likelihood over a grid of K.

    ``data`` is either a fixed :class:`NetworkStack` (one fit per K) or a
    :class:`mgraf.simulate.SimulationSpec`, in which case each repetition
    draws a fresh stack with its own derived seed.
    """
    from .simulate import SimulationSpec, simulate

    grid = [int(k) for k in grid]
    if not grid:
        raise ValueError("empty K grid")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("K grid must be strictly increasing")
    if isinstance(data, SimulationSpec):
        seeds = np.random.SeedSequence(data.seed if seed is None else seed).spawn(repetitions)
        stacks = (simulate(SimulationSpec(**{**data.to_dict(), "seed": int(s.generate_state(1)[0])}))[0]
                  for s in seeds)
        n, V = data.n, data.V
    else:
        stacks = (data for _ in range(repetitions))
        n, V = data.n, data.V
    ll = np.full((repetitions, len(grid)), np.nan)
    failures = []
    for r, stack in enumerate(stacks):
        for j, K in enumerate(grid):
            try:
                _, report = fit_variant(stack, K, gamma=gamma, variant=variant, epsilon=epsilon,
                                        max_iter=max_iter)
                ll[r, j] = report.loglik_trace[-1]
            except (ValueError, RuntimeError, np.linalg.LinAlgError) as exc:
                failures.append({"rep": r, "K": K, "error": str(exc)})
            if progress is not None:
                progress(r, K)
    return ElbowScan(grid, variant, ll, n, V, failures)
