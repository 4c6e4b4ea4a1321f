"""Separate factorization: mean adjacency plus a rank-K truncation of each demeaned network."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .netdata import NetworkStack, mean_adjacency

CLAMP = 1e-6


def truncate_rank(B: np.ndarray, K: int) -> np.ndarray:
    """Best rank-K approximation of symmetric ``B`` in Frobenius norm."""
    if K <= 0:
        return np.zeros_like(B, dtype=float)
    U, s, Vt = np.linalg.svd(B)
    return (U[:, :K] * s[:K]) @ Vt[:K]


@dataclass
class SeparateFactorization:
    abar: np.ndarray
    approx: np.ndarray  # (n, V, V) rank-K parts of A_i - abar
    K: int

    @property
    def probs(self) -> np.ndarray:
        """Unclamped estimates abar + approx_i (may leave [0, 1])."""
        return self.abar[None] + self.approx

    def clamped(self, eps: float = CLAMP) -> np.ndarray:
        return np.clip(self.probs, eps, 1.0 - eps)


def fit_separate(stack: NetworkStack, K: int) -> SeparateFactorization:
    V = stack.V
    if not 0 <= K <= V:
        raise ValueError(f"K must lie in [0, {V}]")
    abar = mean_adjacency(stack)
    approx = np.stack([truncate_rank(A - abar, K) for A in stack.adjacency.astype(float)])
    return SeparateFactorization(abar, approx, int(K))


def baseline_distance(fit: SeparateFactorization) -> np.ndarray:
    """||P_i - P_j||_F on unclamped estimates; the shared mean cancels."""
    flat = fit.approx.reshape(fit.approx.shape[0], -1)
    n = flat.shape[0]
    d = np.zeros((n, n))
    for i in range(n - 1):
        diff = flat[i + 1:] - flat[i]
        d[i, i + 1:] = np.sqrt(np.einsum("jk,jk->j", diff, diff))
    return d + d.T
