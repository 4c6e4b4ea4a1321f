"""Reduced models: shared lambdas (``D_i = Q_i Lam Q_i^T``) and a shared basis (``D_i = Q Lam_i Q^T``)."""
from __future__ import annotations

import numpy as np

from .core import (
    DEFAULT_EPSILON,
    DEFAULT_MAX_ITER,
    MgrafModel,
    run_cise,
    sigmoid,
    signed_basis,
)
from .penlogit import DEFAULT_TOL
from .spectral import eval1, fix_signs, orthonormal_complement


def fit_shared_lambda(stack, K, gamma=1.0, epsilon=DEFAULT_EPSILON, max_iter=DEFAULT_MAX_ITER,
                      mask=None, tolerance=DEFAULT_TOL, progress=None):
    """One K-vector of lambdas for all networks; returned sorted decreasingly."""
    return run_cise(stack, K, gamma, epsilon, max_iter, "shared_lambda", mask, tolerance, progress)


def fit_shared_q(stack, K, gamma=1.0, epsilon=DEFAULT_EPSILON, max_iter=DEFAULT_MAX_ITER,
                 mask=None, tolerance=DEFAULT_TOL, progress=None):
    """Joint embedding: one orthonormal basis, per-network loadings.

    Only a local maximum is guaranteed; the basis update is the greedy
    sequential procedure in :func:`greedy_Q_update`.
    """
    return run_cise(stack, K, gamma, epsilon, max_iter, "shared_q", mask, tolerance, progress)


def project_new_network(model: MgrafModel, A_star) -> np.ndarray:
    """Basis for an unseen network under a fitted shared-lambda model; Z and lambdas stay fixed."""
    if model.variant != "shared_lambda":
        raise ValueError("projection needs a shared-lambda model")
    A_star = np.asarray(A_star, dtype=float)
    if A_star.shape != model.Z.shape:
        raise ValueError(f"network has shape {A_star.shape}, model expects {model.Z.shape}")
    B = A_star - sigmoid(model.Z)
    np.fill_diagonal(B, 0.0)
    return signed_basis(B, model.lam)


def weighted_residual_sums(R, lam) -> np.ndarray:
    """W_k = sum_i lam_ik R_i for residual matrices R (n, V, V) and loadings (n, K)."""
    return np.einsum("ik,iuv->kuv", np.asarray(lam), np.asarray(R))


def shared_q_objective(W, Q) -> float:
    """sum_k q_k^T W_k q_k."""
    W = np.asarray(W)
    return float(np.einsum("vk,kvu,uk->", Q, W, Q))


def greedy_Q_update(W):
    """Sequential greedy maximizer of sum_k q_k^T W_k q_k over orthonormal Q.

    At each step the axis whose restricted top eigenvalue is largest is
    fixed next (ties to the lower index), searching only the orthogonal
    complement of the columns already chosen. Returns ``(Q, gains)`` where
    ``Q`` has its columns in the original axis order and ``gains[k]`` is the
    top eigenvalue collected when axis ``k`` was fixed.
    """
    W = [np.asarray(w, dtype=float) for w in W]
    K = len(W)
    if K == 0:
        raise ValueError("need at least one W matrix")
    V = W[0].shape[0]
    if K > V:
        raise ValueError(f"K={K} exceeds V={V}")
    Q = np.zeros((V, K))
    gains = np.zeros(K)
    chosen: list[int] = []
    for _ in range(K):
        U = np.eye(V) if not chosen else orthonormal_complement(Q[:, chosen])
        best, best_val, best_vec = -1, -np.inf, None
        for k in range(K):
            if k in chosen:
                continue
            Wr = U.T @ W[k] @ U
            val, vec = eval1(0.5 * (Wr + Wr.T))
            if val > best_val:
                best, best_val, best_vec = k, val, vec
        q = U @ best_vec
        q /= np.linalg.norm(q)
        Q[:, best] = fix_signs(q[:, None])[:, 0]
        gains[best] = best_val
        chosen.append(best)
    return Q, gains
