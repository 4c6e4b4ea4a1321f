"""Symmetric eigendecomposition helpers.

Eigenvalues are returned in descending order. Each eigenvector is signed so
that its largest-magnitude component (first one on ties) is positive.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np
from scipy import linalg as sla
from scipy.sparse.linalg import eigsh

# full dense decomposition up to this size, Lanczos beyond
FULL_EIGEN_MAX_V = 256

SYMMETRY_TOL = 1e-10


class EigenSystem(NamedTuple):
    values: np.ndarray
    vectors: np.ndarray


def _check_symmetric(B: np.ndarray) -> np.ndarray:
    B = np.asarray(B, dtype=float)
    if B.ndim != 2 or B.shape[0] != B.shape[1]:
        raise ValueError(f"expected square matrix, got shape {B.shape}")
    scale = max(1.0, float(np.max(np.abs(B)))) if B.size else 1.0
    if np.max(np.abs(B - B.T), initial=0.0) > SYMMETRY_TOL * scale:
        raise ValueError("matrix is not symmetric")
    return B


def fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip columns so the largest-magnitude entry of each is positive."""
    vectors = np.array(vectors, dtype=float)
    if vectors.size == 0:
        return vectors
    idx = np.argmax(np.abs(vectors), axis=0)
    s = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    s[s == 0] = 1.0
    return vectors * s


def eigen_sorted(B) -> EigenSystem:
    """All eigenpairs of symmetric ``B``, eigenvalues descending."""
    B = _check_symmetric(B)
    try:
        w, U = np.linalg.eigh(B)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(f"eigendecomposition did not converge: {exc}") from None
    # eigh is ascending; a stable reversal keeps tied eigenvalues in index order
    order = np.argsort(-w, kind="stable")
    return EigenSystem(w[order], fix_signs(U[:, order]))


def _partial(B, k_pos, k_neg):
    V = B.shape[0]
    cols = []
    if k_pos:
        if V <= FULL_EIGEN_MAX_V or k_pos >= V - 1:
            w, U = sla.eigh(B, subset_by_index=[V - k_pos, V - 1])
        else:
            w, U = eigsh(B, k=k_pos, which="LA")
        order = np.argsort(-w, kind="stable")
        cols.append(U[:, order])
    if k_neg:
        if V <= FULL_EIGEN_MAX_V or k_neg >= V - 1:
            w, U = sla.eigh(B, subset_by_index=[0, k_neg - 1])
        else:
            w, U = eigsh(B, k=k_neg, which="SA")
        # bottom block ordered sigma_{V-k_neg+1}, ..., sigma_V
        order = np.argsort(-w, kind="stable")
        cols.append(U[:, order])
    return np.hstack(cols) if cols else np.zeros((V, 0))


def select_signed_eigvecs(B, k_pos: int, k_neg: int) -> np.ndarray:
    """Top ``k_pos`` eigenvectors (descending) followed by the bottom ``k_neg``.

    The bottom block is ordered ``q_{V-k_neg+1}, ..., q_V``, so the last column
    belongs to the smallest eigenvalue. This is the maximizer of
    ``sum_j c_j u_j^T B u_j`` when the first ``k_pos`` weights are positive and
    the rest negative, each group sorted by decreasing value.
    """
    B = _check_symmetric(B)
    V = B.shape[0]
    k_pos, k_neg = int(k_pos), int(k_neg)
    if k_pos < 0 or k_neg < 0:
        raise ValueError("counts must be non-negative")
    if k_pos + k_neg > V:
        raise ValueError(f"k_pos + k_neg = {k_pos + k_neg} exceeds V = {V}")
    if V <= FULL_EIGEN_MAX_V:
        es = eigen_sorted(B)
        Q = np.hstack([es.vectors[:, :k_pos], es.vectors[:, V - k_neg:]])
        return Q
    return fix_signs(_partial(B, k_pos, k_neg))


def top_abs_eigvecs(B, K: int) -> np.ndarray:
    """``K`` eigenvectors with the largest ``|eigenvalue|``, ordered by decreasing magnitude."""
    es = eigen_sorted(B)
    order = np.argsort(-np.abs(es.values), kind="stable")[:K]
    return es.vectors[:, order], es.values[order]


def orthonormal_complement(Q, tol: float = 1e-8) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of the columns of ``Q``."""
    Q = np.asarray(Q, dtype=float)
    if Q.ndim == 1:
        Q = Q[:, None]
    V, m = Q.shape
    if m > V:
        raise ValueError("more columns than rows")
    if m and np.max(np.abs(Q.T @ Q - np.eye(m))) > tol:
        raise ValueError("columns are not orthonormal (rank-deficient or unnormalized Q)")
    full, R = np.linalg.qr(Q, mode="complete")
    if m and np.min(np.abs(np.diag(R))) < tol:
        raise ValueError("rank-deficient Q")
    U = full[:, m:]
    # one re-orthogonalization pass keeps U^T Q at machine precision
    U = U - Q @ (Q.T @ U)
    U, _ = np.linalg.qr(U)
    return U


def eval1(W) -> tuple[float, np.ndarray]:
    """Largest eigenvalue and its (sign-fixed) unit eigenvector."""
    es = eigen_sorted(W)
    return float(es.values[0]), es.vectors[:, 0]
