"""Pure-numpy implementations of the hot loops.

Every function here has a twin in ``_numba`` with the same signature and
the same results up to floating-point summation order.
"""
import numpy as np


def logistic_pass(Y, mask, z, M, lam):
    """Linear predictor, log-likelihood and IRLS quantities for the stacked design.

    ``Y``, ``mask``: (n, L); ``z``: (L,); ``M``: (n, L, K); ``lam``: (n, K).
    Returns ``(loglik, r, w)`` where ``r = mask * (y - p)`` and
    ``w = mask * p * (1 - p)``.
    """
    eta = z[None, :] + np.einsum("ilk,ik->il", M, lam)
    p = 0.5 * (1.0 + np.tanh(0.5 * eta))
    ll = np.sum(mask * (Y * eta - np.logaddexp(0.0, eta)))
    r = mask * (Y - p)
    w = mask * p * (1.0 - p)
    return float(ll), r, w


def loglik_only(Y, mask, z, M, lam):
    eta = z[None, :] + np.einsum("ilk,ik->il", M, lam)
    return float(np.sum(mask * (Y * eta - np.logaddexp(0.0, eta))))


def coupling_matvec(w, M, v):
    # u_l = sum_i sum_k w_il M_ilk v_ik
    return np.einsum("il,ilk,ik->l", w, M, v)


def coupling_rmatvec(w, M, u):
    # t_ik = sum_l w_il M_ilk u_l
    return np.einsum("il,ilk,l->ik", w, M, u)


def network_hessian_blocks(w, M):
    return np.einsum("il,ilj,ilk->ijk", w, M, M)


def pair_distances(Q, lam):
    """Frobenius distances between Q_i diag(lam_i) Q_i^T using only K x K traces."""
    n = Q.shape[0]
    sq = np.sum(lam * lam, axis=1)
    cross = np.empty((n, n))
    for a in range(n):
        # G[b] = Q_a^T Q_b; tr(Lam_a G Lam_b G^T) = sum_kj lam_ak G[k,j]^2 lam_bj
        G = np.einsum("vk,bvj->bkj", Q[a], Q)
        cross[a] = np.einsum("k,bkj,bj->b", lam[a], G * G, lam)
    d2 = sq[:, None] + sq[None, :] - 2.0 * cross
    d2 = np.maximum(d2, 0.0)
    d = np.sqrt(d2)
    d[np.arange(n), np.arange(n)] = 0.0
    return 0.5 * (d + d.T)


def bfs_path_stats(A):
    """Sum of BFS distances and count over connected ordered pairs u != v."""
    V = A.shape[0]
    adj = A.astype(bool)
    total = 0
    count = 0
    for s in range(V):
        dist = np.full(V, -1, dtype=np.int64)
        dist[s] = 0
        frontier = np.zeros(V, dtype=bool)
        frontier[s] = True
        seen = frontier.copy()
        depth = 0
        while frontier.any():
            depth += 1
            nxt = adj[frontier].any(axis=0) & ~seen
            dist[nxt] = depth
            seen |= nxt
            frontier = nxt
        reach = dist > 0
        total += int(dist[reach].sum())
        count += int(reach.sum())
    return total, count
