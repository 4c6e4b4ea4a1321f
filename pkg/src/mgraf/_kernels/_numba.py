"""Numba-compiled twins of the kernels in ``_numpy``."""
import math

import numpy as np
from numba import njit


@njit(cache=True)
def _softplus(x):
    if x > 0.0:
        return x + math.log1p(math.exp(-x))
    return math.log1p(math.exp(x))


@njit(cache=True)
def _sigmoid(x):
    if x >= 0.0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


@njit(cache=True)
def logistic_pass(Y, mask, z, M, lam):
    n, L = Y.shape
    K = lam.shape[1]
    r = np.empty((n, L))
    w = np.empty((n, L))
    ll = 0.0
    for i in range(n):
        for l in range(L):
            eta = z[l]
            for k in range(K):
                eta += M[i, l, k] * lam[i, k]
            m = mask[i, l]
            p = _sigmoid(eta)
            ll += m * (Y[i, l] * eta - _softplus(eta))
            r[i, l] = m * (Y[i, l] - p)
            w[i, l] = m * p * (1.0 - p)
    return ll, r, w


@njit(cache=True)
def loglik_only(Y, mask, z, M, lam):
    n, L = Y.shape
    K = lam.shape[1]
    ll = 0.0
    for i in range(n):
        for l in range(L):
            eta = z[l]
            for k in range(K):
                eta += M[i, l, k] * lam[i, k]
            ll += mask[i, l] * (Y[i, l] * eta - _softplus(eta))
    return ll


@njit(cache=True)
def coupling_matvec(w, M, v):
    n, L = w.shape
    K = v.shape[1]
    u = np.zeros(L)
    for i in range(n):
        for l in range(L):
            acc = 0.0
            for k in range(K):
                acc += M[i, l, k] * v[i, k]
            u[l] += w[i, l] * acc
    return u


@njit(cache=True)
def coupling_rmatvec(w, M, u):
    n, L = w.shape
    K = M.shape[2]
    t = np.zeros((n, K))
    for i in range(n):
        for l in range(L):
            c = w[i, l] * u[l]
            for k in range(K):
                t[i, k] += c * M[i, l, k]
    return t


@njit(cache=True)
def network_hessian_blocks(w, M):
    n, L = w.shape
    K = M.shape[2]
    H = np.zeros((n, K, K))
    for i in range(n):
        for l in range(L):
            wl = w[i, l]
            for a in range(K):
                c = wl * M[i, l, a]
                for b in range(a, K):
                    H[i, a, b] += c * M[i, l, b]
        for a in range(K):
            for b in range(a + 1, K):
                H[i, b, a] = H[i, a, b]
    return H


@njit(cache=True)
def pair_distances(Q, lam):
    n, V, K = Q.shape
    sq = np.zeros(n)
    for i in range(n):
        for k in range(K):
            sq[i] += lam[i, k] * lam[i, k]
    d = np.zeros((n, n))
    G = np.empty((K, K))
    for a in range(n):
        for b in range(a + 1, n):
            for k in range(K):
                for j in range(K):
                    acc = 0.0
                    for v in range(V):
                        acc += Q[a, v, k] * Q[b, v, j]
                    G[k, j] = acc
            cross = 0.0
            for k in range(K):
                for j in range(K):
                    cross += lam[a, k] * G[k, j] * G[k, j] * lam[b, j]
            d2 = sq[a] + sq[b] - 2.0 * cross
            if d2 < 0.0:
                d2 = 0.0
            d[a, b] = math.sqrt(d2)
            d[b, a] = d[a, b]
    return d


@njit(cache=True)
def _bfs_path_stats(A):
    V = A.shape[0]
    dist = np.empty(V, dtype=np.int64)
    queue = np.empty(V, dtype=np.int64)
    total = 0
    count = 0
    for s in range(V):
        for v in range(V):
            dist[v] = -1
        dist[s] = 0
        head = 0
        tail = 1
        queue[0] = s
        while head < tail:
            u = queue[head]
            head += 1
            for v in range(V):
                if A[u, v] != 0 and dist[v] < 0:
                    dist[v] = dist[u] + 1
                    queue[tail] = v
                    tail += 1
                    total += dist[v]
                    count += 1
    return total, count


def bfs_path_stats(A):
    total, count = _bfs_path_stats(np.ascontiguousarray(A, dtype=np.uint8))
    return int(total), int(count)
