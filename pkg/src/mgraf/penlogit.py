"""MAP estimation for the ridge-penalized logistic regression of the logistic step.

The regression stacks the lower-triangle responses of all networks::

    logit(pi_il) = z_l + sum_k lam_ik * M_i[l, k]

with Gaussian priors ``z_l ~ N(0, 100 / gamma)`` and
``lam_ik ~ N(0, 2.5**2 / (gamma * (2 * sd_ik)**2))``. With
``shared_lambda=True`` a single K-vector of coefficients is used for every
network and ``sd_k`` is taken over the concatenated column.

The solver is Newton's method that never materializes the ``n*L x (L + P)``
design. The z-block of the Hessian is diagonal, so it is eliminated exactly
and the remaining Schur system in the lambda coefficients is either solved
densely (small) or by preconditioned conjugate gradients with the per-network
K x K blocks as preconditioner.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.sparse.linalg import LinearOperator, cg

from . import _kernels as kern

Z_PRIOR_SCALE = 10.0
LAMBDA_PRIOR_SCALE = 2.5
DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 100
# form the Schur complement explicitly when L * P**2 stays below this
_DENSE_SCHUR_WORK = 2e7


class DegenerateDesignError(ValueError):
    """A predictor column is constant (zero sd), usually from a degenerate Q column."""


class PenaltyWeights(NamedTuple):
    z: float
    lam: np.ndarray


def penalty_from_prior(gamma: float, sds) -> PenaltyWeights:
    """Prior precisions for z and lambda coefficients.

    The penalized objective is ``loglik - 0.5 * sum(precision * coef**2)``,
    so ``z`` gets ``gamma / 100`` and each lambda gets
    ``gamma * (2 * sd)**2 / 2.5**2``.
    """
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    sds = np.asarray(sds, dtype=float)
    if np.any(sds <= 0) or not np.all(np.isfinite(sds)):
        raise DegenerateDesignError("predictor column with zero sd (degenerate Q column)")
    z_prec = gamma / Z_PRIOR_SCALE**2
    lam_prec = gamma * (2.0 * sds) ** 2 / LAMBDA_PRIOR_SCALE**2
    return PenaltyWeights(float(z_prec), lam_prec)


def prior_variances(gamma: float, sds) -> tuple[float, np.ndarray]:
    w = penalty_from_prior(gamma, sds)
    return 1.0 / w.z, 1.0 / w.lam


def column_sds(M: np.ndarray, shared_lambda: bool) -> np.ndarray:
    """Sample sd (ddof=1) of each predictor column; (n, K) or (K,) when shared."""
    if shared_lambda:
        K = M.shape[2]
        return np.asarray(M).reshape(-1, K).std(axis=0, ddof=1)
    return np.asarray(M).std(axis=1, ddof=1)


@dataclass
class PenalizedDesign:
    """Stacked regression problem.

    ``Y`` and ``mask`` are (n, L); ``M`` is (n, L, K). The lambda penalty is
    (K,) when ``shared_lambda`` else (n, K).
    """

    Y: np.ndarray
    M: np.ndarray
    z_penalty: float
    lam_penalty: np.ndarray
    shared_lambda: bool = False
    mask: np.ndarray | None = None

    def __post_init__(self):
        self.Y = np.asarray(self.Y, dtype=float)
        self.M = np.asarray(self.M, dtype=float)
        n, L = self.Y.shape
        if self.M.shape[:2] != (n, L):
            raise ValueError(f"M has shape {self.M.shape}, expected ({n}, {L}, K)")
        self.lam_penalty = np.asarray(self.lam_penalty, dtype=float)
        want = (self.K,) if self.shared_lambda else (n, self.K)
        if self.lam_penalty.shape != want:
            raise ValueError(f"lam_penalty has shape {self.lam_penalty.shape}, expected {want}")
        if not (self.z_penalty > 0 and np.all(self.lam_penalty > 0)):
            raise ValueError("penalty weights must be strictly positive")
        if not (np.isfinite(self.z_penalty) and np.all(np.isfinite(self.lam_penalty))):
            raise ValueError("penalty weights must be finite")
        if self.mask is None:
            self.mask = np.ones((n, L))
        else:
            self.mask = np.asarray(self.mask, dtype=float)

    @property
    def n(self) -> int:
        return self.Y.shape[0]

    @property
    def L(self) -> int:
        return self.Y.shape[1]

    @property
    def K(self) -> int:
        return self.M.shape[2]

    @property
    def n_coef(self) -> int:
        return self.L + self.lam_penalty.size

    def expand(self, lam) -> np.ndarray:
        """Per-network (n, K) coefficient matrix."""
        lam = np.asarray(lam, dtype=float)
        if self.shared_lambda:
            return np.ascontiguousarray(np.broadcast_to(lam, (self.n, self.K)))
        return lam


def build_design(Y, M, gamma: float, shared_lambda: bool = False, mask=None) -> PenalizedDesign:
    sds = column_sds(M, shared_lambda)
    w = penalty_from_prior(gamma, sds)
    return PenalizedDesign(Y, M, w.z, w.lam, shared_lambda=shared_lambda, mask=mask)


@dataclass
class MapSolution:
    z: np.ndarray
    lam: np.ndarray
    objective: float
    gradient_norm: float
    converged: bool
    iterations: int
    trace: list = field(default_factory=list)


def objective(design: PenalizedDesign, z, lam) -> float:
    """Penalized log-posterior (up to constants)."""
    d = design
    ll = kern.loglik_only(d.Y, d.mask, np.asarray(z, float), d.M, d.expand(lam))
    return float(ll - 0.5 * d.z_penalty * np.dot(z, z) - 0.5 * np.sum(d.lam_penalty * lam * lam))


def _state(design: PenalizedDesign, z, lam):
    d = design
    ll, r, w = kern.logistic_pass(d.Y, d.mask, z, d.M, d.expand(lam))
    f = ll - 0.5 * d.z_penalty * np.dot(z, z) - 0.5 * np.sum(d.lam_penalty * lam * lam)
    gz = r.sum(axis=0) - d.z_penalty * z
    gl = kern.coupling_rmatvec(r, d.M, np.ones(d.L))
    if d.shared_lambda:
        gl = gl.sum(axis=0)
    gl = gl - d.lam_penalty * lam
    return float(f), gz, gl, w


def gradient(design: PenalizedDesign, z, lam):
    """Analytic gradient ``(d/dz, d/dlam)`` of the penalized objective."""
    _, gz, gl, _ = _state(design, np.asarray(z, float), np.asarray(lam, float))
    return gz, gl


def _newton_direction_structured(d: PenalizedDesign, gz, gl, w, gnorm):
    Dz = w.sum(axis=0) + d.z_penalty
    blocks = kern.network_hessian_blocks(w, d.M)
    K = d.K
    if d.shared_lambda:
        C = np.einsum("il,ilk->lk", w, d.M)
        S = blocks.sum(axis=0) + np.diag(d.lam_penalty) - C.T @ (C / Dz[:, None])
        rhs = gl - C.T @ (gz / Dz)
        dl = cho_solve(cho_factor(S), rhs)
        dz = (gz - C @ dl) / Dz
        return dz, dl, 0

    n = d.n
    rhs = gl - kern.coupling_rmatvec(w, d.M, gz / Dz)
    Hb = blocks + d.lam_penalty[:, :, None] * np.eye(K)[None]
    P = n * K
    if d.L * P * P <= _DENSE_SCHUR_WORK:
        Cf = (w[:, :, None] * d.M).transpose(1, 0, 2).reshape(d.L, P)
        S = -Cf.T @ (Cf / Dz[:, None])
        for i in range(n):
            S[i * K:(i + 1) * K, i * K:(i + 1) * K] += Hb[i]
        dl = cho_solve(cho_factor(S), rhs.ravel()).reshape(n, K)
        cg_iters = 0
    else:
        pre = Hb - kern.network_hessian_blocks(w * w / Dz[None, :], d.M)
        pre_inv = np.linalg.inv(pre)

        def matvec(v):
            v = v.reshape(n, K)
            out = np.einsum("ikj,ij->ik", Hb, v)
            out -= kern.coupling_rmatvec(w, d.M, kern.coupling_matvec(w, d.M, v) / Dz)
            return out.ravel()

        def precond(v):
            return np.einsum("ikj,ij->ik", pre_inv, v.reshape(n, K)).ravel()

        count = [0]

        def cb(_):
            count[0] += 1

        op = LinearOperator((P, P), matvec=matvec, dtype=float)
        pc = LinearOperator((P, P), matvec=precond, dtype=float)
        # forcing term: loose far from the optimum, tight near it
        rtol = max(min(0.1, np.sqrt(gnorm)), 1e-13)
        x, _ = cg(op, rhs.ravel(), rtol=rtol, atol=0.0, maxiter=max(200, 4 * P), M=pc, callback=cb)
        dl = x.reshape(n, K)
        cg_iters = count[0]
    dz = (gz - kern.coupling_matvec(w, d.M, dl)) / Dz
    return dz, dl, cg_iters


def dense_design_matrix(d: PenalizedDesign) -> np.ndarray:
    """Explicit (n*L, L + P) design; only for small problems and cross-checks."""
    n, L, K = d.n, d.L, d.K
    P = d.lam_penalty.size
    X = np.zeros((n * L, L + P))
    for i in range(n):
        rows = slice(i * L, (i + 1) * L)
        X[rows, :L] = np.eye(L)
        if d.shared_lambda:
            X[rows, L:] = d.M[i]
        else:
            X[rows, L + i * K:L + (i + 1) * K] = d.M[i]
    return X


def _newton_direction_dense(d: PenalizedDesign, X, gz, gl, w):
    prec = np.concatenate([np.full(d.L, d.z_penalty), d.lam_penalty.ravel()])
    H = X.T @ (w.ravel()[:, None] * X) + np.diag(prec)
    g = np.concatenate([gz, gl.ravel()])
    step = np.linalg.solve(H, g)
    return step[:d.L], step[d.L:].reshape(gl.shape), 0


def fit_map(
    design: PenalizedDesign,
    tolerance: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    init=None,
    method: str = "structured",
) -> MapSolution:
    """Maximize the penalized log-posterior with damped Newton steps.

    Stops when the sup-norm of the gradient drops to ``tolerance``. If
    ``max_iter`` Newton steps are exhausted the last (best) iterate is
    returned with ``converged=False``.
    """
    d = design
    if method not in ("structured", "dense"):
        raise ValueError(f"unknown method {method!r}")
    lam_shape = d.lam_penalty.shape
    if init is None:
        z = np.zeros(d.L)
        lam = np.zeros(lam_shape)
    else:
        z = np.array(init[0], dtype=float)
        lam = np.array(init[1], dtype=float).reshape(lam_shape)
    X = dense_design_matrix(d) if method == "dense" else None

    f, gz, gl, w = _state(d, z, lam)
    trace = [f]
    converged = False
    it = 0
    while True:
        gnorm = max(np.max(np.abs(gz)), np.max(np.abs(gl), initial=0.0))
        if gnorm <= tolerance:
            converged = True
            break
        if it >= max_iter:
            break
        it += 1
        if X is None:
            dz, dl, _ = _newton_direction_structured(d, gz, gl, w, gnorm)
        else:
            dz, dl, _ = _newton_direction_dense(d, X, gz, gl, w)
        slope = float(np.dot(gz, dz) + np.sum(gl * dl))
        # rounding allowance: the objective is a sum of n*L terms
        noise = 1e-13 * (1.0 + abs(f))
        t = 1.0
        for _ in range(60):
            zt, lt = z + t * dz, lam + t * dl
            ft, gzt, glt, wt = _state(d, zt, lt)
            if ft >= f + 1e-4 * t * slope - noise:
                break
            t *= 0.5
        else:
            break
        z, lam, f, gz, gl, w = zt, lt, ft, gzt, glt, wt
        trace.append(f)

    gnorm = max(np.max(np.abs(gz)), np.max(np.abs(gl), initial=0.0))
    return MapSolution(z, lam, f, float(gnorm), converged, it, trace)


# --------------------------------------------------------------------------- gamma selection


@dataclass
class FitContext:
    """Everything :func:`select_gamma_cv` needs to refit the model."""

    K: int
    variant: str = "full"
    epsilon: float = 0.01
    max_iter: int = 50


def _fold_masks(n: int, L: int, folds: int, seed) -> np.ndarray:
    rng = np.random.default_rng(seed)
    assign = rng.permutation(n * L) % folds
    return assign.reshape(n, L)


def select_gamma_cv(stack, context: FitContext, grid, folds: int = 5, seed=0, return_scores=False):
    """Choose gamma by held-out edge log-likelihood.

    Cells ``(network, node pair)`` are split uniformly at random into
    ``folds`` groups; each fold is masked out of the fit and scored under the
    fitted edge probabilities. Ties go to the earliest grid value.
    """
    from .core import fit_variant

    grid = list(grid)
    if not grid:
        raise ValueError("empty gamma grid")
    if folds < 2:
        raise ValueError("need at least 2 folds")
    if len(grid) == 1:
        return (grid[0], [np.nan]) if return_scores else grid[0]
    Y = stack.vectors()
    assign = _fold_masks(stack.n, stack.L, folds, seed)
    scores = []
    for gamma in grid:
        total, count = 0.0, 0
        for f in range(folds):
            held = assign == f
            model, _ = fit_variant(
                stack, context.K, gamma=gamma, variant=context.variant,
                epsilon=context.epsilon, max_iter=context.max_iter, mask=~held,
            )
            logits = model.logit_vectors()
            ll = Y * logits - np.logaddexp(0.0, logits)
            total += float(ll[held].sum())
            count += int(held.sum())
        scores.append(total / count)
    best = 0
    for j in range(1, len(grid)):
        if scores[j] > scores[best]:
            best = j
    return (grid[best], scores) if return_scores else grid[best]
