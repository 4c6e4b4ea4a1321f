"""M-GRAF model: logit(Pi_i) = Z + Q_i diag(lam_i) Q_i^T, fitted by block coordinate ascent.

Each sweep alternates

(I) ridge-penalized logistic regression for ``Z`` and the lambdas given the
    eigenvector bases (:mod:`mgraf.penlogit`), and
(II) a closed-form update of each basis from the eigenvectors of
     ``A_i - sigmoid(Z)``, choosing top or bottom eigenvectors according to
     the sign of each lambda.

The loop stops once the relative change of the joint log-likelihood falls
below ``epsilon`` or ``max_iter`` sweeps have run.
"""
from __future__ import annotations

import io
import json
import time
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels as kern
from .netdata import NetworkStack, devectorize, pair_index, vectorize_lower
from .penlogit import DEFAULT_TOL, build_design, fit_map
from .spectral import select_signed_eigvecs, top_abs_eigvecs

VARIANTS = ("full", "shared_lambda", "shared_q")
VARIANT_ALIASES = {
    "full": "full", "mgraf1": "full",
    "shared_lambda": "shared_lambda", "shared-lambda": "shared_lambda", "mgraf2": "shared_lambda",
    "shared_q": "shared_q", "shared-q": "shared_q", "joint": "shared_q",
}
DEFAULT_EPSILON = 0.01
DEFAULT_MAX_ITER = 50


def sigmoid(x):
    x = np.asarray(x, dtype=float)
    out = 0.5 * (1.0 + np.tanh(0.5 * x))
    return out if out.ndim else float(out)


def logit(p):
    p = np.asarray(p, dtype=float)
    if np.any((p <= 0) | (p >= 1)):
        raise ValueError("logit is only defined on the open interval (0, 1)")
    out = np.log(p) - np.log1p(-p)
    return out if out.ndim else float(out)


def lowtri_outer(Q: np.ndarray) -> np.ndarray:
    """Predictor columns M[..., l, k] = Q[..., u_l, k] * Q[..., v_l, k]."""
    rows, cols = pair_index(Q.shape[-2])
    return Q[..., rows, :] * Q[..., cols, :]


@dataclass
class MgrafModel:
    """Fitted parameters.

    ``Q`` is (n, V, K), or (V, K) for the shared-basis variant. ``lam`` is
    (n, K), or (K,) when the lambdas are shared.
    """

    variant: str
    Z: np.ndarray
    Q: np.ndarray
    lam: np.ndarray

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        self.Z = np.asarray(self.Z, dtype=float)
        self.Q = np.asarray(self.Q, dtype=float)
        self.lam = np.asarray(self.lam, dtype=float)

    @property
    def V(self) -> int:
        return self.Z.shape[0]

    @property
    def K(self) -> int:
        return self.Q.shape[-1]

    @property
    def n(self) -> int:
        if self.variant == "shared_lambda":
            return self.Q.shape[0]
        return self.lam.shape[0]

    def lam_matrix(self) -> np.ndarray:
        if self.variant == "shared_lambda":
            return np.broadcast_to(self.lam, (self.n, self.K))
        return self.lam

    def Q_stack(self) -> np.ndarray:
        if self.variant == "shared_q":
            return np.broadcast_to(self.Q, (self.n, self.V, self.K))
        return self.Q

    def deviance(self, i: int) -> np.ndarray:
        Q = self.Q_stack()[i]
        return (Q * self.lam_matrix()[i]) @ Q.T

    def logit_vectors(self) -> np.ndarray:
        """(n, L) logits of every node pair in every network."""
        z = vectorize_lower(self.Z)
        M = lowtri_outer(self.Q_stack())
        return z[None, :] + np.einsum("ilk,ik->il", M, self.lam_matrix())


def edge_prob_matrix(model: MgrafModel, i: int) -> np.ndarray:
    """Edge probabilities of network ``i``; the diagonal is 0."""
    P = sigmoid(model.Z + model.deviance(i))
    np.fill_diagonal(P, 0.0)
    return P


def edge_prob_stack(model: MgrafModel) -> np.ndarray:
    return devectorize(sigmoid(model.logit_vectors()), model.V)


def deviance_matrices(model: MgrafModel) -> list[np.ndarray]:
    return [model.deviance(i) for i in range(model.n)]


def joint_log_likelihood(stack: NetworkStack, model: MgrafModel, mask=None) -> float:
    """Bernoulli log-likelihood over all lower-triangle pairs, in overflow-safe form."""
    if stack.V != model.V or stack.n != model.n:
        raise ValueError("stack and model dimensions differ")
    Y = stack.vectors()
    eta = model.logit_vectors()
    terms = Y * eta - np.logaddexp(0.0, eta)
    if mask is not None:
        terms = terms * mask
    return float(terms.sum())


def trace_surrogate(A, Z, D) -> float:
    """0.5 * tr((A - sigmoid(Z)) D) with the diagonals of A and sigmoid(Z) zeroed."""
    B = np.asarray(A, dtype=float) - sigmoid(Z)
    np.fill_diagonal(B, 0.0)
    return 0.5 * float(np.sum(B * np.asarray(D).T))


def sign_count(lam) -> int:
    """Number of strictly positive entries; zeros count as non-positive."""
    return int(np.sum(np.asarray(lam) > 0))


def signed_basis(B, lam) -> np.ndarray:
    """Maximizer over orthonormal Q of sum_k lam_k q_k^T B q_k, columns aligned with ``lam``."""
    lam = np.asarray(lam, dtype=float)
    K = lam.size
    k = sign_count(lam)
    Qs = select_signed_eigvecs(B, k, K - k)
    order = np.argsort(-lam, kind="stable")
    Q = np.empty_like(Qs)
    Q[:, order] = Qs
    return Q


def update_Q_step(A_i, Z, lambda_i) -> np.ndarray:
    """Closed-form basis update for one network given ``Z`` and its lambdas."""
    B = np.asarray(A_i, dtype=float) - sigmoid(Z)
    np.fill_diagonal(B, 0.0)
    return signed_basis(B, lambda_i)


@dataclass
class FitReport:
    variant: str
    K: int
    gamma: float
    epsilon: float
    max_iter: int
    loglik_trace: list = field(default_factory=list)
    converged: bool = False
    iterations: int = 0
    step_times: list = field(default_factory=list)
    logistic_converged: list = field(default_factory=list)
    backend: str = kern.BACKEND_NAME

    @property
    def logistic_ok(self) -> bool:
        return all(self.logistic_converged)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["loglik_trace"] = [float(x) for x in self.loglik_trace]
        return out


class CiseRunner:
    """Stateful block-coordinate fitter; ``cise_fit`` drives it, perfbench times it."""

    def __init__(self, stack: NetworkStack, K: int, gamma: float = 1.0, variant: str = "full",
                 mask=None, tolerance: float = DEFAULT_TOL, newton_max_iter: int = 100):
        variant = VARIANT_ALIASES.get(variant, variant)
        if variant not in VARIANTS:
            raise ValueError(f"unknown variant {variant!r}")
        V = stack.V
        if not 1 <= K:
            raise ValueError("K must be >= 1")
        if K >= V:
            raise ValueError(f"K={K} must be at most V-1={V - 1}; a rank-V deviation is not identifiable")
        if not gamma > 0:
            raise ValueError("gamma must be positive")
        self.stack = stack
        self.K = int(K)
        self.gamma = float(gamma)
        self.variant = variant
        self.tolerance = tolerance
        self.newton_max_iter = newton_max_iter
        self.Y = stack.vectors()
        n, L = self.Y.shape
        self.mask = np.ones((n, L)) if mask is None else np.asarray(mask, dtype=float)
        self.masked = mask is not None
        seen = self.mask.sum(axis=0)
        abar = np.where(seen > 0, (self.mask * self.Y).sum(axis=0) / np.maximum(seen, 1), 0.5)
        self.abar = abar
        # continuity-corrected start for z so the initial likelihood is finite
        c = 0.5 / np.maximum(seen, 1)
        self.z = logit(np.clip(abar, c, 1 - c))
        self._init_bases()
        self.lam = np.zeros(K if variant == "shared_lambda" else (n, K))
        self.last_map = None

    # ---- initialization
    def _init_bases(self):
        n, K, V = self.stack.n, self.K, self.stack.V
        dev = self.mask * (self.Y - self.abar[None, :])
        if not np.any(dev):
            # single network (or identical networks): deviate from the overall density
            dens = np.sum(self.mask * self.Y) / max(np.sum(self.mask), 1)
            dev = self.mask * (self.Y - dens)
        if self.variant == "shared_q":
            B = devectorize(dev, V)
            S = np.einsum("iuv,ivw->uw", B, B)
            Q, _ = top_abs_eigvecs(S, K)
            self.Q = Q
        else:
            self.Q = np.stack([top_abs_eigvecs(devectorize(dev[i], V), K)[0] for i in range(n)])

    # ---- model views
    def lam_matrix(self):
        if self.variant == "shared_lambda":
            return np.ascontiguousarray(np.broadcast_to(self.lam, (self.stack.n, self.K)))
        return self.lam

    def predictors(self):
        if self.variant == "shared_q":
            return np.broadcast_to(lowtri_outer(self.Q), (self.stack.n, self.stack.L, self.K))
        return lowtri_outer(self.Q)

    def loglik(self) -> float:
        return float(kern.loglik_only(self.Y, self.mask, self.z, self.predictors(), self.lam_matrix()))

    def model(self) -> MgrafModel:
        return MgrafModel(self.variant, devectorize(self.z, self.stack.V), self.Q.copy(), self.lam.copy())

    # ---- steps
    def logistic_step(self):
        M = self.predictors()
        design = build_design(self.Y, M, self.gamma, shared_lambda=self.variant == "shared_lambda",
                              mask=self.mask if self.masked else None)
        sol = fit_map(design, tolerance=self.tolerance, max_iter=self.newton_max_iter,
                      init=(self.z, self.lam))
        self.z, self.lam = sol.z, sol.lam
        self.last_map = sol
        return sol

    def residual_matrices(self):
        """A_i - sigmoid(Z) as (n, V, V); held-out cells are filled with the current fit."""
        pz = sigmoid(self.z)
        R = self.Y - pz[None, :]
        if self.masked:
            M = self.predictors()
            p_fit = sigmoid(self.z[None, :] + np.einsum("ilk,ik->il", M, self.lam_matrix()))
            R = np.where(self.mask > 0, R, p_fit - pz[None, :])
        return devectorize(R, self.stack.V)

    def q_step(self):
        R = self.residual_matrices()
        if self.variant == "shared_q":
            from .variants import greedy_Q_update, shared_q_objective

            W = np.einsum("ik,iuv->kuv", self.lam, R)
            Q_new, _ = greedy_Q_update(list(W))
            # keep the previous basis if the greedy pass does not improve the surrogate
            if shared_q_objective(W, Q_new) >= shared_q_objective(W, self.Q):
                self.Q = Q_new
            self.W = W
            return
        lam = self.lam_matrix()
        self.Q = np.stack([signed_basis(R[i], lam[i]) for i in range(self.stack.n)])

    def sweep(self):
        t0 = time.perf_counter()
        sol = self.logistic_step()
        t1 = time.perf_counter()
        self.q_step()
        t2 = time.perf_counter()
        return sol, (t1 - t0, t2 - t1)


def _sort_shared_lambda(model: MgrafModel) -> MgrafModel:
    order = np.argsort(-model.lam, kind="stable")
    return MgrafModel(model.variant, model.Z, model.Q[:, :, order], model.lam[order])


def run_cise(stack, K, gamma=1.0, epsilon=DEFAULT_EPSILON, max_iter=DEFAULT_MAX_ITER,
             variant="full", mask=None, tolerance=DEFAULT_TOL, progress=None):
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    runner = CiseRunner(stack, K, gamma=gamma, variant=variant, mask=mask, tolerance=tolerance)
    report = FitReport(runner.variant, runner.K, runner.gamma, float(epsilon), int(max_iter))
    report.loglik_trace.append(runner.loglik())
    for it in range(1, max_iter + 1):
        sol, times = runner.sweep()
        ll = runner.loglik()
        prev = report.loglik_trace[-1]
        report.loglik_trace.append(ll)
        report.step_times.append({"logistic": times[0], "eigen": times[1]})
        report.logistic_converged.append(bool(sol.converged))
        report.iterations = it
        if progress is not None:
            progress(it, ll)
        if abs(ll - prev) / max(abs(prev), 1e-300) < epsilon:
            report.converged = True
            break
    if not report.logistic_ok:
        warnings.warn("penalized logistic step hit its iteration cap in at least one sweep",
                      RuntimeWarning, stacklevel=2)
    model = runner.model()
    if model.variant == "shared_lambda":
        model = _sort_shared_lambda(model)
    return model, report


def cise_fit(stack: NetworkStack, K: int, gamma: float = 1.0, epsilon: float = DEFAULT_EPSILON,
             max_iter: int = DEFAULT_MAX_ITER, seed=None, mask=None, tolerance: float = DEFAULT_TOL,
             progress=None):
    """Fit the per-network model ``D_i = Q_i diag(lam_i) Q_i^T``.

    ``seed`` is accepted for interface symmetry; the loop itself is
    deterministic. ``mask`` (n, L), when given, marks observed cells; the rest
    are ignored by the likelihood and imputed by the current fit in step (II).
    With ``n == 1`` the split between ``Z`` and ``D_1`` is not identified and
    is determined by the priors alone.
    """
    return run_cise(stack, K, gamma, epsilon, max_iter, "full", mask, tolerance, progress)


def fit_variant(stack, K, gamma=1.0, variant="full", epsilon=DEFAULT_EPSILON,
                max_iter=DEFAULT_MAX_ITER, mask=None, tolerance=DEFAULT_TOL, progress=None):
    variant = VARIANT_ALIASES.get(variant, variant)
    return run_cise(stack, K, gamma, epsilon, max_iter, variant, mask, tolerance, progress)


# --------------------------------------------------------------------------- serialization

MODEL_FORMAT = "mgraf-model"
MODEL_FORMAT_VERSION = 1


def save_model(path, model: MgrafModel, report: FitReport | None = None, extra: dict | None = None):
    """Write an ``.npz`` archive: arrays ``Z``, ``Q``, ``lam`` and a JSON ``meta`` header."""
    meta = {
        "format": MODEL_FORMAT,
        "version": MODEL_FORMAT_VERSION,
        "variant": model.variant,
        "n": model.n,
        "V": model.V,
        "K": model.K,
        "shapes": {"Z": list(model.Z.shape), "Q": list(model.Q.shape), "lam": list(model.lam.shape)},
        "gamma": None if report is None else report.gamma,
        "report": None if report is None else report.to_dict(),
    }
    if extra:
        meta.update(extra)
    buf = io.BytesIO()
    np.savez(buf, Z=model.Z, Q=model.Q, lam=model.lam, meta=np.array(json.dumps(meta)))
    Path(path).write_bytes(buf.getvalue())
    return meta


def load_model(path):
    """Inverse of :func:`save_model`; returns ``(model, meta)``."""
    with np.load(path, allow_pickle=False) as f:
        meta = json.loads(str(f["meta"]))
        if meta.get("format") != MODEL_FORMAT:
            raise ValueError(f"{path} is not an {MODEL_FORMAT} archive")
        model = MgrafModel(meta["variant"], f["Z"], f["Q"], f["lam"])
    for key, arr in (("Z", model.Z), ("Q", model.Q), ("lam", model.lam)):
        if list(arr.shape) != meta["shapes"][key]:
            raise ValueError(f"shape header mismatch for {key}")
    return model, meta
