"""Samplers for synthetic network stacks and the parameter-recovery protocol.

All randomness comes from numpy's PCG64 generator (``np.random.default_rng``).
Per-network streams are derived with ``SeedSequence.spawn`` so that results do
not depend on how networks are distributed over workers.

Simulation config keys (JSON)
-----------------------------
``V``, ``n``, ``K``, ``seed``, ``within`` (block logit, default 1.5),
``between`` (default -1.5), ``blocks`` (default 2), ``lam0`` (list of K
reals, default :func:`default_lambda`), ``perturb`` (fraction of Z0 entries
permuted per replicate, default 0.1).
"""
from __future__ import annotations

import io
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .core import DEFAULT_EPSILON, DEFAULT_MAX_ITER, cise_fit, sigmoid
from .netdata import NetworkStack, devectorize, n_pairs, pair_index, vectorize_lower


def make_rng(seed=None) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def spawn_rngs(seed, count: int) -> list[np.random.Generator]:
    """Independent child generators, one per network."""
    if isinstance(seed, np.random.Generator):
        return seed.spawn(count)
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return [np.random.default_rng(s) for s in ss.spawn(count)]


def sample_adjacency(P, rng) -> np.ndarray:
    """One symmetric hollow binary matrix with independent upper/lower pairs ~ Bernoulli(P)."""
    P = np.asarray(P, dtype=float)
    V = P.shape[0]
    rows, cols = pair_index(V)
    on = rng.random(rows.size) < P[rows, cols]
    A = np.zeros((V, V), dtype=np.uint8)
    A[rows[on], cols[on]] = 1
    A[cols[on], rows[on]] = 1
    return A


def sample_er(V: int, p: float, n: int, seed=None) -> NetworkStack:
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    P = np.full((V, V), float(p))
    return NetworkStack(np.stack([sample_adjacency(P, r) for r in spawn_rngs(seed, n)]))


def sample_mgraf(Z, D, seed=None, ids=None, labels=None) -> NetworkStack:
    """A_i[uv] ~ Bernoulli(sigmoid(Z_uv + D_i[uv])) for u > v, mirrored."""
    Z = np.asarray(Z, dtype=float)
    D = np.asarray(D, dtype=float)
    if D.ndim == 2:
        D = D[None]
    if D.shape[1:] != Z.shape:
        raise ValueError(f"D has shape {D.shape[1:]}, Z has {Z.shape}")
    rngs = spawn_rngs(seed, D.shape[0])
    mats = [sample_adjacency(sigmoid(Z + Di), r) for Di, r in zip(D, rngs)]
    return NetworkStack(np.stack(mats), labels=labels, ids=ids)


def random_stiefel(V: int, K: int, rng) -> np.ndarray:
    """Haar-uniform V x K matrix with orthonormal columns."""
    Q, R = np.linalg.qr(rng.standard_normal((V, K)))
    return Q * np.sign(np.where(np.diag(R) == 0, 1.0, np.diag(R)))


def block_logits(V: int, within: float = 1.5, between: float = -1.5, blocks: int = 2) -> np.ndarray:
    """Hollow block-constant logit matrix with contiguous, near-equal communities."""
    g = np.arange(V) * blocks // V
    Z = np.where(g[:, None] == g[None, :], within, between).astype(float)
    np.fill_diagonal(Z, 0.0)
    return Z


def default_lambda(V: int, K: int) -> np.ndarray:
    """Magnitudes V * linspace(1.8, 1.2, K); every third axis is negative."""
    mags = V * np.linspace(1.8, 1.2, K) if K > 1 else np.array([1.8 * V])
    signs = np.where(np.arange(K) % 3 == 2, -1.0, 1.0)
    return mags * signs


def perturb_z(Z0, frac: float, rng) -> np.ndarray:
    """Shuffle ceil(frac * L) randomly chosen lower-triangle entries among themselves."""
    z = vectorize_lower(Z0).copy()
    m = math.ceil(frac * z.size)
    if m > 1:
        pos = rng.choice(z.size, size=m, replace=False)
        z[pos] = z[rng.permutation(pos)]
    return devectorize(z, Z0.shape[0])


@dataclass
class SimulationSpec:
    V: int = 30
    n: int = 100
    K: int = 3
    seed: int = 0
    within: float = 1.5
    between: float = -1.5
    blocks: int = 2
    lam0: list | None = None
    perturb: float = 0.1

    def __post_init__(self):
        if self.V < 2 or self.n < 1 or not 1 <= self.K < self.V:
            raise ValueError("need V >= 2, n >= 1 and 1 <= K < V")
        if self.lam0 is None:
            self.lam0 = default_lambda(self.V, self.K).tolist()
        if len(self.lam0) != self.K:
            raise ValueError(f"lam0 has {len(self.lam0)} entries, K={self.K}")
        if not 0.0 <= self.perturb <= 1.0:
            raise ValueError("perturb must lie in [0, 1]")

    @classmethod
    def from_dict(cls, cfg: dict) -> "SimulationSpec":
        known = set(cls.__dataclass_fields__)
        extra = set(cfg) - known
        if extra:
            raise ValueError(f"unknown simulation keys: {sorted(extra)}")
        return cls(**cfg)

    @classmethod
    def from_file(cls, path) -> "SimulationSpec":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lam0"] = [float(x) for x in self.lam0]
        return d

    def base_logits(self) -> np.ndarray:
        return block_logits(self.V, self.within, self.between, self.blocks)

    def deviations(self, n: int, rng) -> tuple[np.ndarray, np.ndarray]:
        """(Q, D) for ``n`` networks with Q_i uniform on the Stiefel manifold."""
        lam = np.asarray(self.lam0, dtype=float)
        Q = np.stack([random_stiefel(self.V, self.K, rng) for _ in range(n)])
        D = np.einsum("ivk,k,iuk->ivu", Q, lam, Q)
        return Q, D


@dataclass
class GroundTruth:
    Z: np.ndarray
    Q: np.ndarray
    lam: np.ndarray
    D: np.ndarray = field(repr=False)


def simulate(spec: SimulationSpec) -> tuple[NetworkStack, GroundTruth]:
    """Stack drawn from ``spec`` (Z0 perturbed by ``spec.perturb``) plus its ground truth."""
    ss = np.random.SeedSequence(spec.seed)
    s_truth, s_sample = ss.spawn(2)
    rng = np.random.default_rng(s_truth)
    Z = perturb_z(spec.base_logits(), spec.perturb, rng)
    Q, D = spec.deviations(spec.n, rng)
    stack = sample_mgraf(Z, D, s_sample)
    return stack, GroundTruth(Z, Q, np.asarray(spec.lam0, dtype=float), D)


def save_truth(path, truth: GroundTruth, spec: SimulationSpec | None = None) -> None:
    """``.npz`` ground-truth archive with a JSON header carrying the simulation settings."""
    meta = {"format": "mgraf-truth", "version": 1, "spec": None if spec is None else spec.to_dict()}
    buf = io.BytesIO()
    np.savez(buf, Z=truth.Z, Q=truth.Q, lam=truth.lam, meta=np.array(json.dumps(meta)))
    Path(path).write_bytes(buf.getvalue())


def load_truth(path) -> tuple[GroundTruth, dict]:
    with np.load(path, allow_pickle=False) as f:
        meta = json.loads(str(f["meta"]))
        Q, lam = f["Q"], f["lam"]
        D = np.einsum("ivk,k,iuk->ivu", Q, lam, Q)
        return GroundTruth(f["Z"], Q, lam, D), meta


# --------------------------------------------------------------------------- recovery protocol

@dataclass
class RecoveryCell:
    n: int
    rep: int
    z_diff: np.ndarray
    d_diff: np.ndarray
    converged: bool
    iterations: int
    error: str | None = None


@dataclass
class RecoveryReport:
    n_grid: list
    repetitions: int
    cells: list

    def _pool(self, n, attr):
        parts = [getattr(c, attr) for c in self.cells if c.n == n and c.error is None]
        return np.concatenate(parts) if parts else np.array([])

    def summary(self) -> list[dict]:
        out = []
        for n in self.n_grid:
            z = self._pool(n, "z_diff")
            d = self._pool(n, "d_diff")
            out.append({
                "n": n,
                "median_abs_z": float(np.median(np.abs(z))) if z.size else float("nan"),
                "median_z": float(np.median(z)) if z.size else float("nan"),
                "median_abs_d": float(np.median(np.abs(d))) if d.size else float("nan"),
                "median_d": float(np.median(d)) if d.size else float("nan"),
                "iqr_d": float(np.subtract(*np.percentile(d, [75, 25]))) if d.size else float("nan"),
                "failed": sum(1 for c in self.cells if c.n == n and c.error is not None),
                "unconverged": sum(1 for c in self.cells if c.n == n and not c.converged),
            })
        return out


def recovery_experiment(spec: SimulationSpec, n_grid=(50, 100, 200, 400, 800), repetitions: int = 50,
                        perturb: float | None = None, n_track: int = 20, gamma: float = 100.0,
                        epsilon: float = DEFAULT_EPSILON, max_iter: int = DEFAULT_MAX_ITER,
                        seed=None, progress=None) -> RecoveryReport:
    """Fit stacks of growing size drawn from perturbed copies of the ground truth.

    For every ``(n, rep)`` cell: shuffle a ``perturb`` fraction of Z0's
    entries, draw ``n`` deviations and a stack, fit at the true K, and record
    ``vec(Z_hat) - vec(Z0)`` together with ``vec(D_hat_i) - vec(D_i0)`` for
    ``n_track`` randomly chosen networks.
    """
    perturb = spec.perturb if perturb is None else perturb
    seed = spec.seed if seed is None else seed
    Z_base = spec.base_logits()
    cells = []
    cell_seeds = np.random.SeedSequence(seed).spawn(len(n_grid) * repetitions)
    for gi, n in enumerate(n_grid):
        for rep in range(repetitions):
            s_truth, s_sample = cell_seeds[gi * repetitions + rep].spawn(2)
            rng = np.random.default_rng(s_truth)
            Z0 = perturb_z(Z_base, perturb, rng)
            _, D0 = spec.deviations(n, rng)
            track = np.sort(rng.choice(n, size=min(n_track, n), replace=False))
            stack = sample_mgraf(Z0, D0, s_sample)
            try:
                model, report = cise_fit(stack, spec.K, gamma=gamma, epsilon=epsilon, max_iter=max_iter)
            except (ValueError, RuntimeError, np.linalg.LinAlgError) as exc:
                cells.append(RecoveryCell(n, rep, np.array([]), np.array([]), False, 0, str(exc)))
                continue
            z_diff = vectorize_lower(model.Z) - vectorize_lower(Z0)
            d_diff = np.concatenate([
                vectorize_lower(model.deviance(i)) - vectorize_lower(D0[i]) for i in track
            ])
            cells.append(RecoveryCell(n, rep, z_diff, d_diff, report.converged, report.iterations))
            if progress is not None:
                progress(n, rep)
    return RecoveryReport(list(n_grid), repetitions, cells)


# --------------------------------------------------------------------------- scan-rescan

def sample_scan_rescan(V: int = 40, subjects: int = 30, K: int = 5, spread: float = 1.0,
                       scan_noise: float = 0.0, scans: int = 2, lam0=None, Z=None,
                       seed=None) -> tuple[NetworkStack, np.ndarray]:
    """Paired scans: one deviation per subject, ``scans`` independent draws each.

    ``spread`` scales every subject's deviation (0 makes all subjects alike);
    ``scan_noise`` adds iid N(0, scan_noise^2) logit jitter per scan and pair
    on top of the Bernoulli noise. Returns the stack (ids ``s001``... repeated
    per scan) and the true (subjects, V, V) deviations.
    """
    if spread < 0 or scan_noise < 0:
        raise ValueError("spread and scan_noise must be non-negative")
    s_truth, s_sample = np.random.SeedSequence(seed).spawn(2)
    rng = np.random.default_rng(s_truth)
    Z = block_logits(V) if Z is None else np.asarray(Z, dtype=float)
    lam = default_lambda(V, K) if lam0 is None else np.asarray(lam0, dtype=float)
    Q = np.stack([random_stiefel(V, lam.size, rng) for _ in range(subjects)])
    D = spread * np.einsum("ivk,k,iuk->ivu", Q, lam, Q)
    logits = np.repeat(D, scans, axis=0) + Z[None]
    if scan_noise > 0:
        L = n_pairs(V)
        jitter = scan_noise * rng.standard_normal((logits.shape[0], L))
        logits = logits + devectorize(jitter, V)
    ids = tuple(f"s{s + 1:03d}" for s in range(subjects) for _ in range(scans))
    rngs = spawn_rngs(s_sample, logits.shape[0])
    mats = [sample_adjacency(sigmoid(x), r) for x, r in zip(logits, rngs)]
    return NetworkStack(np.stack(mats), ids=ids), D
