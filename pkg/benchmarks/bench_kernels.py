"""Compare the numba and pure-numpy kernel backends.

Each kernel is called once to trigger compilation, checked for agreement
between backends, then timed with ``timeit`` (best of ``--repeat``). With
``--end-to-end`` a few CISE sweeps are also timed in two subprocesses, one
with ``MGRAF_DISABLE_NUMBA=1``.

    python3 benchmarks/bench_kernels.py --n 200 --V 68 --K 5
"""
import argparse
import json
import os
import subprocess
import sys
import timeit

import numpy as np

from mgraf import _kernels
from mgraf.core import lowtri_outer
from mgraf.simulate import random_stiefel, sample_er

SWEEP_SNIPPET = """
import json, time
from mgraf import _kernels
from mgraf.core import CiseRunner
from mgraf.simulate import sample_er
r = CiseRunner(sample_er({V}, 0.5, {n}, 0), {K})
r.sweep()
t = time.perf_counter()
for _ in range({sweeps}):
    r.sweep()
print(json.dumps({{"backend": _kernels.BACKEND_NAME, "sweep": (time.perf_counter() - t) / {sweeps}}}))
"""


def make_inputs(n, V, K, seed=0):
    rng = np.random.default_rng(seed)
    stack = sample_er(V, 0.3, n, seed)
    Y = stack.vectors()
    mask = np.ones_like(Y)
    Q = np.stack([random_stiefel(V, K, rng) for _ in range(n)])
    M = np.ascontiguousarray(lowtri_outer(Q))
    L = Y.shape[1]
    z = rng.normal(size=L)
    lam = rng.normal(scale=5.0, size=(n, K))
    w = rng.uniform(0.05, 0.25, size=(n, L))
    v = rng.normal(size=(n, K))
    u = rng.normal(size=L)
    return {
        "logistic_pass": (Y, mask, z, M, lam),
        "loglik_only": (Y, mask, z, M, lam),
        "coupling_matvec": (w, M, v),
        "coupling_rmatvec": (w, M, u),
        "network_hessian_blocks": (w, M),
        "pair_distances": (np.ascontiguousarray(Q), lam),
        "bfs_path_stats": (np.ascontiguousarray(stack.adjacency[0]),),
    }


def _agree(a, b):
    if isinstance(a, tuple):
        return all(_agree(x, y) for x, y in zip(a, b))
    return np.allclose(a, b, rtol=1e-9, atol=1e-9)


def bench_kernels(n, V, K, repeat, number):
    if _kernels.numba_backend is None:
        raise SystemExit("numba is not importable; nothing to compare")
    inputs = make_inputs(n, V, K)
    rows = []
    for name, args in inputs.items():
        f_np = getattr(_kernels.numpy_backend, name)
        f_nb = getattr(_kernels.numba_backend, name)
        same = _agree(f_np(*args), f_nb(*args))  # also compiles the numba version
        t_np = min(timeit.repeat(lambda: f_np(*args), repeat=repeat, number=number)) / number
        t_nb = min(timeit.repeat(lambda: f_nb(*args), repeat=repeat, number=number)) / number
        rows.append({"kernel": name, "numpy_s": t_np, "numba_s": t_nb, "speedup": t_np / t_nb, "agree": bool(same)})
    return rows


def bench_sweeps(n, V, K, sweeps):
    out = []
    for disable in ("1", "0"):
        env = dict(os.environ, MGRAF_DISABLE_NUMBA=disable)
        code = SWEEP_SNIPPET.format(n=n, V=V, K=K, sweeps=sweeps)
        res = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
        out.append(json.loads(res.stdout.strip().splitlines()[-1]))
    return out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=200)
    ap.add_argument("--V", type=int, default=68)
    ap.add_argument("--K", type=int, default=5)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--number", type=int, default=3)
    ap.add_argument("--end-to-end", action="store_true")
    ap.add_argument("--sweeps", type=int, default=3)
    ap.add_argument("--json", action="store_true", help="print machine-readable results")
    args = ap.parse_args(argv)

    rows = bench_kernels(args.n, args.V, args.K, args.repeat, args.number)
    sweeps = bench_sweeps(args.n, args.V, args.K, args.sweeps) if args.end_to_end else []
    if args.json:
        print(json.dumps({"kernels": rows, "sweeps": sweeps}, indent=2))
        return
    print(f"n={args.n} V={args.V} K={args.K}")
    print(f"{'kernel':<24}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>10}  agree")
    for r in rows:
        print(f"{r['kernel']:<24}{1e3 * r['numpy_s']:>12.3f}{1e3 * r['numba_s']:>12.3f}{r['speedup']:>10.2f}  {r['agree']}")
    for s in sweeps:
        print(f"full sweep ({s['backend']}): {s['sweep']:.3f} s")


if __name__ == "__main__":
    main()
