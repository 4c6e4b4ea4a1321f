"""Per-sweep runtime of the block-coordinate fitter over grids of (n, V, K).

Each cell draws an Erdos-Renyi(0.5) stack, runs one untimed warm-up sweep and
then times ``sweeps`` further sweeps (logistic step plus basis update, no
I/O) with ``time.perf_counter``. Slopes are least-squares fits of
log(time) on log(axis value) along each varied axis.
"""
from __future__ import annotations

import csv
import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels as kern
from .core import CiseRunner
from .simulate import sample_er

DEFAULT_GRID = {
    "base": {"n": 100, "V": 60, "K": 4},
    "n": [50, 100, 200, 400],
    "V": [34, 48, 68, 96, 136],
    "K": [2, 4, 8, 16],
}


@dataclass
class ScalingCell:
    axis: str
    n: int
    V: int
    K: int
    repetitions: int
    mean_time: float
    times: list
    error: str | None = None


@dataclass
class ScalingReport:
    cells: list
    slopes: dict
    backend: str = kern.BACKEND_NAME
    grid: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"backend": self.backend, "grid": self.grid, "slopes": self.slopes,
                "cells": [asdict(c) for c in self.cells]}

    def write(self, outdir) -> None:
        outdir = Path(outdir)
        (outdir / "scaling.json").write_text(json.dumps(self.to_dict(), indent=2))
        with open(outdir / "scaling.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["axis", "n", "V", "K", "repetitions", "mean_time"])
            for c in self.cells:
                w.writerow([c.axis, c.n, c.V, c.K, c.repetitions, repr(c.mean_time)])


def time_cell(n: int, V: int, K: int, repetitions: int = 10, sweeps: int = 1, gamma: float = 1.0,
              seed=None, timeout: float | None = None) -> list[float]:
    """Mean per-sweep seconds for each repetition (fresh ER stack per repetition)."""
    times = []
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    seeds = ss.spawn(repetitions)
    start = time.perf_counter()
    for s in seeds:
        runner = CiseRunner(sample_er(V, 0.5, n, s), K, gamma=gamma)
        runner.sweep()  # warm-up: JIT compilation and the cold Newton start
        t0 = time.perf_counter()
        for _ in range(sweeps):
            runner.sweep()
        times.append((time.perf_counter() - t0) / sweeps)
        if timeout is not None and time.perf_counter() - start > timeout:
            raise TimeoutError(f"cell (n={n}, V={V}, K={K}) exceeded {timeout}s")
    return times


def loglog_slope(x, y) -> float:
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    ok = np.isfinite(y) & (y > 0)
    if ok.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log(x[ok]), np.log(y[ok]), 1)[0])


def run_scaling(grid: dict | None = None, repetitions: int = 10, seed=0, sweeps: int = 1,
                gamma: float = 1.0, timeout: float | None = None, progress=None) -> ScalingReport:
    """Vary one axis at a time around ``grid['base']`` and fit log-log slopes."""
    grid = {**DEFAULT_GRID, **(grid or {})}
    base = dict(DEFAULT_GRID["base"], **grid.get("base", {}))
    cells = []
    slopes = {}
    ss = np.random.SeedSequence(seed)
    for axis in ("n", "V", "K"):
        values = grid.get(axis)
        if not values:
            continue
        axis_seeds = ss.spawn(len(values))
        means = []
        for val, s in zip(values, axis_seeds):
            dims = dict(base, **{axis: int(val)})
            try:
                times = time_cell(dims["n"], dims["V"], dims["K"], repetitions, sweeps, gamma, s, timeout)
                cell = ScalingCell(axis, dims["n"], dims["V"], dims["K"], repetitions,
                                   float(np.mean(times)), times)
            except TimeoutError as exc:
                cell = ScalingCell(axis, dims["n"], dims["V"], dims["K"], repetitions,
                                   float("nan"), [], str(exc))
            cells.append(cell)
            means.append(cell.mean_time)
            if progress is not None:
                progress(cell)
        slopes[axis] = loglog_slope(values, means)
    return ScalingReport(cells, slopes, kern.BACKEND_NAME, {"base": base, **{a: grid.get(a) for a in "nVK"}})
