"""Command-line interface: ``python -m mgraf <command> ...``.

Every command writes into ``--out`` (default ``$MGRAF_OUTPUT_DIR`` or
``./mgraf-out``) and always includes ``manifest.json`` with the resolved
configuration, seeds and SHA-256 digests of the inputs. Outputs are staged in
a scratch directory and only moved into place when the command succeeds, so a
failed run leaves nothing behind. Errors print a JSON object on stdout and
exit with status 2 (invalid input) or 3 (non-convergence under ``--strict``).
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import os
import shutil
import sys
import tempfile
import time
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from . import _kernels as kern
from .baselines import baseline_distance, fit_separate
from .core import VARIANT_ALIASES, edge_prob_stack, fit_variant, save_model
from .gof import auc_rss, elbow_scan, predictive_topology_check
from .metrics import (
    edge_group_ttest,
    loocv_identification,
    pairwise_distance,
    repeated_kfold_classification,
)
from .netdata import NetworkFormatError, load_prob_stack, load_stack, save_stack
from .penlogit import DegenerateDesignError, FitContext, select_gamma_cv
from .perfbench import run_scaling
from .simulate import SimulationSpec, recovery_experiment, sample_scan_rescan, save_truth, simulate

log = logging.getLogger("mgraf")

EXIT_INPUT = 2
EXIT_STRICT = 3
METHODS = ("mgraf1", "mgraf2", "joint", "separate")


class UsageError(Exception):
    """Invalid configuration or input; reported as exit status 2."""


class ConvergenceError(Exception):
    """Raised under --strict when a fit did not converge."""


# --------------------------------------------------------------------------- parsing helpers

def parse_gamma(text):
    """``"1.5"`` -> 1.5; ``"cv:0.1,1,10"`` -> [0.1, 1.0, 10.0]."""
    text = str(text).strip()
    if text.startswith("cv:"):
        grid = [float(x) for x in text[3:].split(",") if x.strip()]
        if not grid or any(g <= 0 for g in grid):
            raise UsageError(f"bad gamma grid {text!r}")
        return grid
    try:
        g = float(text)
    except ValueError:
        raise UsageError(f"gamma must be a positive number or cv:<grid>, got {text!r}") from None
    if not g > 0:
        raise UsageError("gamma must be positive")
    return g


def parse_int_list(text) -> list[int]:
    """``"1..8"`` or ``"2,5,7,8"`` (also accepts an int or a list)."""
    if isinstance(text, int):
        return [text]
    if isinstance(text, (list, tuple)):
        return [int(x) for x in text]
    text = str(text).strip()
    try:
        if ".." in text:
            lo, hi = text.split("..")
            out = list(range(int(lo), int(hi) + 1))
        else:
            out = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"expected an integer list like 1..8 or 2,5,8, got {text!r}") from None
    if not out:
        raise UsageError(f"empty integer list {text!r}")
    return out


def sha256(path) -> str:
    h = hashlib.sha256()
    p = Path(path)
    files = sorted(q for q in p.iterdir() if q.is_file()) if p.is_dir() else [p]
    for f in files:
        h.update(f.name.encode())
        h.update(f.read_bytes())
    return h.hexdigest()


def _variant(name: str) -> str:
    v = VARIANT_ALIASES.get(name)
    if v is None:
        raise UsageError(f"unknown variant {name!r}")
    return v


def _need_K(args) -> int:
    if args.K is None:
        raise UsageError("--K is required")
    return args.K


def _load_input(args, need_labels=False):
    if not args.input:
        raise UsageError("--input is required")
    if not Path(args.input).exists():
        raise UsageError(f"input {args.input} does not exist")
    if args.labels and not Path(args.labels).exists():
        raise UsageError(f"labels file {args.labels} does not exist")
    if need_labels and not args.labels:
        raise UsageError("--labels is required for this command")
    return load_stack(args.input, args.format, labels=args.labels)


def _resolve_gamma(stack, args, K, variant, seed, manifest):
    gamma = parse_gamma(args.gamma)
    if isinstance(gamma, list):
        ctx = FitContext(K=K, variant=variant, epsilon=args.epsilon, max_iter=args.max_iter)
        chosen, scores = select_gamma_cv(stack, ctx, gamma, folds=args.cv_folds, seed=seed,
                                         return_scores=True)
        manifest.setdefault("gamma_cv", []).append(
            {"K": K, "variant": variant, "grid": gamma, "scores": scores, "chosen": chosen})
        log.info("cross-validated gamma for K=%d: %g", K, chosen)
        return chosen
    return gamma


def _fit(stack, args, K, variant, seed, manifest):
    gamma = _resolve_gamma(stack, args, K, variant, seed, manifest)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        model, report = fit_variant(stack, K, gamma=gamma, variant=variant, epsilon=args.epsilon,
                                    max_iter=args.max_iter,
                                    progress=lambda it, ll: log.info("K=%d sweep %d loglik %.6g", K, it, ll))
    ok = report.converged and report.logistic_ok
    manifest.setdefault("fits", []).append(
        {"K": K, "variant": variant, "gamma": gamma, "converged": report.converged,
         "iterations": report.iterations, "logistic_converged": report.logistic_ok})
    if not ok:
        msg = f"fit at K={K} ({variant}) did not converge within {args.max_iter} sweeps"
        if args.strict:
            raise ConvergenceError(msg)
        log.warning(msg)
    return model, report


def _write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, default=_json_default) + "\n")


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not serializable: {type(o).__name__}")


def _sub_seeds(seed, k):
    return [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(k)]


# --------------------------------------------------------------------------- commands

def cmd_fit(args, out: Path, manifest: dict):
    _need_K(args)
    stack = _load_input(args)
    variant = _variant(args.variant)
    model, report = _fit(stack, args, args.K, variant, args.seed, manifest)
    save_model(out / "model.npz", model, report)
    _write_json(out / "report.json", report.to_dict())
    with open(out / "deviations.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        lam = model.lam_matrix()
        w.writerow(["network", "id", "label", *(f"lambda_{k + 1}" for k in range(model.K)), "frobenius"])
        for i in range(model.n):
            w.writerow([i + 1, "" if stack.ids is None else stack.ids[i],
                        "" if stack.labels is None else stack.labels[i],
                        *(repr(float(x)) for x in lam[i]), repr(float(np.sqrt(np.sum(lam[i] ** 2))))])
    return {"loglik": report.loglik_trace[-1], "iterations": report.iterations,
            "converged": report.converged}


def _spec_from_args(args, K=None) -> SimulationSpec:
    cfg = {k: getattr(args, k) for k in ("V", "n", "seed") if getattr(args, k, None) is not None}
    cfg["K"] = args.K if K is None else K
    if args.lam0:
        cfg["lam0"] = [float(x) for x in str(args.lam0).split(",")]
    if args.perturb is not None:
        cfg["perturb"] = args.perturb
    try:
        return SimulationSpec(**cfg)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None


def cmd_simulate(args, out: Path, manifest: dict):
    spec = _spec_from_args(args)
    manifest["spec"] = spec.to_dict()
    if args.mode == "stack":
        stack, truth = simulate(spec)
        save_stack(stack, out / "stack.txt")
        save_truth(out / "truth.npz", truth, spec)
        return {"n": stack.n, "V": stack.V}
    if args.mode == "scan-rescan":
        stack, _ = sample_scan_rescan(V=spec.V, subjects=args.subjects, K=spec.K, spread=args.spread,
                                      scan_noise=args.scan_noise, lam0=spec.lam0, seed=spec.seed)
        save_stack(stack, out / "stack.txt", labels_path=out / "labels.csv")
        return {"n": stack.n, "V": stack.V, "subjects": args.subjects}
    grid = parse_int_list(args.n_grid)
    gamma = parse_gamma(args.gamma)
    if isinstance(gamma, list):
        raise UsageError("recovery mode needs a fixed gamma")
    rep = recovery_experiment(spec, grid, args.reps, n_track=args.track, gamma=gamma,
                              epsilon=args.epsilon, max_iter=args.max_iter, seed=spec.seed,
                              progress=lambda n, r: log.info("recovery n=%d rep=%d", n, r))
    summary = rep.summary()
    _write_json(out / "recovery.json", {"summary": summary, "reps": args.reps, "gamma": gamma})
    with open(out / "recovery.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "rep", "kind", "q025", "q25", "median", "q75", "q975", "converged"])
        for c in rep.cells:
            for kind, x in (("Z", c.z_diff), ("D", c.d_diff)):
                qs = np.percentile(x, [2.5, 25, 50, 75, 97.5]) if x.size else [float("nan")] * 5
                w.writerow([c.n, c.rep, kind, *(repr(float(q)) for q in qs), int(c.converged)])
    return {"summary": summary}


def cmd_elbow(args, out: Path, manifest: dict):
    grid = parse_int_list(args.K)
    gamma = parse_gamma(args.gamma)
    if isinstance(gamma, list):
        raise UsageError("elbow needs a fixed gamma")
    if args.input:
        data = _load_input(args)
        reps = 1
    else:
        data = _spec_from_args(args, K=args.true_K)
        manifest["spec"] = data.to_dict()
        reps = args.reps
    scan = elbow_scan(data, grid, gamma=gamma, epsilon=args.epsilon, repetitions=reps, seed=args.seed,
                      variant=_variant(args.variant), max_iter=args.max_iter,
                      progress=lambda r, K: log.info("elbow rep=%d K=%d", r, K))
    scan.to_csv(out / "elbow.csv")
    _write_json(out / "elbow.json", scan.to_dict())
    return {"suggested_K": scan.suggestion()}


def _distances(stack, method, K, args, seed, manifest):
    if method == "separate":
        return baseline_distance(fit_separate(stack, K))
    model, _ = _fit(stack, args, K, _variant(method), seed, manifest)
    return pairwise_distance(model)


def cmd_classify(args, out: Path, manifest: dict):
    _need_K(args)
    stack = _load_input(args, need_labels=True)
    if stack.labels is None or any(lab in ("", None) for lab in stack.labels):
        raise UsageError("every network needs a class label")
    s_fit, s_cv = _sub_seeds(args.seed, 2)
    d = _distances(stack, args.method, args.K, args, s_fit, manifest)
    try:
        mean, sd = repeated_kfold_classification(d, stack.labels, args.folds, args.repeats, s_cv)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    res = {"method": args.method, "K": args.K, "folds": args.folds, "repeats": args.repeats,
           "accuracy_mean": mean, "accuracy_sd": sd}
    _write_json(out / "classify.json", res)
    return res


def cmd_identify(args, out: Path, manifest: dict):
    if args.input:
        stack = _load_input(args, need_labels=True)
    else:
        stack, _ = sample_scan_rescan(V=args.V or 40, subjects=args.subjects, K=args.true_K,
                                      spread=args.spread, scan_noise=args.scan_noise, seed=args.seed)
        manifest["synthetic"] = {"V": stack.V, "subjects": args.subjects, "true_K": args.true_K,
                                 "spread": args.spread, "scan_noise": args.scan_noise}
    if stack.ids is None:
        raise UsageError("identification needs subject ids in the labels file")
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    bad = [m for m in methods if m not in METHODS]
    if bad:
        raise UsageError(f"unknown methods {bad}; choose from {METHODS}")
    Ks = parse_int_list(args.K)
    table = {}
    for m in methods:
        for K in Ks:
            try:
                table[(m, K)] = loocv_identification(_distances(stack, m, K, args, args.seed, manifest),
                                                     stack.ids)
            except ValueError as exc:
                raise UsageError(str(exc)) from None
    with open(out / "identify.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["K", *methods])
        for K in Ks:
            w.writerow([K, *(repr(table[(m, K)]) for m in methods)])
    res = {"methods": methods, "K": Ks, "accuracy": {m: [table[(m, K)] for K in Ks] for m in methods}}
    _write_json(out / "identify.json", res)
    return res


def cmd_gof(args, out: Path, manifest: dict):
    stack = _load_input(args)
    if args.probs:
        P = load_prob_stack(args.probs)
        manifest["inputs"]["probs"] = sha256(args.probs)
        source = "external"
    else:
        model, _ = _fit(stack, args, args.K, _variant(args.variant), args.seed, manifest)
        P = edge_prob_stack(model)
        source = args.variant
    if P.shape != stack.adjacency.shape:
        raise UsageError(f"probabilities have shape {P.shape}, stack {stack.adjacency.shape}")
    if np.any((P < 0) | (P > 1)):
        raise UsageError("probabilities must lie in [0, 1]")
    ar = auc_rss(stack, P)
    chk = predictive_topology_check(P, stack, replicates=args.replicates, seed=_sub_seeds(args.seed, 1)[0])
    chk.to_csv(out / "topology.csv")
    res = {"source": source, **ar.summary(),
           "coverage": {m: chk.coverage(m) for m in ("density", "apl", "transitivity", "degree_mean")}}
    _write_json(out / "gof.json", {**res, "auc": ar.auc, "rss": ar.rss})
    return res


def cmd_edgetest(args, out: Path, manifest: dict):
    _need_K(args)
    stack = _load_input(args, need_labels=True)
    if stack.labels is None:
        raise UsageError("edge tests need group labels")
    model, _ = _fit(stack, args, args.K, _variant(args.variant), args.seed, manifest)
    D = np.stack([model.deviance(i) for i in range(model.n)])
    try:
        rep = edge_group_ttest(D, np.asarray(stack.labels), q=args.fdr)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rep.to_csv(out / "edgetest.csv")
    rep.to_csv(out / "rejected.csv", only_rejected=True)
    res = {"q": args.fdr, "tests": int(rep.p.size), "rejected": int(rep.reject.sum())}
    _write_json(out / "edgetest.json", res)
    return res


def cmd_baseline(args, out: Path, manifest: dict):
    from .netdata import save_prob_stack

    _need_K(args)
    stack = _load_input(args)
    if not 0 <= args.K <= stack.V:
        raise UsageError(f"K must lie in [0, {stack.V}]")
    fit = fit_separate(stack, args.K)
    save_prob_stack(fit.probs, out / "probs.txt")
    save_prob_stack(fit.clamped(), out / "probs_clamped.txt")
    np.savetxt(out / "distances.csv", baseline_distance(fit), delimiter=",", fmt="%.17g")
    # RSS follows the definition on raw estimates; the clamped copy is what a likelihood would see
    res = {"K": args.K, "unclamped": auc_rss(stack, fit.probs).summary(),
           "clamped": auc_rss(stack, fit.clamped()).summary()}
    _write_json(out / "baseline.json", res)
    return res


def cmd_scaling(args, out: Path, manifest: dict):
    grid = None
    if args.grid:
        try:
            grid = json.loads(Path(args.grid).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read grid {args.grid}: {exc}") from None
        manifest["inputs"]["grid"] = sha256(args.grid)
    rep = run_scaling(grid, repetitions=args.reps, seed=args.seed, timeout=args.timeout,
                      progress=lambda c: log.info("scaling %s n=%d V=%d K=%d: %.4fs",
                                                  c.axis, c.n, c.V, c.K, c.mean_time))
    rep.write(out)
    return {"slopes": rep.slopes, "backend": rep.backend}


COMMANDS = {
    "fit": cmd_fit, "simulate": cmd_simulate, "elbow": cmd_elbow, "classify": cmd_classify,
    "identify": cmd_identify, "gof": cmd_gof, "edgetest": cmd_edgetest, "baseline": cmd_baseline,
    "scaling": cmd_scaling,
}


# --------------------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with the same keys as the flags (flags win)")
    common.add_argument("--out", help="output directory (default $MGRAF_OUTPUT_DIR or ./mgraf-out)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=None, help="cap on numba worker threads")
    common.add_argument("--strict", action="store_true", help="treat non-convergence as an error")
    common.add_argument("-v", "--verbose", action="store_true", help="progress on stderr")

    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("--input", help="stack file or directory")
    data.add_argument("--format", choices=("matrix", "edgelist"), default="matrix")
    data.add_argument("--labels", help="CSV with columns id,label")

    fitting = argparse.ArgumentParser(add_help=False)
    fitting.add_argument("--gamma", default="1", help="penalty factor, or cv:<g1,g2,...>")
    fitting.add_argument("--epsilon", type=float, default=0.01)
    fitting.add_argument("--max-iter", dest="max_iter", type=int, default=50)
    fitting.add_argument("--variant", default="full", help="full | shared_lambda | shared_q (or mgraf1/mgraf2/joint)")
    fitting.add_argument("--cv-folds", dest="cv_folds", type=int, default=5)

    sim = argparse.ArgumentParser(add_help=False)
    sim.add_argument("--V", type=int, default=30)
    sim.add_argument("--n", type=int, default=100)
    sim.add_argument("--lam0", help="comma-separated true lambdas")
    sim.add_argument("--perturb", type=float, default=None)

    p = argparse.ArgumentParser(prog="mgraf", description="Multiple-network factorization tools")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("fit", parents=[common, data, fitting], help="fit a model to a stack")
    s.add_argument("--K", type=int, default=None, help="rank (required)")

    s = sub.add_parser("simulate", parents=[common, sim, fitting], help="draw synthetic stacks")
    s.add_argument("--mode", choices=("stack", "recovery", "scan-rescan"), default="stack")
    s.add_argument("--K", type=int, default=3)
    s.add_argument("--n-grid", dest="n_grid", default="50,100,200,400,800")
    s.add_argument("--reps", type=int, default=50)
    s.add_argument("--track", type=int, default=20, help="networks per cell whose D errors are kept")
    s.add_argument("--subjects", type=int, default=30)
    s.add_argument("--spread", type=float, default=1.0)
    s.add_argument("--scan-noise", dest="scan_noise", type=float, default=0.0)
    s.set_defaults(gamma="100")

    s = sub.add_parser("elbow", parents=[common, data, fitting, sim], help="log-likelihood versus K")
    s.add_argument("--K", default="1..8", help="grid such as 1..8 or 1,2,4")
    s.add_argument("--reps", type=int, default=10)
    s.add_argument("--true-K", dest="true_K", type=int, default=3, help="rank of simulated data")
    s.set_defaults(gamma="100")

    s = sub.add_parser("classify", parents=[common, data, fitting], help="repeated k-fold classification")
    s.add_argument("--K", type=int, default=None, help="rank (required)")
    s.add_argument("--method", choices=METHODS, default="mgraf1")
    s.add_argument("--folds", type=int, default=10)
    s.add_argument("--repeats", type=int, default=30)

    s = sub.add_parser("identify", parents=[common, data, fitting], help="scan-rescan identification")
    s.add_argument("--K", default="2,5,7,8")
    s.add_argument("--methods", default="mgraf1,mgraf2,separate")
    s.add_argument("--V", type=int, default=None, help="synthetic data: node count")
    s.add_argument("--subjects", type=int, default=30)
    s.add_argument("--true-K", dest="true_K", type=int, default=8)
    s.add_argument("--spread", type=float, default=0.3)
    s.add_argument("--scan-noise", dest="scan_noise", type=float, default=0.0)

    s = sub.add_parser("gof", parents=[common, data, fitting], help="AUC/RSS and topology checks")
    s.add_argument("--K", type=int, default=3)
    s.add_argument("--probs", help="externally computed probability stack (matrix layout)")
    s.add_argument("--replicates", type=int, default=100)

    s = sub.add_parser("edgetest", parents=[common, data, fitting], help="per-edge group t-tests")
    s.add_argument("--K", type=int, default=None, help="rank (required)")
    s.add_argument("--fdr", type=float, default=0.15)

    s = sub.add_parser("baseline", parents=[common, data], help="separate factorization")
    s.add_argument("--K", type=int, default=None, help="rank (required)")

    s = sub.add_parser("scaling", parents=[common], help="per-sweep runtime scaling")
    s.add_argument("--grid", help="JSON grid: {base: {n, V, K}, n: [...], V: [...], K: [...]}")
    s.add_argument("--reps", type=int, default=10)
    s.add_argument("--timeout", type=float, default=None, help="seconds per cell")
    return p


def _apply_config(parser, argv):
    """Re-parse with config-file values as defaults so explicit flags take precedence."""
    args = parser.parse_args(argv)
    if not args.config:
        return args, {}
    try:
        cfg = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {args.config}: {exc}") from None
    if not isinstance(cfg, dict):
        raise UsageError("config must be a JSON object")
    cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
    unknown = sorted(set(cfg) - set(vars(args)))
    if unknown:
        raise UsageError(f"unknown config keys: {unknown}")
    subparser = parser._subparsers._group_actions[0].choices[args.command]
    subparser.set_defaults(**cfg)
    return parser.parse_args(argv), cfg


def _output_dir(args) -> Path:
    return Path(args.out or os.environ.get("MGRAF_OUTPUT_DIR") or "mgraf-out")


def _fail(kind: str, message: str, code: int) -> int:
    print(json.dumps({"error": kind, "message": message, "exit_code": code}))
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args, cfg = _apply_config(parser, argv)
    except UsageError as exc:
        return _fail("usage", str(exc), EXIT_INPUT)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(message)s")
    if args.threads is not None and kern.numba_backend is not None:
        import numba

        numba.set_num_threads(max(1, min(args.threads, numba.config.NUMBA_NUM_THREADS)))
    out = _output_dir(args)
    resolved = {k: v for k, v in vars(args).items() if k not in ("config",)}
    manifest = {
        "command": args.command,
        "argv": list(sys.argv[1:] if argv is None else argv),
        "config_file": args.config,
        "config_file_values": cfg,
        "resolved": resolved,
        "seed": args.seed,
        "version": __version__,
        "backend": kern.BACKEND_NAME,
        "inputs": {},
    }
    for key in ("input", "labels"):
        path = getattr(args, key, None)
        if path and Path(path).exists():
            manifest["inputs"][key] = sha256(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    stage = Path(tempfile.mkdtemp(prefix=".mgraf-stage-", dir=out.parent))
    t0 = time.perf_counter()
    try:
        result = COMMANDS[args.command](args, stage, manifest)
    except (UsageError, NetworkFormatError, DegenerateDesignError, ValueError) as exc:
        shutil.rmtree(stage, ignore_errors=True)
        return _fail(type(exc).__name__, str(exc), EXIT_INPUT)
    except ConvergenceError as exc:
        shutil.rmtree(stage, ignore_errors=True)
        return _fail("ConvergenceError", str(exc), EXIT_STRICT)
    except BaseException:
        shutil.rmtree(stage, ignore_errors=True)
        raise
    manifest["elapsed_seconds"] = time.perf_counter() - t0
    manifest["result"] = result
    _write_json(stage / "manifest.json", manifest)
    out.mkdir(parents=True, exist_ok=True)
    for f in stage.iterdir():
        os.replace(f, out / f.name)
    stage.rmdir()
    print(json.dumps({"status": "ok", "out": str(out), **{"result": result}}, default=_json_default))
    return 0


if __name__ == "__main__":
    sys.exit(main())
