import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from mgraf.cli import main, parse_gamma, parse_int_list
from mgraf.core import load_model
from mgraf.netdata import load_stack, write_labels


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr().out.strip().splitlines()
    return code, json.loads(out[-1]) if out else None


@pytest.fixture(scope="module")
def stack_file(tmp_path_factory):
    d = tmp_path_factory.mktemp("data")
    assert main(["simulate", "--V", "14", "--n", "12", "--K", "2", "--seed", "3", "--out", str(d)]) == 0
    groups = ["a"] * 6 + ["b"] * 6
    write_labels(d / "labels.csv", [f"n{i}" for i in range(12)], groups)
    return d


def test_parsers():
    assert parse_int_list("1..4") == [1, 2, 3, 4]
    assert parse_int_list("2,5,8") == [2, 5, 8]
    assert parse_gamma("100") == 100.0
    assert parse_gamma("cv:0.1,1,10") == [0.1, 1.0, 10.0]


def test_simulate_stack_outputs(stack_file):
    assert (stack_file / "stack.txt").exists() and (stack_file / "truth.npz").exists()
    m = json.loads((stack_file / "manifest.json").read_text())
    assert m["command"] == "simulate" and m["seed"] == 3 and m["spec"]["V"] == 14
    assert load_stack(stack_file / "stack.txt").adjacency.shape == (12, 14, 14)


def test_fit_happy_path(stack_file, tmp_path, capsys):
    out = tmp_path / "fit"
    code, msg = run(["fit", "--input", stack_file / "stack.txt", "--K", 2, "--gamma", 1, "--epsilon", 0.01,
                     "--variant", "full", "--out", out], capsys)
    assert code == 0 and msg["status"] == "ok"
    model, meta = load_model(out / "model.npz")
    assert model.K == 2 and meta["report"]["epsilon"] == 0.01
    report = json.loads((out / "report.json").read_text())
    assert len(report["loglik_trace"]) == report["iterations"] + 1
    man = json.loads((out / "manifest.json").read_text())
    assert len(man["inputs"]["input"]) == 64 and man["resolved"]["K"] == 2
    rows = list(csv.DictReader(open(out / "deviations.csv")))
    assert len(rows) == 12


def test_fit_is_reproducible(stack_file, tmp_path, capsys):
    for name in ("a", "b"):
        assert run(["fit", "--input", stack_file / "stack.txt", "--K", 2, "--out", tmp_path / name], capsys)[0] == 0
    a, _ = load_model(tmp_path / "a" / "model.npz")
    b, _ = load_model(tmp_path / "b" / "model.npz")
    assert np.array_equal(a.Z, b.Z) and np.array_equal(a.lam, b.lam)


def test_fit_cv_gamma_recorded(stack_file, tmp_path, capsys):
    out = tmp_path / "cv"
    code, _ = run(["fit", "--input", stack_file / "stack.txt", "--K", 2, "--gamma", "cv:0.1,1,10",
                   "--cv-folds", 3, "--out", out], capsys)
    assert code == 0
    man = json.loads((out / "manifest.json").read_text())
    cv = man["gamma_cv"][0]
    assert cv["grid"] == [0.1, 1.0, 10.0] and cv["chosen"] in cv["grid"]
    assert man["fits"][0]["gamma"] == cv["chosen"]


def test_missing_input_exit_2(tmp_path, capsys):
    out = tmp_path / "nothing"
    code, msg = run(["fit", "--input", tmp_path / "absent.txt", "--K", 2, "--out", out], capsys)
    assert code == 2 and msg["exit_code"] == 2
    assert not out.exists() or not any(out.iterdir())
    assert not any(p.name.startswith(".mgraf-stage") for p in tmp_path.iterdir())
    code, msg = run(["fit", "--K", 2, "--out", out], capsys)
    assert code == 2


def test_missing_k_exit_2(stack_file, tmp_path, capsys):
    code, msg = run(["fit", "--input", stack_file / "stack.txt", "--out", tmp_path / "x"], capsys)
    assert code == 2 and "K" in msg["message"]


def test_config_precedence(stack_file, tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"input": str(stack_file / "stack.txt"), "K": 2, "epsilon": 0.05, "max_iter": 7}))
    out = tmp_path / "c"
    code, _ = run(["fit", "--config", cfg, "--epsilon", 0.02, "--out", out], capsys)
    assert code == 0
    r = json.loads((out / "manifest.json").read_text())["resolved"]
    assert r["epsilon"] == 0.02 and r["max_iter"] == 7 and r["K"] == 2
    cfg.write_text(json.dumps({"K": 2, "no_such_key": 1}))
    assert run(["fit", "--config", cfg, "--out", out], capsys)[0] == 2


def test_env_output_dir(stack_file, tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("MGRAF_OUTPUT_DIR", str(tmp_path / "envout"))
    code, msg = run(["baseline", "--input", stack_file / "stack.txt", "--K", 2], capsys)
    assert code == 0 and (tmp_path / "envout" / "baseline.json").exists()
    for f in ("probs.txt", "probs_clamped.txt", "distances.csv", "manifest.json"):
        assert (tmp_path / "envout" / f).exists()


def test_strict_nonconvergence_exit_3(stack_file, tmp_path, capsys):
    args = ["fit", "--input", stack_file / "stack.txt", "--K", 2, "--epsilon", 1e-14, "--max-iter", 1]
    assert run(args + ["--out", tmp_path / "lax"], capsys)[0] == 0
    code, msg = run(args + ["--strict", "--out", tmp_path / "strict"], capsys)
    assert code == 3 and msg["error"] == "ConvergenceError"
    assert not (tmp_path / "strict").exists()


def test_elbow_synthetic(tmp_path, capsys):
    out = tmp_path / "e"
    code, msg = run(["elbow", "--V", 14, "--n", 10, "--true-K", 2, "--K", "1..3", "--reps", 1, "--out", out],
                    capsys)
    assert code == 0
    rows = list(csv.DictReader(open(out / "elbow.csv")))
    assert [r["K"] for r in rows] == ["1", "2", "3"]
    assert "suggested_K" in json.loads((out / "elbow.json").read_text())


def test_identify_table_layout(tmp_path, capsys):
    out = tmp_path / "i"
    code, msg = run(["identify", "--V", 16, "--subjects", 5, "--true-K", 2, "--K", "2,3",
                     "--methods", "mgraf1,mgraf2,separate", "--out", out], capsys)
    assert code == 0
    rows = list(csv.reader(open(out / "identify.csv")))
    assert rows[0] == ["K", "mgraf1", "mgraf2", "separate"] and [r[0] for r in rows[1:]] == ["2", "3"]
    assert all(0 <= float(x) <= 1 for r in rows[1:] for x in r[1:])
    assert run(["identify", "--V", 16, "--subjects", 5, "--methods", "bogus", "--out", out], capsys)[0] == 2


def test_classify_and_edgetest(stack_file, tmp_path, capsys):
    base = ["--input", stack_file / "stack.txt", "--labels", stack_file / "labels.csv", "--K", 2]
    code, msg = run(["classify", *base, "--folds", 3, "--repeats", 2, "--out", tmp_path / "cl"], capsys)
    assert code == 0 and 0 <= msg["result"]["accuracy_mean"] <= 1
    code, msg = run(["edgetest", *base, "--fdr", 0.15, "--out", tmp_path / "et"], capsys)
    assert code == 0
    rows = list(csv.DictReader(open(tmp_path / "et" / "edgetest.csv")))
    assert len(rows) == 14 * 13 // 2
    rej = list(csv.DictReader(open(tmp_path / "et" / "rejected.csv")))
    assert len(rej) == msg["result"]["rejected"]


def test_gof_with_external_probs(stack_file, tmp_path, capsys):
    code, _ = run(["baseline", "--input", stack_file / "stack.txt", "--K", 2, "--out", tmp_path / "b"], capsys)
    code, msg = run(["gof", "--input", stack_file / "stack.txt", "--probs", tmp_path / "b" / "probs_clamped.txt",
                     "--replicates", 10, "--out", tmp_path / "g"], capsys)
    assert code == 0 and msg["result"]["source"] == "external"
    assert (tmp_path / "g" / "topology.csv").exists()
    code, _ = run(["gof", "--input", stack_file / "stack.txt", "--probs", tmp_path / "b" / "probs.txt",
                   "--out", tmp_path / "g2"], capsys)
    assert code == 2  # unclamped estimates leave [0, 1]


def test_scaling_small(tmp_path, capsys):
    grid = tmp_path / "grid.json"
    grid.write_text(json.dumps({"base": {"n": 8, "V": 10, "K": 2}, "n": [8, 16], "V": [10], "K": [1, 2]}))
    code, msg = run(["scaling", "--grid", grid, "--reps", 1, "--out", tmp_path / "s"], capsys)
    assert code == 0 and set(msg["result"]["slopes"]) == {"n", "V", "K"}
    assert (tmp_path / "s" / "scaling.csv").exists()


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "mgraf", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and "mgraf" in res.stdout
