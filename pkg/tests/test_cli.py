"""End-to-end driver tests: artifacts, determinism, exit codes.

Everything goes through ``main`` in-process on small instances, so the
assertions cover argument handling, config merging and artifact layout
exactly as a shell user would hit them.
"""

import json

import numpy as np
import pytest

from proxsplit.cli import main
from proxsplit.params import param_from_config
from proxsplit.problems import _decode_array, gen_bqp, gen_sr, load_instance
from proxsplit.tuning import SolutionPair, acceleration_gain

BQP_SMALL = ["--app", "bqp", "--n", "6", "--k", "8", "--seed", "5"]
SR_SMALL = ["--app", "sr", "--n", "12", "--k", "3", "--seed", "5"]


def read_rows(path):
    lines = path.read_text().splitlines()
    assert lines[0] == "# proxsplit-trace v1"
    assert lines[1] == "k,fp_residual_sq,opt_residual,mse,elapsed_ms"
    return [line.split(",") for line in lines[2:]]


def drop_timing(path):
    """Trace lines without the elapsed column, which is the only wall-clock field."""
    return ["," .join(row[:-1]) for row in read_rows(path)]


def test_run_writes_artifacts_and_gain_invariant(tmp_path):
    out = tmp_path / "run"
    code = main(["run", *BQP_SMALL, "--param-mode", "estimate", "--out", str(out)])
    assert code == 0

    rows = read_rows(out / "trace.csv")
    summary = json.loads((out / "summary.json").read_text())
    assert summary["schema"] == "proxsplit-summary v1"
    assert summary["app"] == "bqp" and summary["algo"] == "drs"
    assert summary["param_mode"] == "estimate"
    assert summary["seed"] == 5 and summary["n"] == 6 and summary["k"] == 8
    assert summary["converged"] and summary["stop_reason"] == "mse_eps"
    assert summary["iterations"] == len(rows)
    assert summary["final_mse"] <= 1e-6
    assert float(rows[-1][3]) == summary["final_mse"]

    # the reported gain must be reproducible from the stored reference alone
    ref = json.loads((out / "reference.json").read_text())
    assert ref["schema"] == "proxsplit-reference v1"
    pair = SolutionPair(_decode_array(ref["x_ref"]), _decode_array(ref["lam_ref"]))
    param = param_from_config(summary["param"])
    gain = acceleration_gain(param, pair)
    assert summary["xi"] == pytest.approx(gain.xi, rel=1e-12)
    assert summary["xi_numerator"] == pytest.approx(gain.numerator, rel=1e-12)
    assert summary["xi_denominator"] == pytest.approx(gain.denominator, rel=1e-12)
    assert summary["reference"]["iterations"] == ref["iterations"]
    assert summary["reference"]["converged"] is True


def test_unit_manual_parameter_reproduces_identity(tmp_path):
    out_id = tmp_path / "identity"
    out_manual = tmp_path / "manual"
    assert main(["run", *BQP_SMALL, "--param-mode", "identity",
                 "--out", str(out_id)]) == 0
    assert main(["run", *BQP_SMALL, "--param-mode", "manual",
                 "--alpha", "1", "--beta", "1", "--out", str(out_manual)]) == 0
    s_id = json.loads((out_id / "summary.json").read_text())
    s_manual = json.loads((out_manual / "summary.json").read_text())
    assert s_id["iterations"] == s_manual["iterations"]
    assert s_manual["xi"] == pytest.approx(1.0, rel=1e-12)
    assert drop_timing(out_id / "trace.csv") == drop_timing(out_manual / "trace.csv")


def test_repeat_runs_are_identical_up_to_timing(tmp_path):
    outs = [tmp_path / "a", tmp_path / "b"]
    for out in outs:
        assert main(["run", *SR_SMALL, "--param-mode", "estimate",
                     "--out", str(out)]) == 0
    assert drop_timing(outs[0] / "trace.csv") == drop_timing(outs[1] / "trace.csv")
    first = json.loads((outs[0] / "summary.json").read_text())
    second = json.loads((outs[1] / "summary.json").read_text())
    assert first == second


def test_sweep_single_cell_agrees_with_run(tmp_path):
    out_run = tmp_path / "run"
    assert main(["run", *BQP_SMALL, "--param-mode", "manual",
                 "--alpha", "0.5", "--beta", "1.5", "--out", str(out_run)]) == 0
    out_sweep = tmp_path / "sweep"
    assert main(["sweep", *BQP_SMALL, "--alpha-grid", "0.5",
                 "--beta-grid", "1.5", "--out", str(out_sweep)]) == 0
    lines = (out_sweep / "sweep.csv").read_text().splitlines()
    assert lines[0] == "# proxsplit-sweep v1"
    assert lines[1] == "alpha,beta,iterations,final_mse"
    assert len(lines) == 3
    alpha, beta, iters, final_mse = lines[2].split(",")
    summary = json.loads((out_run / "summary.json").read_text())
    assert (float(alpha), float(beta)) == (0.5, 1.5)
    assert int(iters) == summary["iterations"]
    assert float(final_mse) == summary["final_mse"]


def test_sweep_rows_iterate_beta_fastest(tmp_path):
    out = tmp_path / "sweep"
    assert main(["sweep", *BQP_SMALL, "--alpha-grid", "0.5,2",
                 "--beta-grid", "1,3", "--max-iters", "30000",
                 "--out", str(out)]) == 0
    rows = (out / "sweep.csv").read_text().splitlines()[2:]
    cells = [tuple(float(tok) for tok in row.split(",")[:2]) for row in rows]
    assert cells == [(0.5, 1.0), (0.5, 3.0), (2.0, 1.0), (2.0, 3.0)]


def test_sweep_thread_count_does_not_change_output(tmp_path):
    args = ["sweep", *BQP_SMALL, "--alpha-grid", "0.3:3:3", "--beta-grid", "0.5,2"]
    out1, out2 = tmp_path / "serial", tmp_path / "pool"
    assert main([*args, "--jobs", "1", "--out", str(out1)]) == 0
    assert main([*args, "--jobs", "2", "--out", str(out2)]) == 0
    assert (out1 / "sweep.csv").read_text() == (out2 / "sweep.csv").read_text()


def test_alpha_sweep_has_a_single_trough(tmp_path):
    out = tmp_path / "sweep"
    assert main(["sweep", "--app", "bqp", "--n", "8", "--k", "10", "--seed", "3",
                 "--alpha-grid", "0.02:5:9", "--max-iters", "20000",
                 "--out", str(out)]) == 0
    rows = (out / "sweep.csv").read_text().splitlines()[2:]
    iters = [int(row.split(",")[2]) for row in rows]
    best = int(np.argmin(iters))
    assert 0 < best < len(iters) - 1
    for i in range(best):
        assert iters[i] > iters[i + 1]
    for i in range(best, len(iters) - 1):
        assert iters[i] < iters[i + 1]
    # the end-of-grid runs pay an order of magnitude over the trough
    assert min(iters[0], iters[-1]) > 10 * iters[best]


def test_ratecheck_report(tmp_path):
    out = tmp_path / "rc"
    code = main(["ratecheck", *BQP_SMALL, "--param-mode", "estimate",
                 "--out", str(out)])
    assert code == 0
    doc = json.loads((out / "ratecheck.json").read_text())
    assert doc["schema"] == "proxsplit-ratecheck v1"
    assert doc["basic"]["ok"] is True
    assert doc["basic"]["first_violation"] is None
    assert doc["basic"]["checked"] == doc["iterations"]
    assert 0.0 < doc["l_hat"] <= 1.0
    assert doc["approximate_fixed_point"] is True
    # the pinned calibration numbers follow the decay-factor formula
    a = 0.99 / (2.0 - 0.99)
    for key, k in (("k20", 20), ("k100", 100)):
        want = a ** k * (1 - a) / (1 - a ** (k + 1))
        assert doc["calibration"][key] == pytest.approx(want, rel=1e-12)
    assert doc["calibration"]["k20"] == pytest.approx(0.0387, rel=2e-2)
    assert doc["calibration"]["k100"] == pytest.approx(0.0031, rel=2e-2)


def test_gen_matches_in_process_generators(tmp_path):
    bqp_path = tmp_path / "bqp.json"
    assert main(["gen", "--app", "bqp", "--n", "7", "--k", "9", "--seed", "4",
                 "--out", str(bqp_path)]) == 0
    inst = load_instance(bqp_path)
    direct = gen_bqp(7, 9, 0.05, 1.0, 4)
    assert np.array_equal(inst.a, direct.a)
    assert np.array_equal(inst.b, direct.b)

    sr_path = tmp_path / "sr.json"
    assert main(["gen", "--app", "sr", "--n", "16", "--k", "3", "--seed", "4",
                 "--out", str(sr_path)]) == 0
    inst = load_instance(sr_path)
    direct = gen_sr(16, 3, 2.0, 0.8, 4)
    assert np.array_equal(inst.taus, direct.taus)
    assert np.array_equal(inst.x_star, direct.x_star)
    assert np.array_equal(inst.omega, direct.omega)


def test_run_on_saved_instance(tmp_path):
    inst_path = tmp_path / "inst.json"
    assert main(["gen", *BQP_SMALL, "--out", str(inst_path)]) == 0
    out_file = tmp_path / "file_run"
    assert main(["run", "--app", "bqp", "--instance", str(inst_path),
                 "--param-mode", "estimate", "--out", str(out_file)]) == 0
    out_fresh = tmp_path / "fresh_run"
    assert main(["run", *BQP_SMALL, "--param-mode", "estimate",
                 "--out", str(out_fresh)]) == 0
    assert drop_timing(out_file / "trace.csv") == drop_timing(out_fresh / "trace.csv")
    # the file pins the problem kind; asking for the other app is an error
    assert main(["run", "--app", "sr", "--instance", str(inst_path),
                 "--out", str(tmp_path / "bad")]) == 1


def test_config_errors_exit_one(tmp_path, capsys):
    out = str(tmp_path / "o")
    assert main(["run", *BQP_SMALL, "--param-mode", "diag-opt", "--out", out]) == 1
    assert "cone" in capsys.readouterr().err
    assert main(["run", *BQP_SMALL, "--param-mode", "manual",
                 "--alpha", "2", "--out", out]) == 1
    assert main(["sweep", *BQP_SMALL, "--out", out]) == 1
    assert main(["sweep", *BQP_SMALL, "--alpha-grid", "0:5:3", "--out", out]) == 1
    assert main(["run", *BQP_SMALL, "--max-iters", "-3", "--out", out]) == 1
    assert main(["run", *BQP_SMALL, "--param-mode", "sweep", "--out", out]) == 1


def test_hitting_the_cap_exits_two(tmp_path):
    out = tmp_path / "capped"
    code = main(["run", *BQP_SMALL, "--param-mode", "identity",
                 "--max-iters", "5", "--out", str(out)])
    assert code == 2
    summary = json.loads((out / "summary.json").read_text())
    assert summary["stop_reason"] == "max_iters"
    assert summary["converged"] is False
    assert summary["iterations"] == 5


def test_environment_seed_is_a_fallback(tmp_path, monkeypatch):
    monkeypatch.setenv("PROXSPLIT_SEED", "9")
    env_path = tmp_path / "env.json"
    assert main(["gen", "--app", "bqp", "--n", "5", "--k", "6",
                 "--out", str(env_path)]) == 0
    assert json.loads(env_path.read_text())["seed"] == 9

    flag_path = tmp_path / "flag.json"
    assert main(["gen", "--app", "bqp", "--n", "5", "--k", "6", "--seed", "4",
                 "--out", str(flag_path)]) == 0
    assert json.loads(flag_path.read_text())["seed"] == 4


def test_config_file_merges_under_flags(tmp_path):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text(
        "# experiment defaults\n"
        "app = bqp\n"
        "n = 6\n"
        "k = 8\n"
        "seed = 5\n"
        "param_mode = identity\n"
    )
    out_file = tmp_path / "from_file"
    assert main(["run", "--config", str(cfg), "--out", str(out_file)]) == 0
    s = json.loads((out_file / "summary.json").read_text())
    assert (s["app"], s["n"], s["k"], s["seed"]) == ("bqp", 6, 8, 5)
    assert s["param_mode"] == "identity"

    out_flag = tmp_path / "overridden"
    assert main(["run", "--config", str(cfg), "--param-mode", "estimate",
                 "--out", str(out_flag)]) == 0
    assert json.loads((out_flag / "summary.json").read_text())["param_mode"] == "estimate"

    bad = tmp_path / "bad.cfg"
    bad.write_text("apps = bqp\n")
    assert main(["run", "--config", str(bad), "--out", str(tmp_path / "x")]) == 1


def test_other_algorithms_run_through_the_driver(tmp_path):
    iters = {}
    for algo in ("drs", "admm", "pd", "pdf"):
        out = tmp_path / algo
        assert main(["run", *BQP_SMALL, "--param-mode", "estimate",
                     "--algo", algo, "--out", str(out)]) == 0
        iters[algo] = json.loads((out / "summary.json").read_text())["iterations"]
    # matched starts make every formulation stop at the same step
    assert len(set(iters.values())) == 1
