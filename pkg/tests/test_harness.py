import json
import os
import subprocess
import sys

import numpy as np
import pytest

from seqcvx.cli import main
from seqcvx.descriptors import load_point, load_problem
from seqcvx.errors import InputError
from seqcvx.harness import ConfigError, ExperimentConfig, compare_methods, run_experiment
from seqcvx.instances import bundled_instances, get_instance, make_rng
from seqcvx.penalties import lift
from seqcvx.problem import check_oracles, evaluate_objective
from seqcvx.trace import SolverTrace

DISC = {
    "dim": 2,
    "objective": {"f": {"quadratic": {"Q": [[2, 0], [0, 2]]}}},
    "constraints": [{"g": {"quadratic": {"Q": [[2, 0], [0, 2]], "b": [-4, 0], "c": 3}}}],
    "x0": [2.0, 0.5],
}


def write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


def test_run_experiment_writes_files(tmp_path):
    cfg = ExperimentConfig("mba2d", "variant", output_dir=str(tmp_path))
    s = run_experiment(cfg)
    assert s["termination"] == "kkt_tol"
    for key in ("csv", "json", "summary", "rejections"):
        assert os.path.exists(s["files"][key])
    head = open(s["files"]["csv"]).readline().strip()
    assert head == "k,F,max_g,stat,feas,comp,step,inner_iters"
    assert open(s["files"]["rejections"]).readline().strip() == "k,trial,l_f,l_g,reason"
    back = SolverTrace.read_json(s["files"]["json"])
    assert back.to_csv() == s["trace"].to_csv()


def test_inexact_csv_columns(tmp_path):
    s = run_experiment(ExperimentConfig("mba2d", "inexact", output_dir=str(tmp_path)))
    head = open(s["files"]["csv"]).readline().strip().split(",")
    assert head[8:] == ["eps_k", "stat_res", "feas_res", "comp_res", "dual_gap_partial"]


@pytest.mark.parametrize("method", ["exact", "variant", "inexact"])
def test_csv_is_deterministic(tmp_path, method):
    out = []
    for run in range(2):
        cfg = ExperimentConfig("constrained_dc", method, output_dir=str(tmp_path / str(run)))
        out.append(open(run_experiment(cfg)["files"]["csv"], "rb").read())
    assert out[0] == out[1]


def test_seeded_instances_are_reproducible():
    a = get_instance("sparse_ls_scad").problem(seed=3)
    b = get_instance("sparse_ls_scad").problem(seed=3)
    c = get_instance("sparse_ls_scad").problem(seed=4)
    x = lift(make_rng(0).standard_normal(a.dim // 2))
    assert evaluate_objective(a, x) == evaluate_objective(b, x) != evaluate_objective(c, x)


def test_config_errors_are_collected():
    cfg = ExperimentConfig("no_such_instance.json", "newton", x0=[0.0])
    with pytest.raises(ConfigError) as err:
        cfg.resolve()
    assert len(err.value.issues) == 2
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"problem": "dc1d", "bogus": 1})
    with pytest.raises(ConfigError):
        ExperimentConfig("dc1d", "exact", options={"kkt_tol": -1}).resolve()
    with pytest.raises(ConfigError):
        ExperimentConfig("dc1d", x0=[0.0, 0.0]).resolve()


def test_inline_and_file_descriptors(tmp_path):
    inline = run_experiment(ExperimentConfig(DISC))
    path = write(tmp_path / "disc.json", DISC)
    cfg = ExperimentConfig.from_json(write(tmp_path / "cfg.json", {"problem": "disc.json"}))
    from_file = run_experiment(cfg)
    assert inline["x_final"] == from_file["x_final"]
    assert np.allclose(inline["x_final"], [1.0, 0.0], atol=1e-6)
    assert load_problem(path).name == "disc"


def test_descriptor_kinds():
    desc = {
        "dim": 2,
        "set": {"intersection": [{"box": {"lo": [-1, -1], "hi": [1, 1]}},
                                 {"halfspaces": {"A": [[1, 1]], "b": [1]}}]},
        "objective": {"f": {"least_squares": {"A": [[1, 0], [0, 2]], "b": [1, 1]}},
                      "p": {"l1": {"weight": 0.1}}, "u": {"l1": {"weights": [0.05, 0.0]}}},
    }
    prob = load_problem(desc)
    assert prob.m == 0 and check_oracles(prob, n_pairs=100) == []
    sparse = load_problem({"sparse_nlp": {"loss": {"quadratic": {"Q": [[1.0]]}},
                                          "penalty": {"kind": "scad", "lambda": 1.0}}})
    assert sparse.dim == 2
    with pytest.raises(InputError):
        load_problem({"dim": 1, "objective": {"h": {"zero": {}}}})
    with pytest.raises(InputError):
        load_problem({"dim": 1, "set": {"torus": {}}})
    x, lam = load_point({"x": [1, 2], "multipliers": [0.5]})
    assert x.tolist() == [1.0, 2.0] and lam.tolist() == [0.5]
    assert load_point([3.0])[1] is None


def test_compare_methods_table():
    rep = compare_methods([ExperimentConfig("mba2d", m) for m in ("exact", "variant", "inexact")])
    assert [r["method"] for r in rep.rows] == ["exact", "variant", "inexact"]
    assert all(abs(r["final_F"] - 1.0) < 1e-5 for r in rep.rows)
    assert len(rep.to_table().splitlines()) == 4


def test_compare_rejects_mixed_problems():
    with pytest.raises(InputError):
        compare_methods([ExperimentConfig("mba2d"), ExperimentConfig("dc1d")])
    with pytest.raises(InputError):
        compare_methods([])


def test_instance_library():
    names = [e.name for e in bundled_instances()]
    assert {"dc1d", "mba2d", "constrained_dc"} <= set(names)
    for e in bundled_instances():
        prob = e.problem()
        assert np.shape(e.start(prob)) == (prob.dim,)
        assert e.summary()["name"] == e.name
    with pytest.raises(InputError):
        get_instance("missing")


def test_cli_solve_and_certify(tmp_path, capsys):
    cfg = write(tmp_path / "cfg.json", {"problem": "dc1d", "method": "exact"})
    assert main(["solve", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    assert json.loads(capsys.readouterr().out)["final_F"] == pytest.approx(-1.0)
    assert os.path.exists(tmp_path / "o" / "dc1d_exact.csv")
    point = write(tmp_path / "pt.json", {"x": [1.0, 0.0], "multipliers": [1.0]})
    assert main(["certify", "--problem", "mba2d", "--point", point]) == 0
    assert json.loads(capsys.readouterr().out)["violation"] <= 1e-12


def test_cli_compare_and_list(tmp_path, capsys):
    a = write(tmp_path / "a.json", {"problem": "mba2d", "method": "exact"})
    b = write(tmp_path / "b.json", {"problem": "mba2d", "method": "variant"})
    assert main(["compare", "--configs", a, b]) == 0
    assert "variant" in capsys.readouterr().out
    assert main(["list-instances"]) == 0
    assert "constrained_dc" in capsys.readouterr().out


def test_cli_input_error_exit_code(tmp_path, capsys):
    cfg = write(tmp_path / "bad.json", {"problem": "dc1d", "method": "exact", "x0": [9.0]})
    assert main(["solve", "--config", cfg]) == 2
    assert "error" in capsys.readouterr().err


def test_cli_nonconvergence_exit_code(tmp_path, capsys):
    cfg = write(tmp_path / "cap.json", {"problem": "constrained_dc", "method": "exact",
                                        "options": {"inner": {"max_inner": 1}}})
    assert main(["solve", "--config", cfg, "--out", str(tmp_path)]) == 3
    assert os.path.exists(tmp_path / "constrained_dc_exact_diagnostics.json")


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "seqcvx", "list-instances"],
                         capture_output=True, text=True, check=True)
    assert "mba2d" in out.stdout
