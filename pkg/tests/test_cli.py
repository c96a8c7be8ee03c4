from __future__ import annotations

import csv
import io
import json

import numpy as np
import pytest

from seqassort.cli import main, to_csv
from seqassort.generators import random_instance, random_reward_instance
from seqassort.harness import EvaluationReport
from seqassort.instance import Cardinality, Knapsack
from seqassort.io import dump_instance
from seqassort.lowerbounds import make_lower_bound_thm53


@pytest.fixture
def files(tmp_path):
    rng = np.random.default_rng(4)
    paths = {
        "two_item": make_lower_bound_thm53(0.5, 0.5),
        "card": random_instance("gam", 3, rng, constraint=Cardinality(2)),
        "knap": random_instance("mnl", 3, rng, constraint=Knapsack(1.0), mixed_sizes=True),
        "rewards": random_reward_instance(3, rng),
    }
    out = {}
    for name, inst in paths.items():
        out[name] = tmp_path / f"{name}.json"
        dump_instance(inst, out[name])
    return out


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_simulate_exact_worst(capsys, files):
    code, out, _ = run(capsys, "simulate", "--instance", files["two_item"], "--policy", "alg1:gamma",
                       "--order", "worst", "--exact")
    rep = json.loads(out)
    assert code == 0 and rep["pass"] and rep["claimed_rho"] == pytest.approx(1.41667, abs=1e-5)
    assert EvaluationReport.from_dict(rep).to_dict() == rep


def test_simulate_guarantee_failure_exits_one(capsys, files):
    # a deliberately inflated external threshold rejects everything
    code, out, _ = run(capsys, "simulate", "--instance", files["two_item"], "--policy", "alg1:half",
                       "--threshold-source", "external:1000", "--exact")
    assert code == 1 and json.loads(out)["pass"] is False


def test_simulate_monte_carlo_is_byte_stable(capsys, files):
    argv = ["simulate", "--instance", files["knap"], "--policy", "alg4:five", "--order", "random",
            "--trials", 400, "--seed", 3]
    first = run(capsys, *argv)
    second = run(capsys, *argv, "--threads", 1)
    assert first[0] == 0 and first[1] == second[1]


def test_csv_rows_match_support(capsys, files):
    code, out, _ = run(capsys, "simulate", "--instance", files["card"], "--policy", "alg2:weak",
                       "--exact", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0
    _, js, _ = run(capsys, "simulate", "--instance", files["card"], "--policy", "alg2:weak", "--exact")
    assert len(rows) == len(json.loads(js)["rows"])
    assert set(rows[0]) == {"prob", "atoms", "opt", "policy_value", "order", "collected"}


def test_out_file(capsys, files, tmp_path):
    target = tmp_path / "rep.json"
    code, out, _ = run(capsys, "oracle", "--instance", files["knap"], "--exact", "--out", target)
    assert code == 0 and out == ""
    assert set(json.loads(target.read_text())) >= {"expected_opt", "gamma", "expected_g_small"}


def test_threshold_command(capsys, files):
    code, out, _ = run(capsys, "threshold", "--instance", files["two_item"], "--policy", "alg1:gamma")
    assert code == 0 and json.loads(out)["tau"] == pytest.approx(0.88235294117647)
    code, out, _ = run(capsys, "threshold", "--instance", files["two_item"], "--policy", "alg1:gamma",
                       "--threshold-source", "approx:2:1.25:0.4166666666666667")
    assert json.loads(out)["rho_factor"] == 2.0


def test_conditions_command(capsys, files):
    code, out, _ = run(capsys, "conditions", "--instance", files["card"], "--model-checks", "all",
                       "--tol", "1e-9")
    reps = json.loads(out)
    assert code == 0 and [r["condition"] for r in reps] == ["substitutable", "cond1", "cond2", "cond3_weak"]
    # strong IIA is not expected for GAM, so a failure there does not change the exit code
    code, out, _ = run(capsys, "conditions", "--instance", files["card"], "--model-checks", "cond3_strong")
    assert code == 0


def test_lowerbound_commands(capsys):
    code, out, _ = run(capsys, "lowerbound", "--thm53", "--delta", "0.001", "--kappa", "0.5", "--exact")
    assert code == 0 and json.loads(out)["ratio"] >= 1.49
    code, out, _ = run(capsys, "lowerbound", "--reduction", "--delta", "1e-6")
    rep = json.loads(out)
    assert code == 0 and rep["max_error"] <= 0.01 and rep["opt_equals_max_revenue"]


def test_convexpi_command(capsys, files):
    code, out, _ = run(capsys, "convexpi", "--instance", files["rewards"], "--exact")
    assert code == 0 and json.loads(out)["claimed_rho"] == 2.0


@pytest.mark.parametrize(
    "argv",
    [
        ["simulate", "--policy", "alg1:gamma"],
        ["simulate", "--instance", "nope.json", "--policy", "alg1:gamma"],
        ["simulate", "--policy", "alg9:x"],
        ["frobnicate"],
        ["lowerbound", "--thm53", "--delta", "0.1"],
        ["lowerbound", "--delta", "0.1"],
    ],
)
def test_usage_errors_exit_two(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and err


def test_incompatible_policy_and_bad_specs(capsys, files):
    for extra in (["--policy", "alg2:strong"], ["--policy", "alg1:gamma", "--order", "given:0,0"],
                  ["--policy", "alg1:gamma", "--threshold-source", "mc:x"],
                  ["--policy", "alg1:gamma", "--order", "sideways"]):
        code, _, err = run(capsys, "simulate", "--instance", files["two_item"], "--exact", *extra)
        assert code == 2 and "seqassort" in err


def test_to_csv_for_flat_reports():
    text = to_csv([{"a": 1, "b": [1, 2]}, {"a": 2.5}])
    assert text.splitlines() == ["a,b", "1,1 2", "2.5,None"]
