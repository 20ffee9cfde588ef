import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from adaptkde.cli import main
from adaptkde.harness.models import example1, sample

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def run_cli(*args):
    return subprocess.run([sys.executable, "-m", "adaptkde.cli", *args], capture_output=True, text=True)


def test_constants_kernel_csv(capsys):
    assert main(["constants", "--kernel", "l=3"]) == 0
    lines = capsys.readouterr().out.strip().split("\n")
    assert lines[0] == "quantity,value"
    table = dict(line.split(",") for line in lines[1:])
    assert float(table["moment_0"]) == pytest.approx(1.0, abs=1e-10)
    assert abs(float(table["moment_2"])) < 1e-8
    assert {"sup_norm", "l1_norm", "lipschitz"} <= set(table)


def test_constants_table_json(capsys):
    assert main(["constants", "--q", "1", "--d", "2", "--l", "2"]) == 0
    tab = json.loads(capsys.readouterr().out)
    assert tab["lambda"] > 1e9 and len(tab["c_s"]) == 2


def test_constants_needs_arguments(capsys):
    assert main(["constants"]) == 2


def test_rates_json(capsys):
    assert main(["rates", "--beta", "1,2", "--p", "inf,inf", "--partition", "1|2", "--n", "1000", "--beta-max", "2"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["r"] == 1.0 and rep["regime"] == "adaptive-interior"


def test_estimate(tmp_path, capsys):
    X = sample(example1(2), 2000, 4).rows
    data = tmp_path / "x.csv"
    np.savetxt(data, X, delimiter=",", header="x1,x2", comments="")
    cfg = tmp_path / "est.cfg"
    cfg.write_text("lambda_scale = 0.05\nhbar = dyadic:1..5\n")
    assert main(["estimate", "--data", str(data), "--x0", "0.5,0.5", "--config", str(cfg)]) == 0
    res = json.loads(capsys.readouterr().out)
    assert res["partition"] in ("1|2", "1,2") and len(res["trace"]) == res["n_candidates"]
    assert main(["estimate", "--data", str(data), "--x0", "0.5", "--config", str(cfg)]) == 2


def test_theory_mode_empty_grid():
    out = run_cli("simulate", "--config", str(CONFIGS / "theory_d2.cfg"))
    assert out.returncode == 2
    assert "ln(n)/(a*n)" in out.stderr and "binding constraint" in out.stderr


def test_sweep_writes_csv_and_json(tmp_path):
    cfg = tmp_path / "s.cfg"
    cfg.write_text("density = gaussian\nd = 1\nx0 = 0\nn_values = 1024,2048,4096,8192\nreplications = 4\n"
                   "beta_max = 2\nhbar = dyadic:1..6\n")
    csv_path, json_path = tmp_path / "o.csv", tmp_path / "o.json"
    assert main(["sweep", "--config", str(cfg), "--csv", str(csv_path), "--json", str(json_path), "--seed", "1"]) == 0
    assert len(csv_path.read_text().strip().split("\n")) == 5
    assert json.loads(json_path.read_text())["slope"] is not None
