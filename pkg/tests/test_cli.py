import csv
import json
import math
import subprocess
import sys

import pytest

from oscihom.cli import dumps, main


def run(tmp_path, command, config=None, *extra, name="out"):
    args = [command, "--out", str(tmp_path / name), *extra]
    if config is not None:
        path = tmp_path / f"{name}.json"
        path.write_text(config if isinstance(config, str) else json.dumps(config))
        args += ["--config", str(path)]
    return main(args)


def result(tmp_path, name="out"):
    return json.loads((tmp_path / name / "result.json").read_text())


def test_classify_rational(tmp_path):
    assert run(tmp_path, "classify", {"v": [3, 4], "Q": 10}) == 0
    doc = result(tmp_path)
    assert doc["result"]["class"] == "rational" and doc["result"]["m"] == [3, 4]
    assert doc["config"] == {"v": [3, 4], "Q": 10}
    assert doc["tolerances"]["Q"] == 10
    assert "geometry" in doc["versions"]["modules"]


def test_classify_undetermined_strict(tmp_path, capsys):
    cfg = {"v": [1.0, 1.0 + 2e-8]}
    assert run(tmp_path, "classify", cfg) == 0
    assert run(tmp_path, "classify", cfg, "--strict", name="strict") == 1
    assert "geometry" in capsys.readouterr().err


def test_unknown_key_rejected(tmp_path, capsys):
    assert run(tmp_path, "classify", {"v": [1, 0], "colour": 1}) == 1
    assert "unknown keys" in capsys.readouterr().err


def test_json_error_reports_line_and_column(tmp_path, capsys):
    assert run(tmp_path, "classify", '{\n  "v": [1, 0],,\n}') == 1
    err = capsys.readouterr().err
    assert ":2:15" in err


def test_expression_error_reports_column(tmp_path, capsys):
    assert run(tmp_path, "average", {"g": "sin(pi*y1"}) == 1
    err = capsys.readouterr().err
    assert "periodic_field" in err and "column" in err


def test_numerical_error_names_module(tmp_path, capsys):
    cfg = {"curve": {"builtin": "circle"}, "g": "abs(sin(pi*y1)*sin(pi*y2))",
           "schedule": {"kind": "geometric", "eps0": 1e-3, "count": 2}}
    assert run(tmp_path, "sweep", cfg) in (0, 2)
    cfg["schedule"] = {"kind": "phase_targeted", "z": [0, 0], "m": [0, 1], "phases": [0.25]}
    assert run(tmp_path, "sweep", cfg, name="bad") == 1
    assert "oscillatory_integral" in capsys.readouterr().err


def test_missing_config(tmp_path):
    assert main(["sweep", "--out", str(tmp_path / "x")]) == 1


def test_average_and_triple(tmp_path):
    assert run(tmp_path, "average", {"g": "abs(sin(pi*y1)*sin(pi*y2))", "loop": {"m": [1, 0], "phase": 0.5}}) == 0
    doc = result(tmp_path)["result"]
    assert doc["cell_average"] == pytest.approx(4 / math.pi**2, abs=1e-10)
    assert doc["loop_average"] == pytest.approx(2 / math.pi, abs=1e-10)
    assert run(tmp_path, "triple", {"g": "sin(2*pi*y1)^2", "direction": [1, 0]}, name="t") == 0
    tri = result(tmp_path, "t")["result"]
    assert tri["upper"] == pytest.approx(1.0, abs=1e-10) and tri["lower"] == pytest.approx(0.0, abs=1e-10)


def test_weyl_average(tmp_path):
    cfg = {"g": "abs(sin(pi*y1))", "weyl": {"nu_prime": [math.sqrt(2) - 1], "N": 1000}}
    assert run(tmp_path, "average", cfg) == 0
    w = result(tmp_path)["result"]["weyl"]
    assert abs(w["value"] - 2 / math.pi) < 5e-3


def test_sandwich_circle_corpus_case(tmp_path):
    cfg = {"curve": {"builtin": "circle"}, "g": "abs(sin(pi*y1))^3+0.5*cos(2*pi*y1)",
           "schedule": {"kind": "geometric", "eps_min": 1e-3, "ratio": 0.7, "count": 8}, "W": 6}
    assert run(tmp_path, "sandwich", cfg) == 0
    doc = result(tmp_path)
    assert doc["verdicts"] == {"sandwich": True}
    lo, hi = doc["result"]["sweep"]["band"]
    b = doc["result"]["bounds"]
    assert b["lower"] - 2e-2 <= lo <= hi <= b["upper"] + 2e-2
    rows = list(csv.reader((tmp_path / "out" / "result.csv").open()))
    assert rows[0][0] == "table" and len(rows) == 9
    dat = (tmp_path / "out" / "sweep.dat").read_text().splitlines()
    assert dat[0].startswith("#") and len(dat) == 9


def test_sandwich_failure_exit_code(tmp_path):
    # eps = 0.3 leaves a partial period on the unit segment, 0.0103 above the collapsed bound
    cfg = {"curve": {"builtin": "segment", "p0": [0, 0.5], "p1": [1, 0.5]},
           "g": "sin(2*pi*y1)^2", "slack": 0.0,
           "schedule": {"kind": "geometric", "eps0": 0.3, "count": 1}}
    assert run(tmp_path, "sandwich", cfg) == 2
    doc = result(tmp_path)
    assert doc["verdicts"] == {"sandwich": False}
    assert doc["result"]["verdict"]["upper_gap"] == pytest.approx(-0.0103374, abs=1e-6)
    cfg["slack"] = 2e-2
    assert run(tmp_path, "sandwich", cfg, name="slack") == 0


def test_dirichlet_disk(tmp_path):
    cfg = {"domain": {"kind": "disk"}, "g": "abs(sin(pi*y1)*sin(pi*y2))",
           "epsilon_schedule": {"kind": "geometric", "eps_min": 2e-3, "count": 3}, "eval_points": [[0, 0]]}
    assert run(tmp_path, "dirichlet", cfg) == 0
    pt = result(tmp_path)["result"]["points"][0]
    assert pt["homogenized"]["mean"] == pytest.approx(4 / math.pi**2, abs=1e-9)
    assert pt["band_inside"]


def test_neumann_circle(tmp_path):
    cfg = {"curve": {"builtin": "circle"}, "g": "x2*sin(2*pi*y1)", "panels": 512,
           "epsilon_schedule": {"kind": "geometric", "eps_min": 5e-3, "count": 2}, "eval_points": [[0.3, 0.1]]}
    assert run(tmp_path, "neumann", cfg) == 0
    assert result(tmp_path)["verdicts"]["band_inside"] is True


def test_examples_command(tmp_path):
    assert run(tmp_path, "examples") == 0
    doc = result(tmp_path)
    assert all(doc["verdicts"].values())
    for name in ("irrational_line", "rational_family", "stadium"):
        assert (tmp_path / "out" / f"{name}.dat").exists() or name == "stadium"


def test_determinism(tmp_path):
    cfg = {"g": "abs(sin(pi*y1))", "weyl": {"nu_prime": [0.41421356, 0.7320508], "N": 600}}
    assert run(tmp_path, "average", cfg, "--seed", "11", name="a") == 0
    assert run(tmp_path, "average", cfg, "--seed", "11", name="b") == 0
    a = (tmp_path / "a" / "result.json").read_bytes()
    b = (tmp_path / "b" / "result.json").read_bytes()
    assert a == b


def test_float_format_is_17_digits():
    assert dumps({"x": 0.1}) == '{\n  "x": 0.10000000000000001\n}'
    assert json.loads(dumps({"x": [1.0 / 3, float("inf")]}))["x"][0] == 1.0 / 3


def test_module_entry_point(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"v": [1, 0]}))
    proc = subprocess.run([sys.executable, "-m", "oscihom", "classify", "--config", str(cfg),
                           "--out", str(tmp_path / "m")], capture_output=True, text=True)
    assert proc.returncode == 0 and "result.json" in proc.stdout
