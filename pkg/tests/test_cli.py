import csv
import io
import json
import subprocess
import sys

import pytest

from wexpand import cli
from wexpand.circuit import CircuitError, bundled, bundled_names, run_circuit
from wexpand.fock import state_from_records


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize("name", ["w3.json", "w4.json", "w5.json", "ghz3.json"])
def test_bundled_circuits_pass_check(capsys, name):
    code, out, err = run(capsys, "run", str(bundled(name)), "--check")
    assert code == 0, err
    res = json.loads(out)
    assert abs(res["probability"] - res["expect"]["probability"]) < 1e-9
    assert abs(res["fidelity"] - 1) < 1e-9


def test_bundled_names_cover_figures():
    assert {"w3.json", "w4.json", "w5.json", "ghz3.json"} <= set(bundled_names())


def test_run_by_bundled_name(capsys):
    code, out, _ = run(capsys, "run", "w4.json")
    assert code == 0 and abs(json.loads(out)["probability"] - 1 / 8) < 1e-9


def test_empty_circuit_probability_one():
    res = run_circuit({"inputs": ["vacuum"], "elements": [], "postselect": {}})
    assert res["probability"] == 1


def test_result_state_roundtrips_as_input():
    res = run_circuit(bundled("w4.json"))
    again = run_circuit({"inputs": [{"state": res["conditional_state"]}], "elements": []})
    assert again["conditional_state"] == res["conditional_state"]
    text = cli.fock.dump_json(res["conditional_state"])
    assert state_from_records(json.loads(text)).amplitudes == state_from_records(res["conditional_state"]).amplitudes


def test_check_failure_exit_code(tmp_path, capsys):
    data = json.loads(bundled("w3.json").read_text())
    data["expect"]["probability"] = "1/16"
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(data))
    code, _, err = run(capsys, "run", str(path), "--check")
    assert code == cli.EXIT_CHECK and "probability" in err


def test_validation_error_reports_line(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text('{\n  "inputs": ["vacuum"],\n  "elements": [\n    {"bs": [1, 2, 3]},\n    {"hwp_ps": 4}\n  ]\n}\n')
    code, _, err = run(capsys, "run", str(path))
    assert code == cli.EXIT_INVALID
    assert "line 4" in err and "elements[0]" in err


def test_json_syntax_error_reports_line(tmp_path, capsys):
    path = tmp_path / "syntax.json"
    path.write_text('{\n  "inputs": [\n    "vacuum",,\n  ]\n}\n')
    code, _, err = run(capsys, "run", str(path))
    assert code == cli.EXIT_INVALID and "line 3" in err


@pytest.mark.parametrize("bad", [
    {"inputs": [{"seed": "unicorn"}]},
    {"inputs": [{"seed": "epr", "modes": [0, 0]}]},
    {"inputs": [{"seed": "two_h", "mode": 1}, {"seed": "single", "mode": 1}]},
    {"elements": [{"teleport": 1}]},
    {"postselect": {"1": -1}},
    {"target": "w_three"},
    {"extra": 1},
])
def test_schema_violations(bad):
    with pytest.raises(CircuitError):
        run_circuit(bad)


def test_mode_collision_is_validation_error():
    with pytest.raises(CircuitError, match="elements\\[0\\]"):
        run_circuit({"inputs": [{"seed": "single", "mode": 1}, {"seed": "single", "mode": 4}],
                     "elements": [{"bs": [1, 2, 3, 4]}]})


def test_w_expand(capsys):
    code, out, _ = run(capsys, "w-expand", "--n", "3", "--check")
    assert code == 0
    assert abs(json.loads(out)["probability"] - 5 / 48) < 1e-9


def test_ghz_expand_csv(capsys):
    code, out, _ = run(capsys, "ghz-expand", "--n", "4", "--check", "--out", "csv")
    assert code == 0
    (row,) = list(csv.DictReader(io.StringIO(out)))
    assert abs(float(row["probability"]) - 1 / 8) < 1e-9


def test_cascade_epr(capsys):
    code, out, _ = run(capsys, "cascade", "--seed", "epr", "--k", "1", "--check")
    res = json.loads(out)
    assert code == 0 and abs(res["p_success"] - 1 / 8) < 1e-9 and len(res["modes"]) == 4


def test_cascade_explicit_feed(capsys):
    code, out, _ = run(capsys, "cascade", "--seed", "v", "--k", "2", "--feed", "1,6", "--check")
    assert code == 0 and abs(json.loads(out)["p_success"] - 5 / 256) < 1e-9


def test_cascade_resource_limit_exit_code(capsys, monkeypatch):
    monkeypatch.setattr(cli.fock, "MAX_TERMS", 5)
    code, _, _ = run(capsys, "cascade", "--seed", "v", "--k", "2")
    assert code == cli.EXIT_RESOURCE


def test_web_w4(capsys):
    code, out, _ = run(capsys, "web", "--state", "w", "--n", "4", "--check")
    pairs = json.loads(out)["pairs"]
    assert code == 0 and len(pairs) == 6
    assert all(abs(p["concurrence"] - 0.5) < 1e-9 for p in pairs)


def test_feasibility_json(capsys):
    code, out, _ = run(capsys, "feasibility", "--config", "pdc_pdc", "--gamma", "1e-4", "--rate", "1e-4", "--check")
    res = json.loads(out)
    assert code == 0
    assert abs(sum(res["breakdown"].values()) - res["signal_rate"] - res["error_rate"]) < 1e-15


def test_feasibility_sweep_csv_header(capsys):
    code, out, _ = run(capsys, "feasibility", "--config", "pdc_wcp", "--gammas", "1e-5,1e-4",
                       "--rates", "1e-3,1e-2", "--out", "csv")
    lines = out.splitlines()
    assert code == 0
    assert lines[0] == "gamma,g_or_nu,signal,error,fidelity" and len(lines) == 5


def test_invalid_argument_exit_code(capsys):
    code, _, _ = run(capsys, "w-expand", "--n", "0")
    assert code == cli.EXIT_INVALID


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "wexpand", "cascade", "--seed", "v", "--k", "1", "--out", "csv"],
                          capture_output=True, text=True, check=True)
    assert proc.stdout.startswith("seed,k,p_success")
