import json
import pytest
from catsim.__main__ import load_config, main, parse_qubit, parser
from catsim.mappings import reference_values
from test_utils import read_report

def run_cli(capsys, *argv):
    status = main(list(argv))
    return status, capsys.readouterr().out

def test_reference_numbers(capsys):
    status, out = run_cli(capsys, "reference-numbers")
    rows = read_report(out)
    assert status == 0
    assert [r["quantity"] for r in rows] == list(reference_values)
    miss = next(r for r in rows if r["quantity"] == "detector_miss")
    assert float(miss["value"]) == pytest.approx(9.2e-8, rel=0.01)
    assert "e" in miss["value"]

@pytest.mark.parametrize("output_format", ["csv", "json"])
def test_readout(capsys, output_format):
    status, out = run_cli(capsys, "readout", "--qubit", "1,1j", "--format", output_format)
    rows = read_report(out, output_format)
    assert status == 0
    assert {r["outcome"] for r in rows} == {"zero", "one", "failure_no_click", "failure_both_click"}
    assert sum(float(r["probability"]) for r in rows) == pytest.approx(1.0, abs=1e-10)
    assert all(r["sampled"] == "" for r in rows)

def test_readout_shots(capsys):
    _, out = run_cli(capsys, "readout", "--shots", "200", "--seed", "4")
    rows = read_report(out)
    assert sum(int(r["sampled"]) for r in rows) == 200
    _, again = run_cli(capsys, "readout", "--shots", "200", "--seed", "4")
    assert again == out

def test_teleport(capsys):
    status, out = run_cli(capsys, "teleport", "--qubit", "1,1", "--efficiency", "1.0")
    rows = read_report(out)
    assert status == 0
    assert [r["outcome"] for r in rows][-1] == "failure"
    assert len(rows) == 5
    assert sum(float(r["probability"]) for r in rows) == pytest.approx(1.0, abs=1e-9)

def test_cnot_truth_table(capsys):
    status, out = run_cli(capsys, "cnot", "--efficiency", "1.0", "--format", "json")
    rows = read_report(out, "json")
    assert status == 0
    assert [(r["control"], r["target"]) for r in rows] == [("0", "0"), ("0", "1"), ("1", "0"), ("1", "1")]
    assert all(float(r["success"]) > 0.99 for r in rows)
    assert all(float(r["min_fidelity"]) >= 1 - 1e-6 for r in rows)

def test_cnot_shots(capsys):
    _, exact = run_cli(capsys, "cnot", "--efficiency", "1.0")
    status, out = run_cli(capsys, "cnot", "--efficiency", "1.0", "--shots", "300", "--seed", "2")
    rows = read_report(out)
    assert status == 0
    assert out != exact
    assert all(r["sampled_success"] == "" for r in read_report(exact))
    for row in rows:
        assert 290 <= int(row["sampled_success"]) <= 300
        assert float(row["sampled_fidelity"]) >= 1 - 1e-6

def test_teleport_trace(tmp_path, capsys):
    path = tmp_path / "trace.jsonl"
    status, _ = run_cli(capsys, "teleport", "--qubit", "1,1", "--shots", "20", "--trace", str(path))
    lines = [json.loads(line) for line in path.read_text().splitlines()]
    assert status == 0
    assert {line["run"] for line in lines} == {str(i) for i in range(20)}
    assert all(line["step"] in ("bell_measure", "correction") for line in lines)
    assert all(0 <= line["p"] <= 1 for line in lines)

def test_cnot_trace_follows_one_run_per_input(tmp_path, capsys):
    path = tmp_path / "trace.jsonl"
    status, _ = run_cli(capsys, "cnot", "--efficiency", "1.0", "--trace", str(path))
    lines = [json.loads(line) for line in path.read_text().splitlines()]
    assert status == 0
    assert [line["run"] for line in lines[::2]] == ["0|0:0", "0|1:0", "1|0:0", "1|1:0"]
    assert [line["step"] for line in lines[:2]] == ["bell_control", "bell_target"]

def test_sweep(capsys):
    status, out = run_cli(capsys, "sweep", "--alphas", "2,3", "--efficiencies", "0.9", "--thresholds", "0,1")
    rows = read_report(out)
    assert status == 0
    assert len(rows) == 4
    assert [float(r["alpha"]) for r in rows] == [2.0, 2.0, 3.0, 3.0]

def test_empty_sweep_grid(capsys):
    with pytest.raises(SystemExit) as exc_info:
        main(["sweep", "--alphas", ""])
    assert exc_info.value.code == 2
    assert "grid is empty" in capsys.readouterr().err

def test_verify(capsys):
    status, out = run_cli(capsys, "verify")
    rows = read_report(out)
    assert status == 0
    assert all(r["passed"] == "true" for r in rows)

def test_output_file(tmp_path, capsys):
    path = tmp_path / "report.csv"
    status, out = run_cli(capsys, "reference-numbers", "--output", str(path))
    assert status == 0
    assert out == ""
    assert len(read_report(path.read_text())) == len(reference_values)

@pytest.mark.parametrize("qubit", ["0,0", "1", "one,two"])
def test_invalid_qubit(capsys, qubit):
    with pytest.raises(SystemExit) as exc_info:
        main(["readout", "--qubit", qubit])
    assert exc_info.value.code == 2
    assert "invalid qubit" in capsys.readouterr().err

def test_parse_qubit():
    q = parse_qubit("3, 4j", 2.0)
    assert (q.a, q.b) == (pytest.approx(0.6), pytest.approx(0.8j))
    assert q.alpha == 2.0

class TestConfig:
    def test_defaults(self):
        config = load_config(parser.parse_args(["readout"]))
        assert (config.alpha, config.efficiency, config.threshold, config.truncation) == (3.0, 0.9, 0, 128)

    def test_yaml_then_flags(self, config_file):
        path = config_file({"alpha": 2.5, "threshold": 2})
        config = load_config(parser.parse_args(["readout", "-c", path, "--threshold", "1"]))
        assert config.alpha == 2.5
        assert config.threshold == 1

    def test_later_files_win(self, config_file):
        first = config_file({"alpha": 2.5, "seed": 3}, "first.yaml")
        second = config_file({"alpha": 4.0}, "second.yaml")
        with pytest.warns(UserWarning, match="Config value overwritten: alpha"):
            config = load_config(parser.parse_args(["readout", "-c", first, "-c", second]))
        assert (config.alpha, config.seed) == (4.0, 3)

    def test_environment_truncation(self, monkeypatch, config_file):
        monkeypatch.setenv("CATSIM_TRUNCATION", "64")
        assert load_config(parser.parse_args(["verify"])).truncation == 64
        path = config_file({"truncation": 100})
        assert load_config(parser.parse_args(["verify", "-c", path])).truncation == 100
        assert load_config(parser.parse_args(["verify", "-c", path, "--truncation", "90"])).truncation == 90

    def test_missing_section(self, tmp_path):
        path = tmp_path / "other.yaml"
        path.write_text("fairness: {}\n")
        with pytest.raises(ValueError, match="Section 'catsim' not found"):
            load_config(parser.parse_args(["readout", "-c", str(path)]))

    def test_invalid_value_exits(self, config_file, capsys):
        path = config_file({"efficiency": 1.5})
        with pytest.raises(SystemExit) as exc_info:
            main(["readout", "-c", path])
        assert exc_info.value.code == 2
        assert "efficiency" in capsys.readouterr().err
