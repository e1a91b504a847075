"""Command-line front end: outputs, determinism, exit codes."""

import hashlib
import json
import math

import numpy as np
import pytest

from roadqueues import TandemConfig, solve_bisection, stationary_flow_form
from roadqueues.cli import main

SECTION1 = {"length_km": 0.1, "free_speed_kmh": 100.0,
            "jam_density_veh_per_km": 180.0, "model": "linear"}
SECTION2 = {"length_km": 0.1, "free_speed_kmh": 50.0,
            "jam_density_veh_per_km": 180.0, "model": "linear"}
EXP_SECTION = {"length_km": 0.1, "free_speed_kmh": 100.0,
               "jam_density_veh_per_km": 180.0,
               "model": {"exponential": {"beta": 19.0, "gamma": 1.0}}}


def write_config(tmp_path, name: str, doc: dict) -> str:
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def test_section_analyze_json_output(tmp_path, sec1):
    out = tmp_path / "analysis.json"
    cfg = write_config(tmp_path, "cfg.json", {
        "sections": [SECTION1], "lambda": 2000.0,
        "output": {"path": str(out), "format": "json"},
    })
    assert main(["section", "analyze", "--config", cfg]) == 0
    doc = json.loads(out.read_text())
    digest = hashlib.sha256(open(cfg, "rb").read()).hexdigest()
    assert doc["config_sha256"] == digest
    expected = stationary_flow_form(2000.0, sec1)
    assert np.max(np.abs(np.array(doc["distribution"]["probs"]) - expected.probs)) == 0.0
    assert doc["distribution"]["capacity"] == 18
    perf = doc["performance"]
    assert math.isclose(perf["throughput"], 2000.0 * (1.0 - expected.blocking),
                        rel_tol=1e-12)
    assert perf["expected_time_defined"] is True


def test_section_analyze_csv_output(tmp_path, sec1):
    out = tmp_path / "analysis.csv"
    cfg = write_config(tmp_path, "cfg.json", {
        "sections": [SECTION1], "lambda": 1000.0,
        "output": {"path": str(out), "format": "csv"},
    })
    assert main(["section", "analyze", "--config", cfg]) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("# config_sha256=")
    assert lines[1].startswith("# performance=")
    assert lines[2] == "n,prob"
    assert len(lines) == 3 + 19
    expected = stationary_flow_form(1000.0, sec1)
    n, prob = lines[3].split(",")
    assert n == "0" and prob == "%.12g" % expected.probs[0]
    perf = json.loads(lines[1].removeprefix("# performance="))
    assert math.isclose(perf["blocking_probability"], expected.blocking, rel_tol=1e-12)


def test_section_analyze_speed_and_flow_forms_agree(tmp_path):
    outs = []
    for form in ("flow", "speed"):
        out = tmp_path / f"{form}.json"
        cfg = write_config(tmp_path, f"{form}.cfg.json", {
            "sections": [SECTION1], "lambda": 1500.0, "form": form,
            "output": {"path": str(out), "format": "json"},
        })
        assert main(["section", "analyze", "--config", cfg]) == 0
        outs.append(json.loads(out.read_text())["distribution"]["probs"])
    assert np.max(np.abs(np.array(outs[0]) - np.array(outs[1]))) < 1e-12


def test_section_analyze_exponential_defaults_to_speed_form(tmp_path):
    out = tmp_path / "exp.json"
    cfg = write_config(tmp_path, "cfg.json", {
        "sections": [EXP_SECTION], "lambda": 1200.0,
        "output": {"path": str(out), "format": "json"},
    })
    assert main(["section", "analyze", "--config", cfg]) == 0
    doc = json.loads(out.read_text())
    assert doc["distribution"]["source"] == "speed_form"


def test_section_analyze_flow_form_needs_linear_model(tmp_path):
    out = tmp_path / "exp.json"
    cfg = write_config(tmp_path, "cfg.json", {
        "sections": [EXP_SECTION], "lambda": 1200.0, "form": "flow",
        "output": {"path": str(out), "format": "json"},
    })
    assert main(["section", "analyze", "--config", cfg]) == 1


def test_tandem_solve_bisection(tmp_path, sec1, sec2):
    out = tmp_path / "solution.json"
    cfg = write_config(tmp_path, "cfg.json", {
        "sections": [SECTION1, SECTION2], "lambda": 2000.0,
        "output": {"path": str(out), "format": "json"},
    })
    assert main(["tandem", "solve", "--config", cfg]) == 0
    doc = json.loads(out.read_text())
    reference = solve_bisection(TandemConfig(sec1, sec2, 2000.0))
    assert doc["mode"] == "bisection_root"
    assert math.isclose(doc["theta"], reference.transfer_rate, rel_tol=1e-12)
    assert math.isclose(doc["delta"], reference.exit_rate, rel_tol=1e-12)
    assert doc["adherence"] is None
    assert len(doc["joint"]) == 19


def test_tandem_solve_iteration_reports_oscillation(tmp_path):
    out = tmp_path / "solution.json"
    cfg = write_config(tmp_path, "cfg.json", {
        "sections": [SECTION1, SECTION2], "lambda": 3000.0,
        "solver": "iteration",
        "output": {"path": str(out), "format": "json"},
    })
    assert main(["tandem", "solve", "--config", cfg]) == 0
    doc = json.loads(out.read_text())
    assert doc["mode"] == "oscillatory_averaged"
    assert math.isclose(doc["theta"], 1839.1753939911746, rel_tol=1e-9)
    assert len(doc["adherence"]) == 2


def test_tandem_solve_nonconvergence_writes_trace_and_exits_3(tmp_path, capsys):
    out = tmp_path / "solution.json"
    cfg = write_config(tmp_path, "cfg.json", {
        "sections": [SECTION1, SECTION2], "lambda": 3000.0,
        "solver": "iteration", "max_iter": 3,
        "output": {"path": str(out), "format": "json"},
    })
    assert main(["tandem", "solve", "--config", cfg]) == 3
    assert not out.exists()
    trace_doc = json.loads((tmp_path / "solution.json.trace.json").read_text())
    assert trace_doc["lambda"] == 3000.0
    assert len(trace_doc["trace"]) == 4
    assert trace_doc["trace"][0] == 3000.0
    assert "non-convergence" in capsys.readouterr().err


def test_tandem_sweep_csv_layout_and_zero_rate_row(tmp_path):
    out = tmp_path / "sweep.csv"
    cfg = write_config(tmp_path, "cfg.json", {
        "sections": [SECTION1, SECTION2],
        "lambda_sweep": {"from": 0.0, "to": 400.0, "step": 100.0},
        "output": {"path": str(out), "format": "csv"},
    })
    assert main(["tandem", "sweep", "--config", cfg]) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("# config_sha256=")
    assert lines[1] == ("lambda,theta,delta,mode,p1_block,p2_block,"
                       "n1_mean,n2_mean,w1_hours,w2_hours,residual")
    assert len(lines) == 2 + 5
    # at rate zero the times are undefined, so their cells read nan
    assert lines[2] == "0,0,0,bisection_root,0,0,0,0,nan,nan,0"
    row400 = lines[6].split(",")
    assert row400[0] == "400"
    assert row400[3] == "bisection_root"
    assert float(row400[1]) == pytest.approx(400.0, rel=1e-3)


def test_tandem_sweep_output_is_byte_identical_across_runs(tmp_path):
    paths = []
    for tag in ("a", "b"):
        out = tmp_path / f"sweep_{tag}.csv"
        cfg = write_config(tmp_path, f"cfg_{tag}.json", {
            "sections": [SECTION1, SECTION2],
            "lambda_sweep": {"from": 500.0, "to": 2500.0, "step": 1000.0},
            "output": {"path": str(out), "format": "csv"},
        })
        assert main(["tandem", "sweep", "--config", cfg]) == 0
        paths.append(out)
    body_a = paths[0].read_bytes().split(b"\n", 1)[1]
    body_b = paths[1].read_bytes().split(b"\n", 1)[1]
    assert body_a == body_b  # identical below the config-hash line


def test_tandem_sweep_cell_formatting_is_12_significant_digits(tmp_path, sec1, sec2):
    out = tmp_path / "sweep.csv"
    cfg = write_config(tmp_path, "cfg.json", {
        "sections": [SECTION1, SECTION2],
        "lambda_sweep": {"from": 2000.0, "to": 2000.0, "step": 50.0},
        "output": {"path": str(out), "format": "csv"},
    })
    assert main(["tandem", "sweep", "--config", cfg]) == 0
    row = out.read_text().splitlines()[2].split(",")
    reference = solve_bisection(TandemConfig(sec1, sec2, 2000.0))
    assert row[1] == "%.12g" % reference.transfer_rate
    assert row[8] == "%.12g" % reference.report1.expected_time


def test_tandem_sweep_nonconvergence_writes_trace_and_exits_3(tmp_path, capsys):
    out = tmp_path / "sweep.csv"
    cfg = write_config(tmp_path, "cfg.json", {
        "sections": [SECTION1, SECTION2],
        "lambda_sweep": {"from": 3000.0, "to": 3000.0, "step": 100.0},
        "solver": "iteration", "max_iter": 3,
        "output": {"path": str(out), "format": "csv"},
    })
    assert main(["tandem", "sweep", "--config", cfg]) == 3
    assert not out.exists()
    trace_doc = json.loads((tmp_path / "sweep.csv.trace.json").read_text())
    assert trace_doc["lambda"] == 3000.0
    assert len(trace_doc["trace"]) == 4
    capsys.readouterr()


def test_oracle_compare(tmp_path):
    out = tmp_path / "compare.json"
    cfg = write_config(tmp_path, "cfg.json", {
        "sections": [SECTION1, SECTION2], "lambda": 1000.0,
        "output": {"path": str(out), "format": "json"},
    })
    assert main(["oracle", "compare", "--config", cfg]) == 0
    doc = json.loads(out.read_text())
    assert set(doc) == {"config_sha256", "lambda", "tv_p1", "tv_p2",
                        "theta_decomposition", "theta_joint"}
    assert doc["tv_p1"] < 1e-4
    assert math.isclose(doc["theta_joint"], 999.9926161481106, rel_tol=1e-9)


def test_oracle_compare_rejects_oversized_state_space(tmp_path, capsys):
    big = dict(SECTION1, length_km=2.0)
    out = tmp_path / "compare.json"
    cfg = write_config(tmp_path, "cfg.json", {
        "sections": [big, big], "lambda": 1000.0,
        "output": {"path": str(out), "format": "json"},
    })
    assert main(["oracle", "compare", "--config", cfg]) == 1
    assert "domain error" in capsys.readouterr().err


def test_tandem_solve_rejects_exponential_sections(tmp_path):
    out = tmp_path / "solution.json"
    cfg = write_config(tmp_path, "cfg.json", {
        "sections": [EXP_SECTION, SECTION2], "lambda": 1000.0,
        "output": {"path": str(out), "format": "json"},
    })
    assert main(["tandem", "solve", "--config", cfg]) == 1


@pytest.mark.parametrize("mutate", [
    lambda d: d.pop("lambda"),
    lambda d: d.update(lambda_sweep={"from": 0, "to": 100, "step": 10}),
    lambda d: d.update(extra_key=1),
    lambda d: d.update(output={"path": "x.json"}),
    lambda d: d.update(output={"path": "x.csv", "format": "csv"}),
    lambda d: d.update(solver="newton"),
    lambda d: d.update(tol=-1.0),
    lambda d: d.update(max_iter=0),
    lambda d: d.update(sections=[SECTION1]),
])
def test_tandem_solve_config_errors_exit_2(tmp_path, capsys, mutate):
    doc = {"sections": [SECTION1, SECTION2], "lambda": 1000.0,
           "output": {"path": str(tmp_path / "out.json"), "format": "json"}}
    mutate(doc)
    cfg = write_config(tmp_path, "cfg.json", doc)
    assert main(["tandem", "solve", "--config", cfg]) == 2
    assert "config error" in capsys.readouterr().err


def test_missing_and_malformed_config_files_exit_2(tmp_path, capsys):
    assert main(["tandem", "solve", "--config", str(tmp_path / "nope.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["tandem", "solve", "--config", str(bad)]) == 2
    array = tmp_path / "array.json"
    array.write_text("[1, 2]")
    assert main(["tandem", "solve", "--config", str(array)]) == 2
    capsys.readouterr()


@pytest.mark.parametrize("sweep", [
    {"from": 100.0, "to": 0.0, "step": 10.0},
    {"from": 0.0, "to": 100.0, "step": 0.0},
    {"from": -5.0, "to": 100.0, "step": 10.0},
    {"from": 0.0, "to": 100.0},
    {"from": 0.0, "to": 100.0, "step": 10.0, "count": 3},
])
def test_sweep_range_validation_exits_2(tmp_path, capsys, sweep):
    cfg = write_config(tmp_path, "cfg.json", {
        "sections": [SECTION1, SECTION2], "lambda_sweep": sweep,
        "output": {"path": str(tmp_path / "out.csv"), "format": "csv"},
    })
    assert main(["tandem", "sweep", "--config", cfg]) == 2
    capsys.readouterr()


def test_sweep_rejects_json_output_format(tmp_path, capsys):
    cfg = write_config(tmp_path, "cfg.json", {
        "sections": [SECTION1, SECTION2],
        "lambda_sweep": {"from": 0.0, "to": 100.0, "step": 50.0},
        "output": {"path": str(tmp_path / "out.json"), "format": "json"},
    })
    assert main(["tandem", "sweep", "--config", cfg]) == 2
    capsys.readouterr()


def test_unwritable_output_path_exits_2(tmp_path, capsys):
    cfg = write_config(tmp_path, "cfg.json", {
        "sections": [SECTION1], "lambda": 100.0,
        "output": {"path": str(tmp_path / "missing_dir" / "out.json"),
                   "format": "json"},
    })
    assert main(["section", "analyze", "--config", cfg]) == 2
    capsys.readouterr()
