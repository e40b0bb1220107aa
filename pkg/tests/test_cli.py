import json
import math
import xml.etree.ElementTree as ET

import pytest

from fp_qsdc import cli
from fp_qsdc.validate import CheckResult, ValidationReport

CONFIG = {
    "params": {"eta_det": 0.7, "dark_count": 8e-8},
    "source": {"intensity_max": 0.0895, "delta_x": 0.0490 * math.pi,
               "delta_z": 0.0546 * math.pi},
    "sweep": {"from_db": 1.0, "to_db": 5.0, "step_db": 2.0},
}


@pytest.fixture()
def config_path(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(CONFIG))
    return str(path)


def test_evaluate_writes_report_files(tmp_path, config_path, capsys):
    out = tmp_path / "run" / "report"
    code = cli.main(["evaluate", "--config", config_path, "--fast",
                     "--attenuation-db", "2.0", "--out", str(out)])
    assert code == 0
    payload = json.loads(out.with_suffix(".json").read_text())
    assert payload["rate"] > 0.0
    assert payload["manifest"] == "report.manifest.json"
    manifest = json.loads(out.with_suffix(".manifest.json").read_text())
    assert manifest["config_sha256"]
    csv_text = out.with_suffix(".csv").read_text().splitlines()
    assert csv_text[0].startswith("# manifest:")
    assert csv_text[1].startswith("attenuation_db,")
    assert len(csv_text) == 3
    assert "rate" in capsys.readouterr().out


def test_evaluate_rejects_invalid_interval(tmp_path, config_path, capsys):
    code = cli.main(["evaluate", "--config", config_path, "--delta-x", "0.0",
                     "--out", str(tmp_path / "r")])
    assert code == 1
    assert "delta_x must be positive" in capsys.readouterr().err


def test_evaluate_modes_both_parse(tmp_path, config_path):
    rates = {}
    for mode in ("full", "paper_diagonal"):
        out = tmp_path / mode
        assert cli.main(["evaluate", "--config", config_path, "--fast",
                         "--mode", mode, "--out", str(out)]) == 0
        rates[mode] = json.loads(out.with_suffix(".json").read_text())["rate"]
    assert rates["full"] > 0.0 and rates["paper_diagonal"] > 0.0


def test_evaluate_debug_dumps(tmp_path, config_path):
    out = tmp_path / "r"
    lp_path = tmp_path / "lps.txt"
    mat_path = tmp_path / "mats.json"
    assert cli.main(["evaluate", "--config", config_path, "--fast",
                     "--out", str(out), "--dump-lp", str(lp_path),
                     "--dump-matrices", str(mat_path)]) == 0
    assert "minimize" in lp_path.read_text()
    mats = json.loads(mat_path.read_text())
    entry = mats["Z/s/n=1"]
    assert entry[0][0][0] == pytest.approx(0.5, abs=0.2)  # [re, im] pairs
    assert entry[0][0][1] == 0.0


def test_sweep_csv_deterministic_and_monotone(tmp_path, config_path,
                                              monkeypatch):
    monkeypatch.setenv("FP_QSDC_JOBS", "1")
    out = tmp_path / "sweep"
    argv = ["sweep", "--config", config_path, "--fast", "--out", str(out)]
    assert cli.main(argv) == 0
    first = out.with_suffix(".csv").read_bytes()
    assert cli.main(argv) == 0
    assert out.with_suffix(".csv").read_bytes() == first
    lines = first.decode().splitlines()
    assert lines[1].startswith("attenuation_db")
    rates = [float(row.split(",")[5]) for row in lines[2:]]
    assert len(rates) == 3
    assert all(a >= b for a, b in zip(rates, rates[1:]))


def test_sweep_parallel_matches_serial(tmp_path, config_path, monkeypatch):
    out_a = tmp_path / "serial"
    out_b = tmp_path / "parallel"
    monkeypatch.setenv("FP_QSDC_JOBS", "1")
    assert cli.main(["sweep", "--config", config_path, "--fast", "--out",
                     str(out_a)]) == 0
    monkeypatch.setenv("FP_QSDC_JOBS", "2")
    assert cli.main(["sweep", "--config", config_path, "--fast", "--out",
                     str(out_b)]) == 0
    serial = out_a.with_suffix(".csv").read_text().splitlines()[1:]
    parallel = out_b.with_suffix(".csv").read_text().splitlines()[1:]
    assert serial == parallel


def test_sweep_plot_is_valid_svg(tmp_path, config_path, monkeypatch):
    monkeypatch.setenv("FP_QSDC_JOBS", "1")
    out = tmp_path / "sweep"
    assert cli.main(["sweep", "--config", config_path, "--fast", "--plot",
                     "--out", str(out)]) == 0
    root = ET.parse(out.with_suffix(".svg")).getroot()
    assert root.tag.endswith("svg")
    assert any(child.tag.endswith("polyline") for child in root.iter())


def test_sweep_optimize_writes_rows_and_traces(tmp_path, config_path,
                                               monkeypatch):
    import math as _math

    from fp_qsdc.optimizer import SearchSpace

    monkeypatch.setenv("FP_QSDC_JOBS", "1")
    tight = SearchSpace(i_range=(0.06, 0.14),
                        dx_range=(0.03 * _math.pi, 0.08 * _math.pi),
                        dz_range=(0.03 * _math.pi, 0.08 * _math.pi),
                        grid_shape=(3, 2, 2), nm_iterations=10)
    monkeypatch.setattr(cli, "SearchSpace", lambda: tight)
    out = tmp_path / "opt"
    trace_dir = tmp_path / "traces"
    assert cli.main(["sweep", "--config", config_path, "--fast", "--optimize",
                     "--from-db", "2.0", "--to-db", "2.5", "--step-db", "1.0",
                     "--out", str(out), "--trace-dir", str(trace_dir)]) == 0
    lines = out.with_suffix(".csv").read_text().splitlines()
    assert "opt_intensity" in lines[1]
    assert len(lines) == 3
    trace = (trace_dir / "trace_2db.csv").read_text().splitlines()
    assert trace[0] == "intensity,delta_x,delta_z,rate"
    assert len(trace) > 10


def test_sweep_rejects_empty_range(tmp_path, config_path, capsys):
    code = cli.main(["sweep", "--config", config_path, "--from-db", "3.0",
                     "--to-db", "2.0", "--out", str(tmp_path / "s")])
    assert code == 1


def test_validate_quick_passes(tmp_path, config_path):
    out = tmp_path / "checks.json"
    code = cli.main(["validate", "--config", config_path, "--quick",
                     "--out", str(out)])
    assert code == 0
    payload = json.loads(out.read_text())
    assert payload["all_passed"]
    assert {c["name"] for c in payload["checks"]} >= {
        "density_normalization", "click_closed_form_vs_simulation",
        "lp_soundness_vs_theory_yields", "eigensolver_residual"}


def test_validate_rejects_corrupt_config(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"params": {"eta_det": 1.5}}))
    assert cli.main(["validate", "--config", str(path)]) == 1
    assert "eta_det" in capsys.readouterr().err


def test_validate_failure_exit_code(monkeypatch, capsys):
    report = ValidationReport(checks=[CheckResult("doomed", False, "nope")])
    monkeypatch.setattr(cli, "run_validation",
                        lambda *a, **k: report)
    assert cli.main(["validate"]) == 2
    assert "doomed" in capsys.readouterr().err


def test_bench_runs_both_backends(capsys):
    assert cli.main(["bench", "--nodes", "16", "--repeats", "2"]) == 0
    out = capsys.readouterr().out
    assert "python" in out and "density_grid" in out
