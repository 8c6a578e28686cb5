"""命令行：退出码、报告与确定性"""

import json

import pytest

from builders.report_builder import ReportBuilder
from energy.models import DynamicCostTable
from heep_sim import EXIT_INVALID, EXIT_OK, EXIT_SIM_ERROR, build_parser, main


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, json.loads(out) if out.strip() else None


def stripped(path):
    return ReportBuilder.strip_metadata(json.loads(path.read_text(encoding="utf-8")))


def test_validate_good_config(capsys, fixtures_dir):
    code, report = run_cli(capsys, "validate", str(fixtures_dir / "default.json"))
    assert code == EXIT_OK
    assert report["status"] == "valid"
    assert report["errors"] == []


def test_validate_bad_config(capsys, fixtures_dir):
    code, report = run_cli(capsys, "validate", str(fixtures_dir / "bad-bank-size.json"))
    assert code == EXIT_INVALID
    assert report["status"] == "invalid"
    assert report["errors"][0]["field"] == "bank_size_bytes"


def test_missing_file_is_a_format_error(capsys, tmp_path):
    code, report = run_cli(capsys, "validate", str(tmp_path / "nope.json"))
    assert code == EXIT_INVALID
    assert report["error"] == "FileFormatError"
    assert report["message"] == "file not found"


def test_report_static(capsys, fixtures_dir, tmp_path):
    output = tmp_path / "static.json"
    code, report = run_cli(capsys, "report-static", str(fixtures_dir / "default.json"), "--map", "-o", str(output))
    assert code == EXIT_OK
    assert report["area"]["total_mm2"] == pytest.approx(0.15)
    assert report["leakage"]["total_uw"] == pytest.approx(29.0)
    assert len(report["address_map"]["regions"]) == 9
    assert report["metadata"]["tool"] == "heep-sim"
    assert stripped(output) == ReportBuilder.strip_metadata(report)


def test_unwritable_output_is_a_sim_error(capsys, fixtures_dir, tmp_path):
    blocker = tmp_path / "blocker"
    blocker.write_text("not a directory")
    code = main(["report-static", str(fixtures_dir / "default.json"), "-o", str(blocker / "static.json")])
    captured = capsys.readouterr()
    assert code == EXIT_SIM_ERROR
    report = json.loads(captured.out)
    assert report["error"] == "IOError"
    assert report["path"] == str(blocker)
    assert "[ERROR]" in captured.err


def test_report_static_refuses_invalid_config(capsys, fixtures_dir):
    code, report = run_cli(capsys, "report-static", str(fixtures_dir / "bad-bank-size.json"))
    assert code == EXIT_INVALID
    assert report["exit_code"] == EXIT_INVALID
    assert report["errors"][0]["field"] == "bank_size_bytes"


def test_platform_demo(capsys, fixtures_dir, tmp_path):
    code, summary = run_cli(capsys, "run", str(fixtures_dir / "scenarios" / "platform-demo.json"), "-o", str(tmp_path))
    assert code == EXIT_OK
    assert summary["scenario"] == "platform-demo"

    platform = stripped(tmp_path / "report.json")["platform"]
    status = platform["status"]
    assert status["cpu"]["finished"]
    assert status["cpu"]["interrupts"] == ["dma0", "accel0", "timer", "external"]
    assert [a["status"] for a in status["cpu"]["accesses"]] == ["ok", "ok", "ok", "slave-error"]
    assert [a["value"] for a in status["cpu"]["accesses"][:3]] == [1, 16, 4]
    assert status["dma"][0]["status"] == "Done"
    assert status["dma"][0]["elements"] == 16
    assert status["accelerators"][0]["completed"] == 1
    assert status["always_on_held"] is True
    assert status["power"]["peripheral"] == "Off"
    assert status["bus"]["pending"] == 0
    assert platform["energy"]["total_j"] > 0

    window = (tmp_path / "bank1-window.bin").read_bytes()
    words = [int.from_bytes(window[i:i + 4], "little") for i in range(0, 64, 4)]
    assert words == [3 * k + 1 for k in range(1, 17)]


def test_benchmark_scenario_writes_ratios(capsys, fixtures_dir, tmp_path):
    code, summary = run_cli(capsys, "run", str(fixtures_dir / "scenarios" / "cnn-ee.json"), "-o", str(tmp_path))
    assert code == EXIT_OK
    ratios = {row["run"]: row for row in summary["ratios"]}
    assert set(ratios) == {"cpu-ee", "offload", "offload-ee", "cpu-ee-sampled", "cpu-ee-entropy"}
    assert ratios["cpu-ee"]["speedup"] == pytest.approx(2.1, rel=0.01)
    assert ratios["offload-ee"]["speedup"] == pytest.approx(7.3, rel=0.10)
    assert all(row["level"] == "kernel" for row in ratios.values())
    csv_lines = (tmp_path / "ratios.csv").read_text(encoding="utf-8").splitlines()
    assert csv_lines[0] == "run,baseline,speedup,energy_gain,power_ratio,exit_rate,level"
    assert len(csv_lines) == 6
    assert (tmp_path / "cpu-ee.json").is_file()
    history = json.loads((tmp_path / "runs_log.json").read_text(encoding="utf-8"))
    assert [entry["run"] for entry in history][:2] == ["cpu-noee", "cpu-ee"]


def test_reports_and_traces_are_deterministic(capsys, fixtures_dir, tmp_path):
    scenario = str(fixtures_dir / "scenarios" / "transformer-ee.json")
    first, second = tmp_path / "a", tmp_path / "b"
    assert main(["run", scenario, "--trace", "-o", str(first)]) == EXIT_OK
    assert main(["run", scenario, "--trace", "-o", str(second)]) == EXIT_OK
    capsys.readouterr()
    assert stripped(first / "report.json") == stripped(second / "report.json")
    trace = (first / "transformer-ee-trace.csv").read_bytes()
    assert trace == (second / "transformer-ee-trace.csv").read_bytes()
    assert trace.startswith(b"cycle,component,payload\n")


def test_baseline_from_a_previous_run(capsys, fixtures_dir, tmp_path):
    assert main(["run", str(fixtures_dir / "scenarios" / "transformer-ee.json"), "-o", str(tmp_path)]) == EXIT_OK
    scenario = tmp_path / "follow-up.json"
    scenario.write_text(
        json.dumps(
            {
                "name": "follow-up",
                "config": str(fixtures_dir / "xheep-carus.json"),
                "directives": [
                    {
                        "op": "run-benchmark",
                        "name": "cpu-ee-half",
                        "model": "transformer-ee",
                        "policy": {"mode": "fixed-rate", "p": 0.5},
                    }
                ],
            }
        ),
        encoding="utf-8",
    )
    capsys.readouterr()
    code, summary = run_cli(capsys, "run", str(scenario), "--baseline", "cpu-noee", "-o", str(tmp_path))
    assert code == EXIT_OK
    (row,) = summary["ratios"]
    assert row["run"] == "cpu-ee-half"
    assert row["speedup"] > 1.0


def test_missing_baseline_is_a_simulation_error(capsys, fixtures_dir, tmp_path):
    code, report = run_cli(
        capsys, "run", str(fixtures_dir / "scenarios" / "cnn-ee.json"), "--baseline", "ghost", "-o", str(tmp_path)
    )
    assert code == EXIT_SIM_ERROR
    assert report["error"] == "ConfigError"


def test_runtime_failure_exits_with_two(capsys, fixtures_dir, tmp_path):
    scenario = tmp_path / "dead-accelerator.json"
    scenario.write_text(
        json.dumps(
            {
                "name": "dead-accelerator",
                "config": str(fixtures_dir / "xheep-carus.json"),
                "directives": [
                    {"op": "power", "domain": "accel0", "state": "Off", "wait": True},
                    {"op": "offload", "slot": 0, "element_count": 8},
                ],
            }
        ),
        encoding="utf-8",
    )
    code, report = run_cli(capsys, "run", str(scenario), "-o", str(tmp_path / "out"))
    assert code == EXIT_SIM_ERROR
    assert report["error"] == "PoweredDown"


def test_invalid_scenario_reference_exits_with_one(capsys, tmp_path):
    scenario = tmp_path / "bad.json"
    scenario.write_text(
        json.dumps({"name": "bad", "directives": [{"op": "power", "domain": "bank5", "state": "Off"}]}),
        encoding="utf-8",
    )
    code, report = run_cli(capsys, "run", str(scenario), "-o", str(tmp_path / "out"))
    assert code == EXIT_INVALID
    assert report["errors"][0]["field"] == "directives.0.domain"


def test_sweep_is_independent_of_job_count(capsys, fixtures_dir, tmp_path):
    spec = str(fixtures_dir / "sweeps" / "entropy-threshold.json")
    assert main(["sweep", spec, "-o", str(tmp_path / "serial")]) == EXIT_OK
    assert main(["sweep", spec, "--jobs", "2", "-o", str(tmp_path / "parallel")]) == EXIT_OK
    capsys.readouterr()
    name = "transformer-entropy-threshold"
    serial = stripped(tmp_path / "serial" / f"{name}.json")
    assert serial == stripped(tmp_path / "parallel" / f"{name}.json")
    rates = [row["exit_rate"] for row in serial["rows"]]
    assert rates == sorted(rates)
    lines = (tmp_path / "serial" / f"{name}.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0] == "value,exit_rate,mean_cycles,mean_energy_j,speedup,energy_gain,power_ratio"
    assert len(lines) == 6


def test_calibrate_writes_cost_table(capsys, fixtures_dir, tmp_path):
    code, report = run_cli(capsys, "calibrate", str(fixtures_dir / "calibration-targets.json"), "-o", str(tmp_path))
    assert code == EXIT_OK
    assert report["worst_residual"] <= 0.10
    costs = DynamicCostTable.model_validate_json((tmp_path / "cost-table.json").read_text(encoding="utf-8"))
    assert costs.source == "calibrate"
    assert (tmp_path / "calibration.json").is_file()


def test_verbosity_flag_is_global():
    args = build_parser().parse_args(["-vv", "validate", "x.json"])
    assert args.verbose == 2
    assert args.command == "validate"
