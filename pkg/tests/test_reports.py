"""报告构建器、运行历史与事件轨迹"""

import io
import json

import pytest

from builders.report_builder import RATIO_COLUMNS, ReportBuilder
from sim.errors import ConfigError, FileFormatError
from utils.logger import RunLogger
from utils.trace import TraceWriter


def run_dict(name, cycles, energy, exit_rate=0.0):
    return {"name": name, "mean_cycles": cycles, "mean_energy_j": energy, "exit_rate": exit_rate}


def test_json_is_sorted_and_newline_terminated():
    text = ReportBuilder.to_json({"b": 1, "a": [1, 2]})
    assert text.endswith("\n")
    assert text.index('"a"') < text.index('"b"')


def test_metadata_is_separate():
    report = ReportBuilder.wrap({"x": 1}, "run demo")
    assert report["metadata"]["command"] == "run demo"
    assert report["metadata"]["tool"] == "heep-sim"
    assert ReportBuilder.strip_metadata(report) == {"x": 1}


def test_csv_formats_floats_and_blanks():
    text = ReportBuilder.csv_table(("a", "b", "c"), [{"a": 1 / 3, "b": None, "c": "x"}, {"a": 2}])
    assert text.splitlines() == ["a,b,c", "0.333333,,x", "2,,"]


def test_ratio_rows_against_baseline():
    runs = [run_dict("base", 400.0, 8.0), run_dict("fast", 100.0, 4.0, 0.5)]
    (row,) = ReportBuilder.ratio_rows(runs, "base")
    assert row["speedup"] == 4.0
    assert row["energy_gain"] == 2.0
    assert row["power_ratio"] == 2.0
    assert row["exit_rate"] == 0.5
    assert row["level"] == "kernel"
    assert set(row) == set(RATIO_COLUMNS)


def test_ratio_rows_without_baseline():
    runs = [run_dict("a", 1.0, 1.0)]
    assert ReportBuilder.ratio_rows(runs, None) == []
    assert ReportBuilder.ratio_rows(runs, "missing") == []


def test_error_reports():
    located = ReportBuilder.create_error_report(FileFormatError("bad", source="s.json", line=4), 1)
    assert located["error"] == "FileFormatError"
    assert located["line"] == 4
    assert located["source"] == "s.json"
    assert located["message"] == "bad"
    plain = ReportBuilder.create_error_report(ConfigError("nope"), 2)
    assert plain == {"status": "error", "exit_code": 2, "error": "ConfigError", "message": "nope"}
    assert ReportBuilder.create_error_report(RuntimeError("boom"), 2)["error"] == "InternalError"
    missing = ReportBuilder.create_error_report(FileNotFoundError(2, "No such file", "out/x.bin"), 2)
    assert missing["error"] == "IOError"
    assert missing["path"] == "out/x.bin"


def test_format_error_message_carries_location():
    error = FileFormatError("Input should be a valid integer", source="c.json", field="bank_count")
    assert str(error) == "c.json [bank_count]: Input should be a valid integer"


def test_run_logger_appends(tmp_path):
    path = tmp_path / "out" / "runs_log.json"
    run_logger = RunLogger(path)
    run_logger.log("demo", run_dict("a", 10.0, 1.0))
    run_logger.log("demo", run_dict("b", 5.0, 0.5))
    history = json.loads(path.read_text(encoding="utf-8"))
    assert [entry["run"] for entry in history] == ["a", "b"]
    assert all("timestamp" in entry for entry in history)


def test_run_logger_recovers_from_a_corrupt_file(tmp_path):
    path = tmp_path / "runs_log.json"
    path.write_text("{not json", encoding="utf-8")
    RunLogger(path).log("demo", run_dict("a", 10.0, 1.0))
    assert len(json.loads(path.read_text(encoding="utf-8"))) == 1


def test_trace_writer_stream():
    stream = io.StringIO()
    writer = TraceWriter(stream)
    writer.write(3, "bus", "BusGrant(m0)")
    writer.write(4, "cpu", "Custom(step)")
    assert writer.rows == 2
    assert stream.getvalue() == "cycle,component,payload\n3,bus,BusGrant(m0)\n4,cpu,Custom(step)\n"


def test_trace_writer_file(tmp_path):
    path = tmp_path / "nested" / "trace.csv"
    with TraceWriter.open(path) as writer:
        writer.write(0, "timer", "TimerExpire(timer)")
    assert path.read_text(encoding="utf-8").splitlines() == ["cycle,component,payload", "0,timer,TimerExpire(timer)"]


@pytest.mark.parametrize("value, cell", [(1.0, "1"), (2.5e-9, "2.5e-09"), (True, "True"), ("kernel", "kernel")])
def test_cell_rendering(value, cell):
    assert ReportBuilder._cell(value) == cell
