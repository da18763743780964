"""Tests for sample ingestion, external invocation, reports, configuration and the CLI."""

import io
import json
import sys

import numpy as np
import pandas as pd
import pytest

from src.cli import main
from src.errors import ConfigurationError, InvocationError, SampleFormatError
from src.schema import (
    CellFailure,
    ComparisonReport,
    EvaluationReport,
    ExperimentReport,
    SessionReport,
    StrategyAggregate,
    Termination,
    Verdict,
)
from src.utils.config_loader import (
    Settings,
    deep_merge,
    load_experiment_config,
    load_settings,
    resolve_run_config,
)
from src.utils.ingest import FileSource, parse_samples, write_samples
from src.utils.invoker import ExternalCommandSource, invoke_external
from src.utils.reports import emit_report, ensure_writable, parse_report, write_report

PYTHON = sys.executable


def _experiment(technique: str = "scope1", workload: str = "warm", stop: int = 120) -> ExperimentReport:
    return ExperimentReport(
        technique=technique,
        workload=workload,
        seed=3,
        stop_location=stop,
        terminated_by=Termination.CRITERION,
        accuracy=96.5,
        reliability={0.25: True, 0.5: True, 0.75: False, 0.9: True},
        total_repetitions=stop,
    )


# --- ingestion -----------------------------------------------------------------------------


def test_parse_plain_csv(tmp_path):
    path = tmp_path / "trace.csv"
    path.write_text("12.5\n13.0\n")
    assert parse_samples(path).tolist() == [12.5, 13.0]


def test_parse_csv_with_header(tmp_path):
    path = tmp_path / "trace.csv"
    path.write_text("latency_ms\n12.5\n")
    assert parse_samples(path).tolist() == [12.5]


def test_parse_indexed_csv(tmp_path):
    path = tmp_path / "trace.csv"
    path.write_text("index,latency_ms\n0,4.0\n1,3.0\n2,5.5\n")
    assert parse_samples(path).tolist() == [4.0, 3.0, 5.5]


def test_parse_rejects_negative_latency(tmp_path):
    path = tmp_path / "trace.csv"
    path.write_text("12.5\n-3\n")
    with pytest.raises(SampleFormatError, match="line 2") as excinfo:
        parse_samples(path)
    assert excinfo.value.line_number == 2
    assert excinfo.value.content == "-3"


@pytest.mark.parametrize("bad", ["abc", "nan", "inf", "0", "1,2,3"])
def test_parse_rejects_malformed_records(tmp_path, bad):
    path = tmp_path / "trace.csv"
    path.write_text(f"1.0\n{bad}\n")
    with pytest.raises(SampleFormatError) as excinfo:
        parse_samples(path)
    assert excinfo.value.line_number == 2


def test_parse_empty_and_missing_files(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(SampleFormatError):
        parse_samples(empty)
    with pytest.raises(FileNotFoundError):
        parse_samples(tmp_path / "missing.csv")


def test_parse_header_only_file(tmp_path):
    path = tmp_path / "header_only.csv"
    path.write_text("latency_ms\n")
    with pytest.raises(SampleFormatError):
        parse_samples(path)


def test_parse_jsonl(tmp_path):
    path = tmp_path / "trace.jsonl"
    path.write_text('{"latency_ms": 7.5}\n{"latency_ms": 8, "region": "eu"}\n')
    assert parse_samples(path, "jsonl").tolist() == [7.5, 8.0]

    path.write_text('{"latency_ms": 7.5}\n{"duration": 8}\n')
    with pytest.raises(SampleFormatError, match="line 2"):
        parse_samples(path, "jsonl")


def test_write_then_parse_preserves_order_and_count(tmp_path):
    values = np.random.default_rng(1).lognormal(3.0, 0.4, 257)
    write_samples(values, tmp_path / "trace.csv")
    assert np.array_equal(parse_samples(tmp_path / "trace.csv"), values)
    write_samples(values, tmp_path / "trace.jsonl", "jsonl")
    assert np.allclose(parse_samples(tmp_path / "trace.jsonl", "jsonl"), values, rtol=1e-12)


def test_file_source_serves_batches(tmp_path):
    path = tmp_path / "trace.csv"
    path.write_text("\n".join(str(v) for v in range(1, 8)) + "\n")
    source = FileSource(path)
    assert len(source) == 7
    assert source.next_batch(5) == [1.0, 2.0, 3.0, 4.0, 5.0]
    assert source.next_batch(5) == [6.0, 7.0]
    assert source.next_batch(5) == []


# --- external invocation ---------------------------------------------------------------------


def test_invoke_external_times_each_run():
    command = f'"{PYTHON}" -c "import time; time.sleep(0.05)"'
    latencies = invoke_external(command, 3, timeout=30)
    assert len(latencies) == 3
    assert all(latency >= 50.0 for latency in latencies)


def test_invoke_external_non_zero_exit():
    command = f'"{PYTHON}" -c "import sys; sys.stderr.write(\'boom\'); sys.exit(1)"'
    with pytest.raises(InvocationError) as excinfo:
        invoke_external(command, 2)
    assert excinfo.value.returncode == 1
    assert "boom" in excinfo.value.stderr
    assert excinfo.value.completed == 0


def test_invoke_external_spawn_failure_and_timeout():
    with pytest.raises(InvocationError):
        invoke_external("definitely-not-a-command-4821", 1)
    with pytest.raises(InvocationError, match="timed out"):
        invoke_external(f'"{PYTHON}" -c "import time; time.sleep(5)"', 1, timeout=0.2)


def test_invoke_external_unrunnable_binary(tmp_path):
    garbage = tmp_path / "not-a-program"
    garbage.write_bytes(b"\x00\x01\x02 not an executable format\n")
    garbage.chmod(0o755)
    with pytest.raises(InvocationError, match="cannot spawn") as excinfo:
        invoke_external(str(garbage), 3)
    assert excinfo.value.completed == 0

    locked = tmp_path / "locked.sh"
    locked.write_text("#!/bin/sh\nexit 0\n")
    locked.chmod(0o644)
    with pytest.raises(InvocationError, match="cannot spawn"):
        invoke_external(str(locked), 1)


def test_invoke_external_rejects_empty_batch():
    with pytest.raises(ConfigurationError) as excinfo:
        invoke_external("true", 0)
    assert excinfo.value.field == "batch"


def test_external_command_source():
    source = ExternalCommandSource(f'"{PYTHON}" -c "pass"')
    assert len(source.next_batch(2)) == 2


# --- reports ------------------------------------------------------------------------------------


def test_experiment_report_json_round_trip():
    report = _experiment()
    payload = emit_report(report, "json")
    assert json.loads(payload)["schema_version"] == 1
    assert parse_report(payload) == report


def test_comparison_report_csv_rows():
    cells = [_experiment(t, w) for w in ("warm", "cold") for t in ("scope1", "fixed:500")]
    report = ComparisonReport(
        cells=cells,
        aggregates=[StrategyAggregate(technique="scope1", experiments=2, mean_accuracy=96.5, total_repetitions=240)],
        failures=[CellFailure(workload="ar1", technique="metior", seed=1, error="boom")],
    )
    frame = pd.read_csv(io.StringIO(emit_report(report, "csv").decode()))
    assert len(frame) == 4
    assert list(frame["workload"]) == ["warm", "warm", "cold", "cold"]
    assert parse_report(emit_report(report)) == report


def test_text_report_lists_stop_location_and_reliability():
    text = emit_report(_experiment(stop=135), "text").decode()
    assert "135" in text
    for percent in (25, 50, 75, 90):
        assert f"p{percent}" in text
    assert text.count("Reliable at") == 4


def test_session_and_evaluation_reports_render():
    session = SessionReport(
        technique="scope1",
        stop_location=10,
        terminated_by=Termination.CRITERION,
        verdict=Verdict.STOP,
        rounds=2,
        percentiles={0.5: 12.0},
    )
    evaluation = EvaluationReport(
        samples=100, ground_truth_size=1000, accuracy=93.0, reliability={0.5: True}
    )
    for report in (session, evaluation):
        for fmt in ("json", "csv", "text"):
            assert emit_report(report, fmt)
        assert parse_report(emit_report(report)) == report


def test_ensure_writable(tmp_path):
    assert ensure_writable(tmp_path / "report.json") == tmp_path / "report.json"
    with pytest.raises(FileNotFoundError):
        ensure_writable(tmp_path / "missing" / "report.json")
    with pytest.raises(IsADirectoryError):
        ensure_writable(tmp_path)


def test_write_report(tmp_path):
    path = write_report(_experiment(), tmp_path / "out.json")
    assert parse_report(path.read_bytes()).stop_location == 120


# --- configuration --------------------------------------------------------------------------------


def test_deep_merge_prefers_override():
    merged = deep_merge({"a": {"b": 1, "c": 2}, "d": 3}, {"a": {"b": 5}, "d": None})
    assert merged == {"a": {"b": 5, "c": 2}, "d": 3}


def test_settings_from_environment(monkeypatch):
    monkeypatch.setenv("SCOPE_RESAMPLES", "250")
    monkeypatch.setenv("SCOPE_MAX_SAMPLES", "600")
    settings = load_settings()
    assert settings.resamples == 250
    config = resolve_run_config("compare", 1, flags={"workloads": ["warm"], "techniques": ["scope1"]}, settings=settings)
    assert config.harness.test.bootstrap.resamples == 250
    assert config.harness.confirm.max_samples == 600


def test_settings_reject_bad_values(monkeypatch):
    monkeypatch.setenv("SCOPE_WORKERS", "zero")
    with pytest.raises(ConfigurationError) as excinfo:
        load_settings()
    assert excinfo.value.field == "workers"


def test_precedence_file_then_flags(tmp_path):
    path = tmp_path / "experiment.json"
    path.write_text(
        json.dumps(
            {
                "seed": 9,
                "test": {"error_margin": 0.02, "run_interval": 4},
                "baselines": {"pt4cloud": {"objective_probability": 0.95}},
                "workloads": ["warm", {"name": "custom", "model": {"kind": "gamma", "shape": 3, "scale": 2}}],
                "techniques": ["scope1", "pt4cloud"],
            }
        )
    )
    data = load_experiment_config(path)
    config = resolve_run_config(
        "compare", 1, data, flags={"harness": {"test": {"error_margin": 0.03}}}, settings=Settings(max_samples=800)
    )
    assert config.seed == 9
    assert config.seeds == [9]
    assert config.harness.test.error_margin == 0.03
    assert config.harness.test.run_interval == 4
    assert config.harness.test.max_samples == 800
    assert config.harness.pt4cloud.objective_probability == 0.95
    assert [w.name for w in config.workloads] == ["warm", "custom"]


def test_invalid_config_names_the_field(tmp_path):
    with pytest.raises(ConfigurationError) as excinfo:
        resolve_run_config("test", 1, flags={"harness": {"test": {"error_margin": 2.0}}, "source": {"kind": "preset", "value": "warm"}}, settings=Settings())
    assert "error_margin" in excinfo.value.field

    with pytest.raises(ConfigurationError):
        resolve_run_config("test", 1, settings=Settings())

    bad = tmp_path / "bad.json"
    bad.write_text("[1, 2]")
    with pytest.raises(ConfigurationError):
        load_experiment_config(bad)


# --- command line -------------------------------------------------------------------------------


def test_cli_test_on_constant_trace(tmp_path, capsys):
    trace = tmp_path / "trace.csv"
    trace.write_text("\n".join(["20.0"] * 40) + "\n")
    out = tmp_path / "report.json"
    assert main(["test", "--input", str(trace), "--seed", "1", "--out", str(out)]) == 0
    report = parse_report(out.read_bytes())
    assert report.stop_location == 10
    assert report.terminated_by == Termination.CRITERION
    assert report.config["seed"] == 1


def test_cli_test_preset_text_output(capsys):
    code = main(["test", "--preset", "warm", "--seed", "4", "--r", "0.05", "--format", "text"])
    captured = capsys.readouterr()
    assert code == 0
    assert "Stop location" in captured.out


def test_cli_prints_chosen_seed(tmp_path, capsys):
    trace = tmp_path / "trace.csv"
    trace.write_text("5.0\n5.0\n5.0\n")
    assert main(["test", "--input", str(trace)]) == 0
    captured = capsys.readouterr()
    assert "--seed" in captured.err
    assert json.loads(captured.out)["terminated_by"] == "source_exhausted"


def test_cli_operational_failures_exit_non_zero(tmp_path, capsys):
    assert main(["test", "--input", str(tmp_path / "missing.csv"), "--seed", "1"]) == 1
    bad = tmp_path / "bad.csv"
    bad.write_text("1.0\n-4\n")
    assert main(["test", "--input", str(bad), "--seed", "1"]) == 1
    assert main(["test", "--preset", "warm", "--seed", "1", "--method", "bogus"]) == 1
    assert main(["test", "--preset", "warm", "--seed", "1", "--out", str(tmp_path / "nope" / "r.json")]) == 1
    assert "❌ Error" in capsys.readouterr().err


def test_cli_cap_reached_is_still_success(tmp_path):
    trace = tmp_path / "trace.csv"
    trace.write_text("\n".join(str(v) for v in [10.0, 500.0] * 20) + "\n")
    out = tmp_path / "report.json"
    assert main(["test", "--input", str(trace), "--seed", "1", "--max-samples", "20", "--out", str(out)]) == 0
    assert parse_report(out.read_bytes()).terminated_by == Termination.CAP


def test_cli_simulate_then_evaluate(tmp_path):
    trace = tmp_path / "warm.csv"
    assert main(["simulate", "--preset", "warm", "--count", "1000", "--seed", "5", "--out", str(trace)]) == 0
    assert len(parse_samples(trace)) == 1000

    out = tmp_path / "evaluation.json"
    args = ["evaluate", "--input", str(trace), "--ground-truth", str(trace), "--seed", "5", "--out", str(out)]
    assert main(args) == 0
    report = parse_report(out.read_bytes())
    assert report.accuracy == 100.0
    assert all(report.reliability.values())


def test_cli_evaluate_reads_jsonl_ground_truth(tmp_path):
    truth = tmp_path / "truth.jsonl"
    trace = tmp_path / "trace.jsonl"
    assert main(["simulate", "--preset", "cold", "--count", "1000", "--seed", "3", "--format", "jsonl", "--out", str(truth)]) == 0
    assert main(["simulate", "--preset", "cold", "--count", "300", "--seed", "3", "--format", "jsonl", "--out", str(trace)]) == 0

    out = tmp_path / "evaluation.json"
    args = [
        "evaluate",
        "--input", str(trace),
        "--ground-truth", str(truth),
        "--input-format", "jsonl",
        "--seed", "3",
        "--out", str(out),
    ]
    assert main(args) == 0
    report = parse_report(out.read_bytes())
    assert report.ground_truth_size == 1000
    assert report.samples == 300


def test_cli_evaluate_against_preset(tmp_path):
    trace = tmp_path / "warm.csv"
    main(["simulate", "--preset", "warm", "--count", "400", "--seed", "5", "--out", str(trace)])
    out = tmp_path / "evaluation.json"
    assert main(["evaluate", "--input", str(trace), "--preset", "warm", "--gt-seed", "8", "--out", str(out)]) == 0
    assert parse_report(out.read_bytes()).ground_truth_size == 1000


def test_cli_compare_csv(tmp_path):
    out = tmp_path / "compare.csv"
    args = [
        "compare",
        "--workload", "warm",
        "--workload", "cold",
        "--technique", "fixed:50",
        "--technique", "fixed:100",
        "--seeds", "1",
        "--seed", "1",
        "--format", "csv",
        "--out", str(out),
        "--tables", str(tmp_path / "tables"),
    ]
    assert main(args) == 0
    assert len(pd.read_csv(out)) == 4
    assert (tmp_path / "tables" / "aggregates.csv").exists()


def test_cli_compare_replay_stream(tmp_path):
    out = tmp_path / "compare.json"
    args = [
        "compare",
        "--workload", "warm",
        "--technique", "fixed:1000",
        "--seeds", "2",
        "--seed", "1",
        "--session-stream", "replay",
        "--out", str(out),
    ]
    assert main(args) == 0
    report = parse_report(out.read_bytes())
    assert report.config["harness"]["session_stream"] == "replay"
    assert report.cells[0].accuracy == 100.0


def test_cli_sweep_json(tmp_path):
    out = tmp_path / "sweep.json"
    args = [
        "sweep",
        "--workload", "warm",
        "--technique", "scope1",
        "--param", "error_margin",
        "--values", "0.05", "0.03",
        "--seed", "2",
        "--out", str(out),
    ]
    assert main(args) == 0
    report = parse_report(out.read_bytes())
    assert report.parameter == "error_margin"
    assert [point.value for point in report.points] == [0.05, 0.03]
