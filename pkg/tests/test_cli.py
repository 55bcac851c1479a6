import orjson
import pytest
from typer.testing import CliRunner

from leakbench import app
from shared.logger import configure_logging

runner = CliRunner()

QUICK = ["--samples", "16", "--trials", "20", "--noise", "0", "--jobs", "1"]


def _run(out, *args):
    return runner.invoke(app, ["run", "--platform", "skylake", "--protocol", "bhb", "--out", str(out), *QUICK, *args])


def test_run_writes_every_artifact(tmp_path):
    result = _run(tmp_path)
    assert result.exit_code == 0, result.output
    names = sorted(p.name for p in tmp_path.iterdir() if p.is_file())
    assert names == [
        "skylake-bhb-none.csv",
        "skylake-bhb-none.curve.tiff",
        "skylake-bhb-none.heatmap.tiff",
        "skylake-bhb-none.json",
    ]
    meta = orjson.loads((tmp_path / "meta" / "skylake-bhb-none.heatmap.json").read_bytes())
    assert meta
    report = orjson.loads((tmp_path / "skylake-bhb-none.json").read_bytes())
    assert report["verdict"] == "channel_present"
    assert report["symbol_rate"] == 500.0


def test_same_seed_same_bytes(tmp_path):
    for sub in ("a", "b"):
        assert _run(tmp_path / sub, "--format", "csv,json", "--seed", "3").exit_code == 0
    for suffix in ("csv", "json"):
        a = (tmp_path / "a" / f"skylake-bhb-none.{suffix}").read_bytes()
        b = (tmp_path / "b" / f"skylake-bhb-none.{suffix}").read_bytes()
        assert a == b


def test_analyze_reproduces_run_report(tmp_path):
    assert _run(tmp_path, "--format", "csv,json").exit_code == 0
    out = tmp_path / "again.json"
    result = runner.invoke(app, ["analyze", str(tmp_path / "skylake-bhb-none.csv"), "--trials", "20", "--out", str(out)])
    assert result.exit_code == 0, result.output
    assert out.read_bytes() == (tmp_path / "skylake-bhb-none.json").read_bytes()


def test_analyze_prints_report(tmp_path):
    csv = tmp_path / "trace.csv"
    csv.write_text("input,output\n0,10\n0,10\n1,20\n1,20\n")
    result = runner.invoke(app, ["analyze", str(csv), "--trials", "10", "--rate", "500"])
    assert result.exit_code == 0, result.output
    report = orjson.loads(result.stdout)
    assert report["capacity_bits"] == pytest.approx(1.0)
    assert report["bandwidth_bps"] == pytest.approx(500.0)
    assert report["protocol"] == "external"


def test_analyze_rejects_malformed_csv(tmp_path):
    csv = tmp_path / "bad.csv"
    csv.write_text("input,output\n0,fast\n")
    assert runner.invoke(app, ["analyze", str(csv)]).exit_code == 1


def test_manifest_run(tmp_path):
    plan = tmp_path / "plan.ini"
    plan.write_text(
        "[DEFAULT]\nsamples = 2\nnoise = 0\n\n"
        "[sky-l1d]\nplatform = skylake\nprotocol = l1d\ninputs = 0,64\n\n"
        "[a9-bhb]\nplatform = a9\nprotocol = bhb\npolicy = full\n"
    )
    result = runner.invoke(
        app, ["run", "--manifest", str(plan), "--out", str(tmp_path / "r"), "--format", "json", "--trials", "20"]
    )
    assert result.exit_code == 0, result.output
    assert sorted(p.name for p in (tmp_path / "r").glob("*.json")) == ["a9-bhb.json", "sky-l1d.json"]


@pytest.mark.parametrize(
    "args",
    [
        ["run", "--platform", "skylake", "--protocol", "l3"],
        ["run", "--protocol", "l1d"],
        ["run", "--platform", "skylake", "--protocol", "l1d", "--format", "pdf"],
        ["run", "--platform", "skylake", "--protocol", "l1d", "--inputs", "x"],
    ],
)
def test_bad_run_arguments(args):
    assert runner.invoke(app, args).exit_code == 2


def test_failed_experiment_exits_nonzero(tmp_path):
    result = runner.invoke(
        app, ["run", "--platform", "pentium", "--protocol", "l1d", "--out", str(tmp_path), "--format", "csv"]
    )
    assert result.exit_code == 1


def test_unexpected_failure_is_listed_and_others_still_written(tmp_path):
    plan = tmp_path / "plan.ini"
    plan.write_text(
        "[DEFAULT]\nsamples = 2\nnoise = 0\nplatform = skylake\nprotocol = bhb\n\n"
        "[good]\nseed = 1\n\n"
        "[bad]\nseed = 2\n"
    )
    out = tmp_path / "r"
    (out / "bad.csv").mkdir(parents=True)
    result = runner.invoke(app, ["run", "--manifest", str(plan), "--out", str(out), "--format", "csv", "--jobs", "1"])
    assert result.exit_code == 1
    assert (out / "good.csv").is_file()
    assert "1 of 2 experiments failed" in result.output
    assert "IsADirectoryError" in result.output


def test_explicit_format_overrides_manifest_even_when_default(tmp_path):
    plan = tmp_path / "plan.ini"
    plan.write_text("[DEFAULT]\nsamples = 2\nnoise = 0\nformat = json\n\n[sky]\nplatform = skylake\nprotocol = bhb\n")
    out = tmp_path / "r"
    result = runner.invoke(
        app,
        ["run", "--manifest", str(plan), "--out", str(out), "--format", "csv,json,heatmap,curve", "--trials", "20"],
    )
    assert result.exit_code == 0, result.output
    assert sorted(p.name for p in out.iterdir() if p.is_file()) == [
        "sky.csv",
        "sky.curve.tiff",
        "sky.heatmap.tiff",
        "sky.json",
    ]

    again = tmp_path / "again"
    result = runner.invoke(app, ["run", "--manifest", str(plan), "--out", str(again), "--trials", "20"])
    assert result.exit_code == 0, result.output
    assert sorted(p.name for p in again.iterdir() if p.is_file()) == ["sky.json"]


def test_table_summarises_reports(tmp_path):
    assert _run(tmp_path, "--format", "json").exit_code == 0
    result = runner.invoke(app, ["table", str(tmp_path), "--out", str(tmp_path / "summary")])
    assert result.exit_code == 0, result.output
    text = (tmp_path / "summary" / "summary.md").read_text()
    assert "| bhb | none | **" in text


def test_table_rejects_foreign_json(tmp_path):
    (tmp_path / "x.json").write_text("{}")
    assert runner.invoke(app, ["table", str(tmp_path)]).exit_code == 1


def test_log_file_gets_json_lines(tmp_path):
    log_file = tmp_path / "run.jsonl"
    try:
        result = runner.invoke(
            app,
            ["--log-file", str(log_file), "run", "--platform", "skylake", "--protocol", "bhb",
             "--out", str(tmp_path / "r"), "--format", "csv", *QUICK],
        )
        assert result.exit_code == 0, result.output
    finally:
        configure_logging()
    records = [orjson.loads(line) for line in log_file.read_text().splitlines()]
    assert any(r["record"]["level"]["name"] == "EXPERIMENT" for r in records)
