import io
import json

import pytest

from schoolrisk import cli, corpus, gametheory


def run_cli(args):
    stream = io.StringIO()
    code = cli.run(args, stream=stream)
    return code, stream.getvalue()


def test_validate_clean_corpus_exits_zero():
    code, out = run_cli(["validate"])
    assert code == 0
    payload = json.loads(out)
    assert payload["errors"] == []
    assert payload["n_incidents"] == 43


def test_validate_bad_corpus_exits_one(tmp_path):
    import dataclasses
    incidents = corpus.load_bundled()
    low = dataclasses.replace(incidents[0], killed=1, injured=1)
    bad = tmp_path / "bad.csv"
    bad.write_text(corpus.serialize_incidents([low, *incidents[1:]]))
    code, out = run_cli(["validate", "--corpus", str(bad)])
    assert code == 1


def test_missing_corpus_file_exits_one(capsys):
    code, _ = run_cli(["validate", "--corpus", "/nonexistent.csv"])
    assert code == 1


def test_unknown_arguments_exit_two(capsys):
    code, _ = run_cli(["report", "--bogus"])
    assert code == 2
    code, _ = run_cli(["frobnicate"])
    assert code == 2


def test_env_var_overrides_default_corpus(tmp_path, monkeypatch):
    trimmed = tmp_path / "trimmed.csv"
    trimmed.write_text(corpus.serialize_incidents(corpus.load_bundled()[:40]))
    monkeypatch.setenv("INCIDENT_CORPUS", str(trimmed))
    code, out = run_cli(["validate"])
    assert json.loads(out)["n_incidents"] == 40


def test_corpus_flag_beats_env_var(tmp_path, monkeypatch):
    monkeypatch.setenv("INCIDENT_CORPUS", "/nonexistent.csv")
    bundled = tmp_path / "full.csv"
    bundled.write_text(corpus.serialize_incidents(corpus.load_bundled()))
    code, out = run_cli(["validate", "--corpus", str(bundled)])
    assert code == 0


def test_forecast_csv_header(tmp_path):
    code, _ = run_cli(["forecast", "--target", "events", "--out", str(tmp_path)])
    assert code == 0
    header = (tmp_path / "table2.csv").read_text().splitlines()[0]
    assert header == ("model_id,model_name,y2025,y2026,y2027,y2028,y2029,y2030,"
                      "mse,mae,mape,training_data")


def test_forecast_variant_filter(tmp_path):
    code, _ = run_cli(["forecast", "--target", "events",
                       "--variant", "with_covid", "--out", str(tmp_path)])
    assert code == 0
    rows = (tmp_path / "table2.csv").read_text().splitlines()[1:]
    assert [r.split(",")[0] for r in rows] == ["1a", "2a", "3a", "4a"]


def test_stats_subcommand_runs():
    code, out = run_cli(["stats", "--format", "md"])
    assert code == 0
    assert "one_in_rounded" in out


def test_timeline_subcommand_runs(tmp_path):
    code, _ = run_cli(["timeline", "--out", str(tmp_path), "--format", "json"])
    assert code == 0
    table = json.loads((tmp_path / "table4.json").read_text())
    assert len(table["rows"]) == 16 + 2  # incidents + two average rows


def test_simulate_with_scenario_file(tmp_path):
    scenario, policy = gametheory.default_scenario()
    path = tmp_path / "scenario.txt"
    path.write_text(gametheory.format_scenario_file(scenario, policy))
    code, out = run_cli(["simulate", "--scenario", str(path), "--sweep", "none"])
    assert code == 0
    assert "defender_payoff" in out


def test_report_emits_all_tables_and_diff_keys(tmp_path):
    code, _ = run_cli(["report", "--out", str(tmp_path)])
    assert code == 0
    for name in cli.TABLE_NAMES:
        assert (tmp_path / f"{name}.csv").exists()
    diffs = json.loads((tmp_path / "diffs.json").read_text())
    assert set(diffs) == set(cli.TABLE_NAMES)


def test_report_bundle_has_all_tables():
    bundle = cli.build_report(corpus.load_bundled())
    assert set(bundle.tables) == set(cli.TABLE_NAMES)
    assert set(bundle.diffs) == set(cli.TABLE_NAMES)


def test_json_and_md_formats_parse(tmp_path):
    code, _ = run_cli(["report", "--out", str(tmp_path), "--format", "json"])
    assert code == 0
    table1 = json.loads((tmp_path / "table1.json").read_text())
    assert table1["columns"][0] == "year"
    code, _ = run_cli(["report", "--out", str(tmp_path), "--format", "md"])
    assert (tmp_path / "table1.md").read_text().startswith("| year |")
