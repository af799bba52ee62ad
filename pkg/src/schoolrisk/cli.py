"""Command-line entry point.

Every number printed here is produced by a library call; the CLI only
arranges results into tables and serializes them.  Output is byte-stable
across runs for fixed inputs and flags (opt into a timestamp with
``--stamp``).
"""

from __future__ import annotations

import argparse
import csv as csv_mod
import datetime as dt
import io
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import corpus, forecast, gametheory, published, stats, timeline

TABLE_NAMES = (
    "table1", "table2", "table3", "table4", "table6",
    "fig5_histogram", "fig1_state_counts", "fig6_series", "fig7_series",
)


@dataclass
class ReportBundle:
    tables: dict = field(default_factory=dict)
    diffs: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# Report assembly


def _forecast_table(rows: list, published_rows: dict) -> tuple:
    columns = ["model_id", "model_name", "y2025", "y2026", "y2027", "y2028",
               "y2029", "y2030", "mse", "mae", "mape", "training_data"]
    out_rows = []
    diffs = []
    per_year_sums = {yr: 0.0 for yr in forecast.PREDICT_YEARS}
    for row in rows:
        preds = [round(row.predictions[yr], 2) for yr in forecast.PREDICT_YEARS]
        for yr in forecast.PREDICT_YEARS:
            per_year_sums[yr] += row.predictions[yr]
        out_rows.append([row.model_id, row.model_name, *preds,
                         round(row.mse, 2), round(row.mae, 2),
                         "" if row.mape is None else round(row.mape, 3),
                         row.training_data])
        pub = published_rows.get(row.model_id)
        if pub is None:
            continue
        _, pub_preds, pub_mse, pub_mae, _ = pub
        for yr, got, want in zip(forecast.PREDICT_YEARS, preds, pub_preds):
            if abs(got - want) > 0.005:
                diffs.append((f"{row.model_id}/{yr}", got, want))
        if abs(round(row.mse, 2) - pub_mse) > 0.005:
            diffs.append((f"{row.model_id}/mse", round(row.mse, 2), pub_mse))
        if abs(round(row.mae, 2) - pub_mae) > 0.005:
            diffs.append((f"{row.model_id}/mae", round(row.mae, 2), pub_mae))
    n = len(rows)
    avg = ["-", "Average"] + [round(per_year_sums[yr] / n, 2)
                              for yr in forecast.PREDICT_YEARS] + ["", "", "", "-"]
    out_rows.append(avg)
    return {"columns": columns, "rows": out_rows}, diffs


def _timeline_table(incidents: list) -> tuple:
    subset = corpus.timeline_subset(incidents)
    pub_rows = {r["id"]: r for r in corpus.load_published_phases()}
    columns = ["id", "school_name", "casualty", "bullets",
               "kiv", "va", "pom", "shootout", "crime_time",
               "kiv_pub", "va_pub", "pom_pub", "shootout_pub", "crime_time_pub",
               "anomalies"]
    rows = []
    diffs = []
    derived = []
    for inc in subset:
        br = timeline.derive_phases(inc)
        derived.append(br)
        pub = pub_rows[inc.id]
        rows.append([
            inc.id, inc.school_name, inc.casualty(), inc.bullets_fired,
            br.kiv_min, br.va_min, br.pom_min, br.shootout_min, br.crime_time_min,
            pub["kiv_min"], pub["va_min"], pub["pom_min"], pub["shootout_min"],
            pub["crime_time_min"], "; ".join(br.anomalies),
        ])
        for name, got in zip(("kiv_min", "va_min", "pom_min", "shootout_min",
                              "crime_time_min"), (*br.phases(), br.crime_time_min)):
            if got != pub[name]:
                diffs.append((f"incident {inc.id}/{name}", got, pub[name]))
        if inc.casualty() != pub["casualty"]:
            diffs.append((f"incident {inc.id}/casualty", inc.casualty(), pub["casualty"]))
        if inc.bullets_fired != pub["bullets"]:
            diffs.append((f"incident {inc.id}/bullets", inc.bullets_fired, pub["bullets"]))

    casualties = [inc.casualty() for inc in subset]
    avg_derived = timeline.phase_averages(derived, casualties)
    pub_breakdowns = [timeline.breakdown_from_published(pub_rows[inc.id])
                      for inc in subset]
    avg_pub = timeline.phase_averages(pub_breakdowns, casualties)
    for label, avg in (("average_derived", avg_derived), ("average_published_phases", avg_pub)):
        rows.append([
            "-", label, round(avg.mean_casualty, 4), "",
            round(avg.mean_kiv, 4), round(avg.mean_va, 4), round(avg.mean_pom, 4),
            round(avg.mean_shootout, 4), round(avg.mean_crime_time, 4),
            "", "", "", "", "", f"casualties_per_minute={round(avg.casualties_per_minute, 4)}",
        ])
    return {"columns": columns, "rows": rows}, diffs


def build_report(incidents: list) -> ReportBundle:
    bundle = ReportBundle()
    report = corpus.validate(incidents)

    years = list(range(corpus.START_YEAR, corpus.END_YEAR + 1))
    series = {label: corpus.yearly_series(incidents, label)
              for label in corpus.SERIES_LABELS}
    rows = [[year] + [series[label].values[i]
                      for label in ("events", "killed", "injured", "casualty")]
            for i, year in enumerate(years)]
    rows.append(["total"] + [series[label].total()
                             for label in ("events", "killed", "injured", "casualty")])
    bundle.tables["table1"] = {
        "columns": ["year", "events", "killed", "injured", "casualty"],
        "rows": rows,
    }
    bundle.diffs["table1"] = [d for d in report.cross_table_diffs
                              if isinstance(d[0], int) and d[0] >= corpus.START_YEAR]

    harness = forecast.run_harness(incidents)
    events_rows = [r for r in harness if r.target == "events"]
    cas_rows = [r for r in harness if r.target == "casualties"]
    bundle.tables["table2"], bundle.diffs["table2"] = _forecast_table(
        events_rows, published.TABLE2_INCIDENTS)
    bundle.tables["table3"], bundle.diffs["table3"] = _forecast_table(
        cas_rows, published.TABLE3_CASUALTIES)

    bundle.tables["table4"], bundle.diffs["table4"] = _timeline_table(incidents)

    corr = stats.correlation_table(incidents)
    corr_rows = []
    corr_diffs = []
    for res in corr:
        pub_r, pub_p = published.TABLE6[res.factor]
        corr_rows.append([res.factor, res.n, round(res.r, 3), round(res.t_stat, 3),
                          round(res.p_two_tailed, 6), pub_r, pub_p])
        if abs(round(res.r, 3) - pub_r) > 0.0005:
            corr_diffs.append((f"{res.factor}/r", round(res.r, 3), pub_r))
        if abs(res.p_two_tailed - pub_p) > 0.0005:
            corr_diffs.append((f"{res.factor}/p", round(res.p_two_tailed, 6), pub_p))
    bundle.tables["table6"] = {
        "columns": ["factor", "n", "r", "t_stat", "p_two_tailed",
                    "r_published", "p_published"],
        "rows": corr_rows,
    }
    bundle.diffs["table6"] = corr_diffs

    hist = corpus.location_histogram(incidents)
    bundle.tables["fig5_histogram"] = {
        "columns": ["location", "count", "percent"],
        "rows": [list(item) for item in hist],
    }
    bundle.diffs["fig5_histogram"] = []

    counts = corpus.state_counts(incidents)
    bundle.tables["fig1_state_counts"] = {
        "columns": ["state", "count"],
        "rows": [[state, count] for state, count in counts.items()],
    }
    bundle.diffs["fig1_state_counts"] = []

    for name, label, fc_rows in (("fig6_series", "events", events_rows),
                                 ("fig7_series", "casualty", cas_rows)):
        obs = series[label]
        fig_rows = [["observed", year, value]
                    for year, value in zip(obs.years(), obs.values)]
        for row in fc_rows:
            for year in forecast.PREDICT_YEARS:
                fig_rows.append([f"forecast_{row.model_id}", year,
                                 round(row.predictions[year], 2)])
        bundle.tables[name] = {"columns": ["series", "year", "value"],
                               "rows": fig_rows}
        bundle.diffs[name] = []
    return bundle


# ---------------------------------------------------------------------------
# Serialization


def _cell(value) -> str:
    return "" if value is None else str(value)


def table_to_csv(table: dict) -> str:
    out = io.StringIO()
    writer = csv_mod.writer(out, lineterminator="\n")
    writer.writerow(table["columns"])
    for row in table["rows"]:
        writer.writerow([_cell(v) for v in row])
    return out.getvalue()


def table_to_md(table: dict) -> str:
    lines = ["| " + " | ".join(table["columns"]) + " |",
             "| " + " | ".join("---" for _ in table["columns"]) + " |"]
    for row in table["rows"]:
        lines.append("| " + " | ".join(_cell(v) for v in row) + " |")
    return "\n".join(lines) + "\n"


def table_to_json(table: dict) -> str:
    return json.dumps(table, sort_keys=True, indent=2) + "\n"


FORMATTERS = {"csv": table_to_csv, "md": table_to_md, "json": table_to_json}


def _emit_tables(tables: dict, fmt: str, out_dir, stream, diffs=None, stamp=False):
    formatter = FORMATTERS[fmt]
    if stamp:
        print(f"# generated {dt.datetime.now().isoformat()}", file=stream)
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        for name, table in tables.items():
            (out_dir / f"{name}.{fmt}").write_text(formatter(table))
        if diffs is not None:
            (out_dir / "diffs.json").write_text(
                json.dumps(diffs, sort_keys=True, indent=2) + "\n")
    else:
        for name, table in tables.items():
            print(f"## {name}", file=stream)
            stream.write(formatter(table))
            print(file=stream)
        if diffs is not None:
            print("## diffs", file=stream)
            stream.write(json.dumps(diffs, sort_keys=True, indent=2) + "\n")


# ---------------------------------------------------------------------------
# Subcommands


def _load_corpus(args) -> list:
    path = args.corpus or os.environ.get("INCIDENT_CORPUS")
    if path is None:
        return corpus.load_bundled()
    return corpus.parse_incidents(Path(path).read_text())


def cmd_validate(args, stream) -> int:
    incidents = _load_corpus(args)
    report = corpus.validate(incidents)
    payload = {
        "errors": [list(e) for e in report.errors],
        "warnings": [list(w) for w in report.warnings],
        "cross_table_diffs": [list(d) for d in report.cross_table_diffs],
        "n_incidents": len(incidents),
    }
    stream.write(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    return 0 if report.ok() else 1


def cmd_stats(args, stream) -> int:
    incidents = _load_corpus(args)
    prob_rows = []
    for scope, result in (("school_shootings", stats.school_shooting_probability()),
                          ("mass_shootings", stats.mass_shooting_probability())):
        lifetime = stats.lifetime_exposure(result.per_school_annual,
                                           published.EDUCATION_YEARS)
        one_in = result.one_in()
        prob_rows.append([
            scope, result.events, result.years, result.schools,
            round(result.annual_rate, 4),
            float(f"{result.per_school_annual:.6e}"),
            "inf" if one_in is None else round(one_in, 1),
            "inf" if one_in is None else result.one_in_rounded(),
            float(f"{lifetime:.6e}"),
        ])
    tables = {
        "probability": {
            "columns": ["scope", "events", "years", "schools", "annual_rate",
                        "per_school_annual", "one_in", "one_in_rounded",
                        "lifetime_17yr"],
            "rows": prob_rows,
        }
    }
    corr = stats.correlation_table(incidents)
    tables["correlations"] = {
        "columns": ["factor", "n", "r", "t_stat", "p_two_tailed"],
        "rows": [[c.factor, c.n, round(c.r, 4), round(c.t_stat, 4),
                  round(c.p_two_tailed, 6)] for c in corr],
    }
    if args.state_counts_csv:
        school_counts = {}
        with open(args.state_counts_csv, newline="") as handle:
            for row in csv_mod.DictReader(handle):
                school_counts[row["state"].strip()] = int(row["count"])
        res = stats.state_level_correlation(corpus.state_counts(incidents),
                                            school_counts)
        tables["state_correlation"] = {
            "columns": ["n", "r", "t_stat", "p_two_tailed"],
            "rows": [[res.n, round(res.r, 4), round(res.t_stat, 4),
                      round(res.p_two_tailed, 6)]],
        }
    _emit_tables(tables, args.format, args.out, stream, stamp=args.stamp)
    return 0


def cmd_timeline(args, stream) -> int:
    incidents = _load_corpus(args)
    table, diffs = _timeline_table(incidents)
    _emit_tables({"table4": table}, args.format, args.out, stream,
                 diffs={"table4": diffs}, stamp=args.stamp)
    return 0


def cmd_forecast(args, stream) -> int:
    incidents = _load_corpus(args)
    targets = forecast.TARGETS if args.target == "both" else (args.target,)
    variants = forecast.VARIANTS if args.variant == "both" else (args.variant,)
    rows = forecast.run_harness(incidents, targets=targets, variants=variants,
                                drop_full_pandemic=args.drop_2020_2023)
    tables = {}
    for target in targets:
        name = "table2" if target == "events" else "table3"
        pub = (published.TABLE2_INCIDENTS if target == "events"
               else published.TABLE3_CASUALTIES)
        subset = [r for r in rows if r.target == target]
        table, diffs = _forecast_table(subset, pub)
        if args.variant != "both":
            table["rows"] = table["rows"][:-1]  # average row needs both variants
        tables[name] = table
    _emit_tables(tables, args.format, args.out, stream, stamp=args.stamp)
    return 0


def cmd_simulate(args, stream) -> int:
    if args.scenario:
        scenario, policy = gametheory.parse_scenario_file(
            Path(args.scenario).read_text())
    else:
        scenario, policy = gametheory.default_scenario()

    outcome = gametheory.simulate(
        scenario, _uniform_schedule(scenario), policy)
    tables = {
        "simulation": {
            "columns": ["loss_v", "loss_m", "defender_payoff", "stop_time"],
            "rows": [[round(outcome.loss_v, 6), round(outcome.loss_m, 6),
                      round(outcome.defender_payoff, 6),
                      "horizon" if outcome.stop_time is None else outcome.stop_time]],
        }
    }
    if args.sweep in ("shooter", "both"):
        grid = gametheory.schedule_grid(scenario)
        rows = []
        for schedule in grid:
            out = gametheory.simulate(scenario, schedule, policy)
            start = next((t for t, b in enumerate(schedule) if b), "")
            rows.append([sum(schedule), start,
                         round(out.loss_v, 6), round(out.loss_m, 6),
                         round(out.total_loss(), 6)])
        tables["shooter_sweep"] = {
            "columns": ["bullets", "start_minute", "loss_v", "loss_m", "total_loss"],
            "rows": rows,
        }
        best_schedule, best = gametheory.shooter_best_response(scenario, policy, grid)
        tables["shooter_best"] = {
            "columns": ["bullets", "loss_v", "loss_m", "total_loss"],
            "rows": [[sum(best_schedule), round(best.loss_v, 6),
                      round(best.loss_m, 6), round(best.total_loss(), 6)]],
        }
    if args.sweep in ("defender", "both"):
        grid = gametheory.policy_grid(range(1, args.max_officers + 1),
                                      [0.5, 1.0, 2.0],
                                      policy.stop_rate,
                                      policy.unexpected_cost_rate)
        rows = []
        for pol in grid:
            out = gametheory.simulate(scenario, _uniform_schedule(scenario), pol)
            rows.append([pol.officers, pol.weapon_level,
                         round(out.defender_payoff, 6), round(out.loss_v, 6)])
        tables["defender_sweep"] = {
            "columns": ["officers", "weapon_level", "defender_payoff", "loss_v"],
            "rows": rows,
        }
        best_policy, best = gametheory.defender_best_response(
            scenario, _uniform_schedule(scenario), grid)
        tables["defender_best"] = {
            "columns": ["officers", "weapon_level", "defender_payoff"],
            "rows": [[best_policy.officers, best_policy.weapon_level,
                      round(best.defender_payoff, 6)]],
        }
    _emit_tables(tables, args.format, args.out, stream, stamp=args.stamp)
    return 0


def _uniform_schedule(scenario) -> tuple:
    window = scenario.horizon_min - scenario.t_attack
    per_min, extra = divmod(scenario.bullet_budget, window)
    schedule = [0] * scenario.horizon_min
    for i, t in enumerate(range(scenario.t_attack, scenario.horizon_min)):
        schedule[t] = per_min + (1 if i < extra else 0)
    return tuple(schedule)


def cmd_report(args, stream) -> int:
    incidents = _load_corpus(args)
    report = corpus.validate(incidents)
    if not report.ok():
        for err in report.errors:
            print(f"error: {err}", file=sys.stderr)
        return 1
    bundle = build_report(incidents)
    diffs = {name: [list(d) for d in bundle.diffs[name]] for name in TABLE_NAMES}
    tables = {name: bundle.tables[name] for name in TABLE_NAMES}
    _emit_tables(tables, args.format, args.out, stream, diffs=diffs,
                 stamp=args.stamp)
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="schoolrisk",
        description="Mass-school-shooting incident analysis toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--corpus", help="incident CSV path (default: bundled corpus; "
                                        "INCIDENT_CORPUS overrides the default)")
        p.add_argument("--format", choices=("csv", "json", "md"), default="csv")
        p.add_argument("--out", help="directory for output files (default: stdout)")
        p.add_argument("--stamp", action="store_true",
                       help="include a generation timestamp (off by default "
                            "so runs are byte-identical)")

    common(sub.add_parser("validate", help="check corpus invariants"))
    p = sub.add_parser("stats", help="probability and correlation analyses")
    common(p)
    p.add_argument("--state-counts-csv",
                   help="optional per-state school-shooting counts "
                        "(columns: state,count) for the state-level correlation")
    common(sub.add_parser("timeline", help="four-phase timeline breakdowns"))
    p = sub.add_parser("forecast", help="2025-2030 count forecasts")
    common(p)
    p.add_argument("--target", choices=("events", "casualties", "both"),
                   default="both")
    p.add_argument("--variant", choices=("with_covid", "without_covid", "both"),
                   default="both")
    p.add_argument("--drop-2020-2023", action="store_true",
                   help="widen the without_covid exclusion to 2020-2023")
    p = sub.add_parser("simulate", help="attack-defense simulation")
    common(p)
    p.add_argument("--scenario", help="flat key=value scenario file")
    p.add_argument("--sweep", choices=("shooter", "defender", "both", "none"),
                   default="both")
    p.add_argument("--max-officers", type=int, default=32)
    common(sub.add_parser("report", help="emit every table plus diffs"))
    return parser


COMMANDS = {
    "validate": cmd_validate,
    "stats": cmd_stats,
    "timeline": cmd_timeline,
    "forecast": cmd_forecast,
    "simulate": cmd_simulate,
    "report": cmd_report,
}


def run(argv=None, stream=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    stream = stream or sys.stdout
    try:
        return COMMANDS[args.command](args, stream)
    except (corpus.CorpusError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())
