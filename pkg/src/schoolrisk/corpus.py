"""Incident data model, CSV parsing, validation, and derived aggregates.

The bundled corpus lives in ``data/incidents.csv`` (one row per mass school
shooting, 1999-2024) and ``data/published_phases.csv`` (the published
per-incident phase durations for the 16 incidents with full timelines).
All functions here are pure; parsed incidents are immutable.
"""

from __future__ import annotations

import csv
import datetime as dt
import io
from dataclasses import dataclass, field
from importlib import resources
from typing import Optional

MINUTES_PER_DAY = 1440

US_STATES = {
    "AL", "AK", "AZ", "AR", "CA", "CO", "CT", "DE", "FL", "GA", "HI", "ID",
    "IL", "IN", "IA", "KS", "KY", "LA", "ME", "MD", "MA", "MI", "MN", "MS",
    "MO", "MT", "NE", "NV", "NH", "NJ", "NM", "NY", "NC", "ND", "OH", "OK",
    "OR", "PA", "RI", "SC", "SD", "TN", "TX", "UT", "VT", "VA", "WA", "WV",
    "WI", "WY", "DC",
}

LOCATIONS = (
    "classroom", "hallway", "outside", "parking_lot", "entry_door",
    "cafeteria", "gym", "office", "field", "library", "bathroom", "bus",
    "other",
)

SERIES_LABELS = ("events", "killed", "injured", "casualty")

INCIDENT_COLUMNS = [
    "id", "school_name", "city", "state", "school_type", "date", "killed",
    "injured", "bullets", "t_arrived", "t_fired", "t_911", "t_police",
    "t_stop", "weapon", "location", "dist_police_km", "dist_hospital_km",
]

KM_PER_MILE = 1.609344

START_YEAR = 1999
END_YEAR = 2024


class CorpusError(ValueError):
    """Raised when the incident CSV cannot be parsed."""


def parse_clock(text: str) -> int:
    """Parse ``H:MM AM|PM`` (optional ``+1d`` suffix) to minutes since midnight.

    The day-offset suffix keeps sequences that cross midnight ordered.
    """
    raw = text.strip()
    day = 0
    if raw.endswith("+1d"):
        day = 1
        raw = raw[:-3].strip()
    try:
        clock, meridian = raw.rsplit(" ", 1)
        hh, mm = clock.split(":")
        hour, minute = int(hh), int(mm)
    except ValueError as exc:
        raise CorpusError(f"bad clock time {text!r}") from exc
    if meridian not in ("AM", "PM") or not (1 <= hour <= 12) or not (0 <= minute <= 59):
        raise CorpusError(f"bad clock time {text!r}")
    hour24 = hour % 12 + (12 if meridian == "PM" else 0)
    return day * MINUTES_PER_DAY + hour24 * 60 + minute


def format_clock(minutes: int) -> str:
    day, rem = divmod(minutes, MINUTES_PER_DAY)
    hour24, minute = divmod(rem, 60)
    meridian = "PM" if hour24 >= 12 else "AM"
    hour = hour24 % 12 or 12
    suffix = "+1d" if day else ""
    return f"{hour}:{minute:02d} {meridian}{suffix}"


@dataclass(frozen=True)
class Incident:
    id: int
    school_name: str
    city: str
    state: str
    school_type: str
    date: dt.date
    killed: int
    injured: int
    bullets_fired: Optional[int] = None
    t_arrived: Optional[int] = None
    t_fired: Optional[int] = None
    t_911: Optional[int] = None
    t_police: Optional[int] = None
    t_stop: Optional[int] = None
    weapon: str = ""
    location: Optional[str] = None
    dist_police_km: Optional[float] = None
    dist_hospital_km: Optional[float] = None

    def casualty(self) -> int:
        return self.killed + self.injured

    def timestamps(self) -> tuple:
        return (self.t_arrived, self.t_fired, self.t_911, self.t_police, self.t_stop)

    def has_full_timeline(self) -> bool:
        return all(t is not None for t in self.timestamps())


@dataclass
class ValidationReport:
    errors: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    cross_table_diffs: list = field(default_factory=list)

    def ok(self) -> bool:
        return not self.errors


def _opt(cell: str) -> Optional[str]:
    cell = cell.strip()
    return None if cell in ("", "-") else cell


def parse_incidents(csv_text: str) -> list[Incident]:
    """Parse the incident CSV; raises CorpusError naming row and column."""
    reader = csv.DictReader(io.StringIO(csv_text))
    if reader.fieldnames != INCIDENT_COLUMNS:
        raise CorpusError(f"unexpected header {reader.fieldnames}")
    incidents = []
    for rownum, row in enumerate(reader, start=2):
        try:
            incidents.append(_parse_row(row))
        except CorpusError as exc:
            raise CorpusError(f"row {rownum}: {exc}") from exc
    return incidents


def _parse_row(row: dict) -> Incident:
    def count(col: str) -> int:
        try:
            value = int(row[col])
        except ValueError:
            raise CorpusError(f"column {col}: not an integer: {row[col]!r}")
        if value < 0:
            raise CorpusError(f"column {col}: negative count {value}")
        return value

    state = row["state"].strip()
    if state not in US_STATES:
        raise CorpusError(f"column state: unknown state code {state!r}")
    school_type = row["school_type"].strip()
    if school_type not in ("public", "private"):
        raise CorpusError(f"column school_type: {school_type!r}")
    try:
        date = dt.date.fromisoformat(row["date"].strip())
    except ValueError:
        raise CorpusError(f"column date: {row['date']!r}")
    location = _opt(row["location"])
    if location is not None and location not in LOCATIONS:
        raise CorpusError(f"column location: {location!r}")

    def clock(col: str) -> Optional[int]:
        cell = _opt(row[col])
        return None if cell is None else parse_clock(cell)

    def distance(col: str) -> Optional[float]:
        cell = _opt(row[col])
        if cell is None:
            return None
        value = float(cell)
        if value < 0:
            raise CorpusError(f"column {col}: negative distance {value}")
        return value

    bullets = _opt(row["bullets"])
    return Incident(
        id=count("id"),
        school_name=row["school_name"].strip(),
        city=row["city"].strip(),
        state=state,
        school_type=school_type,
        date=date,
        killed=count("killed"),
        injured=count("injured"),
        bullets_fired=None if bullets is None else int(bullets),
        t_arrived=clock("t_arrived"),
        t_fired=clock("t_fired"),
        t_911=clock("t_911"),
        t_police=clock("t_police"),
        t_stop=clock("t_stop"),
        weapon=row["weapon"].strip(),
        location=location,
        dist_police_km=distance("dist_police_km"),
        dist_hospital_km=distance("dist_hospital_km"),
    )


def serialize_incidents(incidents: list[Incident]) -> str:
    """Inverse of parse_incidents (round-trips the bundled corpus)."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(INCIDENT_COLUMNS)
    for inc in incidents:
        def fmt_clock(t):
            return "" if t is None else format_clock(t)

        def fmt_opt(v):
            return "" if v is None else v

        writer.writerow([
            inc.id, inc.school_name, inc.city, inc.state, inc.school_type,
            inc.date.isoformat(), inc.killed, inc.injured,
            fmt_opt(inc.bullets_fired), fmt_clock(inc.t_arrived),
            fmt_clock(inc.t_fired), fmt_clock(inc.t_911),
            fmt_clock(inc.t_police), fmt_clock(inc.t_stop), inc.weapon,
            fmt_opt(inc.location), fmt_opt(inc.dist_police_km),
            fmt_opt(inc.dist_hospital_km),
        ])
    return out.getvalue()


def load_bundled() -> list[Incident]:
    text = resources.files("schoolrisk.data").joinpath("incidents.csv").read_text()
    return parse_incidents(text)


def validate(incidents: list[Incident]) -> ValidationReport:
    """Invariant checks, timestamp anomalies, and a diff against the
    published yearly aggregates.  Findings never raise; anomalies in the
    source tables are reported, not silently fixed."""
    from . import published

    report = ValidationReport()
    seen_ids = set()
    for inc in incidents:
        if inc.id in seen_ids:
            report.errors.append((inc.id, "id", "duplicate incident id"))
        seen_ids.add(inc.id)
        if inc.casualty() < 4:
            report.errors.append(
                (inc.id, "killed/injured",
                 f"casualty {inc.casualty()} below mass-shooting threshold of 4"))
        if not (dt.date(START_YEAR, 1, 1) <= inc.date <= dt.date(END_YEAR, 12, 31)):
            report.errors.append((inc.id, "date", f"{inc.date} outside {START_YEAR}-{END_YEAR}"))
        if inc.has_full_timeline():
            if not (inc.t_arrived <= inc.t_fired <= inc.t_stop):
                report.warnings.append(
                    (inc.id, "t_fired", "shooter timestamps out of order"))
            if not (inc.t_911 <= inc.t_police <= inc.t_stop):
                report.warnings.append(
                    (inc.id, "t_police", "response timestamps out of order"))
            if inc.t_911 < inc.t_fired:
                report.warnings.append(
                    (inc.id, "t_911", "911 call preceded first shot"))

    for label in SERIES_LABELS:
        computed = yearly_series(incidents, label)
        bundledvals = published.TABLE1[label]
        for year, (got, want) in enumerate(zip(computed.values, bundledvals), START_YEAR):
            if got != want:
                report.cross_table_diffs.append((year, want, got))

    pub = {row["id"]: row for row in load_published_phases()}
    for inc in incidents:
        row = pub.get(inc.id)
        if row is None:
            continue
        if inc.casualty() != row["casualty"]:
            report.cross_table_diffs.append((inc.id, row["casualty"], inc.casualty()))
        if inc.bullets_fired is not None and inc.bullets_fired != row["bullets"]:
            report.cross_table_diffs.append((inc.id, row["bullets"], inc.bullets_fired))
    return report


@dataclass(frozen=True)
class YearlySeries:
    start_year: int
    values: tuple
    label: str

    @property
    def end_year(self) -> int:
        return self.start_year + len(self.values) - 1

    def years(self) -> range:
        return range(self.start_year, self.end_year + 1)

    def total(self):
        return sum(self.values)


def yearly_series(incidents: list[Incident], label: str,
                  start_year: int = START_YEAR, end_year: int = END_YEAR) -> YearlySeries:
    if label not in SERIES_LABELS:
        raise ValueError(f"unknown series label {label!r}")
    values = [0] * (end_year - start_year + 1)
    for inc in incidents:
        idx = inc.date.year - start_year
        if not 0 <= idx < len(values):
            raise ValueError(f"incident {inc.id} outside {start_year}-{end_year}")
        if label == "events":
            values[idx] += 1
        elif label == "killed":
            values[idx] += inc.killed
        elif label == "injured":
            values[idx] += inc.injured
        else:
            values[idx] += inc.casualty()
    return YearlySeries(start_year, tuple(values), label)


def location_histogram(incidents: list[Incident]) -> list[tuple]:
    """(location, count, percent) in descending count order.

    Incidents without a location fall in an ``unknown`` bucket; the percent
    denominator is always the full corpus size.
    """
    counts: dict[str, int] = {}
    for inc in incidents:
        key = inc.location or "unknown"
        counts[key] = counts.get(key, 0) + 1
    total = len(incidents)
    ordered = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return [(loc, n, round(100.0 * n / total, 2)) for loc, n in ordered]


def state_counts(incidents: list[Incident]) -> dict[str, int]:
    counts: dict[str, int] = {}
    for inc in incidents:
        counts[inc.state] = counts.get(inc.state, 0) + 1
    return dict(sorted(counts.items()))


def timeline_subset(incidents: list[Incident]) -> list[Incident]:
    """The 16 incidents carrying a full five-timestamp timeline plus both
    distance measurements (the detailed-timeline table's rows)."""
    return [
        inc for inc in incidents
        if inc.has_full_timeline()
        and inc.dist_police_km is not None
        and inc.dist_hospital_km is not None
    ]


def load_published_phases() -> list[dict]:
    """Published per-incident phase durations (with casualty and bullet
    counts as printed) for the 16-incident timeline subset."""
    text = resources.files("schoolrisk.data").joinpath("published_phases.csv").read_text()
    rows = []
    for row in csv.DictReader(io.StringIO(text)):
        rows.append({key: int(value) for key, value in row.items()})
    return rows
