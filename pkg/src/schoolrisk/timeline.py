"""Four-phase attack timelines derived from raw incident timestamps.

Phases are consecutive timestamp differences:
    identify  = first shot - shooter arrival
    attack    = first 911 call - first shot
    response  = police arrival - first 911 call
    shootout  = crime stopped - police arrival
Negative raw differences (out-of-order source timestamps) clamp to zero and
carry an anomaly flag; they are reported, never silently corrected.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .corpus import Incident


@dataclass(frozen=True)
class TimelineBreakdown:
    incident_id: int
    kiv_min: float
    va_min: float
    pom_min: float
    shootout_min: float
    crime_time_min: float
    anomalies: tuple = field(default=())

    def phases(self) -> tuple:
        return (self.kiv_min, self.va_min, self.pom_min, self.shootout_min)


@dataclass(frozen=True)
class PhaseAverages:
    mean_kiv: float
    mean_va: float
    mean_pom: float
    mean_shootout: float
    mean_crime_time: float
    mean_casualty: float
    casualties_per_minute: float
    n: int


def derive_phases(incident: Incident) -> TimelineBreakdown:
    for name, value in zip(("t_arrived", "t_fired", "t_911", "t_police", "t_stop"),
                           incident.timestamps()):
        if value is None:
            raise ValueError(f"incident {incident.id}: missing timestamp {name}")

    anomalies = []

    def clamp(label: str, delta: int, message: str) -> float:
        if delta < 0:
            anomalies.append(f"{label}: {message}")
            return 0.0
        return float(delta)

    kiv = clamp("kiv", incident.t_fired - incident.t_arrived,
                "first shot preceded arrival")
    va = clamp("va", incident.t_911 - incident.t_fired,
               "911 preceded first shot")
    pom = clamp("pom", incident.t_police - incident.t_911,
                "police arrival preceded 911")
    shootout = clamp("shootout", incident.t_stop - incident.t_police,
                     "stop preceded police arrival")
    crime = clamp("crime_time", incident.t_stop - incident.t_fired,
                  "stop preceded first shot")
    return TimelineBreakdown(incident.id, kiv, va, pom, shootout, crime,
                             tuple(anomalies))


def breakdown_from_published(row: dict) -> TimelineBreakdown:
    """Wrap one published phase-table row in a TimelineBreakdown."""
    return TimelineBreakdown(
        row["id"], float(row["kiv_min"]), float(row["va_min"]),
        float(row["pom_min"]), float(row["shootout_min"]),
        float(row["crime_time_min"]))


def phase_averages(breakdowns: list[TimelineBreakdown],
                   casualties: list[int]) -> PhaseAverages:
    if not breakdowns:
        raise ValueError("no breakdowns")
    if len(breakdowns) != len(casualties):
        raise ValueError("breakdowns and casualties must align")
    n = len(breakdowns)

    def mean(values):
        return sum(values) / n

    mean_crime = mean([b.crime_time_min for b in breakdowns])
    mean_casualty = mean(casualties)
    return PhaseAverages(
        mean_kiv=mean([b.kiv_min for b in breakdowns]),
        mean_va=mean([b.va_min for b in breakdowns]),
        mean_pom=mean([b.pom_min for b in breakdowns]),
        mean_shootout=mean([b.shootout_min for b in breakdowns]),
        mean_crime_time=mean_crime,
        mean_casualty=mean_casualty,
        casualties_per_minute=mean_casualty / mean_crime,
        n=n,
    )
