"""Probability arithmetic and correlation significance testing.

Correlation p-values are always recomputed from (r, n) via the Student-t
distribution; the printed p-values in the source correlation table are
internally impossible and only ever appear in diff output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from . import published
from .corpus import Incident, timeline_subset, load_published_phases
from .special import student_t_sf2


@dataclass(frozen=True)
class CorrelationResult:
    factor: str
    r: float
    n: int
    t_stat: float
    p_two_tailed: float


@dataclass(frozen=True)
class ProbabilityResult:
    events: int
    years: int
    schools: int
    annual_rate: float
    per_school_annual: float

    def one_in(self) -> Optional[float]:
        """Reciprocal of the per-school annual probability (None when the
        event count is zero)."""
        if self.per_school_annual == 0.0:
            return None
        return 1.0 / self.per_school_annual

    def one_in_rounded(self) -> Optional[int]:
        recip = self.one_in()
        return None if recip is None else round(recip)


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    if len(x) != len(y):
        raise ValueError(f"length mismatch: {len(x)} vs {len(y)}")
    n = len(x)
    if n < 3:
        raise ValueError("need at least 3 points")
    mx = sum(x) / n
    my = sum(y) / n
    sxx = sum((a - mx) ** 2 for a in x)
    syy = sum((b - my) ** 2 for b in y)
    if sxx == 0.0 or syy == 0.0:
        raise ValueError("correlation undefined for a constant vector")
    sxy = sum((a - mx) * (b - my) for a, b in zip(x, y))
    denom = math.sqrt(sxx) * math.sqrt(syy)  # sqrt per factor: sxx*syy can underflow
    if denom == 0.0:
        raise ValueError("correlation undefined for a constant vector")
    r = sxy / denom
    return max(-1.0, min(1.0, r))


def p_value_two_tailed(r: float, n: int) -> float:
    if n < 3:
        raise ValueError("need n >= 3")
    if not -1.0 <= r <= 1.0:
        raise ValueError(f"r={r} outside [-1, 1]")
    if abs(r) == 1.0:
        return 0.0
    if r == 0.0:
        return 1.0
    df = n - 2
    t = r * math.sqrt(df / (1.0 - r * r))
    return student_t_sf2(t, df)


def correlation(factor: str, x: Sequence[float], y: Sequence[float]) -> CorrelationResult:
    r = pearson(x, y)
    n = len(x)
    t = math.inf if abs(r) == 1.0 else r * math.sqrt((n - 2) / (1.0 - r * r))
    return CorrelationResult(factor, r, n, t, p_value_two_tailed(r, n))


CORRELATION_FACTORS = (
    "bullets", "kiv_min", "va_min", "pom_min", "shootout_min",
    "dist_police_km", "dist_hospital_km", "crime_time_min",
)


def correlation_table(incidents: list[Incident],
                      phases: Optional[list[dict]] = None) -> list[CorrelationResult]:
    """Casualty-vs-factor correlations over the 16-incident timeline subset.

    Phase durations come from the published phase table by default; bullets,
    distances, and casualties come from the incident corpus.  Records missing
    a factor are dropped pairwise, so each result carries its own n.
    """
    if phases is None:
        phases = load_published_phases()
    phase_by_id = {row["id"]: row for row in phases}
    subset = timeline_subset(incidents)

    results = []
    for factor in CORRELATION_FACTORS:
        xs, ys = [], []
        for inc in subset:
            if factor == "bullets":
                value = inc.bullets_fired
            elif factor in ("dist_police_km", "dist_hospital_km"):
                value = getattr(inc, factor)
            else:
                row = phase_by_id.get(inc.id)
                value = None if row is None else row[factor]
            if value is None:
                continue
            xs.append(float(value))
            ys.append(float(inc.casualty()))
        results.append(correlation(factor, xs, ys))
    return results


def per_school_probability(events: int, years: int, schools: int) -> ProbabilityResult:
    if years < 1 or schools < 1:
        raise ValueError("years and schools must be positive")
    if events < 0:
        raise ValueError("events must be non-negative")
    annual_rate = events / years
    return ProbabilityResult(events, years, schools, annual_rate, annual_rate / schools)


def lifetime_exposure(per_school_annual: float, exposure_years: int) -> float:
    """Probability of at least one event over k independent years."""
    if not 0.0 <= per_school_annual <= 1.0:
        raise ValueError("probability outside [0, 1]")
    if exposure_years < 1:
        raise ValueError("exposure_years must be >= 1")
    return 1.0 - (1.0 - per_school_annual) ** exposure_years


def school_shooting_probability() -> ProbabilityResult:
    return per_school_probability(
        published.SCHOOL_SHOOTING_EVENTS, published.YEARS_OBSERVED, published.SCHOOL_COUNT)


def mass_shooting_probability() -> ProbabilityResult:
    return per_school_probability(
        published.MASS_SHOOTING_EVENTS, published.YEARS_OBSERVED, published.SCHOOL_COUNT)


def state_level_correlation(mass_counts: dict[str, int],
                            school_counts: dict[str, int]) -> CorrelationResult:
    """Per-state mass-shooting counts vs all-school-shooting counts.

    The all-shootings counts arrive as an external per-state CSV (they are
    not part of the bundled corpus); its states define the sample, with
    missing mass counts treated as zero.
    """
    states = sorted(school_counts)
    if len(states) < 3:
        raise ValueError("need at least 3 states")
    xs = [float(mass_counts.get(s, 0)) for s in states]
    ys = [float(school_counts[s]) for s in states]
    return correlation("state_counts", xs, ys)
