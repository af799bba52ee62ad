import dataclasses

import pytest
from hypothesis import given, strategies as st

from schoolrisk import corpus, timeline


@pytest.fixture(scope="module")
def subset():
    return corpus.timeline_subset(corpus.load_bundled())


def test_derive_phases_requires_full_timeline():
    incidents = corpus.load_bundled()
    partial = next(inc for inc in incidents if not inc.has_full_timeline())
    with pytest.raises(ValueError, match=f"incident {partial.id}"):
        timeline.derive_phases(partial)


def test_phases_sum_to_crime_time_absent_anomalies(subset):
    for inc in subset:
        br = timeline.derive_phases(inc)
        if br.anomalies:
            continue
        assert br.va_min + br.pom_min + br.shootout_min == pytest.approx(
            br.crime_time_min)


def test_out_of_order_timestamps_clamp_and_flag(subset):
    base = subset[0]
    swapped = dataclasses.replace(base, t_911=base.t_fired - 5)
    br = timeline.derive_phases(swapped)
    assert br.va_min == 0.0
    assert any("911" in a for a in br.anomalies)


@given(st.integers(min_value=-300, max_value=300))
def test_derive_phases_translation_invariance(shift):
    inc = corpus.timeline_subset(corpus.load_bundled())[2]
    if inc.t_arrived + shift < 0:
        return
    moved = dataclasses.replace(
        inc, t_arrived=inc.t_arrived + shift, t_fired=inc.t_fired + shift,
        t_911=inc.t_911 + shift, t_police=inc.t_police + shift,
        t_stop=inc.t_stop + shift)
    assert timeline.derive_phases(moved).phases() == timeline.derive_phases(inc).phases()


def test_phase_averages_published_columns(subset):
    rows = {r["id"]: r for r in corpus.load_published_phases()}
    breakdowns = [timeline.breakdown_from_published(rows[inc.id]) for inc in subset]
    casualties = [rows[inc.id]["casualty"] for inc in subset]
    avg = timeline.phase_averages(breakdowns, casualties)
    assert avg.n == 16
    assert avg.mean_crime_time == pytest.approx(31.0, abs=0.05)
    assert avg.casualties_per_minute == pytest.approx(
        avg.mean_casualty / avg.mean_crime_time)


def test_phase_averages_rejects_misaligned_input():
    with pytest.raises(ValueError):
        timeline.phase_averages([], [])
    br = timeline.TimelineBreakdown(1, 1, 1, 1, 1, 3)
    with pytest.raises(ValueError):
        timeline.phase_averages([br], [4, 5])
