"""Acceptance gate: one test (one pass/fail line under ``pytest -v``) per
release criterion.  Tolerances are stated inline next to each assertion."""

import dataclasses
import filecmp
import math
import random
import time

import pytest
from scipy import integrate

from schoolrisk import cli, corpus, forecast, gametheory, published, stats, timeline


@pytest.fixture(scope="module")
def incidents():
    return corpus.load_bundled()


@pytest.fixture(scope="module")
def harness(incidents):
    return forecast.run_harness(incidents)


def test_criterion_1_corpus_integrity(incidents):
    start = time.perf_counter()
    totals = {label: corpus.yearly_series(incidents, label).total()
              for label in corpus.SERIES_LABELS}
    assert totals == {"events": 43, "killed": 211, "injured": 323, "casualty": 534}
    events = corpus.yearly_series(incidents, "events")
    assert events.values == published.TABLE1["events"]
    assert time.perf_counter() - start < 1.0


def test_criterion_2_probability_suite():
    school = stats.school_shooting_probability()
    mass = stats.mass_shooting_probability()
    # 3 significant figures on the annual per-school probabilities
    assert float(f"{school.per_school_annual:.3g}") == 1.45e-4
    assert float(f"{mass.per_school_annual:.3g}") == 1.23e-5
    # reciprocals within +/-1 (published rounding)
    assert abs(school.one_in_rounded() - 6881) <= 1
    assert abs(mass.one_in_rounded() - 81604) <= 1
    # mass-case lifetime exposure to 2 significant figures (percent)
    mass_lifetime = stats.lifetime_exposure(mass.per_school_annual,
                                            published.EDUCATION_YEARS)
    assert f"{mass_lifetime * 100:.2g}" == "0.021"
    # the school-case delta against the published 0.245% is reported only
    school_lifetime = stats.lifetime_exposure(school.per_school_annual,
                                              published.EDUCATION_YEARS)
    print(f"school lifetime exposure: computed {school_lifetime * 100:.4f}% "
          f"vs published 0.245% (delta reported, not asserted)")


def _t_cdf_oracle(r: float, n: int) -> float:
    df = n - 2
    t = abs(r) * math.sqrt(df / (1.0 - r * r))

    def density(u):
        return math.exp(math.lgamma((df + 1) / 2) - math.lgamma(df / 2)
                        - 0.5 * math.log(df * math.pi)
                        - (df + 1) / 2 * math.log1p(u * u / df))

    tail, _ = integrate.quad(density, t, math.inf)
    return 2.0 * tail


def test_criterion_3_correlation_suite(incidents):
    table = {c.factor: c for c in stats.correlation_table(incidents)}
    assert table["bullets"].r == pytest.approx(0.592, abs=0.02)
    assert table["dist_police_km"].r == pytest.approx(-0.342, abs=0.03)
    # recomputed p-values against an independent quadrature t-CDF oracle;
    # printed p-values are documented as inconsistent and not asserted
    for res in table.values():
        assert res.p_two_tailed == pytest.approx(
            _t_cdf_oracle(res.r, res.n), abs=1e-6)


def test_criterion_4_timeline_suite(incidents):
    subset = corpus.timeline_subset(incidents)
    rows = {r["id"]: r for r in corpus.load_published_phases()}
    breakdowns = [timeline.breakdown_from_published(rows[inc.id]) for inc in subset]
    casualties = [rows[inc.id]["casualty"] for inc in subset]
    avg = timeline.phase_averages(breakdowns, casualties)
    assert avg.mean_kiv == pytest.approx(15.3, abs=0.05)
    assert avg.mean_va == pytest.approx(3.2, abs=0.05)
    assert avg.mean_pom == pytest.approx(3.6, abs=0.05)
    assert avg.mean_shootout == pytest.approx(24.2, abs=0.05)
    assert avg.mean_crime_time == pytest.approx(31.0, abs=0.05)
    assert avg.casualties_per_minute == pytest.approx(0.639, abs=0.005)
    # raw timestamps reproduce published phase rows 2 and 16 exactly
    by_id = {inc.id: inc for inc in subset}
    for incident_id in (2, 16):
        derived = timeline.derive_phases(by_id[incident_id])
        pub = rows[incident_id]
        assert derived.phases() == (pub["kiv_min"], pub["va_min"],
                                    pub["pom_min"], pub["shootout_min"])
        assert derived.crime_time_min == pub["crime_time_min"]


def test_criterion_5_location_suite(incidents):
    hist = {loc: (n, pct) for loc, n, pct in corpus.location_histogram(incidents)}
    assert hist["classroom"] == (13, 30.23)
    assert hist["hallway"] == (9, 20.93)
    assert hist["outside"] == (6, 13.95)


def test_criterion_6_forecast_deterministic(incidents, harness):
    start = time.perf_counter()
    for target in forecast.TARGETS:
        data = forecast.build_dataset(incidents, target, "with_covid")
        train, test = forecast.split_train_test(data)
        model = forecast.fit_ols(train)
        forecast.metrics(test.ys, forecast.predict(model, test.years))
        forecast.predict(model, forecast.PREDICT_YEARS)
    assert time.perf_counter() - start < 1.0
    rows = {(r.model_id, r.target): r for r in harness}
    events = rows[("2a", "events")]
    casualties = rows[("2a", "casualties")]
    assert events.predictions[2025] == pytest.approx(2.13, abs=0.02)
    assert casualties.predictions[2025] == pytest.approx(30.77, abs=0.3)
    # Held-out error metrics: the published values are not reproducible from
    # any split of this series we could identify (exhaustive residual-subset
    # and shuffled-split searches both came up empty); asserted as stated and
    # expected to fail until the original protocol is known.  See README.
    assert events.mse == pytest.approx(5.54, abs=0.1)
    assert events.mae == pytest.approx(1.87, abs=0.05)


def test_criterion_7_forecast_properties(incidents, harness):
    events = forecast.build_dataset(incidents, "events", "with_covid")
    train, _ = forecast.split_train_test(events)
    # EM log-likelihood is monotone
    zip_model = forecast.fit_zip(train)
    trace = zip_model.ll_trace
    assert all(b >= a - 1e-9 for a, b in zip(trace, trace[1:]))
    # frozen-pi ZIP equals an independent Poisson regression fit (1e-6)
    sm = pytest.importorskip("statsmodels.api")
    import numpy as np
    frozen = forecast.fit_zip(train, freeze_pi=True)
    glm = sm.GLM(np.array(train.ys, float), sm.add_constant(train.xs),
                 family=sm.families.Poisson()).fit()
    assert frozen.b0 == pytest.approx(glm.params[0], abs=1e-6)
    assert frozen.b1 == pytest.approx(glm.params[1], abs=1e-6)
    # SVR optimality certificates at defaults
    for kernel in ("linear", "rbf"):
        svr = forecast.fit_svr(train, kernel=kernel)
        assert svr.kkt_residual < 1e-6
        assert svr.duality_gap < 1e-6
    # qualitative 2025 bands at documented defaults
    rows = {(r.model_id, r.target): r for r in harness}
    assert 2.0 <= rows[("1a", "events")].predictions[2025] <= 3.0
    assert 1.0 <= rows[("3a", "events")].predictions[2025] <= 2.0
    assert 1.0 <= rows[("4a", "events")].predictions[2025] <= 2.0


def test_criterion_8_game_theory_properties():
    start = time.perf_counter()
    scenario, policy = gametheory.default_scenario()

    # best responses equal independent re-enumeration on a >= 1000 point grid
    grid = gametheory.schedule_grid(scenario)
    assert len(grid) >= 1000
    _, best = gametheory.shooter_best_response(scenario, policy, grid)
    naive = max(gametheory.simulate(scenario, s, policy).total_loss() for s in grid)
    assert best.total_loss() == naive

    schedule = grid[0]
    policies = gametheory.policy_grid(range(1, 101), [0.25, 0.5, 1.0, 1.5, 2.0,
                                                      2.5, 3.0, 3.5, 4.0, 4.5],
                                      policy.stop_rate, policy.unexpected_cost_rate)
    assert len(policies) >= 1000
    _, best_def = gametheory.defender_best_response(scenario, schedule, policies)
    naive_def = max(gametheory.simulate(scenario, schedule, p).defender_payoff
                    for p in policies)
    assert best_def.defender_payoff == naive_def

    # loss monotonicity over a 100-scenario randomized sweep (fixed seed)
    rng = random.Random(20240824)
    for _ in range(100):
        horizon = rng.randint(10, 40)
        t_attack = rng.randint(0, horizon // 3)
        t_cop = rng.randint(t_attack, horizon - 2)
        base = gametheory.Scenario(
            n_shooters=rng.randint(1, 3),
            bullet_budget=rng.randint(5, 60),
            horizon_min=horizon, t_attack=t_attack, t_cop=t_cop,
            victims=tuple(rng.uniform(0.1, 2.0) for _ in range(rng.randint(1, 8))),
            material_cost_per_min=rng.uniform(0.0, 1.0),
            miller=gametheory.MillerCurve(rng.uniform(0.01, 1.0),
                                          rng.uniform(0.3, 0.95)))
        pol = gametheory.DefenderPolicy(
            officers=rng.randint(1, 8), weapon_level=rng.uniform(0.5, 2.0),
            stop_rate=rng.uniform(0.01, 0.3))
        window = base.horizon_min - base.t_attack
        sched = [0] * base.horizon_min
        per, extra = divmod(base.bullet_budget, window)
        for i, t in enumerate(range(base.t_attack, base.horizon_min)):
            sched[t] = per + (1 if i < extra else 0)
        # later police arrival never reduces expected victim loss
        loss_now = gametheory.simulate(base, sched, pol).loss_v
        later = dataclasses.replace(base, t_cop=min(base.t_cop + 2, horizon))
        assert gametheory.simulate(later, sched, pol).loss_v >= loss_now - 1e-9
        # a larger bullet budget never reduces the best-response loss
        lengths = range(1, 8)
        _, small = gametheory.shooter_best_response(
            base, pol, gametheory.schedule_grid(base, rates=(2, 4),
                                                window_lengths=lengths))
        bigger = dataclasses.replace(base, bullet_budget=base.bullet_budget * 2)
        _, large = gametheory.shooter_best_response(
            bigger, pol, gametheory.schedule_grid(bigger, rates=(2, 4),
                                                  window_lengths=lengths))
        assert large.total_loss() >= small.total_loss() - 1e-9

    # calibration hits the observed casualties-per-minute within 1e-6
    curve = gametheory.calibrate(0.639)
    cal_scenario, cal_schedule, cal_policy = gametheory.default_calibration_scenario(
        curve.i_high)
    assert gametheory.simulated_casualty_rate(
        cal_scenario, cal_schedule, cal_policy) == pytest.approx(0.639, abs=1e-6)
    assert time.perf_counter() - start < 10.0


def test_criterion_9_report_determinism(tmp_path):
    first = tmp_path / "first"
    second = tmp_path / "second"
    assert cli.run(["report", "--out", str(first)]) == 0
    assert cli.run(["report", "--out", str(second)]) == 0
    names = sorted(p.name for p in first.iterdir())
    assert names == sorted(p.name for p in second.iterdir())
    match, mismatch, errors = filecmp.cmpfiles(first, second, names, shallow=False)
    assert mismatch == [] and errors == []
    assert sorted(match) == names
