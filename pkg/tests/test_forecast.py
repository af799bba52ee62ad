import math

import numpy as np
import pytest
import statsmodels.api as sm
from hypothesis import given, strategies as st

from schoolrisk import corpus, forecast


@pytest.fixture(scope="module")
def incidents():
    return corpus.load_bundled()


@pytest.fixture(scope="module")
def events_full(incidents):
    return forecast.build_dataset(incidents, "events", "with_covid")


# ---------------------------------------------------------------------------
# datasets and splitting


def test_build_dataset_variants(incidents):
    full = forecast.build_dataset(incidents, "events", "with_covid")
    trimmed = forecast.build_dataset(incidents, "events", "without_covid")
    wide = forecast.build_dataset(incidents, "events", "without_covid",
                                  drop_full_pandemic=True)
    assert len(full) == 26
    assert set(full.years) - set(trimmed.years) == {2022, 2023}
    assert set(full.years) - set(wide.years) == {2020, 2021, 2022, 2023}


def test_split_is_chronological_80_20(events_full):
    train, test = forecast.split_train_test(events_full)
    assert len(test) == math.ceil(0.2 * len(events_full))
    assert max(train.years) < min(test.years)
    assert train.years + test.years == events_full.years


def test_dataset_rejects_unsorted_years():
    with pytest.raises(ValueError):
        forecast.RegressionDataset((2001, 2000), (1, 2), "with_covid")


# ---------------------------------------------------------------------------
# OLS


def test_ols_matches_lstsq_oracle(events_full):
    model = forecast.fit_ols(events_full)
    design = np.column_stack([np.ones(len(events_full)), events_full.xs])
    coef, *_ = np.linalg.lstsq(design, np.array(events_full.ys, float), rcond=None)
    assert model.intercept == pytest.approx(coef[0], abs=1e-10)
    assert model.slope == pytest.approx(coef[1], abs=1e-10)


def test_predict_rejects_out_of_range_years(events_full):
    model = forecast.fit_ols(events_full)
    with pytest.raises(ValueError):
        forecast.predict(model, [1901])
    clamped = forecast.predict(model, [1999], clamp=True)
    assert clamped[0] >= 0.0


# ---------------------------------------------------------------------------
# ZIP


def test_zip_loglikelihood_monotone(events_full):
    model = forecast.fit_zip(events_full)
    assert model.converged
    trace = model.ll_trace
    assert all(b >= a - 1e-9 for a, b in zip(trace, trace[1:]))


def test_zip_frozen_pi_matches_poisson_glm(events_full):
    model = forecast.fit_zip(events_full, freeze_pi=True)
    design = sm.add_constant(events_full.xs)
    glm = sm.GLM(np.array(events_full.ys, float), design,
                 family=sm.families.Poisson()).fit()
    assert model.b0 == pytest.approx(glm.params[0], abs=1e-6)
    assert model.b1 == pytest.approx(glm.params[1], abs=1e-6)


def test_zip_mixture_beats_or_ties_plain_poisson(events_full):
    zip_ll = forecast.fit_zip(events_full).log_likelihood
    poisson_ll = forecast.fit_zip(events_full, freeze_pi=True).log_likelihood
    assert zip_ll >= poisson_ll - 1e-6


def test_zip_rejects_non_count_data():
    data = forecast.RegressionDataset((2000, 2001, 2002), (1, -2, 3), "with_covid")
    with pytest.raises(ValueError):
        forecast.fit_zip(data)


# ---------------------------------------------------------------------------
# SVR


@pytest.mark.parametrize("kernel", ["linear", "rbf"])
def test_svr_optimality_certificates(events_full, kernel):
    model = forecast.fit_svr(events_full, kernel=kernel)
    assert model.kkt_residual < 1e-6
    assert model.duality_gap < 1e-6
    assert np.all(np.abs(model.dual_coefs) <= model.c + 1e-12)
    assert abs(model.dual_coefs.sum()) < 1e-9


def test_svr_interpolates_well_within_epsilon():
    # easy noiseless line: every residual must fall inside the epsilon tube
    data = forecast.RegressionDataset(
        tuple(range(2000, 2012)), tuple(range(12)), "with_covid")
    model = forecast.fit_svr(data, kernel="linear", c=100.0, epsilon=0.1)
    preds = forecast.predict(model, list(data.years))
    assert max(abs(p - y) for p, y in zip(preds, data.ys)) <= 0.1 + 1e-6


def test_default_gamma_is_inverse_double_variance(events_full):
    xs = events_full.xs
    assert forecast.default_gamma(xs) == pytest.approx(1.0 / (2.0 * np.var(xs)))


# ---------------------------------------------------------------------------
# metrics


@given(st.lists(st.tuples(st.floats(-100, 100), st.floats(-100, 100)),
                min_size=1, max_size=20),
       st.randoms(use_true_random=False))
def test_metrics_permutation_invariant(pairs, rnd):
    actual = [p[0] for p in pairs]
    predicted = [p[1] for p in pairs]
    base = forecast.metrics(actual, predicted)
    order = list(range(len(pairs)))
    rnd.shuffle(order)
    shuffled = forecast.metrics([actual[i] for i in order],
                                [predicted[i] for i in order])
    assert shuffled.mse == pytest.approx(base.mse, rel=1e-9, abs=1e-9)
    assert shuffled.mae == pytest.approx(base.mae, rel=1e-9, abs=1e-9)


def test_metrics_mape_excludes_zero_actuals():
    m = forecast.metrics([0.0, 2.0], [1.0, 1.0])
    assert m.n_mape_excluded == 1
    assert m.mape == pytest.approx(0.5)
    all_zero = forecast.metrics([0.0], [3.0])
    assert all_zero.mape is None and all_zero.n_mape_excluded == 1


# ---------------------------------------------------------------------------
# harness


def test_harness_shape_and_labels(incidents):
    rows = forecast.run_harness(incidents)
    assert len(rows) == 16
    ids = [r.model_id for r in rows if r.target == "events"]
    assert ids == ["1a", "1b", "2a", "2b", "3a", "3b", "4a", "4b"]
    for row in rows:
        assert set(row.predictions) == set(forecast.PREDICT_YEARS)
        assert row.training_data == forecast.TRAINING_LABELS[row.training_variant]
        assert all(v >= 0.0 for v in row.predictions_clamped.values())


def test_harness_is_deterministic(incidents):
    a = forecast.run_harness(incidents, targets=("events",))
    b = forecast.run_harness(incidents, targets=("events",))
    assert [r.predictions for r in a] == [r.predictions for r in b]
    assert [r.mse for r in a] == [r.mse for r in b]
