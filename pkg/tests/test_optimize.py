import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pivotfit import (
    FitError,
    GAConfig,
    ParamBounds,
    PivotParams,
    SignalPair,
    deviation_score,
    evaluate,
    fit,
    simulate,
)
from oracles import score_loop_oracle as loop_oracle


def test_score_identical_is_zero():
    a = np.linspace(-3, 7, 50)
    assert deviation_score(a, a.copy()) == 0.0


def test_score_hand_value():
    assert deviation_score([1.0, 2.0], [0.0, 0.0]) == 5.0


def test_score_symmetry():
    rng = np.random.default_rng(1)
    a, b = rng.normal(size=30), rng.normal(size=30)
    assert deviation_score(a, b) == deviation_score(b, a)


def test_score_length_mismatch():
    with pytest.raises(ValueError):
        deviation_score([1.0, 2.0], [1.0, 2.0, 3.0])


@settings(max_examples=50, deadline=None)
@given(
    st.lists(
        st.floats(min_value=-1e3, max_value=1e3, allow_nan=False),
        min_size=1,
        max_size=200,
    )
)
def test_score_matches_loop_oracle_exactly(values):
    rng = np.random.default_rng(len(values))
    a = np.asarray(values)
    b = rng.normal(0, 10, a.shape)
    assert deviation_score(a, b) == loop_oracle(a.tolist(), b.tolist())


def test_evaluate_self_consistency(round_trip_record):
    record, backbone, truth = round_trip_record
    assert evaluate(truth, backbone, record) <= 1e-9 * float(np.sum(record.load**2))


def test_evaluate_zero_record(symmetric_backbone):
    record = SignalPair(np.zeros(10), np.zeros(10))
    assert evaluate(PivotParams(5, 5, 0.5, 0.5, 10), symmetric_backbone, record) == 0.0


def test_perturbing_each_parameter_increases_score(round_trip_record):
    record, backbone, truth = round_trip_record
    base = evaluate(truth, backbone, record)
    arr = truth.as_array()
    for i in range(5):
        for factor in (0.85, 1.15):
            p = arr.copy()
            p[i] *= factor
            assert evaluate(PivotParams.from_array(p), backbone, record) > base


def test_config_validation():
    GAConfig().validate()
    with pytest.raises(ValueError):
        GAConfig(population_size=0).validate()
    with pytest.raises(ValueError):
        GAConfig(elite_count=50, population_size=50).validate()
    with pytest.raises(ValueError):
        GAConfig(crossover_probability=1.5).validate()
    with pytest.raises(ValueError):
        GAConfig(bounds=ParamBounds(alpha1=(0.5, 10))).validate()
    with pytest.raises(ValueError):
        GAConfig(bounds=ParamBounds(beta1=(0.8, 0.2))).validate()


def small_fit(record, backbone, **kwargs):
    defaults = dict(
        population_size=20, max_generations=25, stall_generations=25, rng_seed=3
    )
    defaults.update(kwargs)
    return fit(record, backbone, GAConfig(**defaults))


def test_history_best_non_increasing(round_trip_record):
    record, backbone, _ = round_trip_record
    _, history = small_fit(record, backbone)
    best = np.array(history.best_score)
    assert np.all(np.diff(best) <= 0)


def test_fixed_seed_reproducible(round_trip_record):
    record, backbone, _ = round_trip_record
    best1, h1 = small_fit(record, backbone)
    best2, h2 = small_fit(record, backbone)
    assert best1 == best2
    np.testing.assert_array_equal(h1.best_score, h2.best_score)
    np.testing.assert_array_equal(h1.mean_score, h2.mean_score)
    np.testing.assert_array_equal(
        np.vstack(h1.best_params), np.vstack(h2.best_params)
    )


def test_worker_count_does_not_change_results(round_trip_record):
    record, backbone, _ = round_trip_record
    best1, h1 = small_fit(record, backbone, max_generations=8, workers=1)
    best2, h2 = small_fit(record, backbone, max_generations=8, workers=2)
    assert best1 == best2
    np.testing.assert_array_equal(h1.best_score, h2.best_score)
    np.testing.assert_array_equal(h1.mean_score, h2.mean_score)


def test_best_params_respect_bounds(round_trip_record):
    record, backbone, _ = round_trip_record
    bounds = ParamBounds(alpha1=(2.0, 20.0), eta=(0.0, 100.0))
    best, history = small_fit(record, backbone, bounds=bounds)
    lo, hi = bounds.lower(), bounds.upper()
    for params in history.best_params:
        assert np.all(params >= lo) and np.all(params <= hi)


def test_stall_stops_early(round_trip_record):
    record, backbone, _ = round_trip_record
    _, history = small_fit(
        record, backbone, max_generations=2000, stall_generations=5
    )
    assert len(history) < 2000


def test_all_failures_raise_fit_error(symmetric_backbone):
    bad = SignalPair(np.array([0.0, np.nan, 1.0]), np.array([0.0, 1.0, 2.0]))
    with pytest.raises(FitError):
        fit(bad, symmetric_backbone, GAConfig(population_size=5, max_generations=2))


def test_round_trip_recovery_quick(round_trip_record):
    record, backbone, truth = round_trip_record
    best, history = fit(
        record,
        backbone,
        GAConfig(population_size=30, max_generations=120, stall_generations=40, rng_seed=11),
    )
    sum_sq = float(np.sum(record.load**2))
    assert history.best_score[-1] <= 5e-3 * sum_sq
    response = simulate(backbone, best, record.displacement)
    assert np.abs(response - record.load).max() <= 0.05 * np.abs(record.load).max()


def test_history_rows_shape(round_trip_record):
    record, backbone, _ = round_trip_record
    _, history = small_fit(record, backbone, max_generations=5)
    rows = list(history.rows())
    assert rows[0][0] == 1
    assert len(rows[0]) == 8
