import random

import numpy as np
import pytest

from curiosim.experiment import (
    THREADS_ENV,
    ExperimentSpec,
    aggregate,
    experiment_spec,
    run_experiment,
    run_trial,
    run_trials,
    scenario_suite,
    trial_rng,
    worker_count,
)
from curiosim.gridworld import GridPosition as P
from curiosim.planner import CuriosityRewardMode as Mode


@pytest.fixture(scope="module")
def small():
    return experiment_spec("primary", trials=4, steps=600, base_seed=11)


@pytest.fixture(scope="module")
def small_logs(small):
    return run_trials(small, workers=1)


def test_visits_sum_to_steps(small_logs, small):
    for log in small_logs:
        assert log.visit_counts.sum() == small.steps
        assert log.visit_counts[5, 5] >= 1  # start cell counted at t = 0
        assert log.curves.shape == (small.steps, 10)


def test_trials_are_deterministic(small):
    a, b = run_trial(small, 2), run_trial(small, 2)
    np.testing.assert_array_equal(a.visit_counts, b.visit_counts)
    np.testing.assert_array_equal(a.v_final, b.v_final)
    np.testing.assert_array_equal(a.curves, b.curves)


def test_trial_streams_differ():
    assert trial_rng(0, 0).integers(2**62) != trial_rng(0, 1).integers(2**62)
    assert trial_rng(0, 0).integers(2**62) != trial_rng(1, 0).integers(2**62)


def test_aggregate_is_order_independent(small, small_logs):
    shuffled = list(small_logs)
    random.Random(4).shuffle(shuffled)
    a, b = aggregate(small, small_logs), aggregate(small, shuffled)
    np.testing.assert_array_equal(a.mean_v, b.mean_v)
    np.testing.assert_array_equal(a.std_curves, b.std_curves)
    assert a.per_trial_target_visits == b.per_trial_target_visits


def test_parallel_matches_serial(small, small_logs):
    par = run_trials(small, workers=2)
    for s, p in zip(small_logs, par):
        assert s.trial_index == p.trial_index
        np.testing.assert_array_equal(s.v_final, p.v_final)


def test_induction_bookkeeping(small_logs):
    for log in small_logs:
        assert log.induction_count == log.first_target_visits + log.replaced_unvisited + log.unvisited_at_end
        assert log.subsequent_target_visits == 0


def test_inducing_value_curve_is_non_decreasing(small_logs):
    for log in small_logs:
        assert (np.diff(log.curves[:, 0]) >= 0).all()


def test_single_trial_std_is_zero():
    res = run_experiment(experiment_spec("primary", trials=1, steps=200))
    assert not res.std_v.any() and not res.std_curves.any()
    assert res.target_visit_std == 0.0


def test_sample_std_convention(small, small_logs):
    res = aggregate(small, small_logs)
    stack = np.stack([log.v_final for log in small_logs])
    np.testing.assert_allclose(res.std_v, stack.std(axis=0, ddof=1))
    assert res.target_visit_std == pytest.approx(np.std(res.per_trial_target_visits, ddof=1))


def test_aggregate_rejects_missing_logs(small, small_logs):
    with pytest.raises(ValueError):
        aggregate(small, small_logs[:-1])


def test_voluntary_ablation_never_learns():
    res = run_experiment(experiment_spec("primary", "ablate-voluntary", trials=2, steps=500))
    assert not res.mean_v.any() and not res.mean_curves.any()


def test_snapshots():
    spec = ExperimentSpec("primary", trials=1, steps=100, snapshot_every=25)
    log = run_trial(spec, 0)
    assert [t for t, _ in log.snapshots] == [24, 49, 74, 99]
    np.testing.assert_array_equal(log.snapshots[-1][1], log.v_final)


@pytest.mark.parametrize("kwargs", [dict(trials=0), dict(steps=0), dict(base_seed=-1),
                                    dict(snapshot_every=0)])
def test_spec_validation(kwargs):
    with pytest.raises(ValueError):
        ExperimentSpec("primary", **kwargs)


def test_unknown_scenario_rejected():
    with pytest.raises(ValueError, match="atlantis"):
        ExperimentSpec("atlantis")


def test_trial_index_range(small):
    with pytest.raises(ValueError):
        run_trial(small, small.trials)


def test_worker_count(monkeypatch):
    monkeypatch.delenv(THREADS_ENV, raising=False)
    assert worker_count() == 1
    monkeypatch.setenv(THREADS_ENV, "3")
    assert worker_count() == 3
    monkeypatch.setenv(THREADS_ENV, "lots")
    with pytest.raises(ValueError):
        worker_count()


def test_scenario_suite_contents():
    suite = scenario_suite()
    assert len(suite) == 10
    orig = suite["primary-original"]
    assert (orig.trials, orig.steps, orig.base_seed) == (30, 5000, 0)
    assert suite["primary-positive-quality"].config.reward_mode is Mode.POSITIVE
    assert suite["primary-ablate-aversive"].config.reward_mode is Mode.ABLATED
    assert {s.scenario for s in suite.values()} == {"primary", "wide", "wide_no_junction",
                                                    "tall_low", "tall_mid"}


def test_tracked_cells_order(small):
    assert small.tracked_cells() == [P(5, 5)] + [P(1, c) for c in range(1, 10)]
