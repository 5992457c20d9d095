import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from conftest import make_config
from internal.CoreModel import TaskDesign, beta_params_from_mean_var
from internal.Errors import DomainError, EmptyVector
from internal.WorkerSimulator import (
    SampledWorker,
    baseline_mean,
    cast_vote,
    cast_votes,
    design_accuracy,
    draw_worker,
    machine_verdicts,
    same_task_mean,
    sample_accuracy_tensor,
    sample_worker,
    sample_workers,
)


def test_same_task_mean():
    assert same_task_mean([0.6, 0.8]) == pytest.approx(0.7)
    with pytest.raises(EmptyVector):
        same_task_mean([])


def test_baseline_mean_limits():
    assert baseline_mean([0.8, 0.8], 0.0) == pytest.approx(0.8)
    assert baseline_mean([0.8, 0.6], 1.0) == pytest.approx(0.5)
    assert baseline_mean([0.8], 0.5) == pytest.approx(0.65)
    with pytest.raises(DomainError):
        baseline_mean([0.8], 1.5)


def test_sample_worker_in_unit_interval():
    rng = np.random.default_rng(0)
    draws = [sample_worker(14.0, 6.0, rng) for _ in range(200)]
    assert all(0.0 <= a <= 1.0 for a in draws)


def test_sample_workers_match_beta_distribution():
    alpha, beta = beta_params_from_mean_var(0.7, 0.01)
    draws = sample_workers(alpha, beta, 5000, np.random.default_rng(3))
    result = stats.kstest(draws, stats.beta(alpha, beta).cdf)
    assert result.pvalue > 0.001


def test_sample_workers_rejects_bad_shape():
    with pytest.raises(DomainError):
        sample_workers(0.0, 1.0, 3, np.random.default_rng(0))


def test_cast_vote_extremes():
    rng = np.random.default_rng(1)
    assert all(cast_vote(1, 1.0, rng) == 1 for _ in range(20))
    assert all(cast_vote(1, 0.0, rng) == 0 for _ in range(20))


def test_cast_votes_broadcast_and_rate():
    rng = np.random.default_rng(2)
    truths = np.ones((4000, 1), dtype=np.int8)
    votes = cast_votes(truths, np.full((4000, 3), 0.8), rng)
    assert votes.shape == (4000, 3)
    assert votes.dtype == np.int8
    assert votes.mean() == pytest.approx(0.8, abs=0.02)


def test_cast_votes_consumes_one_uniform_per_vote():
    accuracies = np.array([0.3, 0.6, 0.9])
    rng = np.random.default_rng(5)
    scalar = [cast_vote(0, a, rng) for a in accuracies]
    vector = cast_votes(np.zeros(3), accuracies, np.random.default_rng(5))
    assert list(vector) == scalar


def test_design_accuracy():
    spec = make_config(n=2, mu=0.8, gamma=1.0).complex_predicate
    assert design_accuracy(spec, TaskDesign.BASELINE) == [(pytest.approx(0.5), pytest.approx(0.04))]
    assert len(design_accuracy(spec, TaskDesign.SAME_TASK)) == 2
    assert design_accuracy(spec, TaskDesign.SEPARATE_TASKS) == [(0.8, 0.04), (0.8, 0.04)]


def test_machine_verdicts():
    bits = np.array([1, 0, 1, 0], dtype=np.int8)
    assert list(machine_verdicts(bits, 1.0, np.random.default_rng(0))) == [1, 0, 1, 0]
    assert list(machine_verdicts(bits, 0.0, np.random.default_rng(0))) == [0, 1, 0, 1]
    with pytest.raises(DomainError):
        machine_verdicts(bits, 1.2, np.random.default_rng(0))


def test_sample_accuracy_tensor_moments():
    draws = sample_accuracy_tensor(0.7, 0.04, (200, 50), np.random.default_rng(9))
    assert draws.shape == (200, 50)
    assert draws.mean() == pytest.approx(0.7, abs=0.01)
    assert draws.var() == pytest.approx(0.04, abs=0.005)


def test_sample_worker_moments():
    rng = np.random.default_rng(12)
    draws = np.array([sample_worker(14.0, 6.0, rng) for _ in range(100_000)])
    assert draws.mean() == pytest.approx(0.7, abs=0.004)
    assert draws.var() == pytest.approx(0.01, abs=0.002)
    uniform = sample_workers(1.0, 1.0, 100_000, rng)
    assert uniform.mean() == pytest.approx(0.5, abs=0.005)


def test_concentrated_beta():
    assert sample_worker(1e9, 1e9, np.random.default_rng(0)) == pytest.approx(0.5, abs=0.001)


def test_draw_worker_votes():
    worker = draw_worker("w1", "p1", 0.7, 0.01, np.random.default_rng(4))
    assert worker.scope == "p1"
    assert 0.0 <= worker.accuracy <= 1.0
    assert worker.vote(1, np.random.default_rng(0)) in (0, 1)
    with pytest.raises(DomainError):
        SampledWorker("w2", 1.5, "P")


@given(
    st.integers(min_value=0, max_value=2 ** 32),
    st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=1, max_size=30),
)
def test_swapped_truth_gives_complementary_votes(seed, accuracies):
    accuracies = np.array(accuracies)
    zeros = cast_votes(np.zeros(len(accuracies)), accuracies, np.random.default_rng(seed))
    ones = cast_votes(np.ones(len(accuracies)), accuracies, np.random.default_rng(seed))
    assert np.array_equal(ones, 1 - zeros)
    rng_a, rng_b = np.random.default_rng(seed), np.random.default_rng(seed)
    assert [cast_vote(1, a, rng_a) for a in accuracies] == [1 - cast_vote(0, a, rng_b) for a in accuracies]


@given(
    st.lists(st.floats(min_value=0.01, max_value=0.99), min_size=1, max_size=6),
    st.floats(min_value=0.0, max_value=1.0),
)
def test_baseline_mean_is_affine_in_penalty(mus, gamma):
    at_zero, at_one = baseline_mean(mus, 0.0), baseline_mean(mus, 1.0)
    assert baseline_mean(mus, gamma) == pytest.approx(at_zero + gamma * (at_one - at_zero), abs=1e-12)


def test_sampled_workers_match_vectorized_path():
    rng = np.random.default_rng(8)
    workers = [draw_worker(f"w{k}", "P", 0.7, 0.01, rng) for k in range(5)]
    tensor = sample_accuracy_tensor(0.7, 0.01, 5, np.random.default_rng(8))
    assert [w.accuracy for w in workers] == list(tensor)
    truths = [1, 0, 1, 1, 0]
    rng = np.random.default_rng(9)
    votes = [w.vote(t, rng) for w, t in zip(workers, truths)]
    assert votes == list(cast_votes(np.array(truths), tensor, np.random.default_rng(9)))
