"""
WorkerSimulator - Worker accuracy sampling and stochastic binary votes.

Accuracies come from Beta distributions parameterized by mean and variance.
A vote agrees with the truth with probability equal to the worker's accuracy
and is flipped otherwise; one uniform is consumed per vote regardless of the
truth, so swapping the truth yields the complementary vote stream.
"""
import logging
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from .CoreModel import ComplexPredicateSpec, TaskDesign, beta_params_from_mean_var
from .Errors import DomainError, EmptyVector

logger = logging.getLogger(__name__)


def same_task_mean(mus: Sequence[float]) -> float:
    """Expected accuracy of a worker answering all n questions in one task."""
    if len(mus) == 0:
        raise EmptyVector("same_task_mean needs at least one predicate mean")
    return float(sum(mus)) / len(mus)


def baseline_mean(mus: Sequence[float], gamma: float) -> float:
    """
    Expected accuracy on the complex question.

    Linear shrinkage of the same-task mean toward chance: gamma=0 leaves it
    unchanged, gamma=1 gives 0.5. The exact adjustment used for published
    results is not known; this function is the only place it is defined.
    """
    if not 0.0 <= gamma <= 1.0:
        raise DomainError(f"penalty gamma must lie in [0, 1], got {gamma}")
    mean = same_task_mean(mus)
    return mean - gamma * (mean - 0.5)


def _check_shape(alpha: float, beta: float) -> None:
    if not (alpha > 0.0 and beta > 0.0):
        raise DomainError(f"Beta shape parameters must be positive, got ({alpha}, {beta})")


def sample_worker(alpha: float, beta: float, rng: np.random.Generator) -> float:
    """Draw one worker accuracy from Beta(alpha, beta)."""
    _check_shape(alpha, beta)
    return float(rng.beta(alpha, beta))


def sample_workers(alpha: float, beta: float, shape, rng: np.random.Generator) -> np.ndarray:
    """Array form of sample_worker."""
    _check_shape(alpha, beta)
    return rng.beta(alpha, beta, size=shape)


def cast_vote(truth: int, accuracy: float, rng: np.random.Generator) -> int:
    """Return the truth with probability `accuracy`, its complement otherwise."""
    correct = rng.random() < accuracy
    return int(truth) if correct else 1 - int(truth)


def cast_votes(truths: np.ndarray, accuracies: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """
    Array form of cast_vote.

    `truths` broadcasts against `accuracies`; the result has the broadcast
    shape and dtype int8.
    """
    truths, accuracies = np.broadcast_arrays(np.asarray(truths, dtype=np.int8), accuracies)
    correct = rng.random(accuracies.shape) < accuracies
    return np.where(correct, truths, 1 - truths).astype(np.int8)


def design_accuracy(spec: ComplexPredicateSpec, design: TaskDesign) -> List[Tuple[float, float]]:
    """
    Per-question (mean, variance) of worker accuracy under a task design.

    Baseline has a single complex question; SameTask shares one distribution
    over the n questions; SeparateTasks keeps each predicate's own moments.
    Pooled designs use the average predicate variance, which is always
    feasible for the pooled mean.
    """
    variance = sum(spec.variances) / spec.n
    if design is TaskDesign.BASELINE:
        return [(baseline_mean(spec.mus, spec.penalty), variance)]
    if design is TaskDesign.SAME_TASK:
        return [(same_task_mean(spec.mus), variance)] * spec.n
    return list(zip(spec.mus, spec.variances))


def machine_verdicts(bits: np.ndarray, accuracy: float, rng: np.random.Generator) -> np.ndarray:
    """A fixed-accuracy classifier's verdict on one predicate for every item."""
    if not 0.0 <= accuracy <= 1.0:
        raise DomainError(f"machine accuracy must lie in [0, 1], got {accuracy}")
    return cast_votes(bits, np.full(np.shape(bits), accuracy), rng)


def sample_accuracy_tensor(
    mean: float,
    variance: float,
    shape,
    rng: np.random.Generator,
) -> np.ndarray:
    """Worker accuracies for one question distribution, shaped for vote casting."""
    alpha, beta = beta_params_from_mean_var(mean, variance)
    return sample_workers(alpha, beta, shape, rng)


@dataclass(frozen=True)
class SampledWorker:
    """
    A worker with the accuracy drawn for one question scope (P, a same task or one pj).

    Scalar reference for the vectorized engine path. sample_accuracy_tensor
    yields the accuracies that repeated draw_worker calls give on the same
    stream, and cast_votes the votes of repeated vote calls.
    """

    worker_id: str
    accuracy: float
    scope: str

    def __post_init__(self):
        if not 0.0 <= self.accuracy <= 1.0:
            raise DomainError(f"worker accuracy must lie in [0, 1], got {self.accuracy}")

    def vote(self, truth: int, rng: np.random.Generator) -> int:
        return cast_vote(truth, self.accuracy, rng)


def draw_worker(worker_id: str, scope: str, mean: float, variance: float, rng: np.random.Generator) -> SampledWorker:
    """Sample one worker for `scope`; one element of sample_accuracy_tensor on the same stream."""
    alpha, beta = beta_params_from_mean_var(mean, variance)
    return SampledWorker(worker_id, sample_worker(alpha, beta, rng), scope)
