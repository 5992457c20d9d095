"""
Metrics - Confusion counts and F-beta scoring with IN as the positive class.
"""
import math
from dataclasses import dataclass
from typing import Hashable, Mapping

import numpy as np

from .Errors import DomainError, KeyMismatch, NoPositives


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @property
    def has_positives(self) -> bool:
        """False when there is no positive truth and no positive prediction."""
        return self.tp + self.fp + self.fn > 0


def confusion(decisions: Mapping[Hashable, int], truths: Mapping[Hashable, int]) -> ConfusionCounts:
    """Count outcomes over items present in both maps; keys must match exactly."""
    difference = set(decisions) ^ set(truths)
    if difference:
        raise KeyMismatch(difference)
    tp = fp = tn = fn = 0
    for item, decision in decisions.items():
        truth = int(truths[item])
        if int(decision) == 1:
            if truth == 1:
                tp += 1
            else:
                fp += 1
        elif truth == 1:
            fn += 1
        else:
            tn += 1
    return ConfusionCounts(tp, fp, tn, fn)


def confusion_from_arrays(decisions: np.ndarray, truths: np.ndarray) -> ConfusionCounts:
    decisions = np.asarray(decisions, dtype=bool)
    truths = np.asarray(truths, dtype=bool)
    return ConfusionCounts(
        tp=int(np.count_nonzero(decisions & truths)),
        fp=int(np.count_nonzero(decisions & ~truths)),
        tn=int(np.count_nonzero(~decisions & ~truths)),
        fn=int(np.count_nonzero(~decisions & truths)),
    )


def precision(counts: ConfusionCounts) -> float:
    """tp/(tp+fp); 0 when nothing was predicted IN but IN items exist, NaN when undefined."""
    if counts.tp + counts.fp == 0:
        return 0.0 if counts.fn > 0 else math.nan
    return counts.tp / (counts.tp + counts.fp)


def recall(counts: ConfusionCounts) -> float:
    """tp/(tp+fn); 0 when there are no IN items but some were predicted, NaN when undefined."""
    if counts.tp + counts.fn == 0:
        return 0.0 if counts.fp > 0 else math.nan
    return counts.tp / (counts.tp + counts.fn)


def accuracy(counts: ConfusionCounts) -> float:
    if counts.total == 0:
        raise DomainError("accuracy of zero scored items")
    return (counts.tp + counts.tn) / counts.total


def f_beta(counts: ConfusionCounts, beta: float) -> float:
    """
    Weighted harmonic mean of precision and recall.

    Raises:
        DomainError: beta is not positive.
        NoPositives: tp + fp + fn = 0, so the score is undefined.
    """
    if not beta > 0.0:
        raise DomainError(f"beta must be positive, got {beta}")
    if not counts.has_positives:
        raise NoPositives("F-beta undefined without positive truths or predictions")
    if counts.tp == 0:
        return 0.0
    p = counts.tp / (counts.tp + counts.fp)
    r = counts.tp / (counts.tp + counts.fn)
    b2 = beta * beta
    return (1.0 + b2) * p * r / (b2 * p + r)


def relative_gain(score: float, reference: float) -> float:
    """Relative change of a score against a reference score."""
    if reference == 0:
        raise DomainError("relative gain against a zero reference")
    return (score - reference) / reference
