import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from internal.Errors import DomainError, KeyMismatch, NoPositives
from internal.Metrics import (
    ConfusionCounts,
    accuracy,
    confusion,
    confusion_from_arrays,
    f_beta,
    precision,
    recall,
    relative_gain,
)


def test_confusion_counts():
    counts = confusion({"a": 1, "b": 1, "c": 0, "d": 0}, {"a": 1, "b": 0, "c": 1, "d": 0})
    assert counts == ConfusionCounts(tp=1, fp=1, tn=1, fn=1)


def test_confusion_key_mismatch():
    with pytest.raises(KeyMismatch) as info:
        confusion({"a": 1, "b": 0}, {"a": 1, "c": 0})
    assert info.value.difference == ["b", "c"]


def test_confusion_from_arrays_matches_mapping():
    decisions = np.array([1, 1, 0, 0, 1])
    truths = np.array([1, 0, 1, 0, 1])
    by_key = confusion(dict(enumerate(decisions)), dict(enumerate(truths)))
    assert confusion_from_arrays(decisions, truths) == by_key


def test_f1_known_value():
    counts = ConfusionCounts(tp=6, fp=2, tn=0, fn=4)
    assert f_beta(counts, 1.0) == pytest.approx(2 * 0.75 * 0.6 / 1.35)


def test_f_beta_weights_recall():
    counts = ConfusionCounts(tp=5, fp=5, tn=0, fn=0)
    assert f_beta(counts, 10.0) > f_beta(counts, 1.0) > f_beta(counts, 0.1)


def test_f_beta_degenerate():
    assert f_beta(ConfusionCounts(tp=0, fp=3, tn=2, fn=1), 1.0) == 0.0
    with pytest.raises(NoPositives):
        f_beta(ConfusionCounts(tn=5), 1.0)
    with pytest.raises(DomainError):
        f_beta(ConfusionCounts(tp=1), 0.0)


@given(
    st.integers(min_value=1, max_value=200),
    st.integers(min_value=0, max_value=200),
    st.floats(min_value=0.05, max_value=20.0),
)
def test_f_beta_equals_precision_when_precision_equals_recall(tp, errors, beta):
    counts = ConfusionCounts(tp=tp, fp=errors, tn=0, fn=errors)
    assert f_beta(counts, beta) == pytest.approx(precision(counts), rel=1e-12)


@given(
    st.integers(min_value=0, max_value=200),
    st.integers(min_value=0, max_value=200),
    st.integers(min_value=0, max_value=200),
    st.floats(min_value=0.05, max_value=20.0),
)
def test_f_beta_non_decreasing_in_true_positives(tp, fp, fn, beta):
    more = f_beta(ConfusionCounts(tp=tp + 1, fp=fp, fn=fn), beta)
    if tp + fp + fn == 0:
        assert more == 1.0
    else:
        assert more >= f_beta(ConfusionCounts(tp=tp, fp=fp, fn=fn), beta) - 1e-12

def test_precision_recall_conventions():
    assert precision(ConfusionCounts(tp=0, fp=0, fn=3)) == 0.0
    assert recall(ConfusionCounts(tp=0, fp=2, fn=0)) == 0.0
    assert math.isnan(precision(ConfusionCounts(tn=4)))
    assert math.isnan(recall(ConfusionCounts(tn=4)))
    assert recall(ConfusionCounts(tp=3, fn=1)) == pytest.approx(0.75)


def test_accuracy():
    assert accuracy(ConfusionCounts(tp=2, fp=1, tn=1, fn=0)) == pytest.approx(0.75)
    with pytest.raises(DomainError):
        accuracy(ConfusionCounts())


def test_relative_gain():
    assert relative_gain(0.656, 0.6) == pytest.approx(0.0933333, rel=1e-5)
    with pytest.raises(DomainError):
        relative_gain(0.5, 0.0)
