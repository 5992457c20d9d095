import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from internal.Aggregation import (
    VoteSet,
    classify_item,
    compose_hybrid,
    conjunction,
    majority_vote,
    majority_vote_matrix,
)
from internal.CoreModel import SourceAssignment, TaskDesign, TieRule
from internal.Errors import EmptyVector, EmptyVotes, MissingVerdict, MissingVoteSet


@pytest.mark.parametrize("votes, expected", [((1, 1, 0), 1), ((0, 0, 1), 0), ((1,), 1), ((0, 1, 1, 1), 1)])
def test_majority_vote(votes, expected):
    assert majority_vote(votes) == expected


def test_tie_rule():
    assert majority_vote((1, 0)) == 0
    assert majority_vote((1, 0), TieRule.IN) == 1


def test_empty_votes():
    with pytest.raises(EmptyVotes):
        majority_vote(())
    with pytest.raises(EmptyVotes):
        majority_vote_matrix(np.zeros((3, 0), dtype=np.int8))


@given(st.lists(st.integers(min_value=0, max_value=1), min_size=1, max_size=15), st.randoms())
def test_majority_vote_permutation_invariant(votes, random):
    shuffled = list(votes)
    random.shuffle(shuffled)
    for rule in TieRule:
        assert majority_vote(votes, rule) == majority_vote(shuffled, rule)


@given(st.lists(st.integers(min_value=0, max_value=1), min_size=1, max_size=15))
def test_extra_majority_vote_keeps_verdict(votes):
    for rule in TieRule:
        verdict = majority_vote(votes, rule)
        assert majority_vote(list(votes) + [verdict], rule) == verdict


@given(st.lists(st.lists(st.integers(min_value=0, max_value=1), min_size=4, max_size=4), min_size=1, max_size=20))
def test_matrix_matches_scalar(rows):
    matrix = np.array(rows, dtype=np.int8)
    for rule in TieRule:
        assert list(majority_vote_matrix(matrix, rule)) == [majority_vote(row, rule) for row in rows]


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_conjunction_monotone(n):
    for verdicts in itertools.product((0, 1), repeat=n):
        value = conjunction(verdicts)
        assert value == int(all(verdicts))
        for k in range(n):
            raised = list(verdicts)
            raised[k] = 1
            assert conjunction(raised) >= value


def test_conjunction_empty():
    with pytest.raises(EmptyVector):
        conjunction([])


def _sets(**votes):
    return {q: VoteSet("i1", q, v) for q, v in votes.items()}


def test_classify_baseline():
    assert classify_item(TaskDesign.BASELINE, _sets(P=(1, 1, 0))) == 1
    with pytest.raises(MissingVoteSet):
        classify_item(TaskDesign.BASELINE, _sets(p1=(1, 1, 1)))


def test_classify_conjunction_designs():
    sets = _sets(p1=(1, 1, 0), p2=(0, 0, 1))
    assert classify_item(TaskDesign.SAME_TASK, sets) == 0
    assert classify_item(TaskDesign.SEPARATE_TASKS, sets, predicate_ids=["p1"]) == 1
    with pytest.raises(MissingVoteSet) as info:
        classify_item(TaskDesign.SEPARATE_TASKS, sets, predicate_ids=["p1", "p3"])
    assert info.value.question == "p3"


def test_compose_hybrid():
    assignment = SourceAssignment.crowd_ml(["p1", "p2"])
    assert assignment.label == "hybrid[p1:crowd,p2:machine]"
    assert compose_hybrid(assignment, {"p1": 1}, {"p2": 1}) == 1
    assert compose_hybrid(assignment, {"p1": 1}, {"p2": 0}) == 0
    with pytest.raises(MissingVerdict):
        compose_hybrid(assignment, {}, {"p2": 1})
