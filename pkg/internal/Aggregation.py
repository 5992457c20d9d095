"""
Aggregation - Majority voting, conjunction and hybrid crowd/machine composition.

Only simple majority voting is provided; votes are never weighted.
"""
import logging
from dataclasses import dataclass
from typing import Mapping, Sequence, Tuple

import numpy as np

from .CoreModel import COMPLEX_PREDICATE_ID, Source, SourceAssignment, TaskDesign, TieRule
from .Errors import EmptyVector, EmptyVotes, MissingVerdict, MissingVoteSet

logger = logging.getLogger(__name__)

__all__ = [
    "VoteSet",
    "SourceAssignment",
    "majority_vote",
    "majority_vote_matrix",
    "conjunction",
    "classify_item",
    "compose_hybrid",
]


@dataclass(frozen=True)
class VoteSet:
    """Votes collected for one item on one question."""

    item_id: str
    question: str
    votes: Tuple[int, ...]


def majority_vote(votes: Sequence[int], tie_rule: TieRule = TieRule.OUT) -> int:
    """The strictly more frequent label; the tie rule's label on an exact tie."""
    if len(votes) == 0:
        raise EmptyVotes("majority vote over zero votes")
    ones = sum(int(v) for v in votes)
    zeros = len(votes) - ones
    if ones == zeros:
        return tie_rule.label
    return 1 if ones > zeros else 0


def majority_vote_matrix(votes: np.ndarray, tie_rule: TieRule = TieRule.OUT, axis: int = -1) -> np.ndarray:
    """majority_vote applied along `axis` of a vote array."""
    size = votes.shape[axis]
    if size == 0:
        raise EmptyVotes("majority vote over zero votes")
    twice_ones = 2 * votes.sum(axis=axis, dtype=np.int64)
    verdicts = (twice_ones > size).astype(np.int8)
    if tie_rule is TieRule.IN:
        verdicts[twice_ones == size] = 1
    return verdicts


def conjunction(verdicts: Sequence[int]) -> int:
    """1 iff every verdict is 1."""
    if len(verdicts) == 0:
        raise EmptyVector("conjunction of zero verdicts")
    return int(all(int(v) == 1 for v in verdicts))


def classify_item(
    design: TaskDesign,
    per_question_votes: Mapping[str, VoteSet],
    tie_rule: TieRule = TieRule.OUT,
    predicate_ids: Sequence[str] = (),
) -> int:
    """
    Decide one item under a task design.

    Baseline reads the complex-predicate vote set; the other designs take the
    conjunction of per-predicate majorities. SameTask and SeparateTasks only
    differ in how their votes were produced.

    Args:
        design: The task design the votes come from.
        per_question_votes: Question id -> VoteSet.
        tie_rule: Label on exact ties.
        predicate_ids: Predicates required for non-baseline designs; defaults
            to every non-complex question present.
    """
    if design is TaskDesign.BASELINE:
        if COMPLEX_PREDICATE_ID not in per_question_votes:
            raise MissingVoteSet(COMPLEX_PREDICATE_ID)
        return majority_vote(per_question_votes[COMPLEX_PREDICATE_ID].votes, tie_rule)
    required = list(predicate_ids) or sorted(q for q in per_question_votes if q != COMPLEX_PREDICATE_ID)
    if not required:
        raise MissingVoteSet("any simple predicate")
    verdicts = []
    for question in required:
        if question not in per_question_votes:
            raise MissingVoteSet(question)
        verdicts.append(majority_vote(per_question_votes[question].votes, tie_rule))
    return conjunction(verdicts)


def compose_hybrid(
    assignment: SourceAssignment,
    crowd_verdicts: Mapping[str, int],
    machine_verdicts: Mapping[str, int],
) -> int:
    """Take each predicate's verdict from its assigned source, then conjoin."""
    verdicts = []
    for predicate_id, source in assignment.sources:
        pool = crowd_verdicts if source is Source.CROWD else machine_verdicts
        if predicate_id not in pool:
            raise MissingVerdict(predicate_id, source.value)
        verdicts.append(pool[predicate_id])
    return conjunction(verdicts)
