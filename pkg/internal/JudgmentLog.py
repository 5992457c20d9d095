"""
JudgmentLog - Ingest of real judgment logs and ground truth, and the
per-condition analyses run on them.

Canonical judgment CSV header:
    worker_id,item_id,condition,predicate_id,answer,decision_time_s

Conditions: `baseline` (complex predicate "P"), `p1_p2` (every simple
predicate on one task) and `p<k>` (predicate pk alone). Released data in
another layout goes through the `column_map` adapter of parse_judgments.
"""
import logging
import re
import statistics
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import pandas as pd

from .Aggregation import VoteSet, classify_item, compose_hybrid, conjunction, majority_vote
from .CoreModel import COMPLEX_PREDICATE_ID, Source, SourceAssignment, TaskDesign, TieRule
from .Errors import (
    DomainError,
    MalformedRow,
    MissingTruth,
    MissingVerdict,
    MissingVotes,
    NoPositives,
    NonBinaryAnswer,
    NoTimes,
    TooFewGroups,
    UnknownCondition,
    UnknownPredicate,
)
from .ItemGenerator import pool_from_csv
from .Metrics import accuracy, confusion, f_beta, relative_gain
from .RankTests import GroupedSamples, benjamini_hochberg, dunn_posthoc, kruskal_wallis

logger = logging.getLogger(__name__)

JUDGMENT_COLUMNS = ["worker_id", "item_id", "condition", "predicate_id", "answer", "decision_time_s"]
MACHINE_COLUMNS = ["item_id", "predicate_id", "prediction"]

BASELINE = "baseline"
SAME_TASK = "p1_p2"
SEPARATE_TASKS = "p1&p2"
_SINGLE = re.compile(r"^p([1-9][0-9]*)$")


def is_single_condition(condition: str) -> bool:
    return bool(_SINGLE.match(condition))


def is_known_condition(condition: str) -> bool:
    return condition in (BASELINE, SAME_TASK) or is_single_condition(condition)


@dataclass(frozen=True)
class JudgmentRecord:
    """One binary answer by one worker on one (item, question) pair."""

    worker_id: str
    item_id: str
    condition: str
    predicate_id: str
    answer: int
    decision_time_s: Optional[float] = None


@dataclass(frozen=True)
class GroundTruthRecord:
    item_id: str
    labels: Dict[str, int] = field(default_factory=dict)

    @property
    def in_label(self) -> int:
        return conjunction(list(self.labels.values()))

    def truth_for(self, predicate_id: str) -> int:
        if predicate_id == COMPLEX_PREDICATE_ID:
            return self.in_label
        return self.labels[predicate_id]


# -- parsing --

def _check_predicate(condition: str, predicate_id: str, line: int, path: str) -> None:
    if condition == BASELINE:
        ok = predicate_id == COMPLEX_PREDICATE_ID
        expected = COMPLEX_PREDICATE_ID
    elif condition == SAME_TASK:
        ok = is_single_condition(predicate_id)
        expected = "a simple predicate p<k>"
    else:
        ok = predicate_id == condition
        expected = condition
    if not ok:
        raise MalformedRow(line, f"condition '{condition}' requires predicate {expected}, got '{predicate_id}'", path)


def parse_judgments(path: Union[str, Path], column_map: Optional[Mapping[str, str]] = None) -> List[JudgmentRecord]:
    """
    Read and validate a judgment CSV.

    Args:
        path: CSV file in the canonical schema, or in a released layout when
            `column_map` renames its columns into the canonical names.
        column_map: Source column -> canonical column.

    Raises:
        MalformedRow, UnknownCondition, NonBinaryAnswer: with the file line.
    """
    source = str(path)
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    except pd.errors.EmptyDataError:
        raise MalformedRow(1, "missing header", source) from None
    if column_map:
        frame = frame.rename(columns=dict(column_map))
    missing = [c for c in JUDGMENT_COLUMNS if c not in frame.columns]
    if missing:
        raise MalformedRow(1, f"header lacks columns {missing}", source)
    frame = frame[JUDGMENT_COLUMNS]

    records: List[JudgmentRecord] = []
    for index, row in enumerate(frame.itertuples(index=False)):
        line = index + 2
        worker_id, item_id, condition, predicate_id, answer, time_cell = (str(v).strip() for v in row)
        if not worker_id or not item_id:
            raise MalformedRow(line, "worker_id and item_id must be non-empty", source)
        if not is_known_condition(condition):
            raise UnknownCondition(line, f"unknown condition '{condition}'", source)
        _check_predicate(condition, predicate_id, line, source)
        if answer not in ("0", "1"):
            raise NonBinaryAnswer(line, f"answer must be 0 or 1, got '{answer}'", source)
        decision_time = None
        if time_cell:
            try:
                decision_time = float(time_cell)
            except ValueError:
                raise MalformedRow(line, f"decision_time_s is not a number: '{time_cell}'", source) from None
            if not decision_time >= 0.0:
                raise MalformedRow(line, f"decision_time_s must be non-negative, got {time_cell}", source)
        records.append(JudgmentRecord(worker_id, item_id, condition, predicate_id, int(answer), decision_time))
    logger.info(f"Parsed {len(records)} judgments from {source}")
    return records


def write_judgments(records: Iterable[JudgmentRecord], path: Union[str, Path]) -> None:
    rows = [
        (r.worker_id, r.item_id, r.condition, r.predicate_id, r.answer,
         "" if r.decision_time_s is None else repr(r.decision_time_s))
        for r in records
    ]
    pd.DataFrame(rows, columns=JUDGMENT_COLUMNS).to_csv(path, index=False)


def parse_truth(path: Union[str, Path]) -> Dict[str, GroundTruthRecord]:
    """Ground truth in the item pool CSV layout; column p_j holds predicate pj."""
    pool = pool_from_csv(path)
    return {
        item.item_id: GroundTruthRecord(item.item_id, {f"p{j + 1}": bit for j, bit in enumerate(item.bits)})
        for item in pool.items
    }


def parse_machine_predictions(path: Union[str, Path]) -> Dict[str, Dict[str, int]]:
    """Machine verdicts keyed item -> predicate -> 0/1."""
    source = str(path)
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    except pd.errors.EmptyDataError:
        raise MalformedRow(1, "missing header", source) from None
    if list(frame.columns) != MACHINE_COLUMNS:
        raise MalformedRow(1, f"header must be {','.join(MACHINE_COLUMNS)}", source)
    machine: Dict[str, Dict[str, int]] = defaultdict(dict)
    for index, (item_id, predicate_id, prediction) in enumerate(frame.itertuples(index=False)):
        line = index + 2
        if not is_single_condition(predicate_id.strip()):
            raise MalformedRow(line, f"predicate_id must be a simple predicate p<k>, got '{predicate_id}'", source)
        if prediction.strip() not in ("0", "1"):
            raise NonBinaryAnswer(line, f"prediction must be 0 or 1, got '{prediction}'", source)
        machine[item_id.strip()][predicate_id.strip()] = int(prediction)
    return dict(machine)


# -- analyses --

def _vote_sets(judgments: Iterable[JudgmentRecord], conditions: Sequence[str]) -> Dict[str, Dict[str, VoteSet]]:
    """item -> question -> VoteSet over the given conditions."""
    grouped: Dict[Tuple[str, str], List[int]] = defaultdict(list)
    for record in judgments:
        if record.condition in conditions:
            grouped[(record.item_id, record.predicate_id)].append(record.answer)
    by_item: Dict[str, Dict[str, VoteSet]] = defaultdict(dict)
    for (item_id, question), votes in grouped.items():
        by_item[item_id][question] = VoteSet(item_id, question, tuple(votes))
    return by_item


def _predicate_ids(truths: Mapping[str, GroundTruthRecord]) -> List[str]:
    first = next(iter(truths.values()), None)
    return sorted(first.labels, key=lambda pid: int(pid[1:])) if first else []


def _require_truth(items: Iterable[str], truths: Mapping[str, GroundTruthRecord]) -> None:
    missing = [item for item in items if item not in truths]
    if missing:
        raise MissingTruth(missing)


def _require_predicates(judgments: Iterable[JudgmentRecord], truths: Mapping[str, GroundTruthRecord]) -> None:
    known = _predicate_ids(truths)
    unknown = {r.predicate_id for r in judgments if r.predicate_id != COMPLEX_PREDICATE_ID} - set(known)
    if unknown:
        raise UnknownPredicate(unknown, known)


def condition_decisions(
    judgments: Sequence[JudgmentRecord],
    truths: Mapping[str, GroundTruthRecord],
    mode: str,
    tie_rule: TieRule = TieRule.OUT,
) -> Tuple[Dict[str, int], Dict[str, int]]:
    """
    Majority-vote decisions of one analysis mode and the truths they are scored against.

    Modes: `baseline`, `p1_p2`, `p1&p2` (separate single-predicate
    conditions joined by conjunction) and `p<k>` (scored against bit k).
    """
    predicate_ids = _predicate_ids(truths)
    if mode == BASELINE:
        vote_sets = _vote_sets(judgments, [BASELINE])
        design, required, target = TaskDesign.BASELINE, [COMPLEX_PREDICATE_ID], COMPLEX_PREDICATE_ID
    elif mode == SAME_TASK:
        vote_sets = _vote_sets(judgments, [SAME_TASK])
        design, required, target = TaskDesign.SAME_TASK, predicate_ids, COMPLEX_PREDICATE_ID
    elif mode == SEPARATE_TASKS:
        vote_sets = _vote_sets(judgments, predicate_ids)
        design, required, target = TaskDesign.SEPARATE_TASKS, predicate_ids, COMPLEX_PREDICATE_ID
    elif is_single_condition(mode) and mode in predicate_ids:
        vote_sets = _vote_sets(judgments, [mode])
        design, required, target = TaskDesign.SEPARATE_TASKS, [mode], mode
    else:
        raise DomainError(f"unknown analysis mode '{mode}'")

    _require_truth(vote_sets, truths)
    uncovered = [item for item, sets in vote_sets.items() if any(q not in sets for q in required)]
    if uncovered:
        raise MissingVotes(mode, uncovered)

    decisions = {}
    for item_id, sets in vote_sets.items():
        if design is TaskDesign.BASELINE:
            decisions[item_id] = classify_item(design, sets, tie_rule)
        else:
            decisions[item_id] = classify_item(design, sets, tie_rule, required)
    expected = {item_id: truths[item_id].truth_for(target) for item_id in decisions}
    return decisions, expected


def condition_f1(
    judgments: Sequence[JudgmentRecord],
    truths: Mapping[str, GroundTruthRecord],
    mode: str,
    tie_rule: TieRule = TieRule.OUT,
) -> float:
    """F1 of one analysis mode, see condition_decisions."""
    decisions, expected = condition_decisions(judgments, truths, mode, tie_rule)
    return f_beta(confusion(decisions, expected), 1.0)


def condition_accuracy(
    judgments: Sequence[JudgmentRecord],
    truths: Mapping[str, GroundTruthRecord],
    mode: str,
    tie_rule: TieRule = TieRule.OUT,
) -> float:
    decisions, expected = condition_decisions(judgments, truths, mode, tie_rule)
    return accuracy(confusion(decisions, expected))


def available_modes(judgments: Sequence[JudgmentRecord], truths: Mapping[str, GroundTruthRecord]) -> List[str]:
    """Analysis modes the log supports, in report order."""
    present = {r.condition for r in judgments}
    predicate_ids = _predicate_ids(truths)
    modes = [m for m in (BASELINE, SAME_TASK) if m in present]
    if predicate_ids and all(pid in present for pid in predicate_ids):
        modes.append(SEPARATE_TASKS)
    modes.extend(pid for pid in predicate_ids if pid in present)
    return modes


@dataclass(frozen=True)
class WorkerAccuracy:
    worker_id: str
    condition: str
    answers: int
    accuracy: float


def worker_accuracy_stats(
    judgments: Sequence[JudgmentRecord],
    truths: Mapping[str, GroundTruthRecord],
) -> Tuple[List[WorkerAccuracy], Dict[str, float]]:
    """Per-worker accuracy against the judged question's truth, and the median per condition."""
    _require_truth({r.item_id for r in judgments}, truths)
    _require_predicates(judgments, truths)
    tallies: Dict[Tuple[str, str], List[int]] = defaultdict(lambda: [0, 0])
    for record in judgments:
        tally = tallies[(record.worker_id, record.condition)]
        tally[0] += int(record.answer == truths[record.item_id].truth_for(record.predicate_id))
        tally[1] += 1
    workers = [
        WorkerAccuracy(worker_id, condition, total, correct / total)
        for (worker_id, condition), (correct, total) in sorted(tallies.items())
    ]
    by_condition: Dict[str, List[float]] = defaultdict(list)
    for worker in workers:
        by_condition[worker.condition].append(worker.accuracy)
    medians = {condition: statistics.median(values) for condition, values in by_condition.items()}
    return workers, medians


def _separate_tasks_times(judgments: Sequence[JudgmentRecord], conditions: Sequence[str]) -> List[float]:
    """Per document: the slower of the single-predicate medians."""
    per_doc: Dict[str, Dict[str, List[float]]] = defaultdict(lambda: defaultdict(list))
    for record in judgments:
        if record.condition in conditions and record.decision_time_s is not None:
            per_doc[record.item_id][record.condition].append(record.decision_time_s)
    return [
        max(statistics.median(times[c]) for c in conditions)
        for times in per_doc.values()
        if all(c in times for c in conditions)
    ]


def decision_time_summary(judgments: Sequence[JudgmentRecord]) -> Dict[str, float]:
    """
    Median decision time per condition.

    When two or more single-predicate conditions carry times, a `p1&p2`
    entry approximates the separate-tasks time: each document takes the
    slower of its per-condition medians.
    """
    by_condition: Dict[str, List[float]] = defaultdict(list)
    for record in judgments:
        if record.decision_time_s is not None:
            by_condition[record.condition].append(record.decision_time_s)
    if not by_condition:
        raise NoTimes("no judgment carries a decision time")
    summary = {condition: statistics.median(times) for condition, times in by_condition.items()}
    singles = sorted((c for c in by_condition if is_single_condition(c)), key=lambda c: int(c[1:]))
    if len(singles) >= 2:
        document_times = _separate_tasks_times(judgments, singles)
        if document_times:
            summary[SEPARATE_TASKS] = statistics.median(document_times)
    return summary


def _group_test(groups: Mapping[str, List[float]], q: float) -> Optional[Dict[str, Any]]:
    groups = {label: values for label, values in groups.items() if values}
    try:
        samples = GroupedSamples.from_mapping(groups)
        kw = kruskal_wallis(samples)
        pairs = dunn_posthoc(samples)
    except TooFewGroups as e:
        logger.warning(f"Skipping rank tests: {e}")
        return None
    corrected = benjamini_hochberg([pair.p_value for pair in pairs], q)
    return {
        "kruskal_wallis": {"H": kw.statistic, "df": kw.degrees_of_freedom, "p": kw.p_value},
        "dunn": [
            {"pair": list(pair.pair), "z": pair.z, "p": pair.p_value, "p_adjusted": adjusted, "rejected": rejected}
            for pair, (adjusted, rejected) in zip(pairs, corrected)
        ],
    }


def condition_tests(
    judgments: Sequence[JudgmentRecord],
    truths: Mapping[str, GroundTruthRecord],
    q: float = 0.05,
) -> Dict[str, Optional[Dict[str, Any]]]:
    """Kruskal-Wallis with Dunn/BH across conditions on worker accuracy and decision time."""
    workers, _ = worker_accuracy_stats(judgments, truths)
    accuracy_groups: Dict[str, List[float]] = defaultdict(list)
    for worker in workers:
        accuracy_groups[worker.condition].append(worker.accuracy)
    time_groups: Dict[str, List[float]] = defaultdict(list)
    for record in judgments:
        if record.decision_time_s is not None:
            time_groups[record.condition].append(record.decision_time_s)
    return {
        "worker_accuracy": _group_test(accuracy_groups, q),
        "decision_time": _group_test(time_groups, q),
    }


def _scored(decisions: Mapping[str, int], truths: Mapping[str, GroundTruthRecord]) -> float:
    return f_beta(confusion(decisions, {item: truths[item].in_label for item in decisions}), 1.0)


def hybrid_f1(
    judgments: Sequence[JudgmentRecord],
    truths: Mapping[str, GroundTruthRecord],
    machine: Mapping[str, Mapping[str, int]],
    assignment: SourceAssignment,
    tie_rule: TieRule = TieRule.OUT,
) -> float:
    """
    F1 of a hybrid pipeline: crowd verdicts come from the single-predicate
    conditions, machine verdicts from `machine`.
    """
    crowd_ids = assignment.ids_for(Source.CROWD)
    vote_sets = _vote_sets(judgments, crowd_ids)
    items = sorted(vote_sets) if crowd_ids else sorted(machine)
    _require_truth(items, truths)
    decisions = {}
    for item_id in items:
        crowd = {pid: majority_vote(vs.votes, tie_rule) for pid, vs in vote_sets.get(item_id, {}).items()}
        decisions[item_id] = compose_hybrid(assignment, crowd, machine.get(item_id, {}))
    return _scored(decisions, truths)


def machine_f1(
    truths: Mapping[str, GroundTruthRecord],
    machine: Mapping[str, Mapping[str, int]],
) -> float:
    """Machine-only classification: conjunction of every predicate's machine verdict."""
    predicate_ids = _predicate_ids(truths)
    assignment = SourceAssignment(tuple((pid, Source.MACHINE) for pid in predicate_ids))
    _require_truth(machine, truths)
    decisions = {item_id: compose_hybrid(assignment, {}, verdicts) for item_id, verdicts in machine.items()}
    return _scored(decisions, truths)


def _safe(label: str, compute) -> Optional[float]:
    try:
        return compute()
    except (NoPositives, MissingVotes, MissingVerdict) as e:
        logger.warning(f"{label}: {e}")
        return None


def build_report(
    judgments: Sequence[JudgmentRecord],
    truths: Mapping[str, GroundTruthRecord],
    machine: Optional[Mapping[str, Mapping[str, int]]] = None,
    q: float = 0.05,
    tie_rule: TieRule = TieRule.OUT,
) -> Dict[str, Any]:
    """The JSON analysis report: F1, worker accuracy, decision time and rank tests per condition."""
    _require_predicates(judgments, truths)
    modes = available_modes(judgments, truths)
    f1 = {mode: _safe(f"F1 {mode}", lambda m=mode: condition_f1(judgments, truths, m, tie_rule)) for mode in modes}
    scored_accuracy = {
        mode: _safe(f"Accuracy {mode}", lambda m=mode: condition_accuracy(judgments, truths, m, tie_rule))
        for mode in modes
    }
    gains = {}
    if f1.get(BASELINE):
        gains = {mode: relative_gain(score, f1[BASELINE]) for mode, score in f1.items()
                 if mode != BASELINE and score is not None}
    _, medians = worker_accuracy_stats(judgments, truths)
    try:
        times = decision_time_summary(judgments)
    except NoTimes:
        logger.warning("No decision times in the log")
        times = {}
    report: Dict[str, Any] = {
        "items": len(truths),
        "judgments": len(judgments),
        "workers": len({r.worker_id for r in judgments}),
        "f1": f1,
        "f1_gain_over_baseline": gains,
        "accuracy": scored_accuracy,
        "median_worker_accuracy": medians,
        "median_decision_time_s": times,
        "tests": condition_tests(judgments, truths, q),
    }
    if machine is not None:
        predicate_ids = _predicate_ids(truths)
        crowd_scores = [f1[m] for m in (SAME_TASK, SEPARATE_TASKS) if f1.get(m) is not None]
        compositions = {
            "crowd_ml": SourceAssignment.crowd_ml(predicate_ids),
            "ml_crowd": SourceAssignment.ml_crowd(predicate_ids),
        }
        hybrid = {
            name: _safe(name, lambda a=assignment: hybrid_f1(judgments, truths, machine, a, tie_rule))
            for name, assignment in compositions.items()
        }
        hybrid_scores = [v for v in hybrid.values() if v is not None]
        report["hybrid"] = {
            "crowd": max(crowd_scores) if crowd_scores else None,
            "ml": _safe("ML", lambda: machine_f1(truths, machine)),
            **hybrid,
            "hybrid": max(hybrid_scores) if hybrid_scores else None,
        }
    return report
