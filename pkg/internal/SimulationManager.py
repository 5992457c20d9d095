"""
SimulationManager - Monte Carlo experiments over task designs and parameter grids.

Every trial draws from streams derived with numpy's SeedSequence:

    pool of trial t            SeedSequence(seed, spawn_key=(0, t))
    workers of design d, t     SeedSequence(seed, spawn_key=(1, d.code, t))
    hybrid condition h, t      SeedSequence(seed, spawn_key=(2, h, t))

so a trial's result depends only on (config, design, trial) and never on
execution order or thread count. All designs of a trial share one item pool.
"""
import itertools
import logging
import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from .Aggregation import majority_vote_matrix
from .CoreModel import (
    COMPLEX_PREDICATE_ID,
    Source,
    SourceAssignment,
    SimulationConfig,
    TaskDesign,
    require_valid,
    with_parameters,
)
from .Errors import ConfigError, NoPositives
from .ItemGenerator import ItemPool, empirical_selectivity, generate_items_class_distribution, generate_items_selectivity
from .JudgmentLog import BASELINE, SAME_TASK, JudgmentRecord
from .Metrics import confusion_from_arrays, f_beta, precision, recall
from .WorkerSimulator import cast_votes, design_accuracy, machine_verdicts, sample_accuracy_tensor

logger = logging.getLogger(__name__)

POOL_STREAM = 0
WORKER_STREAM = 1
HYBRID_STREAM = 2

RESULT_COLUMNS = [
    "design", "n", "selectivities", "mu_list", "sigma2", "budget", "gamma",
    "trial", "precision", "recall", "beta", "f_beta", "cost_labels",
]
POINT_COLUMNS = ["design", "n", "selectivities", "mu_list", "sigma2", "budget", "gamma"]


def _join(values: Sequence[float]) -> str:
    return ";".join(str(float(v)) for v in values)


@dataclass(frozen=True)
class ParameterPoint:
    """The simulated parameters echoed on every result row."""

    n: int
    selectivities: Tuple[float, ...]
    mus: Tuple[float, ...]
    variances: Tuple[float, ...]
    budget: int
    gamma: float

    @classmethod
    def from_config(cls, config: SimulationConfig) -> "ParameterPoint":
        spec = config.complex_predicate
        return cls(
            spec.n, tuple(spec.selectivities), tuple(spec.mus), tuple(spec.variances),
            config.budget_b, spec.penalty,
        )

    @property
    def sigma2(self) -> str:
        """Single value when every predicate shares it, else the per-predicate list."""
        if len(set(self.variances)) == 1:
            return str(float(self.variances[0]))
        return _join(self.variances)

    def row(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "selectivities": _join(self.selectivities),
            "mu_list": _join(self.mus),
            "sigma2": self.sigma2,
            "budget": self.budget,
            "gamma": float(self.gamma),
        }


@dataclass(frozen=True)
class ConditionResult:
    """Scores and cost of one design on one trial."""

    design: TaskDesign
    params: ParameterPoint
    trial: int
    precision: float
    recall: float
    f_scores: Dict[float, float]
    cost_labels: int
    assignment: Optional[SourceAssignment] = None

    @property
    def design_label(self) -> str:
        return self.design.value if self.assignment is None else self.assignment.label


@dataclass
class TrialOutcome:
    """Everything one simulated trial produced before scoring."""

    config: SimulationConfig
    design: TaskDesign
    trial: int
    pool: ItemPool
    votes: Dict[str, np.ndarray]
    decisions: np.ndarray
    cost_labels: int
    assignment: Optional[SourceAssignment] = None
    machine: Dict[str, np.ndarray] = field(default_factory=dict)

    def to_judgments(self) -> List[JudgmentRecord]:
        """
        Render the votes as a judgment log, one fresh worker per vote.

        Baseline votes go to condition `baseline`, SameTask votes to `p1_p2`
        (one worker answers every predicate) and SeparateTasks votes to the
        single-predicate condition named after each predicate.
        """
        records: List[JudgmentRecord] = []
        ids = self.pool.item_ids
        prefix = f"t{self.trial}-{self.design.value}"
        # Predicates are logged by position as p1..pn.
        log_ids = {pid: f"p{j + 1}" for j, pid in enumerate(self.config.complex_predicate.ids)}
        log_ids[COMPLEX_PREDICATE_ID] = COMPLEX_PREDICATE_ID
        for question, matrix in self.votes.items():
            predicate = log_ids[question]
            if self.design is TaskDesign.BASELINE:
                condition = BASELINE
            elif self.design is TaskDesign.SAME_TASK:
                condition = SAME_TASK
            else:
                condition = predicate
            for i, row in enumerate(matrix):
                for k, vote in enumerate(row):
                    if self.design is TaskDesign.SEPARATE_TASKS:
                        worker = f"{prefix}-{predicate}-{i}-{k}"
                    else:
                        worker = f"{prefix}-{i}-{k}"
                    records.append(JudgmentRecord(worker, ids[i], condition, predicate, int(vote)))
        return records


def _stream(config: SimulationConfig, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(config.seed, spawn_key=key))


def trial_pool(config: SimulationConfig, trial: int) -> ItemPool:
    """The item pool shared by every design of a trial."""
    rng = _stream(config, POOL_STREAM, trial)
    spec = config.complex_predicate
    if config.class_distribution is not None:
        pool = generate_items_class_distribution(spec, config.class_distribution, config.item_count, rng)
    else:
        pool = generate_items_selectivity(spec, config.item_count, rng, config.selectivity_direction)
    if logger.isEnabledFor(logging.DEBUG):
        realized = ", ".join(f"{pid}={s:.3f}" for pid, s in zip(spec.ids, empirical_selectivity(pool)))
        logger.debug(f"Trial {trial} pool: {len(pool)} items, realized selectivity {realized}")
    return pool


def _crowd_votes(
    config: SimulationConfig,
    design: TaskDesign,
    pool: ItemPool,
    rng: np.random.Generator,
    predicate_ids: Sequence[str],
) -> Dict[str, np.ndarray]:
    """question -> (items, b) vote matrix for the crowd part of a design."""
    spec = config.complex_predicate
    items, b = len(pool), config.budget_b
    moments = design_accuracy(spec, design)
    if design is TaskDesign.BASELINE:
        mean, variance = moments[0]
        accuracies = sample_accuracy_tensor(mean, variance, (items, b), rng)
        return {COMPLEX_PREDICATE_ID: cast_votes(pool.in_labels[:, None], accuracies, rng)}

    columns = {pid: j for j, pid in enumerate(spec.ids)}
    if design is TaskDesign.SAME_TASK:
        mean, variance = moments[0]
        n = spec.n
        if config.fresh_accuracy_per_question:
            accuracies = sample_accuracy_tensor(mean, variance, (items, b, n), rng)
        else:
            accuracies = np.broadcast_to(sample_accuracy_tensor(mean, variance, (items, b), rng)[:, :, None], (items, b, n))
        votes = cast_votes(pool.bits[:, None, :], accuracies, rng)
        return {pid: votes[:, :, j] for pid, j in columns.items()}

    votes = {}
    for pid in predicate_ids:
        j = columns[pid]
        mean, variance = moments[j]
        accuracies = sample_accuracy_tensor(mean, variance, (items, b), rng)
        votes[pid] = cast_votes(pool.bits[:, j][:, None], accuracies, rng)
    return votes


def simulate_trial(config: SimulationConfig, design: TaskDesign, trial: int) -> TrialOutcome:
    """Generate the pool, cast b votes per question instance and aggregate."""
    pool = trial_pool(config, trial)
    rng = _stream(config, WORKER_STREAM, design.code, trial)
    spec = config.complex_predicate
    votes = _crowd_votes(config, design, pool, rng, spec.ids)
    if design is TaskDesign.BASELINE:
        decisions = majority_vote_matrix(votes[COMPLEX_PREDICATE_ID], config.tie_rule)
        cost = len(pool) * config.budget_b
    else:
        verdicts = np.stack([majority_vote_matrix(votes[pid], config.tie_rule) for pid in spec.ids], axis=1)
        decisions = verdicts.all(axis=1).astype(np.int8)
        cost = len(pool) * spec.n * config.budget_b
    return TrialOutcome(config, design, trial, pool, votes, decisions, cost)


def simulate_hybrid_trial(
    config: SimulationConfig,
    assignment: SourceAssignment,
    index: int,
    trial: int,
) -> TrialOutcome:
    """Crowd predicates voted as in SeparateTasks, machine predicates from machine_accuracy."""
    pool = trial_pool(config, trial)
    rng = _stream(config, HYBRID_STREAM, index, trial)
    spec = config.complex_predicate
    crowd_ids = assignment.ids_for(Source.CROWD)
    votes = _crowd_votes(config, TaskDesign.SEPARATE_TASKS, pool, rng, crowd_ids)
    columns = {pid: j for j, pid in enumerate(spec.ids)}
    machine = {
        pid: machine_verdicts(pool.bits[:, columns[pid]], config.machine_accuracy[pid], rng)
        for pid in assignment.ids_for(Source.MACHINE)
    }
    chosen = [
        majority_vote_matrix(votes[pid], config.tie_rule) if src is Source.CROWD else machine[pid]
        for pid, src in assignment.sources
    ]
    decisions = np.stack(chosen, axis=1).all(axis=1).astype(np.int8)
    cost = len(pool) * len(crowd_ids) * config.budget_b
    return TrialOutcome(config, TaskDesign.SEPARATE_TASKS, trial, pool, votes, decisions, cost, assignment, machine)


def score_outcome(outcome: TrialOutcome) -> ConditionResult:
    counts = confusion_from_arrays(outcome.decisions, outcome.pool.in_labels)
    scores: Dict[float, float] = {}
    for beta in outcome.config.beta_weights:
        try:
            scores[beta] = f_beta(counts, beta)
        except NoPositives:
            scores[beta] = math.nan
    if not counts.has_positives:
        logger.debug(f"Trial {outcome.trial} of {outcome.design.value} has no positives; F scores undefined")
    return ConditionResult(
        design=outcome.design,
        params=ParameterPoint.from_config(outcome.config),
        trial=outcome.trial,
        precision=precision(counts),
        recall=recall(counts),
        f_scores=scores,
        cost_labels=outcome.cost_labels,
        assignment=outcome.assignment,
    )


def run_condition(config: SimulationConfig, design: TaskDesign, trial: int) -> ConditionResult:
    """Simulate and score one design on one trial."""
    return score_outcome(simulate_trial(config, design, trial))


def run_hybrid_condition(config: SimulationConfig, assignment: SourceAssignment, index: int, trial: int) -> ConditionResult:
    return score_outcome(simulate_hybrid_trial(config, assignment, index, trial))


@dataclass(frozen=True)
class SweepGrid:
    """
    Value lists per swept parameter; None keeps the base config's value.

    Selectivity and mu entries are a number (shared by every predicate) or a
    list (one per predicate).
    """

    n: Optional[Tuple[int, ...]] = None
    selectivity: Optional[Tuple[Any, ...]] = None
    mu: Optional[Tuple[Any, ...]] = None
    sigma2: Optional[Tuple[float, ...]] = None
    budget: Optional[Tuple[int, ...]] = None
    gamma: Optional[Tuple[float, ...]] = None
    beta: Optional[Tuple[float, ...]] = None

    DIMENSIONS = ("n", "selectivity", "mu", "sigma2", "budget", "gamma", "beta")

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "SweepGrid":
        if not isinstance(data, Mapping):
            raise ConfigError("grid: expected an object")
        unknown = sorted(set(data) - set(cls.DIMENSIONS))
        if unknown:
            raise ConfigError(f"grid: unknown fields {unknown}")
        values = {}
        for name, raw in data.items():
            if not isinstance(raw, list) or not raw:
                raise ConfigError(f"grid.{name}: expected a non-empty list")
            values[name] = tuple(tuple(v) if isinstance(v, list) else v for v in raw)
        return cls(**values)

    def points(self) -> List[Dict[str, Any]]:
        """Cartesian product of the swept dimensions, in declaration order."""
        names = [name for name in self.DIMENSIONS if getattr(self, name) is not None]
        return [dict(zip(names, combo)) for combo in itertools.product(*(getattr(self, n) for n in names))]

    @property
    def cardinality(self) -> int:
        return math.prod(len(getattr(self, n)) for n in self.DIMENSIONS if getattr(self, n) is not None)


def _sorted_designs(designs: Sequence[TaskDesign]) -> List[TaskDesign]:
    return sorted(set(designs), key=lambda d: d.code)


class SimulationManager:
    """
    Runs experiments and sweeps, optionally on a thread pool.

    Thread count never changes results: every task derives its own streams
    and outputs are put back in (point, design, trial) order before return.
    """

    def __init__(self, threads: int = 1):
        self._threads = max(1, int(threads))
        self._lock = threading.Lock()

    def _map(self, tasks: List[Tuple[Any, ...]]) -> List[ConditionResult]:
        def run(task):
            kind, config, key, trial = task
            if kind == "design":
                return run_condition(config, key, trial)
            index, assignment = key
            return run_hybrid_condition(config, assignment, index, trial)

        if self._threads == 1:
            return [run(task) for task in tasks]
        with ThreadPoolExecutor(max_workers=self._threads) as executor:
            return list(executor.map(run, tasks))

    def run_experiment(self, config: SimulationConfig, designs: Sequence[TaskDesign]) -> List[ConditionResult]:
        """trials x designs results (plus configured hybrid conditions)."""
        require_valid(config)
        ordered = _sorted_designs(designs)
        tasks: List[Tuple[Any, ...]] = [("design", config, d, t) for d in ordered for t in range(config.trials)]
        tasks.extend(
            ("hybrid", config, (h, a), t)
            for h, a in enumerate(config.hybrid_assignments)
            for t in range(config.trials)
        )
        logger.info(
            f"Running {len(tasks)} trials: designs={[d.value for d in ordered]}, "
            f"hybrids={len(config.hybrid_assignments)}, threads={self._threads}"
        )
        results = self._map(tasks)
        for label, mean in _mean_f_by_design(results).items():
            logger.info(f"  {label}: mean F = {mean}")
        return results

    def sweep(self, grid: SweepGrid, base_config: SimulationConfig, designs: Sequence[TaskDesign]) -> List[ConditionResult]:
        """
        One experiment per grid point. Points that differ only in beta share a
        simulation that is scored for each of their betas.
        """
        groups: Dict[Tuple, List[float]] = {}
        for point in grid.points():
            key = tuple((name, point[name]) for name in SweepGrid.DIMENSIONS if name in point and name != "beta")
            groups.setdefault(key, []).append(point.get("beta"))
        logger.info(f"Sweeping {grid.cardinality} grid points as {len(groups)} simulations")
        results: List[ConditionResult] = []
        for key, betas in groups.items():
            values = dict(key)
            config = with_parameters(
                base_config,
                n=values.get("n"),
                selectivities=values.get("selectivity"),
                mus=values.get("mu"),
                sigma2=values.get("sigma2"),
                budget=values.get("budget"),
                gamma=values.get("gamma"),
                betas=None if betas == [None] else betas,
            )
            results.extend(self.run_experiment(config, designs))
        return results

    def write_results_csv(self, results: Sequence[ConditionResult], path: Union[str, Path]) -> None:
        """Single writer for the result CSV."""
        frame = results_frame(results)
        with self._lock:
            frame.to_csv(path, index=False)
        logger.info(f"Wrote {len(frame)} rows to {path}")


def _mean_f_by_design(results: Sequence[ConditionResult]) -> Dict[str, Dict[float, float]]:
    sums: Dict[str, Dict[float, List[float]]] = {}
    for result in results:
        for beta, score in result.f_scores.items():
            if not math.isnan(score):
                sums.setdefault(result.design_label, {}).setdefault(beta, []).append(score)
    return {label: {beta: float(np.mean(v)) for beta, v in by_beta.items()} for label, by_beta in sums.items()}


def results_frame(results: Sequence[ConditionResult]) -> pd.DataFrame:
    """One row per beta per trial, in the documented column order."""
    rows = []
    for result in results:
        point = result.params.row()
        for beta, score in result.f_scores.items():
            rows.append({
                "design": result.design_label,
                **point,
                "trial": result.trial,
                "precision": result.precision,
                "recall": result.recall,
                "beta": float(beta),
                "f_beta": score,
                "cost_labels": result.cost_labels,
            })
    return pd.DataFrame(rows, columns=RESULT_COLUMNS)


def summarize(results: Union[Sequence[ConditionResult], pd.DataFrame]) -> pd.DataFrame:
    """Mean and standard error of F-beta per (parameter point, design, beta); NaN trials excluded."""
    frame = results if isinstance(results, pd.DataFrame) else results_frame(results)
    grouped = frame.groupby(POINT_COLUMNS + ["beta"], sort=False)
    summary = grouped.agg(
        mean_f=("f_beta", "mean"),
        std_f=("f_beta", "std"),
        trials=("f_beta", "count"),
        mean_precision=("precision", "mean"),
        mean_recall=("recall", "mean"),
        mean_cost=("cost_labels", "mean"),
    ).reset_index()
    summary["se_f"] = summary["std_f"] / np.sqrt(summary["trials"])
    return summary
