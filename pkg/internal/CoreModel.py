"""
CoreModel - Domain types shared by the simulator and the analysis pipeline.

Holds the predicate and configuration value types, the Beta moment
conversion and configuration validation. All types are frozen dataclasses;
validation never raises and instead reports every violated bound.
"""
import json
import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

from .Errors import ConfigError, DomainError, InfeasibleVariance

logger = logging.getLogger(__name__)

COMPLEX_PREDICATE_ID = "P"
MAX_SEED = 2 ** 64

# Applied when a key is missing from a configuration document.
DEFAULTS: Dict[str, Any] = {
    "accuracy_var": 0.04,
    "penalty": 0.0,
    "item_count": 100,
    "generation_mode": "selectivity",
    "budget_b": 3,
    "beta_weights": [1.0],
    "trials": 1000,
    "tie_rule": "OUT",
    "fresh_accuracy_per_question": False,
    "selectivity_direction": "satisfied",
    "machine_accuracy": {},
    "hybrid_assignments": [],
}

SELECTIVITY_DIRECTIONS = ("satisfied", "filtered")


class TaskDesign(Enum):
    """How the complex predicate is put to workers."""

    BASELINE = "baseline"
    SAME_TASK = "same_task"
    SEPARATE_TASKS = "separate_tasks"

    @property
    def code(self) -> int:
        """Stable integer used when deriving random streams."""
        return _DESIGN_CODES[self]

    @classmethod
    def parse(cls, value: str) -> "TaskDesign":
        try:
            return cls(value.strip().lower())
        except ValueError:
            raise DomainError(f"unknown task design '{value}'") from None


_DESIGN_CODES = {
    TaskDesign.BASELINE: 0,
    TaskDesign.SAME_TASK: 1,
    TaskDesign.SEPARATE_TASKS: 2,
}


class TieRule(Enum):
    """Label returned by majority voting on an exact tie."""

    OUT = "OUT"
    IN = "IN"

    @property
    def label(self) -> int:
        return 1 if self is TieRule.IN else 0


class Source(Enum):
    """Where a predicate verdict comes from in a hybrid pipeline."""

    CROWD = "crowd"
    MACHINE = "machine"


@dataclass(frozen=True)
class PredicateSpec:
    """A simple predicate with its selectivity and worker-accuracy moments."""

    id: str
    selectivity: float
    accuracy_mean: float
    accuracy_var: float = DEFAULTS["accuracy_var"]


@dataclass(frozen=True)
class ComplexPredicateSpec:
    """Conjunction of simple predicates plus the complex-question penalty."""

    predicates: Tuple[PredicateSpec, ...]
    penalty: float = DEFAULTS["penalty"]

    @property
    def n(self) -> int:
        return len(self.predicates)

    @property
    def ids(self) -> List[str]:
        return [p.id for p in self.predicates]

    @property
    def selectivities(self) -> List[float]:
        return [p.selectivity for p in self.predicates]

    @property
    def mus(self) -> List[float]:
        return [p.accuracy_mean for p in self.predicates]

    @property
    def variances(self) -> List[float]:
        return [p.accuracy_var for p in self.predicates]


def in_label(bits: Sequence[int]) -> int:
    """1 iff every predicate bit is set."""
    return int(all(int(b) == 1 for b in bits))


@dataclass(frozen=True)
class ItemTruth:
    """Ground truth of one item: one bit per simple predicate."""

    item_id: str
    bits: Tuple[int, ...]

    @property
    def in_label(self) -> int:
        return in_label(self.bits)


@dataclass(frozen=True)
class ClassDistributionSpec:
    """Fixed IN fraction with OUT items split evenly over exclusion patterns."""

    in_fraction: float
    exclusion_split: str = "equal"


@dataclass(frozen=True)
class SourceAssignment:
    """Maps each predicate id to the source that decides it."""

    sources: Tuple[Tuple[str, Source], ...]

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, Union[str, Source]]) -> "SourceAssignment":
        return cls(tuple((pid, Source(src) if isinstance(src, str) else src) for pid, src in mapping.items()))

    @classmethod
    def crowd_ml(cls, ids: Sequence[str]) -> "SourceAssignment":
        """Crowd on the first predicate, machine on the rest."""
        return cls(tuple((pid, Source.CROWD if k == 0 else Source.MACHINE) for k, pid in enumerate(ids)))

    @classmethod
    def ml_crowd(cls, ids: Sequence[str]) -> "SourceAssignment":
        """Machine on the first predicate, crowd on the rest."""
        return cls(tuple((pid, Source.MACHINE if k == 0 else Source.CROWD) for k, pid in enumerate(ids)))

    def as_dict(self) -> Dict[str, Source]:
        return dict(self.sources)

    @property
    def ids(self) -> List[str]:
        return [pid for pid, _ in self.sources]

    def ids_for(self, source: Source) -> List[str]:
        return [pid for pid, src in self.sources if src is source]

    @property
    def label(self) -> str:
        return "hybrid[" + ",".join(f"{pid}:{src.value}" for pid, src in self.sources) + "]"


@dataclass(frozen=True)
class SimulationConfig:
    """One parameter point of the simulator plus run controls."""

    complex_predicate: ComplexPredicateSpec
    item_count: int = DEFAULTS["item_count"]
    class_distribution: Optional[ClassDistributionSpec] = None
    budget_b: int = DEFAULTS["budget_b"]
    beta_weights: Tuple[float, ...] = tuple(DEFAULTS["beta_weights"])
    trials: int = DEFAULTS["trials"]
    seed: int = 0
    tie_rule: TieRule = TieRule.OUT
    fresh_accuracy_per_question: bool = False
    selectivity_direction: str = "satisfied"
    machine_accuracy: Dict[str, float] = field(default_factory=dict)
    hybrid_assignments: Tuple[SourceAssignment, ...] = ()

    @property
    def generation_mode(self) -> str:
        return "selectivity" if self.class_distribution is None else "class_distribution"

    @property
    def n(self) -> int:
        return self.complex_predicate.n


@dataclass(frozen=True)
class Violation:
    path: str
    message: str

    def __str__(self) -> str:
        return f"{self.path}: {self.message}"


@dataclass(frozen=True)
class ValidationReport:
    """Every violated invariant of a configuration; empty means valid."""

    violations: Tuple[Violation, ...] = ()

    @property
    def is_valid(self) -> bool:
        return not self.violations

    def messages(self) -> List[str]:
        return [str(v) for v in self.violations]


def beta_params_from_mean_var(mean: float, variance: float) -> Tuple[float, float]:
    """
    Convert Beta moments to shape parameters.

    Args:
        mean: Expected value, strictly inside (0, 1).
        variance: Variance, strictly inside (0, mean*(1-mean)).

    Returns:
        (alpha, beta) with alpha/(alpha+beta) = mean and the requested variance.

    Raises:
        DomainError: mean outside (0, 1) or non-positive variance.
        InfeasibleVariance: variance >= mean*(1-mean).
    """
    if not 0.0 < mean < 1.0:
        raise DomainError(f"Beta mean must lie in (0, 1), got {mean}")
    if not variance > 0.0:
        raise DomainError(f"Beta variance must be positive, got {variance}")
    bound = mean * (1.0 - mean)
    if variance >= bound:
        raise InfeasibleVariance(mean, variance)
    concentration = bound / variance - 1.0
    return mean * concentration, (1.0 - mean) * concentration


def beta_moments(alpha: float, beta: float) -> Tuple[float, float]:
    """Analytic (mean, variance) of Beta(alpha, beta)."""
    total = alpha + beta
    return alpha / total, alpha * beta / (total * total * (total + 1.0))


def _check_predicate(index: int, p: PredicateSpec, found: List[Violation]) -> None:
    path = f"complex_predicate.predicates[{index}]"
    if not 0.0 <= p.selectivity <= 1.0:
        found.append(Violation(f"{path}.selectivity", f"selectivity must lie in [0, 1], got {p.selectivity}"))
    mean_ok = 0.0 < p.accuracy_mean < 1.0
    if not mean_ok:
        found.append(Violation(f"{path}.accuracy_mean", f"accuracy_mean must lie in (0, 1), got {p.accuracy_mean}"))
    if not p.accuracy_var > 0.0:
        found.append(Violation(f"{path}.accuracy_var", f"accuracy_var must be positive, got {p.accuracy_var}"))
    elif mean_ok and not p.accuracy_var < p.accuracy_mean * (1.0 - p.accuracy_mean):
        found.append(Violation(
            f"{path}.accuracy_var",
            f"accuracy_var must lie in (0, {p.accuracy_mean * (1.0 - p.accuracy_mean):.6g}), got {p.accuracy_var}",
        ))


def validate_config(config: SimulationConfig) -> ValidationReport:
    """Collect every violated bound of a configuration and its nested types."""
    found: List[Violation] = []
    spec = config.complex_predicate
    if spec.n < 1:
        found.append(Violation("complex_predicate.predicates", "at least one predicate is required"))
    for index, predicate in enumerate(spec.predicates):
        _check_predicate(index, predicate, found)
    duplicates = sorted({pid for pid in spec.ids if spec.ids.count(pid) > 1})
    if duplicates:
        found.append(Violation("complex_predicate.predicates", f"predicate ids must be unique, repeated: {duplicates}"))
    if not 0.0 <= spec.penalty <= 1.0:
        found.append(Violation("complex_predicate.penalty", f"penalty must lie in [0, 1], got {spec.penalty}"))

    if config.item_count < 1:
        found.append(Violation("item_count", f"item_count must be >= 1, got {config.item_count}"))
    if config.budget_b < 1:
        found.append(Violation("budget_b", f"budget_b must be >= 1, got {config.budget_b}"))
    if config.trials < 1:
        found.append(Violation("trials", f"trials must be >= 1, got {config.trials}"))
    if not config.beta_weights:
        found.append(Violation("beta_weights", "at least one beta weight is required"))
    for k, weight in enumerate(config.beta_weights):
        if not (weight > 0.0 and math.isfinite(weight)):
            found.append(Violation(f"beta_weights[{k}]", f"beta must be a positive finite number, got {weight}"))
    if not 0 <= config.seed < MAX_SEED:
        found.append(Violation("seed", f"seed must be an unsigned 64-bit integer, got {config.seed}"))
    if config.selectivity_direction not in SELECTIVITY_DIRECTIONS:
        found.append(Violation(
            "selectivity_direction",
            f"selectivity_direction must be one of {list(SELECTIVITY_DIRECTIONS)}, got '{config.selectivity_direction}'",
        ))

    dist = config.class_distribution
    if dist is not None:
        if not 0.0 < dist.in_fraction < 1.0:
            found.append(Violation(
                "generation_mode.class_distribution.in_fraction",
                f"in_fraction must lie in (0, 1), got {dist.in_fraction}",
            ))
        if dist.exclusion_split != "equal":
            found.append(Violation(
                "generation_mode.class_distribution.exclusion_split",
                f"only the 'equal' exclusion split is supported, got '{dist.exclusion_split}'",
            ))

    ids = set(spec.ids)
    for pid, accuracy in config.machine_accuracy.items():
        if pid not in ids:
            found.append(Violation(f"machine_accuracy.{pid}", "names an unknown predicate"))
        if not 0.0 <= accuracy <= 1.0:
            found.append(Violation(f"machine_accuracy.{pid}", f"accuracy must lie in [0, 1], got {accuracy}"))
    for k, assignment in enumerate(config.hybrid_assignments):
        assigned = assignment.ids
        if sorted(assigned) != sorted(ids) or len(set(assigned)) != len(assigned):
            found.append(Violation(
                f"hybrid_assignments[{k}]",
                f"every predicate must be assigned exactly one source, got {assigned}",
            ))
        for pid in assignment.ids_for(Source.MACHINE):
            if pid not in config.machine_accuracy:
                found.append(Violation(f"hybrid_assignments[{k}].{pid}", "machine source has no machine_accuracy"))

    return ValidationReport(tuple(found))


def require_valid(config: SimulationConfig) -> SimulationConfig:
    """Raise ConfigError carrying the report when the config is invalid."""
    report = validate_config(config)
    if not report.is_valid:
        raise ConfigError("; ".join(report.messages()), report)
    return config


# -- JSON mapping --

_CONFIG_KEYS = {
    "complex_predicate", "item_count", "generation_mode", "budget_b", "beta_weights", "trials",
    "seed", "tie_rule", "fresh_accuracy_per_question", "selectivity_direction",
    "machine_accuracy", "hybrid_assignments",
}
_COMPLEX_KEYS = {"predicates", "penalty"}
_PREDICATE_KEYS = {"id", "selectivity", "accuracy_mean", "accuracy_var"}
_DISTRIBUTION_KEYS = {"in_fraction", "exclusion_split"}


def _reject_unknown(mapping: Any, allowed: set, path: str) -> Mapping[str, Any]:
    if not isinstance(mapping, Mapping):
        raise ConfigError(f"{path}: expected an object, got {type(mapping).__name__}")
    unknown = sorted(set(mapping) - allowed)
    if unknown:
        raise ConfigError(f"{path}: unknown fields {unknown}")
    return mapping


def _number(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {value!r}")
    return float(value)


def _integer(value: Any, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        if isinstance(value, float) and value.is_integer():
            return int(value)
        raise ConfigError(f"{path}: expected an integer, got {value!r}")
    return value


def _predicate_from_dict(data: Any, path: str) -> PredicateSpec:
    data = _reject_unknown(data, _PREDICATE_KEYS, path)
    for key in ("id", "selectivity", "accuracy_mean"):
        if key not in data:
            raise ConfigError(f"{path}: missing field '{key}'")
    return PredicateSpec(
        id=str(data["id"]),
        selectivity=_number(data["selectivity"], f"{path}.selectivity"),
        accuracy_mean=_number(data["accuracy_mean"], f"{path}.accuracy_mean"),
        accuracy_var=_number(data.get("accuracy_var", DEFAULTS["accuracy_var"]), f"{path}.accuracy_var"),
    )


def _generation_mode_from_value(value: Any) -> Optional[ClassDistributionSpec]:
    if value == "selectivity":
        return None
    mode = _reject_unknown(value, {"class_distribution"}, "generation_mode")
    if "class_distribution" not in mode:
        raise ConfigError("generation_mode: expected 'selectivity' or {\"class_distribution\": {...}}")
    dist = _reject_unknown(mode["class_distribution"], _DISTRIBUTION_KEYS, "generation_mode.class_distribution")
    if "in_fraction" not in dist:
        raise ConfigError("generation_mode.class_distribution: missing field 'in_fraction'")
    return ClassDistributionSpec(
        in_fraction=_number(dist["in_fraction"], "generation_mode.class_distribution.in_fraction"),
        exclusion_split=str(dist.get("exclusion_split", "equal")),
    )


def config_from_dict(data: Mapping[str, Any]) -> SimulationConfig:
    """
    Build a SimulationConfig from its JSON document.

    Missing optional keys take their DEFAULTS value; unknown keys anywhere in
    the document raise ConfigError. Bounds are not checked here, see
    validate_config.
    """
    data = _reject_unknown(data, _CONFIG_KEYS, "config")
    if "complex_predicate" not in data:
        raise ConfigError("config: missing field 'complex_predicate'")
    merged = dict(DEFAULTS)
    merged.update(data)

    cp = _reject_unknown(merged["complex_predicate"], _COMPLEX_KEYS, "complex_predicate")
    raw_predicates = cp.get("predicates")
    if not isinstance(raw_predicates, list):
        raise ConfigError("complex_predicate.predicates: expected a list")
    predicates = tuple(
        _predicate_from_dict(p, f"complex_predicate.predicates[{k}]") for k, p in enumerate(raw_predicates)
    )
    spec = ComplexPredicateSpec(predicates, _number(cp.get("penalty", DEFAULTS["penalty"]), "complex_predicate.penalty"))

    tie_value = str(merged["tie_rule"]).upper()
    if tie_value not in TieRule.__members__:
        raise ConfigError(f"tie_rule: expected 'OUT' or 'IN', got {merged['tie_rule']!r}")

    betas = merged["beta_weights"]
    if not isinstance(betas, list):
        raise ConfigError("beta_weights: expected a list")
    machine = merged["machine_accuracy"]
    if not isinstance(machine, Mapping):
        raise ConfigError("machine_accuracy: expected an object")
    assignments = merged["hybrid_assignments"]
    if not isinstance(assignments, list):
        raise ConfigError("hybrid_assignments: expected a list")
    parsed_assignments = []
    for k, raw in enumerate(assignments):
        if not isinstance(raw, Mapping):
            raise ConfigError(f"hybrid_assignments[{k}]: expected an object")
        try:
            parsed_assignments.append(SourceAssignment.from_mapping(raw))
        except ValueError:
            raise ConfigError(f"hybrid_assignments[{k}]: sources must be 'crowd' or 'machine'") from None
    if not isinstance(merged["fresh_accuracy_per_question"], bool):
        raise ConfigError("fresh_accuracy_per_question: expected true or false")

    return SimulationConfig(
        complex_predicate=spec,
        item_count=_integer(merged["item_count"], "item_count"),
        class_distribution=_generation_mode_from_value(merged["generation_mode"]),
        budget_b=_integer(merged["budget_b"], "budget_b"),
        beta_weights=tuple(_number(b, f"beta_weights[{k}]") for k, b in enumerate(betas)),
        trials=_integer(merged["trials"], "trials"),
        seed=_integer(merged.get("seed", 0), "seed"),
        tie_rule=TieRule[tie_value],
        fresh_accuracy_per_question=merged["fresh_accuracy_per_question"],
        selectivity_direction=str(merged["selectivity_direction"]),
        machine_accuracy={str(pid): _number(acc, f"machine_accuracy.{pid}") for pid, acc in machine.items()},
        hybrid_assignments=tuple(parsed_assignments),
    )


def config_to_dict(config: SimulationConfig) -> Dict[str, Any]:
    """Inverse of config_from_dict, with every default written out."""
    if config.class_distribution is None:
        mode: Any = "selectivity"
    else:
        mode = {"class_distribution": {
            "in_fraction": config.class_distribution.in_fraction,
            "exclusion_split": config.class_distribution.exclusion_split,
        }}
    return {
        "complex_predicate": {
            "predicates": [
                {"id": p.id, "selectivity": p.selectivity, "accuracy_mean": p.accuracy_mean, "accuracy_var": p.accuracy_var}
                for p in config.complex_predicate.predicates
            ],
            "penalty": config.complex_predicate.penalty,
        },
        "item_count": config.item_count,
        "generation_mode": mode,
        "budget_b": config.budget_b,
        "beta_weights": list(config.beta_weights),
        "trials": config.trials,
        "seed": config.seed,
        "tie_rule": config.tie_rule.value,
        "fresh_accuracy_per_question": config.fresh_accuracy_per_question,
        "selectivity_direction": config.selectivity_direction,
        "machine_accuracy": dict(config.machine_accuracy),
        "hybrid_assignments": [{pid: src.value for pid, src in a.sources} for a in config.hybrid_assignments],
    }


def load_config(path: Union[str, Path]) -> SimulationConfig:
    """Read a configuration JSON file. Raises OSError on I/O failure."""
    with open(path, "r", encoding="utf-8") as handle:
        try:
            data = json.load(handle)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}: invalid JSON: {e}") from None
    config = config_from_dict(data)
    logger.debug(f"Loaded config from {path}: n={config.n}, trials={config.trials}")
    return config


def dump_config(config: SimulationConfig, path: Union[str, Path]) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(config_to_dict(config), handle, indent=2)


def _broadcast(values: Any, n: int, name: str) -> List[float]:
    if isinstance(values, (list, tuple)):
        if len(values) != n:
            raise ConfigError(f"{name}: expected {n} values, got {len(values)}")
        return [float(v) for v in values]
    return [float(values)] * n


def with_parameters(
    config: SimulationConfig,
    n: Optional[int] = None,
    selectivities: Any = None,
    mus: Any = None,
    sigma2: Optional[float] = None,
    budget: Optional[int] = None,
    gamma: Optional[float] = None,
    betas: Optional[Sequence[float]] = None,
) -> SimulationConfig:
    """
    Copy a config re-parameterized at one sweep point.

    Scalars are shared by every predicate, lists are per predicate. When n
    changes, predicates are renamed p1..pn and unspecified moments fall back
    to the base config's averages.
    """
    spec = config.complex_predicate
    count = spec.n if n is None else int(n)
    if count == spec.n:
        ids = spec.ids
        base_s, base_mu, base_var = spec.selectivities, spec.mus, spec.variances
    else:
        ids = [f"p{j + 1}" for j in range(count)]
        base_s = [sum(spec.selectivities) / spec.n] * count
        base_mu = [sum(spec.mus) / spec.n] * count
        base_var = [sum(spec.variances) / spec.n] * count
    s_list = base_s if selectivities is None else _broadcast(selectivities, count, "selectivity")
    mu_list = base_mu if mus is None else _broadcast(mus, count, "mu")
    var_list = base_var if sigma2 is None else _broadcast(sigma2, count, "sigma2")
    predicates = tuple(
        PredicateSpec(pid, s, mu, var) for pid, s, mu, var in zip(ids, s_list, mu_list, var_list)
    )
    machine = {pid: acc for pid, acc in config.machine_accuracy.items() if pid in ids}
    hybrids = tuple(a for a in config.hybrid_assignments if sorted(a.ids) == sorted(ids))
    return replace(
        config,
        complex_predicate=ComplexPredicateSpec(predicates, spec.penalty if gamma is None else float(gamma)),
        budget_b=config.budget_b if budget is None else int(budget),
        beta_weights=config.beta_weights if betas is None else tuple(float(b) for b in betas),
        machine_accuracy=machine,
        hybrid_assignments=hybrids,
    )
