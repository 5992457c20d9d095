"""
Errors - Exception hierarchy shared by the simulator and the analysis pipeline.

Every failure raised by the engine derives from CrowdSimError so the command
layer can map it to an exit code in one place.
"""
from typing import Iterable, Optional


class CrowdSimError(Exception):
    """Base class for all domain errors."""


class DomainError(CrowdSimError, ValueError):
    """A numeric argument lies outside its mathematical domain."""


class InfeasibleVariance(DomainError):
    """The requested Beta variance cannot be realized for the given mean."""

    def __init__(self, mean: float, variance: float):
        self.mean = mean
        self.variance = variance
        super().__init__(
            f"variance {variance} is infeasible for mean {mean}: "
            f"must be < mean*(1-mean) = {mean * (1 - mean)}"
        )


class ConfigError(CrowdSimError):
    """A configuration document is malformed or violates its invariants."""

    def __init__(self, message: str, report=None):
        self.report = report
        super().__init__(message)


class EmptyVector(CrowdSimError, ValueError):
    """An operation that needs at least one element received none."""


class EmptyPool(CrowdSimError):
    """An item pool has no items."""


class DegenerateCount(CrowdSimError):
    """An item count cannot produce a pool."""


class EmptyVotes(CrowdSimError):
    """Majority voting was asked to aggregate zero votes."""


class MissingVoteSet(CrowdSimError):
    """A task design needs a vote set that was not supplied."""

    def __init__(self, question: str):
        self.question = question
        super().__init__(f"missing vote set for question '{question}'")


class MissingVerdict(CrowdSimError):
    """A hybrid composition lacks a verdict from the assigned source."""

    def __init__(self, predicate_id: str, source: str):
        self.predicate_id = predicate_id
        self.source = source
        super().__init__(f"no {source} verdict for predicate '{predicate_id}'")


class KeyMismatch(CrowdSimError):
    """Decision and truth maps are keyed by different items."""

    def __init__(self, difference: Iterable):
        self.difference = sorted(str(key) for key in difference)
        super().__init__(f"item keys differ: {self.difference}")


class NoPositives(CrowdSimError):
    """F-beta is undefined: no positive truths and no positive predictions."""


class TooFewGroups(CrowdSimError):
    """A rank test needs at least two groups."""


class EmptyGroup(CrowdSimError):
    """A rank test group has no observations."""

    def __init__(self, label: str):
        self.label = label
        super().__init__(f"group '{label}' has no observations")


class MalformedRow(CrowdSimError):
    """A row of an input file could not be parsed."""

    def __init__(self, line: int, reason: str, path: Optional[str] = None):
        self.line = line
        self.reason = reason
        self.path = path
        location = f"{path}:{line}" if path else f"line {line}"
        super().__init__(f"{location}: {reason}")


class UnknownCondition(MalformedRow):
    """A judgment row names a condition outside the known set."""


class NonBinaryAnswer(MalformedRow):
    """A judgment or label cell is not 0 or 1."""


class MissingVotes(CrowdSimError):
    """Some (item, predicate) pairs required by a condition have no votes."""

    def __init__(self, condition: str, items: Iterable):
        self.condition = condition
        self.items = sorted(str(item) for item in items)
        super().__init__(f"condition '{condition}' has no votes for items {self.items}")


class MissingTruth(CrowdSimError):
    """A judged item has no ground-truth record."""

    def __init__(self, items: Iterable):
        self.items = sorted(str(item) for item in items)
        super().__init__(f"no ground truth for items {self.items}")


class NoTimes(CrowdSimError):
    """No judgment carries a decision time."""


class UnknownPredicate(CrowdSimError):
    """A judgment names a simple predicate the ground truth does not label."""

    def __init__(self, predicate_ids: Iterable, known: Iterable):
        self.predicate_ids = sorted(str(pid) for pid in predicate_ids)
        self.known = list(known)
        super().__init__(f"ground truth has no labels for predicates {self.predicate_ids}, known: {self.known}")
