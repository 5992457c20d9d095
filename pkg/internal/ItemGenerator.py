"""
ItemGenerator - Synthetic item pools with ground-truth predicate bits.

Two modes: independent bits drawn from per-predicate selectivities, or a
fixed IN fraction with the OUT items spread evenly over the exclusion
patterns.
"""
import itertools
import logging
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import List, Tuple, Union

import numpy as np
import pandas as pd

from .CoreModel import ClassDistributionSpec, ComplexPredicateSpec, ItemTruth
from .Errors import DegenerateCount, EmptyPool, MalformedRow, NonBinaryAnswer

logger = logging.getLogger(__name__)

SeedLike = Union[int, np.random.SeedSequence, np.random.Generator]


def as_generator(seed: SeedLike) -> np.random.Generator:
    """Accept an integer seed, a SeedSequence or an existing Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class ItemPool:
    """A finite pool of items with their ground truth."""

    items: Tuple[ItemTruth, ...]
    n: int
    provenance: str

    @classmethod
    def from_matrix(cls, bits: np.ndarray, provenance: str) -> "ItemPool":
        items = tuple(ItemTruth(f"i{k}", tuple(int(b) for b in row)) for k, row in enumerate(bits))
        pool = cls(items, int(bits.shape[1]), provenance)
        # Keep the generated matrix instead of rebuilding it from the tuples.
        pool.__dict__["bits"] = np.asarray(bits, dtype=np.int8)
        return pool

    def __len__(self) -> int:
        return len(self.items)

    @cached_property
    def bits(self) -> np.ndarray:
        """(items, n) matrix of predicate bits."""
        if not self.items:
            return np.zeros((0, self.n), dtype=np.int8)
        return np.array([item.bits for item in self.items], dtype=np.int8)

    @property
    def in_labels(self) -> np.ndarray:
        return self.bits.all(axis=1).astype(np.int8)

    @property
    def item_ids(self) -> List[str]:
        return [item.item_id for item in self.items]


def exclusion_patterns(n: int) -> List[Tuple[int, ...]]:
    """All 2^n - 1 OUT bit patterns, ones before zeros ({10, 01, 00} for n=2)."""
    return [p for p in itertools.product((1, 0), repeat=n) if not all(p)]


def _check_count(count: int) -> None:
    if count < 1:
        raise DegenerateCount(f"item count must be >= 1, got {count}")


def generate_items_selectivity(
    spec: ComplexPredicateSpec,
    count: int,
    rng_seed: SeedLike,
    direction: str = "satisfied",
) -> ItemPool:
    """
    Draw every predicate bit independently with P(bit=1) = s_j.

    With direction="filtered" the selectivity is read as the probability of
    failing the predicate instead.
    """
    _check_count(count)
    rng = as_generator(rng_seed)
    probabilities = np.array(spec.selectivities, dtype=float)
    if direction == "filtered":
        probabilities = 1.0 - probabilities
    bits = (rng.random((count, spec.n)) < probabilities).astype(np.int8)
    seed_note = rng_seed if isinstance(rng_seed, int) else "stream"
    return ItemPool.from_matrix(bits, f"selectivity(seed={seed_note})")


def class_distribution_counts(n: int, dist: ClassDistributionSpec, count: int) -> List[Tuple[Tuple[int, ...], int]]:
    """Pattern -> item count for the IN pattern followed by every exclusion pattern."""
    _check_count(count)
    n_in = round(count * dist.in_fraction)
    patterns = exclusion_patterns(n)
    base, remainder = divmod(count - n_in, len(patterns))
    counts = [((1,) * n, n_in)]
    counts.extend((pattern, base + (1 if k < remainder else 0)) for k, pattern in enumerate(patterns))
    return counts


def generate_items_class_distribution(
    spec: ComplexPredicateSpec,
    dist: ClassDistributionSpec,
    count: int,
    rng_seed: SeedLike,
) -> ItemPool:
    """
    Exactly round(count * in_fraction) IN items; the rest split evenly over the
    exclusion patterns with the remainder going to the first patterns in
    exclusion_patterns order. Item order is shuffled by the seed.
    """
    rng = as_generator(rng_seed)
    rows: List[Tuple[int, ...]] = []
    for pattern, k in class_distribution_counts(spec.n, dist, count):
        rows.extend([pattern] * k)
    bits = np.array(rows, dtype=np.int8).reshape(count, spec.n)
    bits = bits[rng.permutation(count)]
    seed_note = rng_seed if isinstance(rng_seed, int) else "stream"
    return ItemPool.from_matrix(bits, f"class_distribution(in_fraction={dist.in_fraction}, seed={seed_note})")


def empirical_selectivity(pool: ItemPool) -> List[float]:
    """Fraction of items with bit j set, per predicate."""
    if len(pool) == 0:
        raise EmptyPool("cannot compute selectivity of an empty pool")
    return [float(v) for v in pool.bits.mean(axis=0)]


def pool_to_csv(pool: ItemPool, path: Union[str, Path]) -> None:
    """Write `item_id,p_1,...,p_n,in_label`."""
    frame = pd.DataFrame(pool.bits, columns=[f"p_{j + 1}" for j in range(pool.n)])
    frame.insert(0, "item_id", pool.item_ids)
    frame["in_label"] = pool.in_labels
    frame.to_csv(path, index=False)
    logger.info(f"Wrote {len(pool)} items to {path}")


def _binary_cell(value: str, line: int, column: str, path: str) -> int:
    if value not in ("0", "1"):
        raise NonBinaryAnswer(line, f"column '{column}' must be 0 or 1, got '{value}'", path)
    return int(value)


def pool_from_csv(path: Union[str, Path]) -> ItemPool:
    """Read the pool CSV back, checking every cell and the in_label column."""
    frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    predicate_columns = [c for c in frame.columns if c.startswith("p_")]
    expected = ["item_id"] + [f"p_{j + 1}" for j in range(len(predicate_columns))] + ["in_label"]
    if list(frame.columns) != expected or not predicate_columns:
        raise MalformedRow(1, f"header must be {','.join(expected) if predicate_columns else 'item_id,p_1,...,p_n,in_label'}", str(path))
    items: List[ItemTruth] = []
    seen = set()
    for index, row in enumerate(frame.itertuples(index=False)):
        line = index + 2
        item_id = row[0].strip()
        if not item_id:
            raise MalformedRow(line, "empty item_id", str(path))
        if item_id in seen:
            raise MalformedRow(line, f"duplicate item_id '{item_id}'", str(path))
        seen.add(item_id)
        bits = tuple(_binary_cell(row[k + 1].strip(), line, c, str(path)) for k, c in enumerate(predicate_columns))
        label = _binary_cell(row[-1].strip(), line, "in_label", str(path))
        item = ItemTruth(item_id, bits)
        if item.in_label != label:
            raise MalformedRow(line, f"in_label {label} disagrees with predicate bits {list(bits)}", str(path))
        items.append(item)
    return ItemPool(tuple(items), len(predicate_columns), f"csv({path})")
