"""Scalar quality measures for decision trees over noisy tests.

Level entropy is computed on the true class distribution induced by the
partitions; test errors never enter the entropy, only the per-level error
and correct masses. All logs are base 2, probabilities are doubles.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import InvalidPartition, ValidationError
from .model import (
    Block,
    DecisionTree,
    Partition,
    TestTable,
    check_partition,
    class_path,
    level_trace,
)


class Metric(enum.Enum):
    ADDITIVE = "additive"
    MULTIPLICATIVE = "multiplicative"


@dataclass(frozen=True)
class MetricConfig:
    """Which construction metric to drive decisions with.

    ``ratio_offset`` is the additive offset applied to entropies inside the
    multiplicative metric's ratio; 1.0 is the conventional choice and is not
    claimed optimal.
    """

    kind: Metric = Metric.ADDITIVE
    ratio_offset: float = 1.0

    def __post_init__(self):
        if not self.ratio_offset > 0:
            raise ValidationError(f"ratio offset must be > 0, got {self.ratio_offset!r}")


@dataclass(frozen=True)
class LevelQuantities:
    """Per-level figures: entropies, error/correct mass, and both metrics."""

    level: int
    entropy_before: float
    entropy_after: float
    error_mass: float
    correct_mass: float
    additive_metric: float
    multiplicative_metric: float


def level_entropy(priors: Sequence[float], partition: Partition) -> float:
    """Residual class uncertainty (bits) given the partition's block is known.

    Each block contributes its mass times the entropy of the classes inside
    it, renormalized to the block.
    """
    check_partition(len(priors), partition)
    total = 0.0
    for block in partition:
        mass = math.fsum(priors[i] for i in block)
        if mass <= 0.0:
            raise InvalidPartition(f"block {block!r} has no probability mass")
        if len(block) == 1:
            continue
        h = 0.0
        for i in block:
            q = priors[i] / mass
            if q > 0.0:
                h -= q * math.log2(q)
        total += mass * h
    return total


def _per_class_errors(
    table: TestTable, partition: Partition, assignment: Mapping[Block, str]
) -> list[float]:
    """Effective per-class error at one level: the assigned test's error for
    classes in assigned blocks, 0 for classes left untested."""
    errs = [0.0] * table.n_classes
    for block, test_id in assignment.items():
        m = table.test_index(test_id)
        for i in block:
            e = float(table.errors[m, i])
            if math.isnan(e):
                raise InvalidPartition(
                    f"test {test_id!r} undefined for class {table.classes[i]!r}"
                )
            errs[i] = e
    return errs


def level_error_mass(
    table: TestTable, partition: Partition, assignment: Mapping[Block, str]
) -> float:
    """Prior-weighted probability that some test at this level errs."""
    check_partition(table.n_classes, partition)
    errs = _per_class_errors(table, partition, assignment)
    return math.fsum(p * e for p, e in zip(table.priors, errs))


def level_correct_mass(
    table: TestTable, partition: Partition, assignment: Mapping[Block, str]
) -> float:
    """Prior-weighted probability that every test at this level answers right."""
    check_partition(table.n_classes, partition)
    errs = _per_class_errors(table, partition, assignment)
    return math.fsum(p * (1.0 - e) for p, e in zip(table.priors, errs))


def metric_additive(entropy_drop: float, error_mass: float) -> float:
    """Entropy reduction per unit error mass; +inf for an error-free level.

    An error-free level can never be the binding (minimal) level, so the
    infinity convention keeps evaluators total without special-casing.
    """
    if entropy_drop < 0:
        raise ValidationError(f"entropy drop must be >= 0, got {entropy_drop!r}")
    if error_mass < 0:
        raise ValidationError(f"error mass must be >= 0, got {error_mass!r}")
    if error_mass == 0.0:
        return math.inf if entropy_drop > 0.0 else 0.0
    return entropy_drop / error_mass


def metric_multiplicative(
    entropy_before: float,
    entropy_after: float,
    correct_mass: float,
    ratio_offset: float = 1.0,
) -> float:
    """Offset entropy ratio of consecutive levels per unit correct mass."""
    if not correct_mass > 0:
        raise ValidationError(f"correct mass must be > 0, got {correct_mass!r}")
    if not ratio_offset > 0:
        raise ValidationError(f"ratio offset must be > 0, got {ratio_offset!r}")
    if entropy_after > entropy_before:
        raise ValidationError("entropy must not increase between levels")
    ratio = (entropy_before + ratio_offset) / (entropy_after + ratio_offset)
    return ratio / correct_mass


def level_quantities(
    tree: DecisionTree, table: TestTable, ratio_offset: float = 1.0
) -> list[LevelQuantities]:
    """Entropy, masses, and both metrics for every level of ``tree``."""
    steps = level_trace(tree, table)
    out: list[LevelQuantities] = []
    h_prev = level_entropy(table.priors, steps[0].before) if steps else 0.0
    for d, step in enumerate(steps, start=1):
        h_next = level_entropy(table.priors, step.after)
        g = level_error_mass(table, step.before, step.assignment)
        b = level_correct_mass(table, step.before, step.assignment)
        out.append(
            LevelQuantities(
                level=d,
                entropy_before=h_prev,
                entropy_after=h_next,
                error_mass=g,
                correct_mass=b,
                additive_metric=metric_additive(h_prev - h_next, g),
                multiplicative_metric=metric_multiplicative(h_prev, h_next, b, ratio_offset),
            )
        )
        h_prev = h_next
    return out


def exact_misclassification(tree: DecisionTree, table: TestTable) -> float:
    """Probability that at least one test along an object's true path errs."""
    total = 0.0
    for i, class_id in enumerate(table.classes):
        survive = 1.0
        for step in class_path(tree, table, class_id):
            survive *= 1.0 - step.error_prob
        total += table.priors[i] * (1.0 - survive)
    return total


def exact_correct(tree: DecisionTree, table: TestTable) -> float:
    """Probability that every test along an object's true path answers right."""
    total = 0.0
    for i, class_id in enumerate(table.classes):
        survive = 1.0
        for step in class_path(tree, table, class_id):
            survive *= 1.0 - step.error_prob
        total += table.priors[i] * survive
    return total


def additive_approx(tree: DecisionTree, table: TestTable) -> float:
    """First-order misclassification estimate: the sum of level error masses."""
    return math.fsum(q.error_mass for q in level_quantities(tree, table))


def multiplicative_approx(tree: DecisionTree, table: TestTable) -> float:
    """Correct-classification estimate: the product of level correct masses."""
    result = 1.0
    for q in level_quantities(tree, table):
        result *= q.correct_mass
    return result


def bounds_additive(tree: DecisionTree, table: TestTable) -> tuple[float, float]:
    """(lower, upper) bracket on the additive misclassification estimate.

    The initial entropy divided by the largest (smallest) per-level additive
    metric brackets the sum of level error masses.
    """
    quantities = level_quantities(tree, table)
    h0 = quantities[0].entropy_before if quantities else 0.0
    values = [q.additive_metric for q in quantities]
    return (_safe_div(h0, max(values)), _safe_div(h0, min(values)))


def bounds_multiplicative(
    tree: DecisionTree, table: TestTable, ratio_offset: float = 1.0
) -> tuple[float, float]:
    """The pair ((H0+r)/max metric, (H0+r)/min metric) for the product form.

    Unlike the additive pair, this does not bracket the product of correct
    masses once the tree has two or more levels: every per-level factor is
    at least 1, so the product of factors exceeds any single one and both
    returned values then sit at or above the product approximation.
    """
    quantities = level_quantities(tree, table, ratio_offset)
    h0 = quantities[0].entropy_before if quantities else 0.0
    values = [q.multiplicative_metric for q in quantities]
    return (
        _safe_div(h0 + ratio_offset, max(values)),
        _safe_div(h0 + ratio_offset, min(values)),
    )


def _safe_div(num: float, den: float) -> float:
    if math.isinf(den):
        return 0.0
    return num / den
