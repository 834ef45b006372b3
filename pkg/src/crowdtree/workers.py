"""Allocation of redundant crowd workers to the tests of a built tree.

Every tree test starts with one seated worker; a budget of worker pairs is
then distributed so each test keeps an odd group size. The fused group error
of a test replaces its per-class error probability in every downstream
metric and evaluator.
"""

from __future__ import annotations

import enum
import math
import random
from dataclasses import dataclass
from typing import Mapping

from .errors import UnknownStrategy, UnknownTest, ValidationError
from .fusion import group_error
from .metrics import (
    Metric,
    MetricConfig,
    level_correct_mass,
    level_entropy,
    level_error_mass,
    metric_additive,
    metric_multiplicative,
)
from .model import DecisionTree, Leaf, Node, TestTable, level_trace


class AssignmentStrategy(enum.Enum):
    PROPOSED = "proposed"
    RANDOM_PER_PAIR = "random"
    SINGLE_TEST = "single"
    ALL_WORKERS_ALL_TESTS = "all"


@dataclass(frozen=True)
class WorkerAllocation:
    """Extra worker pairs per test on top of one seated worker each.

    ``shared_pool`` marks the convention where one pool of workers answers
    every test (then ``extra_pairs`` holds the same pair count for each test
    and the budget is not a sum across tests).
    """

    extra_pairs: Mapping[str, int]
    worker_error: float
    strategy: AssignmentStrategy
    seed: int | None = None
    shared_pool: bool = False

    def pairs_for(self, test_id: str) -> int:
        try:
            return self.extra_pairs[test_id]
        except KeyError:
            raise UnknownTest(f"test {test_id!r} not covered by this allocation") from None

    def group_size(self, test_id: str) -> int:
        return 2 * self.pairs_for(test_id) + 1

    def effective_error(self, test_id: str) -> float:
        """Fused error of the test's worker group; replaces the test's raw
        error probability everywhere downstream."""
        return group_error(self.pairs_for(test_id), self.worker_error)

    def total_pairs(self) -> int:
        return sum(self.extra_pairs.values())


def effective_error(allocation: WorkerAllocation, test_id: str) -> float:
    return allocation.effective_error(test_id)


def effective_table(table: TestTable, allocation: WorkerAllocation) -> TestTable:
    """Table with each allocated test's error column set to its fused error."""
    return table.with_test_errors(
        {t: allocation.effective_error(t) for t in allocation.extra_pairs}
    )


@dataclass(frozen=True)
class AssignStep:
    """One committed pair: which level was weakest and which test got help."""

    iteration: int
    level: int
    test: str
    metric_before: float
    metric_after: float
    pairs_after: int
    effective_error_after: float


def _tree_tests(tree: DecisionTree, table: TestTable) -> list[str]:
    """The tree's tests in table declaration order."""
    present = set(tree.test_ids())
    return [t for t in table.tests if t in present]


def _check_worker_args(budget: int, worker_error: float) -> None:
    if budget < 0:
        raise ValidationError(f"pair budget must be >= 0, got {budget}")
    if not (0.0 < worker_error < 0.5):
        raise ValidationError(
            f"worker error must lie strictly in (0, 0.5), got {worker_error!r}"
        )


def assign_proposed(
    tree: DecisionTree,
    table: TestTable,
    budget: int,
    worker_error: float,
    metric: MetricConfig | None = None,
) -> tuple[WorkerAllocation, list[AssignStep]]:
    """Distribute worker pairs greedily, always repairing the weakest level.

    Each iteration recomputes every level's metric under the current fused
    errors, picks the weakest level (lowest additive metric or highest
    multiplicative metric; earliest level on ties), and commits one pair to
    the test at that level whose reinforcement improves the level metric the
    most (lowest test index on ties).
    """
    metric = metric or MetricConfig()
    _check_worker_args(budget, worker_error)
    steps = level_trace(tree, table)
    pairs = {t: 0 for t in _tree_tests(tree, table)}
    test_index = {t: m for m, t in enumerate(table.tests)}
    log: list[AssignStep] = []

    def level_metric(step_idx: int, trial_pairs: Mapping[str, int]) -> float:
        fused = table.with_test_errors(
            {t: group_error(k, worker_error) for t, k in trial_pairs.items()}
        )
        step = steps[step_idx]
        h_before = level_entropy(table.priors, step.before)
        h_after = level_entropy(table.priors, step.after)
        if metric.kind is Metric.ADDITIVE:
            return metric_additive(
                h_before - h_after, level_error_mass(fused, step.before, step.assignment)
            )
        return metric_multiplicative(
            h_before,
            h_after,
            level_correct_mass(fused, step.before, step.assignment),
            metric.ratio_offset,
        )

    for iteration in range(1, budget + 1):
        values = [level_metric(d, pairs) for d in range(len(steps))]
        if metric.kind is Metric.ADDITIVE:
            target = min(range(len(values)), key=lambda d: (values[d], d))
        else:
            target = min(range(len(values)), key=lambda d: (-values[d], d))
        level_tests = sorted(
            set(steps[target].assignment.values()), key=test_index.__getitem__
        )
        best_test: str | None = None
        best_value = 0.0
        for test_id in level_tests:
            trial = dict(pairs)
            trial[test_id] += 1
            value = level_metric(target, trial)
            better = (
                value > best_value
                if metric.kind is Metric.ADDITIVE
                else value < best_value
            )
            if best_test is None or better:
                best_test, best_value = test_id, value
        assert best_test is not None
        pairs[best_test] += 1
        log.append(
            AssignStep(
                iteration=iteration,
                level=target + 1,
                test=best_test,
                metric_before=values[target],
                metric_after=best_value,
                pairs_after=pairs[best_test],
                effective_error_after=group_error(pairs[best_test], worker_error),
            )
        )
    allocation = WorkerAllocation(
        extra_pairs=pairs,
        worker_error=worker_error,
        strategy=AssignmentStrategy.PROPOSED,
    )
    return allocation, log


def assign_baseline(
    tree: DecisionTree,
    table: TestTable,
    strategy: AssignmentStrategy,
    budget: int,
    worker_error: float,
    seed: int = 0,
) -> WorkerAllocation:
    """One of the reference allocations: all pairs on one random test, each
    pair on an independently random test, or one shared pool on every test.

    Randomized strategies draw from ``seed``; for a fixed seed the random
    per-pair choices for budget K are a prefix of those for budget K+1.
    """
    _check_worker_args(budget, worker_error)
    tests = _tree_tests(tree, table)
    pairs = {t: 0 for t in tests}
    rng = random.Random(seed)
    if strategy is AssignmentStrategy.SINGLE_TEST:
        target = tests[rng.randrange(len(tests))]
        pairs[target] = budget
    elif strategy is AssignmentStrategy.RANDOM_PER_PAIR:
        for _ in range(budget):
            pairs[tests[rng.randrange(len(tests))]] += 1
    elif strategy is AssignmentStrategy.ALL_WORKERS_ALL_TESTS:
        pairs = {t: budget for t in tests}
        return WorkerAllocation(
            extra_pairs=pairs,
            worker_error=worker_error,
            strategy=strategy,
            seed=seed,
            shared_pool=True,
        )
    else:
        raise UnknownStrategy(
            f"{strategy} is not a baseline; use assign_proposed for the greedy rule"
        )
    return WorkerAllocation(
        extra_pairs=pairs, worker_error=worker_error, strategy=strategy, seed=seed
    )


def allocation_cost(
    tree: DecisionTree, table: TestTable, allocation: WorkerAllocation
) -> tuple[float, int]:
    """(expected worker answers per error-free object, flat total group size).

    The expected cost weights each node's group size by the probability that
    an error-free object reaches the node; the flat total just sums group
    sizes over all allocated tests.
    """
    expected = 0.0

    def walk(node: Node, mass: float) -> None:
        nonlocal expected
        if isinstance(node, Leaf):
            return
        expected += mass * allocation.group_size(node.test)
        zero_mass = math.fsum(
            table.priors[table.class_index(lbl)] for lbl in DecisionTree(node.zero).leaf_labels()
        )
        walk(node.zero, zero_mass)
        walk(node.one, mass - zero_mass)

    walk(tree.root, math.fsum(table.priors))
    flat = sum(2 * k + 1 for k in allocation.extra_pairs.values())
    return expected, flat
