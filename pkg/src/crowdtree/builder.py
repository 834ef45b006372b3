"""Decision tree construction: greedy metric-driven, random, and exhaustive.

The greedy builder works level by level: every still-ambiguous block gets
exactly one applicable test per level, and the joint choice across blocks is
scored by the configured metric. Joint selection enumerates the full cross
product of per-block candidates when that is affordable and falls back to
coordinate ascent otherwise.
"""

from __future__ import annotations

import enum
import itertools
import random
from dataclasses import dataclass, field
from typing import Iterator

from .errors import DepthGuardExceeded, InseparableClasses, InstanceTooLarge, ValidationError
from .metrics import (
    LevelQuantities,
    Metric,
    MetricConfig,
    exact_correct,
    exact_misclassification,
    level_correct_mass,
    level_entropy,
    level_error_mass,
    level_quantities,
    metric_additive,
    metric_multiplicative,
)
from .model import (
    Block,
    DecisionTree,
    Internal,
    Leaf,
    Node,
    Partition,
    TestTable,
    applicable_tests,
    level_trace,
    refine_partition,
    split_block,
)

_ASCENT_MAX_SWEEPS = 10


@dataclass(frozen=True)
class BuilderConfig:
    metric: MetricConfig = field(default_factory=MetricConfig)
    joint_cap: int = 10_000
    max_depth: int = 64

    def __post_init__(self):
        if self.joint_cap < 1:
            raise ValidationError(f"joint cap must be >= 1, got {self.joint_cap}")
        if self.max_depth < 1:
            raise ValidationError(f"max depth must be >= 1, got {self.max_depth}")


@dataclass(frozen=True)
class GreedyResult:
    tree: DecisionTree
    levels: tuple[LevelQuantities, ...]


def _inseparable_error(table: TestTable, block: Block) -> InseparableClasses:
    """Name an offending pair: two block members no single test tells apart."""
    for i, j in itertools.combinations(block, 2):
        separable = False
        for m in range(table.n_tests):
            oi, oj = int(table.outcomes[m, i]), int(table.outcomes[m, j])
            if oi >= 0 and oj >= 0 and oi != oj:
                separable = True
                break
        if not separable:
            return InseparableClasses(
                f"classes {table.classes[i]!r} and {table.classes[j]!r} are not "
                f"separated by any test"
            )
    names = [table.classes[i] for i in block]
    return InseparableClasses(
        f"no applicable test splits the group {names}; classes "
        f"{names[0]!r} and {names[1]!r} stay together"
    )


def _level_score(
    table: TestTable,
    partition: Partition,
    assignment: dict[Block, str],
    entropy_before: float,
    config: BuilderConfig,
) -> float:
    """Metric value of one joint assignment; higher is always better here."""
    after = refine_partition(table, partition, assignment)
    entropy_after = level_entropy(table.priors, after)
    if config.metric.kind is Metric.ADDITIVE:
        g = level_error_mass(table, partition, assignment)
        return metric_additive(entropy_before - entropy_after, g)
    b = level_correct_mass(table, partition, assignment)
    return metric_multiplicative(
        entropy_before, entropy_after, b, config.metric.ratio_offset
    )


def _choose_level_assignment(
    table: TestTable,
    partition: Partition,
    open_blocks: list[Block],
    candidates: dict[Block, list[str]],
    entropy_before: float,
    config: BuilderConfig,
) -> dict[Block, str]:
    """Pick one test per open block, jointly optimizing the level metric.

    Ties on the metric value break toward the lowest test index per block,
    blocks considered in partition order.
    """
    index = {t: m for m, t in enumerate(table.tests)}

    def key_of(assignment: dict[Block, str]) -> tuple[int, ...]:
        return tuple(index[assignment[b]] for b in open_blocks)

    n_combos = 1
    for block in open_blocks:
        n_combos *= len(candidates[block])
        if n_combos > config.joint_cap:
            break

    if n_combos <= config.joint_cap:
        best: dict[Block, str] | None = None
        best_score = -1.0
        best_key: tuple[int, ...] | None = None
        for combo in itertools.product(*(candidates[b] for b in open_blocks)):
            assignment = dict(zip(open_blocks, combo))
            score = _level_score(table, partition, assignment, entropy_before, config)
            key = key_of(assignment)
            if best is None or score > best_score or (score == best_score and key < best_key):
                best, best_score, best_key = assignment, score, key
        assert best is not None
        return best

    # Coordinate ascent: start from the lowest-index candidate everywhere,
    # then improve one block at a time until a whole sweep changes nothing.
    assignment = {b: min(candidates[b], key=index.__getitem__) for b in open_blocks}
    for _ in range(_ASCENT_MAX_SWEEPS):
        changed = False
        for block in open_blocks:
            current_score = _level_score(table, partition, assignment, entropy_before, config)
            best_test = assignment[block]
            best_score = current_score
            for test_id in candidates[block]:
                if test_id == assignment[block]:
                    continue
                trial = dict(assignment)
                trial[block] = test_id
                score = _level_score(table, partition, trial, entropy_before, config)
                if score > best_score or (
                    score == best_score and index[test_id] < index[best_test]
                ):
                    best_test, best_score = test_id, score
            if best_test != assignment[block]:
                assignment[block] = best_test
                changed = True
        if not changed:
            break
    return assignment


def _assemble(
    block: Block, level: int, chosen: list[dict[Block, str]], table: TestTable
) -> Node:
    if len(block) == 1:
        return Leaf(table.classes[block[0]])
    test_id = chosen[level][block]
    zeros, ones = split_block(table, block, test_id)
    return Internal(
        test_id,
        _assemble(zeros, level + 1, chosen, table),
        _assemble(ones, level + 1, chosen, table),
    )


def build_greedy(table: TestTable, config: BuilderConfig | None = None) -> GreedyResult:
    """Construct a tree level by level under the configured metric.

    Every non-singleton block receives a test at every level; construction
    ends when all blocks are singletons. Deterministic for a given table and
    config.
    """
    config = config or BuilderConfig()
    partition: Partition = (table.all_classes_block(),)
    chosen: list[dict[Block, str]] = []
    while any(len(b) > 1 for b in partition):
        if len(chosen) >= config.max_depth:
            raise DepthGuardExceeded(f"tree exceeded max depth {config.max_depth}")
        open_blocks = [b for b in partition if len(b) > 1]
        candidates: dict[Block, list[str]] = {}
        for block in open_blocks:
            tests = applicable_tests(table, block)
            if not tests:
                raise _inseparable_error(table, block)
            candidates[block] = tests
        entropy_before = level_entropy(table.priors, partition)
        assignment = _choose_level_assignment(
            table, partition, open_blocks, candidates, entropy_before, config
        )
        chosen.append(assignment)
        partition = refine_partition(table, partition, assignment)
    tree = DecisionTree(_assemble(table.all_classes_block(), 0, chosen, table))
    return GreedyResult(
        tree=tree,
        levels=tuple(level_quantities(tree, table, config.metric.ratio_offset)),
    )


def build_random(table: TestTable, seed: int) -> DecisionTree:
    """Tree with a uniformly random applicable test at every block.

    Blocks are visited level by level in partition order, so a given seed
    reproduces the same tree bit for bit.
    """
    rng = random.Random(seed)
    partition: Partition = (table.all_classes_block(),)
    chosen: list[dict[Block, str]] = []
    while any(len(b) > 1 for b in partition):
        assignment: dict[Block, str] = {}
        for block in partition:
            if len(block) == 1:
                continue
            tests = applicable_tests(table, block)
            if not tests:
                raise _inseparable_error(table, block)
            assignment[block] = tests[rng.randrange(len(tests))]
        chosen.append(assignment)
        partition = refine_partition(table, partition, assignment)
    return DecisionTree(_assemble(table.all_classes_block(), 0, chosen, table))


_DEFAULT_MAX_CLASSES = 5
_DEFAULT_MAX_TESTS = 5


def enumerate_trees(
    table: TestTable,
    max_classes: int = _DEFAULT_MAX_CLASSES,
    max_tests: int = _DEFAULT_MAX_TESTS,
) -> Iterator[DecisionTree]:
    """Yield every distinct valid tree for a small instance.

    Recursion never needs to track used tests: once a test splits a block,
    it is constant on both halves and therefore never applicable below.
    """
    if table.n_classes > max_classes or table.n_tests > max_tests:
        raise InstanceTooLarge(
            f"{table.n_classes} classes / {table.n_tests} tests exceeds the "
            f"{max_classes}/{max_tests} enumeration bound"
        )
    memo: dict[Block, list[Node]] = {}

    def block_trees(block: Block) -> list[Node]:
        if len(block) == 1:
            return [Leaf(table.classes[block[0]])]
        cached = memo.get(block)
        if cached is not None:
            return cached
        out: list[Node] = []
        for test_id in applicable_tests(table, block):
            zeros, ones = split_block(table, block, test_id)
            for zt in block_trees(zeros):
                for ot in block_trees(ones):
                    out.append(Internal(test_id, zt, ot))
        memo[block] = out
        return out

    for root in block_trees(table.all_classes_block()):
        yield DecisionTree(root)


class Objective(enum.Enum):
    EXACT_PM = "exact-pm"  # minimize misclassification probability
    EXACT_PC = "exact-pc"  # maximize correct-classification probability


def _level_test_key(tree: DecisionTree, table: TestTable) -> tuple[tuple[int, ...], ...]:
    index = {t: m for m, t in enumerate(table.tests)}
    key = []
    for step in level_trace(tree, table):
        key.append(
            tuple(index[step.assignment[b]] for b in step.before if b in step.assignment)
        )
    return tuple(key)


def best_tree_exhaustive(
    table: TestTable,
    objective: Objective = Objective.EXACT_PM,
    max_classes: int = _DEFAULT_MAX_CLASSES,
    max_tests: int = _DEFAULT_MAX_TESTS,
) -> tuple[DecisionTree, float]:
    """Globally optimal tree by brute force over :func:`enumerate_trees`.

    Exact-value ties break toward the lexicographically smallest per-level
    test sequence.
    """
    best_tree: DecisionTree | None = None
    best_value = 0.0
    best_key: tuple | None = None
    for tree in enumerate_trees(table, max_classes, max_tests):
        if objective is Objective.EXACT_PM:
            value = exact_misclassification(tree, table)
            better = best_tree is None or value < best_value
        else:
            value = exact_correct(tree, table)
            better = best_tree is None or value > best_value
        key = _level_test_key(tree, table)
        if better or (value == best_value and key < best_key):
            best_tree, best_value, best_key = tree, value, key
    if best_tree is None:
        raise _inseparable_error(table, table.all_classes_block())
    return best_tree, best_value
