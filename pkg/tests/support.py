"""Shared helpers: independent oracles and a seeded random-instance generator.

Oracles here deliberately re-derive quantities through a different route
than the library (joint-probability entropy, explicit vote enumeration,
closed-form path survival) so tests cross-check rather than echo.
"""

from __future__ import annotations

import itertools
import math
import random

from crowdtree import DecisionTree, Leaf, TestTable, validate_table
from crowdtree.builder import build_greedy
from crowdtree.errors import InseparableClasses


def entropy_oracle(priors, partition) -> float:
    """Joint-form conditional entropy: -sum p(class) log2 p(class | block)."""
    total = 0.0
    for block in partition:
        mass = sum(priors[i] for i in block)
        for i in block:
            total -= priors[i] * math.log2(priors[i] / mass)
    return total


def path_survival_pm(priors, error_lists) -> float:
    """Closed-form misclassification from per-class error-probability lists."""
    total = 0.0
    for p, errs in zip(priors, error_lists):
        alive = 1.0
        for e in errs:
            alive *= 1.0 - e
        total += p * (1.0 - alive)
    return total


def vote_enumeration_group_error(extra_pairs: int, worker_error: float) -> float:
    """Group error by enumerating every vote pattern of 2k+1 workers."""
    n = 2 * extra_pairs + 1
    total = 0.0
    for pattern in itertools.product((False, True), repeat=n):  # True = correct
        prob = 1.0
        for correct in pattern:
            prob *= (1.0 - worker_error) if correct else worker_error
        if sum(pattern) <= extra_pairs:
            total += prob
    return total


def tree_paths(tree: DecisionTree) -> dict[str, list[tuple[str, int]]]:
    """Class -> list of (test, outcome) pairs, walked independently."""
    paths: dict[str, list[tuple[str, int]]] = {}

    def walk(node, prefix):
        if isinstance(node, Leaf):
            paths[node.label] = prefix
        else:
            walk(node.zero, prefix + [(node.test, 0)])
            walk(node.one, prefix + [(node.test, 1)])

    walk(tree.root, [])
    return paths


def random_table(
    seed: int,
    max_classes: int = 6,
    max_tests: int = 8,
    max_error: float = 0.2,
    cell_errors: bool = False,
    na_prob: float = 0.12,
) -> TestTable:
    """Seeded random valid, separable instance (greedy construction succeeds)."""
    rng = random.Random(seed)
    for _ in range(500):
        n = rng.randint(2, max_classes)
        m = rng.randint(1, max_tests)
        raw = [rng.uniform(0.05, 1.0) for _ in range(n)]
        total = sum(raw)
        priors = [v / total for v in raw]
        rows = []
        ok = True
        for _ in range(m):
            for _ in range(50):
                row = [
                    None if rng.random() < na_prob else rng.randint(0, 1)
                    for _ in range(n)
                ]
                defined = [v for v in row if v is not None]
                if 0 in defined and 1 in defined:
                    rows.append(row)
                    break
            else:
                ok = False
                break
        if not ok:
            continue
        if cell_errors:
            errors = [[rng.uniform(0.005, max_error) for _ in range(n)] for _ in range(m)]
        else:
            errors = rng.uniform(0.005, max_error)
        table = validate_table(
            [f"c{i}" for i in range(1, n + 1)],
            priors,
            [f"T{j}" for j in range(1, m + 1)],
            rows,
            errors,
        )
        try:
            build_greedy(table)
        except InseparableClasses:
            continue
        return table
    raise AssertionError(f"no separable instance found for seed {seed}")
