"""Decision trees over noisy binary tests with crowd-worker fusion."""

from .builder import (
    BuilderConfig,
    GreedyResult,
    Objective,
    best_tree_exhaustive,
    build_greedy,
    build_random,
    enumerate_trees,
)
from .errors import CrowdTreeError
from .fusion import group_error, majority_decide, prop1_check, reg_incomplete_beta
from .metrics import (
    LevelQuantities,
    Metric,
    MetricConfig,
    additive_approx,
    bounds_additive,
    bounds_multiplicative,
    exact_correct,
    exact_misclassification,
    level_correct_mass,
    level_entropy,
    level_error_mass,
    level_quantities,
    metric_additive,
    metric_multiplicative,
    multiplicative_approx,
)
from .model import (
    Block,
    DecisionTree,
    Internal,
    Leaf,
    Partition,
    TestTable,
    applicable_tests,
    class_path,
    level_trace,
    refine_partition,
    split_block,
    validate_table,
    validate_tree,
)
from .simulate import SimulationReport, simulate, sweep_error, sweep_workers
from .workers import (
    AssignmentStrategy,
    WorkerAllocation,
    allocation_cost,
    assign_baseline,
    assign_proposed,
    effective_error,
    effective_table,
)

__version__ = "0.1.0"

__all__ = [
    "AssignmentStrategy",
    "Block",
    "BuilderConfig",
    "CrowdTreeError",
    "DecisionTree",
    "GreedyResult",
    "Internal",
    "Leaf",
    "LevelQuantities",
    "Metric",
    "MetricConfig",
    "Objective",
    "Partition",
    "SimulationReport",
    "TestTable",
    "WorkerAllocation",
    "additive_approx",
    "allocation_cost",
    "applicable_tests",
    "assign_baseline",
    "assign_proposed",
    "best_tree_exhaustive",
    "bounds_additive",
    "bounds_multiplicative",
    "build_greedy",
    "build_random",
    "class_path",
    "effective_error",
    "effective_table",
    "enumerate_trees",
    "exact_correct",
    "exact_misclassification",
    "group_error",
    "level_correct_mass",
    "level_entropy",
    "level_error_mass",
    "level_quantities",
    "level_trace",
    "majority_decide",
    "metric_additive",
    "metric_multiplicative",
    "multiplicative_approx",
    "prop1_check",
    "refine_partition",
    "reg_incomplete_beta",
    "simulate",
    "split_block",
    "sweep_error",
    "sweep_workers",
    "validate_table",
    "validate_tree",
]
