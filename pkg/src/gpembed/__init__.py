"""Multi-objective GP that evolves explainable low-dimensional embeddings."""

from .complexity import (
    CostClass,
    CostModel,
    DEFAULT_COST_MODEL,
    asymmetry_penalty,
    baseline_complexity,
    individual_complexity,
    scaling_term,
    tree_complexity,
)
from .dataset import Dataset, DatasetError, from_arrays, load_csv, neighbour_order, normalize
from .evolution import Archive, EvolutionConfig, FrontEntry, RunResult, initialise, run, vary
from .expr import (
    Individual,
    Node,
    TreeParseError,
    eval_individual,
    eval_tree,
    parse,
    random_tree,
    serialize,
    to_dot,
)
from .harness import SummaryStats, knn_cv_accuracy, report, summary_stats
from .manifold_cost import cost, embedding_cost, spearman

__version__ = "0.1.0"

__all__ = [
    "Archive",
    "CostClass",
    "CostModel",
    "DEFAULT_COST_MODEL",
    "Dataset",
    "DatasetError",
    "EvolutionConfig",
    "FrontEntry",
    "Individual",
    "Node",
    "RunResult",
    "SummaryStats",
    "TreeParseError",
    "asymmetry_penalty",
    "baseline_complexity",
    "cost",
    "embedding_cost",
    "eval_individual",
    "eval_tree",
    "from_arrays",
    "individual_complexity",
    "initialise",
    "knn_cv_accuracy",
    "load_csv",
    "neighbour_order",
    "normalize",
    "parse",
    "random_tree",
    "report",
    "run",
    "scaling_term",
    "serialize",
    "summary_stats",
    "to_dot",
    "tree_complexity",
    "vary",
]
