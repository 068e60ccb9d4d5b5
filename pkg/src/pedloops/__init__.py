"""Detect and break consanguinity loops in family pedigrees.

Pipeline in one breath: parse a delimited table, repair half-orphans,
split into connected families, map each family to a person/mating graph,
count its loops, pick the cheapest individuals to duplicate, and emit an
equivalent loop-free table plus a report of what was done.
"""

from .graph import (
    PedigreeGraph,
    TrimmedGraph,
    build_graph,
    check_loops,
    graph_to_tgf,
    has_cycle_dfs,
    loop_count,
    trim_leaves,
)
from .model import (
    Individual,
    Mating,
    NoProbandError,
    Pedigree,
    PedigreeFormatError,
    StructureError,
    fix_parents,
    genotype_count,
    genotype_counts,
    genotype_log_weights,
    load_pedigree,
    parse_pedigree,
    partition_families,
    prune_unconnected,
    save_pedigree,
    serialize_pedigree,
)
from .oracle import GeneratorParams, OracleSizeError, brute_force_min_plan, random_pedigree
from .pipeline import run_pipeline
from .selection import (
    BreakPlan,
    BreakStep,
    MatingSubgraph,
    build_subgraph,
    classify_case,
    greedy_cost,
    plan_breaks,
    select_breaker_greedy,
    select_breakers_mst,
)
from .transform import CloneRecord, apply_break, break_loops, complexity_report

__version__ = "0.1.0"

__all__ = [
    "BreakPlan",
    "BreakStep",
    "CloneRecord",
    "GeneratorParams",
    "Individual",
    "Mating",
    "MatingSubgraph",
    "NoProbandError",
    "OracleSizeError",
    "Pedigree",
    "PedigreeFormatError",
    "PedigreeGraph",
    "StructureError",
    "TrimmedGraph",
    "apply_break",
    "break_loops",
    "brute_force_min_plan",
    "build_graph",
    "build_subgraph",
    "check_loops",
    "classify_case",
    "complexity_report",
    "fix_parents",
    "genotype_count",
    "genotype_counts",
    "genotype_log_weights",
    "graph_to_tgf",
    "greedy_cost",
    "has_cycle_dfs",
    "load_pedigree",
    "loop_count",
    "parse_pedigree",
    "partition_families",
    "plan_breaks",
    "prune_unconnected",
    "random_pedigree",
    "run_pipeline",
    "save_pedigree",
    "select_breaker_greedy",
    "select_breakers_mst",
    "serialize_pedigree",
    "trim_leaves",
    "__version__",
]
