"""End to end flow: repair the table, split families, analyze, break, merge.

The single-family algorithms live in graph/selection/transform; this
module runs them across a whole input table, keeps clone ids unique
across families, and assembles the per-family reports the command line
prints.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Optional

from .graph import PERSON, build_graph, loop_count, trim_leaves
from .model import (
    Pedigree,
    fix_parents,
    genotype_log_weights,
    partition_families,
    prune_unconnected,
)
from .selection import BreakStep, plan_breaks
from .transform import CloneRecord, break_loops

WeightFn = Callable[[Pedigree], Mapping[int, float]]


@dataclass(frozen=True)
class CandidateCost:
    """One loop-region survivor with its greedy bookkeeping."""

    person_id: int
    log_genotypes: float
    trimmed_degree: int
    cost: float


@dataclass(frozen=True)
class FamilyAnalysis:
    index: int
    member_ids: tuple[int, ...]
    n_individuals: int
    n_matings: int
    n_offspring: int
    loops: int
    trim_persons: int
    trim_matings: int
    trim_edges: int
    classification: str
    candidates: tuple[CandidateCost, ...]
    planned_steps: tuple[BreakStep, ...]
    plan_total: float


@dataclass(frozen=True)
class FamilyResult:
    analysis: FamilyAnalysis
    source: Pedigree
    pedigree: Pedigree
    records: tuple[CloneRecord, ...]
    report: dict


@dataclass(frozen=True)
class PipelineResult:
    families: tuple[FamilyResult, ...]
    merged: Pedigree
    info: dict


def classification_label(trace) -> str:
    """Human name for which strategies a plan used."""
    kinds = set(trace)
    if not kinds:
        return "acyclic"
    if kinds == {"greedy"}:
        return "multiple_matings"
    if kinds == {"mst"}:
        return "no_multiple_matings"
    return "mixed"


def prepare(p: Pedigree) -> tuple[list[Pedigree], dict]:
    """Repair half-orphans, split into families, drop probandless ones."""
    fixed = fix_parents(p)
    placeholder_ids = sorted(fixed.ids - p.ids)
    families = partition_families(fixed)
    kept = prune_unconnected(families)
    kept_ids = {i for fam in kept for i in fam.ids}
    dropped_ids = sorted(fixed.ids - kept_ids)
    info = {
        "families_total": len(families),
        "families_kept": len(kept),
        "dropped_ids": dropped_ids,
        "placeholder_ids": placeholder_ids,
        "max_id": fixed.max_id,
    }
    return kept, info


def analyze_family(p: Pedigree, index: int,
                   weights: Optional[Mapping[int, float]] = None) -> FamilyAnalysis:
    """Counts, loop statistics and the candidate table for one family."""
    if weights is None:
        weights = genotype_log_weights(p)
    g = build_graph(p)
    t = trim_leaves(g)
    plan = plan_breaks(p, weights)
    candidates = tuple(
        CandidateCost(pid, weights[pid], degree, weights[pid] / degree)
        for pid, degree in sorted(t.trimmed_degree.items()))
    n_trim_matings = sum(1 for v in t.vertices if v.kind != PERSON)
    return FamilyAnalysis(
        index=index,
        member_ids=tuple(sorted(p.ids)),
        n_individuals=p.n_individuals,
        n_matings=p.n_matings,
        n_offspring=p.n_offspring,
        loops=loop_count(p),
        trim_persons=len(t.trimmed_degree),
        trim_matings=n_trim_matings,
        trim_edges=t.n_edges,
        classification=classification_label(plan.method_trace),
        candidates=candidates,
        planned_steps=plan.steps,
        plan_total=plan.total_log_complexity,
    )


def run_pipeline(p: Pedigree, weight_fn: Optional[WeightFn] = None,
                 apply_breaks: bool = True) -> PipelineResult:
    """Process a whole table.

    Every kept family is analyzed; with apply_breaks the loops are also
    opened. Clone ids continue from the largest id anywhere in the
    repaired table so they stay unique after the families are merged
    back together.
    """
    families, info = prepare(p)
    next_clone_id = info["max_id"] + 1
    results = []
    merged_members = []
    for index, family in enumerate(families, start=1):
        weights = dict(weight_fn(family)) if weight_fn else genotype_log_weights(family)
        analysis = analyze_family(family, index, weights)
        if apply_breaks:
            broken, records, report = break_loops(
                family, weights, id_start=next_clone_id)
            next_clone_id += len(records)
        else:
            broken, records, report = family, [], {}
        results.append(FamilyResult(analysis, family, broken, tuple(records), report))
        merged_members.extend(broken.members)
    merged = Pedigree(merged_members, p.variant_names)
    return PipelineResult(tuple(results), merged, info)
