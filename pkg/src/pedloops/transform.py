"""Opening loops by duplicating breakers.

Each planned step replaces the breaker, in exactly one mating, by a fresh
founder copy carrying the same sex and test results. The children of that
mating are re-pointed at the copy, the loop through the original closes
nowhere, and the rest of the pedigree is untouched. Repeating this for
every step yields an equivalent loop-free family.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace
from typing import Mapping, Optional, Sequence

from .graph import build_graph, check_loops, loop_count, trim_leaves
from .model import (
    FEMALE,
    Individual,
    Pedigree,
    StructureError,
    genotype_log_weights,
)
from .selection import BreakPlan, plan_breaks

REPORT_VERSION = 1


@dataclass(frozen=True)
class CloneRecord:
    """One applied severance: clone_id replaced original_id in mating_id."""

    clone_id: int
    original_id: int
    mating_id: int
    step_index: int


def apply_break(p: Pedigree, breaker_id: int, mating_id: int, *,
                clone_id: Optional[int] = None,
                step_index: int = 0) -> tuple[Pedigree, CloneRecord]:
    """Detach breaker_id from one of its matings via a founder copy.

    The copy keeps the original's sex and test results, is never a
    proband, and records the root original (copies of copies still point
    at the first ancestor). Children of the mating get the copy as their
    mother or father according to the breaker's sex.
    """
    mating = p.mating_by_id(mating_id)
    if breaker_id not in mating.parents():
        raise StructureError(
            f"individual {breaker_id} is not a parent of mating {mating_id}")
    original = p.by_id(breaker_id)
    if clone_id is None:
        clone_id = p.max_id + 1
    if clone_id in p:
        raise StructureError(f"clone id {clone_id} is already taken")

    clone = Individual(
        id=clone_id,
        sex=original.sex,
        is_proband=False,
        test_results=dict(original.test_results),
        clone_of=original.clone_of if original.clone_of is not None else original.id,
        is_placeholder=original.is_placeholder,
    )
    side = "mother_id" if original.sex == FEMALE else "father_id"
    children = set(mating.child_ids)
    members = []
    for ind in p:
        if ind.id in children:
            assert getattr(ind, side) == breaker_id
            ind = replace(ind, **{side: clone_id})
        members.append(ind)
    members.append(clone)
    record = CloneRecord(clone_id, original.id, mating_id, step_index)
    return Pedigree(members, p.variant_names), record


def break_loops(p: Pedigree, weights: Optional[Mapping[int, float]] = None, *,
                id_start: Optional[int] = None,
                ) -> tuple[Pedigree, list[CloneRecord], dict]:
    """Plan and apply every break for one connected family.

    Returns the loop-free pedigree, the clone records, and a report dict
    describing what was done. Families already loop-free come back as-is
    with an empty record list.
    """
    started = time.perf_counter()
    if weights is None:
        weights = genotype_log_weights(p)
    initial_loops = loop_count(p)
    if not check_loops(p):
        report = {
            "report_version": REPORT_VERSION,
            "loops_initial": 0,
            "clones_created": 0,
            "steps": [],
            "method_trace": [],
            "complexity": {"total_log": 0.0, "factor": 1, "per_clone": [], "notes": []},
            "warnings": [],
            "elapsed_seconds": time.perf_counter() - started,
        }
        return p, [], report

    plan = plan_breaks(p, weights)
    warnings = _plan_warnings(p, plan)
    next_id = p.max_id + 1 if id_start is None else id_start

    current = p
    records: list[CloneRecord] = []
    remaining = initial_loops
    for index, step in enumerate(plan.steps, start=1):
        current, record = apply_break(
            current, step.breaker_id, step.mating_id,
            clone_id=next_id, step_index=index)
        next_id += 1
        records.append(record)
        now = loop_count(current)
        if now != remaining - 1:
            raise StructureError(
                f"severance {index} changed loop count {remaining} -> {now}, "
                "expected a decrease of exactly one")
        remaining = now
    if check_loops(current):
        raise StructureError("loops remain after applying the full plan")
    if len(records) != initial_loops:
        raise StructureError(
            f"{len(records)} clones for {initial_loops} loops; plan is inconsistent")

    step_rows = [
        {
            "step": r.step_index,
            "breaker": r.original_id,
            "mating": r.mating_id,
            "method": step.method,
            "log_genotypes": weights[r.original_id],
            "clone": r.clone_id,
        }
        for r, step in zip(records, plan.steps)
    ]
    report = {
        "report_version": REPORT_VERSION,
        "loops_initial": initial_loops,
        "clones_created": len(records),
        "steps": step_rows,
        "method_trace": list(plan.method_trace),
        "complexity": complexity_report(records, weights),
        "warnings": warnings,
        "elapsed_seconds": time.perf_counter() - started,
    }
    return current, records, report


def _plan_warnings(p: Pedigree, plan: BreakPlan) -> list[str]:
    """Conditions worth flagging without blocking the run."""
    warnings = []
    flagged: set[int] = set()
    for step in plan.steps:
        if step.breaker_id in flagged:
            continue
        flagged.add(step.breaker_id)
        if p.by_id(step.breaker_id).is_placeholder:
            warnings.append(
                f"breaker {step.breaker_id} is a synthesized placeholder parent; "
                "its duplication is untestable")
    trimmed = trim_leaves(build_graph(p))
    founders_in_loops = sorted(
        pid for pid in trimmed.trimmed_degree if p.by_id(pid).is_founder)
    if founders_in_loops:
        ids = ", ".join(map(str, founders_in_loops))
        warnings.append(f"founder(s) {ids} participate in loops")
    return warnings


def complexity_report(records: Sequence[CloneRecord],
                      weights: Mapping[int, float]) -> dict:
    """Cost summary of an applied plan.

    total_log sums each cloned original's log genotype count, once per
    clone; factor is the corresponding genotype-count product, reported
    as an exact integer when it is one.
    """
    per_clone = [
        {"clone": r.clone_id, "original": r.original_id,
         "log_genotypes": weights[r.original_id]}
        for r in records]
    total = math.fsum(row["log_genotypes"] for row in per_clone)
    factor = math.exp(total)
    nearest = round(factor)
    if nearest >= 1 and abs(factor - nearest) <= 1e-9 * max(nearest, 1):
        factor = nearest
    notes = []
    seen: dict[int, int] = {}
    for r in records:
        seen[r.original_id] = seen.get(r.original_id, 0) + 1
    for original, count in sorted(seen.items()):
        if count > 1:
            notes.append(f"individual {original} was duplicated {count} times")
    return {
        "total_log": total,
        "factor": factor,
        "per_clone": per_clone,
        "notes": notes,
    }
