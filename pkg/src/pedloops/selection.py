"""Choosing loop breakers.

A loop breaker is an individual that will be duplicated so that one of its
matings can be detached, opening a loop. Selection works entirely on the
trimmed graph and on per-person log genotype weights; which strategy runs
depends on whether any surviving person still sits in several matings.

Persons with a single mating each contract to an edge between their child-
side and parent-side matings, and a maximum-weight spanning tree of that
contracted graph leaves exactly the cheapest set of breakers as non-tree
edges. When some person has several matings that contraction is not
available, so a greedy rule picks the person with the lowest weight per
trimmed degree and detaches its in-loop parental matings one at a time.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Mapping, Optional

from .graph import (
    CHILD_LINK,
    PARENT_LINK,
    PERSON,
    GraphEdge,
    PedigreeGraph,
    TrimmedGraph,
    person,
    trim_leaves,
)
from .model import Pedigree, StructureError, genotype_log_weights

CASE_EMPTY = "empty"
CASE_NO_MULTIPLE_MATINGS = "no_multiple_matings"
CASE_MULTIPLE_MATINGS = "multiple_matings"

METHOD_GREEDY = "greedy"
METHOD_MST = "mst"


@dataclass(frozen=True)
class SubgraphEdge:
    """A single-mating person, contracted to an edge between two matings."""

    person_id: int
    child_side: int
    parent_side: int
    weight: float


@dataclass(frozen=True)
class MatingSubgraph:
    """Contracted graph: vertices are mating ids, edges are persons."""

    vertices: frozenset[int]
    edges: tuple[SubgraphEdge, ...]


@dataclass(frozen=True)
class BreakStep:
    """Detach breaker_id from mating mating_id (one loop opened)."""

    breaker_id: int
    mating_id: int
    method: str


@dataclass(frozen=True)
class BreakPlan:
    steps: tuple[BreakStep, ...]
    total_log_complexity: float
    method_trace: tuple[str, ...]


def _parent_links(t: PedigreeGraph, person_id: int) -> list[GraphEdge]:
    return sorted(
        (e for _, e in t.incident(person(person_id)) if e.role == PARENT_LINK),
        key=lambda e: e.mating_id)


def classify_case(t: TrimmedGraph) -> str:
    """Which selection strategy applies to this trimmed graph."""
    if t.n_vertices == 0:
        return CASE_EMPTY
    for v in t.vertices:
        if v.kind != PERSON:
            continue
        links = _parent_links(t, v.ref_id)
        if len(links) >= 2:
            return CASE_MULTIPLE_MATINGS
        if not links:
            # a trimmed person has degree >= 2 with at most one child link,
            # so a parent link must exist; anything else is corrupt state
            raise StructureError(f"trimmed person {v.ref_id} has no parent link")
    return CASE_NO_MULTIPLE_MATINGS


def build_subgraph(t: TrimmedGraph, weights: Mapping[int, float]) -> MatingSubgraph:
    """Contract every surviving person into a mating-to-mating edge.

    Only valid when no person has several matings: each person then has
    exactly one child link and one parent link, which name the two mating
    endpoints. The person's weight travels with the edge.
    """
    vertices = frozenset(v.ref_id for v in t.vertices if v.kind != PERSON)
    edges = []
    for v in sorted(t.vertices):
        if v.kind != PERSON:
            continue
        child_side = [e for _, e in t.incident(v) if e.role == CHILD_LINK]
        parent_side = [e for _, e in t.incident(v) if e.role == PARENT_LINK]
        if len(child_side) != 1 or len(parent_side) != 1:
            raise StructureError(
                f"person {v.ref_id} does not contract to a single edge; "
                "this trimmed graph still has multiple-mating persons")
        if v.ref_id not in weights:
            raise StructureError(f"no weight for person {v.ref_id}")
        edges.append(SubgraphEdge(
            person_id=v.ref_id,
            child_side=child_side[0].mating_id,
            parent_side=parent_side[0].mating_id,
            weight=weights[v.ref_id],
        ))
    edges.sort(key=lambda e: e.person_id)
    return MatingSubgraph(vertices, tuple(edges))


def select_breakers_mst(sg: MatingSubgraph) -> BreakPlan:
    """Breakers = persons left out of a maximum-weight spanning tree.

    Keeping the heaviest persons in the tree minimizes the total weight of
    the excluded ones, and every non-tree edge closes exactly one loop, so
    the exclusion set is an optimal plan for this case. Ties prefer to keep
    the smaller person id in the tree, making the larger id the breaker.
    """
    if not sg.vertices:
        return BreakPlan((), 0.0, ())
    in_tree = {min(sg.vertices)}
    tree_edges: set[SubgraphEdge] = set()
    while len(in_tree) < len(sg.vertices):
        frontier = [
            e for e in sg.edges
            if (e.child_side in in_tree) != (e.parent_side in in_tree)]
        if not frontier:
            raise StructureError("mating subgraph is disconnected")
        best = max(frontier, key=lambda e: (e.weight, -e.person_id))
        tree_edges.add(best)
        in_tree.add(best.child_side)
        in_tree.add(best.parent_side)
    excluded = sorted(
        (e for e in sg.edges if e not in tree_edges),
        key=lambda e: (e.person_id, e.parent_side))
    steps = tuple(
        BreakStep(e.person_id, e.parent_side, METHOD_MST) for e in excluded)
    total = math.fsum(e.weight for e in excluded)
    return BreakPlan(steps, total, (METHOD_MST,) if steps else ())


def greedy_cost(person_id: int, t: TrimmedGraph, weights: Mapping[int, float]) -> float:
    """Weight per unit of trimmed degree; low cost means a cheap, well
    connected candidate."""
    degree = t.trimmed_degree.get(person_id)
    if not degree:
        raise StructureError(f"person {person_id} is not in the trimmed graph")
    if person_id not in weights:
        raise StructureError(f"no weight for person {person_id}")
    return weights[person_id] / degree


def _connected_without(t: PedigreeGraph, edge: GraphEdge) -> bool:
    """True when edge's endpoints stay connected after its removal."""
    start, goal = edge.endpoints
    seen = {start}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for u, e in t.incident(v):
            if e == edge or u in seen:
                continue
            if u == goal:
                return True
            seen.add(u)
            queue.append(u)
    return False


def _on_cycle_parent_links(t: TrimmedGraph, person_id: int) -> list[GraphEdge]:
    """Parent links of the person that sit on some loop.

    The trimmed graph can contain bridge paths joining separate loops;
    detaching a bridge would split the family without opening anything,
    so those links are never severed.
    """
    return [e for e in _parent_links(t, person_id) if _connected_without(t, e)]


def _sever_and_trim(t: TrimmedGraph, edge: GraphEdge) -> TrimmedGraph:
    return trim_leaves(PedigreeGraph(t.vertices, t.edges - {edge}))


def select_breaker_greedy(
        t: TrimmedGraph, weights: Mapping[int, float]) -> tuple[int, list[int]]:
    """Pick one breaker and the matings to detach it from.

    Candidates are surviving persons with at least one in-loop parent
    link; the winner has the lowest greedy cost (ties to the smallest
    id). Its in-loop parental matings are then detached in ascending
    mating id, re-trimming after each, until the breaker drops out of
    the surviving graph or nothing in-loop is left to detach.
    """
    candidates = [
        v.ref_id for v in t.vertices
        if v.kind == PERSON and _on_cycle_parent_links(t, v.ref_id)]
    if not candidates:
        raise StructureError("no severable parent link in the trimmed graph")
    breaker = min(candidates, key=lambda pid: (greedy_cost(pid, t, weights), pid))

    severed: list[int] = []
    current = t
    while current.n_vertices and breaker in current.trimmed_degree:
        links = _on_cycle_parent_links(current, breaker)
        if not links:
            break
        edge = links[0]
        severed.append(edge.mating_id)
        current = _sever_and_trim(current, edge)
    return breaker, severed


def plan_breaks(p: Pedigree, weights: Optional[Mapping[int, float]] = None) -> BreakPlan:
    """Full loop breaking plan for one connected family.

    Runs the greedy rule while multiple-mating persons survive trimming,
    then clears whatever remains with the spanning tree in one pass. The
    plan's total is the summed log weight over all steps; a breaker
    detached twice is charged twice.
    """
    from .graph import build_graph  # local import keeps module load cheap

    if weights is None:
        weights = genotype_log_weights(p)
    t = trim_leaves(build_graph(p))
    steps: list[BreakStep] = []
    trace: list[str] = []
    while t.n_vertices:
        if classify_case(t) == CASE_MULTIPLE_MATINGS:
            trace.append(METHOD_GREEDY)
            breaker, matings = select_breaker_greedy(t, weights)
            if not matings:
                raise StructureError("greedy selection produced no severance")
            for mating_id in matings:
                steps.append(BreakStep(breaker, mating_id, METHOD_GREEDY))
                t = _sever_and_trim(t, GraphEdge(breaker, mating_id, PARENT_LINK))
        else:
            plan = select_breakers_mst(build_subgraph(t, weights))
            steps.extend(plan.steps)
            trace.extend(plan.method_trace)
            break
    total = math.fsum(weights[s.breaker_id] for s in steps)
    return BreakPlan(tuple(steps), total, tuple(trace))
