"""Bipartite person/mating graph, loop counting and leaf trimming.

A pedigree maps to an undirected graph with one vertex per individual and
one per mating. A parent is joined to the mating by a parent link; each
child is joined by a child link. Consanguinity loops are exactly the
cycles of this graph, so the number of independent loops is its cycle
rank. Iteratively deleting degree <= 1 vertices leaves the subgraph in
which every loop lives.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Iterable, NamedTuple

from .model import Pedigree, StructureError, family_components

PERSON = "person"
MATING = "mating"

PARENT_LINK = "parent_link"
CHILD_LINK = "child_link"


class Vertex(NamedTuple):
    kind: str
    ref_id: int


def person(ref_id: int) -> Vertex:
    return Vertex(PERSON, ref_id)


def mating(ref_id: int) -> Vertex:
    return Vertex(MATING, ref_id)


def _vertex_order(v: Vertex) -> tuple[int, int]:
    # persons before matings, then by id; gives every scan a fixed order
    return (0 if v.kind == PERSON else 1, v.ref_id)


@dataclass(frozen=True)
class GraphEdge:
    """One person-mating incidence; role says which side the person is on."""

    person_id: int
    mating_id: int
    role: str

    @property
    def endpoints(self) -> tuple[Vertex, Vertex]:
        return (person(self.person_id), mating(self.mating_id))


class PedigreeGraph:
    """Immutable undirected bipartite graph with a precomputed adjacency."""

    def __init__(self, vertices: Iterable[Vertex], edges: Iterable[GraphEdge]):
        self.vertices: frozenset[Vertex] = frozenset(vertices)
        self.edges: frozenset[GraphEdge] = frozenset(edges)
        adjacency: dict[Vertex, list[tuple[Vertex, GraphEdge]]] = {v: [] for v in self.vertices}
        for edge in sorted(self.edges, key=lambda e: (e.person_id, e.mating_id, e.role)):
            pv, mv = edge.endpoints
            adjacency[pv].append((mv, edge))
            adjacency[mv].append((pv, edge))
        self._adjacency = adjacency

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def degree(self, v: Vertex) -> int:
        return len(self._adjacency[v])

    def incident(self, v: Vertex) -> list[tuple[Vertex, GraphEdge]]:
        return list(self._adjacency[v])

    def neighbors(self, v: Vertex) -> list[Vertex]:
        return [u for u, _ in self._adjacency[v]]


class TrimmedGraph(PedigreeGraph):
    """Result of leaf trimming; keeps each surviving person's degree."""

    def __init__(self, vertices, edges):
        super().__init__(vertices, edges)
        self.trimmed_degree: dict[int, int] = {
            v.ref_id: self.degree(v) for v in self.vertices if v.kind == PERSON}


def build_graph(p: Pedigree) -> PedigreeGraph:
    """Build the person/mating graph for one connected family.

    Refuses multi-family input: loop analysis is per family, and silently
    merging components would skew every count downstream.
    """
    if len(family_components(p)) > 1:
        raise StructureError(
            "build_graph needs a single connected family; partition first")
    vertices = [person(ind.id) for ind in p]
    vertices += [mating(m.mating_id) for m in p.matings]
    edges = []
    for m in p.matings:
        edges.append(GraphEdge(m.father_id, m.mating_id, PARENT_LINK))
        edges.append(GraphEdge(m.mother_id, m.mating_id, PARENT_LINK))
        for child in m.child_ids:
            edges.append(GraphEdge(child, m.mating_id, CHILD_LINK))
    g = PedigreeGraph(vertices, edges)
    # Two structural identities of the construction: every mating brings two
    # parent links, every both-parent child exactly one child link; vertex
    # count is persons plus matings.
    assert g.n_edges == 2 * p.n_matings + p.n_offspring
    assert g.n_vertices == p.n_individuals + p.n_matings
    return g


def check_loops(p: Pedigree) -> bool:
    """Loop test from counts alone: a connected graph is a tree iff it has
    one fewer edge than vertices, so matings plus both-parent children
    exceeding individuals minus one means at least one loop."""
    return p.n_matings + p.n_offspring > p.n_individuals - 1


def loop_count(p: Pedigree) -> int:
    """Number of independent loops (cycle rank) of a connected family."""
    assert len(family_components(p)) <= 1, "loop_count is per connected family"
    return max(0, p.n_matings + p.n_offspring - p.n_individuals + 1)


def has_cycle_dfs(g: PedigreeGraph) -> bool:
    """Cycle detection by traversal, independent of any counting.

    Walks every component; seeing an already visited vertex through a new
    edge is a cycle. Iterative so deep pedigrees cannot overflow the stack.
    """
    visited: set[Vertex] = set()
    for start in sorted(g.vertices, key=_vertex_order):
        if start in visited:
            continue
        visited.add(start)
        stack: list[tuple[Vertex, GraphEdge | None]] = [(start, None)]
        while stack:
            v, via = stack.pop()
            for u, edge in g.incident(v):
                if edge is via:
                    continue
                if u in visited:
                    return True
                visited.add(u)
                stack.append((u, edge))
    return False


def trim_leaves(g: PedigreeGraph) -> TrimmedGraph:
    """Repeatedly delete degree <= 1 vertices with their edges.

    What remains is the union of all cycles plus any paths connecting
    them; it is empty exactly when the graph is loop-free. The result
    does not depend on deletion order, but the worklist is a heap so the
    scan itself is reproducible.
    """
    degree = {v: g.degree(v) for v in g.vertices}
    alive_edges = set(g.edges)
    alive = set(g.vertices)
    heap = [(_vertex_order(v), v) for v in g.vertices if degree[v] <= 1]
    heapq.heapify(heap)
    incident: dict[Vertex, list[GraphEdge]] = {v: [] for v in g.vertices}
    for edge in g.edges:
        pv, mv = edge.endpoints
        incident[pv].append(edge)
        incident[mv].append(edge)

    while heap:
        _, v = heapq.heappop(heap)
        if v not in alive or degree[v] > 1:
            continue  # stale entry
        alive.discard(v)
        for edge in incident[v]:
            if edge not in alive_edges:
                continue
            alive_edges.discard(edge)
            pv, mv = edge.endpoints
            other = mv if pv == v else pv
            degree[other] -= 1
            if other in alive and degree[other] <= 1:
                heapq.heappush(heap, (_vertex_order(other), other))
        degree[v] = 0
    return TrimmedGraph(alive, alive_edges)


def graph_to_tgf(g: PedigreeGraph) -> str:
    """Trivial graph format dump for eyeballing a family in external tools."""
    lines = []
    for v in sorted(g.vertices, key=_vertex_order):
        prefix = "p" if v.kind == PERSON else "m"
        lines.append(f"{prefix}{v.ref_id} {v.kind} {v.ref_id}")
    lines.append("#")
    for edge in sorted(g.edges, key=lambda e: (e.person_id, e.mating_id, e.role)):
        lines.append(f"p{edge.person_id} m{edge.mating_id} {edge.role}")
    return "\n".join(lines) + "\n"
