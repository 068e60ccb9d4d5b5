"""Render a family's person/mating graph to image files.

These are diagrams of the derived graph (the thing loop detection
actually works on), drawn by generation: founders on top, each child one
layer below its deepest parent, matings between the layers. One figure
shows the full graph, a second shows what survives leaf trimming.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .graph import CHILD_LINK, PERSON, PedigreeGraph, Vertex
from .model import Pedigree

_PERSON_COLOR = "#4878b0"
_MATING_COLOR = "#b04848"
_FADED = "#c8c8c8"


def _person_depths(p: Pedigree) -> dict[int, int]:
    """Generation index per person: founders 0, child one past its deepest
    parent. Bounded sweeps so a corrupt ancestry cycle cannot hang us."""
    depth = {ind.id: 0 for ind in p}
    for _ in range(max(len(p), 1)):
        changed = False
        for ind in p:
            parents = [q for q in (ind.mother_id, ind.father_id) if q is not None]
            if not parents:
                continue
            want = max(depth[q] for q in parents) + 1
            if want > depth[ind.id]:
                depth[ind.id] = want
                changed = True
        if not changed:
            break
    return depth


def _layout(p: Pedigree, g: PedigreeGraph) -> dict[Vertex, tuple[float, float]]:
    person_depth = _person_depths(p)
    depths: dict[Vertex, float] = {}
    for v in g.vertices:
        if v.kind == PERSON:
            depths[v] = float(person_depth[v.ref_id])
        else:
            m = p.mating_by_id(v.ref_id)
            depths[v] = max(person_depth[m.father_id], person_depth[m.mother_id]) + 0.5
    layers: dict[float, list[Vertex]] = {}
    for v, d in depths.items():
        layers.setdefault(d, []).append(v)
    coords = {}
    for d, group in layers.items():
        group.sort(key=lambda v: (0 if v.kind == PERSON else 1, v.ref_id))
        for i, v in enumerate(group):
            coords[v] = (i - (len(group) - 1) / 2.0, -d)
    return coords


def _draw(ax, g: PedigreeGraph, coords, keep_vertices, keep_edges) -> None:
    for edge in sorted(g.edges, key=lambda e: (e.person_id, e.mating_id)):
        (x1, y1), (x2, y2) = (coords[v] for v in edge.endpoints)
        alive = edge in keep_edges
        ax.plot([x1, x2], [y1, y2],
                linestyle="--" if edge.role == CHILD_LINK else "-",
                color="black" if alive else _FADED,
                linewidth=1.4 if alive else 0.8, zorder=1)
    for v in sorted(g.vertices):
        x, y = coords[v]
        alive = v in keep_vertices
        if v.kind == PERSON:
            color = _PERSON_COLOR if alive else _FADED
            ax.scatter([x], [y], s=360, marker="o", color=color, zorder=2)
        else:
            color = _MATING_COLOR if alive else _FADED
            ax.scatter([x], [y], s=240, marker="s", color=color, zorder=2)
        label = str(v.ref_id) if v.kind == PERSON else f"m{v.ref_id}"
        ax.annotate(label, (x, y), ha="center", va="center",
                    fontsize=8, color="white", zorder=3)
    ax.set_axis_off()


def render_family_figures(p: Pedigree, g: PedigreeGraph, trimmed: PedigreeGraph,
                          prefix) -> list[Path]:
    """Write <prefix>_graph.png and <prefix>_trimmed.png; returns the paths.

    The second figure fades everything trimming removed, so surviving
    loop structure stands out in place.
    """
    prefix = Path(prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    coords = _layout(p, g)
    width = max(4.0, 1.1 * (1 + max(x for x, _ in coords.values())
                            - min(x for x, _ in coords.values())))
    height = max(3.0, 1.0 * (1 + max(y for _, y in coords.values())
                             - min(y for _, y in coords.values())))
    outputs = []
    jobs = [
        (prefix.parent / f"{prefix.name}_graph.png", g.vertices, g.edges),
        (prefix.parent / f"{prefix.name}_trimmed.png", trimmed.vertices, trimmed.edges),
    ]
    for path, keep_v, keep_e in jobs:
        fig, ax = plt.subplots(figsize=(width, height))
        _draw(ax, g, coords, keep_v, keep_e)
        fig.tight_layout()
        fig.savefig(path, dpi=130)
        plt.close(fig)
        outputs.append(path)
    return outputs
