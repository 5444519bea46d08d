"""Deterministic execution ordering.

Nodes are grouped into waves: wave k holds every node whose predecessors
all sit in waves < k. Flattening the waves (lexicographic node_id inside
each wave) gives the canonical topological order used everywhere, so the
planner and the serial order can never disagree.
"""

from __future__ import annotations

from ..errors import CycleError
from .types import PipelineGraph


def waves(graph: PipelineGraph) -> list[list[str]]:
    """Wave decomposition; raises CycleError when the graph is cyclic."""
    preds = graph.predecessors()
    remaining = dict(preds)
    done: set[str] = set()
    out: list[list[str]] = []
    while remaining:
        ready = sorted(n for n, ps in remaining.items() if ps <= done)
        if not ready:
            stuck = ", ".join(sorted(remaining))
            raise CycleError(f"graph has a cycle among: {stuck}")
        out.append(ready)
        done.update(ready)
        for n in ready:
            del remaining[n]
    return out


def topo_order(graph: PipelineGraph) -> list[str]:
    """Edge-respecting total order: flattened waves."""
    return [n for wave in waves(graph) for n in wave]
