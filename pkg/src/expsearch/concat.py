"""Auxiliary phase DAG, its shortest path, and phase-by-phase exploration.

Shared by the unit-weight and weighted concatenation algorithms: node ``j``
stands for exploring tree ``T_j``; an arc ``(i, j)`` costs the delay that
exploring ``T_j`` imposes on whatever ``T_i`` left unexplored.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .core import Instance, Number, Pattern
from .oracles import TreeSolution


@dataclass(frozen=True)
class AuxPathGraph:
    nodes: tuple  # increasing labels
    trees: dict  # label -> TreeSolution
    costs: dict  # (i, j) -> cost, for i < j

    @classmethod
    def complete(cls, nodes: Sequence, trees: dict, cost: Callable) -> "AuxPathGraph":
        nodes = tuple(nodes)
        costs = {}
        for a, i in enumerate(nodes):
            for j in nodes[a + 1 :]:
                costs[(i, j)] = cost(i, j)
        return cls(nodes, dict(trees), costs)

    def cost(self, i, j) -> Number:
        return self.costs[(i, j)]


@dataclass(frozen=True)
class PhasePlan:
    path: tuple  # node labels n_0 < n_1 < ... < n_l
    cost: Number
    trees: tuple  # tree of every node on the path, n_0 included
    prefix: tuple = field(init=False)  # prefix[j] = sum_{k<=j} l(T_{n_k})

    def __post_init__(self):
        acc = 0
        out = []
        for t in self.trees:
            acc += t.length
            out.append(acc)
        object.__setattr__(self, "prefix", tuple(out))

    @property
    def phases(self) -> int:
        return len(self.path) - 1


def shortest_path_dag(H: AuxPathGraph, s, t) -> PhasePlan:
    """Cheapest ``s -> t`` path; ties prefer fewer arcs, then the
    lexicographically smallest node sequence."""
    if s not in H.nodes or t not in H.nodes or not s < t:
        raise ValueError(f"need nodes s < t of H, got {s}, {t}")
    nodes = [v for v in H.nodes if s <= v <= t]
    best = {s: (0, 0, (s,))}
    for j in nodes[1:]:
        cand = None
        for i in nodes:
            if i >= j:
                break
            c, hops, path = best[i]
            key = (c + H.cost(i, j), hops + 1, path + (j,))
            if cand is None or key < cand:
                cand = key
        best[j] = cand
    cost, _, path = best[t]
    return PhasePlan(path, cost, tuple(H.trees[v] for v in path))


def phase_edges(inst: Instance, plan: PhasePlan) -> list:
    """Edges added in each phase, BFS order from the root inside each tree.

    An edge of the phase tree is taken only if it reaches a vertex not yet
    explored, so the explored set stays connected and each phase costs at
    most the length of its tree.
    """
    explored = {inst.root}
    phases = []
    for tree in plan.trees[1:]:
        adj: dict = {}
        for e in tree.edges:
            u, v = inst.edges[e]
            adj.setdefault(u, []).append((v, e))
            adj.setdefault(v, []).append((u, e))
        added = []
        seen = {inst.root}
        queue = deque([inst.root])
        while queue:
            u = queue.popleft()
            for v, e in sorted(adj.get(u, ())):
                if v in seen:
                    continue
                seen.add(v)
                queue.append(v)
                if v not in explored:
                    explored.add(v)
                    added.append(e)
        if not tree.vertices <= explored:
            raise AssertionError("phase tree is not a rooted connected tree")
        phases.append(tuple(added))
    return phases


def phases_to_pattern(inst: Instance, plan: PhasePlan) -> Pattern:
    return tuple(e for phase in phase_edges(inst, plan) for e in phase)
