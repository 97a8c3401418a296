"""Unit-weight expanding search by concatenating k-MSTs.

Solve k-MST for every k, pick the phase sequence as a shortest path in the
delay DAG, then explore the chosen trees one after another.
"""

from __future__ import annotations

from dataclasses import dataclass

from .concat import AuxPathGraph, PhasePlan, phase_edges, shortest_path_dag
from .core import Instance, LatencyReport, Pattern, exploration_order, total_latency
from .oracles import TreeSolution


@dataclass(frozen=True)
class UnweightedRun:
    instance: Instance  # unit-weight view of the input
    trees: tuple  # T_1..T_n
    aux: AuxPathGraph
    plan: PhasePlan
    phases: tuple  # edges added per phase
    pattern: Pattern
    report: LatencyReport

    def vertex_bounds(self) -> list:
        """``(vertex, latency, pi)`` for the i-th explored vertex."""
        order = exploration_order(self.instance, self.pattern)
        path = self.plan.path
        out = []
        for i, v in enumerate(order, start=1):
            if i == 1:
                out.append((v, self.report.of(v), 0))
                continue
            j = next(j for j in range(1, len(path)) if path[j] >= i)
            out.append((v, self.report.of(v), self.plan.prefix[j]))
        return out


def build_tree_family(inst: Instance, oracle) -> list:
    """``[T_1, ..., T_n]``; ``T_1`` is the root alone."""
    trees = [TreeSolution.root_only(inst)]
    for k in range(2, inst.n + 1):
        tree = oracle.kmst(inst, k)
        if tree.size < k or inst.root not in tree.vertices:
            raise ValueError(f"oracle {oracle.name} returned an infeasible tree for k={k}")
        trees.append(tree)
    return trees


def build_aux_unweighted(trees, n: int) -> AuxPathGraph:
    by_label = {k: trees[k - 1] for k in range(1, n + 1)}
    return AuxPathGraph.complete(
        range(1, n + 1), by_label, lambda i, j: (n - i) * by_label[j].length
    )


def plan_unweighted(inst: Instance, oracle) -> UnweightedRun:
    unit = inst.with_unit_weights()
    n = unit.n
    trees = build_tree_family(unit, oracle)
    if n == 1:
        plan = PhasePlan((1,), 0, (trees[0],))
        aux = AuxPathGraph((1,), {1: trees[0]}, {})
    else:
        aux = build_aux_unweighted(trees, n)
        plan = shortest_path_dag(aux, 1, n)
    phases = tuple(phase_edges(unit, plan))
    pattern = tuple(e for p in phases for e in p)
    report = total_latency(unit, pattern)
    return UnweightedRun(unit, tuple(trees), aux, plan, phases, pattern, report)


def solve_unweighted(inst: Instance, oracle) -> Pattern:
    return plan_unweighted(inst, oracle).pattern
