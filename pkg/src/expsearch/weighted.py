"""Weighted expanding search by concatenating quota trees.

Quotas approach ``W`` geometrically; the phase sequence is again a shortest
path in a delay DAG, now with arc costs ``W (1+eps)^-i * l(T_j)``.  All quota
and cost arithmetic is exact (``Fraction``) whenever the lengths are.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .concat import AuxPathGraph, PhasePlan, phase_edges, shortest_path_dag
from .core import Instance, LatencyReport, Pattern, total_latency
from .oracles import TreeSolution

DEFAULT_EPSILON = Fraction(1, 4)


def parse_epsilon(eps) -> Fraction:
    if isinstance(eps, float):
        eps = repr(eps)
    value = Fraction(eps.strip()) if isinstance(eps, str) else Fraction(eps)
    if value <= 0:
        raise ValueError(f"epsilon must be positive, got {eps}")
    return value


@dataclass(frozen=True)
class QuotaSchedule:
    epsilon: Fraction
    total: int  # W
    omega: int
    omega_formula: int  # ceil(log W / log(1+eps)) before the boundary fix
    quotas: tuple  # q_0 .. q_omega

    def delay_weight(self, i: int) -> Fraction:
        """``W (1+eps)^-i``: weight still outstanding after quota ``i``."""
        return self.total / (1 + self.epsilon) ** i


def build_quota_schedule(W: int, eps) -> QuotaSchedule:
    eps = parse_epsilon(eps)
    if W < 1:
        raise ValueError("total weight must be at least 1")
    base = 1 + eps
    formula = 0
    while base**formula < W:  # smallest omega with (1+eps)^omega >= W
        formula += 1
    omega = formula
    # when (1+eps)^omega == W the last quota is exactly W-1 and may miss weight
    while Fraction(W) / base**omega >= 1:
        omega += 1
    quotas = tuple(W - Fraction(W) / base**i for i in range(omega + 1))
    return QuotaSchedule(eps, W, omega, formula, quotas)


def build_quota_trees(inst: Instance, schedule: QuotaSchedule, oracle) -> list:
    inst = inst.with_root_weight_zero()
    trees = [TreeSolution.root_only(inst)]
    for q in schedule.quotas[1:]:
        tree = oracle.quota(inst, q)
        if tree.weight < q or inst.root not in tree.vertices:
            raise ValueError(f"oracle {oracle.name} returned an infeasible tree for quota {q}")
        trees.append(tree)
    if not inst.weighted_vertices <= trees[-1].vertices:
        raise AssertionError("final quota tree must collect every weighted vertex")
    return trees


def kept_indices(trees) -> list:
    """Node 0 plus the last index of every run of identical trees."""
    last = len(trees) - 1
    return [0] + [i for i in range(1, last + 1) if i == last or trees[i].edges != trees[i + 1].edges]


def build_aux_weighted(trees, schedule: QuotaSchedule, dedup: bool = True) -> AuxPathGraph:
    labels = kept_indices(trees) if dedup else list(range(len(trees)))
    by_label = {i: trees[i] for i in labels}
    return AuxPathGraph.complete(
        labels, by_label, lambda i, j: schedule.delay_weight(i) * by_label[j].length
    )


@dataclass(frozen=True)
class WeightedRun:
    instance: Instance  # root weight zeroed
    schedule: QuotaSchedule
    trees: tuple
    aux: AuxPathGraph
    plan: PhasePlan
    phases: tuple
    pattern: Pattern
    report: LatencyReport

    def quota_bounds(self) -> list:
        """``(quota, time first reached, pi)`` for every scheduled quota."""
        inst = self.instance
        reached = [(0, 0)]  # (weight, time) after each edge
        weight, elapsed, explored = 0, 0, {inst.root}
        for e in self.pattern:
            u, v = inst.edges[e]
            new = v if u in explored else u
            explored.add(new)
            elapsed += inst.lengths[e]
            weight += inst.weights[new]
            reached.append((weight, elapsed))
        quotas = self.schedule.quotas
        out = []
        for q in quotas:
            time = next(t for w, t in reached if w >= q)
            j = next(j for j, node in enumerate(self.plan.path) if quotas[node] >= q)
            out.append((q, time, self.plan.prefix[j]))
        return out


def plan_weighted(inst: Instance, eps, oracle, dedup: bool = True) -> WeightedRun:
    zeroed = inst.with_root_weight_zero()
    W = zeroed.total_weight
    if W == 0:
        schedule = QuotaSchedule(parse_epsilon(eps), 0, 0, 0, (Fraction(0),))
        root = TreeSolution.root_only(zeroed)
        plan = PhasePlan((0,), 0, (root,))
        aux = AuxPathGraph((0,), {0: root}, {})
        return WeightedRun(zeroed, schedule, (root,), aux, plan, (), (), total_latency(zeroed, ()))
    schedule = build_quota_schedule(W, eps)
    trees = build_quota_trees(zeroed, schedule, oracle)
    aux = build_aux_weighted(trees, schedule, dedup=dedup)
    plan = shortest_path_dag(aux, 0, schedule.omega)
    phases = tuple(phase_edges(zeroed, plan))
    pattern = tuple(e for p in phases for e in p)
    report = total_latency(zeroed, pattern)
    return WeightedRun(zeroed, schedule, tuple(trees), aux, plan, phases, pattern, report)


def solve_weighted(inst: Instance, eps, oracle) -> Pattern:
    return plan_weighted(inst, eps, oracle).pattern
