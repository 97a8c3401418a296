"""Euclidean expanding search: decomposition, segmentation and portal DP."""

from __future__ import annotations

from ..core import Instance, Pattern
from ..oracles import InstanceTooLarge
from .decompose import (
    DecomposeParams,
    DecomposeRun,
    decompose_solve,
    derandomize_shift,
    exact_bounded_solver,
    weighted_base,
)
from .geometry import EuclideanInstance, is_euclidean_json, load_euclidean, random_euclidean
from .portal_dp import DpEntryKey, DpResult, segmented_portal_dp, shift_grid, solve_over_shifts
from .quadtree import RouteGraph, ShiftedQuadtree, build_quadtree, grid_round
from .segmented import (
    SegmentedSolution,
    bounded_to_segmented,
    brute_force_segmented,
    reduce_weights_01,
    segment_schedule,
    segmented_objective,
)

MAX_PIPELINE_POINTS = 6


def portal_bounded_solver(points: EuclideanInstance, epsilon, kappa: int = 2, sweep=9, seed: int = 0, trace=None):
    """Delay-bounded solver backed by the portal DP with ``kappa`` free breakpoints.

    The DP runs on grid-rounded copies of the points and its pattern is read
    back on the original points, which share vertex indices.
    """

    memo: dict = {}

    def solve(sub: Instance, delay) -> Pattern:
        # the delay does not change the optimum, so classes repeat across shifts
        if sub.weights in memo:
            return memo[sub.weights]
        weighted = points.with_weights(sub.weights)
        rounded = grid_round(weighted, epsilon)
        best, _ = solve_over_shifts(rounded, kappa=kappa, sweep=sweep, seed=seed, trace=trace)
        if best.solution is None:
            raise RuntimeError("portal DP found no feasible pattern")
        r_inst = best.instance
        pairs = [(rounded.origin[u], rounded.origin[v]) for u, v in (r_inst.edges[e] for e in best.solution.pattern)]
        memo[sub.weights] = tuple(sub.edge(u, v) for u, v in pairs)
        return memo[sub.weights]

    return solve


def solve_euclidean(points: EuclideanInstance, epsilon, kappa: int = 2, sweep=9, seed: int = 0, trace=None):
    """Decomposition with derandomized shift over portal-DP subproblem solves.

    Returns ``(instance, best run)``; the pattern indexes ``instance.edges``.
    """
    if points.n > MAX_PIPELINE_POINTS:
        raise InstanceTooLarge(f"Euclidean pipeline limited to {MAX_PIPELINE_POINTS} points, got {points.n}")
    inst = points.to_instance()
    solver = portal_bounded_solver(points, epsilon, kappa, sweep, seed, trace)
    best, _ = derandomize_shift(inst, epsilon, bounded_solver=solver)
    return inst.with_root_weight_zero(), best


__all__ = [
    "DecomposeParams",
    "DecomposeRun",
    "DpEntryKey",
    "DpResult",
    "EuclideanInstance",
    "RouteGraph",
    "SegmentedSolution",
    "ShiftedQuadtree",
    "bounded_to_segmented",
    "brute_force_segmented",
    "build_quadtree",
    "decompose_solve",
    "derandomize_shift",
    "exact_bounded_solver",
    "grid_round",
    "is_euclidean_json",
    "load_euclidean",
    "portal_bounded_solver",
    "random_euclidean",
    "reduce_weights_01",
    "segment_schedule",
    "segmented_objective",
    "segmented_portal_dp",
    "shift_grid",
    "solve_euclidean",
    "solve_over_shifts",
    "weighted_base",
]
