"""Delay-bounded and segmented objectives, 0/1 weights, and their reductions.

In the delay-bounded objective every vertex pays ``L + C_v``.  In the
segmented objective a vertex pays the first breakpoint at or after its
search time; breakpoints start at ``t^(0) = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from ..core import Instance, Pattern, concat_patterns, enumerate_patterns, total_latency
from .geometry import EuclideanInstance

DEFAULT_HORIZON = 8
INF = math.inf


def delayed_cost(inst: Instance, pattern: Pattern, delay) -> float:
    """``sum_v w_v (L + C_v)`` over weighted vertices."""
    rep = total_latency(inst, pattern)
    return sum(inst.weights[v] * (delay + rep.of(v)) for v in inst.weighted_vertices)


# -- segmented objective -----------------------------------------------------------


@dataclass(frozen=True)
class SegmentedSolution:
    pattern: Pattern
    breakpoints: tuple  # t^(0) = 0 <= t^(1) <= ... <= t^(kappa)
    rounded: dict  # weighted vertex -> rounded search time
    objective: float

    @property
    def kappa(self) -> int:
        return len(self.breakpoints) - 1


def round_up(latency, breakpoints):
    """Smallest breakpoint at or above ``latency``; ``inf`` if none."""
    for t in breakpoints:
        if latency <= t:
            return t
    return INF


def segmented_objective(inst: Instance, pattern: Pattern, breakpoints) -> SegmentedSolution:
    rep = total_latency(inst, pattern)
    rounded = {v: round_up(rep.of(v), breakpoints) for v in inst.weighted_vertices}
    obj = sum(inst.weights[v] * t for v, t in rounded.items())
    return SegmentedSolution(tuple(pattern), tuple(breakpoints), rounded, obj)


def best_breakpoints(latencies, weights, kappa: int) -> tuple:
    """Optimal ``kappa`` breakpoints for fixed search times: ``(cost, breakpoints)``.

    Some optimal choice uses only observed latencies and always the largest
    one, so this is a partition of the sorted positive latencies into at most
    ``kappa`` contiguous groups, each paying its maximum.
    """
    pos = sorted({c for c, w in zip(latencies, weights) if w > 0 and c > 0})
    if not pos:
        return 0, (0,) + (0,) * kappa
    if kappa == 0:
        return INF, (0,)
    mass = [sum(w for c, w in zip(latencies, weights) if c == x) for x in pos]
    m = len(pos)
    # f[j][k]: cheapest cover of the first j values by k groups
    f = [[INF] * (kappa + 1) for _ in range(m + 1)]
    arg = [[None] * (kappa + 1) for _ in range(m + 1)]
    f[0][0] = 0
    for j in range(1, m + 1):
        for k in range(1, kappa + 1):
            acc = 0
            for i in range(j, 0, -1):
                acc += mass[i - 1]
                c = f[i - 1][k - 1] + acc * pos[j - 1]
                if c < f[j][k]:
                    f[j][k], arg[j][k] = c, i - 1
    k = min(range(1, kappa + 1), key=lambda k: (f[m][k], k))
    cost = f[m][k]
    chosen = []
    j = m
    while j > 0:
        chosen.append(pos[j - 1])
        j, k = arg[j][k], k - 1
    chosen.reverse()
    bps = [0] + chosen
    bps += [bps[-1]] * (kappa + 1 - len(bps))
    return cost, tuple(bps)


def brute_force_segmented(inst: Instance, kappa: int | None = None, breakpoints=None) -> SegmentedSolution:
    """Segmented optimum over every pattern that stops once V* is covered.

    With ``breakpoints`` fixed the objective is evaluated directly; otherwise
    the best ``kappa`` breakpoints are chosen per pattern.
    """
    if (kappa is None) == (breakpoints is None):
        raise ValueError("give exactly one of kappa and breakpoints")
    best = None
    weighted = sorted(inst.weighted_vertices)
    for pat in enumerate_patterns(inst):
        if breakpoints is not None:
            sol = segmented_objective(inst, pat, breakpoints)
        else:
            lat = total_latency(inst, pat, check=False).latencies
            _, bps = best_breakpoints([lat[v] for v in weighted], [inst.weights[v] for v in weighted], kappa)
            sol = segmented_objective(inst, pat, bps)
        if best is None or sol.objective < best.objective:
            best = sol
    return best


# -- bounded -> segmented ----------------------------------------------------------


@dataclass(frozen=True)
class SegmentSchedule:
    delay: float  # L
    delta: float
    epsilon: float
    horizon: float
    delayed: tuple  # L (1+eps)^i, the rounding grid for L + C_v
    breakpoints: tuple  # delayed - L, so t^(0) = 0


def segment_schedule(delay, delta, epsilon, horizon_const: float = DEFAULT_HORIZON) -> SegmentSchedule:
    """Geometric grid from ``L`` up to ``horizon_const (1 + delta) L``.

    A vertex paying ``L + C_v`` is charged the next grid value, at most a
    ``1 + eps`` factor more; in raw search time the breakpoints are the grid
    shifted down by ``L``.
    """
    delay, delta, epsilon = float(delay), float(delta), float(epsilon)
    if delay <= 0 or epsilon <= 0:
        raise ValueError("need L > 0 and eps > 0")
    horizon = horizon_const * (1 + delta) * delay
    grid = [delay]
    while grid[-1] < horizon * (1 - 1e-12):
        grid.append(grid[-1] * (1 + epsilon))
    return SegmentSchedule(delay, delta, epsilon, horizon, tuple(grid), tuple(g - delay for g in grid))


def bounded_to_segmented(
    inst: Instance,
    delay,
    delta,
    epsilon,
    segmented_solver: Callable | None = None,
    horizon_const: float = DEFAULT_HORIZON,
) -> tuple:
    """Solve delay-bounded ESP through the segmented solver.

    Returns ``(solution, schedule)``.
    """
    schedule = segment_schedule(delay, delta, epsilon, horizon_const)
    solver = segmented_solver or (lambda i, bps: brute_force_segmented(i, breakpoints=bps))
    sol = solver(inst, schedule.breakpoints)
    if sol is None or math.isinf(sol.objective):
        raise RuntimeError("segmented solver found no pattern within the horizon")
    return sol, schedule


# -- 0/1 weights -------------------------------------------------------------------


@dataclass(frozen=True)
class WeightReduction:
    original: EuclideanInstance
    instance: EuclideanInstance  # every weight in {0, 1}
    scale: Fraction  # M
    rounded: tuple  # floor(w / M) per original point
    origin: tuple  # reduced point -> original point

    def lift(self, reduced: Instance, original: Instance, pattern: Pattern) -> Pattern:
        """Map a pattern on the split instance back to the original points."""
        pairs = []
        for e in pattern:
            u, v = reduced.edges[e]
            a, b = self.origin[u], self.origin[v]
            if a != b:
                pairs.append((a, b))
        mapped = tuple(original.edge(a, b) for a, b in pairs)
        return concat_patterns(original, (), mapped)


def reduce_weights_01(inst: EuclideanInstance, delay, delta, epsilon) -> WeightReduction:
    """Round weights to multiples of ``M = eps / (n + n^2 delta) * max w`` and split.

    ``n`` counts the non-root points.  Instances already in {0, 1} are
    returned as they are.
    """
    eps = Fraction(repr(epsilon)) if isinstance(epsilon, float) else Fraction(epsilon)
    delta = Fraction(repr(delta)) if isinstance(delta, float) else Fraction(delta)
    n = inst.n - 1
    top = max(inst.weights)
    if top <= 1 or n == 0:
        return WeightReduction(inst, inst, Fraction(1), tuple(inst.weights), tuple(range(inst.n)))
    M = eps / (n + n * n * delta) * top
    rounded = tuple(math.floor(w / M) for w in inst.weights)
    points, weights, origin = [], [], []
    for v, (p, w) in enumerate(zip(inst.points, rounded)):
        copies = max(w, 1)
        for c in range(copies):
            points.append(p)
            weights.append(1 if w > 0 and v != inst.root else 0)
            origin.append(v)
    root = origin.index(inst.root)
    return WeightReduction(inst, EuclideanInstance(tuple(points), tuple(weights), root), M, rounded, tuple(origin))


def unsplit_rounded(red: WeightReduction) -> EuclideanInstance:
    """The rounded instance before splitting, for computing its optimum directly."""
    ws = list(red.rounded)
    ws[red.original.root] = 0
    return red.original.with_weights(ws)
