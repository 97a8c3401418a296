"""Segmented ESP over portal-respecting solutions, tabulated per quadtree cell.

Every candidate pattern on the rounded points has each edge routed along its
shortest portal-respecting route.  A pattern and breakpoint choice yields,
for every cell, a key: per segment the in-cell length and the ordered list
of boundary crossings.  Patterns breaking the crossing cap in any cell are
infeasible.  ``DP[cell][key]`` keeps the cheapest in-cell cost with a
back-pointer; children combine into parents by adding lengths and costs,
and the root entry gives the optimum.  Lengths are integers in units of
``grid / resolution``.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field

from ..core import Instance, Pattern, enumerate_patterns
from .quadtree import RouteGraph, ShiftedQuadtree, build_quadtree, crossing_cap
from .segmented import INF, SegmentedSolution

IN, OUT = "in", "out"


@dataclass(frozen=True)
class DpEntryKey:
    cell: int
    segments: tuple  # per segment: (length, ((portal, "in"|"out"), ...))

    def lengths(self) -> tuple:
        return tuple(s[0] for s in self.segments)

    def crossings(self, i: int) -> int:
        return len(self.segments[i][1])


@dataclass
class DpTable:
    tree: ShiftedQuadtree
    cap: int
    entries: dict = field(default_factory=dict)  # cell -> {key: (cost, candidate index)}
    candidates: list = field(default_factory=list)  # (pattern, breakpoints in units)
    rejected: int = 0

    def size(self) -> int:
        return sum(len(v) for v in self.entries.values())


@dataclass(frozen=True)
class DpResult:
    solution: SegmentedSolution | None  # breakpoints and objective in input length units
    cost_units: float  # objective in lattice units, ``inf`` when nothing fits
    shift: tuple
    keys: dict  # cell -> DpEntryKey of the recovered solution
    table: DpTable
    instance: Instance

    @property
    def cost(self) -> float:
        return self.solution.objective if self.solution else INF


def _edge_routes(graph: RouteGraph, inst: Instance, pattern: Pattern) -> list:
    explored = {inst.root}
    out = []
    for e in pattern:
        u, v = inst.edges[e]
        if v in explored:
            u, v = v, u
        explored.add(v)
        out.append(graph.route(u, v))
    return out


def _completion(routes) -> list:
    t, out = 0, []
    for r in routes:
        t += r.length
        out.append(t)
    return out


def _segment_of(t, breakpoints) -> int | None:
    for i, b in enumerate(breakpoints):
        if t <= b:
            return i
    return None


def cell_keys(tree: ShiftedQuadtree, graph: RouteGraph, routes, segs, kappa: int) -> dict:
    """Per-cell per-segment in-cell lengths and ordered crossings."""
    anc = {}

    def ancestors(leaf):
        if leaf not in anc:
            anc[leaf] = tree.ancestors(leaf)
        return anc[leaf]

    lengths: dict = {}
    crossings: dict = {}
    for route, i in zip(routes, segs):
        for k, (leaf, ln) in enumerate(zip(route.leaves, route.lengths)):
            for c in ancestors(leaf):
                lengths.setdefault(c, [0] * (kappa + 1))[i] += ln
            if k == 0:
                continue
            prev = route.leaves[k - 1]
            if prev == leaf:
                continue
            q = graph.lattice_of[route.nodes[k]]
            a, b = set(ancestors(prev)), set(ancestors(leaf))
            for c in ancestors(prev):
                if c not in b:
                    crossings.setdefault(c, [[] for _ in range(kappa + 1)])[i].append((q, OUT))
            for c in ancestors(leaf):
                if c not in a:
                    crossings.setdefault(c, [[] for _ in range(kappa + 1)])[i].append((q, IN))
    keys = {}
    for c in range(len(tree.cells)):
        ls = lengths.get(c, [0] * (kappa + 1))
        cs = crossings.get(c, [[] for _ in range(kappa + 1)])
        # segment 0 ends at time 0 and never holds any length
        keys[c] = DpEntryKey(c, tuple((ls[i], tuple(cs[i])) for i in range(1, kappa + 1)))
    return keys


def _cell_costs(tree, inst, lat_seg, bps) -> dict:
    cost = {c: 0 for c in range(len(tree.cells))}
    for v, i in lat_seg.items():
        w = inst.weights[v]
        if w:
            for c in tree.ancestors(tree.leaf_of_point[v]):
                cost[c] += w * bps[i]
    return cost


def _breakpoint_options(times: list, kappa: int, fixed) -> list:
    if fixed is not None:
        return [tuple(fixed)]
    distinct = sorted({t for t in times if t > 0})
    if not distinct:
        return [(0,) * (kappa + 1)]
    top = distinct[-1]
    out = []
    for r in range(0, min(kappa - 1, len(distinct) - 1) + 1):
        for inner in itertools.combinations(distinct[:-1], r):
            bps = (0,) + inner + (top,)
            out.append(bps + (top,) * (kappa + 1 - len(bps)))
    return out


def segmented_portal_dp(
    tree: ShiftedQuadtree,
    kappa: int | None = None,
    breakpoints=None,
    cap: int | None = None,
    trace=None,
) -> DpResult:
    """Cheapest portal-respecting segmented solution on one shifted quadtree.

    Either ``kappa`` (breakpoints chosen optimally) or fixed ``breakpoints``
    in input length units (``t^(0) = 0`` first) must be given.  ``trace``,
    if set, is called with one line per table event.
    """
    if (kappa is None) == (breakpoints is None):
        raise ValueError("give exactly one of kappa and breakpoints")
    rounded = tree.rounded
    inst = rounded.instance.to_instance().with_root_weight_zero()
    unit = float(tree.unit)
    if breakpoints is not None:
        if breakpoints[0] != 0:
            raise ValueError("first breakpoint must be 0")
        kappa = len(breakpoints) - 1
        fixed = tuple(math.floor(b / unit + 1e-9) for b in breakpoints)
    else:
        fixed = None
    if kappa < 1 and inst.weighted_vertices:
        raise ValueError("need at least one segment")
    if cap is None:
        cap = crossing_cap(rounded.n, rounded.epsilon)
    graph = RouteGraph(tree)
    table = DpTable(tree, cap)
    weighted = sorted(inst.weighted_vertices)

    for pattern in enumerate_patterns(inst):
        routes = _edge_routes(graph, inst, pattern)
        done = _completion(routes)
        lat = {inst.root: 0}
        for r, t in zip(routes, done):
            lat[r.nodes[-1]] = t
        for bps in _breakpoint_options([lat[v] for v in weighted], kappa, fixed):
            segs = [_segment_of(t, bps) for t in done]
            if any(s is None for s in segs):
                table.rejected += 1
                continue
            keys = cell_keys(tree, graph, routes, segs, kappa)
            if any(k.crossings(i) > cap for k in keys.values() for i in range(kappa)):
                table.rejected += 1
                if trace:
                    trace(f"reject cap pattern={pattern} breakpoints={bps}")
                continue
            lat_seg = {v: _segment_of(lat[v], bps) for v in weighted}
            costs = _cell_costs(tree, inst, lat_seg, bps)
            idx = len(table.candidates)
            table.candidates.append((pattern, bps))
            for c, key in keys.items():
                slot = table.entries.setdefault(c, {})
                old = slot.get(key)
                if old is None or costs[c] < old[0]:
                    slot[key] = (costs[c], idx)

    _check_combine(tree, table)
    best = None
    for key, (cost, idx) in table.entries.get(0, {}).items():
        if any(cs for _, cs in key.segments):
            continue  # nothing crosses the boundary of S'
        bps = table.candidates[idx][1]
        cumulative = list(itertools.accumulate(key.lengths()))
        if any(c > b for c, b in zip(cumulative, bps[1:])):
            continue
        if best is None or (cost, idx) < best[:2]:
            best = (cost, idx, key)
    if trace:
        for c in sorted(table.entries):
            trace(f"cell {c} entries={len(table.entries[c])}")
    if best is None:
        return DpResult(None, INF, tree.shift, {}, table, inst)

    cost, idx, _ = best
    pattern, bps = table.candidates[idx]
    routes = _edge_routes(graph, inst, pattern)
    segs = [_segment_of(t, bps) for t in _completion(routes)]
    keys = cell_keys(tree, graph, routes, segs, kappa)
    real_bps = tuple(breakpoints) if breakpoints is not None else tuple(b * unit for b in bps)
    done = _completion(routes)
    rounded_times = {}
    for r, t in zip(routes, done):
        v = r.nodes[-1]
        if v in inst.weighted_vertices:
            rounded_times[v] = real_bps[_segment_of(t, bps)]
    objective = sum(inst.weights[v] * t for v, t in rounded_times.items())
    sol = SegmentedSolution(pattern, real_bps, rounded_times, objective)
    if trace:
        trace(f"root cost={cost} units pattern={pattern} breakpoints={bps}")
    return DpResult(sol, cost, tree.shift, keys, table, inst)


def _check_combine(tree: ShiftedQuadtree, table: DpTable) -> None:
    """Parent entries must equal the sum of their children's, per candidate."""
    by_idx: dict = {}
    for c, slot in table.entries.items():
        for key, (cost, idx) in slot.items():
            by_idx.setdefault(idx, {})[c] = (key, cost)
    for idx, cells in by_idx.items():
        for c, (key, cost) in cells.items():
            kids = tree.cells[c].children
            if not kids or not all(k in cells for k in kids):
                continue
            for i in range(len(key.segments)):
                if key.segments[i][0] != sum(cells[k][0].segments[i][0] for k in kids):
                    raise AssertionError(f"length split mismatch in cell {c}")
            if cost != sum(cells[k][1] for k in kids):
                raise AssertionError(f"cost split mismatch in cell {c}")


def shift_grid(max_shift: int, sweep, seed: int = 0) -> list:
    """Shifts to try: ``"all"`` for every shift in ``[-m, m]^2``, or an int
    ``N`` for ``(0, 0)`` plus ``N - 1`` seeded uniform draws."""
    if sweep == "all":
        r = range(-max_shift, max_shift + 1)
        return [(a, b) for a in r for b in r]
    count = int(sweep)
    if count < 1:
        raise ValueError("shift sweep must be positive")
    rng = random.Random(seed)
    out = [(0, 0)]
    total = (2 * max_shift + 1) ** 2
    while len(out) < min(count, total):
        s = (rng.randint(-max_shift, max_shift), rng.randint(-max_shift, max_shift))
        if s not in out:
            out.append(s)
    return out


def solve_over_shifts(
    rounded,
    kappa: int | None = None,
    breakpoints=None,
    sweep=9,
    seed: int = 0,
    portals_per_side: int | None = None,
    cap: int | None = None,
    resolution: int | None = None,
    trace=None,
) -> tuple:
    """Minimum over shifts; returns ``(best, results)``."""
    results = []
    extra = {} if resolution is None else {"resolution": resolution}
    for shift in shift_grid(rounded.max_shift, sweep, seed):
        tree = build_quadtree(rounded, shift, portals_per_side=portals_per_side, **extra)
        results.append(segmented_portal_dp(tree, kappa=kappa, breakpoints=breakpoints, cap=cap, trace=trace))
    best = min(results, key=lambda r: r.cost)
    return best, results
