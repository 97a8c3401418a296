"""Exact and heuristic tree oracles plus the exhaustive ESP solver.

The exact oracles enumerate every connected vertex set that contains the
root; the cheapest tree on a fixed vertex set is its induced MST, so the
best tree for a cardinality or weight target is a lookup in that table.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Protocol

from .core import Instance, Number, Pattern

DEFAULT_BRUTE_FORCE_LIMIT = 8
DEFAULT_SUBSET_LIMIT = 16


class InstanceTooLarge(ValueError):
    pass


class InfeasibleTarget(ValueError):
    pass


@dataclass(frozen=True)
class TreeSolution:
    edges: tuple  # sorted edge indices
    vertices: frozenset
    length: Number
    weight: int

    @classmethod
    def from_edges(cls, inst: Instance, edges) -> "TreeSolution":
        edges = tuple(sorted(edges))
        verts = {inst.root}
        for e in edges:
            verts.update(inst.edges[e])
        return cls(
            edges=edges,
            vertices=frozenset(verts),
            length=sum(inst.lengths[e] for e in edges),
            weight=sum(inst.weights[v] for v in verts),
        )

    @classmethod
    def root_only(cls, inst: Instance) -> "TreeSolution":
        return cls((), frozenset({inst.root}), 0, inst.weights[inst.root])

    @property
    def size(self) -> int:
        return len(self.vertices)

    def is_tree(self, inst: Instance) -> bool:
        if inst.root not in self.vertices or len(self.edges) != len(self.vertices) - 1:
            return False
        parent = {v: v for v in self.vertices}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for e in self.edges:
            u, v = inst.edges[e]
            if u not in parent or v not in parent:
                return False
            ru, rv = find(u), find(v)
            if ru == rv:
                return False
            parent[ru] = rv
        return True

    def to_json(self, inst: Instance) -> dict:
        return {
            "edges": inst.pattern_pairs(self.edges),
            "vertices": sorted(inst.ids[v] for v in self.vertices),
            "length": self.length if not isinstance(self.length, Fraction) else str(self.length),
            "weight": self.weight,
        }


class TreeOracle(Protocol):
    name: str
    factor: Fraction | None  # advertised approximation factor, None if unknown

    def kmst(self, inst: Instance, k: int) -> TreeSolution: ...

    def quota(self, inst: Instance, q) -> TreeSolution: ...


# -- exhaustive subtree table ---------------------------------------------------


@lru_cache(maxsize=128)
def _subtree_table(inst: Instance, limit: int) -> tuple:
    """All (length, edges, size, weight) of induced MSTs on connected root sets,
    sorted by (length, edges)."""
    n = inst.n
    if n > limit:
        raise InstanceTooLarge(f"subset enumeration limited to n <= {limit}, got {n}")
    order = sorted(range(len(inst.edges)), key=lambda e: (inst.lengths[e], e))
    others = [v for v in range(n) if v != inst.root]
    table = []
    for mask in range(1 << len(others)):
        members = {inst.root}
        for i, v in enumerate(others):
            if mask >> i & 1:
                members.add(v)
        parent = {v: v for v in members}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        chosen = []
        for e in order:
            u, v = inst.edges[e]
            if u in members and v in members:
                ru, rv = find(u), find(v)
                if ru != rv:
                    parent[ru] = rv
                    chosen.append(e)
        if len(chosen) != len(members) - 1:
            continue
        edges = tuple(sorted(chosen))
        length = sum(inst.lengths[e] for e in edges)
        weight = sum(inst.weights[v] for v in members)
        table.append((length, edges, len(members), weight))
    table.sort(key=lambda t: (t[0], t[1]))
    return tuple(table)


def exact_kmst(inst: Instance, k: int, limit: int = DEFAULT_SUBSET_LIMIT) -> TreeSolution:
    """Minimum-length tree on exactly ``k`` vertices containing the root."""
    if not 1 <= k <= inst.n:
        raise InfeasibleTarget(f"k={k} outside 1..{inst.n}")
    if k == 1:
        return TreeSolution.root_only(inst)
    for length, edges, size, _ in _subtree_table(inst, limit):
        if size == k:
            return TreeSolution.from_edges(inst, edges)
    raise AssertionError("connected graph always has a k-vertex subtree")


def exact_quota_tree(inst: Instance, q, limit: int = DEFAULT_SUBSET_LIMIT) -> TreeSolution:
    """Minimum-length rooted tree whose vertex weight reaches ``q``."""
    if q < 0 or q > inst.total_weight:
        raise InfeasibleTarget(f"quota {q} outside [0, {inst.total_weight}]")
    if q <= inst.weights[inst.root]:
        return TreeSolution.root_only(inst)
    for length, edges, size, weight in _subtree_table(inst, limit):
        if weight >= q:
            return TreeSolution.from_edges(inst, edges)
    raise AssertionError("the spanning tree reaches every quota <= W")


class ExactOracle:
    name = "exact"
    factor = Fraction(1)

    def __init__(self, limit: int = DEFAULT_SUBSET_LIMIT):
        self.limit = limit

    def kmst(self, inst, k):
        return exact_kmst(inst, k, self.limit)

    def quota(self, inst, q):
        return exact_quota_tree(inst, q, self.limit)


class AdversarialOracle:
    """An oracle that honours a factor-``factor`` guarantee and nothing more.

    Among all feasible trees whose length stays within ``factor`` times the
    optimum it returns the longest one, so it exercises the worst case an
    approximate subroutine with that guarantee may produce.
    """

    def __init__(self, factor, limit: int = DEFAULT_SUBSET_LIMIT):
        self.factor = Fraction(factor)
        self.name = f"adversarial-{self.factor}"
        self.limit = limit

    def _pick(self, inst, feasible, best):
        cap = self.factor * best
        pick = None
        for length, edges, size, weight in _subtree_table(inst, self.limit):
            if length <= cap and feasible(size, weight):
                if pick is None or length > pick[0]:
                    pick = (length, edges)
        return TreeSolution.from_edges(inst, pick[1])

    def kmst(self, inst, k):
        best = exact_kmst(inst, k, self.limit).length
        return self._pick(inst, lambda size, weight: size >= k, best)

    def quota(self, inst, q):
        best = exact_quota_tree(inst, q, self.limit).length
        return self._pick(inst, lambda size, weight: weight >= q, best)


class HeuristicOracle:
    """Greedy growth from the root; no approximation guarantee."""

    name = "heuristic"
    factor = None

    def kmst(self, inst, k):
        if not 1 <= k <= inst.n:
            raise InfeasibleTarget(f"k={k} outside 1..{inst.n}")
        tree = {inst.root}
        chosen = []
        heap = [(inst.lengths[e], v, e) for v, e in inst.adjacency[inst.root]]
        heapq.heapify(heap)
        while len(tree) < k:
            _, v, e = heapq.heappop(heap)
            if v in tree:
                continue
            tree.add(v)
            chosen.append(e)
            for x, f in inst.adjacency[v]:
                if x not in tree:
                    heapq.heappush(heap, (inst.lengths[f], x, f))
        return TreeSolution.from_edges(inst, chosen)

    def quota(self, inst, q):
        if q < 0 or q > inst.total_weight:
            raise InfeasibleTarget(f"quota {q} outside [0, {inst.total_weight}]")
        tree = {inst.root}
        chosen = []
        weight = inst.weights[inst.root]
        while weight < q:
            dist, via = _multi_source_dijkstra(inst, tree)
            best = None
            for v in sorted(inst.weighted_vertices - tree):
                key = (Fraction(dist[v]) / inst.weights[v], dist[v], v)
                if best is None or key < best:
                    best = key
            v = best[2]
            while v not in tree:
                e = via[v]
                chosen.append(e)
                tree.add(v)
                weight += inst.weights[v]
                a, b = inst.edges[e]
                v = a if b == v else b
        return TreeSolution.from_edges(inst, chosen)


def _multi_source_dijkstra(inst: Instance, sources) -> tuple:
    dist = {v: 0 for v in sources}
    via = {}
    heap = [(0, v) for v in sorted(sources)]
    done = set()
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        for v, e in inst.adjacency[u]:
            nd = d + inst.lengths[e]
            if v not in dist or nd < dist[v]:
                dist[v] = nd
                via[v] = e
                heapq.heappush(heap, (nd, v))
    return dist, via


ORACLES = {"exact": ExactOracle, "heuristic": HeuristicOracle}


def make_oracle(name: str):
    if name.startswith("adversarial-"):
        return AdversarialOracle(Fraction(name.split("-", 1)[1]))
    try:
        return ORACLES[name]()
    except KeyError:
        raise ValueError(f"unknown oracle {name!r}") from None


# -- quota -> k-MST reduction ----------------------------------------------------


def split_vertices_for_quota(inst: Instance, max_vertices: int = 10_000) -> Instance:
    """Unit-weight instance where k-MST with ``k = 2nq`` answers quota ``q``.

    Every vertex ``v`` gets ``2 n w_v`` pendant copies on zero-length edges.
    """
    n = inst.n
    extra = sum(2 * n * w for w in inst.weights)
    if n + extra > max_vertices:
        raise InstanceTooLarge(f"split instance would have {n + extra} vertices")
    weights = {i: 1 for i in inst.ids}
    edges = [(inst.ids[u], inst.ids[v], x) for (u, v), x in zip(inst.edges, inst.lengths)]
    for v, w in enumerate(inst.weights):
        for j in range(2 * n * w):
            pid = f"{inst.ids[v]}#{j}"
            weights[pid] = 1
            edges.append((inst.ids[v], pid, 0))
    return Instance.build(weights, edges, inst.ids[inst.root])


def quota_to_k(inst: Instance, q) -> int:
    """Cardinality target on the split instance for original quota ``q``."""
    return 2 * inst.n * math.ceil(q)


# -- exhaustive ESP ---------------------------------------------------------------


def brute_force_esp(inst: Instance, max_vertices: int = DEFAULT_BRUTE_FORCE_LIMIT) -> tuple:
    """Optimal pattern and its total latency by DP over explored vertex sets.

    Clearing edge ``e`` delays every still-unexplored weighted vertex by
    ``l_e``, so the cost-to-go depends only on the explored set.
    """
    n = inst.n
    if n > max_vertices:
        raise InstanceTooLarge(f"exhaustive search limited to n <= {max_vertices}, got {n}")
    target = 0
    for v in inst.weighted_vertices:
        target |= 1 << v
    total = inst.total_weight
    adj = inst.adjacency
    memo: dict = {}

    def remaining(mask):
        return total - sum(inst.weights[v] for v in range(n) if mask >> v & 1)

    def best(mask):
        if mask & target == target:
            return 0, None
        if mask in memo:
            return memo[mask]
        waiting = remaining(mask)
        result = None
        for u in range(n):
            if not mask >> u & 1:
                continue
            for v, e in adj[u]:
                if mask >> v & 1:
                    continue
                cost = inst.lengths[e] * waiting + best(mask | 1 << v)[0]
                if result is None or cost < result[0] or (cost == result[0] and e < result[1][0]):
                    result = (cost, (e, v))
        memo[mask] = result
        return result

    start = 1 << inst.root
    cost, _ = best(start)
    pattern = []
    mask = start
    while mask & target != target:
        e, v = best(mask)[1]
        pattern.append(e)
        mask |= 1 << v
    return tuple(pattern), cost
