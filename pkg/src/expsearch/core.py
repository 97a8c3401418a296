"""Expanding search instances, patterns and the latency objective.

A pattern is a tuple of edge indices into ``Instance.edges``.  Every prefix
must be a tree that contains the root; latency of a vertex is the total
length cleared up to and including the first edge that touches it.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Sequence, Union

Number = Union[int, float, Fraction]
Pattern = tuple  # tuple[int, ...] of edge indices


class InstanceError(ValueError):
    pass


class InvalidPattern(ValueError):
    def __init__(self, check: "PatternCheck"):
        super().__init__(check.describe())
        self.check = check


@dataclass(frozen=True)
class Instance:
    """Rooted connected graph with vertex weights and edge lengths.

    Vertex ids are opaque strings; everything else works on dense indices.
    Edges are stored with ``u < v``.
    """

    ids: tuple
    weights: tuple
    edges: tuple
    lengths: tuple
    root: int = 0

    def __post_init__(self):
        n = len(self.ids)
        if n == 0:
            raise InstanceError("instance has no vertices")
        if len(set(self.ids)) != n:
            raise InstanceError("duplicate vertex id")
        if len(self.weights) != n:
            raise InstanceError("one weight per vertex required")
        if not 0 <= self.root < n:
            raise InstanceError(f"root index {self.root} out of range")
        if len(self.lengths) != len(self.edges):
            raise InstanceError("one length per edge required")
        if any(w < 0 for w in self.weights):
            raise InstanceError("negative vertex weight")
        if any(x < 0 for x in self.lengths):
            raise InstanceError("negative edge length")
        seen = set()
        for u, v in self.edges:
            if u == v:
                raise InstanceError(f"self-loop at {self.ids[u]}")
            if not (0 <= u < v < n):
                raise InstanceError(f"edge ({u}, {v}) not normalised or out of range")
            if (u, v) in seen:
                raise InstanceError(f"parallel edge {self.ids[u]}-{self.ids[v]}")
            seen.add((u, v))
        if len(self._reachable()) != n:
            raise InstanceError("graph is not connected")

    # -- construction -------------------------------------------------------

    @classmethod
    def build(cls, weights: Mapping, edges: Iterable, root) -> "Instance":
        """Build from ``{id: weight}`` and ``[(u_id, v_id, length), ...]``."""
        ids = tuple(str(k) for k in weights)
        index = {k: i for i, k in enumerate(ids)}
        ws = tuple(weights[k] for k in weights)
        norm = []
        for u, v, length in edges:
            a, b = index[str(u)], index[str(v)]
            if a == b:
                raise InstanceError(f"self-loop at {u}")
            norm.append((min(a, b), max(a, b), length))
        norm.sort(key=lambda t: (t[0], t[1]))
        if str(root) not in index:
            raise InstanceError(f"root {root!r} is not a vertex")
        return cls(
            ids=ids,
            weights=ws,
            edges=tuple((a, b) for a, b, _ in norm),
            lengths=tuple(x for _, _, x in norm),
            root=index[str(root)],
        )

    def with_weights(self, weights: Sequence) -> "Instance":
        return Instance(self.ids, tuple(weights), self.edges, self.lengths, self.root)

    def with_root_weight_zero(self) -> "Instance":
        ws = list(self.weights)
        ws[self.root] = 0
        return self.with_weights(ws)

    def with_unit_weights(self) -> "Instance":
        return self.with_weights([1] * self.n)

    # -- derived data -------------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.ids)

    @cached_property
    def index(self) -> dict:
        return {k: i for i, k in enumerate(self.ids)}

    @cached_property
    def edge_index(self) -> dict:
        out = {}
        for e, (u, v) in enumerate(self.edges):
            out[(u, v)] = e
            out[(v, u)] = e
        return out

    @cached_property
    def adjacency(self) -> tuple:
        adj = [[] for _ in range(self.n)]
        for e, (u, v) in enumerate(self.edges):
            adj[u].append((v, e))
            adj[v].append((u, e))
        return tuple(tuple(sorted(a)) for a in adj)

    @cached_property
    def weighted_vertices(self) -> frozenset:
        return frozenset(v for v, w in enumerate(self.weights) if w > 0)

    @property
    def total_weight(self) -> int:
        return sum(self.weights)

    def edge(self, u: int, v: int) -> int:
        return self.edge_index[(u, v)]

    def length(self, e: int) -> Number:
        return self.lengths[e]

    def pattern_from_pairs(self, pairs: Iterable) -> Pattern:
        out = []
        for u, v in pairs:
            try:
                out.append(self.edge_index[(self.index[str(u)], self.index[str(v)])])
            except KeyError:
                raise InstanceError(f"no edge {u}-{v} in instance") from None
        return tuple(out)

    def pattern_pairs(self, pattern: Pattern) -> list:
        return [[self.ids[self.edges[e][0]], self.ids[self.edges[e][1]]] for e in pattern]

    def _reachable(self) -> set:
        adj = [[] for _ in range(len(self.ids))]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        seen = {self.root}
        queue = deque([self.root])
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    queue.append(v)
        return seen

    # -- serialisation ------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "root": self.ids[self.root],
            "vertices": [{"id": i, "weight": w} for i, w in zip(self.ids, self.weights)],
            "edges": [
                {"u": self.ids[u], "v": self.ids[v], "length": _json_number(x)}
                for (u, v), x in zip(self.edges, self.lengths)
            ],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "Instance":
        try:
            weights = {str(v["id"]): _parse_int(v.get("weight", 0), "weight") for v in data["vertices"]}
            edges = [(e["u"], e["v"], _parse_length(e["length"])) for e in data["edges"]]
            root = data["root"]
        except (KeyError, TypeError) as exc:
            raise InstanceError(f"malformed instance JSON: {exc}") from None
        if len(weights) != len(data["vertices"]):
            raise InstanceError("duplicate vertex id")
        for u, v, _ in edges:
            if str(u) not in weights or str(v) not in weights:
                raise InstanceError(f"edge {u}-{v} references unknown vertex")
        return cls.build(weights, edges, root)


def _parse_int(x, what):
    if isinstance(x, bool) or not isinstance(x, int):
        raise InstanceError(f"{what} must be a nonnegative integer, got {x!r}")
    return x


def _parse_length(x):
    if isinstance(x, bool):
        raise InstanceError(f"bad length {x!r}")
    if isinstance(x, (int, float)):
        return x
    if isinstance(x, str):
        return Fraction(x)
    raise InstanceError(f"bad length {x!r}")


def _json_number(x):
    if isinstance(x, Fraction):
        return x.numerator if x.denominator == 1 else str(x)
    return x


def load_instance(path) -> Instance:
    with open(path) as fh:
        return Instance.from_json(json.load(fh))


def load_pattern(inst: Instance, path) -> Pattern:
    with open(path) as fh:
        data = json.load(fh)
    if isinstance(data, dict):
        data = data["pattern"]
    return inst.pattern_from_pairs(data)


# -- validation -----------------------------------------------------------------


@dataclass(frozen=True)
class PatternCheck:
    valid: bool
    index: int | None = None  # 1-based position of the offending edge
    kind: str | None = None  # root-miss | cycle | disconnected | repeated | uncovered
    vertex: str | None = None

    def __bool__(self):
        return self.valid

    def describe(self) -> str:
        if self.valid:
            return "valid"
        if self.kind == "uncovered":
            return f"weighted vertex {self.vertex} is never explored"
        return f"invalid at index {self.index}: {self.kind}"


def validate_pattern(inst: Instance, pattern: Pattern) -> PatternCheck:
    explored = {inst.root}
    used = set()
    for i, e in enumerate(pattern, start=1):
        if not 0 <= e < len(inst.edges):
            return PatternCheck(False, i, "unknown-edge")
        u, v = inst.edges[e]
        if i == 1 and inst.root not in (u, v):
            return PatternCheck(False, 1, "root-miss")
        if e in used:
            return PatternCheck(False, i, "repeated")
        a, b = u in explored, v in explored
        if a and b:
            return PatternCheck(False, i, "cycle")
        if not (a or b):
            return PatternCheck(False, i, "disconnected")
        used.add(e)
        explored.add(v if a else u)
    missing = sorted(inst.weighted_vertices - explored)
    if missing:
        return PatternCheck(False, None, "uncovered", inst.ids[missing[0]])
    return PatternCheck(True)


def require_valid(inst: Instance, pattern: Pattern) -> None:
    check = validate_pattern(inst, pattern)
    if not check:
        raise InvalidPattern(check)


def exploration_order(inst: Instance, pattern: Pattern) -> list:
    """Vertices in the order the pattern explores them, root first."""
    explored = {inst.root}
    order = [inst.root]
    for e in pattern:
        u, v = inst.edges[e]
        new = v if u in explored else u
        explored.add(new)
        order.append(new)
    return order


# -- objective ------------------------------------------------------------------


@dataclass(frozen=True)
class LatencyReport:
    latencies: dict  # vertex index -> latency, for every explored vertex
    total: Number
    length: Number

    def of(self, v: int) -> Number:
        return self.latencies[v]


def total_latency(inst: Instance, pattern: Pattern, check: bool = True) -> LatencyReport:
    if check:
        require_valid(inst, pattern)
    lat = {inst.root: 0}
    elapsed = 0
    for e in pattern:
        u, v = inst.edges[e]
        elapsed += inst.lengths[e]
        new = v if u in lat else u
        lat[new] = elapsed
    total = sum(inst.weights[v] * lat[v] for v in inst.weighted_vertices)
    return LatencyReport(lat, total, elapsed)


def pattern_length(inst: Instance, pattern: Pattern) -> Number:
    return sum(inst.lengths[e] for e in pattern)


def concat_patterns(inst: Instance, first: Pattern, second: Pattern) -> Pattern:
    """``first + second`` with every cycle-closing edge skipped."""
    explored = {inst.root}
    out = []
    for e in tuple(first) + tuple(second):
        u, v = inst.edges[e]
        if u in explored and v in explored:
            continue
        explored.add(u)
        explored.add(v)
        out.append(e)
    return tuple(out)


def enumerate_patterns(inst: Instance) -> Iterator[Pattern]:
    """Every expanding pattern that stops as soon as all of V* is explored.

    Exhaustive DFS over edge sequences; usable only on tiny graphs.
    """
    target = inst.weighted_vertices
    adj = inst.adjacency
    explored = {inst.root}
    stack: list = []

    def rec():
        if target <= explored:
            yield tuple(stack)
            return
        for u in sorted(explored):
            for v, e in adj[u]:
                if v in explored:
                    continue
                explored.add(v)
                stack.append(e)
                yield from rec()
                stack.pop()
                explored.discard(v)

    yield from rec()


def random_pattern(inst: Instance, rng, extra: float = 0.0) -> Pattern:
    """A uniformly-stepped random valid pattern covering V*.

    With probability ``extra`` per step the walk keeps going after V* is
    covered, which produces dangling weight-0 explorations.
    """
    explored = {inst.root}
    out = []
    while True:
        if inst.weighted_vertices <= explored and (len(explored) == inst.n or rng.random() >= extra):
            return tuple(out)
        frontier = [e for u in sorted(explored) for v, e in inst.adjacency[u] if v not in explored]
        e = frontier[rng.randrange(len(frontier))]
        u, v = inst.edges[e]
        explored.add(v if u in explored else u)
        out.append(e)
