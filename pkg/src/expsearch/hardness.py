"""ST(1,2) gadget: k root-attached copies of a Steiner instance.

``structure_pattern`` rewrites any search pattern on a gadget into one that
handles the copies one at a time, never increasing total latency; the best
per-copy Steiner tree can then be read off.  Terminal weights ``1/|T|`` are
scaled by ``|T|`` to integers, so latencies here are ``|T|`` times the
fractional-weight ones.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from fractions import Fraction

from .core import Instance, Pattern, require_valid, total_latency

ROOT_ID = "r"


@dataclass(frozen=True)
class ST12Instance:
    vertices: tuple
    terminals: frozenset
    costs: dict  # frozenset({u, v}) -> 1 | 2

    def __post_init__(self):
        if len(set(self.vertices)) != len(self.vertices):
            raise ValueError("duplicate ST(1,2) vertex")
        if len(self.terminals) < 2 or not self.terminals <= set(self.vertices):
            raise ValueError("need at least two terminals, all of them vertices")
        for u, v in itertools.combinations(self.vertices, 2):
            c = self.costs.get(frozenset((u, v)))
            if c not in (1, 2):
                raise ValueError(f"edge {u}-{v} must cost 1 or 2, got {c!r}")

    def cost(self, u, v) -> int:
        return self.costs[frozenset((u, v))]

    @classmethod
    def from_json(cls, data) -> "ST12Instance":
        vertices = tuple(str(v) for v in data["vertices"])
        default = data.get("default_cost")
        costs = {}
        if default is not None:
            costs = {frozenset(p): default for p in itertools.combinations(vertices, 2)}
        for e in data.get("costs", ()):
            costs[frozenset((str(e["u"]), str(e["v"])))] = e["cost"]
        return cls(vertices, frozenset(str(t) for t in data["terminals"]), costs)

    def to_json(self) -> dict:
        return {
            "vertices": list(self.vertices),
            "terminals": sorted(self.terminals),
            "costs": [
                {"u": u, "v": v, "cost": self.cost(u, v)}
                for u, v in itertools.combinations(self.vertices, 2)
            ],
        }


def load_st12(path) -> ST12Instance:
    with open(path) as fh:
        return ST12Instance.from_json(json.load(fh))


def random_st12(rng, size: int, terminals: int, p_one: float = 0.5) -> ST12Instance:
    vertices = tuple(f"s{i}" for i in range(size))
    costs = {frozenset(p): 1 if rng.random() < p_one else 2 for p in itertools.combinations(vertices, 2)}
    return ST12Instance(vertices, frozenset(rng.sample(vertices, terminals)), costs)


def optimal_steiner(st: ST12Instance) -> tuple:
    """Cheapest Steiner tree by trying every vertex superset of the terminals."""
    steiner = [v for v in st.vertices if v not in st.terminals]
    best = None
    for r in range(len(steiner) + 1):
        for extra in itertools.combinations(steiner, r):
            members = sorted(st.terminals) + list(extra)
            cost, edges = _mst(st, members)
            if best is None or cost < best[0]:
                best = (cost, edges)
    return best


def _mst(st, members) -> tuple:
    parent = {v: v for v in members}

    def find(x):
        while parent[x] != x:
            x = parent[x]
        return x

    total, edges = 0, []
    for u, v in sorted(itertools.combinations(members, 2), key=lambda p: st.cost(*p)):
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
            total += st.cost(u, v)
            edges.append((u, v))
    return total, edges


# -- gadget -----------------------------------------------------------------------


@dataclass(frozen=True)
class GadgetInstance:
    instance: Instance
    st: ST12Instance
    copies: int  # k
    root_cost: int  # a = 2(|T| - 1)
    member: dict  # vertex index -> (copy, original vertex), root excluded

    def copy_of_edge(self, e: int) -> int:
        u, v = self.instance.edges[e]
        return self.member[v if u == self.instance.root else u][0]

    def is_root_edge(self, e: int) -> bool:
        return self.instance.root in self.instance.edges[e]

    def is_terminal(self, v: int) -> bool:
        return v != self.instance.root and self.member[v][1] in self.st.terminals

    def original_latency(self, pattern: Pattern) -> Fraction:
        """Total latency with the unscaled terminal weights ``1/|T|``."""
        return Fraction(total_latency(self.instance, pattern).total, len(self.st.terminals))


def copy_vertex_id(i: int, v: str) -> str:
    return f"{i}.{v}"


def build_gadget(st: ST12Instance, k: int) -> GadgetInstance:
    if k < 2:
        raise ValueError("the gadget needs at least two copies")
    a = 2 * (len(st.terminals) - 1)
    weights = {ROOT_ID: 0}
    edges = []
    for i in range(1, k + 1):
        for v in st.vertices:
            vid = copy_vertex_id(i, v)
            weights[vid] = 1 if v in st.terminals else 0
            edges.append((ROOT_ID, vid, a))
        for u, v in itertools.combinations(st.vertices, 2):
            edges.append((copy_vertex_id(i, u), copy_vertex_id(i, v), st.cost(u, v)))
    inst = Instance.build(weights, edges, ROOT_ID)
    member = {}
    for i in range(1, k + 1):
        for v in st.vertices:
            member[inst.index[copy_vertex_id(i, v)]] = (i, v)
    return GadgetInstance(inst, st, k, a, member)


# -- structuring ------------------------------------------------------------------


def copy_runs(gadget: GadgetInstance, pattern: Pattern) -> list:
    """Maximal runs of consecutive edges belonging to one copy: ``[(copy, edges)]``."""
    runs = []
    for e in pattern:
        c = gadget.copy_of_edge(e)
        if runs and runs[-1][0] == c:
            runs[-1][1].append(e)
        else:
            runs.append((c, [e]))
    return [(c, tuple(es)) for c, es in runs]


def is_structured(gadget: GadgetInstance, pattern: Pattern) -> bool:
    runs = copy_runs(gadget, pattern)
    if len({c for c, _ in runs}) != len(runs):
        return False
    return all(sum(gadget.is_root_edge(e) for e in es) == 1 for _, es in runs)


def _new_vertices(inst: Instance, pattern) -> list:
    explored = {inst.root}
    out = []
    for e in pattern:
        u, v = inst.edges[e]
        new = v if u in explored else u
        explored.add(new)
        out.append(new)
    return out


def _single_root_edge(gadget: GadgetInstance, pattern) -> list:
    inst = gadget.instance
    entry = {}
    out = []
    for e, new in zip(pattern, _new_vertices(inst, pattern)):
        if gadget.is_root_edge(e):
            c = gadget.member[new][0]
            if c in entry:
                e = inst.edge(entry[c], new)
            else:
                entry[c] = new
        out.append(e)
    return out


def _blocks(gadget, seq, c) -> list:
    """Alternating blocks ``[sigma_1, sigma_2, ...]``; even positions hold copy ``c``.

    ``sigma_1`` and the final odd block may be empty.
    """
    blocks = [[]]
    for e in seq:
        mine = gadget.copy_of_edge(e) == c
        if mine != (len(blocks) % 2 == 0):
            blocks.append([])
        blocks[-1].append(e)
    if len(blocks) % 2 == 0:
        blocks.append([])
    return blocks


def _ratio(length, terminals):
    return Fraction(length) / terminals


def _fix_copy(gadget: GadgetInstance, seq: list, c: int, cap: int) -> list:
    inst = gadget.instance
    for _ in range(cap):
        blocks = _blocks(gadget, seq, c)
        mine = blocks[1::2]
        if len(mine) <= 1:
            return seq
        news = _new_vertices(inst, seq)
        term_of = dict(zip(seq, (gadget.is_terminal(v) for v in news)))
        t = [sum(term_of[e] for e in b) for b in blocks]
        ell = [sum(inst.lengths[e] for e in b) for b in blocks]
        last = len(blocks) - 2  # index of sigma_2s

        # zero-terminal blocks: drop a useless tail, otherwise push later
        zero = next((j for j in range(1, last + 1) if t[j] == 0), None)
        if zero is not None:
            if zero == last:
                blocks[last] = []
            else:
                blocks[zero], blocks[zero + 1] = blocks[zero + 1], blocks[zero]
            seq = [e for b in blocks for e in b]
            continue

        # tail repair until r(sigma_2s) <= 2
        if _ratio(ell[last], t[last]) > 2:
            seq = _repair_tail(gadget, seq, blocks, last, term_of)
            continue

        swap = None
        for j in range(last, 1, -1):  # blocks is 0-based: blocks[1] is sigma_2
            if _ratio(ell[j - 1], t[j - 1]) >= _ratio(ell[j], t[j]):
                swap = j
                break
        if swap is None:
            raise AssertionError("no improving adjacent swap; ratio invariant violated")
        blocks[swap - 1], blocks[swap] = blocks[swap], blocks[swap - 1]
        seq = [e for b in blocks for e in b]
    raise AssertionError("structuring did not terminate within the iteration cap")


def _repair_tail(gadget, seq, blocks, last, term_of) -> list:
    inst = gadget.instance
    tail = blocks[last]
    if not term_of[tail[-1]]:
        blocks[last] = tail[:-1]
        return [e for b in blocks for e in b]
    # shortest suffix whose ratio exceeds 2
    for p in range(len(tail) - 1, -1, -1):
        suffix = tail[p:]
        ts = sum(term_of[e] for e in suffix)
        if _ratio(sum(inst.lengths[e] for e in suffix), ts) > 2:
            break
    prefix = [e for b in blocks[:last] for e in b] + tail[:p]
    explored = set(_new_vertices(inst, prefix)) | {inst.root}
    news = _new_vertices(inst, seq)
    new_of = dict(zip(seq, news))
    copy_id = gadget.copy_of_edge(tail[0])
    anchors = [v for v in sorted(explored) if v != inst.root and gadget.member[v][0] == copy_id]
    replacement = []
    for e in suffix:
        q = new_of[e]
        if not term_of[e]:
            continue
        best = min(anchors, key=lambda x: (inst.lengths[inst.edge(x, q)], x))
        replacement.append(inst.edge(best, q))
        anchors.append(q)
    blocks[last] = tail[:p] + replacement
    return [e for b in blocks for e in b]


def structure_pattern(gadget: GadgetInstance, pattern: Pattern, cap: int = 10_000) -> Pattern:
    inst = gadget.instance
    require_valid(inst, pattern)
    before = total_latency(inst, pattern).total
    seq = _single_root_edge(gadget, pattern)
    for _ in range(cap):
        runs = copy_runs(gadget, seq)
        seen, target = set(), None
        for c, _ in runs:
            if c in seen:
                target = c
                break
            seen.add(c)
        if target is None:
            break
        seq = _fix_copy(gadget, seq, target, cap)
    else:
        raise AssertionError("structuring did not terminate within the iteration cap")
    out = tuple(seq)
    require_valid(inst, out)
    if total_latency(inst, out).total > before:
        raise AssertionError("structuring increased total latency")
    return out


# -- Steiner extraction -------------------------------------------------------------


@dataclass(frozen=True)
class CopyTree:
    copy: int
    edges: tuple  # original-vertex pairs
    cost: int


def copy_trees(gadget: GadgetInstance, structured: Pattern) -> list:
    """Per-copy Steiner trees in the order the pattern visits the copies."""
    inst = gadget.instance
    out = []
    for c, es in copy_runs(gadget, structured):
        pairs = []
        for e in es:
            if gadget.is_root_edge(e):
                continue
            u, v = inst.edges[e]
            pairs.append((gadget.member[u][1], gadget.member[v][1]))
        covered = {x for p in pairs for x in p}
        entry = next(gadget.member[v][1] for e in es if gadget.is_root_edge(e) for v in inst.edges[e] if v != inst.root)
        covered.add(entry)
        if not gadget.st.terminals <= covered:
            raise ValueError(f"copy {c} does not connect all terminals")
        out.append(CopyTree(c, tuple(pairs), sum(gadget.st.cost(u, v) for u, v in pairs)))
    return out


def extract_best_steiner(gadget: GadgetInstance, structured: Pattern) -> CopyTree:
    if not is_structured(gadget, structured):
        raise ValueError("pattern is not structured")
    trees = copy_trees(gadget, structured)
    if len(trees) != gadget.copies:
        raise ValueError("pattern does not visit every copy")
    return min(trees, key=lambda t: (t.cost, t.copy))


def accounting_bound(gadget: GadgetInstance, structured: Pattern, per_copy_root_edges: bool = False) -> int:
    """Lower bound on the unscaled latency of a structured pattern.

    Copy ``i`` (in visit order) is reached only after one root edge and the
    trees of all earlier copies; with ``per_copy_root_edges`` the root edges of
    earlier copies are charged as well.
    """
    a = gadget.root_cost
    total, before = 0, 0
    for i, tree in enumerate(copy_trees(gadget, structured), start=1):
        total += (i * a if per_copy_root_edges else a) + before
        before += tree.cost
    return total


def hardness_ratio(beta, k: int) -> Fraction:
    """ST(1,2) ratio implied by a ``beta``-approximate ESP solver on ``k`` copies."""
    if k < 2:
        raise ValueError("k must be at least 2")
    beta = Fraction(str(beta)) if isinstance(beta, float) else Fraction(beta)
    return Fraction(k + 1, k - 1) * (3 * beta - 2)


def gadget_from_instance(inst: Instance) -> GadgetInstance:
    """Recover the gadget structure from an instance written by ``build_gadget``."""
    if inst.ids[inst.root] != ROOT_ID:
        raise ValueError(f"gadget root must be {ROOT_ID!r}")
    member = {}
    for v, vid in enumerate(inst.ids):
        if v == inst.root:
            continue
        copy, sep, orig = vid.partition(".")
        if not sep or not copy.isdigit():
            raise ValueError(f"vertex id {vid!r} is not of the form copy.vertex")
        member[v] = (int(copy), orig)
    k = max(c for c, _ in member.values())
    first = {o: v for v, (c, o) in member.items() if c == 1}
    vertices = tuple(sorted(first))
    terminals = frozenset(o for o, v in first.items() if inst.weights[v] > 0)
    costs = {
        frozenset((a, b)): inst.lengths[inst.edge(first[a], first[b])]
        for a, b in itertools.combinations(vertices, 2)
    }
    st = ST12Instance(vertices, terminals, costs)
    rebuilt = build_gadget(st, k)
    if _canonical(rebuilt.instance) != _canonical(inst):
        raise ValueError("instance is not a well-formed gadget")
    return GadgetInstance(inst, st, k, rebuilt.root_cost, member)


def _canonical(inst: Instance) -> tuple:
    ws = sorted(zip(inst.ids, inst.weights))
    es = sorted(
        (tuple(sorted((inst.ids[u], inst.ids[v]))), x) for (u, v), x in zip(inst.edges, inst.lengths)
    )
    return ws, es
