import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import instances, make, path_rab, triangle
from expsearch.core import (
    Instance,
    InstanceError,
    InvalidPattern,
    concat_patterns,
    enumerate_patterns,
    pattern_length,
    random_pattern,
    total_latency,
    validate_pattern,
)


def pat(inst, *pairs):
    return inst.pattern_from_pairs(pairs)


def test_validate_chain_from_root():
    inst = path_rab()
    assert validate_pattern(inst, pat(inst, ("r", "a"), ("a", "b")))


def test_validate_first_edge_misses_root():
    inst = path_rab()
    check = validate_pattern(inst, pat(inst, ("a", "b"), ("r", "a")))
    assert not check and check.index == 1 and check.kind == "root-miss"


def test_validate_cycle_edge():
    inst = triangle()
    check = validate_pattern(inst, pat(inst, ("r", "a"), ("r", "b"), ("a", "b")))
    assert not check and check.index == 3 and check.kind == "cycle"


def test_validate_uncovered_weighted_vertex():
    inst = path_rab()
    check = validate_pattern(inst, pat(inst, ("r", "a")))
    assert not check and check.kind == "uncovered" and check.vertex == "b"


def test_zero_weight_vertices_need_no_visit():
    inst = path_rab(wb=0)
    assert validate_pattern(inst, pat(inst, ("r", "a")))


def test_total_latency_path():
    inst = path_rab(la=2, lb=3)
    rep = total_latency(inst, pat(inst, ("r", "a"), ("a", "b")))
    assert rep.of(inst.index["a"]) == 2 and rep.of(inst.index["b"]) == 5 and rep.total == 7


def test_total_latency_star_orders():
    inst = make({"r": 0, "v1": 1, "v2": 1}, [("r", "v1", 1), ("r", "v2", 2)])
    assert total_latency(inst, pat(inst, ("r", "v1"), ("r", "v2"))).total == 4
    assert total_latency(inst, pat(inst, ("r", "v2"), ("r", "v1"))).total == 5


def test_root_weight_counts_zero():
    inst = make({"r": 7, "a": 1}, [("r", "a", 3)])
    assert total_latency(inst, pat(inst, ("r", "a"))).total == 3


def test_invalid_pattern_raises():
    inst = path_rab()
    with pytest.raises(InvalidPattern):
        total_latency(inst, pat(inst, ("a", "b")))


def test_concat_drops_duplicate():
    inst = path_rab()
    out = concat_patterns(inst, pat(inst, ("r", "a")), pat(inst, ("r", "a"), ("a", "b")))
    assert out == pat(inst, ("r", "a"), ("a", "b"))


def test_concat_skips_cycle_edge():
    inst = make(
        {"r": 0, "a": 1, "b": 1, "c": 1},
        [("r", "a", 1), ("r", "b", 1), ("a", "b", 1), ("b", "c", 1)],
    )
    out = concat_patterns(inst, pat(inst, ("r", "a"), ("r", "b")), pat(inst, ("a", "b"), ("b", "c")))
    assert out == pat(inst, ("r", "a"), ("r", "b"), ("b", "c"))


def test_concat_empty_is_identity():
    inst = triangle()
    p = pat(inst, ("r", "b"), ("a", "b"))
    assert concat_patterns(inst, (), p) == p


def test_json_round_trip():
    inst = make({"r": 0, "x": 2, "y": 0}, [("r", "x", 4), ("x", "y", 0)])
    again = Instance.from_json(json.loads(json.dumps(inst.to_json())))
    assert again == inst


@pytest.mark.parametrize(
    "doc",
    [
        {"root": "r", "vertices": [{"id": "r"}], "edges": [{"u": "r", "v": "r", "length": 1}]},
        {"root": "r", "vertices": [{"id": "r"}, {"id": "a"}], "edges": []},
        {"root": "z", "vertices": [{"id": "r"}], "edges": []},
        {"root": "r", "vertices": [{"id": "r"}, {"id": "a", "weight": -1}], "edges": [{"u": "r", "v": "a", "length": 1}]},
        {"root": "r", "vertices": [{"id": "r"}, {"id": "a"}], "edges": [{"u": "r", "v": "a", "length": -2}]},
        {"vertices": []},
    ],
)
def test_malformed_instances_rejected(doc):
    with pytest.raises(InstanceError):
        Instance.from_json(doc)


def union_find_valid(inst, pattern):
    """Independent check: each prefix is a tree containing the root."""
    parent = list(range(inst.n))

    def find(x):
        while parent[x] != x:
            x = parent[x]
        return x

    touched = {inst.root}
    for e in pattern:
        u, v = inst.edges[e]
        if u not in touched and v not in touched:
            return False
        if find(u) == find(v):
            return False
        parent[find(u)] = find(v)
        touched |= {u, v}
    return inst.weighted_vertices <= touched


@settings(max_examples=200, deadline=None)
@given(instances(max_n=5), st.lists(st.integers(0, 30), max_size=6))
def test_validator_matches_union_find(inst, raw):
    pattern = tuple(x % len(inst.edges) for x in raw) if inst.edges else ()
    if len(set(pattern)) != len(pattern):
        return
    assert bool(validate_pattern(inst, pattern)) == union_find_valid(inst, pattern)


def shortest_distances(inst):
    dist = {inst.root: 0}
    changed = True
    while changed:
        changed = False
        for (u, v), x in zip(inst.edges, inst.lengths):
            for a, b in ((u, v), (v, u)):
                if a in dist and (b not in dist or dist[a] + x < dist[b]):
                    dist[b] = dist[a] + x
                    changed = True
    return dist


@settings(max_examples=150, deadline=None)
@given(instances(max_n=6), st.integers(0, 10**6))
def test_latency_properties(inst, seed):
    rng = random.Random(seed)
    p = random_pattern(inst, rng, extra=0.3)
    rep = total_latency(inst, p)
    dist = shortest_distances(inst)
    for v in inst.weighted_vertices:
        assert rep.of(v) >= dist[v]
    # extending a prefix never moves an existing latency
    elapsed, seen = 0, {inst.root}
    for e in p:
        u, v = inst.edges[e]
        elapsed += inst.lengths[e]
        new = v if u in seen else u
        seen.add(new)
        assert rep.latencies[new] == elapsed
    q = random_pattern(inst, rng)
    both = concat_patterns(inst, p, q)
    assert validate_pattern(inst, both)
    assert pattern_length(inst, both) <= pattern_length(inst, p) + pattern_length(inst, q)


def test_enumerate_patterns_all_valid_and_distinct():
    inst = make({"r": 0, "a": 1, "b": 1, "c": 0}, [("r", "a", 1), ("r", "b", 1), ("a", "c", 1), ("b", "c", 1)])
    pats = list(enumerate_patterns(inst))
    assert len(pats) == len(set(pats))
    assert all(validate_pattern(inst, p) for p in pats)
    assert pat(inst, ("r", "a"), ("r", "b")) in pats
