"""Acceptance criteria 1-8, each at its stated tolerance.

Every test prints one ``criterion N: PASS|FAIL ...`` line, repeated in the
pytest summary.
"""

import itertools
import json
import math
import random
import time
from fractions import Fraction

import networkx as nx
import pytest

from conftest import FIXTURES
from expsearch.cli import main
from expsearch.core import Instance, load_pattern, random_pattern, total_latency, validate_pattern
from expsearch.euclidean import (
    EuclideanInstance,
    brute_force_segmented,
    build_quadtree,
    derandomize_shift,
    grid_round,
    random_euclidean,
    segmented_portal_dp,
    solve_euclidean,
    solve_over_shifts,
)
from expsearch.hardness import (
    build_gadget,
    is_structured,
    optimal_steiner,
    random_st12,
    structure_pattern,
)
from expsearch.oracles import AdversarialOracle, ExactOracle, HeuristicOracle, brute_force_esp
from expsearch.sweep import connected_graphs, sample_instances, sweep_small_graphs, worst_ratio
from expsearch.unweighted import plan_unweighted
from expsearch.weighted import build_quota_schedule, plan_weighted

E_UPPER = Fraction("2.7182818285")


# -- 1 ---------------------------------------------------------------------------


def permutation_optimum(g, lengths, weights, root=0):
    """Minimum total latency over vertex visiting orders.

    For a fixed order each vertex is best attached by its cheapest edge into
    the visited set; only orders that stay connected count.
    """
    others = [v for v in g.nodes if v != root]
    best = None
    for order in itertools.permutations(others):
        seen, t, cost, ok = {root}, 0, 0, True
        for v in order:
            links = [lengths[frozenset((u, v))] for u in g.neighbors(v) if u in seen]
            if not links:
                ok = False
                break
            t += min(links)
            cost += weights[v] * t
            seen.add(v)
        if ok and (best is None or cost < best):
            best = cost
    return best


def test_criterion_1_oracle_agreement(verdict):
    rng = random.Random(0)
    checked, mismatches = 0, []
    start = time.perf_counter()
    for gi, g in enumerate(connected_graphs(6)):
        for s in range(3):
            lengths = {frozenset(e): rng.choice((1, 2, 3)) for e in sorted(g.edges)}
            weights = {v: (0 if v == 0 else rng.choice((0, 1, 2))) for v in sorted(g.nodes)}
            inst = Instance.build(
                {str(v): w for v, w in weights.items()},
                [(str(u), str(v), lengths[frozenset((u, v))]) for u, v in sorted(g.edges)],
                "0",
            )
            _, cost = brute_force_esp(inst)
            expected = permutation_optimum(g, lengths, weights)
            checked += 1
            if cost != expected:
                mismatches.append((gi, s, cost, expected))
    ok = not mismatches
    verdict(1, ok, f"{checked} instances, {len(mismatches)} mismatches, {time.perf_counter() - start:.1f}s")
    assert ok, mismatches[:5]


# -- 2 ---------------------------------------------------------------------------


def test_criterion_2_lemma_exactness(verdict):
    runs, failures = 0, []
    oracles = (ExactOracle(), HeuristicOracle(), AdversarialOracle(2), AdversarialOracle(Fraction(7, 2)))
    for name, inst in sample_instances(6, samples=3, max_weight=2, seed=0):
        for oracle in oracles:
            run = plan_unweighted(inst, oracle)
            runs += 1
            if not validate_pattern(run.instance, run.pattern):
                failures.append((name, oracle.name, "invalid"))
            if not run.report.total <= run.plan.cost:
                failures.append((name, oracle.name, "path bound"))
            for v, latency, pi in run.vertex_bounds():
                if not latency <= pi:
                    failures.append((name, oracle.name, "pi bound", v))
    ok = not failures
    verdict(2, ok, f"{runs} runs, {len(failures)} violated bounds")
    assert ok, failures[:5]


# -- 3 ---------------------------------------------------------------------------


def test_criterion_3_unweighted_ratio(verdict):
    exact = worst_ratio(sweep_small_graphs(6, "unweighted", "exact", samples=4, seed=0))
    inflated = worst_ratio(sweep_small_graphs(6, "unweighted", AdversarialOracle(2), samples=4, seed=0))
    ok = exact <= E_UPPER and inflated <= 2 * E_UPPER
    verdict(3, ok, f"worst ratio exact {exact} (~{float(exact):.4f}) <= e, 2-inflated {inflated} (~{float(inflated):.4f}) <= 2e")
    assert ok


# -- 4 ---------------------------------------------------------------------------


def test_criterion_4_weighted_ratio(verdict):
    eps = Fraction(1, 4)
    exact = worst_ratio(sweep_small_graphs(5, "weighted", "exact", eps, samples=6, max_weight=3, seed=0))
    inflated = worst_ratio(
        sweep_small_graphs(5, "weighted", AdversarialOracle(Fraction(5, 2)), eps, samples=6, max_weight=3, seed=0)
    )
    s = build_quota_schedule(4, 1)
    boundary = s.omega_formula == 2 and s.omega == 3 and s.quotas[-1] > 3
    inst = Instance.build({"r": 0, "a": 1, "b": 2, "c": 1}, [("r", "a", 1), ("a", "b", 2), ("r", "c", 3)], "r")
    run = plan_weighted(inst, 1, ExactOracle())
    full = inst.weighted_vertices <= run.trees[-1].vertices and bool(validate_pattern(inst, run.pattern))
    ok = exact <= (1 + eps) * E_UPPER and inflated <= Fraction(5, 2) * (1 + eps) * E_UPPER and boundary and full
    verdict(
        4,
        ok,
        f"worst ratio exact {exact} (~{float(exact):.4f}) <= (1+eps)e, 5/2-inflated {inflated} "
        f"(~{float(inflated):.4f}) <= (5/2)(1+eps)e, W=4 eps=1 omega {s.omega_formula}->{s.omega}, full coverage {full}",
    )
    assert ok


# -- 5 ---------------------------------------------------------------------------


def test_criterion_5_decomposition(verdict):
    rng = random.Random(0)
    start = time.perf_counter()
    phases = 0
    worst = {Fraction(1, 2): 0.0, Fraction(1): 0.0}
    failures = []
    for trial in range(200):
        pts = random_euclidean(rng, rng.randint(2, 8), size=rng.choice([5, 20, 100, 1000]), max_weight=3)
        inst = pts.to_instance().with_root_weight_zero()
        opt = brute_force_esp(inst)[1]
        for eps in worst:
            beta = None if trial % 2 else 1.0
            best, runs = derandomize_shift(inst, eps, beta=beta)
            for run in runs:
                for ph in run.phases:
                    phases += 1
                    if not (ph.length_ok and ph.splice_ok(float(eps))):
                        failures.append((trial, float(eps), ph.index))
            ratio = best.cost / opt if opt else 1.0
            worst[eps] = max(worst[eps], ratio)
            if not validate_pattern(inst, best.pattern) or ratio > (1 + 5 * eps) * (1 + 1e-9):
                failures.append((trial, float(eps), "ratio", ratio))
    ok = not failures
    verdict(
        5,
        ok,
        f"200 instances, {phases} phases checked, worst ratio eps=1/2 {worst[Fraction(1, 2)]:.4f} <= 3.5, "
        f"eps=1 {worst[Fraction(1)]:.4f} <= 6, {time.perf_counter() - start:.1f}s",
    )
    assert ok, failures[:5]


def test_criterion_5_portal_pipeline(verdict):
    """The same bound end to end with the portal DP as the bounded solver."""
    rng = random.Random(5)
    worst, failures = 0.0, []
    for _ in range(4):
        pts = random_euclidean(rng, 4, size=20, max_weight=2)
        inst, run = solve_euclidean(pts, Fraction(1, 2), kappa=2, sweep=4, seed=0)
        opt = brute_force_esp(inst)[1]
        ratio = run.cost / opt if opt else 1.0
        worst = max(worst, ratio)
        if not validate_pattern(inst, run.pattern) or ratio > 3.5 * (1 + 1e-9):
            failures.append(ratio)
    ok = not failures
    verdict("5b", ok, f"portal-DP pipeline on 4 instances, worst ratio {worst:.4f} <= 1+5eps = 3.5")
    assert ok


# -- 6 ---------------------------------------------------------------------------


def load_dp_fixtures():
    return [EuclideanInstance.from_json(d) for d in json.loads((FIXTURES / "dp_points.json").read_text())]


def test_criterion_6_portal_dp(verdict):
    eps = Fraction(1, 2)
    start = time.perf_counter()
    worst, failures, mono = 0.0, [], 0
    for i, pts in enumerate(load_dp_fixtures()):
        r = grid_round(pts, eps)
        graph = r.instance.to_instance().with_root_weight_zero()
        for kappa in (1, 2):
            best, _ = solve_over_shifts(r, kappa=kappa, sweep=8, seed=0)
            opt = brute_force_segmented(graph, kappa=kappa).objective
            ratio = best.cost / opt if opt else (1.0 if best.cost == 0 else math.inf)
            worst = max(worst, ratio)
            if ratio > 1 + eps + 1e-9:
                failures.append((i, kappa, ratio))
        if pts.n <= 4:
            tree = build_quadtree(r, portals_per_side=5)
            caps = [segmented_portal_dp(tree, kappa=2, cap=c).cost for c in (1, 2, 4, 8)]
            ports = [segmented_portal_dp(build_quadtree(r, portals_per_side=p), kappa=2).cost for p in (2, 3, 5, 9)]
            mono += 1
            if caps != sorted(caps, reverse=True) or ports != sorted(ports, reverse=True):
                failures.append((i, "monotone", caps, ports))
    ok = not failures
    verdict(
        6,
        ok,
        f"12 fixtures x kappa in {{1,2}}, worst DP/segmented-optimum {worst:.4f} <= 1.5, "
        f"monotonicity on {mono} fixtures, {time.perf_counter() - start:.1f}s",
    )
    assert ok, failures[:5]


# -- 7 ---------------------------------------------------------------------------


def test_criterion_7_hardness(verdict):
    rng = random.Random(0)
    failures = []
    steiner_checks = esp_checks = 0
    for case in range(1000):
        size = rng.randint(2, 4)
        st = random_st12(rng, size, rng.randint(2, size), p_one=rng.random())
        k = rng.randint(2, 3)
        g = build_gadget(st, k)
        p = random_pattern(g.instance, rng, extra=rng.random())
        before = total_latency(g.instance, p).total
        out = structure_pattern(g, p)
        if not (validate_pattern(g.instance, out) and is_structured(g, out)):
            failures.append((case, "not structured"))
        if total_latency(g.instance, out).total > before:
            failures.append((case, "latency increased"))
        if structure_pattern(g, out) != out:
            failures.append((case, "not idempotent"))
        opt_st = optimal_steiner(st)[0]
        t, a = len(st.terminals), g.root_cost
        steiner_checks += 1
        if not (t - 1 <= opt_st <= a <= 2 * opt_st):
            failures.append((case, "steiner bound", opt_st, a))
        opt_esp = Fraction(brute_force_esp(g.instance, max_vertices=13)[1], t)
        esp_checks += 1
        if not opt_esp <= Fraction(k * (k + 1), 2) * (a + opt_st):
            failures.append((case, "esp upper bound", opt_esp))
    ok = not failures
    verdict(7, ok, f"1000 fuzzed patterns, {steiner_checks} Steiner-bound checks, {esp_checks} ESP upper-bound checks, {len(failures)} failures")
    assert ok, failures[:5]


# -- 8 ---------------------------------------------------------------------------


def _solve_twice(tmp_path, capsys, args, tag):
    outs = []
    for rep in range(2):
        target = tmp_path / f"{tag}-{rep}.json"
        assert main(args + ["--output", str(target)]) == 0
        out = capsys.readouterr().out.splitlines()
        outs.append((out[0], out[1].rsplit(",", 1)[0], target.read_text()))
    return outs


def test_criterion_8_round_trip(tmp_path, capsys, verdict):
    cases = [
        ("triangle", ["--input", str(FIXTURES / "triangle.json"), "--algo", "unweighted", "--oracle", "exact"]),
        ("weighted", ["--input", str(FIXTURES / "triangle.json"), "--algo", "weighted", "--epsilon", "1/4"]),
        ("heuristic", ["--input", str(FIXTURES / "path9.json"), "--algo", "weighted", "--oracle", "heuristic"]),
        ("brute", ["--input", str(FIXTURES / "triangle.json"), "--algo", "brute"]),
        ("points", ["--input", str(FIXTURES / "square4.json"), "--algo", "euclidean", "--epsilon", "1/2",
                    "--shift-sweep", "3", "--seed", "7"]),
    ]
    failures = []
    for tag, args in cases:
        a, b = _solve_twice(tmp_path, capsys, ["solve"] + args, tag)
        if a != b:
            failures.append((tag, "nondeterministic"))
        data = json.loads((FIXTURES / args[1].rsplit("/", 1)[-1]).read_text())
        inst = (EuclideanInstance.from_json(data).to_instance().with_root_weight_zero()
                if "points" in data else Instance.from_json(data))
        if not validate_pattern(inst, load_pattern(inst, tmp_path / f"{tag}-0.json")):
            failures.append((tag, "invalid pattern"))
    # gadget and structure outputs
    gadget = tmp_path / "g.json"
    assert main(["gadget", "--st12", str(FIXTURES / "st4.json"), "--copies", "3", "--out", str(gadget)]) == 0
    ginst = Instance.from_json(json.loads(gadget.read_text()))
    raw = tmp_path / "raw.json"
    raw.write_text(json.dumps({"pattern": ginst.pattern_pairs(random_pattern(ginst, random.Random(0), 0.5))}))
    docs = []
    for rep in range(2):
        target = tmp_path / f"s-{rep}.json"
        assert main(["structure", "--instance", str(gadget), "--pattern", str(raw), "--output", str(target)]) == 0
        docs.append(target.read_text())
        if not validate_pattern(ginst, load_pattern(ginst, target)):
            failures.append(("structure", "invalid pattern"))
    if docs[0] != docs[1]:
        failures.append(("structure", "nondeterministic"))
    capsys.readouterr()
    ok = not failures
    verdict(8, ok, f"{len(cases)} solve configurations and structure output re-validated and repeatable")
    assert ok, failures
