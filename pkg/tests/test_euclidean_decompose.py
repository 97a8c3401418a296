import math
import random
from fractions import Fraction

import pytest

from expsearch.core import total_latency, validate_pattern
from expsearch.euclidean import (
    DecomposeParams,
    EuclideanInstance,
    decompose_solve,
    derandomize_shift,
    exact_bounded_solver,
    random_euclidean,
    weighted_base,
)
from expsearch.euclidean.decompose import class_partition, shift_candidates
from expsearch.oracles import brute_force_esp


def test_params_eps_one():
    p = DecomposeParams.make(1, 2.0)
    assert p.gamma == 3 and p.a == 6
    assert DecomposeParams.make(1, 1.0).a == 3


def test_params_reject_bad_inputs():
    with pytest.raises(ValueError):
        DecomposeParams.make(2, 1.0)
    with pytest.raises(ValueError):
        DecomposeParams.make(1, 0.5)


def test_class_boundaries():
    p = DecomposeParams.make(1, 1.0, b=0.5)
    for i in range(1, 5):
        t = p.t(i)
        assert p.class_of(t * (1 + 1e-9)) == i
        assert p.class_of(p.t(i + 1) * (1 - 1e-9)) == i
    assert p.class_of(p.t(1) / 2) == 1 and p.class_of(0) == 1


def test_single_weighted_vertex():
    pts = EuclideanInstance.build([(0, 0), (3, 4), (1, 1)], [0, 2, 0])
    inst = pts.to_instance()
    run = decompose_solve(inst, 1)
    assert len(run.classes) == 1 and len(run.phases) == 1
    assert run.pattern == run.phases[0].pattern
    assert run.cost == brute_force_esp(inst)[1]
    best, runs = derandomize_shift(inst, 1)
    assert {tuple(r.classes.values())[0] for r in runs} == {(1,)}


def test_best_shift_is_minimum():
    inst = random_euclidean(random.Random(4), 6, max_weight=3).to_instance()
    best, runs = derandomize_shift(inst, 1, beta=1.0)
    assert all(best.cost <= r.cost for r in runs)


def test_shift_candidates_cover_every_partition():
    pts = EuclideanInstance.build([(0, 0), (1, 0), (5, 0)], [0, 1, 1])
    inst = pts.to_instance()
    lat = total_latency(inst, (inst.edge(0, 1), inst.edge(1, 2))).latencies
    params = DecomposeParams.make(1, 1.0)
    weighted = [1, 2]
    direct = set()
    for k in range(3000):
        b = params.a * k / 3000
        direct.add(tuple(map(tuple, class_partition(lat, weighted, DecomposeParams.make(1, 1.0, b)).values())))
    via = {
        tuple(map(tuple, class_partition(lat, weighted, DecomposeParams.make(1, 1.0, b)).values()))
        for b in shift_candidates(lat, weighted, params.a)
    }
    assert via == direct and len(direct) == 2


def test_steiner_points_kept_in_subinstances():
    # three terminals around a weight-0 hub far from the root
    h = Fraction(866, 1000)
    pts = EuclideanInstance.build(
        [(0, 0), (99, 0), (Fraction(1005, 10), h), (Fraction(1005, 10), -h), (100, 0)],
        [0, 1, 1, 1, 0],
    )
    inst = pts.to_instance()
    without = EuclideanInstance.build(pts.points[:4], pts.weights[:4]).to_instance()
    with_hub = brute_force_esp(inst)[1]
    assert with_hub < brute_force_esp(without)[1]
    run = decompose_solve(inst, 1, beta=1.0)
    used = {v for e in run.pattern for v in inst.edges[e]}
    assert 4 in used
    assert math.isclose(run.cost, with_hub)


def test_phase_inequalities_random():
    rng = random.Random(21)
    for trial in range(40):
        pts = random_euclidean(rng, rng.randint(2, 6), size=rng.choice([5, 50, 500]), max_weight=3)
        inst = pts.to_instance()
        for eps in (Fraction(1, 2), Fraction(1)):
            best, runs = derandomize_shift(inst, eps, beta=1.0 if trial % 2 else None)
            for run in runs:
                assert validate_pattern(inst.with_root_weight_zero(), run.pattern)
                for ph in run.phases:
                    assert ph.length_ok and ph.splice_ok(float(eps))
            opt = brute_force_esp(inst.with_root_weight_zero())[1]
            assert best.cost <= (1 + 5 * eps) * opt * (1 + 1e-9)


def test_base_solver_factor():
    base = weighted_base(Fraction(1, 4))
    assert math.isclose(base.factor, 1.25 * math.e)
    inst = random_euclidean(random.Random(3), 4).to_instance().with_root_weight_zero()
    assert validate_pattern(inst, base(inst))
    assert exact_bounded_solver(inst, 10.0) == brute_force_esp(inst)[0]
