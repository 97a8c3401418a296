"""Decomposition of ESP into delay-bounded subinstances.

A base approximation orders the vertices; cutting that order at time points
``t_i = e^((i-2)a + b)`` gives classes that are solved separately, each
solution truncated and completed by a prefix of the base solution, then
everything is concatenated.  The time points grow like ``e^a`` with ``a``
typically in the tens, so class bookkeeping is done with logarithms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from ..core import Instance, Pattern, concat_patterns, total_latency
from ..oracles import ExactOracle, brute_force_esp
from ..weighted import DEFAULT_EPSILON, parse_epsilon, plan_weighted

REL_TOL = 1e-9
MAX_EXP = 700.0  # beyond this exp() overflows a float


def _exp(x: float) -> float:
    return math.exp(x) if x < MAX_EXP else math.inf


def _log_expm1(a: float) -> float:
    return a + math.log1p(-math.exp(-a))


@dataclass(frozen=True)
class DecomposeParams:
    epsilon: float
    beta: float
    gamma: float  # 3 / eps
    a: float  # beta * gamma / eps
    b: float

    @classmethod
    def make(cls, epsilon, beta, b: float = 0.0) -> "DecomposeParams":
        eps = float(parse_epsilon(epsilon))
        if eps > 1:
            raise ValueError("decomposition needs 0 < epsilon <= 1")
        if beta < 1:
            raise ValueError("beta must be at least 1")
        gamma = 3 / eps
        a = beta * gamma / eps
        if not 0 <= b <= a:
            raise ValueError(f"shift b must lie in [0, {a}]")
        return cls(eps, float(beta), gamma, a, float(b))

    def log_t(self, i: int) -> float:
        return (i - 2) * self.a + self.b

    def t(self, i: int) -> float:
        return _exp(self.log_t(i))

    def class_of(self, latency) -> int:
        """``i`` with ``t_i <= C < t_{i+1}``; anything below ``t_1`` goes to class 1."""
        if latency <= 0:
            return 1
        i = math.floor((math.log(latency) - self.b) / self.a + 1e-12) + 2
        return max(i, 1)

    def truncation_cap(self, i: int) -> float:
        """``(1 + e^a/(eps gamma)) gamma t_i``."""
        g = self.gamma
        return _exp(math.log(g) + self.log_t(i)) + _exp(self.a + self.log_t(i) - math.log(self.epsilon))

    def phase_budget_log(self, i: int) -> float:
        """``log(gamma t_{i+1} - gamma t_i)``."""
        return math.log(self.gamma) + self.log_t(i) + _log_expm1(self.a)


@dataclass
class PhaseRecord:
    index: int
    members: tuple  # weighted vertices of the class
    solved: Pattern  # bounded solver output on the subinstance
    kept: Pattern  # its truncated prefix
    splice: Pattern  # base-solution prefix appended after it
    pattern: Pattern  # kept + splice with cycle edges skipped
    length: float
    budget_log: float
    splice_ratio: float  # worst (gamma t_i + C_v(phase)) / (gamma t_i + C_v(solved))

    @property
    def length_ok(self) -> bool:
        if self.length <= 0:
            return True
        return math.log(self.length) <= self.budget_log + REL_TOL

    def splice_ok(self, epsilon: float) -> bool:
        return self.splice_ratio <= (1 + epsilon) * (1 + REL_TOL)


@dataclass
class DecomposeRun:
    params: DecomposeParams
    base_pattern: Pattern
    base_latency: dict
    classes: dict  # class index -> weighted vertices
    phases: list
    pattern: Pattern
    cost: float = field(default=0.0)


def exact_bounded_solver(inst: Instance, delay) -> Pattern:
    """Exact delay-bounded ESP: the additive delay does not move the optimum."""
    return brute_force_esp(inst, max_vertices=max(inst.n, 8))[0]


def weighted_base(epsilon=DEFAULT_EPSILON, oracle=None) -> Callable:
    oracle = oracle or ExactOracle()

    def solve(inst: Instance) -> Pattern:
        return plan_weighted(inst, epsilon, oracle).pattern

    solve.factor = float((1 + parse_epsilon(epsilon)) * Fraction(math.e))
    return solve


def _prefix_covering(inst: Instance, pattern: Pattern, targets) -> Pattern:
    need = set(targets)
    if not need:
        return ()
    explored = {inst.root}
    for k, e in enumerate(pattern):
        u, v = inst.edges[e]
        new = v if u in explored else u
        explored.add(new)
        need.discard(new)
        if not need:
            return tuple(pattern[: k + 1])
    raise AssertionError("base pattern misses a weighted vertex")


def _longest_prefix(inst: Instance, pattern: Pattern, cap: float) -> Pattern:
    total = 0.0
    for k, e in enumerate(pattern):
        total += inst.lengths[e]
        if total > cap * (1 + REL_TOL):
            return tuple(pattern[:k])
    return tuple(pattern)


def class_partition(latency: dict, weighted, params: DecomposeParams) -> dict:
    classes: dict = {}
    for v in sorted(weighted):
        classes.setdefault(params.class_of(latency[v]), []).append(v)
    return {i: tuple(vs) for i, vs in sorted(classes.items())}


def decompose_solve(
    inst: Instance,
    epsilon,
    base_approx: Callable | None = None,
    bounded_solver: Callable = exact_bounded_solver,
    beta: float | None = None,
    b: float = 0.0,
    base_pattern: Pattern | None = None,
) -> DecomposeRun:
    """Run the five decomposition steps for a fixed shift ``b``.

    ``beta`` defaults to the base solver's declared factor.  Classes that end
    up empty are skipped.
    """
    inst = inst.with_root_weight_zero()
    if base_pattern is None:
        base_approx = base_approx or weighted_base()
        base_pattern = base_approx(inst)
    if beta is None:
        beta = getattr(base_approx, "factor", 1.0)
    params = DecomposeParams.make(epsilon, beta, b)
    base_lat = total_latency(inst, base_pattern).latencies
    weighted = sorted(inst.weighted_vertices)
    classes = class_partition(base_lat, weighted, params)

    phases = []
    pieces = []
    covered: list = []
    for i, members in classes.items():
        covered.extend(members)
        sub = inst.with_weights([inst.weights[v] if v in members else 0 for v in range(inst.n)])
        delay = params.gamma * params.t(i)
        solved = tuple(bounded_solver(sub, delay))
        kept = _longest_prefix(sub, solved, params.truncation_cap(i))
        splice = _prefix_covering(inst, base_pattern, covered)
        phase = concat_patterns(inst, kept, splice)
        length = float(sum(inst.lengths[e] for e in phase))

        lat_phase = total_latency(sub, phase, check=False).latencies
        lat_solved = total_latency(sub, solved).latencies
        x = params.gamma * params.t(i)
        worst = 1.0
        for v in members:
            if math.isinf(x):
                break
            worst = max(worst, (x + lat_phase[v]) / (x + lat_solved[v]))
        phases.append(
            PhaseRecord(i, members, solved, kept, splice, phase, length, params.phase_budget_log(i), worst)
        )
        pieces.append(phase)

    pattern: Pattern = ()
    for p in pieces:
        pattern = concat_patterns(inst, pattern, p)
    cost = total_latency(inst, pattern).total if weighted else 0
    return DecomposeRun(params, tuple(base_pattern), base_lat, classes, phases, pattern, cost)


def shift_candidates(latency: dict, weighted, a: float) -> list:
    """Shifts ``b`` in ``[0, a)``, one per distinct class partition."""
    out = {0.0}
    for v in weighted:
        c = latency[v]
        if c > 0:
            out.add(math.log(c) % a)
    return sorted(out)


def derandomize_shift(
    inst: Instance,
    epsilon,
    base_approx: Callable | None = None,
    bounded_solver: Callable = exact_bounded_solver,
    beta: float | None = None,
) -> tuple:
    """Best decomposition over every distinct partition; returns ``(best, runs)``."""
    inst = inst.with_root_weight_zero()
    base_approx = base_approx or weighted_base()
    base_pattern = base_approx(inst)
    if beta is None:
        beta = getattr(base_approx, "factor", 1.0)
    params = DecomposeParams.make(epsilon, beta)
    lat = total_latency(inst, base_pattern).latencies
    runs = [
        decompose_solve(inst, epsilon, base_approx, bounded_solver, beta, b, base_pattern)
        for b in shift_candidates(lat, inst.weighted_vertices, params.a)
    ]
    best = min(runs, key=lambda r: r.cost)
    return best, runs
