"""Run records, CSV output and exhaustive sweeps over small connected graphs."""

from __future__ import annotations

import csv
import io
import random
import time
from dataclasses import dataclass, fields
from fractions import Fraction

import networkx as nx

from .core import Instance, Pattern, total_latency
from .oracles import brute_force_esp, make_oracle
from .unweighted import solve_unweighted
from .weighted import parse_epsilon, solve_weighted

LENGTHS = (1, 2, 3)
MAX_SWEEP_N = 7


@dataclass
class RunRecord:
    instance: str
    algo: str
    oracle: str
    epsilon: str
    seed: int
    latency: object
    optimum: object = None
    ratio: Fraction | None = None
    wall_time: float = 0.0

    def __post_init__(self):
        if self.optimum is not None and self.ratio is None:
            self.ratio = ratio_of(self.latency, self.optimum)

    def row(self, with_time: bool = True) -> list:
        out = [
            self.instance,
            self.algo,
            self.oracle,
            self.epsilon,
            str(self.seed),
            format_number(self.latency),
            "" if self.optimum is None else format_number(self.optimum),
            "" if self.ratio is None else format_number(self.ratio),
        ]
        if with_time:
            out.append(f"{self.wall_time:.6f}")
        return out


HEADER = [f.name for f in fields(RunRecord)]


def ratio_of(latency, optimum):
    if optimum == 0:
        return Fraction(1) if latency == 0 else float("inf")
    if isinstance(latency, float) or isinstance(optimum, float):
        return latency / optimum
    return Fraction(latency) / Fraction(optimum)


def format_number(x) -> str:
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_csv(records, handle=None, with_time: bool = True) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(HEADER if with_time else HEADER[:-1])
    for r in records:
        w.writerow(r.row(with_time))
    text = buf.getvalue()
    if handle is not None:
        handle.write(text)
    return text


# -- small graph families ----------------------------------------------------------


def connected_graphs(max_n: int) -> list:
    """Connected graphs on 2..max_n vertices from the graph atlas, in atlas order."""
    if not 1 <= max_n <= MAX_SWEEP_N:
        raise ValueError(f"max_n must lie in [1, {MAX_SWEEP_N}]")
    out = []
    for g in nx.graph_atlas_g():
        n = g.number_of_nodes()
        if n > max_n:
            break
        if n >= 2 and nx.is_connected(g):
            out.append(g)
    return out


def sample_instances(max_n: int, samples: int = 2, max_weight: int = 2, seed: int = 0, lengths=LENGTHS) -> list:
    """``(name, Instance)`` pairs: each atlas graph with ``samples`` seeded draws of
    edge lengths and vertex weights; vertex 0 is the root, with weight 0."""
    rng = random.Random(seed)
    out = []
    for gi, g in enumerate(connected_graphs(max_n)):
        for s in range(samples):
            weights = {str(v): (0 if v == 0 else rng.randint(0, max_weight)) for v in sorted(g.nodes)}
            edges = [(str(u), str(v), rng.choice(lengths)) for u, v in sorted(g.edges)]
            out.append((f"n{g.number_of_nodes()}-g{gi}-s{s}", Instance.build(weights, edges, "0")))
    return out


def run_algorithm(inst: Instance, algo: str, oracle, epsilon) -> tuple:
    """``(instance actually scored, pattern)`` for a graph algorithm."""
    if algo == "unweighted":
        unit = inst.with_unit_weights()
        return unit, solve_unweighted(unit, oracle)
    if algo == "weighted":
        zeroed = inst.with_root_weight_zero()
        return zeroed, solve_weighted(zeroed, epsilon, oracle)
    if algo == "brute":
        return inst, brute_force_esp(inst)[0]
    raise ValueError(f"unknown graph algorithm {algo!r}")


def evaluate(name: str, inst: Instance, algo: str, oracle, epsilon, seed: int = 0, optimum: bool = True) -> RunRecord:
    start = time.perf_counter()
    scored, pattern = run_algorithm(inst, algo, oracle, epsilon)
    latency = total_latency(scored, pattern).total
    opt = brute_force_esp(scored)[1] if optimum else None
    return RunRecord(
        name, algo, getattr(oracle, "name", "none"), format_number(parse_epsilon(epsilon)), seed,
        latency, opt, wall_time=time.perf_counter() - start,
    )


def sweep_small_graphs(
    max_n: int,
    algo: str = "unweighted",
    oracle="exact",
    epsilon=Fraction(1, 4),
    samples: int = 2,
    max_weight: int = 2,
    seed: int = 0,
) -> list:
    """Run ``algo`` and brute force on every sampled small instance."""
    if isinstance(oracle, str):
        oracle = make_oracle(oracle)
    return [
        evaluate(name, inst, algo, oracle, epsilon, seed)
        for name, inst in sample_instances(max_n, samples, max_weight, seed)
    ]


def worst_ratio(records) -> object:
    return max((r.ratio for r in records if r.ratio is not None), default=None)


def pattern_document(inst: Instance, pattern: Pattern, **extra) -> dict:
    doc = {"pattern": inst.pattern_pairs(pattern), "total_latency": format_number(total_latency(inst, pattern).total)}
    doc.update(extra)
    return doc
