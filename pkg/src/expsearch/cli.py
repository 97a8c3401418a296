"""Command line front end: ``expsearch solve|sweep|gadget|structure|validate``.

Exit codes: 0 success, 1 usage or input error, 2 instance over a size cap,
3 solver failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass

from .core import Instance, InstanceError, InvalidPattern, load_pattern, total_latency, validate_pattern
from .euclidean import EuclideanInstance, is_euclidean_json, solve_euclidean
from .hardness import (
    build_gadget,
    copy_runs,
    gadget_from_instance,
    is_structured,
    load_st12,
    structure_pattern,
)
from .oracles import DEFAULT_BRUTE_FORCE_LIMIT, InfeasibleTarget, InstanceTooLarge, brute_force_esp, make_oracle
from .sweep import RunRecord, format_number, pattern_document, run_algorithm, sweep_small_graphs, worst_ratio, write_csv
from .weighted import DEFAULT_EPSILON, parse_epsilon

EXIT_OK, EXIT_USAGE, EXIT_SIZE, EXIT_SOLVER = 0, 1, 2, 3
ALGOS = ("unweighted", "weighted", "euclidean", "brute")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class SolveConfig:
    input: str
    algo: str = "unweighted"
    oracle: str = "exact"
    epsilon: str = str(DEFAULT_EPSILON)
    seed: int = 0
    kappa: int = 2
    shift_sweep: str = "9"
    output: str | None = None
    optimum: bool = True
    trace: str | None = None


def read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON ({exc})") from None


def write_json(path, doc) -> None:
    try:
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror}") from None


def graph_of(data) -> tuple:
    """``(Instance, EuclideanInstance or None)`` from either JSON format."""
    if is_euclidean_json(data):
        points = EuclideanInstance.from_json(data)
        return points.to_instance().with_root_weight_zero(), points
    return Instance.from_json(data), None


def _sweep_arg(text: str):
    if text == "all":
        return "all"
    try:
        n = int(text)
    except ValueError:
        raise UsageError(f"--shift-sweep takes a positive integer or 'all', got {text!r}") from None
    if n < 1:
        raise UsageError("--shift-sweep must be positive")
    return n


def run_solve(config: SolveConfig) -> tuple:
    """Solve one instance; returns ``(RunRecord, instance, pattern)``.

    The output is a function of the instance file and the config alone.  When
    ``config.output`` is set the pattern is written there and read back
    through validation.
    """
    if config.algo not in ALGOS:
        raise UsageError(f"unknown algorithm {config.algo!r}")
    inst, points = graph_of(read_json(config.input))
    eps = parse_epsilon(config.epsilon)
    oracle = make_oracle(config.oracle)
    start = time.perf_counter()
    if config.algo == "euclidean":
        if points is None:
            raise UsageError("--algo euclidean needs a point instance")
        trace_fh = open(config.trace, "w") if config.trace else None
        try:
            trace = (lambda line: trace_fh.write(line + "\n")) if trace_fh else None
            scored, run = solve_euclidean(
                points, eps, kappa=config.kappa, sweep=_sweep_arg(config.shift_sweep), seed=config.seed, trace=trace
            )
        finally:
            if trace_fh:
                trace_fh.close()
        pattern = run.pattern
    else:
        scored, pattern = run_algorithm(inst, config.algo, oracle, eps)
    latency = total_latency(scored, pattern).total
    opt = None
    if config.optimum and (config.algo == "brute" or scored.n <= DEFAULT_BRUTE_FORCE_LIMIT):
        opt = latency if config.algo == "brute" else brute_force_esp(scored)[1]
    elapsed = time.perf_counter() - start
    oracle_name = oracle.name if config.algo in ("unweighted", "weighted") else "none"
    name = str(config.input).rsplit("/", 1)[-1]
    record = RunRecord(name, config.algo, oracle_name, format_number(eps), config.seed, latency, opt, wall_time=elapsed)
    if config.output:
        write_json(config.output, pattern_document(scored, pattern, algo=config.algo))
        again = load_pattern(scored, config.output)
        check = validate_pattern(scored, again)
        if again != tuple(pattern) or not check:
            raise RuntimeError(f"pattern written to {config.output} failed read-back validation")
    return record, scored, pattern


# -- commands ----------------------------------------------------------------------


def cmd_solve(args) -> int:
    config = SolveConfig(
        input=args.input,
        algo=args.algo,
        oracle=args.oracle,
        epsilon=args.epsilon,
        seed=args.seed,
        kappa=args.kappa,
        shift_sweep=args.shift_sweep,
        output=args.output,
        optimum=not args.no_optimum,
        trace=args.trace,
    )
    record, _, _ = run_solve(config)
    write_csv([record], sys.stdout)
    return EXIT_OK


def cmd_sweep(args) -> int:
    if args.algo not in ("unweighted", "weighted", "brute"):
        raise UsageError("sweep runs the graph algorithms only")
    if not 1 <= args.max_n <= 7:
        raise UsageError("--max-n must lie in 1..7")
    records = sweep_small_graphs(
        args.max_n, args.algo, args.oracle, parse_epsilon(args.epsilon), args.samples, args.max_weight, args.seed
    )
    if args.output:
        try:
            with open(args.output, "w", newline="") as fh:
                write_csv(records, fh)
        except OSError as exc:
            raise UsageError(f"cannot write {args.output}: {exc.strerror}") from None
    else:
        write_csv(records, sys.stdout)
    worst = worst_ratio(records)
    print(f"instances={len(records)} worst_ratio={format_number(worst)} (~{float(worst):.6f})", file=sys.stderr)
    return EXIT_OK


def cmd_gadget(args) -> int:
    try:
        st = load_st12(args.st12)
    except OSError as exc:
        raise UsageError(f"cannot read {args.st12}: {exc.strerror}") from None
    gadget = build_gadget(st, args.copies)
    write_json(args.out, gadget.instance.to_json())
    inst = gadget.instance
    print(f"vertices={inst.n} edges={len(inst.edges)} copies={gadget.copies} root_edge_length={gadget.root_cost}")
    return EXIT_OK


def cmd_structure(args) -> int:
    inst = Instance.from_json(read_json(args.instance))
    gadget = gadget_from_instance(inst)
    pattern = load_pattern(inst, args.pattern)
    check = validate_pattern(inst, pattern)
    if not check:
        raise UsageError(f"input pattern invalid: {check.describe()}")
    out = structure_pattern(gadget, pattern)
    before, after = total_latency(inst, pattern).total, total_latency(inst, out).total
    if args.trace:
        print("before: " + " ".join(f"{c}x{len(es)}" for c, es in copy_runs(gadget, pattern)), file=sys.stderr)
        print("after:  " + " ".join(f"{c}x{len(es)}" for c, es in copy_runs(gadget, out)), file=sys.stderr)
    doc = pattern_document(inst, out, latency_before=format_number(before), structured=is_structured(gadget, out))
    if args.output:
        write_json(args.output, doc)
        if load_pattern(inst, args.output) != out:
            raise RuntimeError("structured pattern failed read-back")
    else:
        json.dump(doc, sys.stdout, indent=2)
        sys.stdout.write("\n")
    print(f"latency {format_number(before)} -> {format_number(after)}", file=sys.stderr)
    return EXIT_OK


def cmd_validate(args) -> int:
    inst, _ = graph_of(read_json(args.input))
    pattern = load_pattern(inst, args.pattern)
    check = validate_pattern(inst, pattern)
    if not check:
        print(f"invalid: {check.describe()}")
        return EXIT_USAGE
    print(f"valid total_latency={format_number(total_latency(inst, pattern).total)}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="expsearch", description="Expanding search solvers and tools.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="solve one instance and print a CSV row")
    s.add_argument("--input", required=True, help="graph or point instance (JSON)")
    s.add_argument("--output", help="write the pattern here (JSON)")
    s.add_argument("--algo", choices=ALGOS, default="unweighted")
    s.add_argument("--oracle", default="exact", help="exact, heuristic or adversarial-F")
    s.add_argument("--epsilon", default=str(DEFAULT_EPSILON), help="rational, e.g. 1/4")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--kappa", type=int, default=2, help="free breakpoints in the portal DP")
    s.add_argument("--shift-sweep", default="9", help="number of quadtree shifts, or 'all'")
    s.add_argument("--trace", help="write the portal DP trace here")
    s.add_argument("--no-optimum", action="store_true", help="skip the brute-force column")
    s.set_defaults(func=cmd_solve)

    w = sub.add_parser("sweep", help="run an algorithm over all small connected graphs")
    w.add_argument("--max-n", type=int, default=5)
    w.add_argument("--algo", default="unweighted")
    w.add_argument("--oracle", default="exact")
    w.add_argument("--epsilon", default=str(DEFAULT_EPSILON))
    w.add_argument("--samples", type=int, default=2, help="length/weight draws per graph")
    w.add_argument("--max-weight", type=int, default=2)
    w.add_argument("--seed", type=int, default=0)
    w.add_argument("--output", help="CSV path (default stdout)")
    w.set_defaults(func=cmd_sweep)

    g = sub.add_parser("gadget", help="build the k-copy gadget from an ST(1,2) instance")
    g.add_argument("--st12", required=True)
    g.add_argument("--copies", type=int, required=True)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gadget)

    t = sub.add_parser("structure", help="structure a pattern on a gadget")
    t.add_argument("--instance", required=True)
    t.add_argument("--pattern", required=True)
    t.add_argument("--output")
    t.add_argument("--trace", action="store_true", help="print copy runs before and after")
    t.set_defaults(func=cmd_structure)

    v = sub.add_parser("validate", help="check a pattern against an instance")
    v.add_argument("--input", required=True)
    v.add_argument("--pattern", required=True)
    v.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code
    try:
        return args.func(args)
    except InstanceTooLarge as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SIZE
    except (RuntimeError, InfeasibleTarget, AssertionError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (UsageError, InstanceError, InvalidPattern, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
