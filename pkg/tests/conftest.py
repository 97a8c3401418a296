import random
from pathlib import Path

import pytest
from hypothesis import strategies as st

from expsearch.core import Instance

FIXTURES = Path(__file__).parent / "fixtures"


def make(weights, edges, root="r"):
    return Instance.build(weights, edges, root)


def path_rab(la=1, lb=1, wa=1, wb=1):
    return make({"r": 0, "a": wa, "b": wb}, [("r", "a", la), ("a", "b", lb)])


def triangle(ra=1, rb=2, ab=1, wa=1, wb=1):
    return make({"r": 0, "a": wa, "b": wb}, [("r", "a", ra), ("r", "b", rb), ("a", "b", ab)])


def random_instance(rng, n, p_edge=0.5, lengths=(0, 1, 2, 3), max_weight=2):
    """Connected random graph: a random spanning tree plus extra edges."""
    ids = [str(i) for i in range(n)]
    edges = {}
    for i in range(1, n):
        j = rng.randrange(i)
        edges[(ids[j], ids[i])] = rng.choice(lengths)
    for i in range(n):
        for j in range(i + 1, n):
            if (ids[i], ids[j]) not in edges and rng.random() < p_edge:
                edges[(ids[i], ids[j])] = rng.choice(lengths)
    weights = {v: (0 if v == "0" else rng.randint(0, max_weight)) for v in ids}
    return Instance.build(weights, [(u, v, x) for (u, v), x in edges.items()], "0")


@st.composite
def instances(draw, min_n=1, max_n=6, max_weight=2, lengths=(0, 1, 2, 3)):
    n = draw(st.integers(min_n, max_n))
    seed = draw(st.integers(0, 2**32 - 1))
    return random_instance(random.Random(seed), n, lengths=lengths, max_weight=max_weight)


@pytest.fixture
def fixtures_dir():
    return FIXTURES


_VERDICTS = []


@pytest.fixture
def verdict():
    """Record one pass/fail line per acceptance criterion; shown in the summary."""

    def emit(number, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} {detail}"
        _VERDICTS.append(line)
        print(line)
        return ok

    return emit


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_VERDICTS):
            terminalreporter.write_line(line)
