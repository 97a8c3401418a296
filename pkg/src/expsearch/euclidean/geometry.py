"""Points in the plane as expanding search instances."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction

from ..core import Instance, InstanceError


def _coord(x) -> Fraction:
    if isinstance(x, bool):
        raise InstanceError(f"bad coordinate {x!r}")
    if isinstance(x, float):
        return Fraction(repr(x))
    if isinstance(x, (int, str, Fraction)):
        return Fraction(x)
    raise InstanceError(f"bad coordinate {x!r}")


def distance(p, q) -> float:
    return math.hypot(float(p[0] - q[0]), float(p[1] - q[1]))


@dataclass(frozen=True)
class EuclideanInstance:
    points: tuple  # ((x, y), ...) as Fractions
    weights: tuple
    root: int = 0

    def __post_init__(self):
        if not self.points:
            raise InstanceError("no points")
        if len(self.weights) != len(self.points):
            raise InstanceError("one weight per point required")
        if not 0 <= self.root < len(self.points):
            raise InstanceError(f"root index {self.root} out of range")
        if any(w < 0 for w in self.weights):
            raise InstanceError("negative weight")

    @classmethod
    def build(cls, points, weights, root: int = 0) -> "EuclideanInstance":
        return cls(tuple((_coord(x), _coord(y)) for x, y in points), tuple(weights), root)

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def weighted(self) -> list:
        return [v for v, w in enumerate(self.weights) if w > 0 and v != self.root]

    def with_weights(self, weights) -> "EuclideanInstance":
        return EuclideanInstance(self.points, tuple(weights), self.root)

    def dist(self, u: int, v: int) -> float:
        return distance(self.points[u], self.points[v])

    def to_instance(self) -> Instance:
        """Complete graph with Euclidean edge lengths; vertex ``i`` has id ``str(i)``."""
        weights = {str(i): w for i, w in enumerate(self.weights)}
        edges = [
            (str(u), str(v), self.dist(u, v))
            for u in range(self.n)
            for v in range(u + 1, self.n)
        ]
        return Instance.build(weights, edges, str(self.root))

    def to_json(self) -> dict:
        def num(x):
            return x.numerator if x.denominator == 1 else str(x)

        return {
            "root": self.root,
            "points": [{"x": num(x), "y": num(y), "weight": w} for (x, y), w in zip(self.points, self.weights)],
        }

    @classmethod
    def from_json(cls, data) -> "EuclideanInstance":
        try:
            pts = [(p["x"], p["y"]) for p in data["points"]]
            ws = [p.get("weight", 0) for p in data["points"]]
            root = data.get("root", 0)
        except (KeyError, TypeError) as exc:
            raise InstanceError(f"malformed Euclidean JSON: {exc}") from None
        for w in ws:
            if isinstance(w, bool) or not isinstance(w, int):
                raise InstanceError(f"weight must be a nonnegative integer, got {w!r}")
        if isinstance(root, bool) or not isinstance(root, int):
            raise InstanceError("root must be a point index")
        return cls.build(pts, ws, root)


def is_euclidean_json(data) -> bool:
    return isinstance(data, dict) and "points" in data


def load_euclidean(path) -> EuclideanInstance:
    with open(path) as fh:
        return EuclideanInstance.from_json(json.load(fh))


def random_euclidean(rng, n: int, size: int = 20, max_weight: int = 1, p_zero: float = 0.2) -> EuclideanInstance:
    """``n`` integer points in ``[0, size]^2``; point 0 is the root with weight 0."""
    pts = [(rng.randint(0, size), rng.randint(0, size)) for _ in range(n)]
    ws = [0] + [0 if rng.random() < p_zero else rng.randint(1, max_weight) for _ in range(n - 1)]
    if n > 1 and not any(ws):
        ws[1] = 1
    return EuclideanInstance.build(pts, ws, 0)
