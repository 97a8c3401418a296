"""Grid rounding, shifted quadtrees and portal-respecting routes.

Coordinates stay exact (``Fraction``); only lengths are floats, and those are
turned into integers in units of ``grid / resolution`` by rounding up.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .geometry import EuclideanInstance

DEFAULT_GRID_CONST = 1  # c_g
DEFAULT_PORTAL_CONST = 2  # c_p
DEFAULT_CROSSING_CONST = 2  # c_m
DEFAULT_RESOLUTION = 64
MAX_DEPTH = 64


def _frac(x) -> Fraction:
    return Fraction(repr(x)) if isinstance(x, float) else Fraction(x)


# -- rounding ----------------------------------------------------------------------


@dataclass(frozen=True)
class RoundedInstance:
    instance: EuclideanInstance  # points moved to the grid, outside-S points dropped
    origin: tuple  # rounded point -> input point
    corner: tuple  # lower-left corner of S
    side: Fraction  # L
    inner_side: Fraction  # L_0
    grid: Fraction  # g
    epsilon: Fraction

    @property
    def n(self) -> int:
        return self.instance.n

    @property
    def max_shift(self) -> int:
        """Shifts range over ``{-m, ..., m}`` grid steps with ``m g <= L / 2``."""
        return math.floor(self.side / 2 / self.grid)


def grid_round(inst: EuclideanInstance, epsilon, grid_const=DEFAULT_GRID_CONST) -> RoundedInstance:
    """Snap points to a grid of step ``c_g eps L / n^4`` inside the square ``S``.

    ``S_0`` is the smallest square around the root and the weighted points;
    ``S`` scales it by ``3n^2 + 1`` about its centre.  When ``S_0`` is a single
    point its side is taken as 1.
    """
    eps = _frac(epsilon)
    n = inst.n
    core = [inst.points[v] for v in [inst.root] + inst.weighted]
    xs = [p[0] for p in core]
    ys = [p[1] for p in core]
    inner = max(max(xs) - min(xs), max(ys) - min(ys)) or Fraction(1)
    cx = (max(xs) + min(xs)) / 2
    cy = (max(ys) + min(ys)) / 2
    side = (3 * n * n + 1) * inner
    corner = (cx - side / 2, cy - side / 2)
    g = _frac(grid_const) * eps * side / Fraction(n) ** 4
    points, weights, origin = [], [], []
    root = None
    for v, (x, y) in enumerate(inst.points):
        if not (corner[0] <= x <= corner[0] + side and corner[1] <= y <= corner[1] + side):
            continue  # weight-0 point outside S
        rx = corner[0] + round((x - corner[0]) / g) * g
        ry = corner[1] + round((y - corner[1]) / g) * g
        if v == inst.root:
            root = len(points)
        points.append((rx, ry))
        weights.append(inst.weights[v])
        origin.append(v)
    rounded = EuclideanInstance(tuple(points), tuple(weights), root)
    return RoundedInstance(rounded, tuple(origin), corner, side, inner, g, eps)


# -- quadtree ----------------------------------------------------------------------


@dataclass
class Cell:
    id: int
    x0: Fraction
    y0: Fraction
    side: Fraction
    depth: int
    parent: int | None
    points: tuple  # rounded point indices, half-open membership
    children: tuple = ()  # (BL, BR, TL, TR)
    box: tuple = ()  # (x0, y0, side) on the integer portal lattice
    portals: frozenset = frozenset()  # lattice points on the four half-midlines

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def contains(self, q) -> bool:
        """Closed containment of a lattice point."""
        x, y, s = self.box
        return x <= q[0] <= x + s and y <= q[1] <= y + s


def portal_count(n: int, epsilon, portal_const=DEFAULT_PORTAL_CONST) -> int:
    return max(2, math.ceil(float(_frac(portal_const)) * math.log2(max(n, 1)) / float(_frac(epsilon))))


def crossing_cap(n: int, epsilon, crossing_const=DEFAULT_CROSSING_CONST) -> int:
    return max(1, math.ceil(float(_frac(crossing_const)) * math.log2(max(n, 2)) / float(_frac(epsilon))))


def _half_midline_portals(box, count: int) -> frozenset:
    x0, y0, side = box
    h = side // 2
    mx, my = x0 + h, y0 + h
    step = h // (count - 1)
    out = set()
    for k in range(count):
        d = k * step
        out.update(((mx, y0 + d), (mx, my + d), (x0 + d, my), (mx + d, my)))
    return frozenset(out)


@dataclass
class ShiftedQuadtree:
    rounded: RoundedInstance
    shift: tuple  # (a, b) in grid steps
    portals_per_side: int
    resolution: int
    cells: list
    leaf_of_point: tuple
    origin: tuple  # lower-left corner of S'
    lattice: Fraction  # spacing of the portal lattice
    owners: dict = field(default_factory=dict)  # portal -> ids of cells that placed it

    @property
    def root(self) -> Cell:
        return self.cells[0]

    @property
    def depth(self) -> int:
        return max(c.depth for c in self.cells)

    @property
    def unit(self) -> Fraction:
        return self.rounded.grid / self.resolution

    def leaves(self) -> list:
        return [c for c in self.cells if c.is_leaf]

    def portal_point(self, q) -> tuple:
        return (self.origin[0] + q[0] * self.lattice, self.origin[1] + q[1] * self.lattice)

    def ancestors(self, cid: int) -> list:
        """``cid`` and every cell above it, bottom-up."""
        out = []
        while cid is not None:
            out.append(cid)
            cid = self.cells[cid].parent
        return out

    def lca(self, a: int, b: int) -> int:
        up = self.ancestors(a)
        return next(c for c in self.ancestors(b) if c in up)

    def leaves_containing(self, q) -> list:
        out = []
        stack = [0]
        while stack:
            c = self.cells[stack.pop()]
            if not c.contains(q):
                continue
            if c.is_leaf:
                out.append(c.id)
            else:
                stack.extend(c.children)
        return sorted(out)


def build_quadtree(
    rounded: RoundedInstance,
    shift=(0, 0),
    portals_per_side: int | None = None,
    portal_const=DEFAULT_PORTAL_CONST,
    resolution: int = DEFAULT_RESOLUTION,
) -> ShiftedQuadtree:
    """Quadtree of ``S'``: ``S`` doubled about its centre, moved left by ``a g``
    and up by ``b g``.  Cells split until they hold at most one occupied grid
    point."""
    a, b = shift
    m = rounded.max_shift
    if abs(a) > m or abs(b) > m:
        raise ValueError(f"shift components must lie in [-{m}, {m}]")
    inst = rounded.instance
    count = portals_per_side or portal_count(inst.n, rounded.epsilon, portal_const)
    if count < 2:
        raise ValueError("need at least two portals per side")
    L, g = rounded.side, rounded.grid
    x0 = rounded.corner[0] - L / 2 - a * g
    y0 = rounded.corner[1] - L / 2 + b * g
    cells = [Cell(0, x0, y0, 2 * L, 0, None, tuple(range(inst.n)))]
    queue = [0]
    while queue:
        cell = cells[queue.pop()]
        locations = {inst.points[i] for i in cell.points}
        if len(locations) <= 1:
            continue
        if cell.depth >= MAX_DEPTH:
            raise RuntimeError("quadtree too deep")
        h = cell.side / 2
        mx, my = cell.x0 + h, cell.y0 + h
        kids = []
        for dy in (0, 1):
            for dx in (0, 1):
                pts = tuple(
                    i for i in cell.points
                    if (inst.points[i][0] >= mx) == bool(dx) and (inst.points[i][1] >= my) == bool(dy)
                )
                kid = Cell(len(cells), cell.x0 + dx * h, cell.y0 + dy * h, h, cell.depth + 1, cell.id, pts)
                cells.append(kid)
                kids.append(kid.id)
                queue.append(kid.id)
        cell.children = tuple(kids)
    # every cell corner and portal is a multiple of this spacing
    deepest = max(c.depth for c in cells)
    full = 2 ** (deepest + 1) * (count - 1)
    lattice = 2 * L / full
    owners: dict = {}
    for c in cells:
        c.box = (int((c.x0 - x0) / lattice), int((c.y0 - y0) / lattice), full >> c.depth)
        if c.children:
            c.portals = _half_midline_portals(c.box, count)
            for q in c.portals:
                owners.setdefault(q, set()).add(c.id)
    leaf_of = [None] * inst.n
    for c in cells:
        if c.is_leaf:
            for i in c.points:
                leaf_of[i] = c.id
    return ShiftedQuadtree(rounded, (a, b), count, resolution, cells, tuple(leaf_of), (x0, y0), lattice, owners)


# -- portal-respecting routes --------------------------------------------------------


@dataclass(frozen=True)
class Route:
    """Point-to-point route: ``nodes[k] -> nodes[k+1]`` runs straight inside ``leaves[k]``."""

    nodes: tuple  # node ids of the route graph, endpoints first and last
    leaves: tuple
    lengths: tuple  # per arc, in units

    @property
    def length(self) -> int:
        return sum(self.lengths)

    def reversed(self) -> "Route":
        return Route(self.nodes[::-1], self.leaves[::-1], self.lengths[::-1])


class RouteGraph:
    """Points and portals, joined by straight arcs inside a common leaf.

    A portal is usable from leaf ``A`` only if, for every other leaf ``B``
    touching it, it was placed on the midline of the smallest cell holding
    both.  Passing from leaf to leaf therefore only happens at portals of
    every cell boundary crossed.  Node ids ``0..n-1`` are the points.
    """

    def __init__(self, tree: ShiftedQuadtree):
        self.tree = tree
        pts = tree.rounded.instance.points
        usable: dict = {c.id: [] for c in tree.leaves()}
        for q, own in tree.owners.items():
            touching = tree.leaves_containing(q)
            for A in touching:
                if all(tree.lca(A, B) in own for B in touching if B != A):
                    usable[A].append(q)
        self.n_points = len(pts)
        self.coord: list = list(pts)
        self.lattice_of: list = [None] * len(pts)
        index = {}
        self.leaf_nodes: dict = {}
        for A, qs in usable.items():
            ids = list(tree.cells[A].points)
            for q in sorted(qs):
                if q not in index:
                    index[q] = len(self.coord)
                    self.coord.append(tree.portal_point(q))
                    self.lattice_of.append(q)
                ids.append(index[q])
            self.leaf_nodes[A] = tuple(ids)
        self.node_leaves: dict = {}
        for A, ids in self.leaf_nodes.items():
            for x in ids:
                self.node_leaves.setdefault(x, []).append(A)
        self.fcoord = [(float(x), float(y)) for x, y in self.coord]
        self.scale = 1 / float(tree.unit)
        self._from: dict = {}

    def is_point(self, x: int) -> bool:
        return x < self.n_points

    def arc(self, x: int, y: int) -> int:
        """Straight-line length in units, rounded up."""
        (ax, ay), (bx, by) = self.fcoord[x], self.fcoord[y]
        return math.ceil(math.hypot(ax - bx, ay - by) * self.scale - 1e-9)

    def _dijkstra(self, source: int) -> tuple:
        dist = {source: 0}
        prev: dict = {}
        heap = [(0, source)]
        done = set()
        while heap:
            d, x = heapq.heappop(heap)
            if x in done:
                continue
            done.add(x)
            if self.is_point(x) and x != source:
                continue  # routes do not pass through other points
            for A in self.node_leaves.get(x, ()):
                for y in self.leaf_nodes[A]:
                    if y in done:
                        continue
                    nd = d + self.arc(x, y)
                    if nd < dist.get(y, math.inf) or (nd == dist[y] and (x, A) < prev[y]):
                        dist[y] = nd
                        prev[y] = (x, A)
                        heapq.heappush(heap, (nd, y))
        return dist, prev

    def route(self, u: int, v: int) -> Route:
        """Shortest portal-respecting route between rounded points ``u`` and ``v``."""
        if u == v:
            raise ValueError("route endpoints must differ")
        if v < u:
            return self.route(v, u).reversed()
        if u not in self._from:
            self._from[u] = self._dijkstra(u)
        dist, prev = self._from[u]
        if v not in dist:
            raise RuntimeError("no portal-respecting route; quadtree is disconnected")
        nodes, leaves, lengths = [v], [], []
        x = v
        while x != u:
            p, A = prev[x]
            leaves.append(A)
            lengths.append(self.arc(p, x))
            nodes.append(p)
            x = p
        return Route(tuple(reversed(nodes)), tuple(reversed(leaves)), tuple(reversed(lengths)))
