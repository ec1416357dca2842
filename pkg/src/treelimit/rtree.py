"""Finite metric trees with infinite rays, and isometric group actions on them.

A :class:`SimplicialTree` is a finite core (vertices and finite edges) plus
infinite leaf edges, each attached at one vertex and standing for one end.
Points are :class:`TreePoint` values: a vertex, or an offset along an edge
measured from the edge's first endpoint.

An isometry is stored by where it sends each vertex (any tree point, not
necessarily a vertex) and which infinite edge each infinite edge goes to.
The image of an edge point is then forced: the point at the same offset on
the image arc, or on the image ray.  Because vertex images may land inside
edges, compositions stay in the class without explicit subdivision.

Subsets of the tree (fixed sets, axes, minimal subtrees) are
:class:`Subtree` values: a set of vertices plus one closed interval per edge.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from .group_rep import Presentation, Word

EPS = 1e-12
INF = math.inf


class TreeError(ValueError):
    pass


class InvalidSubtreeError(TreeError):
    pass


class InvalidIsometryError(TreeError):
    pass


class EllipticActionError(TreeError):
    """Every sampled word acts elliptically, so there is no axis to build from."""


@dataclass(frozen=True)
class TreePoint:
    """A vertex (``vertex`` set) or a point at ``offset`` along ``edge``."""

    edge: int | None = None
    offset: float = 0.0
    vertex: int | None = None

    @classmethod
    def at_vertex(cls, v: int) -> TreePoint:
        return cls(vertex=int(v))

    @property
    def is_vertex(self) -> bool:
        return self.vertex is not None


@dataclass(frozen=True)
class TreeEdge:
    a: int
    b: int | None  # None: infinite edge, a ray leaving ``a``
    length: float

    @property
    def infinite(self) -> bool:
        return self.b is None


class SimplicialTree:
    """Finite core plus infinite leaf edges; immutable after construction."""

    def __init__(self, n_vertices: int, edges: Iterable[tuple]):
        self.n_vertices = int(n_vertices)
        es = []
        for e in edges:
            a, b, length = e
            if b is None:
                es.append(TreeEdge(int(a), None, INF))
            else:
                if not (length > 0 and math.isfinite(length)):
                    raise TreeError(f"finite edge {e} needs a positive length")
                es.append(TreeEdge(int(a), int(b), float(length)))
        self.edges: tuple[TreeEdge, ...] = tuple(es)
        if self.n_vertices < 1:
            raise TreeError("a tree needs at least one vertex")
        finite = [e for e in self.edges if not e.infinite]
        for e in self.edges:
            if not (0 <= e.a < self.n_vertices) or (e.b is not None and not 0 <= e.b < self.n_vertices):
                raise TreeError(f"edge {e} references a missing vertex")
        if len(finite) != self.n_vertices - 1:
            raise TreeError("finite edges must form a spanning tree of the vertices")
        self._build_paths(finite)

    def _build_paths(self, finite):
        n = self.n_vertices
        if n == 1:
            self._dist = np.zeros((1, 1))
            self._pred = -np.ones((1, 1), dtype=int)
        else:
            rows = [e.a for e in finite] + [e.b for e in finite]
            cols = [e.b for e in finite] + [e.a for e in finite]
            vals = [e.length for e in finite] * 2
            graph = csr_matrix((vals, (rows, cols)), shape=(n, n))
            dist, pred = shortest_path(graph, directed=False, return_predecessors=True)
            if not np.all(np.isfinite(dist)):
                raise TreeError("finite edges must connect all vertices")
            self._dist, self._pred = dist, pred
        self._edge_between = {}
        for k, e in enumerate(self.edges):
            if not e.infinite:
                self._edge_between[(e.a, e.b)] = k
                self._edge_between[(e.b, e.a)] = k
        self._incident: list[list[int]] = [[] for _ in range(n)]
        for k, e in enumerate(self.edges):
            self._incident[e.a].append(k)
            if e.b is not None:
                self._incident[e.b].append(k)

    # ----------------------------------------------------------- basics

    @property
    def infinite_edges(self) -> list[int]:
        return [k for k, e in enumerate(self.edges) if e.infinite]

    @property
    def total_finite_length(self) -> float:
        return float(sum(e.length for e in self.edges if not e.infinite))

    def degree(self, v: int) -> int:
        return len(self._incident[v])

    def incident(self, v: int) -> list[int]:
        return list(self._incident[v])

    def vertex_distance(self, u: int, v: int) -> float:
        return float(self._dist[u, v])

    def vertex_path(self, u: int, v: int) -> list[int]:
        path = [v]
        while path[-1] != u:
            path.append(int(self._pred[u, path[-1]]))
        return path[::-1]

    def point(self, edge: int, offset: float) -> TreePoint:
        """Canonical point: offsets at an endpoint become that vertex."""
        e = self.edges[edge]
        offset = float(offset)
        if offset < -EPS or (not e.infinite and offset > e.length + EPS * max(1.0, e.length)):
            raise TreeError(f"offset {offset} outside edge {edge}")
        if abs(offset) <= EPS:
            return TreePoint.at_vertex(e.a)
        if not e.infinite and abs(offset - e.length) <= EPS * max(1.0, e.length):
            return TreePoint.at_vertex(e.b)
        return TreePoint(edge=edge, offset=offset)

    def canon(self, p: TreePoint) -> TreePoint:
        return p if p.is_vertex else self.point(p.edge, p.offset)

    def vertex_point(self, v: int) -> TreePoint:
        return TreePoint.at_vertex(v)

    def _exits(self, p: TreePoint):
        """(vertex, distance) pairs through which a path leaves ``p``."""
        if p.is_vertex:
            return [(p.vertex, 0.0)]
        e = self.edges[p.edge]
        if e.infinite:
            return [(e.a, p.offset)]
        return [(e.a, p.offset), (e.b, e.length - p.offset)]

    # ---------------------------------------------------------- metric

    def distance(self, p: TreePoint, q: TreePoint) -> float:
        p, q = self.canon(p), self.canon(q)
        if not p.is_vertex and not q.is_vertex and p.edge == q.edge:
            return abs(p.offset - q.offset)
        best = INF
        for u, du in self._exits(p):
            for v, dv in self._exits(q):
                best = min(best, du + self._dist[u, v] + dv)
        return float(best)

    def _route(self, p: TreePoint, q: TreePoint):
        """Piecewise description of the arc [p, q] as a list of legs.

        Each leg is ``(edge, start_offset, direction, length)`` walking along
        ``edge`` from ``start_offset`` (direction +1 toward b / outward).
        """
        p, q = self.canon(p), self.canon(q)
        if not p.is_vertex and not q.is_vertex and p.edge == q.edge:
            d = q.offset - p.offset
            return [(p.edge, p.offset, 1 if d >= 0 else -1, abs(d))]
        best = None
        for u, du in self._exits(p):
            for v, dv in self._exits(q):
                tot = du + self._dist[u, v] + dv
                if best is None or tot < best[0] - EPS:
                    best = (tot, u, du, v, dv)
        _, u, du, v, dv = best
        legs = []
        if not p.is_vertex:
            e = self.edges[p.edge]
            legs.append((p.edge, p.offset, -1 if u == e.a else 1, du))
        path = self.vertex_path(u, v)
        for x, y in zip(path, path[1:]):
            k = self._edge_between[(x, y)]
            e = self.edges[k]
            if e.a == x:
                legs.append((k, 0.0, 1, e.length))
            else:
                legs.append((k, e.length, -1, e.length))
        if not q.is_vertex:
            e = self.edges[q.edge]
            if v == e.a:
                legs.append((q.edge, 0.0, 1, dv))
            else:
                legs.append((q.edge, e.length, -1, dv))
        return legs

    def point_along(self, p: TreePoint, q: TreePoint, s: float) -> TreePoint:
        """Point on the arc [p, q] at distance ``s`` from ``p``."""
        p, q = self.canon(p), self.canon(q)
        if s <= EPS:
            return p
        total = self.distance(p, q)
        if s >= total - EPS * max(1.0, total):
            return q
        for edge, start, direction, length in self._route(p, q):
            if s <= length:
                return self.point(edge, start + direction * s)
            s -= length
        return q

    def ray_point(self, p: TreePoint, end: int, s: float) -> TreePoint:
        """Point at distance ``s`` from ``p`` on the ray from ``p`` into ``end``."""
        p = self.canon(p)
        e = self.edges[end]
        if not e.infinite:
            raise TreeError(f"edge {end} is not an infinite edge")
        if not p.is_vertex and p.edge == end:
            return self.point(end, p.offset + s)
        base = TreePoint.at_vertex(e.a)
        d = self.distance(p, base)
        if s <= d:
            return self.point_along(p, base, s)
        return self.point(end, s - d)

    def on_ray(self, p: TreePoint, end: int, x: TreePoint) -> bool:
        """Whether ``x`` lies on the ray from ``p`` into ``end``."""
        d = self.distance(p, x)
        return self.distance(self.ray_point(p, end, d), x) <= 1e-9 * max(1.0, d)

    def busemann(self, p: TreePoint, end: int) -> float:
        """lim_s d(p, x_s) - s for x_s running out along the infinite edge ``end``."""
        p = self.canon(p)
        if not p.is_vertex and p.edge == end:
            return -p.offset
        return self.distance(p, TreePoint.at_vertex(self.edges[end].a))

    def vertices_points(self) -> list[TreePoint]:
        return [TreePoint.at_vertex(v) for v in range(self.n_vertices)]

    def leaves(self) -> list[int]:
        return [v for v in range(self.n_vertices) if self.degree(v) == 1]

    # ------------------------------------------------------------ json

    def to_dict(self) -> dict:
        edges = []
        for e in self.edges:
            if e.infinite:
                edges.append({"a": e.a, "b": "infinity", "len": "inf"})
            else:
                edges.append({"a": e.a, "b": e.b, "len": e.length})
        return {"vertices": list(range(self.n_vertices)), "edges": edges}

    @classmethod
    def from_dict(cls, data: Mapping) -> SimplicialTree:
        verts = list(data["vertices"])
        if verts != list(range(len(verts))):
            raise TreeError("vertex ids must be 0..n-1 in order")
        edges = []
        for e in data["edges"]:
            if e["b"] == "infinity":
                if e["len"] != "inf":
                    raise TreeError("infinite edges must have len 'inf'")
                edges.append((e["a"], None, INF))
            else:
                edges.append((e["a"], e["b"], float(e["len"])))
        return cls(len(verts), edges)


def line_tree(breaks: Sequence[float] = (0.0,)) -> tuple[SimplicialTree, callable]:
    """The real line with vertices at ``breaks``.

    Returns the tree and a function mapping a real coordinate to a point.
    Infinite edge 0 is the negative end, infinite edge 1 the positive end.
    """
    xs = sorted(float(x) for x in breaks)
    n = len(xs)
    edges = [(0, None, INF), (n - 1, None, INF)]
    edges += [(i, i + 1, xs[i + 1] - xs[i]) for i in range(n - 1)]
    tree = SimplicialTree(n, edges)

    def coord(x: float) -> TreePoint:
        x = float(x)
        if x <= xs[0]:
            return tree.point(0, xs[0] - x)
        if x >= xs[-1]:
            return tree.point(1, x - xs[-1])
        i = int(np.searchsorted(xs, x, side="right")) - 1
        i = min(i, n - 2)
        return tree.point(2 + i, x - xs[i])

    return tree, coord


def line_coordinate(tree: SimplicialTree, p: TreePoint, breaks: Sequence[float]) -> float:
    """Inverse of the ``coord`` function of :func:`line_tree`."""
    xs = sorted(float(x) for x in breaks)
    p = tree.canon(p)
    if p.is_vertex:
        return xs[p.vertex]
    if p.edge == 0:
        return xs[0] - p.offset
    if p.edge == 1:
        return xs[-1] + p.offset
    return xs[p.edge - 2] + p.offset


# ------------------------------------------------------------------ subsets


@dataclass(frozen=True)
class Subtree:
    """Closed subset given by member vertices and one interval per edge."""

    tree: SimplicialTree = field(repr=False)
    vertices: frozenset = frozenset()
    intervals: Mapping[int, tuple[float, float]] = field(default_factory=dict)

    def __post_init__(self):
        iv = {}
        verts = set(self.vertices)
        for k, (lo, hi) in dict(self.intervals).items():
            e = self.tree.edges[k]
            lo = max(0.0, float(lo))
            hi = min(e.length, float(hi))
            if hi < lo - EPS:
                continue
            hi = max(hi, lo)
            if lo <= EPS:
                lo = 0.0
                verts.add(e.a)
            if not e.infinite and hi >= e.length - EPS * max(1.0, e.length):
                hi = e.length
                verts.add(e.b)
            if hi - lo > EPS or not (lo == 0.0 or hi == e.length):
                iv[k] = (lo, hi)
        # an edge whose two endpoints are members is contained entirely
        for k, e in enumerate(self.tree.edges):
            if not e.infinite and e.a in verts and e.b in verts:
                iv[k] = (0.0, e.length)
        object.__setattr__(self, "vertices", frozenset(verts))
        object.__setattr__(self, "intervals", iv)

    @classmethod
    def whole(cls, tree: SimplicialTree) -> Subtree:
        return cls(tree, frozenset(range(tree.n_vertices)), {k: (0.0, e.length) for k, e in enumerate(tree.edges)})

    @classmethod
    def from_point(cls, tree: SimplicialTree, p: TreePoint) -> Subtree:
        p = tree.canon(p)
        if p.is_vertex:
            return cls(tree, frozenset([p.vertex]))
        return cls(tree, frozenset(), {p.edge: (p.offset, p.offset)})

    def is_empty(self) -> bool:
        return not self.vertices and not self.intervals

    def contains(self, p: TreePoint, tol: float = 1e-9) -> bool:
        p = self.tree.canon(p)
        if p.is_vertex:
            if p.vertex in self.vertices:
                return True
            # a vertex is in the set if an interval reaches it
            return self.distance_to(p) <= tol
        if p.edge in self.intervals:
            lo, hi = self.intervals[p.edge]
            return lo - tol <= p.offset <= hi + tol
        return self.distance_to(p) <= tol

    def extreme_points(self) -> list[TreePoint]:
        pts = [TreePoint.at_vertex(v) for v in sorted(self.vertices)]
        for k, (lo, hi) in sorted(self.intervals.items()):
            pts.append(self.tree.point(k, lo))
            if math.isfinite(hi):
                pts.append(self.tree.point(k, hi))
        return pts

    def ends(self) -> list[int]:
        return sorted(k for k, (lo, hi) in self.intervals.items() if hi == INF)

    def representative(self) -> TreePoint:
        pts = self.extreme_points()
        if not pts:
            raise InvalidSubtreeError("empty subset")
        return pts[0]

    def distance_to(self, p: TreePoint) -> float:
        return self.tree.distance(p, project_to_subtree(self.tree, p, self, check=False))

    def components(self) -> int:
        """Number of connected pieces."""
        parent: dict = {}

        def find(x):
            parent.setdefault(x, x)
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        def union(x, y):
            parent[find(x)] = find(y)

        for v in self.vertices:
            find(("v", v))
        for k, (lo, hi) in self.intervals.items():
            e = self.tree.edges[k]
            find(("e", k))
            if lo <= EPS and e.a in self.vertices:
                union(("e", k), ("v", e.a))
            if not e.infinite and hi >= e.length - EPS and e.b in self.vertices:
                union(("e", k), ("v", e.b))
        return len({find(x) for x in list(parent)})

    def total_length(self) -> float:
        return float(sum(hi - lo for lo, hi in self.intervals.values()))

    def intersect(self, other: Subtree) -> Subtree:
        iv = {}
        for k in set(self.intervals) & set(other.intervals):
            lo = max(self.intervals[k][0], other.intervals[k][0])
            hi = min(self.intervals[k][1], other.intervals[k][1])
            if hi >= lo - EPS:
                iv[k] = (lo, max(lo, hi))
        verts = self.vertices & other.vertices
        return Subtree(self.tree, verts, iv)

    def union(self, other: Subtree) -> Subtree:
        """Set union; intervals on a shared edge must overlap or touch."""
        iv = dict(self.intervals)
        for k, (lo, hi) in other.intervals.items():
            if k in iv:
                a, b = iv[k]
                iv[k] = (min(a, lo), max(b, hi))
            else:
                iv[k] = (lo, hi)
        return Subtree(self.tree, self.vertices | other.vertices, iv)

    def is_line(self) -> bool:
        """Exactly two ends and no branching: a bi-infinite geodesic."""
        if len(self.ends()) != 2 or self.components() != 1:
            return False
        for v in self.vertices:
            inside = [k for k in self.tree.incident(v) if k in self.intervals and self._touches(k, v)]
            if len(inside) > 2:
                return False
        return True

    def _touches(self, k: int, v: int) -> bool:
        e = self.tree.edges[k]
        lo, hi = self.intervals[k]
        return (e.a == v and lo <= EPS) or (e.b == v and hi >= e.length - EPS)

    def same_as(self, other: Subtree, tol: float = 1e-9) -> bool:
        if self.vertices != other.vertices or set(self.intervals) != set(other.intervals):
            return False
        for k, (lo, hi) in self.intervals.items():
            lo2, hi2 = other.intervals[k]
            if abs(lo - lo2) > tol:
                return False
            if not (hi == hi2 or abs(hi - hi2) <= tol):
                return False
        return True


def arc(tree: SimplicialTree, p: TreePoint, q: TreePoint) -> Subtree:
    """The arc [p, q] as a subset."""
    p, q = tree.canon(p), tree.canon(q)
    sub = Subtree.from_point(tree, p).union(Subtree.from_point(tree, q))
    iv: dict[int, tuple[float, float]] = {}
    verts = set()
    for edge, start, direction, length in tree._route(p, q):
        a, b = sorted((start, start + direction * length))
        if edge in iv:
            a, b = min(a, iv[edge][0]), max(b, iv[edge][1])
        iv[edge] = (a, b)
    return sub.union(Subtree(tree, frozenset(verts), iv))


def hull(tree: SimplicialTree, pieces: Sequence[Subtree]) -> Subtree:
    """Smallest subtree containing every piece (each piece assumed connected)."""
    pieces = [p for p in pieces if not p.is_empty()]
    if not pieces:
        return Subtree(tree)
    out = pieces[0]
    reps = [p.representative() for p in pieces]
    for p in pieces[1:]:
        out = out.union(p)
    for x, y in itertools.combinations(reps, 2):
        out = out.union(arc(tree, x, y))
    return out


def project_to_subtree(tree: SimplicialTree, p: TreePoint, sub: Subtree, check: bool = True) -> TreePoint:
    """Nearest point of the closed subtree ``sub`` to ``p``."""
    if check:
        if sub.is_empty():
            raise InvalidSubtreeError("cannot project onto an empty subset")
        if sub.components() != 1:
            raise InvalidSubtreeError("subset is not connected")
    p = tree.canon(p)
    best = (INF, None)
    for v in sorted(sub.vertices):
        q = TreePoint.at_vertex(v)
        d = tree.distance(p, q)
        if d < best[0]:
            best = (d, q)
    for k, (lo, hi) in sorted(sub.intervals.items()):
        e = tree.edges[k]
        if not p.is_vertex and p.edge == k:
            foot = p.offset
        elif e.infinite:
            foot = 0.0
        else:
            da = tree.distance(p, TreePoint.at_vertex(e.a))
            db = tree.distance(p, TreePoint.at_vertex(e.b))
            foot = 0.0 if da <= db else e.length
        s = min(max(foot, lo), hi)
        q = tree.point(k, s)
        d = tree.distance(p, q)
        if d < best[0] - EPS:
            best = (d, q)
    if best[1] is None:
        raise InvalidSubtreeError("cannot project onto an empty subset")
    return best[1]


# --------------------------------------------------------------- isometries


class TreeIsometry:
    """Isometry of a :class:`SimplicialTree`.

    ``vertex_map[v]`` is the image point of vertex ``v``; ``end_map[k]`` the
    infinite edge receiving infinite edge ``k``.
    """

    def __init__(self, tree: SimplicialTree, vertex_map: Sequence[TreePoint], end_map: Mapping[int, int] | None = None,
                 validate: bool = True):
        self.tree = tree
        self.vertex_map = tuple(tree.canon(p) for p in vertex_map)
        self.end_map = {int(k): int(v) for k, v in (end_map or {}).items()}
        if len(self.vertex_map) != tree.n_vertices:
            raise InvalidIsometryError("one image per vertex required")
        if set(self.end_map) != set(tree.infinite_edges):
            raise InvalidIsometryError("end map must cover every infinite edge")
        self._inverse_vertex_map = None
        if validate:
            self.validate()

    @classmethod
    def identity(cls, tree: SimplicialTree) -> TreeIsometry:
        return cls(tree, tree.vertices_points(), {k: k for k in tree.infinite_edges}, validate=False)

    def validate(self, tol: float = 1e-9):
        t = self.tree
        n = t.n_vertices
        for u in range(n):
            for v in range(u + 1, n):
                d0 = t.vertex_distance(u, v)
                d1 = t.distance(self.vertex_map[u], self.vertex_map[v])
                if abs(d0 - d1) > tol * max(1.0, d0):
                    raise InvalidIsometryError(f"vertices {u}, {v}: distance {d0} maps to {d1}")
        if sorted(self.end_map.values()) != sorted(self.end_map):
            raise InvalidIsometryError("end map is not a permutation of the infinite edges")
        # a ray into end k must go to a ray into end_map[k]: Busemann values
        # relative to the attaching vertex are carried along
        for k, img in self.end_map.items():
            a = t.edges[k].a
            ref = t.busemann(self.vertex_map[a], img)
            for u in range(n):
                b0 = t.vertex_distance(u, a)
                b1 = t.busemann(self.vertex_map[u], img) - ref
                if abs(b0 - b1) > tol * max(1.0, b0):
                    raise InvalidIsometryError(f"infinite edge {k} does not map onto a ray of edge {img}")
        # directions at each vertex must stay distinct (no folding)
        finite = [e.length for e in t.edges if not e.infinite]
        eta = 0.25 * min(finite) if finite else 0.25
        for v in range(n):
            germs = []
            for k in t.incident(v):
                e = t.edges[k]
                germs.append(t.point(k, eta if e.a == v else e.length - eta))
            images = [self(x) for x in germs]
            for i in range(len(germs)):
                for j in range(i + 1, len(germs)):
                    if abs(t.distance(images[i], images[j]) - 2.0 * eta) > tol * max(1.0, eta):
                        raise InvalidIsometryError(f"two edges at vertex {v} are folded together")
        # surjectivity: every vertex has a preimage
        self.inverse_vertex_map()

    def __call__(self, p: TreePoint) -> TreePoint:
        t = self.tree
        p = t.canon(p)
        if p.is_vertex:
            return self.vertex_map[p.vertex]
        e = t.edges[p.edge]
        if e.infinite:
            return t.ray_point(self.vertex_map[e.a], self.end_map[p.edge], p.offset)
        return t.point_along(self.vertex_map[e.a], self.vertex_map[e.b], p.offset)

    def inverse_vertex_map(self) -> tuple[TreePoint, ...]:
        if self._inverse_vertex_map is not None:
            return self._inverse_vertex_map
        t = self.tree
        out = []
        for w in range(t.n_vertices):
            target = TreePoint.at_vertex(w)
            found = None
            for v, img in enumerate(self.vertex_map):
                if t.distance(img, target) <= 1e-9:
                    found = TreePoint.at_vertex(v)
                    break
            if found is None:
                for k, e in enumerate(t.edges):
                    ga = self.vertex_map[e.a]
                    if e.infinite:
                        if t.on_ray(ga, self.end_map[k], target):
                            found = t.point(k, t.distance(ga, target))
                            break
                    else:
                        gb = self.vertex_map[e.b]
                        if abs(t.distance(ga, target) + t.distance(target, gb) - e.length) <= 1e-9 * max(1.0, e.length):
                            found = t.point(k, t.distance(ga, target))
                            break
            if found is None:
                raise InvalidIsometryError(f"vertex {w} has no preimage: map is not onto")
            out.append(found)
        self._inverse_vertex_map = tuple(out)
        return self._inverse_vertex_map

    def inverse(self) -> TreeIsometry:
        inv_end = {v: k for k, v in self.end_map.items()}
        return TreeIsometry(self.tree, self.inverse_vertex_map(), inv_end, validate=False)

    def compose(self, other: TreeIsometry) -> TreeIsometry:
        """``self o other``: apply ``other`` first."""
        vm = [self(p) for p in other.vertex_map]
        em = {k: self.end_map[v] for k, v in other.end_map.items()}
        return TreeIsometry(self.tree, vm, em, validate=False)

    def __matmul__(self, other: TreeIsometry) -> TreeIsometry:
        return self.compose(other)

    def equals(self, other: TreeIsometry, tol: float = 1e-9) -> bool:
        if self.end_map != other.end_map:
            return False
        return all(self.tree.distance(p, q) <= tol for p, q in zip(self.vertex_map, other.vertex_map))

    def displacement(self, p: TreePoint) -> float:
        return self.tree.distance(p, self(p))

    def is_identity(self, tol: float = 1e-9) -> bool:
        return self.equals(TreeIsometry.identity(self.tree), tol)

    def image_of(self, sub: Subtree) -> Subtree:
        """Image of a connected subset."""
        t = self.tree
        pieces = [Subtree.from_point(t, self(p)) for p in sub.extreme_points()]
        out = hull(t, pieces)
        for k in sub.ends():
            lo = sub.intervals[k][0]
            start = self(t.point(k, lo))
            img = self.end_map[k]
            e = t.edges[img]
            base = TreePoint.at_vertex(e.a)
            out = out.union(arc(t, start, base) if not (not start.is_vertex and start.edge == img) else Subtree(t))
            s0 = start.offset if (not start.is_vertex and start.edge == img) else 0.0
            out = out.union(Subtree(t, frozenset(), {img: (s0, INF)}))
        return out

    # ------------------------------------------------------------- json

    def to_dict(self) -> dict:
        vm = {}
        for v, p in enumerate(self.vertex_map):
            vm[str(v)] = p.vertex if p.is_vertex else {"edge": p.edge, "offset": p.offset}
        em = {}
        for k, e in enumerate(self.tree.edges):
            if e.infinite:
                em[str(k)] = {"edge": self.end_map[k], "reversed": False}
                continue
            ga, gb = self.vertex_map[e.a], self.vertex_map[e.b]
            if ga.is_vertex and gb.is_vertex:
                img = self.tree._edge_between.get((ga.vertex, gb.vertex))
                if img is not None:
                    em[str(k)] = {"edge": img, "reversed": self.tree.edges[img].a != ga.vertex}
        return {"vertex_map": vm, "edge_map": em}

    @classmethod
    def from_dict(cls, tree: SimplicialTree, data: Mapping) -> TreeIsometry:
        vm = []
        for v in range(tree.n_vertices):
            x = data["vertex_map"][str(v)]
            vm.append(TreePoint.at_vertex(x) if isinstance(x, int) else TreePoint(edge=int(x["edge"]), offset=float(x["offset"])))
        em = {}
        for k in tree.infinite_edges:
            em[k] = int(data["edge_map"][str(k)]["edge"])
        return cls(tree, vm, em)


# ------------------------------------------------------- lengths and actions


def displacement_profile(tree: SimplicialTree, g: TreeIsometry):
    """Minimum of ``x -> d(x, g x)`` and the set where it is attained.

    The displacement is ``l + 2 d(x, C)``, convex and piecewise linear along
    each edge with slopes in {-2, 0, 2}.  On an edge with end values D0, DL
    the minimum sits where the two outer slopes meet, ``(D0 - DL + 2L) / 4``
    clamped to the edge; rays are cut at a length past which nothing changes.
    """
    vdisp = [g.displacement(TreePoint.at_vertex(v)) for v in range(tree.n_vertices)]
    cutoff = tree.total_finite_length + max(vdisp) + 1.0
    ell = min(vdisp)
    per_edge = []
    for k, e in enumerate(tree.edges):
        length = cutoff if e.infinite else e.length
        d0 = vdisp[e.a]
        dl = g.displacement(tree.point(k, length)) if e.infinite else vdisp[e.b]
        s = min(max((d0 - dl + 2.0 * length) / 4.0, 0.0), length)
        dm = g.displacement(tree.point(k, s))
        ell = min(ell, dm)
        per_edge.append((length, d0, dl, dm))
    return ell, vdisp, per_edge


def translation_length(tree: SimplicialTree, g: TreeIsometry) -> tuple[float, Subtree]:
    """``(l, C)``: minimal displacement and the fixed subtree or axis."""
    ell, vdisp, per_edge = displacement_profile(tree, g)
    tol = 1e-9 * max(1.0, ell)
    if ell <= 1e-9:
        ell = 0.0
    verts = frozenset(v for v, d in enumerate(vdisp) if d <= ell + tol)
    iv = {}
    for k, (length, d0, dl, dm) in enumerate(per_edge):
        if dm > ell + tol:
            continue
        lo = max(0.0, (d0 - ell) / 2.0)
        e = tree.edges[k]
        if e.infinite:
            hi = INF if dl <= ell + tol else length - (dl - ell) / 2.0
        else:
            hi = min(e.length, e.length - (dl - ell) / 2.0)
        iv[k] = (lo, max(lo, hi))
    return ell, Subtree(tree, verts, iv)


@dataclass
class TreeAction:
    """Generators acting by isometries; relators must act trivially."""

    tree: SimplicialTree
    presentation: Presentation
    generators: dict[str, TreeIsometry]

    def __post_init__(self):
        if set(self.generators) != set(self.presentation.generators):
            raise TreeError("one isometry per generator required")
        for r in self.presentation.relators:
            if not self.evaluate(r).is_identity():
                raise TreeError(f"relator {self.presentation.name(r)} does not act trivially")

    def evaluate(self, w: Word) -> TreeIsometry:
        cache = self.__dict__.setdefault("_words", {})
        if w in cache:
            return cache[w]
        if len(w) == 0:
            out = TreeIsometry.identity(self.tree)
        else:
            g, e = w.letters[-1]
            m = self.generators[self.presentation.generators[g]]
            out = self.evaluate(Word(w.letters[:-1])) @ (m if e > 0 else m.inverse())
        cache[w] = out
        return out

    def isometries(self) -> list[TreeIsometry]:
        return [self.generators[n] for n in self.presentation.generators]

    def to_dict(self) -> dict:
        d = self.tree.to_dict()
        d["actions"] = {n: self.generators[n].to_dict() for n in self.presentation.generators}
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=False)

    @classmethod
    def from_dict(cls, data: Mapping, presentation: Presentation | None = None) -> TreeAction:
        tree = SimplicialTree.from_dict(data)
        gens = {n: TreeIsometry.from_dict(tree, a) for n, a in data.get("actions", {}).items()}
        pres = presentation or Presentation(tuple(gens))
        return cls(tree, pres, gens)

    @classmethod
    def from_json(cls, text: str, presentation: Presentation | None = None) -> TreeAction:
        return cls.from_dict(json.loads(text), presentation)


def length_function(action: TreeAction, words: Sequence[Word]) -> np.ndarray:
    return np.array([translation_length(action.tree, action.evaluate(w))[0] for w in words])


def fixed_set(action: TreeAction, g: TreeIsometry) -> Subtree | None:
    ell, c = translation_length(action.tree, g)
    return c if ell == 0.0 else None


def global_fixed_point(action: TreeAction) -> Subtree | None:
    """Common fixed subtree of all generators, or None when there is none."""
    out = Subtree.whole(action.tree)
    for g in action.isometries():
        f = fixed_set(action, g)
        if f is None:
            return None
        out = out.intersect(f)
        if out.is_empty():
            return None
    return out


def _invariant(action: TreeAction, sub: Subtree) -> bool:
    for g in action.isometries():
        for p in sub.extreme_points():
            if not sub.contains(g(p)):
                return False
        for k in sub.ends():
            if g.end_map[k] not in sub.ends():
                return False
    return True


def is_invariant(action: TreeAction, sub: Subtree) -> bool:
    return _invariant(action, sub)


def minimal_subtree(action: TreeAction, max_len: int = 4) -> Subtree:
    """Hull of the axes of hyperbolic words of length <= max_len."""
    from .group_rep import reduced_words

    axes = []
    for w in reduced_words(action.presentation, max_len)[1:]:
        ell, c = translation_length(action.tree, action.evaluate(w))
        if ell > 0:
            axes.append(c)
    if not axes:
        raise EllipticActionError("no hyperbolic word among the sampled words")
    sub = hull(action.tree, axes)
    if not _invariant(action, sub):
        raise TreeError("axis hull is not invariant under the generators")
    for smaller in _pruned(sub):
        if _invariant(action, smaller):
            raise TreeError("axis hull has a proper invariant subtree")
    return sub


def _pruned(sub: Subtree):
    """Copies of ``sub`` with one terminal finite piece cut in half."""
    t = sub.tree
    for k, (lo, hi) in sub.intervals.items():
        if not math.isfinite(hi):
            continue
        e = t.edges[k]
        ends = [(e.a, lo <= EPS), (e.b, hi >= e.length - EPS)]
        for side, (v, at_vertex) in enumerate(ends):
            if at_vertex and v is not None:
                inside = [j for j in t.incident(v) if j in sub.intervals and sub._touches(j, v)]
                if len(inside) > 1:
                    continue
            mid = 0.5 * (lo + hi)
            iv = dict(sub.intervals)
            iv[k] = (mid, hi) if side == 0 else (lo, mid)
            yield Subtree(t, frozenset(x for x in sub.vertices if x != (v if at_vertex else None)), iv)


def fixed_ends(action: TreeAction) -> list[int]:
    return [k for k in action.tree.infinite_edges if all(g.end_map[k] == k for g in action.isometries())]


def shift_toward_end(tree: SimplicialTree, p: TreePoint, end: int, eps: float) -> TreePoint:
    """The point at distance ``eps`` from ``p`` on the ray from ``p`` into ``end``."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    return tree.ray_point(p, end, eps)


def classify_semisimple(action: TreeAction) -> str:
    sub = minimal_subtree(action)
    if sub.is_line() and all(g.image_of(sub).same_as(sub) for g in action.isometries()):
        return "isometric-to-line-action"
    if not fixed_ends(action):
        return "no-fixed-end"
    return "fixes-end-not-line"


def branch_point(tree: SimplicialTree, x: TreePoint, y: TreePoint, z: TreePoint) -> TreePoint:
    """The median of three points: where the arcs between them meet."""
    s = 0.5 * (tree.distance(x, y) + tree.distance(x, z) - tree.distance(y, z))
    return tree.point_along(x, y, max(s, 0.0))


def merge_point(tree: SimplicialTree, x: TreePoint, y: TreePoint, end: int) -> TreePoint:
    """Start of the common sub-ray of the rays from ``x`` and ``y`` into ``end``."""
    far = tree.distance(x, y) + tree.total_finite_length + 1.0
    z = tree.ray_point(x, end, far + tree.busemann(x, end) + abs(tree.busemann(y, end)))
    return branch_point(tree, x, y, z)


def subtree_distance(tree: SimplicialTree, a: Subtree, b: Subtree) -> float:
    """Distance between two nonempty connected closed subsets."""
    q = project_to_subtree(tree, a.representative(), b)
    p = project_to_subtree(tree, q, a)
    return tree.distance(p, project_to_subtree(tree, p, b))
