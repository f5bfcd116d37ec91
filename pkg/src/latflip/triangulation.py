"""Triangulations as midpoint-indexed spin configurations.

A triangulation of a region is stored as the map  midpoint -> edge  (every
midpoint carries exactly one edge), plus an incrementally maintained apex
table: for each midpoint, the one or two opposite triangle corners of its
edge.  A flip replaces an edge by the other diagonal of the quadrilateral
formed by its two triangles; it exists exactly when that quadrilateral is a
parallelogram, i.e. the two apices sum to the edge's endpoint sum.

          p1                      p1
         /  \                    / | \
        a----b      flip        a  |  b
         \  /      ---->         \ | /
          p2                      p2

Only the four edges bordering the quadrilateral change their apex sets, so a
flip is O(1).
"""

from __future__ import annotations

from collections import defaultdict
from enum import Enum

from .geometry import (
    Edge,
    Pt,
    cross,
    l1_length,
    is_unit_diagonal,
    midpoint2,
    mk_edge,
    open_segments_intersect,
    cells_touched,
)
from .region import BoundaryCondition, Region, edge_is_compatible


class NotFlippable(Exception):
    pass


class InvalidTriangulation(Exception):
    pass


class EdgeClass(Enum):
    INCREASING = "increasing"
    DECREASING = "decreasing"
    UNIT_DIAG_TOP = "unit_diag_top"
    OTHER = "other"


class Triangulation:
    __slots__ = ("region", "bc", "edge_of", "_apex")

    def __init__(self, region: Region, bc: BoundaryCondition,
                 edge_of: dict[Pt, Edge], apex: dict[Pt, tuple[Pt, ...]]):
        self.region = region
        self.bc = bc
        self.edge_of = edge_of
        self._apex = apex

    # ---------------------------------------------------------------- build

    @classmethod
    def from_edges(cls, region: Region, bc: BoundaryCondition, edges,
                   validate: bool = False) -> "Triangulation":
        edge_of: dict[Pt, Edge] = {}
        for e in edges:
            e = mk_edge(e.a, e.b) if isinstance(e, Edge) else mk_edge(*e)
            m = midpoint2(e)
            if m in edge_of and edge_of[m] != e:
                raise InvalidTriangulation("two edges share midpoint %r" % (m,))
            edge_of[m] = e
        missing = region.midpoint_set - set(edge_of)
        if missing:
            raise InvalidTriangulation("midpoints not covered: %r" % (sorted(missing)[:3],))
        extra = set(edge_of) - region.midpoint_set
        if extra:
            raise InvalidTriangulation("edges outside region midpoints: %r" % (sorted(extra)[:3],))
        apex = _build_apex(edge_of)
        tri = cls(region, bc, edge_of, apex)
        if validate:
            tri.check()
        return tri

    def copy(self) -> "Triangulation":
        return Triangulation(self.region, self.bc, dict(self.edge_of), dict(self._apex))

    def __eq__(self, other) -> bool:
        return isinstance(other, Triangulation) and self.edge_of == other.edge_of

    def __ne__(self, other) -> bool:
        return not self.__eq__(other)

    # ------------------------------------------------------------ accessors

    def apices(self, x: Pt) -> tuple[Pt, ...]:
        return self._apex[x]

    def faces_at(self, x: Pt):
        """Triangles containing edge_of[x], as (a, b, apex) triples."""
        e = self.edge_of[x]
        return tuple((e.a, e.b, p) for p in self._apex[x])

    def face_mids(self, x: Pt, apex: Pt) -> tuple[Pt, Pt, Pt]:
        """Midpoints of the three sides of the face (edge_of[x], apex)."""
        e = self.edge_of[x]
        return (
            x,
            ((e.a[0] + apex[0]) // 2, (e.a[1] + apex[1]) // 2),
            ((e.b[0] + apex[0]) // 2, (e.b[1] + apex[1]) // 2),
        )

    def faces(self) -> set[frozenset[Pt]]:
        out: set[frozenset[Pt]] = set()
        for x, e in self.edge_of.items():
            for p in self._apex[x]:
                out.add(frozenset((e.a, e.b, p)))
        return out

    # -------------------------------------------------------------- dynamics

    def is_flippable(self, x: Pt) -> bool:
        e = self.edge_of[x]
        if e in self.bc.edges:
            return False
        ap = self._apex[x]
        if len(ap) != 2:
            return False
        p1, p2 = ap
        return p1[0] + p2[0] == e.a[0] + e.b[0] and p1[1] + p2[1] == e.a[1] + e.b[1]

    def flipped_edge(self, x: Pt) -> Edge:
        """The edge that a flip at x would produce (raises NotFlippable)."""
        e = self.edge_of[x]
        if e in self.bc.edges:
            raise NotFlippable("constraint edge at %r" % (x,))
        ap = self._apex[x]
        if len(ap) != 2:
            raise NotFlippable("edge at %r lies in a single triangle" % (x,))
        p1, p2 = ap
        if p1[0] + p2[0] != e.a[0] + e.b[0] or p1[1] + p2[1] != e.a[1] + e.b[1]:
            raise NotFlippable("triangles at %r do not form a parallelogram" % (x,))
        return mk_edge(p1, p2)

    def flip(self, x: Pt) -> "Triangulation":
        """Flip the edge at x in place; returns self."""
        new = self.flipped_edge(x)
        e = self.edge_of[x]
        a, b = e.a, e.b
        p1, p2 = new.a, new.b
        self.edge_of[x] = new
        self._apex[x] = (a, b) if a <= b else (b, a)
        _swap_apex(self._apex, a, p1, b, p2)
        _swap_apex(self._apex, b, p1, a, p2)
        _swap_apex(self._apex, a, p2, b, p1)
        _swap_apex(self._apex, b, p2, a, p1)
        return self

    def classify(self, x: Pt) -> EdgeClass:
        e = self.edge_of[x]
        length = l1_length(e)
        largest_in_all = True
        for (a, b, p) in self.faces_at(x):
            la = abs(a[0] - p[0]) // 2 + abs(a[1] - p[1]) // 2
            lb = abs(b[0] - p[0]) // 2 + abs(b[1] - p[1]) // 2
            # in an area-1/2 triangle the largest side's l1 length equals the
            # sum of the other two, so the largest side is strictly unique
            assert 2 * max(length, la, lb) == length + la + lb
            if length <= la or length <= lb:
                largest_in_all = False
                break
        if largest_in_all:
            if is_unit_diagonal(e):
                return EdgeClass.UNIT_DIAG_TOP
            return EdgeClass.DECREASING
        if self.is_flippable(x) and l1_length(self.flipped_edge(x)) > length:
            return EdgeClass.INCREASING
        return EdgeClass.OTHER

    def psi(self, x: Pt) -> int:
        """Shortest other edge length among the triangles containing edge_of[x]."""
        if not self.is_flippable(x) and self.classify(x) is not EdgeClass.DECREASING:
            raise NotFlippable("psi undefined at %r" % (x,))
        best = None
        for (a, b, p) in self.faces_at(x):
            la = abs(a[0] - p[0]) // 2 + abs(a[1] - p[1]) // 2
            lb = abs(b[0] - p[0]) // 2 + abs(b[1] - p[1]) // 2
            m = min(la, lb)
            best = m if best is None else min(best, m)
        assert best is not None
        return best

    # ------------------------------------------------------------ validation

    def check(self) -> None:
        """Raise InvalidTriangulation on the first violated invariant."""
        region, bc = self.region, self.bc
        if set(self.edge_of) != region.midpoint_set:
            raise InvalidTriangulation("midpoint cover mismatch")
        for x, e in self.edge_of.items():
            if midpoint2(e) != x:
                raise InvalidTriangulation("edge %r stored at wrong midpoint %r" % (e, x))
            if not edge_is_compatible(region, bc, e):
                raise InvalidTriangulation("incompatible edge %r" % (e,))
        for x, e in bc.by_midpoint.items():
            if self.edge_of.get(x) != e:
                raise InvalidTriangulation("constraint midpoint %r does not hold %r" % (x, e))
        # pairwise disjointness via cell buckets
        buckets: dict[Pt, list[Edge]] = defaultdict(list)
        for e in self.edge_of.values():
            for c in cells_touched(e):
                buckets[c].append(e)
        for cell_edges in buckets.values():
            for i in range(len(cell_edges)):
                for j in range(i + 1, len(cell_edges)):
                    if open_segments_intersect(cell_edges[i], cell_edges[j]):
                        raise InvalidTriangulation(
                            "edges %r and %r cross" % (cell_edges[i], cell_edges[j]))
        rebuilt = _build_apex(self.edge_of)
        if rebuilt != self._apex:
            raise InvalidTriangulation("apex cache out of sync")
        boundary = set(region.boundary_edges)
        for x, e in self.edge_of.items():
            want = 1 if e in boundary else 2
            if len(self._apex[x]) != want:
                raise InvalidTriangulation("edge %r lies in %d triangles, expected %d"
                                           % (e, len(self._apex[x]), want))
        if len(self.faces()) != region.twice_area:
            raise InvalidTriangulation("face count %d != 2*area %d"
                                       % (len(self.faces()), region.twice_area))

    def is_valid(self) -> bool:
        try:
            self.check()
            return True
        except InvalidTriangulation:
            return False

    def triangle_angle_check(self) -> bool:
        """Every face has its largest angle >= pi/2 and the other two <= pi/4.

        Exact: all faces have |cross| == 1 in original units, so an angle at a
        vertex with edge vectors u, w satisfies tan(theta) = 1/dot(u, w) when
        acute; theta <= pi/4 iff dot >= 1, and theta >= pi/2 iff dot <= 0.
        """
        for face in self.faces():
            a, b, c = tuple(face)
            dots = []
            for v, u, w in ((a, b, c), (b, a, c), (c, a, b)):
                ux, uy = u[0] - v[0], u[1] - v[1]
                wx, wy = w[0] - v[0], w[1] - v[1]
                dots.append(ux * wx + uy * wy)
            non_acute = [d for d in dots if d <= 0]
            if len(non_acute) != 1:
                return False
            if any(0 < d < 4 for d in dots):
                # doubled coords scale dot by 4: original dot >= 1 <=> dot >= 4
                return False
        return True

    def total_length(self) -> int:
        return sum(l1_length(e) for e in self.edge_of.values())


def _swap_apex(apex: dict[Pt, tuple[Pt, ...]], s: Pt, t: Pt, old: Pt, new: Pt) -> None:
    m = ((s[0] + t[0]) // 2, (s[1] + t[1]) // 2)
    cur = apex[m]
    if len(cur) == 1:
        assert cur[0] == old
        apex[m] = (new,)
        return
    q1, q2 = cur
    if q1 == old:
        q1 = new
    else:
        assert q2 == old
        q2 = new
    apex[m] = (q1, q2) if q1 <= q2 else (q2, q1)


def _build_apex(edge_of: dict[Pt, Edge]) -> dict[Pt, tuple[Pt, ...]]:
    adj: dict[Pt, set[Pt]] = defaultdict(set)
    for e in edge_of.values():
        adj[e.a].add(e.b)
        adj[e.b].add(e.a)
    apex: dict[Pt, tuple[Pt, ...]] = {}
    for x, e in edge_of.items():
        found = []
        for p in adj[e.a] & adj[e.b]:
            if abs(cross(e.a, e.b, p)) == 4:  # original-unit area 1/2
                found.append(p)
        if not 1 <= len(found) <= 2:
            raise InvalidTriangulation("edge %r lies in %d empty triangles" % (e, len(found)))
        if len(found) == 2:
            s1 = cross(e.a, e.b, found[0])
            s2 = cross(e.a, e.b, found[1])
            if (s1 > 0) == (s2 > 0):
                raise InvalidTriangulation("two triangles on the same side of %r" % (e,))
        found.sort()
        apex[x] = tuple(found)
    return apex
