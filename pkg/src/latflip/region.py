"""Lattice polygons, their midpoint sets, and boundary conditions.

A region is a simple lattice polygon whose boundary edges are primitive
(contain no interior lattice point).  Its lattice points Lambda0 are the
points of Z^2 inside or on the polygon; its midpoints Lambda are the
half-integer non-integer points inside or on the polygon, which is exactly
the set of edge midpoints of every triangulation of the region.

A boundary condition is a set of pairwise non-crossing constraint edges that
always contains the polygon boundary.  Constraint midpoints hold their edge
forever under the dynamics.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field

from .geometry import (
    Edge,
    Pt,
    cells_touched,
    cross,
    is_primitive,
    midpoint2,
    mk_edge,
    open_segments_intersect,
)


class InvalidPolygon(ValueError):
    pass


class ConstraintConflict(ValueError):
    pass


class _EdgeIndex:
    """Cell-bucketed segment index for fast crossing queries."""

    def __init__(self) -> None:
        self._cells: dict[Pt, list[Edge]] = defaultdict(list)

    def add(self, e: Edge) -> None:
        for c in cells_touched(e):
            self._cells[c].append(e)

    def near(self, e: Edge) -> set[Edge]:
        out: set[Edge] = set()
        for c in cells_touched(e):
            out.update(self._cells.get(c, ()))
        return out

    def crosses_any(self, e: Edge) -> Edge | None:
        for f in self.near(e):
            if f != e and open_segments_intersect(e, f):
                return f
        return None


@dataclass(frozen=True)
class Region:
    vertices: tuple[Pt, ...]            # doubled, polygon order
    boundary_edges: tuple[Edge, ...]
    lattice_points: frozenset[Pt]       # Lambda0
    midpoints: tuple[Pt, ...]           # Lambda, sorted
    midpoint_set: frozenset[Pt]
    twice_area: int
    n_interior: int                     # I
    n_boundary: int                     # B
    _rect: tuple[int, int, int, int] | None = field(default=None, repr=False)

    def contains_doubled(self, p: Pt) -> bool:
        """Closed-polygon membership for a doubled-coordinate point."""
        if self._rect is not None:
            x0, y0, x1, y1 = self._rect
            return x0 <= p[0] <= x1 and y0 <= p[1] <= y1
        if self._on_boundary(p):
            return True
        return self._ray_cast(p)

    def _on_boundary(self, p: Pt) -> bool:
        for e in self.boundary_edges:
            if cross(e.a, e.b, p) == 0:
                if min(e.a[0], e.b[0]) <= p[0] <= max(e.a[0], e.b[0]) and \
                   min(e.a[1], e.b[1]) <= p[1] <= max(e.a[1], e.b[1]):
                    return True
        return False

    def _ray_cast(self, p: Pt) -> bool:
        px, py = p
        inside = False
        for e in self.boundary_edges:
            (ax, ay), (bx, by) = e.a, e.b
            if (ay > py) != (by > py):
                # px < x-intersection of the edge with the horizontal through p
                dy = by - ay
                lhs = (px - ax) * dy
                rhs = (py - ay) * (bx - ax)
                if (lhs < rhs) if dy > 0 else (lhs > rhs):
                    inside = not inside
        return inside

    @property
    def name(self) -> str:
        return "polygon[%d vertices, 2A=%d]" % (len(self.vertices), self.twice_area)


def _as_rect(vertices: tuple[Pt, ...]) -> tuple[int, int, int, int] | None:
    xs = {v[0] for v in vertices}
    ys = {v[1] for v in vertices}
    if len(xs) != 2 or len(ys) != 2:
        return None
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    # every vertex must be a corner or a point on the rectangle boundary
    for v in vertices:
        if not (v[0] in (x0, x1) or v[1] in (y0, y1)):
            return None
    return (x0, y0, x1, y1)


def build_region(vertices) -> Region:
    """Build a region from polygon vertices given in original integer units.

    Raises InvalidPolygon for fewer than 3 vertices, non-integer or repeated
    vertices, non-primitive boundary edges, self-intersections, or zero area.
    """
    verts: list[Pt] = []
    for v in vertices:
        x, y = v
        if int(x) != x or int(y) != y:
            raise InvalidPolygon("non-integer vertex %r" % (v,))
        verts.append((2 * int(x), 2 * int(y)))
    if len(verts) < 3:
        raise InvalidPolygon("polygon needs at least 3 vertices")
    if len(set(verts)) != len(verts):
        raise InvalidPolygon("repeated vertex")

    edges = []
    for i, a in enumerate(verts):
        b = verts[(i + 1) % len(verts)]
        e = mk_edge(a, b)
        if not is_primitive(e):
            raise InvalidPolygon("boundary edge %r contains an interior lattice point" % (e,))
        edges.append(e)
    for i in range(len(edges)):
        for j in range(i + 1, len(edges)):
            if open_segments_intersect(edges[i], edges[j]):
                raise InvalidPolygon("boundary edges %r and %r intersect" % (edges[i], edges[j]))

    shoelace = 0
    for i, a in enumerate(verts):
        b = verts[(i + 1) % len(verts)]
        shoelace += a[0] * b[1] - b[0] * a[1]
    if shoelace == 0:
        raise InvalidPolygon("polygon has zero area")
    if abs(shoelace) % 4:
        raise AssertionError("shoelace of doubled lattice polygon not divisible by 4")
    twice_area = abs(shoelace) // 4

    probe = Region(
        vertices=tuple(verts),
        boundary_edges=tuple(edges),
        lattice_points=frozenset(),
        midpoints=(),
        midpoint_set=frozenset(),
        twice_area=twice_area,
        n_interior=0,
        n_boundary=0,
        _rect=_as_rect(tuple(verts)),
    )

    x_lo = min(v[0] for v in verts)
    x_hi = max(v[0] for v in verts)
    y_lo = min(v[1] for v in verts)
    y_hi = max(v[1] for v in verts)
    lattice: set[Pt] = set()
    mids: list[Pt] = []
    for x in range(x_lo, x_hi + 1):
        for y in range(y_lo, y_hi + 1):
            p = (x, y)
            if not probe.contains_doubled(p):
                continue
            if x % 2 == 0 and y % 2 == 0:
                lattice.add(p)
            else:
                mids.append(p)
    mids.sort()

    n_boundary = len(verts)  # primitive edges: boundary lattice points are the vertices
    n_interior = len(lattice) - n_boundary
    # Pick's theorem and the triangulation edge count are hard invariants here.
    if twice_area != 2 * n_interior + n_boundary - 2:
        raise AssertionError("Pick consistency failed: 2A=%d I=%d B=%d" % (twice_area, n_interior, n_boundary))
    if len(mids) != 3 * n_interior + 2 * n_boundary - 3:
        raise AssertionError("midpoint count %d != 3I+2B-3 (I=%d, B=%d)" % (len(mids), n_interior, n_boundary))

    return Region(
        vertices=tuple(verts),
        boundary_edges=tuple(edges),
        lattice_points=frozenset(lattice),
        midpoints=tuple(mids),
        midpoint_set=frozenset(mids),
        twice_area=twice_area,
        n_interior=n_interior,
        n_boundary=n_boundary,
        _rect=probe._rect,
    )


def rectangle(nx: int, ny: int) -> Region:
    """Axis-aligned rectangle [0,nx] x [0,ny]."""
    if nx < 1 or ny < 1:
        raise InvalidPolygon("rectangle sides must be >= 1")
    walk = [(x, 0) for x in range(nx)]
    walk += [(nx, y) for y in range(ny)]
    walk += [(x, ny) for x in range(nx, 0, -1)]
    walk += [(0, y) for y in range(ny, 0, -1)]
    return build_region(walk)


@dataclass(frozen=True, eq=False)
class BoundaryCondition:
    edges: frozenset[Edge]                 # all constraint edges incl. boundary
    extra: tuple[Edge, ...]                # constraints beyond the polygon boundary
    by_midpoint: dict[Pt, Edge]
    _index: _EdgeIndex = field(repr=False, default=None)

    def is_constraint_midpoint(self, x: Pt) -> bool:
        return x in self.by_midpoint

    def crossing_constraint(self, e: Edge) -> Edge | None:
        """A constraint edge openly crossed by e, or None."""
        return self._index.crosses_any(e)


def make_boundary_condition(region: Region, extra_edges=()) -> BoundaryCondition:
    """Validate constraint edges and attach the polygon boundary.

    Each extra edge must join lattice points of the region, be primitive, lie
    inside the closed polygon and cross no other constraint edge; violations
    raise ConstraintConflict.
    """
    edges: list[Edge] = list(region.boundary_edges)
    seen = set(edges)
    for spec in extra_edges:
        if isinstance(spec, Edge):
            e = mk_edge(spec.a, spec.b)
        else:
            (x1, y1), (x2, y2) = spec
            e = mk_edge((2 * x1, 2 * y1), (2 * x2, 2 * y2))
        if e in seen:
            continue
        if e.a not in region.lattice_points or e.b not in region.lattice_points:
            raise ConstraintConflict("constraint endpoint outside region: %r" % (e,))
        if not is_primitive(e):
            raise ConstraintConflict("constraint edge not primitive: %r" % (e,))
        if midpoint2(e) not in region.midpoint_set:
            raise ConstraintConflict("constraint edge leaves the region: %r" % (e,))
        seen.add(e)
        edges.append(e)

    index = _EdgeIndex()
    by_midpoint: dict[Pt, Edge] = {}
    for e in edges:
        m = midpoint2(e)
        if m in by_midpoint:
            raise ConstraintConflict("constraint edges %r and %r share a midpoint" % (by_midpoint[m], e))
        by_midpoint[m] = e
    for i in range(len(edges)):
        hit = index.crosses_any(edges[i])
        if hit is not None:
            raise ConstraintConflict("constraint edges %r and %r cross" % (edges[i], hit))
        index.add(edges[i])

    return BoundaryCondition(
        edges=frozenset(edges),
        extra=tuple(e for e in edges if e not in region.boundary_edges),
        by_midpoint=by_midpoint,
        _index=index,
    )


def free_midpoints(region: Region, bc: BoundaryCondition) -> tuple[Pt, ...]:
    """Midpoints not pinned by a constraint edge (Lambda minus Lambda^bc)."""
    return tuple(x for x in region.midpoints if x not in bc.by_midpoint)


def edge_is_compatible(region: Region, bc: BoundaryCondition, e: Edge) -> bool:
    """True iff e can appear in some triangulation respecting bc.

    Equivalent to: endpoints in Lambda0, primitive, contained in the closed
    polygon, and crossing no constraint edge.  Containment reduces to the
    midpoint test because a primitive segment with lattice endpoints can only
    leave the polygon by crossing a boundary edge.
    """
    if e in bc.edges:
        return True
    if e.a not in region.lattice_points or e.b not in region.lattice_points:
        return False
    if not is_primitive(e):
        return False
    if midpoint2(e) not in region.midpoint_set:
        return False
    return bc.crossing_constraint(e) is None


def compatible_edges(region: Region, bc: BoundaryCondition, x: Pt) -> tuple[Edge, ...]:
    """All edges with midpoint x that can appear in some triangulation.

    A constraint midpoint has exactly its constraint edge.  Sorted for
    deterministic iteration.
    """
    pinned = bc.by_midpoint.get(x)
    if pinned is not None:
        return (pinned,)
    out = []
    for p in region.lattice_points:
        q = (2 * x[0] - p[0], 2 * x[1] - p[1])
        if p < q and q in region.lattice_points:
            e = mk_edge(p, q)
            if edge_is_compatible(region, bc, e):
                out.append(e)
    return tuple(sorted(out))


def region_to_text(region: Region, bc: BoundaryCondition) -> str:
    """Serialize polygon and constraints to the plain-text region format."""
    lines = ["# latflip region v1", "polygon"]
    for v in region.vertices:
        lines.append("%d %d" % (v[0] // 2, v[1] // 2))
    lines.append("constraints")
    for e in sorted(bc.extra):
        lines.append("%d %d %d %d" % (e.a[0] // 2, e.a[1] // 2, e.b[0] // 2, e.b[1] // 2))
    return "\n".join(lines) + "\n"


def parse_region_text(text: str) -> tuple[Region, BoundaryCondition]:
    """Parse the plain-text region format (see region_to_text)."""
    mode = None
    verts: list[tuple[int, int]] = []
    cons: list[tuple[tuple[int, int], tuple[int, int]]] = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line == "polygon":
            mode = "polygon"
            continue
        if line == "constraints":
            mode = "constraints"
            continue
        parts = line.split()
        if mode == "polygon" and len(parts) == 2:
            verts.append((int(parts[0]), int(parts[1])))
        elif mode == "constraints" and len(parts) == 4:
            cons.append(((int(parts[0]), int(parts[1])), (int(parts[2]), int(parts[3]))))
        else:
            raise InvalidPolygon("unparseable region line: %r" % raw)
    region = build_region(verts)
    bc = make_boundary_condition(region, cons)
    return region, bc
