"""Exact integer geometry on the half-integer grid.

Every coordinate in this package is stored *doubled*: a point of the square
lattice Z^2 appears as a pair of even integers, and the midpoint of a lattice
edge appears as an integer pair with at least one odd component.  With this
convention every predicate below is plain integer arithmetic; no floating
point ever enters a geometric decision.

An edge is an ordered pair of distinct lattice points (doubled, both-even),
canonicalized so that a <= b lexicographically.  The direction vector of an
edge is kept in original (undoubled) units: for e = (a, b) the vector is
v = (b - a) / 2 componentwise, which is integral because a and b are even.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Iterable, NamedTuple

Pt = tuple[int, int]


class UnitAxisEdge(ValueError):
    """Raised when a unit horizontal/vertical edge is given where a
    parallelogram with the edge as longest diagonal is required."""


class Edge(NamedTuple):
    a: Pt
    b: Pt


def pt(x: int, y: int) -> Pt:
    """Doubled-coordinate point for an original-unit lattice point."""
    return (2 * x, 2 * y)


def edge(x1: int, y1: int, x2: int, y2: int) -> "Edge":
    """Canonical edge between two lattice points given in original units."""
    return mk_edge(pt(x1, y1), pt(x2, y2))


def is_lattice(p: Pt) -> bool:
    """True iff the doubled point corresponds to a point of Z^2."""
    return p[0] % 2 == 0 and p[1] % 2 == 0


def is_midpoint_pt(p: Pt) -> bool:
    """True iff the doubled point is a midpoint candidate (not in Z^2)."""
    return p[0] % 2 != 0 or p[1] % 2 != 0


def mk_edge(p: Pt, q: Pt) -> Edge:
    """Canonical edge between two distinct lattice points (doubled coords)."""
    if p == q:
        raise ValueError("degenerate edge: identical endpoints %r" % (p,))
    if not (is_lattice(p) and is_lattice(q)):
        raise ValueError("edge endpoints must be lattice points: %r %r" % (p, q))
    return Edge(p, q) if p <= q else Edge(q, p)


def midpoint2(e: Edge) -> Pt:
    """Midpoint of e in doubled coordinates (always integral)."""
    return ((e.a[0] + e.b[0]) // 2, (e.a[1] + e.b[1]) // 2)


def direction(e: Edge) -> Pt:
    """Direction vector b - a in original (undoubled) units."""
    return ((e.b[0] - e.a[0]) // 2, (e.b[1] - e.a[1]) // 2)


def l1_length(e: Edge) -> int:
    """l1 length |e| in original units."""
    vx, vy = direction(e)
    return abs(vx) + abs(vy)


def is_primitive(e: Edge) -> bool:
    """True iff e contains no lattice point other than its endpoints."""
    vx, vy = direction(e)
    return gcd(abs(vx), abs(vy)) == 1


def is_unit_diagonal(e: Edge) -> bool:
    vx, vy = direction(e)
    return abs(vx) == 1 and abs(vy) == 1


def is_unit_axis(e: Edge) -> bool:
    vx, vy = direction(e)
    return abs(vx) + abs(vy) == 1


def cross(o: Pt, p: Pt, q: Pt) -> int:
    """Signed cross product (p - o) x (q - o); positive = q left of o->p."""
    return (p[0] - o[0]) * (q[1] - o[1]) - (p[1] - o[1]) * (q[0] - o[0])


def _open_interval_overlap(a1: int, b1: int, a2: int, b2: int) -> bool:
    # open 1-d intervals; single shared endpoint does not count
    lo1, hi1 = (a1, b1) if a1 <= b1 else (b1, a1)
    lo2, hi2 = (a2, b2) if a2 <= b2 else (b2, a2)
    return max(lo1, lo2) < min(hi1, hi2)


def open_segments_intersect(e: Edge, f: Edge) -> bool:
    """True iff the open segments share at least one point.

    Shared endpoints alone do not count; collinear overlap of positive
    length does.  An edge intersects itself (reflexively true).
    """
    d1 = cross(f.a, f.b, e.a)
    d2 = cross(f.a, f.b, e.b)
    d3 = cross(e.a, e.b, f.a)
    d4 = cross(e.a, e.b, f.b)
    if d1 == 0 and d2 == 0 and d3 == 0 and d4 == 0:
        # collinear: positive-length overlap on the dominant axis
        if e.a[0] != e.b[0]:
            return _open_interval_overlap(e.a[0], e.b[0], f.a[0], f.b[0])
        return _open_interval_overlap(e.a[1], e.b[1], f.a[1], f.b[1])
    # proper crossing: endpoints of each strictly straddle the other's line.
    # Configurations where an endpoint lies on the other segment (T-shape)
    # touch at a point that is excluded from one of the open segments.
    return d1 * d2 < 0 and d3 * d4 < 0


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    """Extended gcd: returns (g, s, t) with s*a + t*b == g."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    return old_r, old_s, old_t


class MinimalParallelogram(NamedTuple):
    p: Pt                      # doubled
    q: Pt                      # doubled
    length_preserving: bool    # other diagonal has the same l1 length


def minimal_parallelogram(e: Edge) -> MinimalParallelogram:
    """The unique two-triangle parallelogram in which e is the longest diagonal.

    Returns the endpoints {p, q} of the other diagonal (p + q == a + b, both
    triangles of area 1/2).  For a unit diagonal the other diagonal of the
    unit square ties in length; the result is flagged length_preserving.
    Unit horizontal/vertical edges admit no such parallelogram and raise
    UnitAxisEdge.
    """
    vx, vy = direction(e)
    if abs(vx) + abs(vy) == 1:
        raise UnitAxisEdge("no parallelogram has a unit axis edge as longest diagonal: %r" % (e,))
    g, s, t = _xgcd(vx, vy)
    if abs(g) != 1:
        raise ValueError("minimal_parallelogram requires a primitive edge: %r" % (e,))
    if g == -1:
        s, t = -s, -t
    # det(v, u) = vx*uy - vy*ux = 1 with u = (-t, s); all solutions u + k v.
    ux, uy = -t, s
    assert vx * uy - vy * ux == 1

    def other_diag_len(k: int) -> int:
        # q - p = v - 2u - 2kv in original units
        wx = vx - 2 * (ux + k * vx)
        wy = vy - 2 * (uy + k * vy)
        return abs(wx) + abs(wy)

    # |v - 2u0 - 2kv|_1 is convex piecewise-linear in k: walk downhill.
    k = 0
    cur = other_diag_len(k)
    while other_diag_len(k + 1) < cur:
        k += 1
        cur = other_diag_len(k)
    while other_diag_len(k - 1) < cur:
        k -= 1
        cur = other_diag_len(k)
    if other_diag_len(k - 1) == cur or other_diag_len(k + 1) == cur:
        raise AssertionError("non-unique minimal parallelogram for %r" % (e,))

    fx, fy = ux + k * vx, uy + k * vy
    p = (e.a[0] + 2 * fx, e.a[1] + 2 * fy)
    q = (e.a[0] + e.b[0] - p[0], e.a[1] + e.b[1] - p[1])
    elen = abs(vx) + abs(vy)
    if cur > elen:
        raise AssertionError("other diagonal longer than the edge itself: %r" % (e,))
    if cur == elen and not is_unit_diagonal(e):
        raise AssertionError("length tie outside the unit-diagonal case: %r" % (e,))
    if p > q:
        p, q = q, p
    return MinimalParallelogram(p, q, cur == elen)


def squares_crossed(e: Edge) -> frozenset[Pt]:
    """Lower-left corners (doubled) of unit squares whose open interior meets e.

    Exact: breakpoints where the segment crosses grid lines are computed with
    rational arithmetic; an open sub-interval between consecutive breakpoints
    lies inside one square iff its sample point has no integer coordinate.
    """
    ax, ay = Fraction(e.a[0], 2), Fraction(e.a[1], 2)
    dx = Fraction(e.b[0], 2) - ax
    dy = Fraction(e.b[1], 2) - ay
    order = _grid_breakpoints(e)
    out: set[Pt] = set()
    for t0, t1 in zip(order, order[1:]):
        tm = (t0 + t1) / 2
        px, py = ax + tm * dx, ay + tm * dy
        if px.denominator != 1 and py.denominator != 1:
            ix = px.numerator // px.denominator
            iy = py.numerator // py.denominator
            out.add((2 * ix, 2 * iy))
    return frozenset(out)


def _grid_breakpoints(e: Edge) -> list[Fraction]:
    from math import ceil, floor

    ax, ay = Fraction(e.a[0], 2), Fraction(e.a[1], 2)
    bx, by = Fraction(e.b[0], 2), Fraction(e.b[1], 2)
    dx, dy = bx - ax, by - ay
    ts = {Fraction(0), Fraction(1)}
    if dx:
        lo, hi = (ax, bx) if ax < bx else (bx, ax)
        for g in range(ceil(lo), floor(hi) + 1):
            t = (Fraction(g) - ax) / dx
            if 0 < t < 1:
                ts.add(t)
    if dy:
        lo, hi = (ay, by) if ay < by else (by, ay)
        for g in range(ceil(lo), floor(hi) + 1):
            t = (Fraction(g) - ay) / dy
            if 0 < t < 1:
                ts.add(t)
    return sorted(ts)


def _cells_at(px: Fraction, py: Fraction) -> list[Pt]:
    if px.denominator == 1:
        xs = [px.numerator - 1, px.numerator]
    else:
        xs = [px.numerator // px.denominator]
    if py.denominator == 1:
        ys = [py.numerator - 1, py.numerator]
    else:
        ys = [py.numerator // py.denominator]
    return [(2 * ix, 2 * iy) for ix in xs for iy in ys]


_CELLS_CACHE: dict[Edge, frozenset[Pt]] = {}


def cells_touched(e: Edge) -> frozenset[Pt]:
    """Lower-left corners (doubled) of all unit squares whose closed square
    meets the closed segment e.  Used for spatial indexing: two segments can
    intersect only if they touch a common cell."""
    hit = _CELLS_CACHE.get(e)
    if hit is not None:
        return hit
    ax, ay = Fraction(e.a[0], 2), Fraction(e.a[1], 2)
    dx = Fraction(e.b[0], 2) - ax
    dy = Fraction(e.b[1], 2) - ay
    order = _grid_breakpoints(e)
    samples = list(order)
    samples.extend((t0 + t1) / 2 for t0, t1 in zip(order, order[1:]))
    out: set[Pt] = set()
    for t in samples:
        out.update(_cells_at(ax + t * dx, ay + t * dy))
    res = frozenset(out)
    if len(_CELLS_CACHE) < (1 << 18):
        _CELLS_CACHE[e] = res
    return res


def excluded_region_contains_no_lattice_point(e: Edge) -> bool:
    """Check the strip construction around e's minimal parallelogram.

    The excluded region is the union of the two infinite strips delimited by
    the lines through opposite sides of the minimal parallelogram of e.  Its
    open interior must contain no lattice point.  Each strip maps to itself
    under translation by its side vector, so scanning one period around the
    parallelogram is exhaustive.
    """
    mp = minimal_parallelogram(e)
    a, b = e.a, e.b
    p, q = mp.p, mp.q
    # strips: (a,p)//(q,b) and (p,b)//(a,q)
    for s0, s1, t0, t1 in ((a, p, q, b), (p, b, a, q)):
        wx, wy = s1[0] - s0[0], s1[1] - s0[1]
        xs = [a[0], b[0], p[0], q[0]]
        ys = [a[1], b[1], p[1], q[1]]
        x_lo = (min(xs) - abs(wx)) // 2 - 1
        x_hi = (max(xs) + abs(wx)) // 2 + 1
        y_lo = (min(ys) - abs(wy)) // 2 - 1
        y_hi = (max(ys) + abs(wy)) // 2 + 1
        for ix in range(x_lo, x_hi + 1):
            for iy in range(y_lo, y_hi + 1):
                z = (2 * ix, 2 * iy)
                d0 = cross(s0, s1, z)
                d1 = cross(t0, t1, z)
                # (s0,s1) and (t0,t1) run parallel in the same direction, so a
                # point strictly between the two lines sees them with opposite
                # signs; a point on either line is not in the open strip.
                if d0 * d1 < 0:
                    return False
    return True


def iter_primitive_vectors(length: int) -> Iterable[Pt]:
    """Primitive integer vectors of given l1 length, one per +/- pair."""
    for vx in range(-length, length + 1):
        vy = length - abs(vx)
        for cand in ((vx, vy), (vx, -vy)) if vy else ((vx, 0),):
            if cand <= (0, 0):
                continue  # canonical representative: strictly positive lex
            if gcd(abs(cand[0]), abs(cand[1])) == 1:
                yield cand
