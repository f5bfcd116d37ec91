"""Ground-state edges and the parent order on same-midpoint edges.

Every midpoint admits a shortest compatible edge (two of them exactly when the
two opposite unit diagonals tie).  Any longer compatible edge has a unique
*parent*: the other diagonal of its minimal parallelogram, which is the edge
produced by flipping it when it is the strictly largest edge of both of its
triangles.  Walking parents gives a strictly shortening chain down to a
ground-state edge; ``e precedes f`` iff e lies strictly below f on f's chain.

All computations here are per (region, boundary condition) and heavily cached;
use :meth:`EdgePoset.of` to share one context.
"""

from __future__ import annotations

from .geometry import (
    Edge,
    Pt,
    direction,
    is_unit_diagonal,
    iter_primitive_vectors,
    l1_length,
    midpoint2,
    minimal_parallelogram,
    mk_edge,
    open_segments_intersect,
)
from .region import BoundaryCondition, Region, edge_is_compatible
from .triangulation import Triangulation


class AtGroundState(Exception):
    """Raised when asking for the parent of a ground-state edge."""


class MidpointMismatch(Exception):
    pass


class NotGroundEdge(Exception):
    pass


_CONTEXTS: dict[BoundaryCondition, "EdgePoset"] = {}
_CONTEXT_CAP = 64


class EdgePoset:
    __slots__ = ("region", "bc", "_ground", "_ground_set", "_ground_tri", "_chain")

    def __init__(self, region: Region, bc: BoundaryCondition):
        self.region = region
        self.bc = bc
        self._ground: dict[Pt, tuple[Edge, ...]] = {}
        self._ground_set: frozenset[Edge] | None = None
        self._ground_tri: Triangulation | None = None
        self._chain: dict[Edge, tuple[Edge, ...]] = {}

    @classmethod
    def of(cls, region: Region, bc: BoundaryCondition) -> "EdgePoset":
        ctx = _CONTEXTS.get(bc)
        if ctx is None:
            if len(_CONTEXTS) >= _CONTEXT_CAP:
                _CONTEXTS.pop(next(iter(_CONTEXTS)))
            ctx = cls(region, bc)
            _CONTEXTS[bc] = ctx
        assert ctx.region == region, "boundary condition reused with a different region"
        return ctx

    # -------------------------------------------------------- ground states

    def ground_edges(self, x: Pt) -> tuple[Edge, ...]:
        """The 1 or 2 minimal-length compatible edges with midpoint x."""
        got = self._ground.get(x)
        if got is not None:
            return got
        if x not in self.region.midpoint_set:
            raise ValueError("not a midpoint of the region: %r" % (x,))
        forced = self.bc.by_midpoint.get(x)
        if forced is not None:
            # every other same-midpoint edge crosses the constraint at x
            found: tuple[Edge, ...] = (forced,)
        else:
            found = self._scan_minimal(x)
        self._ground[x] = found
        return found

    def _scan_minimal(self, x: Pt) -> tuple[Edge, ...]:
        region, bc = self.region, self.bc
        xs = [p[0] for p in region.vertices]
        ys = [p[1] for p in region.vertices]
        max_len = (max(xs) - min(xs) + max(ys) - min(ys)) // 2 + 1
        px, py = x[0] & 1, x[1] & 1
        for length in range(1, max_len + 1):
            hits = []
            for vx, vy in iter_primitive_vectors(length):
                if (vx & 1) != px or (vy & 1) != py:
                    continue
                a = (x[0] - vx, x[1] - vy)
                b = (x[0] + vx, x[1] + vy)
                if a not in region.lattice_points or b not in region.lattice_points:
                    continue
                e = mk_edge(a, b)
                if edge_is_compatible(region, bc, e):
                    hits.append(e)
            if hits:
                hits.sort()
                assert len(hits) <= 2, "three minimal edges at %r: %r" % (x, hits)
                if len(hits) == 2:
                    assert all(is_unit_diagonal(e) for e in hits), \
                        "non-diagonal minimal tie at %r: %r" % (x, hits)
                return tuple(hits)
        raise AssertionError("no compatible edge found for midpoint %r" % (x,))

    def canonical_ground_edge(self, x: Pt) -> Edge:
        """Unique ground edge, with the (1,1)-direction diagonal on ties."""
        g = self.ground_edges(x)
        if len(g) == 1:
            return g[0]
        for e in g:
            if direction(e) == (1, 1):
                return e
        raise AssertionError("diagonal tie without a (1,1) member: %r" % (g,))

    def ground_set(self) -> frozenset[Edge]:
        if self._ground_set is None:
            out: set[Edge] = set()
            for x in self.region.midpoints:
                out.update(self.ground_edges(x))
            self._ground_set = frozenset(out)
        return self._ground_set

    def ground_triangulation(self) -> Triangulation:
        if self._ground_tri is None:
            edges = [self.canonical_ground_edge(x) for x in self.region.midpoints]
            self._ground_tri = Triangulation.from_edges(
                self.region, self.bc, edges, validate=True)
        return self._ground_tri.copy()

    # ------------------------------------------------------- parents/chains

    def parent(self, e: Edge) -> Edge:
        m = midpoint2(e)
        if e in self.ground_edges(m):
            raise AtGroundState(repr(e))
        mp = minimal_parallelogram(e)
        assert not mp.length_preserving, \
            "compatible unit diagonal should be a ground edge: %r" % (e,)
        par = mk_edge(mp.p, mp.q)
        assert l1_length(par) < l1_length(e)
        if not edge_is_compatible(self.region, self.bc, par):
            raise AssertionError("parent %r of %r is not compatible" % (par, e))
        return par

    def chain(self, e: Edge) -> tuple[Edge, ...]:
        """e, parent(e), ... down to the first ground-state edge."""
        cached = self._chain.get(e)
        if cached is not None:
            return cached
        stack: list[Edge] = []
        cur = e
        while True:
            hit = self._chain.get(cur)
            if hit is not None:
                tail: tuple[Edge, ...] = hit
                break
            stack.append(cur)
            if cur in self.ground_edges(midpoint2(cur)):
                tail = ()
                break
            cur = self.parent(cur)
        while stack:
            tail = (stack.pop(),) + tail
            self._chain[tail[0]] = tail
        return self._chain[e]

    def precedes(self, e: Edge, f: Edge) -> bool:
        if midpoint2(e) != midpoint2(f):
            raise MidpointMismatch("%r vs %r" % (e, f))
        return e != f and e in self.chain(f)

    def e_set(self, sigma: Triangulation, x: Pt, g: Edge,
              check_full: bool = False) -> list[Edge]:
        """Chain edges below sigma_x (inclusive) that open-intersect g.

        The walk stops at the first chain edge missing g: crossings are
        monotone along chains, which ``check_full`` re-verifies exhaustively.
        """
        out: list[Edge] = []
        chain = self.chain(sigma.edge_of[x])
        for i, e in enumerate(chain):
            if open_segments_intersect(e, g):
                out.append(e)
            else:
                if check_full:
                    for f in chain[i + 1:]:
                        assert not open_segments_intersect(f, g), \
                            "crossing indicator not monotone along chain of %r" % (chain[0],)
                break
        return out


# Spec-shaped module-level conveniences -------------------------------------

def ground_state_edges(region: Region, bc: BoundaryCondition, x: Pt) -> tuple[Edge, ...]:
    return EdgePoset.of(region, bc).ground_edges(x)


def ground_state_triangulation(region: Region, bc: BoundaryCondition) -> Triangulation:
    return EdgePoset.of(region, bc).ground_triangulation()


def parent(region: Region, bc: BoundaryCondition, e: Edge) -> Edge:
    return EdgePoset.of(region, bc).parent(e)


def chain_to_ground(region: Region, bc: BoundaryCondition, e: Edge) -> tuple[Edge, ...]:
    return EdgePoset.of(region, bc).chain(e)


def precedes(region: Region, bc: BoundaryCondition, e: Edge, f: Edge) -> bool:
    return EdgePoset.of(region, bc).precedes(e, f)


def e_set(sigma: Triangulation, x: Pt, g: Edge, check_full: bool = False) -> list[Edge]:
    return EdgePoset.of(sigma.region, sigma.bc).e_set(sigma, x, g, check_full)
