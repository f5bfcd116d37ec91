"""Exhaustive enumeration of constrained triangulation spaces.

Exact desk-scale oracle: depth-first enumeration of every triangulation
compatible with a constraint set, exact rational stationary measures,
conditional ground-state probabilities, and a search for instances whose
ground-state indicators are negatively correlated.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, NamedTuple, Sequence

from .geometry import Edge, Pt, open_segments_intersect
from .region import (BoundaryCondition, ConstraintConflict, Region,
                     compatible_edges, free_midpoints, make_boundary_condition)
from .edgeposet import EdgePoset
from .triangulation import InvalidTriangulation, Triangulation

State = tuple  # edges of one triangulation, in region.midpoints order


class CapExceeded(Exception):
    """Enumeration found more states than the caller's cap allows."""

    def __init__(self, cap: int, partial_count: int):
        self.cap = cap
        self.partial_count = partial_count
        super().__init__(
            "enumeration exceeded cap %d (at least %d states)" % (cap, partial_count))


class DegenerateCondition(Exception):
    """A conditioning event has probability zero."""


def breadth_order(region: Region) -> tuple[Pt, ...]:
    """Midpoints top to bottom, ties left to right.

    Under this order at most two candidate edges per midpoint remain
    consistent with the edges already placed above, which bounds the number
    of triangulations by 2^(number of unconstrained midpoints).
    """
    return tuple(sorted(region.midpoints, key=lambda m: (-m[1], m[0])))


@dataclass(frozen=True)
class EnumeratedSpace:
    """Every triangulation of a region under a constraint set.

    states holds one edge tuple per triangulation, each listed in
    region.midpoints order (the same key produced by dynamics.state_key),
    sorted for determinism.  max_live records the largest number of live
    candidate edges seen at any midpoint during the search; dead_leaves
    counts completed assignments rejected by full validation.
    """

    region: Region
    bc: BoundaryCondition
    states: tuple[State, ...]
    total_lengths: tuple[int, ...]
    order: tuple[Pt, ...]
    max_live: int
    dead_leaves: int
    _index: dict = field(default=None, repr=False, compare=False)

    def __len__(self) -> int:
        return len(self.states)

    def index_of(self, state: Sequence[Edge]) -> int:
        if self._index is None:
            object.__setattr__(
                self, "_index", {s: i for i, s in enumerate(self.states)})
        return self._index[tuple(state)]

    def triangulation(self, i: int) -> Triangulation:
        return Triangulation.from_edges(self.region, self.bc, self.states[i])

    def anclin_bound(self) -> int:
        """2 raised to the number of unconstrained midpoints."""
        return 2 ** len(free_midpoints(self.region, self.bc))


def enumerate_triangulations(region: Region, bc: BoundaryCondition,
                             cap: int = 1_000_000,
                             order: Sequence[Pt] | None = None,
                             ) -> EnumeratedSpace:
    """Depth-first enumeration over midpoints, one edge per midpoint.

    At each midpoint the live candidates are the compatible edges that cross
    none of the edges already placed; a completed assignment is kept only if
    it validates as a triangulation.  Raises CapExceeded as soon as more
    than cap states are found (the partial count rides on the exception).

    With the default top-to-bottom, left-to-right order the search asserts
    the two-candidate branching bound; custom orders skip that assertion but
    must yield the same state set.
    """
    default_order = breadth_order(region)
    mids = default_order if order is None else tuple(order)
    if sorted(mids) != sorted(region.midpoints):
        raise ValueError("order must be a permutation of the region midpoints")
    check_branching = mids == default_order

    cand: dict[Pt, tuple[Edge, ...]] = {
        x: compatible_edges(region, bc, x) for x in mids}

    # Edge ids and a precomputed conflict table keep the DFS inner loop flat.
    all_edges: list[Edge] = []
    edge_id: dict[Edge, int] = {}
    for x in mids:
        for e in cand[x]:
            if e not in edge_id:
                edge_id[e] = len(all_edges)
                all_edges.append(e)
    n_edges = len(all_edges)
    conflicts: list[list[int]] = [[] for _ in range(n_edges)]
    for i in range(n_edges):
        for j in range(i + 1, n_edges):
            if open_segments_intersect(all_edges[i], all_edges[j]):
                conflicts[i].append(j)
                conflicts[j].append(i)

    cand_ids = [tuple(edge_id[e] for e in cand[x]) for x in mids]
    blocked = [0] * n_edges
    chosen: list[int] = []
    states: list[State] = []
    lengths: list[int] = []
    stats = {"max_live": 0, "dead": 0}
    n_mids = len(mids)
    # Output key order: position of each DFS midpoint in region.midpoints.
    out_pos = {x: i for i, x in enumerate(region.midpoints)}
    perm = [out_pos[x] for x in mids]

    def emit() -> None:
        edges = [None] * n_mids
        for k, i in enumerate(chosen):
            edges[perm[k]] = all_edges[i]
        state = tuple(edges)
        try:
            tri = Triangulation.from_edges(region, bc, state, validate=True)
        except InvalidTriangulation:
            stats["dead"] += 1
            return
        states.append(state)
        lengths.append(tri.total_length())
        if len(states) > cap:
            raise CapExceeded(cap, len(states))

    def rec(k: int) -> None:
        if k == n_mids:
            emit()
            return
        live = [i for i in cand_ids[k] if not blocked[i]]
        if len(live) > stats["max_live"]:
            stats["max_live"] = len(live)
        if check_branching:
            assert len(live) <= 2, (
                "midpoint %r kept %d live candidates" % (mids[k], len(live)))
        for i in live:
            for j in conflicts[i]:
                blocked[j] += 1
            chosen.append(i)
            rec(k + 1)
            chosen.pop()
            for j in conflicts[i]:
                blocked[j] -= 1

    rec(0)

    pairs = sorted(zip(states, lengths))
    states_sorted = tuple(s for s, _ in pairs)
    lengths_sorted = tuple(l for _, l in pairs)
    return EnumeratedSpace(region=region, bc=bc, states=states_sorted,
                           total_lengths=lengths_sorted, order=mids,
                           max_live=stats["max_live"], dead_leaves=stats["dead"])


class ExactMeasure(NamedTuple):
    """Exact stationary distribution on an enumerated space."""

    lam: Fraction
    probs: dict  # state -> Fraction, insertion order = space.states order
    Z: Fraction  # partition function: sum of lam**total_length over states


def as_rational(lam) -> Fraction:
    """Validate that a weight is exact; floats are rejected."""
    if isinstance(lam, float):
        raise TypeError(
            "exact oracle needs a rational weight, got float %r" % lam)
    return Fraction(lam)


def exact_measure(space: EnumeratedSpace, lam) -> ExactMeasure:
    """Probabilities proportional to lam**(sum of edge lengths), exactly."""
    lam = as_rational(lam)
    if lam <= 0:
        raise ValueError("weight parameter must be positive")
    weights = [lam ** t for t in space.total_lengths]
    Z = sum(weights)
    probs = {s: w / Z for s, w in zip(space.states, weights)}
    return ExactMeasure(lam=lam, probs=probs, Z=Z)


def tv_distance(empirical: Mapping, exact) -> float:
    """Total variation between a visit histogram and an exact table.

    empirical maps states to counts (or weights); exact is an ExactMeasure
    or a state->probability mapping.  Empirical states must come from the
    exact table's index set; missing states count as zero mass.
    """
    probs = exact.probs if isinstance(exact, ExactMeasure) else dict(exact)
    unknown = set(empirical) - set(probs)
    if unknown:
        raise ValueError("empirical histogram has %d unknown states" % len(unknown))
    total = sum(empirical.values())
    if total <= 0:
        raise ValueError("empirical histogram is empty")
    acc = Fraction(0)
    for s, p in probs.items():
        q = Fraction(empirical.get(s, 0), total)
        acc += abs(p - q)
    return float(acc / 2)


def conditional_ground_prob(space: EnumeratedSpace, lam, x: Pt, y: Pt):
    """Exact P(edge at x is its ground edge), conditioned on the state at y.

    Returns (p_given_ground, p_given_not, p_marginal): the probability that
    the edge at midpoint x equals its canonical ground edge, given that y is
    (resp. is not) at its canonical ground edge, plus the unconditional
    probability.  Raises DegenerateCondition when a conditioning event has
    probability zero.
    """
    poset = EdgePoset.of(space.region, space.bc)
    gx = poset.canonical_ground_edge(x)
    gy = poset.canonical_ground_edge(y)
    mids = space.region.midpoints
    ix, iy = mids.index(x), mids.index(y)
    measure = exact_measure(space, lam)
    p_x = Fraction(0)
    p_y = Fraction(0)
    p_both = Fraction(0)
    for s, p in measure.probs.items():
        hit_x = s[ix] == gx
        if hit_x:
            p_x += p
        if s[iy] == gy:
            p_y += p
            if hit_x:
                p_both += p
    p_y_not = 1 - p_y
    if p_y == 0 or p_y_not == 0:
        raise DegenerateCondition(
            "conditioning on midpoint %r has a zero-probability branch" % (y,))
    return (p_both / p_y, (p_x - p_both) / p_y_not, p_x)


# --------------------------------------------------------------------------
# Search for FKG-inequality violations between ground-state indicators.

@dataclass(frozen=True)
class FkgWitness:
    """An instance violating positive association (the FKG inequality).

    Both inequalities hold strictly:
      P(x ground | y not ground)  >  P(x ground | y ground)
      P(x ground)                 >  P(x ground | y ground)
    """

    region: Region
    constraints: tuple[Edge, ...]
    x: Pt
    y: Pt
    lam: Fraction
    p_given_ground: Fraction
    p_given_not: Fraction
    p_marginal: Fraction

    def holds(self) -> bool:
        return (self.p_given_not > self.p_given_ground
                and self.p_marginal > self.p_given_ground)

    def describe(self) -> str:
        return (
            "region %s, constraints %s\n"
            "  x=%s  y=%s  lambda=%s\n"
            "  P(x ground | y ground)     = %s\n"
            "  P(x ground | y not ground) = %s  (strictly larger: %s)\n"
            "  P(x ground)                = %s  (strictly larger: %s)"
            % (self.region.name, list(self.constraints), self.x, self.y,
               self.lam, self.p_given_ground, self.p_given_not,
               self.p_given_not > self.p_given_ground, self.p_marginal,
               self.p_marginal > self.p_given_ground))


def interior_constraint_pool(region: Region) -> tuple[Edge, ...]:
    """Candidate constraint edges: every compatible non-boundary edge."""
    bc0 = make_boundary_condition(region)
    pool = []
    for x in region.midpoints:
        if x in bc0.by_midpoint:
            continue
        pool.extend(compatible_edges(region, bc0, x))
    return tuple(sorted(set(pool)))


def constraint_catalog(region: Region, max_constraints: int = 3,
                       ) -> Iterator[tuple[Edge, ...]]:
    """All mutually compatible interior constraint sets, smallest first.

    Yields tuples of extra constraint edges in deterministic order: by set
    size, then lexicographically.  Sets whose edges cross each other or
    share a midpoint are skipped.
    """
    pool = interior_constraint_pool(region)
    for size in range(max_constraints + 1):
        for combo in itertools.combinations(pool, size):
            ok = True
            for i in range(len(combo)):
                for j in range(i + 1, len(combo)):
                    a, b = combo[i], combo[j]
                    same_mid = ((a.a[0] + a.b[0], a.a[1] + a.b[1])
                                == (b.a[0] + b.b[0], b.a[1] + b.b[1]))
                    if same_mid or open_segments_intersect(a, b):
                        ok = False
                        break
                if not ok:
                    break
            if ok:
                yield combo


def fkg_search(
        regions: Iterable[Region], lam,
        max_constraints: int = 3, cap: int = 200_000,
        ) -> FkgWitness | None:
    """First instance (region, constraints, x, y) with both strict inequalities.

    Scans the given regions in order, for each walking the constraint
    catalog and every ordered midpoint pair; instances whose state space
    exceeds cap are skipped.  Returns None if the catalog is exhausted.
    """
    lam = as_rational(lam)
    for region in regions:
        for extra in constraint_catalog(region, max_constraints):
            try:
                bc = make_boundary_condition(region, extra)
            except ConstraintConflict:
                continue
            try:
                space = enumerate_triangulations(region, bc, cap)
            except CapExceeded:
                continue
            if len(space) < 2:
                continue
            witness = _scan_space_for_witness(space, lam, extra)
            if witness is not None:
                return witness
    return None


def _scan_space_for_witness(space: EnumeratedSpace, lam: Fraction,
                            extra: tuple[Edge, ...],
                            ) -> FkgWitness | None:
    poset = EdgePoset.of(space.region, space.bc)
    mids = space.region.midpoints
    measure = exact_measure(space, lam)
    free = [x for x in mids if x not in space.bc.by_midpoint]
    idx = {x: mids.index(x) for x in free}
    ground = {x: poset.canonical_ground_edge(x) for x in free}
    # Per-midpoint marginals and pairwise joints in one pass over states.
    p_marg = {x: Fraction(0) for x in free}
    p_joint = {}
    hits_by_state = []
    for s, p in measure.probs.items():
        hits = tuple(x for x in free if s[idx[x]] == ground[x])
        hits_by_state.append((hits, p))
        for x in hits:
            p_marg[x] += p
    for x in free:
        px = p_marg[x]
        if px == 0 or px == 1:
            continue
        for y in free:
            if y == x:
                continue
            py = p_marg[y]
            if py == 0 or py == 1:
                continue
            key = (x, y)
            both = p_joint.get(key)
            if both is None:
                both = Fraction(0)
                for hits, p in hits_by_state:
                    if x in hits and y in hits:
                        both += p
                p_joint[key] = both
            p_given_ground = both / py
            p_given_not = (px - both) / (1 - py)
            if p_given_not > p_given_ground and px > p_given_ground:
                return FkgWitness(
                    region=space.region, constraints=extra, x=x, y=y, lam=lam,
                    p_given_ground=p_given_ground, p_given_not=p_given_not,
                    p_marginal=px)
    return None


def verify_witness(witness: FkgWitness, lam=None,
                   cap: int = 200_000) -> FkgWitness:
    """Recompute a witness's probabilities from scratch.

    Re-enumerates the instance and recomputes the three probabilities via
    conditional_ground_prob (an independent code path from the search scan).
    Returns a fresh witness at the requested weight; its .holds() reports
    whether both inequalities are still strict there.
    """
    lam = witness.lam if lam is None else as_rational(lam)
    bc = make_boundary_condition(witness.region, witness.constraints)
    space = enumerate_triangulations(witness.region, bc, cap)
    pg, pn, pm = conditional_ground_prob(space, lam, witness.x, witness.y)
    return FkgWitness(
        region=witness.region, constraints=witness.constraints,
        x=witness.x, y=witness.y, lam=lam,
        p_given_ground=pg, p_given_not=pn, p_marginal=pm)
