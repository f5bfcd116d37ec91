"""The crossing-weight potential and its exact one-step drift.

For a ground edge g, the potential of a state sums alpha^(|e|-|g|) over all
chain edges e below each current edge that still cross g.  Proposing a flip at
a single midpoint changes the potential by a closed-form amount, so the
expected one-step drift splits into per-midpoint terms (``rho``): negative for
shortening flips of g-crossing edges, positive for lengthening flips whose new
edge crosses g, zero otherwise.  This module computes both the closed form and
the brute-force expectation, derives the constants that make the potential
contract, and builds the non-increasing flip sequence that drives any state
to one containing g.

All arithmetic is type-generic: pass float parameters for speed or Fractions
for exact results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .edgeposet import EdgePoset, NotGroundEdge
from .geometry import (
    Edge,
    Pt,
    l1_length,
    midpoint2,
    minimal_parallelogram,
    mk_edge,
    open_segments_intersect,
)
from .region import compatible_edges
from .triangulation import EdgeClass, NotFlippable, Triangulation
from .trees import roots_of


class InvalidLambda(Exception):
    pass


@dataclass(frozen=True)
class LyapunovConfig:
    lam: object           # weight parameter in (0, 1); float or Fraction
    alpha: object         # contraction base in (1, lam**-0.5)
    C: int                # small-edge cutoff satisfying the two C-conditions
    c_prime: int          # small-tree cutoff satisfying the two C'-conditions
    psi0: float = 50.0    # contraction is only claimed above this level

    @property
    def eps_formula(self):
        a = self.alpha
        return (a - 1) ** 3 * (a + 1) ** 2 / (32 * a ** 5)


def _is_exact(value) -> bool:
    return isinstance(value, (Fraction, int))


def derive_config(lam, alpha_choice=None, psi0: float = 50.0) -> LyapunovConfig:
    """Pick alpha (default lam**-1/4) and the smallest valid C and C'."""
    try:
        ok = 0 < lam < 1
    except TypeError:
        raise InvalidLambda(repr(lam))
    if not ok:
        raise InvalidLambda("lambda must be in (0, 1), got %r" % (lam,))
    if alpha_choice is None:
        alpha = float(lam) ** -0.25
    else:
        alpha = alpha_choice
        if not (1 < alpha and alpha * alpha * lam < 1):
            raise InvalidLambda("alpha %r outside (1, lambda**-0.5)" % (alpha,))

    if _is_exact(alpha) and _is_exact(lam):
        C = _derive_c_exact(alpha)
        c_prime = _derive_cprime_exact(alpha, C)
    else:
        C = _derive_c_float(float(alpha))
        c_prime = _derive_cprime_float(float(alpha), C)
    return LyapunovConfig(lam=lam, alpha=alpha, C=C, c_prime=c_prime, psi0=psi0)


def _derive_c_exact(alpha: Fraction) -> int:
    # alpha**(-C/4) <= 1/10            <=> alpha**C >= 10**4
    # C*alpha**(-C/2) <= (a^2-1)/(10a^2) <=> 100*C^2*a^4 <= alpha**C * (a^2-1)^2
    a2m1_sq = (alpha * alpha - 1) ** 2
    a4 = alpha ** 4
    power = alpha * alpha  # alpha**C starting at C=2
    C = 2
    while not (power >= 10 ** 4 and 100 * C * C * a4 <= power * a2m1_sq):
        C += 1
        power *= alpha
    return C


def _derive_c_float(alpha: float) -> int:
    la = math.log(alpha)
    C = max(2, math.ceil(4 * math.log(10) / la))
    bound = math.log((alpha * alpha - 1) / (10 * alpha * alpha))
    while not (C * la >= 4 * math.log(10) and math.log(C) - C * la / 2 <= bound):
        C += 1
    return C


def _derive_cprime_exact(alpha: Fraction, C: int) -> int:
    lower = (3 + 2 / (alpha - 1)) * C * C
    cp = int(lower) + 1
    # monotonicity of alpha**x / x needs x >= 1/ln(alpha)
    cp = max(cp, math.ceil(1 / math.log(float(alpha))) + 1)
    lhs_const = 4 * alpha ** (2 * C)
    power = alpha ** cp
    while not (cp * lhs_const <= power):
        cp += 1
        power *= alpha
    return cp


def _derive_cprime_float(alpha: float, C: int) -> int:
    la = math.log(alpha)
    lower = (3 + 2 / (alpha - 1)) * C * C
    cp = int(lower) + 1
    cp = max(cp, math.ceil(1 / la) + 1)
    while not (math.log(4) + math.log(cp) + 2 * C * la <= cp * la):
        cp += 1
    return cp


# ---------------------------------------------------------------- potential

def _sum_terms(terms, alpha):
    if isinstance(alpha, float):
        return math.fsum(terms)
    return sum(terms)


def psi_g(sigma: Triangulation, g: Edge, cfg: LyapunovConfig,
          poset: EdgePoset | None = None, check_full: bool = False):
    """Total crossing weight of g in sigma; >= 1, == 1 exactly at ground."""
    if poset is None:
        poset = EdgePoset.of(sigma.region, sigma.bc)
    if g not in poset.ground_set():
        raise NotGroundEdge(repr(g))
    alpha = cfg.alpha
    lg = l1_length(g)
    terms = []
    for x, e in sigma.edge_of.items():
        if not open_segments_intersect(e, g):
            continue
        for h in poset.e_set(sigma, x, g, check_full=check_full):
            terms.append(alpha ** (l1_length(h) - lg))
    total = _sum_terms(terms, alpha)
    assert total >= 1 or math.isclose(float(total), 1.0, rel_tol=1e-9)
    return total


def flip_probability(lnew: int, lold: int, lam):
    """Heat-bath acceptance lam^lnew / (lam^lnew + lam^lold), shift-stabilized."""
    m = lnew if lnew < lold else lold
    a = lam ** (lnew - m)
    b = lam ** (lold - m)
    return a / (a + b)


def rho(sigma: Triangulation, x: Pt, g: Edge, cfg: LyapunovConfig,
        poset: EdgePoset | None = None):
    """Closed-form expected potential change from proposing a flip at x."""
    if poset is None:
        poset = EdgePoset.of(sigma.region, sigma.bc)
    if g not in poset.ground_set():
        raise NotGroundEdge(repr(g))
    alpha, lam = cfg.alpha, cfg.lam
    zero = alpha * 0
    if not sigma.is_flippable(x):
        return zero
    cls = sigma.classify(x)
    lg = l1_length(g)
    if cls is EdgeClass.DECREASING:
        e = sigma.edge_of[x]
        if not open_segments_intersect(e, g):
            return zero
        ps = sigma.psi(x)
        return -(alpha ** (l1_length(e) - lg)) / (1 + lam ** (2 * ps))
    if cls is EdgeClass.INCREASING:
        f = sigma.flipped_edge(x)
        if not open_segments_intersect(f, g):
            return zero
        ps = sigma.psi(x)
        lp = lam ** (2 * ps)
        return (alpha ** (l1_length(f) - lg)) * lp / (1 + lp)
    return zero


@dataclass(frozen=True)
class DriftRow:
    midpoint: Pt
    edge_class: str
    length: int
    psi_x: int | None
    rho: object


@dataclass(frozen=True)
class DriftReport:
    g: Edge
    lam: object
    alpha: object
    psi_value: object
    total_drift: object
    rows: tuple[DriftRow, ...]
    n_dec: int
    n_inc: int

    def csv_rows(self):
        for r in self.rows:
            yield (r.midpoint[0], r.midpoint[1], r.edge_class, r.length,
                   "" if r.psi_x is None else r.psi_x, r.rho)


def expected_drift(sigma: Triangulation, g: Edge, cfg: LyapunovConfig,
                   poset: EdgePoset | None = None) -> DriftReport:
    if poset is None:
        poset = EdgePoset.of(sigma.region, sigma.bc)
    rows = []
    contributions = []
    n_dec = n_inc = 0
    for x in sigma.region.midpoints:
        cls = sigma.classify(x)
        r = rho(sigma, x, g, cfg, poset)
        ps: int | None
        try:
            ps = sigma.psi(x)
        except NotFlippable:
            ps = None
        rows.append(DriftRow(x, cls.value, l1_length(sigma.edge_of[x]), ps, r))
        if r < 0:
            n_dec += 1
        elif r > 0:
            n_inc += 1
        contributions.append(r)
    total = _sum_terms(contributions, cfg.alpha) / len(sigma.region.midpoints)
    return DriftReport(g=g, lam=cfg.lam, alpha=cfg.alpha,
                       psi_value=psi_g(sigma, g, cfg, poset),
                       total_drift=total, rows=tuple(rows),
                       n_dec=n_dec, n_inc=n_inc)


def expected_drift_direct(sigma: Triangulation, g: Edge, cfg: LyapunovConfig,
                          poset: EdgePoset | None = None, full: bool = False):
    """Brute-force one-step expected potential change.

    With ``full``, the potential of every proposed flip result is recomputed
    from scratch; otherwise only the proposing midpoint's chain terms are
    re-evaluated (the other midpoints' edges, hence their chains, are
    untouched by the flip).  Neither path uses the closed form.
    """
    if poset is None:
        poset = EdgePoset.of(sigma.region, sigma.bc)
    if g not in poset.ground_set():
        raise NotGroundEdge(repr(g))
    alpha, lam = cfg.alpha, cfg.lam
    lg = l1_length(g)
    base = psi_g(sigma, g, cfg, poset) if full else None
    deltas = []
    for x in sigma.region.midpoints:
        if not sigma.is_flippable(x):
            continue
        lold = l1_length(sigma.edge_of[x])
        lnew = l1_length(sigma.flipped_edge(x))
        p = flip_probability(lnew, lold, lam)
        if full:
            trial = sigma.copy().flip(x)
            delta = psi_g(trial, g, cfg, poset) - base
        else:
            before = _sum_terms(
                [alpha ** (l1_length(h) - lg) for h in poset.e_set(sigma, x, g)], alpha)
            sigma.flip(x)
            after = _sum_terms(
                [alpha ** (l1_length(h) - lg) for h in poset.e_set(sigma, x, g)], alpha)
            sigma.flip(x)  # restore
            delta = after - before
        deltas.append(p * delta)
    return _sum_terms(deltas, alpha) / len(sigma.region.midpoints)


# ------------------------------------------------------------ ground drives

def drive_to_ground(sigma: Triangulation, g: Edge,
                    poset: EdgePoset | None = None) -> tuple[list[Pt], Triangulation]:
    """Non-increasing flips leading to a state that contains g.

    Every flipped edge open-crosses g; all flips strictly shorten except at
    most one final length-preserving diagonal swap (needed exactly when the
    chain above g's midpoint bottoms out at the opposite unit diagonal).
    """
    if poset is None:
        poset = EdgePoset.of(sigma.region, sigma.bc)
    if g not in poset.ground_set():
        raise NotGroundEdge(repr(g))
    cur = sigma.copy()
    flips: list[Pt] = []
    x = midpoint2(g)
    grounds = poset.ground_edges(x)

    budget = sum(l1_length(e) for e in cur.edge_of.values()
                 if open_segments_intersect(e, g)) + 8

    def decreasing_flip_toward(target_mid: Pt) -> None:
        y = min(roots_of(cur, target_mid))
        assert cur.classify(y) is EdgeClass.DECREASING, \
            "non-decreasing root %r while driving" % (y,)
        assert cur.is_flippable(y)
        old = cur.edge_of[y]
        assert open_segments_intersect(old, g), \
            "drive flipped an edge missing g: %r" % (old,)
        assert l1_length(cur.flipped_edge(y)) < l1_length(old)
        cur.flip(y)
        flips.append(y)

    while cur.edge_of[x] not in grounds:
        assert len(flips) < budget, "drive exceeded its flip budget"
        decreasing_flip_toward(x)
    if cur.edge_of[x] == g:
        return flips, cur

    # σ_x settled on the opposite unit diagonal; free the four unit sides of
    # the square, after which a single length-preserving flip lands on g.
    assert len(grounds) == 2 and cur.edge_of[x] in grounds
    mp = minimal_parallelogram(g)
    a, b = g.a, g.b
    for h in sorted((mk_edge(a, mp.p), mk_edge(a, mp.q),
                     mk_edge(b, mp.p), mk_edge(b, mp.q))):
        w = midpoint2(h)
        assert poset.ground_edges(w) == (h,)
        while cur.edge_of[w] != h:
            assert len(flips) < budget, "drive exceeded its flip budget"
            decreasing_flip_toward(w)
    old = cur.edge_of[x]
    assert l1_length(old) == l1_length(g) and open_segments_intersect(old, g)
    assert cur.flipped_edge(x) == g
    cur.flip(x)
    flips.append(x)
    return flips, cur


def _scaffold_requirements(poset: EdgePoset, apex: Edge) -> dict[Pt, Edge]:
    """Longest edge required per midpoint to support apex.

    Walks minimal parallelograms recursively: apex needs its four
    parallelogram sides, each side needs its own, and so on down to unit
    edges.  An edge already on the chain of a longer requirement at the
    same midpoint is built on the way up and adds nothing new.
    """
    seen: dict[Pt, Edge] = {}
    stack = [apex]
    while stack:
        e = stack.pop()
        if l1_length(e) <= 1:
            continue
        x = midpoint2(e)
        prev = seen.get(x)
        if prev is not None and (e == prev or e in poset.chain(prev)):
            continue
        if prev is None or l1_length(e) > l1_length(prev):
            seen[x] = e
        mp = minimal_parallelogram(e)
        for s in (mk_edge(e.a, mp.p), mk_edge(mp.p, e.b),
                  mk_edge(e.b, mp.q), mk_edge(mp.q, e.a)):
            if l1_length(s) > 1:
                stack.append(s)
    return seen


def build_containing(poset: EdgePoset, apex: Edge) -> tuple[Triangulation, list[Pt]]:
    """Smallest flip-constructed state containing the edge apex.

    Starting from the ground state, flips the recursive parallelogram
    scaffolding of apex in order of increasing length, so each flip finds
    the two faces it needs already in place and lengthens the edge at its
    midpoint.  Returns the state and the flip sequence; reversing the
    sequence drives the state back down.  Raises NotFlippable when some
    scaffolding edge cannot be placed (blocked by a constraint, or two
    requirements collide at one midpoint).
    """
    req = _scaffold_requirements(poset, apex)
    todo: list[Edge] = []
    for e in req.values():
        ch = poset.chain(e)
        todo.extend(reversed(ch[:-1]))
    todo.sort(key=l1_length)
    tri = poset.ground_triangulation()
    flips: list[Pt] = []
    for h in todo:
        x = midpoint2(h)
        if tri.edge_of[x] == h:
            continue
        if not tri.is_flippable(x) or tri.flipped_edge(x) != h:
            raise NotFlippable("cannot place %r at %r" % (h, x))
        tri.flip(x)
        flips.append(x)
    return tri, flips


def inflate_crossings(sigma: Triangulation, g: Edge, cfg: LyapunovConfig,
                      target, rng, max_flips: int = 100000,
                      poset: EdgePoset | None = None):
    """Build a certified state with psi_g >= target.

    The construction starts from the ground state of sigma's region (sigma
    itself only supplies the region and boundary condition).  Every edge
    through g's midpoint other than g crosses g, and its parallelogram
    scaffolding stacks further crossings beneath it, so candidate apexes
    are tried longest first and the best scaffold state is kept.  If that
    still misses the target, a local search spends the remaining flip
    budget: proposals concentrate near g, each flip is scored by its exact
    potential change, and the search hops back to the best state seen when
    progress stalls.  (Greedy climbing alone stalls far below useful
    targets -- the scaffold states are exactly its attractors.)

    The winning state is torn down with drive_to_ground and rebuilt by
    replaying the recorded flips backwards, certifying it as a reverse
    drive-to-ground construction.  Returns (build_flips, state) where
    replaying build_flips from the driven-down state reproduces state.
    """
    if poset is None:
        poset = EdgePoset.of(sigma.region, sigma.bc)
    if g not in poset.ground_set():
        raise NotGroundEdge(repr(g))
    x0 = midpoint2(g)
    apexes = [e for e in compatible_edges(sigma.region, sigma.bc, x0) if e != g]
    apexes.sort(key=lambda e: (-l1_length(e), e))
    best = poset.ground_triangulation()
    best_val = psi_g(best, g, cfg, poset)
    spent = 0
    for apex in apexes:
        if best_val >= target or spent >= max_flips:
            break
        try:
            tri, flips = build_containing(poset, apex)
        except NotFlippable:
            continue
        spent += max(len(flips), 1)
        val = psi_g(tri, g, cfg, poset)
        if val > best_val:
            best, best_val = tri, val

    if best_val < target:
        mids = sigma.region.midpoints
        near = [x for x in mids
                if max(abs(x[0] - x0[0]), abs(x[1] - x0[1])) <= 8]
        pool = list(mids) + 3 * near
        lg = l1_length(g)
        alpha = float(cfg.alpha)
        terms: dict[Edge, float] = {}

        def term(e: Edge) -> float:
            t = terms.get(e)
            if t is None:
                t = 0.0
                for h in poset.chain(e):
                    if not (h == g or open_segments_intersect(h, g)):
                        break
                    t += alpha ** (l1_length(h) - lg)
                terms[e] = t
            return t

        cur = best.copy()
        track = float(best_val)
        best_state, best_track = cur.copy(), track
        since_best = 0
        while True:
            if track >= float(target):
                exact = psi_g(cur, g, cfg, poset)
                if exact >= target:
                    best, best_val = cur, exact
                    break
                track = float(exact)
            if spent >= max_flips:
                raise AssertionError(
                    "failed to reach potential %r in %d flips"
                    % (target, max_flips))
            spent += 1
            since_best += 1
            if since_best > 20000:
                cur = best_state.copy()
                track = best_track
                since_best = 0
            x = pool[rng.randrange(len(pool))]
            if not cur.is_flippable(x):
                continue
            d = term(cur.flipped_edge(x)) - term(cur.edge_of[x])
            if d > 0 or (d == 0 and rng.random() < 0.5) \
                    or (d < 0 and rng.random() < 0.02):
                cur.flip(x)
                track += d
                if track > best_track + 1e-9:
                    best_track = track
                    best_state = cur.copy()
                    since_best = 0

    down_flips, low = drive_to_ground(best, g, poset=poset)
    build_flips = list(reversed(down_flips))
    rebuilt = low
    for x in build_flips:
        rebuilt.flip(x)
    assert rebuilt.edge_of == best.edge_of, "reverse drive failed to rebuild"
    return build_flips, rebuilt


# ------------------------------------------------------------- bound checks

def largest_intersection_bound_check(sigma: Triangulation, g: Edge,
                                     cfg: LyapunovConfig,
                                     poset: EdgePoset | None = None) -> bool:
    """Longest g-crossing edge is at most |g| + log(psi)/log(alpha)."""
    value = psi_g(sigma, g, cfg, poset)
    lg = l1_length(g)
    longest = max((l1_length(e) for e in sigma.edge_of.values()
                   if open_segments_intersect(e, g)), default=lg)
    bound = cfg.alpha ** (longest - lg)
    if isinstance(cfg.alpha, float):
        return bound <= float(value) * (1 + 1e-9)
    return bound <= value


def crossing_count_bound_check(sigma: Triangulation, g: Edge,
                               cfg: LyapunovConfig,
                               poset: EdgePoset | None = None) -> bool:
    """Number of g-crossing edges is at most psi_g."""
    value = psi_g(sigma, g, cfg, poset)
    count = sum(1 for e in sigma.edge_of.values()
                if open_segments_intersect(e, g))
    if isinstance(cfg.alpha, float):
        return count <= float(value) * (1 + 1e-9)
    return count <= value
