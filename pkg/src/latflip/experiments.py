"""Statistical experiments on the flip chain.

Edge-length tails, small-triangle left-right crossings, unit-vertical
column counts, coupled-chain window agreement, ground-edge frequency, and
vertex-degree tails.  Every experiment is driven by an ExperimentPlan and is
reproducible from its seed.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Mapping, Sequence

from .geometry import Edge, Pt, l1_length, mk_edge, midpoint2
from .region import BoundaryCondition, Region, make_boundary_condition, rectangle
from .edgeposet import EdgePoset
from .triangulation import Triangulation
from .rng import derive_seed
from .chainkernel import kernel_triangulation, make_kernel
from .dynamics import MidpointSetMismatch

Z_THREE_SIGMA = 3.0


def default_burn_in(region: Region) -> int:
    """20 * |midpoints| * log |midpoints| heat-bath proposals."""
    m = len(region.midpoints)
    return int(20 * m * math.log(m)) if m > 1 else 20


def default_thin(region: Region) -> int:
    return len(region.midpoints)


@dataclass(frozen=True)
class ExperimentPlan:
    """Everything needed to rerun an experiment bit-identically."""

    region: Region
    bc: BoundaryCondition
    lam: float
    seed: int
    burn_in: int | None = None      # None -> default_burn_in(region)
    thin: int | None = None         # None -> default_thin(region)
    n_samples: int = 200
    params: Mapping = field(default_factory=dict)

    def __post_init__(self):
        if self.burn_in is not None and self.burn_in < 0:
            raise ValueError("burn_in must be >= 0")
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")

    @property
    def effective_burn_in(self) -> int:
        return default_burn_in(self.region) if self.burn_in is None else self.burn_in

    @property
    def effective_thin(self) -> int:
        return default_thin(self.region) if self.thin is None else self.thin


def plan_for(region: Region, lam: float, seed: int, *, constraints=(),
             burn_in: int | None = None, thin: int | None = None,
             n_samples: int = 200, **params) -> ExperimentPlan:
    bc = make_boundary_condition(region, constraints)
    return ExperimentPlan(region=region, bc=bc, lam=lam, seed=seed,
                          burn_in=burn_in, thin=thin, n_samples=n_samples,
                          params=dict(params))


def stationary_samples(plan: ExperimentPlan,
                       start: Triangulation | None = None,
                       ) -> Iterator[Triangulation]:
    """Yield n_samples states: burn in from the ground state, then thin."""
    if start is None:
        start = EdgePoset.of(plan.region, plan.bc).ground_triangulation()
    kernel = make_kernel(start, plan.lam, derive_seed(plan.seed, 0))
    kernel.run(plan.effective_burn_in)
    thin = plan.effective_thin
    for _ in range(plan.n_samples):
        yield kernel_triangulation(plan.region, plan.bc, kernel)
        kernel.run(thin)


# --------------------------------------------------------------------------
# Edge-length tail at one midpoint.

@dataclass(frozen=True)
class TailReport:
    """Empirical tail of a nonnegative statistic with a log-linear fit.

    rows: (offset, count, phat) for P(value >= floor + offset), offset
    0..max observed.  The fit uses the model log P(offset) = -beta * offset
    anchored at P(0) = 1, weighted least squares through the origin with
    delta-method variances; beta_hat > 0 means geometric decay.  slope is
    the fitted slope of log P (i.e. -beta_hat), slope_se its standard error.
    """

    floor: int
    n: int
    rows: tuple[tuple[int, int, float], ...]
    beta_hat: float
    beta_se: float

    @property
    def slope(self) -> float:
        return -self.beta_hat

    @property
    def slope_se(self) -> float:
        return self.beta_se

    def decays_at_three_sigma(self) -> bool:
        return self.beta_hat - Z_THREE_SIGMA * self.beta_se > 0

    def phat(self, offset: int) -> float:
        for off, _, p in self.rows:
            if off == offset:
                return p
        return 0.0

    def meets_rate_gate(self, rate: float) -> bool:
        """True when the fitted decay is at least `rate` per unit offset."""
        return self.beta_hat >= rate


def tail_from_values(values: Sequence[int], floor: int) -> TailReport:
    n = len(values)
    if n == 0:
        raise ValueError("no samples")
    if min(values) < floor:
        raise ValueError("values below the declared floor")
    hi = max(values)
    rows = []
    pts = []  # (offset, log phat, variance) for 0 < phat < 1
    for off in range(hi - floor + 1):
        cnt = sum(1 for v in values if v >= floor + off)
        p = cnt / n
        rows.append((off, cnt, p))
        if off > 0 and 0 < cnt < n:
            pts.append((off, math.log(p), (1.0 - p) / (n * p)))
    if pts:
        swx2 = sum(off * off / var for off, _, var in pts)
        swxy = sum(off * y / var for off, y, var in pts)
        beta = -swxy / swx2
        se = math.sqrt(1.0 / swx2)
    else:
        # No stochastic point: every sample sat at the floor.
        beta = float("inf")
        se = 0.0
    return TailReport(floor=floor, n=n, rows=tuple(rows),
                      beta_hat=beta, beta_se=se)


def edge_tail(plan: ExperimentPlan, x: Pt, g: Edge) -> TailReport:
    """Stationary tail of the edge length at midpoint x above |g|.

    g must be a ground edge of x, so the length floor |g| is deterministic.
    """
    poset = EdgePoset.of(plan.region, plan.bc)
    if g not in poset.ground_edges(x):
        raise ValueError("g is not a ground edge of x")
    glen = l1_length(g)
    values = [l1_length(s.edge_of[x]) for s in stationary_samples(plan)]
    return tail_from_values(values, glen)


# --------------------------------------------------------------------------
# Left-right crossings by small triangles.

Face = tuple[Pt, Pt, Pt]


def _face_edges(face) -> tuple[Edge, Edge, Edge]:
    a, b, c = sorted(face)
    return (mk_edge(a, b), mk_edge(a, c), mk_edge(b, c))


def small_triangle_crossing(sigma: Triangulation, rect: tuple[int, int, int, int],
                            max_len: int) -> tuple[bool, list[Face] | None]:
    """Does a path of short triangles cross rect from left to right?

    rect = (x0, y0, x1, y1) in original units, width >= 1, inside the
    region, with no constraint edge entering its interior.  Eligible
    triangles lie inside rect with every side of length <= max_len; two
    triangles are adjacent when they share an edge.  Returns (True, path)
    for a left-to-right connected component (the path is a chain of
    adjacent faces from a left-touching to a right-touching triangle),
    else (False, None).
    """
    x0, y0, x1, y1 = rect
    if x1 - x0 < 1 or y1 - y0 < 0:
        raise ValueError("rect must have width >= 1")
    dx0, dy0, dx1, dy1 = 2 * x0, 2 * y0, 2 * x1, 2 * y1
    for e in sigma.bc.edges:
        if _segment_enters_open_rect(e, dx0, dy0, dx1, dy1):
            raise ValueError("constraint edge %r enters the rectangle" % (e,))

    faces = []
    for face in sorted(tuple(sorted(f)) for f in sigma.faces()):
        if not all(dx0 <= p[0] <= dx1 and dy0 <= p[1] <= dy1 for p in face):
            continue
        if any(l1_length(e) > max_len for e in _face_edges(face)):
            continue
        faces.append(face)
    index = {f: i for i, f in enumerate(faces)}
    by_edge: dict[Edge, list[int]] = {}
    for i, f in enumerate(faces):
        for e in _face_edges(f):
            by_edge.setdefault(e, []).append(i)
    adj: list[list[int]] = [[] for _ in faces]
    for ids in by_edge.values():
        if len(ids) == 2:
            a, b = ids
            adj[a].append(b)
            adj[b].append(a)

    left = [i for i, f in enumerate(faces) if any(p[0] == dx0 for p in f)]
    prev = {i: None for i in left}
    queue = deque(left)
    while queue:
        i = queue.popleft()
        if any(p[0] == dx1 for p in faces[i]):
            path = []
            k = i
            while k is not None:
                path.append(faces[k])
                k = prev[k]
            path.reverse()
            return True, path
        for j in adj[i]:
            if j not in prev:
                prev[j] = i
                queue.append(j)
    return False, None


def _segment_enters_open_rect(e: Edge, x0, y0, x1, y1) -> bool:
    """Exact test: does the open segment meet the open axis box?

    All coordinates doubled.  Clips the parameter interval of the segment
    against each slab in rationals; a nonempty open overlap whose midpoint
    lies strictly inside the box certifies intersection (the clipped part
    of a segment is a segment, so its midpoint is interior to it).
    """
    ax, ay = e.a
    bx, by = e.b
    t0, t1 = Fraction(0), Fraction(1)
    for (p, q, lo, hi) in ((ax, bx, x0, x1), (ay, by, y0, y1)):
        d = q - p
        if d == 0:
            if not lo <= p <= hi:
                return False
            continue
        ta = Fraction(lo - p, d)
        tb = Fraction(hi - p, d)
        if ta > tb:
            ta, tb = tb, ta
        t0 = max(t0, ta)
        t1 = min(t1, tb)
    if t0 >= t1:
        return False
    tm = (t0 + t1) / 2
    px = ax + tm * (bx - ax)
    py = ay + tm * (by - ay)
    return x0 < px < x1 and y0 < py < y1


def verify_crossing_path(path: Sequence[Face], rect: tuple[int, int, int, int],
                         max_len: int) -> bool:
    """Independent check of a witness path from small_triangle_crossing."""
    if not path:
        return False
    x0, y0, x1, y1 = rect
    dx0, dy0, dx1, dy1 = 2 * x0, 2 * y0, 2 * x1, 2 * y1
    for f in path:
        if not all(dx0 <= p[0] <= dx1 and dy0 <= p[1] <= dy1 for p in f):
            return False
        if any(l1_length(e) > max_len for e in _face_edges(f)):
            return False
    for f, g in zip(path, path[1:]):
        if len(set(f) & set(g)) != 2:
            return False
    if not any(p[0] == dx0 for p in path[0]):
        return False
    if not any(p[0] == dx1 for p in path[-1]):
        return False
    return True


def crossing_frequency(plan: ExperimentPlan, rect: tuple[int, int, int, int],
                       max_len: int) -> tuple[float, int]:
    """Fraction of stationary samples with a left-right short-triangle path."""
    hits = 0
    n = 0
    for s in stationary_samples(plan):
        ok, path = small_triangle_crossing(s, rect, max_len)
        if ok and not verify_crossing_path(path, rect, max_len):
            raise AssertionError("crossing path failed verification")
        hits += bool(ok)
        n += 1
    return hits / n, n


# --------------------------------------------------------------------------
# Unit-vertical column crossings on a strip.

def unit_vertical_crossings(sigma: Triangulation,
                            rect: tuple[int, int, int, int] | None = None,
                            ) -> int:
    """Interior columns whose unit vertical edges are all present.

    rect = (x0, y0, x1, y1) in original units (default: the region's
    bounding box).  A column c strictly between x0 and x1 counts when the
    edge (c, j)-(c, j+1) is in sigma for every j in [y0, y1).  Boundary
    columns are excluded by the strict inequality.
    """
    region = sigma.region
    if rect is None:
        xs = [v[0] // 2 for v in region.vertices]
        ys = [v[1] // 2 for v in region.vertices]
        rect = (min(xs), min(ys), max(xs), max(ys))
    x0, y0, x1, y1 = rect
    count = 0
    for c in range(x0 + 1, x1):
        ok = True
        for j in range(y0, y1):
            mid = (2 * c, 2 * j + 1)
            e = sigma.edge_of.get(mid)
            if e is None or e != mk_edge((2 * c, 2 * j), (2 * c, 2 * j + 2)):
                ok = False
                break
        count += ok
    return count


def column_crossing_stats(plan: ExperimentPlan,
                          rect: tuple[int, int, int, int] | None = None,
                          ) -> tuple[float, float, int]:
    """Mean and standard error of the column-crossing count at stationarity."""
    vals = [unit_vertical_crossings(s, rect) for s in stationary_samples(plan)]
    n = len(vals)
    mean = sum(vals) / n
    var = sum((v - mean) ** 2 for v in vals) / (n - 1) if n > 1 else 0.0
    return mean, math.sqrt(var / n), n


# --------------------------------------------------------------------------
# Coupled-chain window agreement.

@dataclass(frozen=True)
class CouplingReport:
    separation: int
    frequency: float
    se: float
    n: int


def window_midpoints(region: Region, x_lo: int, x_hi: int) -> tuple[Pt, ...]:
    """Midpoints whose edges' centers lie in original-unit columns [x_lo, x_hi]."""
    return tuple(m for m in region.midpoints
                 if 2 * x_lo <= m[0] <= 2 * x_hi)


def coupling_agreement(plan_a: ExperimentPlan, plan_b: ExperimentPlan,
                       window: Sequence[Pt], separation: int = 0,
                       ) -> CouplingReport:
    """Frequency that two coupled chains agree on every window midpoint.

    Both plans must share region, weight and sampling schedule; their
    constraint sets may differ away from the window.  The chains consume a
    shared (midpoint, coin) draw each step.
    """
    if plan_a.region is not plan_b.region and \
            plan_a.region.midpoints != plan_b.region.midpoints:
        raise MidpointSetMismatch("plans must share the midpoint set")
    if plan_a.lam != plan_b.lam:
        raise ValueError("plans must share the weight parameter")
    sa = EdgePoset.of(plan_a.region, plan_a.bc).ground_triangulation()
    sb = EdgePoset.of(plan_b.region, plan_b.bc).ground_triangulation()
    ka = make_kernel(sa, plan_a.lam, derive_seed(plan_a.seed, 1))
    kb = make_kernel(sb, plan_b.lam, derive_seed(plan_a.seed, 1))
    ka.coupled_run(kb, plan_a.effective_burn_in)
    idx = [ka.index_of(m[0], m[1]) for m in window]
    idx_b = [kb.index_of(m[0], m[1]) for m in window]
    thin = plan_a.effective_thin
    hits = 0
    n = plan_a.n_samples
    for _ in range(n):
        agree = all(ka.get_edge(i) == kb.get_edge(j)
                    for i, j in zip(idx, idx_b))
        hits += agree
        ka.coupled_run(kb, thin)
    p = hits / n
    se = math.sqrt(max(p * (1 - p), 1.0 / n) / n)
    return CouplingReport(separation=separation, frequency=p, se=se, n=n)


def wall_constraints(x: int, k: int) -> tuple[tuple[tuple[int, int], tuple[int, int]], ...]:
    """A column of unit vertical constraint edges at original abscissa x."""
    return tuple((((x, j), (x, j + 1))) for j in range(k))


def coupling_separation_sweep(n: int, k: int, lam: float, seed: int,
                              window_hi: int, seps: Sequence[int],
                              n_samples: int = 400) -> list[CouplingReport]:
    """Window agreement vs distance to a differing constraint wall.

    Fixed n x k strip; chain A is free, chain B forces a wall of unit
    verticals at column window_hi + m.  The window is columns [0, window_hi].
    """
    region = rectangle(n, k)
    window = window_midpoints(region, 0, window_hi)
    out = []
    for m in seps:
        wall = window_hi + m
        if not 0 < wall < n:
            raise ValueError("wall column %d outside the strip" % wall)
        plan_a = plan_for(region, lam, derive_seed(seed, m, 0),
                          n_samples=n_samples)
        plan_b = plan_for(region, lam, derive_seed(seed, m, 1),
                          constraints=wall_constraints(wall, k),
                          n_samples=n_samples)
        out.append(coupling_agreement(plan_a, plan_b, window, separation=m))
    return out


# --------------------------------------------------------------------------
# Ground-edge frequency and vertex degree.

def wilson_interval(hits: int, n: int, z: float = Z_THREE_SIGMA,
                    ) -> tuple[float, float, float]:
    """(point estimate, lower, upper) for a binomial proportion."""
    if n <= 0:
        raise ValueError("need at least one sample")
    p = hits / n
    denom = 1 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return p, max(0.0, center - half), min(1.0, center + half)


@dataclass(frozen=True)
class FrequencyReport:
    frequency: float
    lower: float
    upper: float
    n: int


def ground_state_frequency(plan: ExperimentPlan, g: Edge) -> FrequencyReport:
    """Stationary frequency that the ground edge g is present."""
    poset = EdgePoset.of(plan.region, plan.bc)
    x = midpoint2(g)
    if g not in poset.ground_edges(x):
        raise ValueError("g is not a ground edge")
    hits = 0
    n = 0
    for s in stationary_samples(plan):
        hits += s.edge_of[x] == g
        n += 1
    p, lo, hi = wilson_interval(hits, n)
    return FrequencyReport(frequency=p, lower=lo, upper=hi, n=n)


def vertex_degree(sigma: Triangulation, v: Pt) -> int:
    """Number of triangulation edges incident to the lattice point v."""
    return sum(1 for e in sigma.edge_of.values() if v in (e.a, e.b))


def degree_tail(plan: ExperimentPlan, v: Pt) -> TailReport:
    """Stationary tail of the degree of lattice vertex v."""
    if v not in plan.region.lattice_points:
        raise ValueError("vertex %r not in the region" % (v,))
    values = [vertex_degree(s, v) for s in stationary_samples(plan)]
    return tail_from_values(values, min(values))
