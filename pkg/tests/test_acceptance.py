"""End-to-end acceptance gates, one test per shipped guarantee.

Each test computes every gate for its criterion, records a single PASS/FAIL
line (printed in the pytest terminal summary), and then asserts the verdict.
Statistical gates use three-sigma margins; exact gates use integer, Fraction,
or tight float comparisons.
"""

import math
import os
import statistics
import time
from collections import Counter
from fractions import Fraction

import pytest
from conftest import record_acceptance

from latflip.chainkernel import make_kernel
from latflip.cli import main
from latflip.dynamics import (
    hitting_time_experiment,
    random_state,
    state_key,
    stationary_weights,
    transition_matrix,
)
from latflip.edgeposet import EdgePoset, e_set
from latflip.enumeration import (
    conditional_ground_prob,
    enumerate_triangulations,
    exact_measure,
    fkg_search,
    tv_distance,
    verify_witness,
)
from latflip.experiments import (
    column_crossing_stats,
    coupling_separation_sweep,
    edge_tail,
    plan_for,
)
from latflip.geometry import (
    edge,
    l1_length,
    midpoint2,
    open_segments_intersect,
    squares_crossed,
)
from latflip.lyapunov import (
    crossing_count_bound_check,
    derive_config,
    drive_to_ground,
    expected_drift,
    expected_drift_direct,
    inflate_crossings,
    largest_intersection_bound_check,
    psi_g,
)
from latflip.region import build_region, make_boundary_condition, rectangle
from latflip.reporting import sha256_file
from latflip.rng import Xoshiro256StarStar
from latflip.trees import (
    build_tree,
    partition_definitional_check,
    roots_of,
    s_nesting_check,
    smallest_edge_hierarchy_check,
)
from latflip.triangulation import EdgeClass, Triangulation

_RECTS: dict = {}


def rect(nx, ny):
    """Cached (region, bc, poset) for a free nx x ny rectangle."""
    got = _RECTS.get((nx, ny))
    if got is None:
        region = rectangle(nx, ny)
        bc = make_boundary_condition(region)
        got = _RECTS[(nx, ny)] = (region, bc, EdgePoset.of(region, bc))
    return got


# --------------------------------------------------------------------- 1


def test_criterion_1_enumeration_counts():
    t0 = time.perf_counter()
    ok = True
    region, bc, _ = rect(1, 1)
    ok &= len(enumerate_triangulations(region, bc)) == 2
    strip_counts = []
    for n in range(1, 7):
        region, bc, _ = rect(n, 1)
        space = enumerate_triangulations(region, bc)
        strip_counts.append(len(space))
        ok &= len(space) == math.comb(2 * n, n)
        ok &= len(space) <= space.anclin_bound()
    region, bc, _ = rect(2, 2)
    space = enumerate_triangulations(region, bc)
    ok &= len(space) == 64 and len(space) <= space.anclin_bound()
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 60.0
    assert record_acceptance(
        1, ok, "strip counts %s, branching bound holds, %.1fs"
        % (strip_counts, elapsed))


# --------------------------------------------------------------------- 2

# Corner lists (original units); every polygon is non-rectangular and its
# boundary walk visits each boundary lattice point exactly once.
POLYGON_CATALOG = (
    ("triangle3", ((0, 0), (3, 0), (0, 3))),
    ("l-shape", ((0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2))),
    ("parallelogram", ((0, 0), (3, 0), (5, 2), (2, 2))),
    ("trapezoid", ((0, 0), (4, 0), (3, 1), (1, 1))),
    ("staircase", ((0, 0), (2, 0), (2, 1), (3, 1), (3, 2), (4, 2), (4, 3),
                   (0, 3))),
    ("t-shape", ((0, 0), (3, 0), (3, 1), (2, 1), (2, 2), (1, 2), (1, 1),
                 (0, 1))),
    ("plus", ((1, 0), (2, 0), (2, 1), (3, 1), (3, 2), (2, 2), (2, 3), (1, 3),
              (1, 2), (0, 2), (0, 1), (1, 1))),
    ("triangle4", ((0, 0), (4, 0), (0, 4))),
    ("hexagon", ((0, 0), (2, 0), (3, 1), (3, 2), (1, 2), (0, 1))),
    ("u-shape", ((0, 0), (3, 0), (3, 2), (2, 2), (2, 1), (1, 1), (1, 2),
                 (0, 2))),
)


def boundary_walk(corners):
    walk = []
    for i, a in enumerate(corners):
        b = corners[(i + 1) % len(corners)]
        dx, dy = b[0] - a[0], b[1] - a[1]
        g = math.gcd(abs(dx), abs(dy))
        for t in range(g):
            walk.append((a[0] + t * dx // g, a[1] + t * dy // g))
    return walk


def is_axis_rectangle(corners):
    if len(corners) != 4:
        return False
    return all(a[0] == b[0] or a[1] == b[1]
               for a, b in zip(corners, corners[1:] + corners[:1]))


def test_criterion_2_edge_count_identities():
    ok = True
    for n in range(1, 21):
        region = rectangle(n, n)
        ok &= len(region.midpoints) == 3 * n * n + 2 * n
    checked = 0
    for name, corners in POLYGON_CATALOG:
        assert not is_axis_rectangle(list(corners)), name
        walk = boundary_walk(list(corners))
        region = build_region(walk)
        # independent I and B: shoelace area plus Pick's theorem on the walk
        b_count = len(walk)
        shoelace = abs(sum(a[0] * b[1] - b[0] * a[1]
                           for a, b in zip(walk, walk[1:] + walk[:1])))
        assert (shoelace - b_count + 2) % 2 == 0
        i_count = (shoelace - b_count + 2) // 2
        ok &= len(region.midpoints) == 3 * i_count + 2 * b_count - 3
        checked += 1
    ok &= checked == 10
    assert record_acceptance(
        2, ok, "3n^2+2n on squares n=1..20; 3I+2B-3 on %d polygons" % checked)


# --------------------------------------------------------------------- 3


def test_criterion_3_drift_identity():
    plan = (((2, 2), 3000), ((3, 2), 3000), ((4, 4), 2500), ((6, 3), 1000),
            ((8, 8), 600))
    lams = (0.3, 0.5, 0.8)
    cfgs = [derive_config(l) for l in lams]
    rng = Xoshiro256StarStar(30301)
    pairs = 0
    max_rel = 0.0
    for (nx, ny), count in plan:
        region, bc, poset = rect(nx, ny)
        grounds = sorted(poset.ground_set())
        m = len(region.midpoints)
        for i in range(count):
            sigma = random_state(region, bc, rng, flips=2 * m)
            g = grounds[rng.randrange(len(grounds))]
            cfg = cfgs[pairs % 3]
            # recompute the full potential from scratch on a subsample
            full = (nx, ny) == (3, 2) and i % 15 == 0
            a = expected_drift(sigma, g, cfg, poset).total_drift
            b = expected_drift_direct(sigma, g, cfg, poset, full=full)
            max_rel = max(max_rel, abs(a - b) / max(1.0, abs(a), abs(b)))
            pairs += 1
    ok = pairs >= 10000 and max_rel <= 1e-12

    # the same identity in exact rational arithmetic
    exact_ok = True
    region, bc, poset = rect(3, 2)
    grounds = sorted(poset.ground_set())
    for lam, alpha in ((Fraction(1, 2), Fraction(5, 4)),
                       (Fraction(3, 10), Fraction(3, 2))):
        cfg = derive_config(lam, alpha_choice=alpha)
        for _ in range(30):
            sigma = random_state(region, bc, rng, flips=80)
            g = grounds[rng.randrange(len(grounds))]
            a = expected_drift(sigma, g, cfg, poset).total_drift
            b = expected_drift_direct(sigma, g, cfg, poset)
            exact_ok &= a == b
    ok &= exact_ok
    assert record_acceptance(
        3, ok, "%d pairs, max rel err %.2e, exact-rational subset %s"
        % (pairs, max_rel, exact_ok))


# ------------------------------------------------------------------ 4, 9


@pytest.fixture(scope="module")
def contraction_ensemble():
    """>= 10^3 distinct certified states on 8x8 with psi >= psi0 = 50.

    Built by a flip walk around a scaffold state, rejecting any move that
    drops the potential below psi0.  Every kept state is certified as a
    reverse drive-to-ground construction: tearing it down with
    drive_to_ground and replaying the flips backwards reproduces it exactly.
    """
    region, bc, poset = rect(8, 8)
    cfg = derive_config(0.5)
    g = edge(4, 3, 4, 4)
    rng = Xoshiro256StarStar(20260825)
    _, base = inflate_crossings(poset.ground_triangulation(), g, cfg, 60.0,
                                rng, poset=poset)
    psi_base = psi_g(base, g, cfg, poset)
    m = len(region.midpoints)
    free = [x for x in region.midpoints if x not in bc.by_midpoint]
    cur = base.copy()
    kept: dict = {}
    samples: list = []
    negative = 0
    certified = 0
    eps_hat = math.inf
    psi_lo, psi_hi = math.inf, 0.0
    attempts = 0
    while len(kept) < 1000 and attempts < 100000:
        attempts += 1
        x = free[rng.randrange(len(free))]
        if not cur.is_flippable(x):
            continue
        cur.flip(x)
        report = expected_drift(cur, g, cfg, poset)
        psi = float(report.psi_value)
        if psi < cfg.psi0:
            cur.flip(x)
            continue
        key = state_key(cur)
        if key in kept:
            continue
        kept[key] = True
        drift = float(report.total_drift)
        negative += drift < 0
        eps_hat = min(eps_hat, -drift * m / psi)
        psi_lo, psi_hi = min(psi_lo, psi), max(psi_hi, psi)
        if len(kept) % 40 == 0:
            samples.append(cur.copy())
        down, low = drive_to_ground(cur, g, poset=poset)
        for y in reversed(down):
            low.flip(y)
        certified += low.edge_of == cur.edge_of
    return {
        "region": region, "bc": bc, "poset": poset, "cfg": cfg, "g": g,
        "base": base, "psi_base": psi_base, "n_states": len(kept),
        "negative": negative, "certified": certified, "eps_hat": eps_hat,
        "psi_lo": psi_lo, "psi_hi": psi_hi, "samples": samples,
    }


def test_criterion_4_supermartingale_contraction(contraction_ensemble):
    ce = contraction_ensemble
    n = ce["n_states"]
    ok = (n >= 1000 and ce["negative"] == n and ce["certified"] == n
          and ce["eps_hat"] > 0 and ce["psi_lo"] >= 50.0)

    # drift signs re-proved in exact rational arithmetic on a subsample
    cfg_exact = derive_config(Fraction(1, 2), alpha_choice=Fraction(5, 4))
    exact_ok = True
    for sigma in ce["samples"]:
        d = expected_drift(sigma, ce["g"], cfg_exact, ce["poset"]).total_drift
        exact_ok &= isinstance(d, Fraction) and d < 0
    ok &= exact_ok and len(ce["samples"]) >= 20
    assert record_acceptance(
        4, ok, "%d states, psi in [%.1f, %.1f], 100%% drift<0: %s, "
        "eps_hat=%.4f, exact subsample(%d) %s"
        % (n, ce["psi_lo"], ce["psi_hi"], ce["negative"] == n,
           ce["eps_hat"], len(ce["samples"]), exact_ok))


def test_criterion_9_hitting_time_moment_bound(contraction_ensemble):
    ce = contraction_ensemble
    cfg = ce["cfg"]
    m = len(ce["region"].midpoints)
    psi_start = float(ce["psi_base"])
    times = hitting_time_experiment(
        ce["base"], ce["g"], cfg.psi0, 10 ** 6, lam=0.5, alpha=cfg.alpha,
        psi_init=psi_start, seed=909090, n_runs=1000)
    finished = [t for t in times if t >= 0]
    rate = 1.0 + ce["eps_hat"] / m
    vals = [rate ** t for t in finished]
    mean = statistics.fmean(vals)
    se = statistics.stdev(vals) / math.sqrt(len(vals))
    bound = psi_start * (1.0 + 3.0 * se)
    ok = len(finished) == 1000 and mean <= bound
    assert record_acceptance(
        9, ok, "1000/1000 runs finished: %s; mean (1+eps/m)^T = %.3f <= "
        "%.2f (psi_start %.2f, mean T %.0f)"
        % (len(finished) == 1000, mean, bound, psi_start,
           statistics.fmean(finished) if finished else -1))


# --------------------------------------------------------------------- 5


def test_criterion_5_stationarity():
    t0 = time.perf_counter()
    region, bc, poset = rect(2, 2)
    space = enumerate_triangulations(region, bc)
    states = [Triangulation.from_edges(region, bc, s) for s in space.states]
    lam = Fraction(4, 5)
    P = transition_matrix(states, lam)
    w = stationary_weights(states, lam)
    n = len(states)
    balanced = all(w[i] * P[i][j] == w[j] * P[j][i]
                   for i in range(n) for j in range(n))

    measure = exact_measure(space, lam)
    ground = poset.ground_triangulation()
    kernel = make_kernel(ground, 0.8, 424242)
    idx2mid = [None] * len(region.midpoints)
    for x in region.midpoints:
        idx2mid[kernel.index_of(x[0], x[1])] = x
    mirror = ground.copy()
    counts: Counter = Counter()
    key = state_key(mirror)
    steps = 10 ** 6
    for _ in range(steps):
        out, i = kernel.step()
        if out == 0:
            mirror.flip(idx2mid[i])
            key = state_key(mirror)
        counts[key] += 1
    tv = tv_distance(counts, measure)
    elapsed = time.perf_counter() - t0
    ok = balanced and n == 64 and tv < 0.05 and elapsed < 60.0
    assert record_acceptance(
        5, ok, "exact detailed balance on %d states: %s; TV after 1e6 steps "
        "= %.4f; %.1fs" % (n, balanced, tv, elapsed))


# --------------------------------------------------------------------- 6


class SuiteTally:
    def __init__(self):
        self.counts: Counter = Counter()
        self.failures: list = []

    def check(self, suite, condition, context):
        self.counts[suite] += 1
        if not condition:
            self.failures.append((suite, context))


def run_invariant_suites(region, bc, poset, cfg, sigma, rng, tally,
                         exhaustive=False):
    """One pass of every structure suite over a single state.

    With exhaustive=True every midpoint/root/ground-edge is visited;
    otherwise one uniformly random representative is checked per suite.
    """
    mids = region.midpoints
    grounds = sorted(poset.ground_set())

    def pick(pool):
        return list(pool) if exhaustive else [pool[rng.randrange(len(pool))]]

    # flip involution and length change
    flippable = [x for x in mids if sigma.is_flippable(x)]
    for x in pick(flippable):
        old, new = sigma.edge_of[x], sigma.flipped_edge(x)
        d = l1_length(new) - l1_length(old)
        if d == 0:
            tally.check("flip", l1_length(old) == 2 == l1_length(new),
                        ("tie", x))
        else:
            tally.check("flip", abs(d) == 2 * sigma.psi(x), ("2psi", x))
        twice = sigma.copy().flip(x).flip(x)
        tally.check("flip", twice.edge_of == sigma.edge_of, ("involution", x))

    # influence trees: shape, nesting, leaf sums, cell containment
    rootable = [x for x in mids if sigma.classify(x) in
                (EdgeClass.DECREASING, EdgeClass.UNIT_DIAG_TOP)]
    for r in pick(rootable):
        tree = build_tree(sigma, r)
        root_len = l1_length(sigma.edge_of[r])
        shape = all(l1_length(sigma.edge_of[y]) < root_len
                    and y in tree.children[tree.parent[y]]
                    for y in tree.nodes if y != r)
        sums = all(sum(l1_length(sigma.edge_of[y]) for y in tree.leaves(s))
                   == root_len for s in tree.sides)
        root_cells = squares_crossed(sigma.edge_of[r])
        contained = all(squares_crossed(sigma.edge_of[y]) <= root_cells
                        for y in tree.nodes)
        tally.check("tree", shape and sums, ("shape/sums", r))
        tally.check("tree", s_nesting_check(sigma, tree), ("nesting", r))
        tally.check("tree", smallest_edge_hierarchy_check(sigma, tree),
                    ("hierarchy", r))
        tally.check("containment", contained, r)

    # tau-inverse cardinality: every midpoint lies in one or two trees
    for z in pick(mids):
        roots = roots_of(sigma, z)
        member = all(z in build_tree(sigma, r).nodes for r in roots)
        tally.check("tau-inverse", 1 <= len(roots) <= 2 and member, z)

    # region partition by tree roots
    tally.check("partition", partition_definitional_check(sigma), None)

    # crossing indicator is a prefix of every descending chain
    for g in pick(grounds):
        for wmid in pick(mids):
            es = e_set(sigma, wmid, g)
            chain = poset.chain(sigma.edge_of[wmid])
            flags = [open_segments_intersect(h, g) or h == g for h in chain]
            k = len(es)
            tally.check("prefix", list(chain[:k]) == list(es)
                        and all(flags[:k]) and not any(flags[k:]), (g, wmid))

        # largest-intersection and crossing-count bounds
        tally.check("bounds", largest_intersection_bound_check(
            sigma, g, cfg, poset), ("largest", g))
        tally.check("bounds", crossing_count_bound_check(
            sigma, g, cfg, poset), ("count", g))

        # drive to ground: crossing-only, non-increasing, at most one
        # length-preserving flip, which must come last
        down, low = drive_to_ground(sigma, g, poset=poset)
        replay = sigma.copy()
        ties = []
        good = True
        for pos, y in enumerate(down):
            lold = l1_length(replay.edge_of[y])
            good &= open_segments_intersect(replay.edge_of[y], g)
            replay.flip(y)
            lnew = l1_length(replay.edge_of[y])
            good &= lnew <= lold
            if lnew == lold:
                ties.append(pos)
        good &= len(ties) <= 1
        good &= not ties or ties[0] == len(down) - 1
        good &= replay.edge_of == low.edge_of
        good &= low.edge_of[midpoint2(g)] == g
        tally.check("drive", good, g)

    # triangle angle bounds
    tally.check("angles", sigma.triangle_angle_check(), None)


def test_criterion_6_structure_suites():
    tally = SuiteTally()
    cfg = derive_config(0.5)

    exhaustive_states = 0
    for nx, ny in ((2, 1), (2, 2)):
        region, bc, poset = rect(nx, ny)
        space = enumerate_triangulations(region, bc)
        rng = Xoshiro256StarStar(606)
        for s in space.states:
            sigma = Triangulation.from_edges(region, bc, s)
            run_invariant_suites(region, bc, poset, cfg, sigma, rng, tally,
                                 exhaustive=True)
            exhaustive_states += 1

    random_states = 0
    rng = Xoshiro256StarStar(60606)
    for (nx, ny), count in (((3, 3), 4000), ((4, 3), 3000), ((5, 2), 2500),
                            ((6, 4), 600)):
        region, bc, poset = rect(nx, ny)
        m = len(region.midpoints)
        for _ in range(count):
            sigma = random_state(region, bc, rng, flips=2 * m)
            run_invariant_suites(region, bc, poset, cfg, sigma, rng, tally)
            random_states += 1

    ok = (not tally.failures and exhaustive_states == 70
          and random_states >= 10000
          and all(tally.counts[s] >= 10000 for s in
                  ("flip", "tree", "tau-inverse", "partition", "prefix",
                   "containment", "bounds", "drive", "angles")))
    worst = tally.failures[:3]
    assert record_acceptance(
        6, ok, "%d exhaustive + %d random states, %d checks, failures %s"
        % (exhaustive_states, random_states, sum(tally.counts.values()),
           worst if worst else "none"))
    assert not tally.failures, tally.failures[:10]


# --------------------------------------------------------------------- 7


def test_criterion_7_fkg_violation_witness():
    region, _, _ = rect(2, 2)
    witness = fkg_search([region], Fraction(1, 2))
    found = witness is not None and witness.holds()
    ok = found
    if found:
        again = verify_witness(witness)
        ok &= again.holds() and (
            again.p_given_ground, again.p_given_not, again.p_marginal,
        ) == (witness.p_given_ground, witness.p_given_not, witness.p_marginal)
        # independent recomputation straight from a fresh enumeration
        bc = make_boundary_condition(witness.region, witness.constraints)
        space = enumerate_triangulations(witness.region, bc)
        pg, pn, pm = conditional_ground_prob(space, witness.lam, witness.x,
                                             witness.y)
        ok &= pn > pg and pm > pg
        ok &= (pg, pn, pm) == (witness.p_given_ground, witness.p_given_not,
                               witness.p_marginal)
        detail = ("witness x=%s y=%s lam=%s: P(.|ground)=%s < P(.|not)=%s, "
                  "P=%s; reverified" % (witness.x, witness.y, witness.lam,
                                        pg, pn, pm))
    else:
        detail = "no witness found"
    assert record_acceptance(7, ok, detail)


# --------------------------------------------------------------------- 8


def test_criterion_8_thin_rectangle_phenomena():
    lam = 0.5
    means = {}
    for n in (200, 400):
        plan = plan_for(rectangle(n, 3), lam, 881000 + n, n_samples=50)
        means[n] = column_crossing_stats(plan)
    ratio = means[400][0] / means[200][0]
    gate_linear = 1.5 <= ratio <= 2.5

    reports = coupling_separation_sweep(40, 3, lam, 882000, window_hi=4,
                                        seps=(8, 16, 32), n_samples=300)
    gate_coupling = all(
        later.frequency - earlier.frequency
        >= -3.0 * math.hypot(earlier.se, later.se)
        for earlier, later in zip(reports, reports[1:]))

    region, bc, poset = rect(40, 3)
    x = (40, 3)  # central column, lowest row (doubled coordinates)
    g = poset.canonical_ground_edge(x)
    tail = edge_tail(plan_for(region, lam, 883000, n_samples=400), x, g)
    gate_tail = tail.decays_at_three_sigma()

    ok = gate_linear and gate_coupling and gate_tail
    assert record_acceptance(
        8, ok, "crossing means ratio %.3f in [1.5,2.5]: %s; coupling freq %s "
        "monotone: %s; tail slope %.2f+-%.2f decaying at 3 sigma: %s"
        % (ratio, gate_linear,
           [round(r.frequency, 3) for r in reports], gate_coupling,
           tail.slope, tail.slope_se, gate_tail))


# -------------------------------------------------------------------- 10


def strip_timing(path):
    with open(path) as fh:
        return "".join(line for line in fh
                       if not line.startswith(("wall-clock-s:",
                                               "steps-per-s:")))


def test_criterion_10_byte_identical_outputs(tmp_path, capsys, monkeypatch):
    runs = []
    for tag in ("first", "second"):
        # identical command lines (relative paths) from separate directories
        root = tmp_path / tag
        root.mkdir()
        monkeypatch.chdir(root)
        sample_dir = str(root / "sample")
        render_dir = str(root / "render")
        assert main(["sample", "--region", "square:3", "--lam", "0.5",
                     "--steps", "6000", "--seed", "12", "--svg-every",
                     "3000", "--out", "sample"]) == 0
        assert main(["render", "--region", "square:3", "--state",
                     os.path.join("sample", "checkpoints.txt"),
                     "--seed", "12", "--out", "render"]) == 0
        capsys.readouterr()
        artifacts = sorted(
            name for d in (sample_dir, render_dir) for name in os.listdir(d)
            if name.endswith((".csv", ".svg")))
        digests = tuple(
            sha256_file(os.path.join(d, name))
            for d in (sample_dir, render_dir) for name in sorted(os.listdir(d))
            if name.endswith((".csv", ".svg")))
        manifests = tuple(
            strip_timing(os.path.join(d, name))
            for d in (sample_dir, render_dir) for name in sorted(os.listdir(d))
            if name.endswith("_manifest.txt"))
        runs.append((artifacts, digests, manifests))
    (names_a, digests_a, manifests_a), (names_b, digests_b, manifests_b) = runs
    svg_count = sum(name.endswith(".svg") for name in names_a)
    csv_count = sum(name.endswith(".csv") for name in names_a)
    ok = (names_a == names_b and digests_a == digests_b
          and manifests_a == manifests_b and svg_count >= 2
          and csv_count >= 1)
    assert record_acceptance(
        10, ok, "%d CSV + %d SVG artifacts byte-identical across reruns: %s"
        % (csv_count, svg_count, digests_a == digests_b))
