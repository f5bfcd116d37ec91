"""Command-line interface.

Subcommands: sample, enumerate, lyapunov, experiment <name>, render,
fkg-search, bench.  Options come from flags or a key=value config file;
flags win.  Every run that writes artifacts also writes a manifest with a
content hash per output, and the seed is always recorded (auto-generated
when not supplied).
"""

from __future__ import annotations

import argparse
import os
import sys
from fractions import Fraction

from .geometry import Edge, mk_edge
from .region import (BoundaryCondition, Region, make_boundary_condition,
                     parse_region_text, rectangle)
from .edgeposet import EdgePoset
from .triangulation import Triangulation
from .rng import Xoshiro256StarStar, derive_seed
from .chainkernel import available_backends, kernel_triangulation, make_kernel
from . import dynamics, enumeration, experiments, lyapunov
from .render import render_svg
from .reporting import (RunManifest, checkpoint_block, load_checkpoint,
                        write_csv)

PROG = "latflip"


class CliError(Exception):
    pass


# --------------------------------------------------------------------------
# Config file: "key = value" lines, # comments.  Flags override file values.

def parse_config(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CliError("config line %d: expected key = value, got %r"
                           % (lineno, raw))
        key, _, val = line.partition("=")
        out[key.strip()] = val.strip()
    return out


def config_to_text(cfg: dict[str, str]) -> str:
    return "".join("%s = %s\n" % (k, cfg[k]) for k in sorted(cfg))


def apply_config(args: argparse.Namespace) -> None:
    """Fill unset (None) options from the config file, if given."""
    path = getattr(args, "config", None)
    if not path:
        return
    try:
        cfg = parse_config(open(path).read())
    except OSError as exc:
        raise CliError("cannot read config %s: %s" % (path, exc))
    for key, val in cfg.items():
        dest = key.replace("-", "_")
        if hasattr(args, dest) and getattr(args, dest) is None:
            setattr(args, dest, val)


# --------------------------------------------------------------------------
# Value parsers (flags arrive as strings so config values merge uniformly).

def parse_count(s, name: str) -> int:
    try:
        v = float(s)
        i = int(v)
        if i != v or i < 0:
            raise ValueError
        return i
    except ValueError:
        raise CliError("%s must be a nonnegative integer, got %r" % (name, s))


def parse_lam(s) -> float:
    try:
        v = float(Fraction(s)) if "/" in str(s) else float(s)
    except (ValueError, ZeroDivisionError):
        raise CliError("invalid weight %r" % (s,))
    if v <= 0:
        raise CliError("weight parameter must be positive, got %r" % (s,))
    return v


def parse_lam_exact(s) -> Fraction:
    txt = str(s)
    if "/" not in txt and "." in txt:
        raise CliError(
            "the exact oracle needs a rational weight like 4/5, got %r" % (s,))
    try:
        lam = Fraction(txt)
    except (ValueError, ZeroDivisionError):
        raise CliError("invalid rational weight %r" % (s,))
    if lam <= 0:
        raise CliError("weight parameter must be positive, got %r" % (s,))
    return lam


def parse_point(s, name: str = "point") -> tuple[int, int]:
    """Original-unit point 'x,y' with halves allowed, to doubled coords."""
    try:
        xs, ys = str(s).split(",")
        dx, dy = 2 * Fraction(xs), 2 * Fraction(ys)
        if dx.denominator != 1 or dy.denominator != 1:
            raise ValueError
        return (int(dx), int(dy))
    except ValueError:
        raise CliError("%s must look like 1.5,2 — got %r" % (name, s))


def parse_edge_spec(s) -> Edge:
    try:
        a, b = str(s).split("-")
        return mk_edge(parse_point(a), parse_point(b))
    except (ValueError, CliError):
        raise CliError("edge must look like x1,y1-x2,y2 — got %r" % (s,))


def parse_constraint_list(s) -> tuple:
    out = []
    for part in str(s).split(";"):
        part = part.strip()
        if not part:
            continue
        e = parse_edge_spec(part)
        out.append(((e.a[0] // 2, e.a[1] // 2), (e.b[0] // 2, e.b[1] // 2)))
    return tuple(out)


def parse_region_spec(spec) -> tuple[Region, tuple]:
    """Region plus any constraints baked into a region file."""
    spec = str(spec)
    kind, _, rest = spec.partition(":")
    try:
        if kind == "square":
            n = int(rest)
            return rectangle(n, n), ()
        if kind == "strip":
            k, n = rest.split("x")
            return rectangle(int(n), int(k)), ()
        if kind == "rect":
            w, h = rest.split("x")
            return rectangle(int(w), int(h)), ()
        if kind == "file":
            region, bc = parse_region_text(open(rest).read())
            extra = tuple(((e.a[0] // 2, e.a[1] // 2),
                           (e.b[0] // 2, e.b[1] // 2)) for e in bc.extra)
            return region, extra
    except (ValueError, OSError) as exc:
        raise CliError("bad region spec %r: %s" % (spec, exc))
    raise CliError("unknown region spec %r (use square:N, strip:KxN, "
                   "rect:WxH, or file:PATH)" % (spec,))


def build_instance(args) -> tuple[Region, BoundaryCondition]:
    if args.region is None:
        raise CliError("--region is required")
    region, extra = parse_region_spec(args.region)
    if getattr(args, "constraints", None):
        extra = extra + parse_constraint_list(args.constraints)
    return region, make_boundary_condition(region, extra)


def ensure_seed(args) -> tuple[int, bool]:
    if getattr(args, "seed", None) is not None:
        return int(args.seed), False
    return int.from_bytes(os.urandom(8), "big") >> 1, True


def out_dir(args) -> str:
    d = getattr(args, "out", None) or "."
    os.makedirs(d, exist_ok=True)
    return d


def load_state(args, region: Region, bc: BoundaryCondition) -> Triangulation:
    """Initial state: checkpoint file if given, else the ground state."""
    path = getattr(args, "state", None)
    if path:
        try:
            _, _, sigma = load_checkpoint(open(path).read(), region, bc)
        except OSError as exc:
            raise CliError("cannot read state %s: %s" % (path, exc))
        return sigma
    return EdgePoset.of(region, bc).ground_triangulation()


def echo_config(args, keys) -> dict:
    return {k: getattr(args, k.replace("-", "_"))
            for k in keys if getattr(args, k.replace("-", "_"), None) is not None}


# --------------------------------------------------------------------------
# sample

def cmd_sample(args) -> int:
    apply_config(args)
    region, bc = build_instance(args)
    lam = parse_lam(args.lam if args.lam is not None else "0.5")
    steps = parse_count(args.steps if args.steps is not None else "10000", "--steps")
    seed, generated = ensure_seed(args)
    d = out_dir(args)

    sigma0 = load_state(args, region, bc)
    kernel = make_kernel(sigma0, lam, seed)
    stats_every = parse_count(args.stats_every, "--stats-every") \
        if args.stats_every is not None else max(1, steps // 20)
    svg_every = parse_count(args.svg_every, "--svg-every") \
        if args.svg_every is not None else 0
    ckpt_every = parse_count(args.checkpoint_every, "--checkpoint-every") \
        if args.checkpoint_every is not None else 0

    manifest = RunManifest(
        command="sample", seed=seed,
        config=echo_config(args, ("region", "constraints", "lam", "steps",
                                  "stats_every", "svg_every",
                                  "checkpoint_every", "state")))
    if generated:
        print("seed: %d (auto-generated)" % seed)

    rows = [(0, kernel.total_length, 0, 0, 0, 0)]
    counts = [0, 0, 0, 0]
    ckpt_path = os.path.join(d, "checkpoints.txt")
    ckpt_fh = open(ckpt_path, "w")
    svg_paths = []

    def snapshot_svg(step: int) -> None:
        tri = kernel_triangulation(region, bc, kernel)
        path = os.path.join(d, "snapshot_%09d.svg" % step)
        with open(path, "w") as fh:
            fh.write(render_svg(tri))
        svg_paths.append(path)

    done = 0
    while done < steps:
        targets = [steps]
        for every in (stats_every, svg_every, ckpt_every):
            if every:
                targets.append(done + every - done % every)
        nxt = min(t for t in targets if t > done)
        got = kernel.run(nxt - done)
        for i in range(4):
            counts[i] += got[i]
        done = nxt
        if stats_every and done % stats_every == 0 or done == steps:
            rows.append((done, kernel.total_length, *counts))
        if svg_every and done % svg_every == 0:
            snapshot_svg(done)
        if ckpt_every and done % ckpt_every == 0:
            tri = kernel_triangulation(region, bc, kernel)
            ckpt_fh.write(checkpoint_block(seed, done, tri))

    final = kernel_triangulation(region, bc, kernel)
    final.check()
    ckpt_fh.write(checkpoint_block(seed, steps, final))
    ckpt_fh.close()

    stats_path = write_csv(
        os.path.join(d, "sample_stats.csv"), "sample-stats",
        ("step", "total_length", "flipped", "held_constraint",
         "held_unflippable", "held_coin"), rows)
    manifest.add_output(stats_path)
    manifest.add_output(ckpt_path)
    for p in svg_paths:
        manifest.add_output(p)
    manifest.finish(steps)
    manifest.write(os.path.join(d, "sample_manifest.txt"))
    print("ran %d steps on %d midpoints: %d flips; total length %d"
          % (steps, kernel.n_midpoints, counts[0], kernel.total_length))
    return 0


# --------------------------------------------------------------------------
# enumerate

def cmd_enumerate(args) -> int:
    apply_config(args)
    region, bc = build_instance(args)
    cap = parse_count(args.cap if args.cap is not None else "1000000", "--cap")
    seed, _ = ensure_seed(args)
    try:
        space = enumeration.enumerate_triangulations(region, bc, cap)
    except enumeration.CapExceeded as exc:
        print("cap exceeded: at least %d triangulations (cap %d)"
              % (exc.partial_count, exc.cap))
        return 1
    bound = space.anclin_bound()
    print("triangulations: %d" % len(space))
    print("branching bound: 2^%d = %d (margin %.3g)"
          % (len(enumeration.free_midpoints(region, bc)), bound,
             len(space) / bound if bound else 0.0))
    if args.lam is not None:
        lam = parse_lam_exact(args.lam)
        measure = enumeration.exact_measure(space, lam)
        print("Z(%s) = %s" % (lam, measure.Z))
    if args.out is not None:
        d = out_dir(args)
        manifest = RunManifest(
            command="enumerate", seed=seed,
            config=echo_config(args, ("region", "constraints", "cap", "lam")))
        by_len: dict[int, int] = {}
        for t in space.total_lengths:
            by_len[t] = by_len.get(t, 0) + 1
        path = write_csv(os.path.join(d, "enumerate_counts.csv"),
                         "enumerate-counts", ("total_length", "count"),
                         sorted(by_len.items()))
        manifest.add_output(path)
        if args.dump:
            dump = os.path.join(d, "enumerate_states.txt")
            with open(dump, "w") as fh:
                for s in space.states:
                    fh.write(";".join(
                        "%d,%d-%d,%d" % (e.a[0] // 2, e.a[1] // 2,
                                         e.b[0] // 2, e.b[1] // 2)
                        for e in s) + "\n")
            manifest.add_output(dump)
        manifest.finish()
        manifest.write(os.path.join(d, "enumerate_manifest.txt"))
    return 0


# --------------------------------------------------------------------------
# lyapunov

def cmd_lyapunov(args) -> int:
    apply_config(args)
    region, bc = build_instance(args)
    lam = parse_lam(args.lam if args.lam is not None else "0.5")
    alpha = None
    if args.alpha is not None:
        alpha = Fraction(args.alpha) if "/" in str(args.alpha) else float(args.alpha)
    psi0 = float(args.psi0) if args.psi0 is not None else 50.0
    cfg = lyapunov.derive_config(lam, alpha_choice=alpha, psi0=psi0)
    seed, _ = ensure_seed(args)

    if args.g is None:
        raise CliError("--g ground edge is required (like 1,0-1,1)")
    g = parse_edge_spec(args.g)
    poset = EdgePoset.of(region, bc)
    sigma = load_state(args, region, bc)
    if args.pump is not None:
        target = float(args.pump)
        rng = Xoshiro256StarStar(derive_seed(seed, 7))
        _, sigma = lyapunov.inflate_crossings(sigma, g, cfg, target, rng)

    psi = lyapunov.psi_g(sigma, g, cfg, poset=poset)
    report = lyapunov.expected_drift(sigma, g, cfg, poset=poset)
    direct = lyapunov.expected_drift_direct(sigma, g, cfg, poset=poset)
    print("Psi_g = %.12g  (psi0 = %g)" % (float(psi), psi0))
    print("alpha = %s  eps_formula = %.6g" % (cfg.alpha, cfg.eps_formula))
    print("midpoint           class        len  psi_x  rho")
    for row in report.rows:
        if row.rho == 0:
            continue
        print("%-18s %-12s %4d  %5s  %.12g"
              % ("(%g,%g)" % (row.midpoint[0] / 2, row.midpoint[1] / 2),
                 row.edge_class, row.length, row.psi_x, float(row.rho)))
    print("closed-form drift = %.12g" % float(report.total_drift))
    print("direct drift      = %.12g" % float(direct))
    if float(psi) > psi0:
        verdict = "contraction expected (Psi > psi0): drift < 0 is %s" \
            % (float(report.total_drift) < 0)
    else:
        verdict = "state in the good set (Psi <= psi0); no contraction asserted"
    print(verdict)
    if args.out is not None:
        d = out_dir(args)
        manifest = RunManifest(
            command="lyapunov", seed=seed,
            config=echo_config(args, ("region", "constraints", "lam", "alpha",
                                      "psi0", "g", "pump", "state")))
        path = write_csv(os.path.join(d, "lyapunov_rho.csv"), "lyapunov-rho",
                         ("mid_x", "mid_y", "edge_class", "length", "psi_x",
                          "rho"), report.csv_rows())
        manifest.add_output(path)
        manifest.finish()
        manifest.write(os.path.join(d, "lyapunov_manifest.txt"))
    return 0


# --------------------------------------------------------------------------
# experiments

def _plan_from_args(args, region, bc, lam, seed) -> experiments.ExperimentPlan:
    return experiments.ExperimentPlan(
        region=region, bc=bc, lam=lam, seed=seed,
        burn_in=parse_count(args.burn_in, "--burn-in")
        if args.burn_in is not None else None,
        thin=parse_count(args.thin, "--thin") if args.thin is not None else None,
        n_samples=parse_count(args.samples, "--samples")
        if args.samples is not None else 200)


def cmd_experiment(args) -> int:
    apply_config(args)
    name = args.name
    if name == "fkg-search":
        return cmd_fkg(args)
    handlers = {
        "tail": _exp_tail,
        "crossings": _exp_crossings,
        "columns": _exp_columns,
        "coupling": _exp_coupling,
        "ground-freq": _exp_ground_freq,
        "degree": _exp_degree,
        "hitting-time": _exp_hitting,
    }
    if name not in handlers:
        raise CliError("unknown experiment %r (known: %s)"
                       % (name, ", ".join(sorted(handlers) + ["fkg-search"])))
    region, bc = build_instance(args)
    lam = parse_lam(args.lam if args.lam is not None else "0.5")
    seed, generated = ensure_seed(args)
    if generated:
        print("seed: %d (auto-generated)" % seed)
    d = out_dir(args)
    manifest = RunManifest(
        command="experiment %s" % name, seed=seed,
        config=echo_config(args, ("region", "constraints", "lam", "samples",
                                  "burn_in", "thin", "x", "g", "vertex",
                                  "rect", "max_len", "window", "seps",
                                  "psi0", "max_steps", "runs", "pump")))
    code = handlers[name](args, region, bc, lam, seed, d, manifest)
    manifest.finish()
    manifest.write(os.path.join(d, "experiment_%s_manifest.txt"
                                % name.replace("-", "_")))
    return code


def _exp_tail(args, region, bc, lam, seed, d, manifest) -> int:
    plan = _plan_from_args(args, region, bc, lam, seed)
    poset = EdgePoset.of(region, bc)
    x = parse_point(args.x, "--x") if args.x is not None else \
        _central_midpoint(region, bc)
    g = parse_edge_spec(args.g) if args.g is not None else \
        poset.canonical_ground_edge(x)
    report = experiments.edge_tail(plan, x, g)
    path = write_csv(os.path.join(d, "tail.csv"), "edge-tail",
                     ("offset", "count", "phat"), report.rows)
    manifest.add_output(path)
    print("edge tail at %s: n=%d beta=%.6g se=%.3g decays(3sigma)=%s"
          % (x, report.n, report.beta_hat, report.beta_se,
             report.decays_at_three_sigma()))
    return 0


def _central_midpoint(region, bc):
    """The free midpoint closest to the region's center (ties: smallest)."""
    xs = [v[0] for v in region.vertices]
    ys = [v[1] for v in region.vertices]
    cx, cy = (min(xs) + max(xs)) / 2, (min(ys) + max(ys)) / 2
    free = [m for m in region.midpoints if m not in bc.by_midpoint]
    return min(free, key=lambda m: ((m[0] - cx) ** 2 + (m[1] - cy) ** 2, m))


def _parse_rect(args, region) -> tuple[int, int, int, int]:
    if args.rect is not None:
        try:
            x0, y0, x1, y1 = map(int, str(args.rect).split(","))
            return x0, y0, x1, y1
        except ValueError:
            raise CliError("--rect must be x0,y0,x1,y1")
    xs = [v[0] // 2 for v in region.vertices]
    ys = [v[1] // 2 for v in region.vertices]
    return min(xs), min(ys), max(xs), max(ys)


def _exp_crossings(args, region, bc, lam, seed, d, manifest) -> int:
    plan = _plan_from_args(args, region, bc, lam, seed)
    rect = _parse_rect(args, region)
    max_len = parse_count(args.max_len if args.max_len is not None else "4",
                          "--max-len")
    freq, n = experiments.crossing_frequency(plan, rect, max_len)
    path = write_csv(os.path.join(d, "crossings.csv"), "triangle-crossings",
                     ("rect", "max_len", "frequency", "n"),
                     [("%d:%d:%d:%d" % rect, max_len, freq, n)])
    manifest.add_output(path)
    print("short-triangle crossing frequency: %.4g over %d samples" % (freq, n))
    return 0


def _exp_columns(args, region, bc, lam, seed, d, manifest) -> int:
    plan = _plan_from_args(args, region, bc, lam, seed)
    rect = _parse_rect(args, region)
    mean, se, n = experiments.column_crossing_stats(plan, rect)
    path = write_csv(os.path.join(d, "columns.csv"), "column-crossings",
                     ("rect", "mean", "se", "n"),
                     [("%d:%d:%d:%d" % rect, mean, se, n)])
    manifest.add_output(path)
    print("unit-vertical columns: mean %.4g (se %.3g) over %d samples"
          % (mean, se, n))
    return 0


def _exp_coupling(args, region, bc, lam, seed, d, manifest) -> int:
    xs = [v[0] // 2 for v in region.vertices]
    ys = [v[1] // 2 for v in region.vertices]
    n, k = max(xs) - min(xs), max(ys) - min(ys)
    window_hi = parse_count(args.window if args.window is not None else "4",
                            "--window")
    seps = [parse_count(s, "--seps") for s in
            str(args.seps if args.seps is not None else "8,16,32").split(",")]
    n_samples = parse_count(args.samples, "--samples") \
        if args.samples is not None else 400
    reports = experiments.coupling_separation_sweep(
        n, k, lam, seed, window_hi, seps, n_samples)
    path = write_csv(os.path.join(d, "coupling.csv"), "coupling-agreement",
                     ("separation", "frequency", "se", "n"),
                     [(r.separation, r.frequency, r.se, r.n) for r in reports])
    manifest.add_output(path)
    for r in reports:
        print("m=%-3d agreement %.4g (se %.3g, n=%d)"
              % (r.separation, r.frequency, r.se, r.n))
    return 0


def _exp_ground_freq(args, region, bc, lam, seed, d, manifest) -> int:
    plan = _plan_from_args(args, region, bc, lam, seed)
    poset = EdgePoset.of(region, bc)
    x = parse_point(args.x, "--x") if args.x is not None else \
        _central_midpoint(region, bc)
    g = parse_edge_spec(args.g) if args.g is not None else \
        poset.canonical_ground_edge(x)
    rep = experiments.ground_state_frequency(plan, g)
    path = write_csv(os.path.join(d, "ground_freq.csv"), "ground-frequency",
                     ("frequency", "wilson_lower", "wilson_upper", "n"),
                     [(rep.frequency, rep.lower, rep.upper, rep.n)])
    manifest.add_output(path)
    print("ground-edge frequency %.4g, 3-sigma Wilson [%.4g, %.4g], n=%d"
          % (rep.frequency, rep.lower, rep.upper, rep.n))
    return 0


def _exp_degree(args, region, bc, lam, seed, d, manifest) -> int:
    plan = _plan_from_args(args, region, bc, lam, seed)
    if args.vertex is not None:
        v = parse_point(args.vertex, "--vertex")
    else:
        xs = [p[0] for p in region.lattice_points]
        ys = [p[1] for p in region.lattice_points]
        v = (2 * ((min(xs) + max(xs)) // 4), 2 * ((min(ys) + max(ys)) // 4))
    if v not in region.lattice_points:
        raise CliError("--vertex %r is not a lattice point of the region" % (v,))
    report = experiments.degree_tail(plan, v)
    path = write_csv(os.path.join(d, "degree.csv"), "degree-tail",
                     ("offset", "count", "phat"), report.rows)
    manifest.add_output(path)
    print("degree tail at (%d,%d): floor %d, n=%d, beta=%.6g"
          % (v[0] // 2, v[1] // 2, report.floor, report.n, report.beta_hat))
    return 0


def _exp_hitting(args, region, bc, lam, seed, d, manifest) -> int:
    if args.g is None:
        raise CliError("--g ground edge is required")
    g = parse_edge_spec(args.g)
    psi0 = float(args.psi0) if args.psi0 is not None else 50.0
    max_steps = parse_count(args.max_steps if args.max_steps is not None
                            else "1000000", "--max-steps")
    runs = parse_count(args.runs if args.runs is not None else "1000", "--runs")
    pump = float(args.pump) if args.pump is not None else 1.2 * psi0
    cfg = lyapunov.derive_config(lam, psi0=psi0)
    poset = EdgePoset.of(region, bc)
    sigma0 = poset.ground_triangulation()
    rng = Xoshiro256StarStar(derive_seed(seed, 11))
    _, sigma0 = lyapunov.inflate_crossings(sigma0, g, cfg, pump, rng,
                                           poset=poset)
    psi_init = float(lyapunov.psi_g(sigma0, g, cfg, poset=poset))
    times = dynamics.hitting_time_experiment(
        sigma0, g, psi0, max_steps, lam=lam, alpha=float(cfg.alpha),
        psi_init=psi_init, seed=derive_seed(seed, 12), n_runs=runs)
    path = write_csv(os.path.join(d, "hitting.csv"), "hitting-time",
                     ("run", "steps"), list(enumerate(times)))
    manifest.add_output(path)
    finite = [t for t in times if t >= 0]
    print("hitting times: %d/%d finished; Psi(start) = %.6g; mean T = %.6g"
          % (len(finite), runs, psi_init,
             sum(finite) / len(finite) if finite else float("nan")))
    return 0


# --------------------------------------------------------------------------
# render

def cmd_render(args) -> int:
    apply_config(args)
    region, bc = build_instance(args)
    sigma = load_state(args, region, bc)
    seed, _ = ensure_seed(args)
    highlight = parse_edge_spec(args.highlight) if args.highlight is not None \
        else None
    scale = parse_count(args.scale if args.scale is not None else "40",
                        "--scale")
    svg = render_svg(sigma, color_classes=not args.plain,
                     highlight=highlight, scale=scale)
    d = out_dir(args)
    path = os.path.join(d, args.svg_name or "render.svg")
    with open(path, "w") as fh:
        fh.write(svg)
    manifest = RunManifest(
        command="render", seed=seed,
        config=echo_config(args, ("region", "constraints", "state",
                                  "highlight", "scale", "plain")))
    manifest.add_output(path)
    manifest.finish()
    manifest.write(os.path.join(d, "render_manifest.txt"))
    print("wrote %s (%d edges)" % (path, len(region.midpoints)))
    return 0


# --------------------------------------------------------------------------
# fkg-search

def cmd_fkg(args) -> int:
    apply_config(args)
    specs = str(args.regions if args.regions is not None
                else "square:2,strip:2x3,square:3").split(",")
    regions = [parse_region_spec(s.strip())[0] for s in specs if s.strip()]
    lam = parse_lam_exact(args.lam if args.lam is not None else "1/2")
    lam2 = parse_lam_exact(args.lam2 if args.lam2 is not None else "4/5")
    maxc = parse_count(args.max_constraints if args.max_constraints is not None
                       else "3", "--max-constraints")
    cap = parse_count(args.cap if args.cap is not None else "200000", "--cap")
    seed, _ = ensure_seed(args)

    witness = enumeration.fkg_search(regions, lam, max_constraints=maxc, cap=cap)
    if witness is None:
        print("no witness found in the catalog")
        return 1
    print(witness.describe())
    check = enumeration.verify_witness(witness, cap=cap)
    other = enumeration.verify_witness(witness, lam=lam2, cap=cap)
    print("re-verified at lambda=%s: holds=%s" % (check.lam, check.holds()))
    print("at lambda=%s: holds=%s" % (other.lam, other.holds()))
    if args.out is not None:
        d = out_dir(args)
        manifest = RunManifest(
            command="fkg-search", seed=seed,
            config=echo_config(args, ("regions", "lam", "lam2",
                                      "max_constraints", "cap")))
        rows = [(str(w.lam), str(w.p_given_ground), str(w.p_given_not),
                 str(w.p_marginal), w.holds()) for w in (check, other)]
        path = write_csv(os.path.join(d, "fkg_witness.csv"), "fkg-witness",
                         ("lam", "p_given_ground", "p_given_not",
                          "p_marginal", "holds"), rows)
        manifest.add_output(path)
        manifest.finish()
        manifest.write(os.path.join(d, "fkg_manifest.txt"))
    return 0


# --------------------------------------------------------------------------
# bench

def cmd_bench(args) -> int:
    apply_config(args)
    import time as _time
    region, bc = build_instance(args) if args.region is not None else \
        (rectangle(8, 8), make_boundary_condition(rectangle(8, 8)))
    lam = parse_lam(args.lam if args.lam is not None else "0.5")
    steps = parse_count(args.steps if args.steps is not None else "200000",
                        "--steps")
    seed, _ = ensure_seed(args)
    sigma0 = EdgePoset.of(region, bc).ground_triangulation()
    results = []
    for backend in available_backends():
        kernel = make_kernel(sigma0, lam, seed, backend=backend)
        t0 = _time.perf_counter()
        kernel.run(steps)
        dt = _time.perf_counter() - t0
        results.append((backend, dt, kernel.get_edges(), kernel.rng_state))
        print("%-8s %10.3fs  %12.0f steps/s"
              % (backend, dt, steps / dt if dt > 0 else float("inf")))
    if len(results) == 2:
        same_edges = results[0][2] == results[1][2]
        same_rng = results[0][3] == results[1][3]
        print("backends agree: edges=%s rng=%s" % (same_edges, same_rng))
        if not (same_edges and same_rng):
            return 1
    return 0


# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog=PROG,
        description="Weighted lattice triangulations: heat-bath flip dynamics, "
                    "exact enumeration, drift diagnostics, experiments.")
    sub = p.add_subparsers(dest="cmd", required=True)

    def common(sp, with_state=False):
        sp.add_argument("--config", help="key = value config file; flags win")
        sp.add_argument("--region", help="square:N | strip:KxN | rect:WxH | file:PATH")
        sp.add_argument("--constraints",
                        help="extra constraint edges 'x1,y1-x2,y2;…'")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out", help="output directory (enables artifacts)")
        if with_state:
            sp.add_argument("--state", help="checkpoint file for the initial state")

    sp = sub.add_parser("sample", help="run the heat-bath chain")
    common(sp, with_state=True)
    sp.add_argument("--lam", help="weight parameter (float or p/q)")
    sp.add_argument("--steps")
    sp.add_argument("--stats-every")
    sp.add_argument("--svg-every")
    sp.add_argument("--checkpoint-every")
    sp.set_defaults(func=cmd_sample)

    sp = sub.add_parser("enumerate", help="exact enumeration oracle")
    common(sp)
    sp.add_argument("--cap")
    sp.add_argument("--lam", help="rational weight for Z, like 4/5")
    sp.add_argument("--dump", action="store_true",
                    help="also write every state to enumerate_states.txt")
    sp.set_defaults(func=cmd_enumerate)

    sp = sub.add_parser("lyapunov", help="potential and drift report")
    common(sp, with_state=True)
    sp.add_argument("--lam")
    sp.add_argument("--alpha", help="potential base (default lam**-0.25)")
    sp.add_argument("--psi0")
    sp.add_argument("--g", help="ground edge x1,y1-x2,y2")
    sp.add_argument("--pump", help="inflate the state to this potential first")
    sp.set_defaults(func=cmd_lyapunov)

    sp = sub.add_parser("experiment", help="statistical experiments")
    sp.add_argument("name", help="tail | crossings | columns | coupling | "
                                 "ground-freq | degree | hitting-time | fkg-search")
    common(sp)
    sp.add_argument("--lam")
    sp.add_argument("--samples")
    sp.add_argument("--burn-in")
    sp.add_argument("--thin")
    sp.add_argument("--x", help="midpoint like 1.5,2")
    sp.add_argument("--g", help="ground edge x1,y1-x2,y2")
    sp.add_argument("--vertex", help="lattice point x,y")
    sp.add_argument("--rect", help="x0,y0,x1,y1 in lattice units")
    sp.add_argument("--max-len")
    sp.add_argument("--window")
    sp.add_argument("--seps")
    sp.add_argument("--psi0")
    sp.add_argument("--max-steps")
    sp.add_argument("--runs")
    sp.add_argument("--pump")
    sp.add_argument("--regions", help="(fkg-search) comma-separated region specs")
    sp.add_argument("--lam2", help="(fkg-search) second rational weight")
    sp.add_argument("--max-constraints")
    sp.add_argument("--cap")
    sp.set_defaults(func=cmd_experiment)

    sp = sub.add_parser("render", help="write an SVG of a state")
    common(sp, with_state=True)
    sp.add_argument("--highlight", help="edge to highlight with its crossings")
    sp.add_argument("--scale")
    sp.add_argument("--plain", action="store_true", help="no class coloring")
    sp.add_argument("--svg-name", help="output file name (default render.svg)")
    sp.set_defaults(func=cmd_render)

    sp = sub.add_parser("fkg-search",
                        help="search small instances for an FKG violation")
    sp.add_argument("--config")
    sp.add_argument("--regions")
    sp.add_argument("--lam")
    sp.add_argument("--lam2")
    sp.add_argument("--max-constraints")
    sp.add_argument("--cap")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_fkg)

    sp = sub.add_parser("bench", help="compare chain backends")
    common(sp)
    sp.add_argument("--lam")
    sp.add_argument("--steps")
    sp.set_defaults(func=cmd_bench)

    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print("%s: error: %s" % (PROG, exc), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
