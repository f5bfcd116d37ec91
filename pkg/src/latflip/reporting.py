"""Experiment artifacts: versioned CSV, run manifests, trajectory checkpoints.

Every float written to a hashed artifact is formatted with "%.12g" so
reruns of the same seed produce byte-identical files.
"""

from __future__ import annotations

import hashlib
import io
import os
import time
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .geometry import Edge, mk_edge
from .region import BoundaryCondition, Region
from .triangulation import Triangulation

CSV_VERSION = 1
MANIFEST_VERSION = 1
FLOAT_FMT = "%.12g"


def format_cell(v) -> str:
    if isinstance(v, float):
        return FLOAT_FMT % v
    s = str(v)
    if any(c in s for c in ',"\n'):
        return '"%s"' % s.replace('"', '""')
    return s


def csv_text(schema: str, columns: Sequence[str], rows: Iterable[Sequence]) -> str:
    """CSV with a versioned schema comment as the first line."""
    out = io.StringIO()
    out.write("# latflip-csv v%d schema=%s\n" % (CSV_VERSION, schema))
    out.write(",".join(columns) + "\n")
    for row in rows:
        out.write(",".join(format_cell(v) for v in row) + "\n")
    return out.getvalue()


def write_csv(path: str, schema: str, columns: Sequence[str],
              rows: Iterable[Sequence]) -> str:
    text = csv_text(schema, columns, rows)
    with open(path, "w") as fh:
        fh.write(text)
    return path


def sha256_file(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass
class RunManifest:
    """Record of one CLI run: inputs, outputs with hashes, timing."""

    command: str
    config: Mapping
    seed: int
    outputs: list = field(default_factory=list)  # (path, sha256) pairs
    wall_clock_s: float = 0.0
    steps_per_s: float = 0.0
    _t0: float = field(default_factory=time.perf_counter, repr=False)

    def add_output(self, path: str) -> None:
        self.outputs.append((os.path.basename(path), sha256_file(path)))

    def finish(self, steps: int = 0) -> None:
        self.wall_clock_s = time.perf_counter() - self._t0
        if steps and self.wall_clock_s > 0:
            self.steps_per_s = steps / self.wall_clock_s

    def to_text(self) -> str:
        lines = ["manifest-version: %d" % MANIFEST_VERSION,
                 "command: %s" % self.command,
                 "seed: %d" % self.seed,
                 "config:"]
        for k in sorted(self.config):
            lines.append("  %s: %s" % (k, self.config[k]))
        lines.append("outputs:")
        for name, digest in self.outputs:
            lines.append("  %s sha256:%s" % (name, digest))
        lines.append("wall-clock-s: %s" % (FLOAT_FMT % self.wall_clock_s))
        lines.append("steps-per-s: %s" % (FLOAT_FMT % self.steps_per_s))
        return "\n".join(lines) + "\n"

    def write(self, path: str) -> str:
        with open(path, "w") as fh:
            fh.write(self.to_text())
        return path


def parse_manifest(text: str) -> dict:
    """Parse a manifest back into a dict (config values stay strings)."""
    out: dict = {"config": {}, "outputs": []}
    section = None
    for raw in text.splitlines():
        if not raw.strip():
            continue
        if raw.startswith("  "):
            body = raw.strip()
            if section == "config":
                k, _, v = body.partition(": ")
                out["config"][k] = v
            elif section == "outputs":
                name, _, digest = body.partition(" sha256:")
                out["outputs"].append((name, digest))
            continue
        if raw.rstrip() in ("config:", "outputs:"):
            section = raw.rstrip()[:-1]
            continue
        key, _, val = raw.partition(": ")
        section = None
        out[key] = val
    return out


# --------------------------------------------------------------------------
# Trajectory checkpoints: (seed, step_count, edge list) text blocks.

def checkpoint_block(seed: int, step: int, sigma: Triangulation) -> str:
    lines = ["checkpoint", "seed: %d" % seed, "step: %d" % step, "edges:"]
    for x in sigma.region.midpoints:
        e = sigma.edge_of[x]
        lines.append("%d %d %d %d" % (e.a[0] // 2, e.a[1] // 2,
                                      e.b[0] // 2, e.b[1] // 2))
    lines.append("end")
    return "\n".join(lines) + "\n"


def parse_checkpoints(text: str) -> list[tuple[int, int, list[Edge]]]:
    """All (seed, step, edges) blocks in a checkpoint file, doubled coords."""
    blocks = []
    seed = step = None
    edges: list[Edge] | None = None
    for raw in text.splitlines():
        line = raw.strip()
        if line == "checkpoint":
            seed = step = None
            edges = None
        elif line.startswith("seed: "):
            seed = int(line[6:])
        elif line.startswith("step: "):
            step = int(line[6:])
        elif line == "edges:":
            edges = []
        elif line == "end":
            if seed is None or step is None or edges is None:
                raise ValueError("malformed checkpoint block")
            blocks.append((seed, step, edges))
        elif edges is not None and line:
            x1, y1, x2, y2 = map(int, line.split())
            edges.append(mk_edge((2 * x1, 2 * y1), (2 * x2, 2 * y2)))
    return blocks


def load_checkpoint(text: str, region: Region, bc: BoundaryCondition,
                    index: int = -1) -> tuple[int, int, Triangulation]:
    blocks = parse_checkpoints(text)
    if not blocks:
        raise ValueError("no checkpoint blocks found")
    seed, step, edges = blocks[index]
    return seed, step, Triangulation.from_edges(region, bc, edges, validate=True)
