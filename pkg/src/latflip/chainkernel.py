"""Kernel backend selection and construction from triangulations.

The compiled kernel (``_chain_cy``) is used when importable; the pure-Python
twin (``_chain_py``) is the fallback.  Setting the environment variable
``LATFLIP_PURE_PYTHON=1`` forces the fallback.  Both backends expose the same
``ChainKernel`` class and produce bit-identical trajectories from equal
seeds, which the test suite verifies.
"""

from __future__ import annotations

import os

from .geometry import direction, mk_edge
from .region import BoundaryCondition, Region
from .triangulation import Triangulation

from . import _chain_py

_FORCE_PURE = os.environ.get("LATFLIP_PURE_PYTHON", "") not in ("", "0")

if _FORCE_PURE:
    _impl = _chain_py
else:
    try:
        from . import _chain_cy as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _chain_py

ChainKernel = _impl.ChainKernel
AP_NONE = _impl.AP_NONE
BACKEND = "python" if _impl is _chain_py else "cython"


def available_backends() -> tuple[str, ...]:
    try:
        from . import _chain_cy  # noqa: F401
    except ImportError:
        return ("python",)
    return ("cython", "python")


def kernel_class(backend: str | None = None):
    if backend is None:
        return ChainKernel
    if backend == "python":
        return _chain_py.ChainKernel
    if backend == "cython":
        from . import _chain_cy
        return _chain_cy.ChainKernel
    raise ValueError("unknown backend %r" % (backend,))


def max_edge_length(region: Region) -> int:
    """l1 diameter of the region's bounding box, in original units."""
    xs = [p[0] for p in region.lattice_points]
    ys = [p[1] for p in region.lattice_points]
    return (max(xs) - min(xs)) // 2 + (max(ys) - min(ys)) // 2


def power_table(lam: float, region: Region) -> list[float]:
    return [float(lam) ** k for k in range(max_edge_length(region) + 2)]


def make_kernel(sigma: Triangulation, lam: float, seed: int,
                backend: str | None = None):
    """Array-state kernel initialized from a triangulation snapshot."""
    region = sigma.region
    mids = region.midpoints
    mid2x, mid2y, vx, vy = [], [], [], []
    ap1x, ap1y, ap2x, ap2y, is_bc = [], [], [], [], []
    for x in mids:
        e = sigma.edge_of[x]
        dx, dy = direction(e)
        mid2x.append(x[0])
        mid2y.append(x[1])
        vx.append(dx)
        vy.append(dy)
        ap = sigma.apices(x)
        ap1x.append(ap[0][0])
        ap1y.append(ap[0][1])
        if len(ap) == 2:
            ap2x.append(ap[1][0])
            ap2y.append(ap[1][1])
        else:
            ap2x.append(AP_NONE)
            ap2y.append(AP_NONE)
        is_bc.append(1 if x in sigma.bc.by_midpoint else 0)
    cls = kernel_class(backend)
    return cls(mid2x, mid2y, vx, vy, ap1x, ap1y, ap2x, ap2y, is_bc,
               power_table(lam, region), seed)


def kernel_triangulation(region: Region, bc: BoundaryCondition,
                         kernel) -> Triangulation:
    """Rebuild a Triangulation from a kernel's current edges."""
    edges = [mk_edge((mx - dx, my - dy), (mx + dx, my + dy))
             for (mx, my, dx, dy) in kernel.get_edges()]
    return Triangulation.from_edges(region, bc, edges)
