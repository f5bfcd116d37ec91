"""Pure-Python chain kernel: array-state heat-bath edge-flip dynamics.

Twin of the compiled kernel in ``_chain_cy``.  Both expose a class named
``ChainKernel`` with identical constructor and methods, and they produce
bit-identical trajectories from equal seeds: same generator, same draw order
(one midpoint index per step, one uniform coin only when the proposed edge is
actually flippable), same float arithmetic for the acceptance probability.

State layout (parallel lists, one entry per midpoint):
  mid2x, mid2y   midpoint in doubled coordinates (static)
  vx, vy         direction of the current edge in original units, canonical
                 (vx > 0, or vx == 0 and vy > 0); endpoints = mid2 -+ v
  ap1*, ap2*     apex vertices of the 1 or 2 triangles containing the edge
                 (doubled); AP_NONE marks a missing second apex
  is_constraint  1 for edges frozen by the boundary condition

Outcome codes: 0 flipped, 1 held-constraint, 2 held-unflippable,
3 held-by-coin.
"""

from __future__ import annotations

from .rng import Xoshiro256StarStar

AP_NONE = 1 << 30

OUT_FLIPPED = 0
OUT_HELD_CONSTRAINT = 1
OUT_HELD_UNFLIPPABLE = 2
OUT_HELD_COIN = 3


class ChainKernel:
    backend = "python"

    def __init__(self, mid2x, mid2y, vx, vy, ap1x, ap1y, ap2x, ap2y,
                 is_constraint, powtab, seed: int):
        m = len(mid2x)
        self._m = m
        self._mid2x = [int(v) for v in mid2x]
        self._mid2y = [int(v) for v in mid2y]
        self._vx = [int(v) for v in vx]
        self._vy = [int(v) for v in vy]
        self._ap1x = [int(v) for v in ap1x]
        self._ap1y = [int(v) for v in ap1y]
        self._ap2x = [int(v) for v in ap2x]
        self._ap2y = [int(v) for v in ap2y]
        self._bc = [int(v) for v in is_constraint]
        self._pow = [float(v) for v in powtab]
        self._rng = Xoshiro256StarStar(seed)
        self._grid = {(self._mid2x[i], self._mid2y[i]): i for i in range(m)}
        if len(self._grid) != m:
            raise ValueError("duplicate midpoints")
        total = 0
        for i in range(m):
            dx, dy = self._vx[i], self._vy[i]
            if not (dx > 0 or (dx == 0 and dy > 0)):
                raise ValueError("non-canonical direction at %d" % i)
            if self._ap1x[i] == AP_NONE:
                raise ValueError("edge %d has no containing face" % i)
            total += abs(dx) + abs(dy)
        self._total = total

    # ------------------------------------------------------------ accessors

    @property
    def n_midpoints(self) -> int:
        return self._m

    @property
    def total_length(self) -> int:
        return self._total

    @property
    def rng_state(self):
        return self._rng.state

    def set_rng_state(self, state) -> None:
        self._rng.set_state(state)

    def get_edge(self, i: int):
        return (self._vx[i], self._vy[i])

    def get_edges(self):
        return [(self._mid2x[i], self._mid2y[i], self._vx[i], self._vy[i])
                for i in range(self._m)]

    def index_of(self, mx: int, my: int) -> int:
        return self._grid[(mx, my)]

    # --------------------------------------------------------------- moves

    def _proposal_status(self, i: int) -> int:
        """0 if the edge at i is flippable, else the hold outcome code."""
        if self._bc[i]:
            return OUT_HELD_CONSTRAINT
        p2x = self._ap2x[i]
        if p2x == AP_NONE:
            return OUT_HELD_UNFLIPPABLE
        if (self._ap1x[i] + p2x != 2 * self._mid2x[i]
                or self._ap1y[i] + self._ap2y[i] != 2 * self._mid2y[i]):
            return OUT_HELD_UNFLIPPABLE
        return OUT_FLIPPED

    def _decide_and_flip(self, i: int, u: float) -> int:
        lold = abs(self._vx[i]) + abs(self._vy[i])
        nvx = (self._ap2x[i] - self._ap1x[i]) // 2
        nvy = (self._ap2y[i] - self._ap1y[i]) // 2
        lnew = abs(nvx) + abs(nvy)
        mn = lnew if lnew < lold else lold
        a = self._pow[lnew - mn]
        b = self._pow[lold - mn]
        if u < a / (a + b):
            self._do_flip(i, nvx, nvy, lold, lnew)
            return OUT_FLIPPED
        return OUT_HELD_COIN

    def _do_flip(self, i: int, nvx: int, nvy: int, lold: int, lnew: int) -> None:
        mx, my = self._mid2x[i], self._mid2y[i]
        ovx, ovy = self._vx[i], self._vy[i]
        ax, ay = mx - ovx, my - ovy
        bx, by = mx + ovx, my + ovy
        p1x, p1y = self._ap1x[i], self._ap1y[i]
        p2x, p2y = self._ap2x[i], self._ap2y[i]
        if nvx < 0 or (nvx == 0 and nvy < 0):
            nvx, nvy = -nvx, -nvy
        self._vx[i] = nvx
        self._vy[i] = nvy
        self._ap1x[i], self._ap1y[i] = ax, ay
        self._ap2x[i], self._ap2y[i] = bx, by
        self._total += lnew - lold
        # the four sides of the parallelogram see one face change
        self._swap_apex(ax, ay, p1x, p1y, bx, by, p2x, p2y)
        self._swap_apex(bx, by, p1x, p1y, ax, ay, p2x, p2y)
        self._swap_apex(ax, ay, p2x, p2y, bx, by, p1x, p1y)
        self._swap_apex(bx, by, p2x, p2y, ax, ay, p1x, p1y)

    def _swap_apex(self, ux, uy, wx, wy, oldx, oldy, newx, newy) -> None:
        j = self._grid[((ux + wx) // 2, (uy + wy) // 2)]
        if self._ap1x[j] == oldx and self._ap1y[j] == oldy:
            self._ap1x[j] = newx
            self._ap1y[j] = newy
        elif self._ap2x[j] == oldx and self._ap2y[j] == oldy:
            self._ap2x[j] = newx
            self._ap2y[j] = newy
        else:
            raise AssertionError("apex bookkeeping out of sync at %d" % j)

    def step(self):
        """One heat-bath step; returns (outcome, midpoint index)."""
        i = self._rng.randrange(self._m)
        out = self._proposal_status(i)
        if out != OUT_FLIPPED:
            return (out, i)
        return (self._decide_and_flip(i, self._rng.random()), i)

    def apply_given(self, i: int, u: float) -> int:
        """Apply a proposal with an externally supplied coin (coupling)."""
        out = self._proposal_status(i)
        if out != OUT_FLIPPED:
            return out
        return self._decide_and_flip(i, u)

    def run(self, n: int):
        """n steps; returns outcome counts (flips, constraint, unflip, coin)."""
        counts = [0, 0, 0, 0]
        for _ in range(n):
            counts[self.step()[0]] += 1
        return tuple(counts)

    def coupled_run(self, other: "ChainKernel", n: int):
        """n synchronous steps sharing this kernel's randomness.

        Both chains see the same midpoint index and the same coin each step
        (the coin is drawn unconditionally so the streams cannot diverge).
        """
        if other._m != self._m:
            raise ValueError("coupled kernels must share a midpoint set")
        ca = [0, 0, 0, 0]
        cb = [0, 0, 0, 0]
        rng = self._rng
        for _ in range(n):
            i = rng.randrange(self._m)
            u = rng.random()
            ca[self.apply_given(i, u)] += 1
            cb[other.apply_given(i, u)] += 1
        return tuple(ca), tuple(cb)

    # ----------------------------------------------------- tracked running

    def _edge_crosses(self, i: int, gax: int, gay: int, gbx: int, gby: int) -> bool:
        mx, my = self._mid2x[i], self._mid2y[i]
        dx, dy = self._vx[i], self._vy[i]
        eax, eay = mx - dx, my - dy
        ebx, eby = mx + dx, my + dy
        d1 = (gbx - gax) * (eay - gay) - (gby - gay) * (eax - gax)
        d2 = (gbx - gax) * (eby - gay) - (gby - gay) * (ebx - gax)
        d3 = (ebx - eax) * (gay - eay) - (eby - eay) * (gax - eax)
        d4 = (ebx - eax) * (gby - eay) - (eby - eay) * (gbx - eax)
        if d1 == 0 and d2 == 0 and d3 == 0 and d4 == 0:
            if eax != ebx:
                lo1, hi1 = (eax, ebx) if eax <= ebx else (ebx, eax)
                lo2, hi2 = (gax, gbx) if gax <= gbx else (gbx, gax)
            else:
                lo1, hi1 = (eay, eby) if eay <= eby else (eby, eay)
                lo2, hi2 = (gay, gby) if gay <= gby else (gby, gay)
            return max(lo1, lo2) < min(hi1, hi2)
        return (d1 > 0) != (d2 > 0) and d1 != 0 and d2 != 0 \
            and (d3 > 0) != (d4 > 0) and d3 != 0 and d4 != 0

    def crossing_count(self, gax: int, gay: int, gbx: int, gby: int) -> int:
        return sum(1 for i in range(self._m)
                   if self._edge_crosses(i, gax, gay, gbx, gby))

    def run_until_psi_leq(self, gax: int, gay: int, gbx: int, gby: int,
                          psi_init: float, threshold: float, alpha_pow,
                          max_steps: int):
        """Steps until the crossing-weight potential of g drops to threshold.

        The potential starts at psi_init (computed externally) and is updated
        per flip with its exact single-flip increment: a shortening flip of a
        g-crossing edge subtracts alpha^(|old|-|g|), a lengthening flip whose
        new edge crosses g adds alpha^(|new|-|g|), anything else leaves it
        unchanged.  Returns (steps, psi); steps is -1 on timeout.
        """
        glen = (abs(gbx - gax) + abs(gby - gay)) // 2
        apow = [float(v) for v in alpha_pow]
        psi = float(psi_init)
        if psi <= threshold:
            return (0, psi)
        rng = self._rng
        steps = 0
        while steps < max_steps:
            i = rng.randrange(self._m)
            out = self._proposal_status(i)
            if out == OUT_FLIPPED:
                lold = abs(self._vx[i]) + abs(self._vy[i])
                before = self._edge_crosses(i, gax, gay, gbx, gby)
                out = self._decide_and_flip(i, rng.random())
                if out == OUT_FLIPPED:
                    lnew = abs(self._vx[i]) + abs(self._vy[i])
                    if lnew < lold:
                        if before:
                            psi -= apow[lold - glen]
                    elif lnew > lold:
                        if self._edge_crosses(i, gax, gay, gbx, gby):
                            psi += apow[lnew - glen]
            steps += 1
            if psi <= threshold:
                return (steps, psi)
        return (-1, psi)
