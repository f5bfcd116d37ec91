# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled chain kernel: array-state heat-bath edge-flip dynamics.

Twin of the pure-Python kernel in ``_chain_py``; see that module for the
state layout and outcome codes.  The two kernels produce bit-identical
trajectories from equal seeds: same xoshiro256** generator seeded through
splitmix64, same draw order (coin only when the edge is flippable), and the
same double-precision acceptance arithmetic.
"""

from libc.stdint cimport int64_t, uint64_t

import numpy as np

AP_NONE = 1 << 30

OUT_FLIPPED = 0
OUT_HELD_CONSTRAINT = 1
OUT_HELD_UNFLIPPABLE = 2
OUT_HELD_COIN = 3

cdef enum:
    C_FLIPPED = 0
    C_HELD_CONSTRAINT = 1
    C_HELD_UNFLIPPABLE = 2
    C_HELD_COIN = 3

cdef int64_t _AP_NONE = 1 << 30
cdef double _DOUBLE_SCALE = 2.0 ** -53
cdef uint64_t _SM_GAMMA = <uint64_t>0x9E3779B97F4A7C15
cdef uint64_t _SM_MUL1 = <uint64_t>0xBF58476D1CE4E5B9
cdef uint64_t _SM_MUL2 = <uint64_t>0x94D049BB133111EB


cdef inline uint64_t _rotl(uint64_t x, int k) nogil:
    return (x << k) | (x >> (64 - k))


cdef inline uint64_t _splitmix_next(uint64_t *state) nogil:
    cdef uint64_t z
    state[0] = state[0] + _SM_GAMMA
    z = state[0]
    z = (z ^ (z >> 30)) * _SM_MUL1
    z = (z ^ (z >> 27)) * _SM_MUL2
    return z ^ (z >> 31)


cdef class ChainKernel:
    cdef Py_ssize_t _m
    cdef int64_t[::1] _mid2x
    cdef int64_t[::1] _mid2y
    cdef int64_t[::1] _vx
    cdef int64_t[::1] _vy
    cdef int64_t[::1] _ap1x
    cdef int64_t[::1] _ap1y
    cdef int64_t[::1] _ap2x
    cdef int64_t[::1] _ap2y
    cdef int64_t[::1] _bc
    cdef double[::1] _pow
    cdef int64_t[::1] _grid
    cdef int64_t _gx0, _gy0, _gw, _gh
    cdef uint64_t _s0, _s1, _s2, _s3
    cdef int64_t _total

    def __init__(self, mid2x, mid2y, vx, vy, ap1x, ap1y, ap2x, ap2y,
                 is_constraint, powtab, seed):
        cdef Py_ssize_t m = len(mid2x)
        cdef Py_ssize_t i
        self._m = m
        self._mid2x = np.asarray(list(mid2x), dtype=np.int64)
        self._mid2y = np.asarray(list(mid2y), dtype=np.int64)
        self._vx = np.asarray(list(vx), dtype=np.int64)
        self._vy = np.asarray(list(vy), dtype=np.int64)
        self._ap1x = np.asarray(list(ap1x), dtype=np.int64)
        self._ap1y = np.asarray(list(ap1y), dtype=np.int64)
        self._ap2x = np.asarray(list(ap2x), dtype=np.int64)
        self._ap2y = np.asarray(list(ap2y), dtype=np.int64)
        self._bc = np.asarray(list(is_constraint), dtype=np.int64)
        self._pow = np.asarray(list(powtab), dtype=np.float64)

        cdef int64_t gx0 = self._mid2x[0], gx1 = self._mid2x[0]
        cdef int64_t gy0 = self._mid2y[0], gy1 = self._mid2y[0]
        for i in range(m):
            if self._mid2x[i] < gx0: gx0 = self._mid2x[i]
            if self._mid2x[i] > gx1: gx1 = self._mid2x[i]
            if self._mid2y[i] < gy0: gy0 = self._mid2y[i]
            if self._mid2y[i] > gy1: gy1 = self._mid2y[i]
        self._gx0, self._gy0 = gx0, gy0
        self._gw = gx1 - gx0 + 1
        self._gh = gy1 - gy0 + 1
        grid = np.full(self._gw * self._gh, -1, dtype=np.int64)
        self._grid = grid
        cdef int64_t total = 0
        for i in range(m):
            if not (self._vx[i] > 0 or (self._vx[i] == 0 and self._vy[i] > 0)):
                raise ValueError("non-canonical direction at %d" % i)
            if self._ap1x[i] == _AP_NONE:
                raise ValueError("edge %d has no containing face" % i)
            if self._grid[(self._mid2y[i] - gy0) * self._gw
                          + (self._mid2x[i] - gx0)] != -1:
                raise ValueError("duplicate midpoints")
            self._grid[(self._mid2y[i] - gy0) * self._gw
                       + (self._mid2x[i] - gx0)] = i
            total += (self._vx[i] if self._vx[i] >= 0 else -self._vx[i]) \
                + (self._vy[i] if self._vy[i] >= 0 else -self._vy[i])
        self._total = total

        cdef uint64_t st = <uint64_t>(seed & ((1 << 64) - 1))
        self._s0 = _splitmix_next(&st)
        self._s1 = _splitmix_next(&st)
        self._s2 = _splitmix_next(&st)
        self._s3 = _splitmix_next(&st)
        if self._s0 == 0 and self._s1 == 0 and self._s2 == 0 and self._s3 == 0:
            self._s0 = 1

    # --------------------------------------------------------------- rng

    cdef inline uint64_t _next_u64(self) nogil:
        cdef uint64_t s0 = self._s0, s1 = self._s1, s2 = self._s2, s3 = self._s3
        cdef uint64_t result = _rotl(s1 * <uint64_t>5, 7) * <uint64_t>9
        cdef uint64_t t = s1 << 17
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self._s0 = s0
        self._s1 = s1
        self._s2 = s2
        self._s3 = s3
        return result

    cdef inline double _next_double(self) nogil:
        return <double>(self._next_u64() >> 11) * _DOUBLE_SCALE

    cdef inline uint64_t _randrange(self, uint64_t n) nogil:
        cdef uint64_t rem = (<uint64_t>0 - n) % n
        cdef uint64_t bound = <uint64_t>0 - rem
        cdef uint64_t r = self._next_u64()
        if rem != 0:
            while r >= bound:
                r = self._next_u64()
        return r % n

    # --------------------------------------------------------- accessors

    @property
    def backend(self):
        return "cython"

    @property
    def n_midpoints(self):
        return self._m

    @property
    def total_length(self):
        return self._total

    @property
    def rng_state(self):
        return (self._s0, self._s1, self._s2, self._s3)

    def set_rng_state(self, state):
        mask = (1 << 64) - 1
        self._s0 = <uint64_t>(state[0] & mask)
        self._s1 = <uint64_t>(state[1] & mask)
        self._s2 = <uint64_t>(state[2] & mask)
        self._s3 = <uint64_t>(state[3] & mask)

    def get_edge(self, Py_ssize_t i):
        return (self._vx[i], self._vy[i])

    def get_edges(self):
        cdef Py_ssize_t i
        return [(self._mid2x[i], self._mid2y[i], self._vx[i], self._vy[i])
                for i in range(self._m)]

    def index_of(self, mx, my):
        cdef int64_t j = self._grid_at(mx, my)
        if j < 0:
            raise KeyError((mx, my))
        return j

    cdef inline int64_t _grid_at(self, int64_t mx, int64_t my) nogil:
        cdef int64_t gx = mx - self._gx0
        cdef int64_t gy = my - self._gy0
        if gx < 0 or gx >= self._gw or gy < 0 or gy >= self._gh:
            return -1
        return self._grid[gy * self._gw + gx]

    # ------------------------------------------------------------- moves

    cdef inline int _proposal_status(self, Py_ssize_t i) nogil:
        if self._bc[i]:
            return C_HELD_CONSTRAINT
        if self._ap2x[i] == _AP_NONE:
            return C_HELD_UNFLIPPABLE
        if (self._ap1x[i] + self._ap2x[i] != 2 * self._mid2x[i]
                or self._ap1y[i] + self._ap2y[i] != 2 * self._mid2y[i]):
            return C_HELD_UNFLIPPABLE
        return C_FLIPPED

    cdef inline int _decide_and_flip(self, Py_ssize_t i, double u) except -1:
        cdef int64_t lold = ((self._vx[i] if self._vx[i] >= 0 else -self._vx[i])
                             + (self._vy[i] if self._vy[i] >= 0 else -self._vy[i]))
        cdef int64_t nvx = (self._ap2x[i] - self._ap1x[i]) >> 1
        cdef int64_t nvy = (self._ap2y[i] - self._ap1y[i]) >> 1
        cdef int64_t lnew = ((nvx if nvx >= 0 else -nvx)
                             + (nvy if nvy >= 0 else -nvy))
        cdef int64_t mn = lnew if lnew < lold else lold
        cdef double a = self._pow[lnew - mn]
        cdef double b = self._pow[lold - mn]
        if u < a / (a + b):
            self._do_flip(i, nvx, nvy, lold, lnew)
            return C_FLIPPED
        return C_HELD_COIN

    cdef int _do_flip(self, Py_ssize_t i, int64_t nvx, int64_t nvy,
                      int64_t lold, int64_t lnew) except -1:
        cdef int64_t mx = self._mid2x[i], my = self._mid2y[i]
        cdef int64_t ovx = self._vx[i], ovy = self._vy[i]
        cdef int64_t ax = mx - ovx, ay = my - ovy
        cdef int64_t bx = mx + ovx, by = my + ovy
        cdef int64_t p1x = self._ap1x[i], p1y = self._ap1y[i]
        cdef int64_t p2x = self._ap2x[i], p2y = self._ap2y[i]
        if nvx < 0 or (nvx == 0 and nvy < 0):
            nvx = -nvx
            nvy = -nvy
        self._vx[i] = nvx
        self._vy[i] = nvy
        self._ap1x[i] = ax
        self._ap1y[i] = ay
        self._ap2x[i] = bx
        self._ap2y[i] = by
        self._total += lnew - lold
        self._swap_apex(ax, ay, p1x, p1y, bx, by, p2x, p2y)
        self._swap_apex(bx, by, p1x, p1y, ax, ay, p2x, p2y)
        self._swap_apex(ax, ay, p2x, p2y, bx, by, p1x, p1y)
        self._swap_apex(bx, by, p2x, p2y, ax, ay, p1x, p1y)
        return 0

    cdef inline int _swap_apex(self, int64_t ux, int64_t uy, int64_t wx,
                               int64_t wy, int64_t oldx, int64_t oldy,
                               int64_t newx, int64_t newy) except -1:
        cdef int64_t j = self._grid_at((ux + wx) >> 1, (uy + wy) >> 1)
        if j < 0:
            raise AssertionError("side midpoint missing from grid")
        if self._ap1x[j] == oldx and self._ap1y[j] == oldy:
            self._ap1x[j] = newx
            self._ap1y[j] = newy
        elif self._ap2x[j] == oldx and self._ap2y[j] == oldy:
            self._ap2x[j] = newx
            self._ap2y[j] = newy
        else:
            raise AssertionError("apex bookkeeping out of sync at %d" % j)
        return 0

    def step(self):
        """One heat-bath step; returns (outcome, midpoint index)."""
        cdef Py_ssize_t i = <Py_ssize_t>self._randrange(<uint64_t>self._m)
        cdef int out = self._proposal_status(i)
        if out != C_FLIPPED:
            return (out, i)
        return (self._decide_and_flip(i, self._next_double()), i)

    def apply_given(self, Py_ssize_t i, double u):
        """Apply a proposal with an externally supplied coin (coupling)."""
        cdef int out = self._proposal_status(i)
        if out != C_FLIPPED:
            return out
        return self._decide_and_flip(i, u)

    def run(self, long long n):
        """n steps; returns outcome counts (flips, constraint, unflip, coin)."""
        cdef long long k
        cdef long long c0 = 0, c1 = 0, c2 = 0, c3 = 0
        cdef Py_ssize_t i
        cdef int out
        for k in range(n):
            i = <Py_ssize_t>self._randrange(<uint64_t>self._m)
            out = self._proposal_status(i)
            if out == C_FLIPPED:
                out = self._decide_and_flip(i, self._next_double())
            if out == 0:
                c0 += 1
            elif out == 1:
                c1 += 1
            elif out == 2:
                c2 += 1
            else:
                c3 += 1
        return (c0, c1, c2, c3)

    def coupled_run(self, ChainKernel other, long long n):
        """n synchronous steps sharing this kernel's randomness.

        Both chains see the same midpoint index and the same coin each step
        (the coin is drawn unconditionally so the streams cannot diverge).
        """
        if other._m != self._m:
            raise ValueError("coupled kernels must share a midpoint set")
        cdef long long k
        cdef long long ca0 = 0, ca1 = 0, ca2 = 0, ca3 = 0
        cdef long long cb0 = 0, cb1 = 0, cb2 = 0, cb3 = 0
        cdef Py_ssize_t i
        cdef double u
        cdef int oa, ob
        for k in range(n):
            i = <Py_ssize_t>self._randrange(<uint64_t>self._m)
            u = self._next_double()
            oa = self._proposal_status(i)
            if oa == C_FLIPPED:
                oa = self._decide_and_flip(i, u)
            ob = other._proposal_status(i)
            if ob == C_FLIPPED:
                ob = other._decide_and_flip(i, u)
            if oa == 0: ca0 += 1
            elif oa == 1: ca1 += 1
            elif oa == 2: ca2 += 1
            else: ca3 += 1
            if ob == 0: cb0 += 1
            elif ob == 1: cb1 += 1
            elif ob == 2: cb2 += 1
            else: cb3 += 1
        return (ca0, ca1, ca2, ca3), (cb0, cb1, cb2, cb3)

    # ---------------------------------------------------- tracked running

    cdef inline bint _edge_crosses(self, Py_ssize_t i, int64_t gax, int64_t gay,
                                   int64_t gbx, int64_t gby) nogil:
        cdef int64_t mx = self._mid2x[i], my = self._mid2y[i]
        cdef int64_t dx = self._vx[i], dy = self._vy[i]
        cdef int64_t eax = mx - dx, eay = my - dy
        cdef int64_t ebx = mx + dx, eby = my + dy
        cdef int64_t d1 = (gbx - gax) * (eay - gay) - (gby - gay) * (eax - gax)
        cdef int64_t d2 = (gbx - gax) * (eby - gay) - (gby - gay) * (ebx - gax)
        cdef int64_t d3 = (ebx - eax) * (gay - eay) - (eby - eay) * (gax - eax)
        cdef int64_t d4 = (ebx - eax) * (gby - eay) - (eby - eay) * (gbx - eax)
        cdef int64_t lo1, hi1, lo2, hi2
        if d1 == 0 and d2 == 0 and d3 == 0 and d4 == 0:
            if eax != ebx:
                if eax <= ebx: lo1 = eax; hi1 = ebx
                else: lo1 = ebx; hi1 = eax
                if gax <= gbx: lo2 = gax; hi2 = gbx
                else: lo2 = gbx; hi2 = gax
            else:
                if eay <= eby: lo1 = eay; hi1 = eby
                else: lo1 = eby; hi1 = eay
                if gay <= gby: lo2 = gay; hi2 = gby
                else: lo2 = gby; hi2 = gay
            if lo2 > lo1: lo1 = lo2
            if hi2 < hi1: hi1 = hi2
            return lo1 < hi1
        return ((d1 > 0) != (d2 > 0) and d1 != 0 and d2 != 0
                and (d3 > 0) != (d4 > 0) and d3 != 0 and d4 != 0)

    def crossing_count(self, int64_t gax, int64_t gay, int64_t gbx, int64_t gby):
        cdef Py_ssize_t i
        cdef long long n = 0
        for i in range(self._m):
            if self._edge_crosses(i, gax, gay, gbx, gby):
                n += 1
        return n

    def run_until_psi_leq(self, int64_t gax, int64_t gay, int64_t gbx,
                          int64_t gby, double psi_init, double threshold,
                          alpha_pow, long long max_steps):
        """Steps until the crossing-weight potential of g drops to threshold.

        The potential starts at psi_init (computed externally) and is updated
        per flip with its exact single-flip increment: a shortening flip of a
        g-crossing edge subtracts alpha^(|old|-|g|), a lengthening flip whose
        new edge crosses g adds alpha^(|new|-|g|), anything else leaves it
        unchanged.  Returns (steps, psi); steps is -1 on timeout.
        """
        cdef int64_t glen = (((gbx - gax) if gbx >= gax else (gax - gbx))
                             + ((gby - gay) if gby >= gay else (gay - gby))) >> 1
        apow_arr = np.asarray(list(alpha_pow), dtype=np.float64)
        cdef double[::1] apow = apow_arr
        cdef double psi = psi_init
        cdef long long steps = 0
        cdef Py_ssize_t i
        cdef int out
        cdef bint before
        cdef int64_t lold, lnew
        if psi <= threshold:
            return (0, psi)
        while steps < max_steps:
            i = <Py_ssize_t>self._randrange(<uint64_t>self._m)
            out = self._proposal_status(i)
            if out == C_FLIPPED:
                lold = ((self._vx[i] if self._vx[i] >= 0 else -self._vx[i])
                        + (self._vy[i] if self._vy[i] >= 0 else -self._vy[i]))
                before = self._edge_crosses(i, gax, gay, gbx, gby)
                out = self._decide_and_flip(i, self._next_double())
                if out == C_FLIPPED:
                    lnew = ((self._vx[i] if self._vx[i] >= 0 else -self._vx[i])
                            + (self._vy[i] if self._vy[i] >= 0 else -self._vy[i]))
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
