"""Heat-bath single-edge-flip dynamics on triangulation objects.

This is the reference implementation of the chain: one uniformly random
midpoint per step, and the proposed diagonal swap is accepted with the
heat-bath probability lam^|new| / (lam^|new| + lam^|old|).  Constraint edges
and geometrically unflippable edges are held without consuming a coin, so a
trajectory here is draw-for-draw identical to the array kernels in
``chainkernel`` started from the same seed.

The stationary law weights a triangulation by lam raised to its total edge
length; `transition_matrix` builds the one-step matrix exactly (Fractions)
for small instances so reversibility can be checked symbolically.
"""

from __future__ import annotations

from enum import Enum
from fractions import Fraction
from typing import Callable, Sequence

from .chainkernel import make_kernel
from .edgeposet import EdgePoset
from .geometry import Edge, Pt, l1_length
from .lyapunov import flip_probability
from .region import BoundaryCondition, Region
from .rng import Xoshiro256StarStar, derive_seed
from .triangulation import Triangulation


class MidpointSetMismatch(Exception):
    pass


class StepOutcome(Enum):
    FLIPPED = "flipped"
    HELD_CONSTRAINT = "held-constraint"
    HELD_UNFLIPPABLE = "held-unflippable"
    HELD_COIN = "held-by-coin"


OUTCOME_BY_CODE = (StepOutcome.FLIPPED, StepOutcome.HELD_CONSTRAINT,
                   StepOutcome.HELD_UNFLIPPABLE, StepOutcome.HELD_COIN)


def state_key(sigma: Triangulation) -> tuple[Edge, ...]:
    """Hashable identity of a state: edges in midpoint order."""
    return tuple(sigma.edge_of[x] for x in sigma.region.midpoints)


def step(sigma: Triangulation, lam: float,
         rng: Xoshiro256StarStar) -> tuple[StepOutcome, Pt]:
    """One in-place heat-bath step; returns (outcome, proposed midpoint)."""
    mids = sigma.region.midpoints
    x = mids[rng.randrange(len(mids))]
    if x in sigma.bc.by_midpoint:
        return (StepOutcome.HELD_CONSTRAINT, x)
    if not sigma.is_flippable(x):
        return (StepOutcome.HELD_UNFLIPPABLE, x)
    lold = l1_length(sigma.edge_of[x])
    lnew = l1_length(sigma.flipped_edge(x))
    if rng.random() < flip_probability(lnew, lold, lam):
        sigma.flip(x)
        return (StepOutcome.FLIPPED, x)
    return (StepOutcome.HELD_COIN, x)


def run(sigma: Triangulation, lam: float, rng: Xoshiro256StarStar, n: int,
        observer: Callable[[int, Triangulation], None] | None = None,
        observe_every: int = 0) -> dict[StepOutcome, int]:
    """n in-place steps; the observer sees (step index, state) after every
    observe_every-th step (and after the last)."""
    counts = dict.fromkeys(StepOutcome, 0)
    for t in range(1, n + 1):
        out, _ = step(sigma, lam, rng)
        counts[out] += 1
        if observer is not None and observe_every and (
                t % observe_every == 0 or t == n):
            observer(t, sigma)
    return counts


def coupled_step(sigma_a: Triangulation, sigma_b: Triangulation, lam: float,
                 rng: Xoshiro256StarStar) -> tuple[StepOutcome, StepOutcome, Pt]:
    """One synchronous step of two chains sharing midpoint and coin draws.

    Unlike the single-chain step, the coin is drawn unconditionally so both
    chains always consume the same randomness.
    """
    mids = sigma_a.region.midpoints
    if mids != sigma_b.region.midpoints:
        raise MidpointSetMismatch(
            "coupled chains must live on the same midpoint set")
    x = mids[rng.randrange(len(mids))]
    u = rng.random()
    outs = []
    for sigma in (sigma_a, sigma_b):
        if x in sigma.bc.by_midpoint:
            outs.append(StepOutcome.HELD_CONSTRAINT)
        elif not sigma.is_flippable(x):
            outs.append(StepOutcome.HELD_UNFLIPPABLE)
        else:
            lold = l1_length(sigma.edge_of[x])
            lnew = l1_length(sigma.flipped_edge(x))
            if u < flip_probability(lnew, lold, lam):
                sigma.flip(x)
                outs.append(StepOutcome.FLIPPED)
            else:
                outs.append(StepOutcome.HELD_COIN)
    return (outs[0], outs[1], x)


def random_state(region: Region, bc: BoundaryCondition,
                 rng: Xoshiro256StarStar, flips: int | None = None,
                 start: Triangulation | None = None) -> Triangulation:
    """A scrambled reachable state: random walk on the flip graph.

    Each proposal picks a uniform midpoint and flips it with probability 1/2
    when possible, so short and long edges both appear among samples.
    """
    sigma = (start or EdgePoset.of(region, bc).ground_triangulation()).copy()
    mids = region.midpoints
    n = 4 * len(mids) if flips is None else flips
    for _ in range(n):
        x = mids[rng.randrange(len(mids))]
        if x in bc.by_midpoint or not sigma.is_flippable(x):
            continue
        if rng.random() < 0.5:
            sigma.flip(x)
    return sigma


def transition_matrix(states: Sequence[Triangulation], lam
                      ) -> list[list[Fraction]]:
    """Exact one-step matrix over an explicit state list (Fraction entries).

    ``lam`` should be a Fraction (or int-like); the heat-bath ratio and the
    uniform midpoint choice are both exact, so row sums are exactly 1.
    """
    lam = Fraction(lam)
    index = {state_key(s): i for i, s in enumerate(states)}
    if len(index) != len(states):
        raise ValueError("duplicate states")
    n = len(states)
    P = [[Fraction(0)] * n for _ in range(n)]
    for i, sigma in enumerate(states):
        mids = sigma.region.midpoints
        m = len(mids)
        for x in mids:
            if x in sigma.bc.by_midpoint or not sigma.is_flippable(x):
                P[i][i] += Fraction(1, m)
                continue
            lold = l1_length(sigma.edge_of[x])
            lnew = l1_length(sigma.flipped_edge(x))
            p = flip_probability(lnew, lold, lam)
            target = sigma.copy().flip(x)
            j = index[state_key(target)]
            P[i][j] += p / m
            P[i][i] += (1 - p) / m
    for i in range(n):
        assert sum(P[i]) == 1
    return P


def stationary_weights(states: Sequence[Triangulation], lam) -> list[Fraction]:
    """Unnormalized stationary weights lam**(total edge length), exact."""
    lam = Fraction(lam)
    return [lam ** s.total_length() for s in states]


def hitting_time_experiment(sigma0: Triangulation, g: Edge, psi0: float,
                            max_steps: int, *, lam: float, alpha: float,
                            psi_init: float, seed: int,
                            n_runs: int = 1) -> list[int]:
    """Steps until the crossing-weight potential of g first drops to psi0.

    Runs n_runs independent chains from sigma0 with child seeds of ``seed``;
    returns one step count per run, -1 marking a run that exhausted
    max_steps.  psi_init must be the potential of sigma0 (computed exactly
    by the caller); alpha is the potential's base.
    """
    from .chainkernel import max_edge_length
    apow = [float(alpha) ** k
            for k in range(max_edge_length(sigma0.region) + 2)]
    times = []
    for r in range(n_runs):
        kernel = make_kernel(sigma0, lam, derive_seed(seed, r))
        t, _ = kernel.run_until_psi_leq(g.a[0], g.a[1], g.b[0], g.b[1],
                                        float(psi_init), float(psi0), apow,
                                        max_steps)
        times.append(t)
    return times
