"""Exhaustive state-space oracle: counts, exact measures, FKG counterexample."""

import math
from fractions import Fraction

import pytest

from latflip.enumeration import (
    CapExceeded,
    DegenerateCondition,
    as_rational,
    breadth_order,
    conditional_ground_prob,
    constraint_catalog,
    enumerate_triangulations,
    exact_measure,
    fkg_search,
    interior_constraint_pool,
    tv_distance,
    verify_witness,
)
from latflip.geometry import edge
from latflip.region import compatible_edges, make_boundary_condition, rectangle

STRIP_COUNTS = {1: 2, 2: 6, 3: 20, 4: 70, 5: 252, 6: 924}


def space_of(n, k, extra=()):
    region = rectangle(n, k)
    bc = make_boundary_condition(region, extra)
    return region, bc, enumerate_triangulations(region, bc)


def test_strip_counts_match_central_binomial():
    for n, expected in STRIP_COUNTS.items():
        _, _, space = space_of(n, 1)
        assert len(space) == expected
        assert expected == math.comb(2 * n, n)


def test_square_2x2_has_64_states():
    _, _, space = space_of(2, 2)
    assert len(space) == 64


def test_enumeration_respects_anclin_bound_and_validates_cleanly():
    for n, k in ((1, 1), (3, 1), (2, 2)):
        _, _, space = space_of(n, k)
        assert len(space) <= space.anclin_bound()
        assert space.max_live <= 2
        assert space.dead_leaves == 0
        # spot-check full validation and index round trips
        for i in (0, len(space) - 1):
            space.triangulation(i).check()
            assert space.index_of(space.states[i]) == i


def test_breadth_order_walks_top_to_bottom_left_to_right():
    region = rectangle(2, 2)
    order = breadth_order(region)
    assert order[0] == (1, 4)
    assert sorted(order) == sorted(region.midpoints)
    ys = [m[1] for m in order]
    assert ys == sorted(ys, reverse=True)


def test_custom_order_yields_the_same_state_set():
    region = rectangle(2, 2)
    bc = make_boundary_condition(region)
    default = enumerate_triangulations(region, bc)
    custom = enumerate_triangulations(region, bc,
                                      order=sorted(region.midpoints))
    assert set(default.states) == set(custom.states)
    assert len(custom) == len(default)


def test_order_must_be_a_midpoint_permutation():
    region = rectangle(1, 1)
    bc = make_boundary_condition(region)
    with pytest.raises(ValueError, match="permutation"):
        enumerate_triangulations(region, bc, order=[(1, 1)])


def test_cap_exceeded_reports_cap_and_partial_count():
    region = rectangle(2, 2)
    bc = make_boundary_condition(region)
    with pytest.raises(CapExceeded) as info:
        enumerate_triangulations(region, bc, cap=10)
    assert info.value.cap == 10
    assert info.value.partial_count == 11
    assert str(info.value) == "enumeration exceeded cap 10 (at least 11 states)"


def test_exact_measure_partition_function_frozen():
    _, _, space = space_of(2, 2)
    measure = exact_measure(space, Fraction(4, 5))
    assert measure.Z == Fraction(29572464740663296, 59604644775390625)
    assert sum(measure.probs.values()) == 1
    uniform = exact_measure(space, 1)
    assert all(p == Fraction(1, 64) for p in uniform.probs.values())


def test_as_rational_rejects_floats():
    assert as_rational(Fraction(4, 5)) == Fraction(4, 5)
    assert as_rational(2) == Fraction(2)
    with pytest.raises(TypeError, match="float"):
        as_rational(0.8)
    with pytest.raises(ValueError):
        exact_measure(space_of(1, 1)[2], Fraction(0))


def test_tv_distance_zero_for_matching_and_half_for_point_mass():
    _, _, space = space_of(1, 1)
    uniform = exact_measure(space, 1)
    counts = {s: 7 for s in space.states}
    assert tv_distance(counts, uniform) == 0.0
    point = {space.states[0]: 3}
    assert tv_distance(point, uniform) == 0.5
    with pytest.raises(ValueError, match="unknown"):
        tv_distance({("bogus",): 1}, uniform)
    with pytest.raises(ValueError, match="empty"):
        tv_distance({}, uniform)


def test_conditional_ground_prob_on_self_is_degenerate_split():
    _, _, space = space_of(1, 1)
    pg, pn, pm = conditional_ground_prob(space, 1, (1, 1), (1, 1))
    assert (pg, pn, pm) == (1, 0, Fraction(1, 2))


def test_conditional_ground_prob_rejects_zero_probability_branch():
    region, bc, space = space_of(1, 1, extra=[edge(0, 1, 1, 0)])
    assert len(space) == 1
    with pytest.raises(DegenerateCondition):
        conditional_ground_prob(space, 1, (1, 1), (1, 1))


def test_every_enumerated_edge_is_locally_compatible():
    region, bc, space = space_of(2, 2)
    pools = {x: set(compatible_edges(region, bc, x))
             for x in region.midpoints}
    seen = {x: set() for x in region.midpoints}
    for s in space.states:
        for x, e in zip(region.midpoints, s):
            assert e in pools[x]
            seen[x].add(e)
    # the single-cell centre realizes its full two-diagonal pool
    region1, bc1, space1 = space_of(1, 1)
    centre_pool = set(compatible_edges(region1, bc1, (1, 1)))
    used = {s[region1.midpoints.index((1, 1))] for s in space1.states}
    assert used == centre_pool == {edge(0, 0, 1, 1), edge(0, 1, 1, 0)}


def test_constraint_catalog_orders_and_filters():
    region = rectangle(1, 1)
    catalog = list(constraint_catalog(region, max_constraints=2))
    assert catalog[0] == ()
    assert catalog[1:] == [(edge(0, 0, 1, 1),), (edge(0, 1, 1, 0),)]
    # the two diagonals share a midpoint, so no pair survives
    assert interior_constraint_pool(region) == (edge(0, 0, 1, 1),
                                                edge(0, 1, 1, 0))


def test_fkg_search_finds_the_free_square_witness():
    witness = fkg_search([rectangle(2, 2)], Fraction(1, 2))
    assert witness is not None
    assert witness.constraints == ()
    assert (witness.x, witness.y) == ((1, 1), (1, 2))
    assert witness.p_given_ground == Fraction(179, 360)
    assert witness.p_given_not == Fraction(1, 2)
    assert witness.p_marginal == Fraction(199, 400)
    assert witness.holds()
    assert "region polygon[8 vertices, 2A=8], constraints []" \
        in witness.describe()


def test_verify_witness_recomputes_at_other_weights():
    witness = fkg_search([rectangle(2, 2)], Fraction(1, 2))
    again = verify_witness(witness)
    assert again.holds()
    assert (again.p_given_ground, again.p_given_not, again.p_marginal) == (
        witness.p_given_ground, witness.p_given_not, witness.p_marginal)
    other = verify_witness(witness, lam=Fraction(4, 5))
    assert other.holds()
    assert other.p_given_ground == Fraction(1321, 2706)
    assert other.p_given_not == Fraction(1, 2)
    assert other.p_marginal == Fraction(1649, 3362)
