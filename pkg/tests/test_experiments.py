"""Experiment drivers: tails, crossings, couplings, frequency intervals."""

import math

import pytest

from latflip.dynamics import MidpointSetMismatch, state_key
from latflip.edgeposet import EdgePoset
from latflip.experiments import (
    ExperimentPlan,
    column_crossing_stats,
    coupling_agreement,
    coupling_separation_sweep,
    crossing_frequency,
    default_burn_in,
    default_thin,
    degree_tail,
    edge_tail,
    ground_state_frequency,
    plan_for,
    small_triangle_crossing,
    stationary_samples,
    tail_from_values,
    unit_vertical_crossings,
    verify_crossing_path,
    vertex_degree,
    wall_constraints,
    wilson_interval,
    window_midpoints,
)
from latflip.geometry import edge
from latflip.region import make_boundary_condition, rectangle


def test_schedule_defaults_scale_with_midpoint_count():
    region = rectangle(2, 2)
    m = len(region.midpoints)
    assert m == 16
    assert default_burn_in(region) == int(20 * m * math.log(m))
    assert default_thin(region) == m
    plan = plan_for(region, 0.5, 1)
    assert plan.effective_burn_in == default_burn_in(region)
    assert plan.effective_thin == m


def test_plan_validation():
    region = rectangle(1, 1)
    bc = make_boundary_condition(region)
    with pytest.raises(ValueError, match="burn_in"):
        ExperimentPlan(region=region, bc=bc, lam=0.5, seed=1, burn_in=-1)
    with pytest.raises(ValueError, match="n_samples"):
        ExperimentPlan(region=region, bc=bc, lam=0.5, seed=1, n_samples=0)
    plan = plan_for(region, 0.5, 9, burn_in=3, thin=2, n_samples=5, probe=7)
    assert (plan.effective_burn_in, plan.effective_thin) == (3, 2)
    assert plan.params == {"probe": 7}


def test_stationary_samples_are_valid_and_reproducible():
    plan = plan_for(rectangle(2, 2), 0.5, 31, burn_in=200, thin=8,
                    n_samples=12)
    first = [state_key(s) for s in stationary_samples(plan)]
    assert len(first) == 12
    for s in stationary_samples(plan):
        s.check()
    assert [state_key(s) for s in stationary_samples(plan)] == first


def test_tail_fit_recovers_exact_geometric_decay():
    # survival 1, 1/2, 1/4 is exactly geometric with rate log 2
    report = tail_from_values([0, 0, 1, 2], floor=0)
    assert report.rows == ((0, 4, 1.0), (1, 2, 0.5), (2, 1, 0.25))
    assert math.isclose(report.beta_hat, math.log(2), rel_tol=1e-12)
    assert report.slope == -report.beta_hat
    assert report.beta_se > 0
    assert report.meets_rate_gate(0.5)
    assert not report.meets_rate_gate(0.7)
    # four samples are far too few for a three-sigma claim
    assert not report.decays_at_three_sigma()
    assert report.phat(1) == 0.5 and report.phat(9) == 0.0


def test_tail_fit_when_every_sample_sits_at_the_floor():
    report = tail_from_values([3, 3, 3], floor=3)
    assert report.rows == ((0, 3, 1.0),)
    assert report.beta_hat == float("inf")
    assert report.beta_se == 0.0
    assert report.decays_at_three_sigma()


def test_tail_fit_input_validation():
    with pytest.raises(ValueError, match="no samples"):
        tail_from_values([], floor=0)
    with pytest.raises(ValueError, match="below the declared floor"):
        tail_from_values([1], floor=2)


def test_wilson_interval_frozen_values():
    p, lo, hi = wilson_interval(5, 10)
    assert p == 0.5
    assert lo == pytest.approx(0.1558763991941573, rel=1e-12)
    assert hi == pytest.approx(0.8441236008058427, rel=1e-12)
    p0, lo0, hi0 = wilson_interval(0, 10)
    assert p0 == 0.0 and lo0 < 1e-12 and 0.47 < hi0 < 0.48
    with pytest.raises(ValueError):
        wilson_interval(0, 0)


def test_unit_vertical_crossings_on_ground_and_broken_column():
    region = rectangle(3, 2)
    bc = make_boundary_condition(region)
    sigma = EdgePoset.of(region, bc).ground_triangulation()
    assert unit_vertical_crossings(sigma) == 2
    sigma.flip((2, 1))  # replace the column-1 lower vertical with a long edge
    assert unit_vertical_crossings(sigma) == 1
    # explicit sub-rectangle: only column 2 is interior to [1, 3]
    assert unit_vertical_crossings(sigma, (1, 0, 3, 2)) == 1


def test_small_triangle_crossing_on_ground_strip():
    region = rectangle(3, 2)
    bc = make_boundary_condition(region)
    sigma = EdgePoset.of(region, bc).ground_triangulation()
    ok, path = small_triangle_crossing(sigma, (0, 0, 3, 2), 4)
    assert ok and len(path) == 4
    assert verify_crossing_path(path, (0, 0, 3, 2), 4)
    # tampered witnesses fail the independent check
    assert not verify_crossing_path(path[:-1], (0, 0, 3, 2), 4)
    assert not verify_crossing_path([], (0, 0, 3, 2), 4)


def test_small_triangle_crossing_rejects_bad_rectangles():
    region = rectangle(3, 2)
    bc = make_boundary_condition(region)
    sigma = EdgePoset.of(region, bc).ground_triangulation()
    with pytest.raises(ValueError, match="width"):
        small_triangle_crossing(sigma, (1, 0, 1, 2), 4)
    pinned = make_boundary_condition(region, [edge(1, 0, 2, 1)])
    sigma2 = EdgePoset.of(region, pinned).ground_triangulation()
    with pytest.raises(ValueError, match="constraint"):
        small_triangle_crossing(sigma2, (0, 0, 3, 2), 4)


def test_crossing_frequency_verifies_each_witness():
    plan = plan_for(rectangle(3, 2), 0.5, 17, burn_in=100, thin=5,
                    n_samples=20)
    freq, n = crossing_frequency(plan, (0, 0, 3, 2), 4)
    assert n == 20 and 0.0 <= freq <= 1.0


def test_column_crossing_stats_bounds():
    plan = plan_for(rectangle(4, 1), 0.5, 23, burn_in=100, thin=5,
                    n_samples=30)
    mean, se, n = column_crossing_stats(plan)
    assert n == 30 and 0.0 <= mean <= 3.0 and se >= 0.0


def test_coupling_agreement_of_identical_instances_is_total():
    region = rectangle(3, 1)
    plan_a = plan_for(region, 0.5, 41, burn_in=50, thin=3, n_samples=25)
    plan_b = plan_for(region, 0.5, 999, burn_in=50, thin=3, n_samples=25)
    report = coupling_agreement(plan_a, plan_b,
                                window_midpoints(region, 0, 3))
    assert report.frequency == 1.0 and report.n == 25


def test_coupling_agreement_input_checks():
    pa = plan_for(rectangle(2, 1), 0.5, 1, burn_in=1, n_samples=1)
    pb = plan_for(rectangle(1, 2), 0.5, 1, burn_in=1, n_samples=1)
    with pytest.raises(MidpointSetMismatch):
        coupling_agreement(pa, pb, ())
    pc = plan_for(rectangle(2, 1), 0.6, 1, burn_in=1, n_samples=1)
    with pytest.raises(ValueError, match="weight"):
        coupling_agreement(pa, pc, ())


def test_wall_constraints_and_window_midpoints():
    assert wall_constraints(3, 2) == (((3, 0), (3, 1)), ((3, 1), (3, 2)))
    region = rectangle(3, 1)
    window = window_midpoints(region, 0, 1)
    assert window and all(0 <= m[0] <= 2 for m in window)
    assert (5, 1) not in window


def test_coupling_separation_sweep_checks_wall_position():
    with pytest.raises(ValueError, match="wall column"):
        coupling_separation_sweep(4, 1, 0.5, 1, window_hi=2, seps=[5],
                                  n_samples=1)


def test_vertex_degree_of_interior_ground_vertex():
    region = rectangle(2, 2)
    bc = make_boundary_condition(region)
    sigma = EdgePoset.of(region, bc).ground_triangulation()
    assert vertex_degree(sigma, (2, 2)) == 6


def test_degree_tail_report_shape_and_vertex_check():
    plan = plan_for(rectangle(2, 2), 0.5, 29, burn_in=100, thin=4,
                    n_samples=25)
    report = degree_tail(plan, (2, 2))
    assert report.n == 25
    assert report.rows[0][2] == 1.0
    with pytest.raises(ValueError, match="not in the region"):
        degree_tail(plan, (99, 99))


def test_edge_tail_requires_a_ground_edge():
    plan = plan_for(rectangle(3, 2), 0.5, 5, burn_in=10, n_samples=2)
    with pytest.raises(ValueError, match="ground edge"):
        edge_tail(plan, (2, 1), edge(0, 0, 2, 1))
    report = edge_tail(plan, (2, 1), edge(1, 0, 1, 1))
    assert report.floor == 1 and report.n == 2


def test_ground_state_frequency_interval():
    plan = plan_for(rectangle(2, 2), 0.5, 37, burn_in=100, thin=4,
                    n_samples=40)
    poset = EdgePoset.of(plan.region, plan.bc)
    g = poset.canonical_ground_edge((2, 1))
    report = ground_state_frequency(plan, g)
    assert report.n == 40
    assert 0.0 <= report.lower <= report.frequency <= report.upper <= 1.0
    with pytest.raises(ValueError, match="ground"):
        ground_state_frequency(plan, edge(0, 0, 2, 1))
