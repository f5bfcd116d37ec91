"""Weighted lattice triangulations with constraint edges.

Heat-bath edge-flip dynamics, an exact enumeration oracle, a crossing-weight
potential with closed-form drift, and reproducible statistical experiments.
"""

from .geometry import (Edge, edge, is_primitive, is_unit_axis,
                       is_unit_diagonal, l1_length, midpoint2, mk_edge,
                       minimal_parallelogram, open_segments_intersect, pt)
from .region import (BoundaryCondition, ConstraintConflict, InvalidPolygon,
                     Region, build_region, compatible_edges,
                     edge_is_compatible, free_midpoints,
                     make_boundary_condition, parse_region_text, rectangle,
                     region_to_text)
from .triangulation import (EdgeClass, InvalidTriangulation, NotFlippable,
                            Triangulation)
from .edgeposet import (AtGroundState, EdgePoset, NotGroundEdge,
                        chain_to_ground, e_set, ground_state_edges,
                        ground_state_triangulation, parent, precedes)
from .trees import InfluenceTree, build_tree, partition_regions, roots_of
from .lyapunov import (DriftReport, InvalidLambda, LyapunovConfig,
                       crossing_count_bound_check, derive_config,
                       drive_to_ground, expected_drift, expected_drift_direct,
                       flip_probability, inflate_crossings,
                       largest_intersection_bound_check, psi_g, rho)
from .dynamics import (MidpointSetMismatch, StepOutcome, coupled_step,
                       hitting_time_experiment, random_state, run, state_key,
                       stationary_weights, step, transition_matrix)
from .enumeration import (CapExceeded, DegenerateCondition, EnumeratedSpace,
                          ExactMeasure, FkgWitness, breadth_order,
                          conditional_ground_prob, constraint_catalog,
                          enumerate_triangulations, exact_measure, fkg_search,
                          tv_distance, verify_witness)
from .experiments import (ExperimentPlan, TailReport, coupling_agreement,
                          coupling_separation_sweep, crossing_frequency,
                          degree_tail, edge_tail, ground_state_frequency,
                          plan_for, small_triangle_crossing,
                          stationary_samples, unit_vertical_crossings,
                          vertex_degree, wilson_interval)
from .chainkernel import BACKEND, available_backends, make_kernel
from .rng import Xoshiro256StarStar, derive_seed
from .render import render_svg
from .reporting import RunManifest, checkpoint_block, csv_text, parse_checkpoints

__version__ = "0.1.0"
