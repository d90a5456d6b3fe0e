"""Directed-graph clustering analytics around K22 structures.

A K22 is four distinct nodes in which two "bottom" nodes both follow the
same two "top" nodes; the interest clustering coefficient is four times the
closed-K22 count over the open-K22 count.  The package computes it exactly
together with the triangle-based clustering coefficients, estimates all of
them by edge sampling and Monte-Carlo fork sampling, generates random
digraphs with tunable K22 density, and ranks link recommendations by the
number of open structures a new link would close.
"""

__version__ = "0.1.0"

from .degrees import DegreeHistogram, PowerLawFit, degree_distribution, \
    fit_power_law, log_binned_points
from .errors import CountingError, InfeasibleError, InputError, K22KitError, \
    ParseError, SampleTooSparseError
from .estimators import EdgeSampleConfig, EstimateTrace, ForkSampleConfig, \
    OverlapProfile, chebyshev_min_probability, edge_sample, \
    estimate_from_sample, mc_fork_icc, mc_required_iterations, \
    mc_triangle_cc, measure_overlap_profile
from .exact import Coefficient, CoefficientReport, K22Result, \
    LocalIccDistribution, PerNodeK22Stats, StructureCounts, coefficients, \
    count_directed_triangles, count_k22, count_report, \
    count_undirected_k22, count_undirected_triangles, full_structure_counts, \
    local_icc_distribution, undirected_structure_counts
from .generator import GenerationResult, ModelParams, SweepResult, \
    TheoreticalExponents, default_seed_graph, feasible_p_interval, generate, \
    icc_vs_p_sweep, k22_walk_sample, solve_delta, theoretical_exponents
from .graph import DirectedGraph, UndirectedGraph, is_cache_file, \
    load_cache, load_edge_list, mutual_graph, save_cache, save_edge_list, \
    strip_bidirectional, transpose, undirected_projection
from .recommend import CohortReport, Recommendation, cohort_eval, \
    k22_recommendations, k22_strengths, strength_delta_oracle, \
    tt_recommendations, tt_strengths
from .rng import derive_seed, philox_generator
