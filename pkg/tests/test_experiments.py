import math

import numpy as np
import pytest
from scipy.optimize import brentq

from rcgibbs.experiments.cayley import (
    LOG3_HALF,
    argmax_boundary_t,
    cayley_fixed_points,
    cayley_pbar,
    critical_field,
    crossing_scan,
    fixed_point_residual,
    nonoverlap_connection_recursion,
    run_cayley,
    transition_matrix,
)
from rcgibbs.experiments.examples import (
    run_example1,
    run_example2,
    sweep_correlation_bound,
)
from rcgibbs.experiments.hardcore import (
    bipartition,
    checkerboard_instance,
    hardcore_disagreement,
)
from rcgibbs.lattice import build_grid, hypergraph


# ---------------------------------------------------------------------------
# worked examples


def test_example1_report():
    rep = run_example1((0.5, 1.0, 2.0))
    assert rep["all_counterexample"]
    assert rep["max_connection_prob"] == 0.0
    for row in rep["rows"]:
        assert abs(row["delta_mu"] - row["delta_mu_closed"]) < 1e-12
        assert row["cov_is_4_delta"] < 1e-12


def test_example2_report():
    rep = run_example2(1.0, 1.0)
    assert rep["nonzero_sigmas_all_disconnected"]
    assert rep["bound_holds"] and rep["cov_bound_holds"]
    assert abs(rep["ratio_pbar_to_abs_dmu"] - 2.0) < 1e-9
    assert abs(rep["rho_zero_sigma"] - rep["rho_zero_closed"]) < 1e-12
    assert rep["slice_measure_max_err"] < 1e-12
    for got, want in zip(rep["nu_active_probs"], rep["nu_active_closed"]):
        assert abs(got - want) < 1e-12


def test_sweep_short_run_clean():
    rep = sweep_correlation_bound(24, seed=7)
    assert rep["violations"] == 0
    assert rep["support_pairs_checked"] > 200


def test_zero_interaction_model_all_slack_zero():
    from rcgibbs.experiments.examples import check_model_bounds
    from rcgibbs.models import ising_spec

    spec = ising_spec(hypergraph(4, [(0, 1), (1, 2), (2, 3)]), 0.0)
    rep = check_model_bounds(spec)
    assert rep["event_violations"] == 0 and rep["cov_violations"] == 0
    # both sides vanish identically: the worst slack is 0 - 0
    assert abs(rep["worst_event_slack"]) < 1e-14


# ---------------------------------------------------------------------------
# binary tree


def test_fixed_points_unique_below_threshold():
    for J in (0.1, 0.3, 0.5, 0.54):
        roots = cayley_fixed_points(J, 0.0)
        assert len(roots) == 1 and abs(roots[0]) < 1e-9


def test_fixed_points_three_above_threshold():
    roots = cayley_fixed_points(1.0, 0.0)
    assert len(roots) == 3
    assert abs(roots[1]) < 1e-9
    assert abs(roots[0] + roots[2]) < 1e-9  # symmetric pair


def test_fixed_point_zero_coupling_is_field():
    roots = cayley_fixed_points(0.0, 0.7)
    assert len(roots) == 1 and abs(roots[0] - 0.7) < 1e-9


def test_fixed_point_residuals_tiny():
    for J, h in ((0.4, 0.0), (1.0, 0.0), (0.9, 0.2)):
        for t in cayley_fixed_points(J, h):
            assert fixed_point_residual(J, h, t) < 1e-12


def test_transition_matrix_rows_sum_to_one():
    for J, t in ((0.5, 0.0), (1.3, 0.8), (0.2, -1.0)):
        A = transition_matrix(J, t)
        assert np.allclose(A.sum(axis=1), 1.0, atol=1e-14)


def test_activity_at_symmetric_chain():
    J = 0.8
    act = cayley_pbar(J, 0.0, 0.0)
    assert abs(act.det - math.tanh(J)) < 1e-13
    assert abs(act.value - math.tanh(J) * math.tanh(4 * J)) < 1e-13
    assert abs(act.p_single - math.tanh(2 * J)) < 1e-13
    assert abs(act.p_nonoverlap - math.tanh(4 * J)) < 1e-13


def test_zero_coupling_activity_vanishes():
    act = cayley_pbar(0.0, 0.0, 0.0)
    assert act.value == 0.0
    assert act.branching_value == 0.0


def test_determinant_identity():
    # det A = a00 a11 (1 - e^{-4J}) = sinh 2J / (cosh 2J + cosh 2t)
    for J, t in ((0.7, 0.0), (1.0, 0.4), (0.3, 1.2)):
        A = transition_matrix(J, t)
        det = A[0, 0] * A[1, 1] - A[1, 0] * A[0, 1]
        assert abs(det - A[0, 0] * A[1, 1] * (1 - math.exp(-4 * J))) < 1e-13
        assert abs(det - math.sinh(2 * J) / (math.cosh(2 * J) + math.cosh(2 * t))) < 1e-13


def test_crossing_formula_against_independent_rootfind():
    got = crossing_scan("formula")
    want = brentq(lambda J: math.tanh(J) * math.tanh(4 * J) - 0.5, 0.3, 1.0, xtol=1e-12)
    assert abs(got["J_star"] - want) < 1e-6
    assert abs(got["gap_to_log3_half"] - (want - LOG3_HALF)) < 1e-6


def test_crossing_branching_hits_threshold():
    got = crossing_scan("branching")
    assert abs(got["J_star"] - LOG3_HALF) < 1e-6


def test_boundary_comparison():
    # at the coexistence-boundary chain the bare determinant equals 1/2
    # exactly, while the printed formula falls short by the tanh factor
    for J in (0.7, 1.0, 1.5):
        tm = argmax_boundary_t(J)
        act = cayley_pbar(J, critical_field(J), tm)
        assert abs(act.branching_value - 0.5) < 1e-10
        assert abs(act.value - 0.5 * math.tanh(4 * J)) < 1e-10


def test_critical_field_zero_below_threshold():
    assert critical_field(0.4) == 0.0
    assert critical_field(1.0) > 0.0


def test_cayley_chain_type_validates_fixed_point():
    from rcgibbs.experiments.cayley import CayleyChain

    roots = cayley_fixed_points(1.0, 0.0)
    chain = CayleyChain(1.0, 0.0, roots[2])
    assert np.allclose(chain.matrix.sum(axis=1), 1.0)
    with pytest.raises(ValueError):
        CayleyChain(1.0, 0.0, 0.123)


def test_run_cayley_report():
    rep = run_cayley([0.3, 0.8])
    assert rep["crossing_branching"]["gap_to_log3_half"] < 1e-6
    assert abs(rep["crossing_formula"]["J_star"] - 0.5641919823) < 1e-6
    for row in rep["rows"]:
        assert row["max_residual"] < 1e-12


# ---------------------------------------------------------------------------
# hard-core


def test_bipartition_rejects_triangle():
    with pytest.raises(ValueError):
        bipartition(hypergraph(3, [(0, 1), (1, 2), (0, 2)]))


def test_hardcore_zero_activity_no_disagreement():
    g = build_grid(2, 2)
    rep = hardcore_disagreement(g, 0.0, {0}, {3})
    assert rep["p_disagreement_path"] == 0.0
    assert rep["p_active_connection"] == 0.0
    assert rep["n_disagreement_regions"] == 1  # the empty region only


def test_hardcore_grid_equivalence():
    g = build_grid(3, 2)
    rep = hardcore_disagreement(g, 1.0, {0}, {5})
    assert rep["indicators_equal_everywhere"]
    assert rep["p_disagreement_path"] == rep["p_active_connection"]
    assert rep["p_disagreement_path"] > 0
    checks = rep["slice_checks"]
    assert checks["activity_deterministic"]
    assert checks["active_set_matches_disagreement_interior"]
    assert checks["two_configs_per_component"]


def test_hardcore_opposite_checkerboards():
    graph, region, bc1 = checkerboard_instance(2, 3, 0)
    _, _, bc2 = checkerboard_instance(2, 3, 1)
    rep = hardcore_disagreement(
        graph, 1.0, {region[0]}, {region[-1]}, boundary1=bc1, boundary2=bc2, region=region
    )
    assert rep["indicators_equal_everywhere"]
    assert rep["p_disagreement_path"] == rep["p_active_connection"]
    assert rep["uniqueness_marker"]["activity_threshold"] == pytest.approx(
        0.592746 / (1 - 0.592746)
    )


def test_hardcore_threshold_marker_flag():
    g = build_grid(2, 2)
    low = hardcore_disagreement(g, 0.5, {0}, {3})
    high = hardcore_disagreement(g, 3.0, {0}, {3})
    assert low["uniqueness_marker"]["below_threshold"]
    assert not high["uniqueness_marker"]["below_threshold"]


def test_recursion_reference_values():
    # frozen from the closed form: p = tanh(J), f_d = 1 - (1 - p f_{d-1})^2
    J = 1.0
    p = math.tanh(J)
    f1 = 1 - (1 - p) ** 2
    f2 = 1 - (1 - p * f1) ** 2
    assert abs(nonoverlap_connection_recursion(J, 1) - 0.5 * f1) < 1e-15
    assert abs(nonoverlap_connection_recursion(J, 2) - 0.5 * f2) < 1e-15
