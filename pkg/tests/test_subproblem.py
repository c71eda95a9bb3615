import io
import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from inexact_slp import merit
from inexact_slp.penalty import ControlParams, reduction_count_bound, rho_lower_bound
from inexact_slp.problem import Evaluation, Kind
from inexact_slp.simplex import PivotStatus, Tableau
from inexact_slp.subproblem import (
    SubproblemParams, SubproblemStalled, TerminatedBy, build_standard_form, extract_duals,
    extract_primal, initial_basis, project_duals, ratios, solve_subproblem, update_objective_row,
)

from oracles import random_evaluation, vertex_min

EQ, INEQ = Kind.EQUALITY, Kind.INEQUALITY
GAMMA = 0.01


def make(g, b, A, kinds):
    return Evaluation.from_arrays(np.zeros(len(g)), 0.0, g, b, A, kinds)


def one_equality():
    return make([1.0], [1.0], [[1.0]], [EQ])


def lp_objective(lp, tab):
    return float(lp.cbar @ tab.primal())


def test_standard_form_single_equality():
    lp = build_standard_form(one_equality(), 1.0, 1.0)
    # columns d+, d-, r, s, u, v (t and z are empty)
    np.testing.assert_array_equal(lp.cbar, [1.0, -1.0, 1.0, 1.0, 0.0, 0.0])
    np.testing.assert_array_equal(lp.bbar * lp.row_sign, [-1.0, 1.0, 1.0])
    np.testing.assert_array_equal(lp.row_sign, [-1.0, 1.0, 1.0])
    raw = lp.Abar * lp.row_sign[:, None]
    np.testing.assert_array_equal(raw, [
        [1, -1, -1, 1, 0, 0],
        [1, -1, 0, 0, 1, 0],
        [-1, 1, 0, 0, 0, 1],
    ])


def test_standard_form_block_layout():
    ev = make([1.0, 2.0], [1.0, -1.0, 2.0], np.arange(6.0).reshape(3, 2), [EQ, INEQ, INEQ])
    lp = build_standard_form(ev, 1.0, 1.0)
    n, mE, mI = 2, 1, 2
    assert lp.Abar.shape == (mE + mI + 2 * n, 4 * n + 2 * mE + 2 * mI)
    sizes = {name: s.stop - s.start for name, s in lp.blocks.items()}
    assert sizes == {"d_plus": n, "d_minus": n, "r": mE, "t": mI, "s": mE, "z": mI, "u": n, "v": n}
    assert np.all(lp.bbar >= 0)


def test_zero_penalty_zeroes_step_costs():
    lp = build_standard_form(one_equality(), 0.0, 1.0)
    assert not np.any(lp.cbar[lp.blocks["d_plus"]]) and not np.any(lp.cbar[lp.blocks["d_minus"]])


def test_no_constraints_zero_gradient():
    ev = make([0.0, 0.0], [], np.zeros((0, 2)), [])
    lp = build_standard_form(ev, 1.0, 1.0)
    tab = initial_basis(lp, ev)
    tab.solve()
    assert lp_objective(lp, tab) == 0.0
    np.testing.assert_array_equal(extract_primal(tab, lp), [0.0, 0.0])


@pytest.mark.parametrize("b, basic", [(1.0, "r"), (-1.0, "s")])
def test_initial_basis_choice(b, basic):
    ev = make([1.0], [b], [[1.0]], [EQ])
    lp = build_standard_form(ev, 1.0, 1.0)
    tab = initial_basis(lp, ev)
    x = tab.primal()
    assert x[lp.blocks[basic]][0] == 1.0
    other = "s" if basic == "r" else "r"
    assert x[lp.blocks[other]][0] == 0.0
    np.testing.assert_array_equal(extract_primal(tab, lp), [0.0])


def test_initial_basis_degenerate_start():
    ev = make([1.0, 1.0], [0.0, 0.0], [[1.0, -1.0], [2.0, 2.0]], [EQ, INEQ])
    lp = build_standard_form(ev, 1.0, 0.5)
    tab = initial_basis(lp, ev)
    x = tab.primal()
    for name in ("r", "s", "t", "z"):
        assert not np.any(x[lp.blocks[name]])
    np.testing.assert_array_equal(x[lp.blocks["u"]], [0.5, 0.5])
    np.testing.assert_array_equal(x[lp.blocks["v"]], [0.5, 0.5])


@given(st.integers(0, 2**31), st.integers(1, 4), st.integers(0, 4), st.floats(0, 3))
def test_initial_tableau_models_zero_step(seed, n, m, rho):
    ev = random_evaluation(np.random.default_rng(seed), n, m)
    lp = build_standard_form(ev, rho, 1.0)
    tab = initial_basis(lp, ev)
    assert lp_objective(lp, tab) == pytest.approx(merit.violation(ev), abs=1e-12)


@given(st.integers(0, 2**31), st.integers(1, 4), st.integers(0, 4), st.floats(0, 3), st.floats(0.1, 2))
def test_simplex_optimum_matches_vertex_oracle(seed, n, m, rho, delta):
    ev = random_evaluation(np.random.default_rng(seed), n, m)
    lp = build_standard_form(ev, rho, delta)
    tab = initial_basis(lp, ev)
    assert tab.solve() is PivotStatus.OPTIMAL
    d = extract_primal(tab, lp)
    best, _ = vertex_min(ev, rho, delta)
    assert lp_objective(lp, tab) == pytest.approx(best, abs=1e-9)
    assert merit.linear_model(ev, d, rho) == pytest.approx(best, abs=1e-9)
    lam, _ = project_duals(ev, extract_duals(tab, lp), np.zeros(m), delta)
    # strong duality and exact complementarity at the optimum
    assert merit.dual_value(ev, lam, rho, delta) == pytest.approx(best, abs=1e-8 * max(1, abs(best)))
    assert merit.complementarity_measure(ev, d, lam) == pytest.approx(0.0, abs=1e-9)


def test_raw_duals_are_clamped():
    ev = make([0.0, 0.0], [1.0, 1.0], np.eye(2), [EQ, INEQ])
    lam, nu = project_duals(ev, np.array([2.5, -0.3]), np.zeros(2), 1.0)
    np.testing.assert_array_equal(lam, [1.0, 0.0])
    assert merit.dual_value(ev, nu, 0.0, 1.0) >= merit.dual_value(ev, lam, 0.0, 1.0)


def test_nu_keeps_the_better_feasibility_dual():
    ev = one_equality()
    good = np.array([1.0])  # p(1; 0) = -|1| + 1 = 0
    bad = np.array([-1.0])  # p(-1; 0) = -1 - 1 = -2
    _, nu = project_duals(ev, bad, good, 1.0)
    np.testing.assert_array_equal(nu, good)
    _, nu = project_duals(ev, good, bad, 1.0)
    np.testing.assert_array_equal(nu, good)


def test_objective_row_swap_examples():
    ev = make([0.0], [1.0], [[1.0]], [EQ])
    lp = build_standard_form(ev, 1.0, 1.0)
    tab = initial_basis(lp, ev)
    before = tab.reduced_costs.copy()
    update_objective_row(tab, lp, 0.5, ev)
    np.testing.assert_array_equal(tab.reduced_costs, before)
    ev2 = one_equality()
    lp2 = build_standard_form(ev2, 1.0, 1.0)
    tab2 = initial_basis(lp2, ev2)
    before = tab2.reduced_costs.copy()
    update_objective_row(tab2, lp2, 1.0, ev2)
    np.testing.assert_array_equal(tab2.reduced_costs, before)


@given(st.integers(0, 2**31), st.integers(1, 4), st.integers(1, 4), st.floats(0.05, 0.95))
def test_objective_row_swap_matches_cold_rebuild(seed, n, m, factor):
    ev = random_evaluation(np.random.default_rng(seed), n, m)
    lp = build_standard_form(ev, 1.0, 1.0)
    tab = initial_basis(lp, ev)
    for _ in range(2):
        tab.pivot()
    update_objective_row(tab, lp, factor, ev)
    cold_lp = build_standard_form(ev, factor, 1.0)
    cold = Tableau(cold_lp.cbar, cold_lp.Abar, cold_lp.bbar, tab.basis.copy())
    np.testing.assert_allclose(tab.reduced_costs, cold.reduced_costs, atol=1e-12)
    np.testing.assert_allclose(tab.rhs, cold.rhs, atol=1e-10)


def test_ratios_at_feasible_stationary_point():
    ev = make([0.0], [0.0], [[1.0]], [EQ])
    r_v, r_phi, r_c = ratios(ev, [0.0], [0.0], [0.0], 1.0, GAMMA, 1.0)
    assert r_v == 1.0 and r_c == 1.0 and r_phi == 1.0


def test_ratios_worked_equality_instance():
    ev = one_equality()
    r_v, r_phi, r_c = ratios(ev, [-1.0], [-1.0], [-1.0], 1.0, GAMMA, 1.0)
    # l0g = 1.01, l(d;1) = -1, p(lam;1) = -1
    assert r_phi == pytest.approx((1.01 + 1.0) / (1.01 + 1.0))
    assert r_c == 1.0


def test_ratios_reject_nonpositive_gamma():
    with pytest.raises(ValueError):
        ratios(one_equality(), [0.0], [0.0], [0.0], 1.0, 0.0, 1.0)


def test_stationary_lp_exits_immediately():
    ev = make([0.0, 0.0], [0.0, 0.0], [[1.0, 0.0], [0.0, 1.0]], [EQ, INEQ])
    res = solve_subproblem(ev, 1.0, GAMMA, 1.0)
    assert res.pivots == 0
    assert res.null_step
    assert res.rho_tilde == 1.0 and res.rho_reductions == 0
    assert res.terminated_by in (TerminatedBy.RATIOS_SATISFIED, TerminatedBy.LP_OPTIMAL)


def test_one_dimensional_equality_subproblem():
    # min x s.t. x = 0 linearized at x0 = 1: g = 1, a = 1, b = 1
    res = solve_subproblem(one_equality(), 1.0, GAMMA, 1.0)
    np.testing.assert_allclose(res.d, [-1.0])
    assert res.pivots <= 3
    ctrl = ControlParams()
    r_v, r_phi, r_c = res.ratios
    assert r_v >= ctrl.beta_v and r_phi >= ctrl.beta_phi and r_c >= ctrl.beta_v


def steep_instance():
    # a steep objective pulls d away from the root of the equality, so r_v fails at rho = 1
    return make([-100.0], [1.0], [[1.0]], [EQ])


def test_steep_objective_triggers_penalty_reduction():
    ev = steep_instance()
    res = solve_subproblem(ev, 1.0, GAMMA, 1.0)
    assert res.rho_reductions >= 1
    assert res.rho_tilde < 1.0
    g = merit.dual_norm(ev.g)
    ctrl = ControlParams()
    args = (GAMMA, 1.0, ev.n, 1.0, g, ctrl.beta_v, ctrl.beta_phi, ctrl.theta_rho)
    assert res.rho_reductions <= reduction_count_bound(*args)
    assert res.rho_tilde >= rho_lower_bound(*args)


def test_exact_mode_reaches_lp_optimality():
    ev = random_evaluation(np.random.default_rng(5), 3, 3)
    params = SubproblemParams(ControlParams(beta_phi=1 - 1e-8), exact=True)
    res = solve_subproblem(ev, 1.0, GAMMA, 1.0, params)
    assert res.lp_optimal
    best, _ = vertex_min(ev, res.rho_tilde, 1.0)
    assert merit.linear_model(ev, res.d, res.rho_tilde) == pytest.approx(best, abs=1e-9)


def test_pivot_limit_raises_stalled():
    ev = random_evaluation(np.random.default_rng(2), 4, 4)
    params = SubproblemParams(ControlParams(beta_phi=1 - 1e-8), max_pivots=1, exact=True)
    with pytest.raises(SubproblemStalled) as info:
        solve_subproblem(ev, 1.0, GAMMA, 1.0, params)
    assert info.value.result.terminated_by is TerminatedBy.PIVOT_LIMIT


def test_trace_writes_one_record_per_iterate():
    buf = io.StringIO()
    res = solve_subproblem(one_equality(), 1.0, GAMMA, 1.0, trace=buf)
    lines = [json.loads(line) for line in buf.getvalue().splitlines()]
    assert len(lines) == len(res.history)
    assert {"pivots", "rho", "basis", "rhs", "d", "lambda", "nu", "ratios", "action"} <= set(lines[0])


@given(st.integers(0, 2**31), st.integers(1, 4), st.integers(0, 4), st.floats(0.1, 2),
       st.sampled_from([0.01, 1.0, 10.0]), st.booleans())
def test_result_invariants(seed, n, m, delta, rho, warm):
    rng = np.random.default_rng(seed)
    ev = random_evaluation(rng, n, m)
    lam0 = rng.uniform(-1, 1, m) if warm else None
    res = solve_subproblem(ev, rho, GAMMA, delta, lam_init=lam0)
    assert np.max(np.abs(res.d), initial=0.0) <= delta
    merit.check_dual_feasible(ev, res.lam)
    merit.check_dual_feasible(ev, res.nu)
    assert merit.linear_model(ev, res.d, res.rho_tilde) <= merit.violation(ev) + 1e-12
    assert res.rho_tilde <= rho
    p_nu = merit.dual_value(ev, res.nu, 0.0, delta)
    assert p_nu >= merit.dual_value(ev, res.lam, 0.0, delta) - 1e-12
    assert p_nu >= res.history[0].p_lam_init_zero - 1e-12
    last = {}
    for rec in res.history:
        assert rec.l_rho <= rec.l_origin + 1e-12
        assert rec.p_lam_rho <= rec.l_rho + 1e-8
        assert rec.p_nu_zero <= rec.l_zero + 1e-8
        assert rec.p_nu_zero >= rec.p_lam_zero - 1e-12
        if rec.rho in last:
            assert rec.l_rho <= last[rec.rho] + 1e-9
        last = {rec.rho: rec.l_rho}


def test_invalid_inputs():
    with pytest.raises(ValueError):
        solve_subproblem(one_equality(), 0.0, GAMMA, 1.0)
    with pytest.raises(ValueError):
        solve_subproblem(one_equality(), 1.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        build_standard_form(one_equality(), -1.0, 1.0)
