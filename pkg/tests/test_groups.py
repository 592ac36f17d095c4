import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fbvp.errors import (
    DegenerateInterpolationError,
    InvalidLambdaError,
    NoCrossingError,
    NotInClassError,
    ToleranceNotMetError,
)
from fbvp.groups import (
    LITERAL,
    ScalingFreeBvp,
    Term,
    TranslationFreeBvp,
    check_class_membership,
    check_spiral_invariance,
    escalation_factor,
    fd_residuals,
    locate_event,
    scaling_map,
    scaling_residual,
    solve_scaling,
    solve_translation,
    spiral_map,
    translation_residual,
)
from fbvp.problems import (
    colloid_problem,
    linear_exact,
    linear_problem,
    nonautonomous_variant,
    nonlinear_exact,
    nonlinear_problem,
    nonlinear_terms,
    rod_exact,
    rod_problem,
    rod_terms,
)
from fbvp.rk import RK4, RK6, RK8, integrate_fixed, integrate_to, rk_step

# closed form of the tanh auxiliary problem: u* = 10 tanh(10 x)
LAM_100 = 10 * math.tanh(10)


def linear_fbf(eps=1e-6):
    return linear_problem(1.0, eps).fbf


# event locator ---------------------------------------------------------------


def test_locate_event_symmetric_crossing():
    x = locate_event(0.3, [0.1, 1.0], 0.25, [-0.1, 1.0], 0.0, -0.05)
    assert x == pytest.approx(0.275, abs=1e-15)


def test_locate_event_flat_segment():
    with pytest.raises(DegenerateInterpolationError):
        locate_event(0.3, [0.1, 0.0], 0.25, [0.1, 0.0], 0.1, -0.05)


def test_locate_event_state_from_previous_point_and_literal_mode():
    # exact flow through (0, [0.02, 1]) of u'' = -u' is u = 1.02 - exp(-x)
    f = linear_fbf().system
    x_prev, h = 0.0, -0.05
    y_prev = np.array([0.02, 1.0])
    y_k = rk_step(RK6, f, x_prev, y_prev, h)
    x_a, y_a = locate_event(x_prev, y_prev, x_prev + h, y_k, 0.0, h, RK6, f)
    x_b, y_b = locate_event(x_prev, y_prev, x_prev + h, y_k, 0.0, h, RK6, f, mode=LITERAL)
    assert x_a == x_b
    assert x_prev + h < x_a < x_prev
    exact = np.array([1.02 - math.exp(-x_a), math.exp(-x_a)])
    assert np.allclose(y_a, exact, atol=1e-11)
    assert np.allclose(y_b, exact, atol=1e-11)
    # secant error is second order: u(x_a) misses alpha by O(h^2)
    assert 0 < abs(y_a[0]) < h * h
    with pytest.raises(ValueError):
        locate_event(x_prev, y_prev, x_prev + h, y_k, 0.0, h, RK6, f, mode="bogus")


# translation method ----------------------------------------------------------


@pytest.mark.parametrize(
    "tab,fb,res,slope",
    [
        (RK4, 13.8152456, 2.6660e-4, 0.999734403),
        (RK6, 13.8152449, 2.6659e-4, 0.999734408),
        (RK8, 13.8152449, 2.6659e-4, 0.999734408),
    ],
)
def test_translation_table1_rows(tab, fb, res, slope):
    sol = solve_translation(linear_fbf(), 1.0, tab, -0.05)
    assert sol.free_boundary == pytest.approx(fb, abs=5e-8)
    assert sol.residual_at_origin == pytest.approx(res, rel=5e-4)
    assert sol.missing_slope == pytest.approx(slope, abs=5e-9)
    assert sol.group_parameter == pytest.approx(1.0 - sol.free_boundary)


def test_translation_literal_locator_reading_within_acceptance_band():
    sol = solve_translation(linear_fbf(), 1.0, RK6, -0.05, locator_mode=LITERAL)
    assert sol.free_boundary == pytest.approx(13.8152449, abs=5e-4)
    assert sol.residual_at_origin == pytest.approx(2.6659e-4, rel=0.15)
    assert sol.missing_slope == pytest.approx(0.999734408, abs=5e-5)


def test_translation_boundary_conditions_are_imposed():
    eps = 1e-6
    sol = solve_translation(linear_fbf(eps), 1.0, RK6, -0.05)
    traj = sol.trajectory
    assert traj.xs[0] == sol.free_boundary
    assert traj.u[0] == 1.0 and traj.du_dx[0] == eps
    assert traj.xs[-1] == 0.0
    assert abs(traj.u[-1]) == pytest.approx(sol.residual_at_origin, abs=1e-18)
    assert sol.free_boundary > 0


def test_translation_fine_step_table2_last_row():
    sol = solve_translation(linear_fbf(), 1.0, RK6, -0.003125)
    assert sol.residual_at_origin == pytest.approx(1.71e-7, rel=0.25)
    assert sol.missing_slope == pytest.approx(1.000001, abs=1e-6)


def test_translation_table3_first_row_and_closed_form():
    sol = solve_translation(linear_fbf(0.1), 1.0, RK6, -1e-3)
    assert sol.free_boundary == pytest.approx(2.39790, abs=1e-5)
    assert sol.free_boundary == pytest.approx(math.log(11), abs=2e-3)
    assert sol.missing_slope == pytest.approx(1.099999948, abs=5e-9)
    assert sol.missing_slope == pytest.approx(1.1, abs=5e-7)


def test_translation_refine_extension_drives_residual_down():
    sol = solve_translation(linear_fbf(), 1.0, RK6, -0.05, refine=True)
    assert sol.residual_at_origin < 1e-13
    assert sol.free_boundary == pytest.approx(math.log(1e6 + 1), abs=1e-9)


def test_translation_rejects_bad_input():
    with pytest.raises(ValueError):
        solve_translation(linear_fbf(), 1.0, RK6, 0.05)
    zero_start = TranslationFreeBvp(0.0, 1.0, 1.0, 1e-6, linear_fbf().system)
    with pytest.raises(ValueError):
        solve_translation(zero_start, 1.0, RK6, -0.05)


def test_translation_no_crossing():
    # u' = 0 at s*: u* stays at 1 and never reaches alpha = 0
    flat = TranslationFreeBvp(0.0, 0.0, 1.0, 0.0, linear_fbf().system)
    with pytest.raises(NoCrossingError):
        solve_translation(flat, 1.0, RK6, -0.1, max_steps=1000)


def test_translation_ascending_crossing_colloid():
    prob = colloid_problem(1.0, -1e-6)
    sol = solve_translation(prob.fbf, 1.0, RK6, -0.01)
    assert sol.missing_slope == pytest.approx(prob.extra["missing_slope"], rel=1e-5)
    assert np.all(np.diff(sol.trajectory.u) > 0)  # stored from s down to 0


def test_spiral_group_with_nonzero_omega():
    # u'' = u (1 + p^2), p = u exp(-w x); the located solution is re-integrated
    # forward from the origin and must hit the spiral free boundary data
    omega = 0.3
    prob = TranslationFreeBvp.from_omega(lambda p, q: 1 + p * p, omega, 0.0, 1.0, 3.0)
    check_spiral_invariance(prob.system, omega)
    sol = solve_translation(prob, 1.0, RK8, -1e-3, refine=True)
    s = sol.free_boundary
    assert abs(sol.trajectory.u[-1]) < 1e-12
    fwd = integrate_to(RK8, prob.system, 0.0, [0.0, sol.missing_slope], s, 1e-3)
    u_s, du_s = fwd.states[-1]
    g = math.exp(omega * s)
    assert u_s == pytest.approx(1.0 * g, rel=1e-9)
    assert du_s == pytest.approx(3.0 * g, rel=1e-9)
    assert sol.trajectory.u[0] == pytest.approx(g, rel=1e-14)


def test_spiral_class_requires_zero_alpha():
    with pytest.raises(NotInClassError):
        TranslationFreeBvp.from_omega(lambda p, q: 1.0, 0.3, 0.2, 1.0, 3.0)


def test_nonautonomous_equation_is_not_translation_invariant():
    with pytest.raises(NotInClassError):
        check_spiral_invariance(nonautonomous_variant(1.0))
    assert check_spiral_invariance(linear_fbf().system)
    assert check_spiral_invariance(colloid_problem().system)


def test_rk6_rk8_agree_on_table1_grid():
    a = solve_translation(linear_fbf(), 1.0, RK6, -0.05).free_boundary
    b = solve_translation(linear_fbf(), 1.0, RK8, -0.05).free_boundary
    assert abs(a - b) < 1e-6


# scaling method --------------------------------------------------------------


def test_escalation_direction():
    assert escalation_factor(-1.0) == 10.0
    assert escalation_factor(0.2) == 0.1


@pytest.mark.parametrize(
    "tab,term,fb",
    [(RK4, 8.24683e-9, 9.999999539), (RK8, 8.24461e-9, 9.999999959)],
)
def test_scaling_table4_rows(tab, term, fb):
    sol = solve_scaling(nonlinear_problem().fbf, 1.0, 100.0, 1e-6, tab, 0.01)
    assert sol.terminal_slope == pytest.approx(term, rel=1e-3)
    assert sol.free_boundary == pytest.approx(fb, abs=1e-6)
    assert sol.escalations == 0


def test_scaling_rk6_against_analytic_oracle():
    sol = solve_scaling(nonlinear_problem().fbf, 1.0, 100.0, 1e-6, RK6, 0.01)
    assert sol.group_parameter == pytest.approx(LAM_100, abs=1e-6)
    assert sol.free_boundary == pytest.approx(LAM_100, abs=1e-6)
    assert sol.missing_slope == pytest.approx(100 / LAM_100**2, abs=1e-7)
    assert sol.terminal_slope == pytest.approx((100 - LAM_100**2) / LAM_100**2, rel=1e-3)
    # published RK6 row, same tolerances
    assert sol.free_boundary == pytest.approx(10.000000058, abs=1e-6)
    assert sol.missing_slope == pytest.approx(1.0, abs=1e-7)
    assert sol.terminal_slope == pytest.approx(8.24462e-9, rel=1e-3)


def test_scaling_v0_1000():
    sol = solve_scaling(nonlinear_problem().fbf, 1.0, 1000.0, 1e-6, RK6, 0.01)
    lam = math.sqrt(1000) * math.tanh(math.sqrt(1000))
    assert sol.free_boundary == pytest.approx(31.62, abs=0.01)
    assert sol.free_boundary == pytest.approx(lam, abs=1e-4)
    assert sol.missing_slope == pytest.approx(0.999978, abs=1e-4)


def test_scaling_boundary_conditions_exact():
    prob = nonlinear_problem().fbf
    sol = solve_scaling(prob, 1.0, 100.0, 1e-6, RK6, 0.01)
    traj = sol.trajectory
    assert traj.xs[0] == 0.0 and traj.u[0] == 0.0
    assert abs(traj.u[-1] - prob.beta) < 1e-13 * abs(prob.beta)
    assert traj.xs[-1] == pytest.approx(sol.free_boundary, rel=1e-15)


def test_scaling_escalates_from_small_v0():
    sol = solve_scaling(nonlinear_problem().fbf, 1.0, 1.0, 1e-6, RK6, 0.01)
    assert sol.escalations == 2 and sol.v0 == pytest.approx(100.0)


def test_scaling_tolerance_not_met_carries_slope():
    with pytest.raises(ToleranceNotMetError) as info:
        solve_scaling(nonlinear_problem().fbf, 1.0, 100.0, 1e-30, RK6, 0.01, max_escalations=0)
    assert info.value.terminal_slope == pytest.approx(8.24462e-9, rel=1e-3)


def test_scaling_invalid_lambda():
    neg = ScalingFreeBvp(-1.0, -1.0, nonlinear_problem().fbf.system)
    with pytest.raises(InvalidLambdaError):
        solve_scaling(neg, 1.0, 100.0, 1e-6, RK6, 0.01)


def test_scaling_rejects_degenerate_class():
    system = nonlinear_problem().fbf.system
    with pytest.raises(NotInClassError):
        ScalingFreeBvp(0.0, 1.0, system)
    with pytest.raises(ValueError):
        ScalingFreeBvp(-1.0, 0.0, system)
    with pytest.raises(ValueError):
        solve_scaling(nonlinear_problem().fbf, 1.0, -1.0, 1e-6, RK6, 0.01)


def test_scaling_from_phi_matches_catalog_system():
    cat = nonlinear_problem().fbf
    built = ScalingFreeBvp.from_phi(lambda a, b: -2 * b, -1.0, 1.0)
    for x, u, du in [(0.1, 0.3, 2.0), (1.5, 2.0, -0.5), (4.0, 0.01, 7.0)]:
        y = np.array([u, du])
        assert built.system(x, y) == pytest.approx(cat.system(x, y), rel=1e-13)


def test_rod_problem_against_compact_support_closed_form():
    prob = rod_problem(1.0, 1.5)
    sol = solve_scaling(prob.fbf, 1.0, 10.0, 1e-4, RK6, 0.01)
    ex = rod_exact(1.0)
    assert 1 <= sol.escalations <= 12
    assert sol.missing_slope == pytest.approx(ex.missing_slope, rel=1e-5)
    assert sol.free_boundary == pytest.approx(ex.x_eps, rel=1e-3)
    assert abs(sol.terminal_slope) < 1e-4
    assert np.max(np.abs(sol.trajectory.u - ex.u(sol.trajectory.xs))) < 1e-4


# class membership ------------------------------------------------------------


def test_class_membership_deltas():
    assert check_class_membership(nonlinear_terms(1.0)) == (True, -1.0)
    assert check_class_membership(rod_terms(1.0, 2.0))[1] == pytest.approx(1 / 3)
    assert check_class_membership(rod_terms(1.0, 1.5))[1] == pytest.approx(1 / 5)


@settings(max_examples=30, deadline=None)
@given(q=st.floats(0.05, 1.95).filter(lambda q: abs(q - 1) > 1e-3))
def test_rod_delta_formula(q):
    assert check_class_membership(rod_terms(1.0, q))[1] == pytest.approx((q - 1) / (q + 1))


def test_class_membership_rejections():
    # u'' + P u' = 0 balances only at delta = 0
    with pytest.raises(NotInClassError):
        check_class_membership((Term(1.0, d2u_exp=1), Term(1.0, du_exp=1)))
    with pytest.raises(NotInClassError):
        check_class_membership(rod_terms(1.0, 1.0))
    with pytest.raises(NotInClassError):
        rod_problem(1.0, 1.0)


# group closure ---------------------------------------------------------------


@settings(max_examples=40, deadline=None)
@given(x=st.floats(0.01, 5.0), mu=st.floats(-3.0, 3.0))
def test_translation_closure_on_exact_linear_points(x, mu):
    prob = linear_fbf()
    ex = linear_exact(1.0)
    pt = (x, float(ex.u(x)), float(ex.du_dx(x)), float(ex.d2u_dx2(x)))
    assert abs(translation_residual(prob, *pt)) < 1e-10
    assert abs(translation_residual(prob, *spiral_map(*pt, mu, 0.0))) < 1e-10


@settings(max_examples=40, deadline=None)
@given(x=st.floats(0.05, 3.0), mu=st.floats(-2.0, 2.0), omega=st.floats(-0.5, 0.5))
def test_spiral_closure_for_arbitrary_omega(x, mu, omega):
    prob = TranslationFreeBvp.from_omega(lambda p, q: 1 + p * p, omega, 0.0, 1.0, 3.0)
    # any state is a solution point once u'' is taken from the equation
    u, du = 0.7, -0.4
    d2u = prob.system(x, np.array([u, du]))[1]
    mapped = spiral_map(x, u, du, d2u, mu, omega)
    scale = max(1.0, abs(mapped[3]))
    assert abs(translation_residual(prob, *mapped)) < 1e-10 * scale


@settings(max_examples=40, deadline=None)
@given(x=st.floats(0.05, 3.0), lam=st.sampled_from([0.5, 2.0]) | st.floats(0.5, 2.0))
def test_scaling_closure_on_exact_tanh_points(x, lam):
    prob = nonlinear_problem().fbf
    ex = nonlinear_exact(1.0)
    pt = (x, float(ex.u(x)), float(ex.du_dx(x)), float(ex.d2u_dx2(x)))
    assert abs(scaling_residual(prob, *pt)) < 1e-10
    assert abs(scaling_residual(prob, *scaling_map(*pt, lam, prob.delta))) < 1e-10


@pytest.mark.parametrize("mu", [-2.0, 0.5, 3.0])
def test_translation_closure_fd_on_computed_trajectory(mu):
    prob = linear_fbf(1e-3)
    traj = solve_translation(prob, 1.0, RK6, -1e-3).trajectory
    # drop the short locator step: a three-point stencil across it is only
    # first-order accurate and measures the stencil, not the group
    xs, us = traj.xs[-2::-1], traj.u[-2::-1]
    mx, mu_, _, _ = spiral_map(xs, us, 0, 0, mu, 0.0)
    res = fd_residuals(mx, mu_, lambda *p: translation_residual(prob, *p))
    assert np.max(np.abs(res)) < 1e-6


@pytest.mark.parametrize("lam", [0.5, 2.0])
def test_scaling_closure_fd_on_auxiliary_trajectory(lam):
    prob = nonlinear_problem().fbf
    aux = integrate_fixed(RK6, prob.system, 0.0, [0.0, 1.0], 5e-4, 6000)
    sx, su, _, _ = scaling_map(aux.xs, aux.u, 0, 0, lam, prob.delta)
    res = fd_residuals(sx[1:], su[1:], lambda *p: scaling_residual(prob, *p))
    assert np.max(np.abs(res)) < 1e-6


# monotonicity ----------------------------------------------------------------


def test_monotone_translation_and_scaling_benchmarks():
    lin = solve_translation(linear_fbf(), 1.0, RK6, -0.05).trajectory
    assert np.all(np.diff(lin.u[::-1]) > 0) and np.all(lin.du_dx > 0)
    tanh = solve_scaling(nonlinear_problem().fbf, 1.0, 100.0, 1e-6, RK6, 0.01).trajectory
    assert np.all(np.diff(tanh.u) > 0) and np.all(tanh.du_dx > 0)
