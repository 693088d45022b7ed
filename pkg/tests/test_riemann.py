import numpy as np
import pytest

from selfsim.errors import CompositionError, OutOfBallError, SolverError, StructureError
from selfsim.pencil import eigenvalues, to_v
from selfsim.riemann import (BACKWARD, FORWARD, compose_fan, constant_fan, fan_profile,
                             forward_endpoint, linearized_jacobian, sample_profile, solve_forward,
                             strength_layout, strength_size)
from selfsim.waves import CONTACT, SHOCK, SIMPLE, contact_leaf_point

SIGMA = np.array([-2e-4, 1e-4, -5e-5, 2e-4])


def test_layout(euler, linear):
    assert strength_size(euler) == 4
    assert [(s.start, s.stop) for s in strength_layout(euler)] == [(0, 1), (1, 3), (3, 4)]
    assert strength_size(linear) == 4


def test_identical_states_give_empty_fan(euler):
    fan = solve_forward(euler, euler.background, euler.background)
    assert fan.waves == ()
    assert fan.iterations == 0
    np.testing.assert_array_equal(fan.state_at(0.3), euler.background)


@pytest.mark.parametrize("jacobian", ["fd", "frozen", "broyden"])
@pytest.mark.parametrize("seed", ["zero", "linear"])
def test_roundtrip_modes(euler, jacobian, seed):
    ub = euler.background
    ur = forward_endpoint(euler, ub, SIGMA)
    fan = solve_forward(euler, ub, ur, jacobian=jacobian, seed=seed)
    np.testing.assert_allclose(fan.strengths, SIGMA, atol=1e-9)
    assert [w.kind for w in fan.waves] == [SHOCK, CONTACT, SIMPLE]
    assert np.max(np.abs(to_v(euler, fan.ur) - to_v(euler, ur))) < 1e-10


def test_bad_modes(euler):
    ub = euler.background
    with pytest.raises(ValueError):
        solve_forward(euler, ub, ub + 1e-5, jacobian="exact")
    with pytest.raises(ValueError):
        solve_forward(euler, ub, ub + 1e-5, seed="random")


def test_solver_failure_is_reported(euler):
    ub = euler.background
    ur = forward_endpoint(euler, ub, SIGMA)
    with pytest.raises(SolverError):
        solve_forward(euler, ub, ur, maxiter=1, jacobian="frozen")


def test_out_of_ball_end_state(euler):
    ub = euler.background
    with pytest.raises(OutOfBallError):
        solve_forward(euler, ub, ub + np.array([0.0, 0.0, 2e-3, 0.0]))


def test_linearized_jacobian(euler):
    ub = euler.background
    h = 1e-7
    fd = np.stack([(to_v(euler, forward_endpoint(euler, ub, h * e)) - to_v(euler, ub)) / h
                   for e in np.eye(4)], axis=1)
    np.testing.assert_allclose(linearized_jacobian(euler, ub), fd, atol=1e-6)


def test_linear_system_exact(linear, rng):
    ul, ur = rng.uniform(-0.5, 0.5, (2, 4))
    fan = solve_forward(linear, ul, ur)
    w, vecs = np.linalg.eig(linear.matrix)
    left = np.linalg.inv(vecs)
    assert [round(x.xi_lo, 12) for x in fan.waves] == [-1.0, 0.3, 1.0]
    for wave in fan.waves:
        cols = np.isclose(w, wave.xi_lo)
        np.testing.assert_allclose(wave.ur - wave.ul, vecs[:, cols] @ left[cols] @ (ur - ul),
                                   atol=1e-12)


def test_contact_only_data(euler):
    ub = euler.background
    s0 = np.array([5e-4, 3e-4])
    ur = contact_leaf_point(euler, ub, 1, s0)
    fan = solve_forward(euler, ub, ur)
    assert [w.kind for w in fan.waves] == [CONTACT]
    assert fan.waves[0].xi_lo == pytest.approx(eigenvalues(euler, ub)[1], abs=1e-14)
    np.testing.assert_allclose(fan.strengths[1:3], s0, atol=1e-8)
    assert np.max(np.abs(fan.strengths[[0, 3]])) < 1e-8


def test_compose_empty(euler):
    fan = compose_fan(euler, euler.background, [])
    assert fan.waves == () and fan.side == BACKWARD


def test_compose_two_backward_shocks(euler):
    ub = euler.background
    fan = compose_fan(euler, ub, [(2, SHOCK, 5e-4), (2, SHOCK, 5e-4)], side=BACKWARD)
    a, b = fan.waves
    assert a.xi_lo < b.xi_lo
    assert fan.half_plane == -1
    # the same pair with compressive strengths violates the ordering
    with pytest.raises(CompositionError):
        compose_fan(euler, ub, [(2, SHOCK, -5e-4), (2, SHOCK, -5e-4)], side=FORWARD)
    with pytest.raises(CompositionError):
        compose_fan(euler, ub, [(2, SHOCK, -5e-4), (2, SHOCK, -5e-4)], side=BACKWARD)


def test_compose_rejects_adjacent_simple_waves(euler):
    with pytest.raises(StructureError):
        compose_fan(euler, euler.background, [(2, SIMPLE, 1e-4), (2, SIMPLE, 1e-4)])


def test_compose_checks_admissibility(euler):
    ub = euler.background
    with pytest.raises(CompositionError):
        compose_fan(euler, ub, [(2, SHOCK, 5e-4)], side=FORWARD)
    fan = compose_fan(euler, ub, [(2, SHOCK, 5e-4)], side=FORWARD, admissibility=False)
    assert fan.waves[0].kind == SHOCK


def test_sample_profile(euler):
    ub = euler.background
    fan = solve_forward(euler, ub, forward_endpoint(euler, ub, SIGMA))
    rows = sample_profile(fan, [-1.0, 1.0])
    np.testing.assert_array_equal(rows[0][1], fan.ul)
    np.testing.assert_array_equal(rows[1][1], fan.ur)
    simple = fan.waves[-1]
    for xi, u in sample_profile(fan, np.linspace(simple.xi_lo, simple.xi_hi, 9)):
        assert eigenvalues(euler, u)[2] == pytest.approx(xi, abs=1e-12)
    for xi, u in sample_profile(constant_fan(euler, ub), [-0.5, 0.0, 0.5]):
        np.testing.assert_array_equal(u, ub)


def test_fan_profile_duplicates_jump_rows(euler):
    ub = euler.background
    fan = solve_forward(euler, ub, forward_endpoint(euler, ub, SIGMA))
    prof = fan_profile(fan, np.linspace(-1, 1, 201))
    jumps = [w for w in fan.waves if w.is_jump]
    assert len(prof.jump_rows) == len(jumps)
    for k, w in zip(prof.jump_rows, jumps):
        np.testing.assert_array_equal(prof.states[k], w.ul)
        np.testing.assert_array_equal(prof.states[k + 1], w.ur)


def test_fan_serialization(euler):
    ub = euler.background
    fan = solve_forward(euler, ub, forward_endpoint(euler, ub, SIGMA))
    d = fan.to_dict()
    assert d["side"] == FORWARD
    assert [w["kind"] for w in d["waves"]] == [SHOCK, CONTACT, SIMPLE]
