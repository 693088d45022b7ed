import math

import numpy as np
import pytest

from selfsim.averaging import (e_convexity, entropy_jump, harten_lax_average,
                               harten_lax_average_u, naive_average, reduced_entropy, rh_residual)
from selfsim.pencil import fv_matrix, to_v
from selfsim.systems import EulerSystem
from selfsim.waves import hugoniot_point

ROOT3 = math.sqrt(3) / 3


def pair(system, rng):
    ul, ur = system.random_states(2, rng)
    return ul, ur, to_v(system, ul), to_v(system, ur)


def test_naive_average_identity(euler, rng):
    ul, ur, vl, vr = pair(euler, rng)
    a = naive_average(euler, vl, vr).a_hat
    df = euler.flux_y(ur) - euler.flux_y(ul)
    assert np.linalg.norm(a @ (vr - vl) - df) < 1e-9 * np.linalg.norm(df)
    np.testing.assert_allclose(naive_average(euler, vl, vl).a_hat, fv_matrix(euler, ul), atol=1e-12)


def test_linear_averages_are_constant(linear, rng):
    vl, vr = rng.uniform(-0.5, 0.5, (2, 4))
    np.testing.assert_allclose(naive_average(linear, vl, vr).a_hat, linear.matrix, atol=1e-14)
    np.testing.assert_allclose(harten_lax_average(linear, vl, vr).a_hat, linear.matrix, atol=1e-12)


def test_harten_lax_rh_identity_and_symmetry(euler, rng):
    for _ in range(10):
        ul, ur, vl, vr = pair(euler, rng)
        am = harten_lax_average(euler, vl, vr)
        df = euler.flux_y(ur) - euler.flux_y(ul)
        assert np.linalg.norm(am.a_hat @ (vr - vl) - df) < 1e-9 * np.linalg.norm(df)
        assert am.symmetry_residual() < 1e-9
        assert not am.ill_conditioned


def test_harten_lax_coincidence(euler):
    u = euler.background + np.array([2e-4, 0.0, -1e-4, 3e-4])
    v = to_v(euler, u)
    am = harten_lax_average(euler, v, v)
    np.testing.assert_allclose(am.a_hat, fv_matrix(euler, u), atol=1e-10)


def test_harten_lax_spectrum(euler, rng):
    ul, ur, vl, vr = pair(euler, rng)
    w = harten_lax_average_u(euler, ul, ur).eigenvalues
    assert np.max(np.abs(w.imag)) < 1e-12
    np.testing.assert_allclose(np.sort(w.real), [-ROOT3, 0, 0, ROOT3], atol=1e-3)


def test_symmetry_needs_harten_lax(euler, rng):
    _, _, vl, vr = pair(euler, rng)
    with pytest.raises(ValueError):
        naive_average(euler, vl, vr).symmetry_residual()


def test_rh_residual_contact_example(euler):
    ul = euler.background
    ur = np.array([1.0, 2.001, 0.0, 0.5 * 2.001 ** 2 + 1.7857142857142858])
    assert np.max(np.abs(rh_residual(euler, ul, ul, 0.37))) == 0.0
    assert np.max(np.abs(rh_residual(euler, ul, ur, 0.0))) < 1e-12
    bumped = ur.copy()
    bumped[3] += 1e-4 / 0.4  # pressure up by 1e-4
    res = rh_residual(euler, ul, bumped, 0.0)
    assert res[2] == pytest.approx(1e-4, rel=1e-9)
    assert np.max(np.abs(res[[0, 1, 3]])) < 1e-12


def test_entropy_jump_signs(euler):
    ub = euler.background
    assert entropy_jump(euler, ub, ub, 0.2) == 0.0
    strengths = [1e-3, 5e-4]
    dissipation = []
    for s in strengths:
        ur, xi = hugoniot_point(euler, ub, 2, -s)
        dissipation.append(entropy_jump(euler, ub, ur, xi))
    assert all(d < 0 for d in dissipation)
    assert math.log2(dissipation[0] / dissipation[1]) == pytest.approx(3.0, abs=0.1)


def test_convexity_sign(euler, linear):
    assert e_convexity(euler) == 1
    assert e_convexity(EulerSystem(mach=-2.0)) == -1
    assert e_convexity(linear) == 1


def test_reduced_entropy_consistency(euler):
    red = reduced_entropy(euler)
    u = euler.background + 1e-4
    v = to_v(euler, u)
    assert red.e(v) == pytest.approx(euler.eflux_x(u), rel=1e-12)
    assert red.q(v) == pytest.approx(euler.eflux_y(u), rel=1e-12)
    assert np.all(np.linalg.eigvalsh(red.e_vv(v)) > 0)
