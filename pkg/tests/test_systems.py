import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from selfsim.errors import ConfigurationError, DomainError
from selfsim.kernels import compiled_backend, python_backend
from selfsim.systems import EulerSystem, RotatedSystem, euler_flux, euler_system, make_system

UBAR = np.array([1.0, 2.0, 0.0, 3.7857142857142865])


def central_jacobian(fn, u, h=1e-6):
    cols = []
    for k in range(u.size):
        e = np.zeros_like(u)
        e[k] = h
        cols.append((fn(u + e) - fn(u - e)) / (2 * h))
    return np.stack(cols, axis=1)


def test_background_state(euler):
    np.testing.assert_allclose(euler.background, UBAR, rtol=0, atol=1e-12)
    assert euler.pressure(UBAR) == pytest.approx(1 / 1.4)
    assert euler.sound_speed(UBAR) == pytest.approx(1.0)


def test_flux_examples():
    np.testing.assert_allclose(euler_flux(UBAR, 0), [2, 4.7142857, 0, 9.0], atol=1e-7)
    np.testing.assert_allclose(euler_flux(UBAR, 1), [0, 0, 0.7142857, 0], atol=1e-7)
    e = 2.5
    p = 0.4 * e
    np.testing.assert_allclose(euler_flux(np.array([1.0, 0.0, 0.0, e]), 0), [0, p, 0, 0],
                               atol=1e-15)


@pytest.mark.parametrize("bad", [[0.0, 2.0, 0.0, 3.0], [-1.0, 2.0, 0.0, 3.0], [1.0, 2.0, 0.0, 1.0]])
def test_flux_domain_errors(bad):
    with pytest.raises(DomainError):
        euler_flux(np.array(bad), 0)


def test_jac_x_spectrum(euler):
    w = np.sort(np.linalg.eigvals(euler.jac_x(UBAR)).real)
    np.testing.assert_allclose(w, [1, 2, 2, 3], atol=1e-12)
    assert np.linalg.det(euler.jac_x(UBAR)) == pytest.approx(12.0)


def test_jacobians_match_differences(euler, rng):
    for u in euler.random_states(10, rng):
        ax, ay = euler.jacobians(u)
        np.testing.assert_allclose(ax, central_jacobian(euler.flux_x, u), atol=1e-8)
        np.testing.assert_allclose(ay, central_jacobian(euler.flux_y, u), atol=1e-8)


def test_entropy_value(euler):
    s = math.log(1 / 1.4) / 0.4
    assert euler.entropy(UBAR) == pytest.approx(-s, abs=1e-12)
    assert euler.entropy(UBAR) == pytest.approx(0.8412, abs=1e-4)
    assert euler.eflux_y(UBAR) == 0.0


def test_entropy_compatibility(euler, rng):
    for u in euler.random_states(100, rng):
        dpsi = central_jacobian(lambda w: np.array([euler.eflux_x(w), euler.eflux_y(w)]), u, 1e-5)
        ax, ay = euler.jacobians(u)
        grad = euler.entropy_grad(u)
        assert np.max(np.abs(dpsi[0] - grad @ ax)) < 1e-6
        assert np.max(np.abs(dpsi[1] - grad @ ay)) < 1e-6


def test_entropy_hessian_positive_definite(euler, rng):
    for u in euler.random_states(10, rng):
        hess = euler.entropy_hess(u)
        np.testing.assert_allclose(hess, central_jacobian(euler.entropy_grad, u), atol=1e-7)
        assert np.all(np.linalg.eigvalsh(0.5 * (hess + hess.T)) > 0)


def test_batches_match_pointwise(euler, rng):
    us = euler.random_states(7, rng)
    np.testing.assert_allclose(euler.flux_batch(us, 1), [euler.flux_y(u) for u in us], rtol=1e-14)
    ax, ay = euler.jacobians_batch(us)
    np.testing.assert_allclose(ay[3], euler.jac_y(us[3]), rtol=1e-14)
    np.testing.assert_allclose(euler.entropy_batch(us)[2], euler.entropy_triple(us[2]), rtol=1e-14)


def test_invalid_parameters():
    with pytest.raises(ConfigurationError, match="not supersonic"):
        EulerSystem(mach=0.5)
    with pytest.raises(ConfigurationError):
        EulerSystem(gamma=1.0)
    with pytest.raises(ConfigurationError):
        make_system("burgers")


def test_linear_system(linear):
    np.testing.assert_allclose(np.sort(np.linalg.eigvals(linear.matrix)), [-1, 0.3, 0.3, 1])
    u = np.array([0.1, -0.2, 0.3, 0.4])
    np.testing.assert_array_equal(linear.flux_x(u), u)
    assert make_system("linear").dim == 4


def test_rotated_system_fluxes(euler):
    rot = RotatedSystem(euler, 0.3)
    u = UBAR + 1e-4
    c, s = math.cos(0.3), math.sin(0.3)
    np.testing.assert_allclose(rot.flux_x(u), c * euler.flux_x(u) + s * euler.flux_y(u))
    ax, _ = rot.jacobians(u)
    np.testing.assert_allclose(ax, central_jacobian(rot.flux_x, u), atol=1e-8)


def test_system_kernel_override():
    pure = EulerSystem(kernels=python_backend)
    np.testing.assert_allclose(pure.flux_x(UBAR), euler_system().flux_x(UBAR), rtol=1e-15)


states = st.tuples(*[st.floats(-1e-3, 1e-3) for _ in range(4)]).map(lambda d: UBAR + np.array(d))


@pytest.mark.skipif(compiled_backend is None, reason="compiled extension not built")
@settings(max_examples=60, deadline=None)
@given(states)
def test_backend_parity(u):
    for name in ("lambdas", "entropy_grad", "entropy_hess"):
        np.testing.assert_allclose(getattr(compiled_backend, name)(u, 1.4),
                                   getattr(python_backend, name)(u, 1.4), rtol=1e-12, atol=1e-14)
    for axis in (0, 1):
        np.testing.assert_allclose(compiled_backend.flux(u, 1.4, axis),
                                   python_backend.flux(u, 1.4, axis), rtol=1e-14, atol=1e-15)
    for a, b in zip(compiled_backend.jacobians(u, 1.4), python_backend.jacobians(u, 1.4)):
        np.testing.assert_allclose(a, b, rtol=1e-13, atol=1e-14)
    np.testing.assert_allclose(compiled_backend.entropy(u, 1.4), python_backend.entropy(u, 1.4),
                               rtol=1e-13)
