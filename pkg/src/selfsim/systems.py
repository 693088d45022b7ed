"""Physical systems: fluxes, Jacobians, entropy pair and the phase-space ball.

A system is a set of conservation laws ``U_t + f^x(U)_x + f^y(U)_y = 0``
with an entropy pair ``(eta, psi^x, psi^y)`` and a background state
``Ubar`` around which solutions live in the ball ``|U - Ubar| <= radius``.

Two concrete systems are provided: the full (non-isentropic) Euler
equations for a polytropic gas, and a linear constant-coefficient test
system with a double eigenvalue.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ConfigurationError
from .kernels import euler as _euler_kernels


class System:
    """Base class for a physical system.

    Subclasses provide the fluxes, their Jacobians and the entropy pair.
    ``multiplicities`` lists the expected multiplicities of the distinct
    generalized eigenvalues, in ascending order of eigenvalue at the
    background state.
    """

    name = "system"
    dim: int
    background: np.ndarray
    radius: float
    multiplicities: tuple[int, ...]

    # -- fluxes ----------------------------------------------------------
    def flux_x(self, u):
        raise NotImplementedError

    def flux_y(self, u):
        raise NotImplementedError

    def jacobians(self, u):
        """Return ``(f_U^x, f_U^y)`` at ``u``."""
        raise NotImplementedError

    def jac_x(self, u):
        return self.jacobians(u)[0]

    def jac_y(self, u):
        return self.jacobians(u)[1]

    # -- entropy pair ----------------------------------------------------
    def entropy_triple(self, u):
        """Return ``(eta, psi^x, psi^y)`` at ``u``."""
        raise NotImplementedError

    def entropy(self, u):
        return self.entropy_triple(u)[0]

    def eflux_x(self, u):
        return self.entropy_triple(u)[1]

    def eflux_y(self, u):
        return self.entropy_triple(u)[2]

    def entropy_grad(self, u):
        raise NotImplementedError

    def entropy_hess(self, u):
        raise NotImplementedError

    # -- batched evaluation (row-wise fallbacks) -------------------------
    def flux_batch(self, us, axis):
        f = self.flux_x if axis == 0 else self.flux_y
        return np.array([f(u) for u in us])

    def jacobians_batch(self, us):
        pairs = [self.jacobians(u) for u in us]
        return np.array([a for a, _ in pairs]), np.array([b for _, b in pairs])

    def entropy_batch(self, us):
        return np.array([self.entropy_triple(u) for u in us])

    # -- phase space -----------------------------------------------------
    def in_ball(self, u, radius=None, slack=1e-12):
        r = self.radius if radius is None else radius
        return float(np.linalg.norm(np.asarray(u) - self.background)) <= r * (1 + slack)

    def random_states(self, count, rng, radius=None, surface=False):
        """Sample ``count`` states uniformly in (or on) the ball."""
        r = self.radius if radius is None else radius
        d = rng.standard_normal((count, self.dim))
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        if not surface:
            d *= rng.random((count, 1)) ** (1.0 / self.dim)
        return self.background + r * d

    def describe(self) -> dict:
        return {"name": self.name, "dim": self.dim, "radius": self.radius,
                "background": [float(x) for x in self.background]}

    def __repr__(self):
        return f"{type(self).__name__}({self.describe()})"


class EulerSystem(System):
    """Full 2-D Euler equations for a polytropic gas.

    Units are scaled so the background density and sound speed are one,
    so the background state is ``(1, M0, 0, M0**2/2 + 1/(gamma (gamma-1)))``
    and the background pressure is ``1/gamma``.

    Parameters
    ----------
    gamma : float
        Adiabatic exponent, ``> 1``.
    mach : float
        Background Mach number ``M0``; must satisfy ``|M0| > 1``.
    radius : float
        Phase-space ball radius epsilon.
    kernels : module, optional
        Kernel backend (``selfsim.kernels.compiled_backend`` or
        ``python_backend``); defaults to the one selected at import.
    """

    name = "euler"
    dim = 4
    multiplicities = (1, 2, 1)

    def __init__(self, gamma: float = 1.4, mach: float = 2.0, radius: float = 1e-3,
                 kernels=None):
        if not gamma > 1.0:
            raise ConfigurationError(f"gamma must exceed 1, got {gamma}")
        if not abs(mach) > 1.0:
            raise ConfigurationError(f"background is not supersonic: |M0| = {abs(mach)} <= 1")
        if not radius > 0.0:
            raise ConfigurationError(f"epsilon must be positive, got {radius}")
        self.gamma = float(gamma)
        self.mach = float(mach)
        self.radius = float(radius)
        self.background = np.array(
            [1.0, self.mach, 0.0, 0.5 * self.mach ** 2 + 1.0 / (self.gamma * (self.gamma - 1.0))]
        )
        self._k = _euler_kernels if kernels is None else kernels

    def flux_x(self, u):
        return self._k.flux(u, self.gamma, 0)

    def flux_y(self, u):
        return self._k.flux(u, self.gamma, 1)

    def jacobians(self, u):
        return self._k.jacobians(u, self.gamma)

    def entropy_triple(self, u):
        return self._k.entropy(u, self.gamma)

    def entropy_grad(self, u):
        return self._k.entropy_grad(u, self.gamma)

    def entropy_hess(self, u):
        return self._k.entropy_hess(u, self.gamma)

    def flux_batch(self, us, axis):
        return self._k.flux_batch(us, self.gamma, axis)

    def jacobians_batch(self, us):
        return self._k.jacobians_batch(us, self.gamma)

    def entropy_batch(self, us):
        return self._k.entropy_batch(us, self.gamma)

    # -- thermodynamic helpers ------------------------------------------
    def pressure(self, u):
        u = np.asarray(u, dtype=float)
        return (self.gamma - 1.0) * (u[..., 3] - 0.5 * (u[..., 1] ** 2 + u[..., 2] ** 2) / u[..., 0])

    def sound_speed(self, u):
        u = np.asarray(u, dtype=float)
        return np.sqrt(self.gamma * self.pressure(u) / u[..., 0])

    def specific_entropy(self, u):
        u = np.asarray(u, dtype=float)
        return np.log(self.pressure(u) / u[..., 0] ** self.gamma) / (self.gamma - 1.0)

    def state(self, rho, vx, vy, p):
        """Conserved state from density, velocity and pressure."""
        return np.array([rho, rho * vx, rho * vy,
                         p / (self.gamma - 1.0) + 0.5 * rho * (vx * vx + vy * vy)])

    def closed_form_lambdas(self, u):
        """Pencil eigenvalues ``(lambda^-, lambda^0, lambda^+)`` in closed form."""
        return self._k.lambdas(u, self.gamma)

    def group_eigenvalues(self, u):
        return self.closed_form_lambdas(u)

    def gnl_field(self, u, alpha, ref, lbar):
        """Compiled simple-wave field, see ``selfsim.waves``."""
        return self._k.gnl_field(u, self.gamma, alpha, ref, lbar)

    def leaf_field(self, u, alpha, ref, rows, leg, max_inv_norm):
        """Compiled contact-leaf chart field, see ``selfsim.waves``."""
        return self._k.leaf_field(u, self.gamma, alpha, ref, rows, leg, max_inv_norm)

    def group_eigenvalues_batch(self, us):
        """Closed-form ``(lambda^-, lambda^0, lambda^+)`` for each row of ``us``."""
        us = np.asarray(us, dtype=float)
        rho, m, n = us[:, 0], us[:, 1], us[:, 2]
        rc = np.sqrt(self.gamma * self.pressure(us) * rho)
        root = np.sqrt(m * m + n * n - rc * rc)
        den = m * m - rc * rc
        a, b = (m * n - rc * root) / den, (m * n + rc * root) / den
        return np.stack([np.minimum(a, b), n / m, np.maximum(a, b)], axis=1)

    def describe(self):
        d = super().describe()
        d.update(gamma=self.gamma, mach=self.mach)
        return d


class LinearSystem(System):
    """Constant-coefficient test system ``f^x = U``, ``f^y = A U``.

    ``A = [[0, 1], [1, 0]] (+) 0.3 I_2`` has eigenvalues ``-1``, ``0.3``
    (double) and ``1``; every field is linearly degenerate.
    """

    name = "linear"
    dim = 4
    multiplicities = (1, 2, 1)

    def __init__(self, radius: float = 1.0):
        self.radius = float(radius)
        self.background = np.zeros(4)
        self.matrix = np.array([
            [0.0, 1.0, 0.0, 0.0],
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.3, 0.0],
            [0.0, 0.0, 0.0, 0.3],
        ])

    def flux_x(self, u):
        return np.array(u, dtype=float)

    def flux_y(self, u):
        return self.matrix @ np.asarray(u, dtype=float)

    def jacobians(self, u):
        return np.eye(4), self.matrix.copy()

    def entropy_triple(self, u):
        u = np.asarray(u, dtype=float)
        half = 0.5 * float(u @ u)
        return half, half, 0.5 * float(u @ self.matrix @ u)

    def entropy_grad(self, u):
        return np.array(u, dtype=float)

    def entropy_hess(self, u):
        return np.eye(4)

    def flux_batch(self, us, axis):
        us = np.asarray(us, dtype=float)
        return us.copy() if axis == 0 else us @ self.matrix.T

    def jacobians_batch(self, us):
        k = len(us)
        return np.tile(np.eye(4), (k, 1, 1)), np.tile(self.matrix, (k, 1, 1))

    def entropy_batch(self, us):
        us = np.asarray(us, dtype=float)
        half = 0.5 * np.einsum("ij,ij->i", us, us)
        return np.stack([half, half, 0.5 * np.einsum("ij,jk,ik->i", us, self.matrix, us)], axis=1)


def euler_system(gamma=1.4, mach=2.0, epsilon=1e-3) -> EulerSystem:
    return EulerSystem(gamma=gamma, mach=mach, radius=epsilon)


def linear_test_system(epsilon=1.0) -> LinearSystem:
    return LinearSystem(radius=epsilon)


def make_system(name: str, **params) -> System:
    """Build a registered system by name (``"euler"`` or ``"linear"``)."""
    if name == "euler":
        return euler_system(gamma=params.get("gamma", 1.4), mach=params.get("mach", 2.0),
                            epsilon=params.get("epsilon", 1e-3))
    if name == "linear":
        return linear_test_system(epsilon=params.get("epsilon", 1.0))
    raise ConfigurationError(f"unknown system {name!r}")


class RotatedSystem(System):
    """System with the flux vector rotated by ``theta``.

    ``f^x' = cos(theta) f^x + sin(theta) f^y`` and
    ``f^y' = -sin(theta) f^x + cos(theta) f^y``; the entropy fluxes rotate
    the same way.  Used to move a root of the characteristic form away
    from ``(0 : 1)``.
    """

    def __init__(self, base: System, theta: float):
        self.base = base
        self.theta = float(theta)
        self.name = f"{base.name}@{self.theta:+.6g}"
        self.dim = base.dim
        self.background = base.background
        self.radius = base.radius
        self.multiplicities = base.multiplicities
        self._c, self._s = math.cos(self.theta), math.sin(self.theta)

    def _rot(self, fx, fy):
        return self._c * fx + self._s * fy, -self._s * fx + self._c * fy

    def flux_x(self, u):
        return self._rot(self.base.flux_x(u), self.base.flux_y(u))[0]

    def flux_y(self, u):
        return self._rot(self.base.flux_x(u), self.base.flux_y(u))[1]

    def jacobians(self, u):
        return self._rot(*self.base.jacobians(u))

    def entropy_triple(self, u):
        eta, px, py = self.base.entropy_triple(u)
        qx, qy = self._rot(px, py)
        return eta, qx, qy

    def entropy_grad(self, u):
        return self.base.entropy_grad(u)

    def entropy_hess(self, u):
        return self.base.entropy_hess(u)


def euler_flux(u, axis=0, gamma=1.4):
    """Euler flux ``f^x`` (``axis=0``) or ``f^y`` (``axis=1``)."""
    return _euler_kernels.flux(u, float(gamma), int(axis))


def euler_jacobians(u, gamma=1.4):
    """Analytic ``(f_U^x, f_U^y)`` for the Euler equations."""
    return _euler_kernels.jacobians(u, float(gamma))


def euler_entropy_triple(u, gamma=1.4):
    """``(eta, psi^x, psi^y) = (-rho S, -m S, -n S)``."""
    return _euler_kernels.entropy(u, float(gamma))
