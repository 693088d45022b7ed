"""Averaged matrices, jump residuals and convexity of the reduced entropy.

In V-variables the reduced entropy pair is ``e(V) = psi^x(U(V))`` and
``q(V) = psi^y(U(V))``, with ``q_V = e_V f_V``.  Because ``e_V = eta_U``,
the entropy variables ``w = sign * e_V`` can be evaluated directly in
U-space, which is how the Harten-Lax average below is computed.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .errors import ConvexityError, OutOfBallError
from .pencil import fv_matrix, from_v, to_v
from .systems import System

GAUSS_NODES = 16
COND_FLAG = 1e6


@functools.lru_cache(maxsize=8)
def _gauss(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


@dataclass(frozen=True)
class ReducedEntropy:
    """Reduced entropy ``e``, its flux ``q`` and the reduced flux ``f`` in V-variables."""

    system: System
    sign: int

    def _u(self, v):
        return from_v(self.system, v)

    def e(self, v) -> float:
        return float(self.system.eflux_x(self._u(v)))

    def q(self, v) -> float:
        return float(self.system.eflux_y(self._u(v)))

    def f(self, v) -> np.ndarray:
        return self.system.flux_y(self._u(v))

    def e_v(self, v) -> np.ndarray:
        return self.system.entropy_grad(self._u(v))

    def e_vv(self, v, h: float = 1e-4) -> np.ndarray:
        """Finite-difference Hessian of ``e`` in V."""
        v = np.asarray(v, dtype=float)
        m = v.size
        hess = np.empty((m, m))
        e0 = self.e(v)
        eye = np.eye(m) * h
        for i in range(m):
            for j in range(i, m):
                if i == j:
                    val = (self.e(v + eye[i]) - 2 * e0 + self.e(v - eye[i])) / h ** 2
                else:
                    val = (self.e(v + eye[i] + eye[j]) - self.e(v + eye[i] - eye[j])
                           - self.e(v - eye[i] + eye[j]) + self.e(v - eye[i] - eye[j])) / (4 * h ** 2)
                hess[i, j] = hess[j, i] = val
        return hess


@dataclass(frozen=True)
class AveragedMatrix:
    """Averaged matrix ``A_hat(V-, V+)`` with ``A_hat [V] = [f]``."""

    a_hat: np.ndarray
    vl: np.ndarray
    vr: np.ndarray
    method: str
    s1: np.ndarray | None = None
    s2: np.ndarray | None = None

    @functools.cached_property
    def eig(self):
        w, vecs = np.linalg.eig(self.a_hat)
        order = np.argsort(w.real)
        return w[order], vecs[:, order]

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.eig[0]

    @property
    def condition_number(self) -> float:
        return float(np.linalg.cond(self.eig[1]))

    @property
    def ill_conditioned(self) -> bool:
        return self.condition_number > COND_FLAG

    def symmetry_residual(self) -> float:
        """``|| M - M^T ||`` for ``M = S2^{-1/2} S1 S2^{-1/2}`` (Harten-Lax only)."""
        if self.s1 is None:
            raise ValueError("symmetrizer data only available for the Harten-Lax average")
        w, q = np.linalg.eigh(0.5 * (self.s2 + self.s2.T))
        root_inv = q @ np.diag(w ** -0.5) @ q.T
        mat = root_inv @ self.s1 @ root_inv
        return float(np.linalg.norm(mat - mat.T) / max(1.0, np.linalg.norm(mat)))


def _u_pair(system, vl, vr, states):
    if states is not None:
        return np.asarray(states[0], dtype=float), np.asarray(states[1], dtype=float)
    ul = from_v(system, vl)
    return ul, from_v(system, vr, seed=ul)


def naive_average(system: System, vl, vr, nodes: int = GAUSS_NODES, states=None) -> AveragedMatrix:
    """Path average of ``f_V`` along the straight segment from ``vl`` to ``vr``."""
    vl = np.asarray(vl, dtype=float)
    vr = np.asarray(vr, dtype=float)
    ul, _ = _u_pair(system, vl, vr, states)
    x, w = _gauss(nodes)
    acc = np.zeros((vl.size, vl.size))
    u = ul
    for xk, wk in zip(x, w):
        u = from_v(system, vl + xk * (vr - vl), seed=u)
        acc += wk * fv_matrix(system, u)
    return AveragedMatrix(a_hat=acc, vl=vl, vr=vr, method="naive")


def _entropy_point(system, sign, target, seed, maxiter=50):
    # solve sign * eta_U(U) = target
    u = np.array(seed, dtype=float)
    for _ in range(maxiter):
        r = sign * system.entropy_grad(u) - target
        step = np.linalg.solve(sign * system.entropy_hess(u), r)
        u = u - step
        if np.max(np.abs(step)) <= 1e-15 * max(1.0, float(np.max(np.abs(u)))):
            return u
    if np.max(np.abs(sign * system.entropy_grad(u) - target)) < 1e-11 * max(1.0, np.max(np.abs(target))):
        return u
    raise OutOfBallError("entropy-variable inversion did not converge")


def harten_lax_average(system: System, vl, vr, nodes: int = GAUSS_NODES, states=None) -> AveragedMatrix:
    """Entropy-symmetrized average ``A_hat = S1 S2^{-1}``.

    The path is straight in the entropy variables ``w = sign * e_V``;
    ``S1 = int f_V V_w`` and ``S2 = int V_w`` are evaluated by Gauss-Legendre
    quadrature.  ``S2`` is symmetric positive definite and ``S1``
    symmetric, so ``A_hat`` has real spectrum and a full eigenbasis.

    Parameters
    ----------
    system : System
    vl, vr : array_like
        States in V-variables.
    nodes : int
        Number of quadrature nodes.
    states : tuple, optional
        The corresponding U-states, to skip the inversion of ``f^x``.

    Raises
    ------
    OutOfBallError
        If the entropy-variable inversion fails.
    ConvexityError
        If ``S2`` is not positive definite.
    """
    vl = np.asarray(vl, dtype=float)
    vr = np.asarray(vr, dtype=float)
    ul, ur = _u_pair(system, vl, vr, states)
    sign = e_convexity(system)
    wl = sign * system.entropy_grad(ul)
    wr = sign * system.entropy_grad(ur)
    x, wts = _gauss(nodes)
    m = vl.size
    s1 = np.zeros((m, m))
    s2 = np.zeros((m, m))
    for xk, wk in zip(x, wts):
        seed = ul + xk * (ur - ul)
        u = _entropy_point(system, sign, wl + xk * (wr - wl), seed)
        ax, ay = system.jacobians(u)
        hinv = np.linalg.inv(sign * system.entropy_hess(u))
        s1 += wk * (ay @ hinv)
        s2 += wk * (ax @ hinv)
    s2sym = 0.5 * (s2 + s2.T)
    if np.linalg.eigvalsh(s2sym).min() <= 0.0:
        raise ConvexityError("entropy symmetrizer is not positive definite on the path")
    a_hat = np.linalg.solve(s2.T, s1.T).T
    return AveragedMatrix(a_hat=a_hat, vl=vl, vr=vr, method="harten_lax", s1=s1, s2=s2)


def harten_lax_average_u(system: System, ul, ur, nodes: int = GAUSS_NODES) -> AveragedMatrix:
    """``harten_lax_average`` from U-states."""
    return harten_lax_average(system, to_v(system, ul), to_v(system, ur), nodes, states=(ul, ur))


def rh_residual(system: System, ul, ur, xi: float) -> np.ndarray:
    """``[f^y] - xi [f^x]`` across a jump from ``ul`` to ``ur``."""
    return (system.flux_y(ur) - system.flux_y(ul)) - xi * (system.flux_x(ur) - system.flux_x(ul))


def entropy_jump(system: System, ul, ur, xi: float) -> float:
    """``[psi^y] - xi [psi^x]``; admissible when ``<= 0`` for ``x > 0`` and ``>= 0`` for ``x < 0``."""
    _, pxl, pyl = system.entropy_triple(ul)
    _, pxr, pyr = system.entropy_triple(ur)
    return float((pyr - pyl) - xi * (pxr - pxl))


@functools.lru_cache(maxsize=64)
def e_convexity(system: System) -> int:
    """Convexity sign of the reduced entropy ``e``.

    +1 if all eigenvalues of ``f_U^x(Ubar)`` are positive (forward sectors
    in ``x > 0``), -1 if all are negative.  Definiteness of ``sign * e_VV``
    is confirmed at ten sample states.

    Raises
    ------
    ConvexityError
        Mixed signs, or ``sign * e_VV`` not positive definite.
    """
    lam = np.linalg.eigvals(system.jac_x(system.background)).real
    if np.all(lam > 0):
        sign = 1
    elif np.all(lam < 0):
        sign = -1
    else:
        raise ConvexityError(f"f_U^x(Ubar) has eigenvalues of both signs: {np.sort(lam)}")
    red = ReducedEntropy(system, sign)
    rng = np.random.default_rng(2024)
    for u in [system.background] + list(system.random_states(9, rng)):
        hess = sign * red.e_vv(to_v(system, u))
        if np.linalg.eigvalsh(0.5 * (hess + hess.T)).min() <= 0.0:
            raise ConvexityError("sign * e_VV is not positive definite on the ball")
    return sign


def reduced_entropy(system: System) -> ReducedEntropy:
    return ReducedEntropy(system, e_convexity(system))


def forward_half_plane(system: System) -> int:
    """Half-plane index (+1 for ``x > 0``) holding the forward sectors."""
    return e_convexity(system)
