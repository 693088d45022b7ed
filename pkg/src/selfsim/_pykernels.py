"""Pure-Python Euler kernels (fallback when the compiled core is absent).

Conserved variables are ``U = (rho, m, n, rhoE)``.  The equation of state is
a polytropic gas, ``p = (gamma - 1) rho e`` with specific entropy
``S = ln(p / rho**gamma) / (gamma - 1)``, temperature ``T = e_S = p / rho``
and ``p_S = (gamma - 1) p``.
"""

import math

import numpy as np

from .errors import DomainError

BACKEND = "python"


def _thermo(u, gamma):
    rho, m, n, en = float(u[0]), float(u[1]), float(u[2]), float(u[3])
    if not rho > 0.0:
        raise DomainError(f"nonpositive density {rho!r}")
    kin = 0.5 * (m * m + n * n) / rho
    e = (en - kin) / rho
    if not e > 0.0:
        raise DomainError(f"nonpositive internal energy {e!r}")
    p = (gamma - 1.0) * rho * e
    return rho, m, n, en, kin, e, p


def flux(u, gamma, axis):
    rho, m, n, en, kin, e, p = _thermo(u, gamma)
    if axis == 0:
        return np.array([m, m * m / rho + p, m * n / rho, m * (en + p) / rho])
    return np.array([n, m * n / rho, n * n / rho + p, n * (en + p) / rho])


def jacobians(u, gamma):
    rho, m, n, en, kin, e, p = _thermo(u, gamma)
    c2 = gamma * p / rho
    temp = p / rho
    p_s = (gamma - 1.0) * p
    q2 = m * m + n * n
    r1, r2, r3 = 1.0 / rho, 1.0 / (rho * rho), 1.0 / (rho * rho * rho)
    h = e + p * r1
    fwx = np.array([
        [0.0, 1.0, 0.0, 0.0],
        [-m * m * r2 + c2, 2.0 * m * r1, 0.0, p_s],
        [-m * n * r2, n * r1, m * r1, 0.0],
        [-m * q2 * r3 + m * c2 * r1, 1.5 * m * m * r2 + 0.5 * n * n * r2 + h,
         m * n * r2, m * temp + m * p_s * r1],
    ])
    fwy = np.array([
        [0.0, 0.0, 1.0, 0.0],
        [-m * n * r2, n * r1, m * r1, 0.0],
        [-n * n * r2 + c2, 0.0, 2.0 * n * r1, p_s],
        [-n * q2 * r3 + n * c2 * r1, m * n * r2,
         1.5 * n * n * r2 + 0.5 * m * m * r2 + h, n * temp + n * p_s * r1],
    ])
    # dS/dU with S = ln(p rho^-gamma)/(gamma-1)
    s_u = np.array([
        0.5 * q2 * r2 / p - gamma / ((gamma - 1.0) * rho),
        -m * r1 / p,
        -n * r1 / p,
        1.0 / p,
    ])
    ax = fwx.copy()
    ay = fwy.copy()
    ax[:, :3] += np.outer(fwx[:, 3], s_u[:3])
    ay[:, :3] += np.outer(fwy[:, 3], s_u[:3])
    ax[:, 3] = fwx[:, 3] * s_u[3]
    ay[:, 3] = fwy[:, 3] * s_u[3]
    return ax, ay


def _entropy_s(rho, p, gamma):
    return math.log(p / rho ** gamma) / (gamma - 1.0)


def entropy(u, gamma):
    rho, m, n, en, kin, e, p = _thermo(u, gamma)
    s = _entropy_s(rho, p, gamma)
    return -rho * s, -m * s, -n * s


def entropy_grad(u, gamma):
    rho, m, n, en, kin, e, p = _thermo(u, gamma)
    s = _entropy_s(rho, p, gamma)
    return np.array([gamma / (gamma - 1.0) - s - kin / p, m / p, n / p, -rho / p])


def entropy_hess(u, gamma):
    rho, m, n, en, kin, e, p = _thermo(u, gamma)
    g1 = gamma - 1.0
    p_u = g1 * np.array([kin / rho, -m / rho, -n / rho, 1.0])
    k_u = np.array([-kin / rho, m / rho, n / rho, 0.0])
    s_u = p_u / (g1 * p)
    s_u[0] -= gamma / (g1 * rho)
    hess = np.empty((4, 4))
    hess[0] = -s_u - k_u / p + kin * p_u / (p * p)
    hess[1] = -m * p_u / (p * p)
    hess[1, 1] += 1.0 / p
    hess[2] = -n * p_u / (p * p)
    hess[2, 2] += 1.0 / p
    hess[3] = rho * p_u / (p * p)
    hess[3, 0] -= 1.0 / p
    return hess


def _thermo_batch(us, gamma):
    us = np.asarray(us, dtype=float)
    rho, m, n, en = us[:, 0], us[:, 1], us[:, 2], us[:, 3]
    if np.any(~(rho > 0.0)):
        raise DomainError("nonpositive density in batch")
    kin = 0.5 * (m * m + n * n) / rho
    e = (en - kin) / rho
    if np.any(~(e > 0.0)):
        raise DomainError("nonpositive internal energy in batch")
    p = (gamma - 1.0) * rho * e
    return rho, m, n, en, kin, e, p


def flux_batch(us, gamma, axis):
    rho, m, n, en, kin, e, p = _thermo_batch(us, gamma)
    if axis == 0:
        return np.stack([m, m * m / rho + p, m * n / rho, m * (en + p) / rho], axis=1)
    return np.stack([n, m * n / rho, n * n / rho + p, n * (en + p) / rho], axis=1)


def jacobians_batch(us, gamma):
    us = np.asarray(us, dtype=float)
    ax = np.empty((len(us), 4, 4))
    ay = np.empty((len(us), 4, 4))
    for k, u in enumerate(us):
        ax[k], ay[k] = jacobians(u, gamma)
    return ax, ay


def entropy_batch(us, gamma):
    rho, m, n, en, kin, e, p = _thermo_batch(us, gamma)
    s = np.log(p / rho ** gamma) / (gamma - 1.0)
    return np.stack([-rho * s, -m * s, -n * s], axis=1)


def lambdas(u, gamma):
    """Closed-form pencil eigenvalues ``(lambda^-, lambda^0, lambda^+)``."""
    rho, m, n, en, kin, e, p = _thermo(u, gamma)
    rc = math.sqrt(gamma * p * rho)
    disc = m * m + n * n - rc * rc
    if not disc > 0.0:
        raise DomainError("state is not supersonic")
    root = math.sqrt(disc)
    den = m * m - rc * rc
    a, b = (m * n - rc * root) / den, (m * n + rc * root) / den
    return (min(a, b), n / m, max(a, b))


def _projected(u, gamma, alpha, ref):
    # U-space image of P_V^alpha ref: P_G^alpha (f_U^x)^{-1} ref with G = (f_U^x)^{-1} f_U^y
    ax, ay = jacobians(u, gamma)
    lam = lambdas(u, gamma)
    sol = np.linalg.solve(ax, np.column_stack([ay, ref]))
    g, z = sol[:, :4], sol[:, 4:]
    for beta in range(3):
        if beta != alpha:
            z = (g @ z - lam[beta] * z) / (lam[alpha] - lam[beta])
    return z, ax


def gnl_field(u, gamma, alpha, ref, lbar):
    """``dU/dtau`` of a simple wave: ``(f_U^x)^{-1} r / (lbar . r)``."""
    z, ax = _projected(u, gamma, alpha, np.asarray(ref, dtype=float).reshape(4, 1))
    z = z[:, 0]
    return z / float(np.asarray(lbar) @ (ax @ z))


def leaf_field(u, gamma, alpha, ref, rows, leg, max_inv_norm):
    """``dU/dt`` along leg ``leg`` of the leaf chart frame ``B (L B)^{-1}``."""
    ref = np.asarray(ref, dtype=float)
    z, ax = _projected(u, gamma, alpha, ref)
    inv = np.linalg.inv(np.asarray(rows) @ (ax @ z))
    if np.linalg.norm(inv) > max_inv_norm:
        from .errors import FrameError
        raise FrameError("leaf chart degenerated: eigenspace nearly orthogonal to the base rows")
    return z @ inv[:, leg]
