"""Profiles with one injected structural violation each."""

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import brentq

from selfsim import structure as S
from selfsim.pencil import background, eigenvalues, fv_matrix, from_v
from selfsim.profile import Profile
from selfsim.riemann import BACKWARD, FORWARD, fan_from_waves, fan_profile, solve_forward
from selfsim.systems import euler_system
from selfsim.waves import hugoniot_wave

LD_FAMILY = 1
PLUS = 2


def _grid(system, per_sector=4096):
    sec = S.sector_map(system)
    return sec, S.build_grid(sec, per_sector)


def non_rh_contact(per_sector=4096, bump=1e-4):
    """Contact whose right states get their energy density raised."""
    system = euler_system()
    ub = system.background
    from selfsim.riemann import forward_endpoint
    ur = forward_endpoint(system, ub, np.array([0.0, 2e-4, -1e-4, 0.0]))
    fan = solve_forward(system, ub, ur)
    sec, grid = _grid(system, per_sector)
    prof = fan_profile(fan, grid)
    k = int(prof.jump_rows[0])
    states = prof.states.copy()
    states[k + 1:, 3] += bump
    return system, sec, Profile(prof.xi, states)


def expansion_shock(per_sector=4096, sigma=1e-3):
    """RH-exact jump of the fast family with the wrong entropy sign."""
    system = euler_system()
    w = hugoniot_wave(system, system.background, PLUS, sigma)
    fan = fan_from_waves(system, [w], FORWARD)
    sec, grid = _grid(system, per_sector)
    return system, sec, fan_profile(fan, grid)


def _entropy_data(system, u):
    # e_V and q_V = e_V f_V at u, in V-variables
    ev = system.entropy_grad(u)
    return ev, ev @ fv_matrix(system, u)


def out_of_sector_bump(per_sector=4096, amplitude=1e-8):
    """Smooth bump between the slow and the contact sector.

    The direction lies in the kernel of ``e_V`` and ``q_V`` so the bump is
    invisible to the entropy lines at first order.
    """
    system = euler_system()
    ub = system.background
    sec, grid = _grid(system, per_sector)
    ev, qv = _entropy_data(system, ub)
    d = null_space(np.vstack([ev, qv]))[:, 0]
    du = np.linalg.solve(system.jac_x(ub), d)
    du /= np.max(np.abs(du))
    lo, hi = sec.intervals[0][1], sec.intervals[1][0]
    mid, half = 0.5 * (lo + hi), 0.2 * (hi - lo)
    x = (grid - mid) / half
    phi = np.where(np.abs(x) < 1, np.cos(0.5 * np.pi * x) ** 2, 0.0)
    vbar = system.flux_x(ub)
    states = np.array([ub if p == 0.0 else from_v(system, vbar + amplitude * p * d, seed=ub)
                       for p in phi])
    return system, sec, Profile(grid, states)


def interval_fan_set(per_sector=4096, epsilon=5e-6, cells=10):
    """Continuous ramp with ``lambda^0(U(xi)) = xi`` over ``cells`` grid steps.

    The ramp follows the least-norm direction raising ``lambda^0`` at unit
    rate.  Its entropy-line density ``q_V . V'`` is positive, so the profile
    dissipates on the backward half-plane and is verified there; the LD
    rules apply on both sides.  The small ``epsilon`` keeps the integrated
    weak-form defect (about ``3.4`` times the ramp width) below tolerance.
    """
    system = euler_system(epsilon=epsilon)
    ub = system.background
    sec = S.sector_map(system, side=BACKWARD)
    grid = S.build_grid(sec, per_sector)
    bg = background(system)
    vbar = system.flux_x(ub)
    h = 1e-7
    grad = np.array([(eigenvalues(system, from_v(system, vbar + h * e))[LD_FAMILY]
                      - eigenvalues(system, from_v(system, vbar - h * e))[LD_FAMILY]) / (2 * h)
                     for e in np.eye(4)])
    direction = grad / (grad @ grad)
    step = np.diff(grid[sec.sector_of(grid) == LD_FAMILY]).min()
    start = float(bg.lambdas[LD_FAMILY])
    end = start + cells * step

    def state(x):
        t = brentq(lambda t: eigenvalues(system, from_v(system, vbar + t * direction, seed=ub))
                   [LD_FAMILY] - x, 0.0, 2 * (x - start), xtol=1e-22, rtol=1e-15)
        return from_v(system, vbar + t * direction, seed=ub)

    last = state(end)
    states = np.array([ub if x <= start else last if x >= end else state(x) for x in grid])
    return system, sec, Profile(grid, states)
