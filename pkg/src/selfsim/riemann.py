"""Riemann fans: forward-sector solver, backward-sector composition, sampling.

A forward fan has one wave per family, ordered by family.  GNL families
carry a scalar strength ``sigma`` (``> 0`` simple wave, ``< 0`` shock) and
LD families carry leaf coordinates ``s``.  ``solve_forward`` finds the
stacked strength vector by Newton's method on the V-space mismatch of the
composed end state.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .averaging import e_convexity
from .errors import CompositionError, OutOfBallError, SolverError, StructureError
from .pencil import GNL, LD, background, eigenstructure
from .profile import Profile
from .systems import System
from .waves import (CONTACT, SHOCK, SIMPLE, Wave, contact_wave, gnl_wave, hugoniot_wave,
                    lax_admissible, simple_wave)

log = logging.getLogger(__name__)

FORWARD = "forward"
BACKWARD = "backward"
DROP_STRENGTH = 1e-12


@dataclass(frozen=True, eq=False)
class WaveFan:
    """Ordered waves separated by constant states.

    ``states[k]`` is the constant state left of ``waves[k]``; the last entry
    is the far-right state.
    """

    system: System
    waves: tuple[Wave, ...]
    states: tuple[np.ndarray, ...]
    side: str = FORWARD
    strengths: np.ndarray | None = None
    iterations: int = 0
    residual: float = 0.0
    info: dict = field(default_factory=dict)

    @property
    def ul(self) -> np.ndarray:
        return self.states[0]

    @property
    def ur(self) -> np.ndarray:
        return self.states[-1]

    @property
    def half_plane(self) -> int:
        sign = e_convexity(self.system)
        return sign if self.side == FORWARD else -sign

    def state_at(self, xi: float) -> np.ndarray:
        """State at ``xi``; the left state at a jump abscissa."""
        for w in self.waves:
            if xi < w.xi_lo or (w.is_jump and xi == w.xi_lo):
                return w.ul
            if xi < w.xi_hi:
                return w.state_at(xi)
        return self.states[-1]

    def jumps(self):
        return [w for w in self.waves if w.is_jump]

    def to_dict(self) -> dict:
        d = {"side": self.side, "waves": [w.to_dict() for w in self.waves],
             "states": [[float(x) for x in s] for s in self.states],
             "iterations": int(self.iterations), "residual": float(self.residual)}
        if self.strengths is not None:
            d["strengths"] = [float(x) for x in self.strengths]
        return d


# -- strength vectors --------------------------------------------------------

def strength_layout(system: System):
    """Slices of the stacked strength vector, one per family."""
    bg = background(system)
    out, start = [], 0
    for kind, p in zip(bg.kinds, bg.multiplicities):
        width = 1 if kind == GNL else p
        out.append(slice(start, start + width))
        start += width
    return out


def strength_size(system: System) -> int:
    return strength_layout(system)[-1].stop


def _forward_waves(system, ul, sigma):
    bg = background(system)
    waves, u = [], np.asarray(ul, dtype=float)
    for alpha, sl in enumerate(strength_layout(system)):
        st = sigma[sl]
        if bg.kinds[alpha] == GNL:
            w = gnl_wave(system, u, alpha, float(st[0]))
        else:
            w = contact_wave(system, u, alpha, st)
        waves.append(w)
        u = w.ur
    return waves, u


def forward_endpoint(system: System, ul, sigma) -> np.ndarray:
    """Right state reached from ``ul`` by the forward fan of strengths ``sigma``."""
    return _forward_waves(system, ul, np.asarray(sigma, dtype=float))[1]


def linearized_jacobian(system: System, ul) -> np.ndarray:
    """``d V_end / d sigma`` at ``sigma = 0``: eigenvector columns at ``ul``."""
    bg = background(system)
    es = eigenstructure(system, ul)
    cols = []
    for alpha, g in enumerate(es.groups):
        if bg.kinds[alpha] == GNL:
            lbar = bg.structure.groups[alpha].left[0]
            r = g.right[:, 0]
            cols.append((r / float(lbar @ r))[:, None])
        else:
            cols.append(g.right)
    return np.hstack(cols)


def fan_from_waves(system, waves, side, **kw) -> WaveFan:
    waves = [w for w in waves]
    if not waves:
        raise ValueError("use constant_fan for an empty fan")
    states = [waves[0].ul] + [w.ur for w in waves]
    return WaveFan(system=system, waves=tuple(waves), states=tuple(states), side=side, **kw)


def constant_fan(system: System, u, side: str = FORWARD) -> WaveFan:
    return WaveFan(system=system, waves=(), states=(np.array(u, dtype=float),), side=side,
                   strengths=np.zeros(strength_size(system)))


# -- forward solver ------------------------------------------------------------

def solve_forward(system: System, ul, ur, *, jacobian: str = "fd", seed: str = "zero",
                  maxiter: int = 50, tol: float = 1e-10, fd_step: float = 1e-7) -> WaveFan:
    """Solve the forward-sector Riemann problem from ``ul`` to ``ur``.

    Parameters
    ----------
    system : System
    ul, ur : array_like
        End states (U-variables) in the ball.
    jacobian : {"fd", "frozen", "broyden"}
        Forward differences each iteration, the eigenvector matrix at
        ``ul`` throughout, or that matrix with Broyden updates.
    seed : {"zero", "linear"}
        Initial strengths: zero, or the linearized projection of ``[V]``.
    maxiter : int
    tol : float
        Convergence threshold on ``max |V_end - V(ur)|``.
    fd_step : float

    Returns
    -------
    WaveFan
        Waves with zero strength are dropped; ``strengths`` keeps the full
        stacked vector.

    Raises
    ------
    SolverError
        No convergence in ``maxiter`` iterations.
    OutOfBallError
        An end state or intermediate state leaves the ball.
    """
    ul = np.asarray(ul, dtype=float)
    ur = np.asarray(ur, dtype=float)
    for name, u in (("left", ul), ("right", ur)):
        if not system.in_ball(u):
            raise OutOfBallError(f"{name} state is outside the phase-space ball")
    vr = system.flux_x(ur)
    j0 = linearized_jacobian(system, ul)

    def phi(sig):
        return system.flux_x(forward_endpoint(system, ul, sig)) - vr

    if seed == "zero":
        sigma = np.zeros(strength_size(system))
    elif seed == "linear":
        sigma = np.linalg.solve(j0, vr - system.flux_x(ul))
    else:
        raise ValueError(f"unknown seed {seed!r}")
    if jacobian not in ("fd", "frozen", "broyden"):
        raise ValueError(f"unknown jacobian {jacobian!r}")

    res = phi(sigma)
    jac = j0.copy()
    it = 0
    while np.max(np.abs(res)) >= tol:
        if it >= maxiter:
            raise SolverError(f"Newton did not converge in {maxiter} iterations "
                              f"(residual {np.max(np.abs(res)):.3g})")
        it += 1
        if jacobian == "fd":
            jac = np.empty_like(j0)
            for k in range(sigma.size):
                e = np.zeros_like(sigma)
                e[k] = fd_step
                jac[:, k] = (phi(sigma + e) - res) / fd_step
        step = -np.linalg.solve(jac, res)
        sigma = sigma + step
        new = phi(sigma)
        if jacobian == "broyden":
            jac = jac + np.outer(new - res - jac @ step, step) / float(step @ step)
        res = new
        log.debug("solve_forward iteration %d residual %.3g", it, np.max(np.abs(res)))

    sigma_clean = np.where(np.abs(sigma) <= DROP_STRENGTH, 0.0, sigma)
    waves, _ = _forward_waves(system, ul, sigma_clean)
    kept = [w for w in waves if np.max(np.abs(np.atleast_1d(w.strength))) > 0.0]
    info = {"jacobian": jacobian, "seed": seed}
    if not kept:
        fan = constant_fan(system, ul)
        return WaveFan(system=system, waves=(), states=fan.states, side=FORWARD,
                       strengths=sigma, iterations=it, residual=float(np.max(np.abs(res))),
                       info=info)
    return fan_from_waves(system, kept, FORWARD, strengths=sigma, iterations=it,
                          residual=float(np.max(np.abs(res))), info=info)


# -- composition ------------------------------------------------------------

def compose_fan(system: System, ul, spec, side: str = BACKWARD, admissibility: bool = True) -> WaveFan:
    """Compose waves left to right from ``ul``.

    Parameters
    ----------
    system : System
    ul : array_like
    spec : sequence of (family, kind, strength)
        ``kind`` is ``"shock"``, ``"simple"`` or ``"contact"``.
    side : {"forward", "backward"}
        Which half-plane's rules apply.
    admissibility : bool
        Reject shocks failing the entropy/Lax test for ``side``.

    Raises
    ------
    StructureError
        Two consecutive simple waves of one family.
    CompositionError
        Overlapping or misordered supports, or an inadmissible shock.
    """
    if side not in (FORWARD, BACKWARD):
        raise ValueError(f"unknown side {side!r}")
    spec = list(spec)
    for a, b in zip(spec, spec[1:]):
        if a[1] == SIMPLE and b[1] == SIMPLE and a[0] == b[0]:
            raise StructureError(f"consecutive simple waves in family {a[0]}")
    u = np.asarray(ul, dtype=float)
    if not spec:
        return constant_fan(system, u, side)
    sign = e_convexity(system)
    half = sign if side == FORWARD else -sign
    waves = []
    for family, kind, strength in spec:
        if kind == SHOCK:
            w = hugoniot_wave(system, u, family, float(np.asarray(strength).reshape(-1)[0]))
            if admissibility and not lax_admissible(system, w, half):
                raise CompositionError(f"shock of family {family} with strength {strength} "
                                       f"is not admissible on the {side} side")
        elif kind == SIMPLE:
            w = simple_wave(system, u, family, float(np.asarray(strength).reshape(-1)[0]))
        elif kind == CONTACT:
            w = contact_wave(system, u, family, strength)
        else:
            raise ValueError(f"unknown wave kind {kind!r}")
        waves.append(w)
        u = w.ur
    for a, b in zip(waves, waves[1:]):
        if a.is_jump and b.is_jump:
            ok = a.xi_hi < b.xi_lo
        else:
            ok = a.xi_hi <= b.xi_lo
        if not ok:
            raise CompositionError(
                f"wave supports out of order: [{a.xi_lo:.12g}, {a.xi_hi:.12g}] then "
                f"[{b.xi_lo:.12g}, {b.xi_hi:.12g}]")
    return fan_from_waves(system, waves, side)


# -- sampling ------------------------------------------------------------

def sample_profile(fan: WaveFan, grid):
    """List of ``(xi, U)`` at the grid points (left state at jumps)."""
    return [(float(x), fan.state_at(float(x))) for x in np.asarray(grid, dtype=float)]


def fan_profile(fan: WaveFan, grid) -> Profile:
    """Profile on ``grid`` with both one-sided states at every jump abscissa.

    Jump abscissae and the edges of simple waves are added to the grid as
    breakpoints.
    """
    grid = np.unique(np.asarray(grid, dtype=float))
    jump_set = {w.xi_lo for w in fan.waves if w.is_jump}
    edges = {x for w in fan.waves if not w.is_jump for x in (w.xi_lo, w.xi_hi)}
    lo, hi = grid[0], grid[-1]
    pts = sorted(set(grid.tolist()) | {x for x in jump_set | edges if lo <= x <= hi})
    xs, us = [], []
    by_speed = {w.xi_lo: w for w in fan.waves if w.is_jump}
    for x in pts:
        if x in by_speed:
            w = by_speed[x]
            xs += [x, x]
            us += [w.ul, w.ur]
        else:
            xs.append(x)
            us.append(fan.state_at(x))
    return Profile(np.array(xs), np.array(us))
