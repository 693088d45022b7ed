"""Wave curves through a left state.

Three constructions, all carried out in U-space with V-space vector
fields pulled back through ``(f_U^x)^{-1}``:

* shocks on the Hugoniot locus of a GNL family,
* simple waves (integral curves of the GNL eigenvector field),
* contact leaves of an LD family, charted by sequential flows.

Shocks and simple waves share one strength parameter,
``sigma = l_bar . [V]`` with ``l_bar`` the background left eigenvector of
the family, so the two curves are directly comparable.  Contact leaves
are charted by ``s = L(V-) . [V]`` with ``L`` the family's left rows at
the base point; the chart's coordinate fields commute, so the order of
the legs does not matter.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from .averaging import e_convexity, entropy_jump, harten_lax_average_u, rh_residual
from .errors import ClassificationError, DomainError, FrameError, LocusError, OutOfBallError
from .pencil import (GNL, LD, background, eigenstructure, eigenvalues, family_basis, from_v,
                     total_projection)
from .systems import System

SHOCK = "shock"
SIMPLE = "simple"
CONTACT = "contact"

RK_STEPS = 64
MIN_LEAF_ALIGNMENT = 0.5


# -- integration helpers ---------------------------------------------------

def rk4(field_fn, u0, length: float, steps: int = RK_STEPS, record: bool = False):
    """Classical 4th-order integration of ``du/dt = field_fn(u)`` over ``[0, length]``.

    With ``record`` the nodes ``t_k``, states and field values are returned too.
    """
    h = length / steps
    u = np.array(u0, dtype=float)
    ts, us, fs = [0.0], [u.copy()], []
    k1 = field_fn(u)
    for k in range(steps):
        k2 = field_fn(u + 0.5 * h * k1)
        k3 = field_fn(u + 0.5 * h * k2)
        k4 = field_fn(u + h * k3)
        u = u + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if record:
            fs.append(k1)
        k1 = field_fn(u)
        if record:
            ts.append((k + 1) * h)
            us.append(u.copy())
    if record:
        fs.append(k1)
        return u, np.array(ts), np.array(us), np.array(fs)
    return u


def _check_ball(system, u, what):
    if not system.in_ball(u):
        raise OutOfBallError(f"{what} left the phase-space ball: |U - Ubar| = "
                             f"{np.linalg.norm(u - system.background):.3g} > {system.radius:.3g}")


def _require_kind(system, family, kind):
    bg = background(system)
    if not 0 <= family < len(bg.kinds):
        raise ValueError(f"family index {family} out of range")
    if bg.kinds[family] != kind:
        raise ClassificationError(f"family {family} is {bg.kinds[family]}, expected {kind}")
    return bg


# -- data types ------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SimpleWaveCurve:
    """Stored integral curve of a simple wave, parameterized by strength ``tau``."""

    taus: np.ndarray
    states: np.ndarray
    derivs: np.ndarray
    lams: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "_lam_spline", CubicSpline(self.taus, self.lams))

    def state_at_tau(self, tau: float) -> np.ndarray:
        """Cubic Hermite dense output between stored nodes."""
        taus = self.taus
        k = int(np.clip(np.searchsorted(taus, tau) - 1, 0, len(taus) - 2))
        h = taus[k + 1] - taus[k]
        t = (tau - taus[k]) / h
        h00 = 2 * t ** 3 - 3 * t ** 2 + 1
        h10 = t ** 3 - 2 * t ** 2 + t
        h01 = -2 * t ** 3 + 3 * t ** 2
        h11 = t ** 3 - t ** 2
        return (h00 * self.states[k] + h10 * h * self.derivs[k]
                + h01 * self.states[k + 1] + h11 * h * self.derivs[k + 1])

    def tau_at_xi(self, xi: float) -> float:
        """Invert the monotone map ``tau -> lambda(tau)`` by bisection."""
        lo, hi = self.taus[0], self.taus[-1]
        f = self._lam_spline
        if xi <= self.lams[0]:
            return lo
        if xi >= self.lams[-1]:
            return hi
        return brentq(lambda t: float(f(t)) - xi, lo, hi, xtol=1e-15, rtol=1e-15)

    def state_at_xi(self, xi: float) -> np.ndarray:
        return self.state_at_tau(self.tau_at_xi(xi))


@dataclass(frozen=True, eq=False)
class Wave:
    """A single wave of a fan.

    Attributes
    ----------
    family : int
        Index of the eigenvalue group.
    kind : str
        ``"shock"``, ``"simple"`` or ``"contact"``.
    ul, ur : ndarray
        End states (U-variables).
    xi_lo, xi_hi : float
        Support in ``xi``; equal for discontinuities.
    strength : float or ndarray
        ``sigma`` for GNL waves, leaf coordinates ``s`` for contacts.
    curve : SimpleWaveCurve or None
        Stored integral curve (simple waves only).
    """

    family: int
    kind: str
    ul: np.ndarray
    ur: np.ndarray
    xi_lo: float
    xi_hi: float
    strength: object
    curve: SimpleWaveCurve | None = field(default=None, repr=False)

    @property
    def is_jump(self) -> bool:
        return self.kind in (SHOCK, CONTACT)

    @property
    def speed(self) -> float:
        return self.xi_lo

    def rh_norm(self, system) -> float:
        if not self.is_jump:
            return 0.0
        return float(np.max(np.abs(rh_residual(system, self.ul, self.ur, self.xi_lo))))

    def entropy(self, system) -> float:
        if not self.is_jump:
            return 0.0
        return entropy_jump(system, self.ul, self.ur, self.xi_lo)

    def state_at(self, xi: float) -> np.ndarray:
        """State at ``xi``; left state at the jump abscissa."""
        if xi < self.xi_lo or (self.is_jump and xi == self.xi_lo):
            return self.ul
        if xi >= self.xi_hi:
            return self.ur
        return self.curve.state_at_xi(xi)

    def to_dict(self) -> dict:
        s = np.atleast_1d(np.asarray(self.strength, dtype=float))
        return {"family": int(self.family), "kind": self.kind,
                "xi_lo": float(self.xi_lo), "xi_hi": float(self.xi_hi),
                "strength": [float(x) for x in s],
                "ul": [float(x) for x in self.ul], "ur": [float(x) for x in self.ur]}


# -- shocks ------------------------------------------------------------------

def _strength_row(system, family):
    return background(system).structure.groups[family].left[0]


def _gnl_field(system, family, lbar):
    fast = getattr(system, "gnl_field", None)
    if fast is not None:
        ref = background(system).references[family][:, 0].copy()
        return lambda u: fast(u, family, ref, lbar)

    def field_fn(u):
        b, ax = family_basis(system, u, family)
        r = b[:, 0]
        return np.linalg.solve(ax, r / float(lbar @ r))
    return field_fn


def hugoniot_point(system: System, ul, family: int, sigma: float, maxiter: int = 50):
    """Point of the Hugoniot locus of a GNL family at strength ``sigma``.

    Solves ``[f^y] = xi [f^x]`` together with ``l_bar . [f^x] = sigma`` by
    Newton's method in the unknowns ``(d, xi)`` with ``U+ = U- + sigma d``;
    the division by ``sigma`` removes the trivial branch.

    Returns
    -------
    ur : ndarray
    xi : float

    Raises
    ------
    LocusError
        Newton failure.
    OutOfBallError
        The end state leaves the ball.
    """
    _require_kind(system, family, GNL)
    ul = np.asarray(ul, dtype=float)
    lam_l = float(eigenvalues(system, ul)[family])
    if sigma == 0.0:
        return ul.copy(), lam_l
    lbar = _strength_row(system, family)
    d = _gnl_field(system, family, lbar)(ul)
    xi = lam_l
    fxl, fyl = system.flux_x(ul), system.flux_y(ul)
    m = ul.size
    scale = max(1.0, float(np.max(np.abs(fxl))))
    for _ in range(maxiter):
        ur = ul + sigma * d
        try:
            fxr, fyr = system.flux_x(ur), system.flux_y(ur)
            ax, ay = system.jacobians(ur)
        except DomainError as exc:
            raise LocusError(f"Hugoniot iteration left the domain: {exc}") from exc
        dfx = fxr - fxl
        res = (fyr - fyl) - xi * dfx
        g = np.concatenate([res / sigma, [lbar @ dfx / sigma - 1.0]])
        if np.max(np.abs(res)) < 1e-13 * scale and abs(g[-1]) < 1e-13:
            break
        jac = np.zeros((m + 1, m + 1))
        jac[:m, :m] = ay - xi * ax
        jac[:m, m] = -dfx / sigma
        jac[m, :m] = lbar @ ax
        step = np.linalg.solve(jac, g)
        d = d - step[:m]
        xi = xi - step[m]
        if np.max(np.abs(step[:m])) * abs(sigma) < 1e-16 * scale and abs(step[m]) < 1e-16:
            ur = ul + sigma * d
            break
    else:
        ur = ul + sigma * d
    res = rh_residual(system, ul, ur, xi)
    if not np.max(np.abs(res)) < 1e-11:
        raise LocusError(f"Hugoniot Newton did not converge: residual {np.max(np.abs(res)):.3g}")
    _check_ball(system, ur, "shock end state")
    return ur, float(xi)


def hugoniot_wave(system: System, ul, family: int, sigma: float) -> Wave:
    ur, xi = hugoniot_point(system, ul, family, sigma)
    return Wave(family=family, kind=SHOCK, ul=np.asarray(ul, dtype=float), ur=ur,
                xi_lo=xi, xi_hi=xi, strength=float(sigma))


def lax_admissible(system: System, wave: Wave, half_plane: int, tol: float = 1e-12) -> bool:
    """Entropy and Lax admissibility of a shock on half-plane ``half_plane`` (+1: ``x > 0``).

    The entropy sign and the Lax inequalities must agree; otherwise the
    shock is rejected.
    """
    ent = half_plane * wave.entropy(system)
    lam_l = float(eigenvalues(system, wave.ul)[wave.family])
    lam_r = float(eigenvalues(system, wave.ur)[wave.family])
    forward = half_plane == e_convexity(system)
    if forward:
        lax = lam_r < wave.xi_lo < lam_l
    else:
        lax = lam_l < wave.xi_lo < lam_r
    return bool(ent <= tol and lax)


# -- simple waves ------------------------------------------------------------

def simple_wave(system: System, ul, family: int, sigma: float, steps: int = RK_STEPS) -> Wave:
    """Simple wave of strength ``sigma >= 0`` through ``ul``.

    Integrates ``dV/dtau = r / (l_bar . r)`` with classical RK4 in ``steps``
    steps, so that ``l_bar . [V] = sigma``; ``lambda`` must increase
    strictly along the curve.

    Raises
    ------
    ClassificationError
        ``lambda`` not monotone along the curve.
    ValueError
        Negative strength.
    """
    _require_kind(system, family, GNL)
    if sigma < 0:
        raise ValueError("simple waves need a nonnegative strength (use a shock for sigma < 0)")
    ul = np.asarray(ul, dtype=float)
    lam_l = float(eigenvalues(system, ul)[family])
    if sigma == 0.0:
        return Wave(family=family, kind=SIMPLE, ul=ul, ur=ul.copy(), xi_lo=lam_l,
                    xi_hi=lam_l, strength=0.0)
    fld = _gnl_field(system, family, _strength_row(system, family))
    ur, taus, us, fs = rk4(fld, ul, sigma, steps, record=True)
    _check_ball(system, ur, "simple-wave end state")
    lams = np.array([eigenvalues(system, u)[family] for u in us])
    slack = 4 * np.finfo(float).eps * max(1.0, float(np.max(np.abs(lams))))
    if not (np.all(np.diff(lams) > -slack) and lams[-1] > lams[0]):
        raise ClassificationError("lambda is not strictly increasing along the simple wave")
    curve = SimpleWaveCurve(taus=taus, states=us, derivs=fs, lams=lams)
    return Wave(family=family, kind=SIMPLE, ul=ul, ur=ur, xi_lo=float(lams[0]),
                xi_hi=float(lams[-1]), strength=float(sigma), curve=curve)


def gnl_wave(system: System, ul, family: int, sigma: float) -> Wave:
    """Simple wave for ``sigma > 0``, shock for ``sigma < 0`` (forward convention)."""
    if sigma >= 0:
        return simple_wave(system, ul, family, sigma)
    return hugoniot_wave(system, ul, family, sigma)


# -- contact leaves ------------------------------------------------------------

class ContactLeaf:
    """Leaf of the characteristic foliation of an LD family through ``base``.

    The chart is ``s -> W(s)`` reached by flowing along ``X_1`` for ``s^1``,
    then ``X_2`` for ``s^2`` and so on, where ``X = B (L B)^{-1}``, ``B`` spans
    the eigenspace and ``L`` holds the family's left rows at the base.
    Then ``L . (W(s) - V-) = s`` exactly, and the legs commute.
    """

    def __init__(self, system: System, base, family: int, steps: int = RK_STEPS):
        bg = _require_kind(system, family, LD)
        self.system = system
        self.family = family
        self.steps = steps
        self.base = np.array(base, dtype=float)
        self.mult = bg.multiplicities[family]
        self.rows = eigenstructure(system, self.base).groups[family].left.copy()
        self.lam = float(eigenvalues(system, self.base)[family])

    def frame(self, u):
        """Coordinate frame ``X(u)`` (V-space columns) and ``f_U^x(u)``."""
        b, ax = family_basis(self.system, u, self.family)
        inv = np.linalg.inv(self.rows @ b)
        # Frobenius norm bounds 1 / sigma_min from above
        if np.linalg.norm(inv) > 1.0 / MIN_LEAF_ALIGNMENT:
            raise FrameError("leaf chart degenerated: eigenspace nearly orthogonal to the base rows")
        return b @ inv, ax

    def _leg_field(self, i):
        fast = getattr(self.system, "leaf_field", None)
        if fast is not None and self.mult == 2:
            ref = background(self.system).references[self.family].copy()
            rows, limit, fam = self.rows, 1.0 / MIN_LEAF_ALIGNMENT, self.family
            return lambda u: fast(u, fam, ref, rows, i, limit)

        def field_fn(u):
            x, ax = self.frame(u)
            return np.linalg.solve(ax, x[:, i])
        return field_fn

    def point(self, s, order=None) -> np.ndarray:
        """Chart point ``W(s)`` as a U-state; ``order`` permutes the legs."""
        s = np.atleast_1d(np.asarray(s, dtype=float))
        if s.size != self.mult:
            raise ValueError(f"leaf coordinates need {self.mult} components")
        u = self.base.copy()
        for i in (range(self.mult) if order is None else order):
            if s[i] != 0.0:
                u = rk4(self._leg_field(i), u, s[i], self.steps)
        return u

    def coordinates(self, u) -> np.ndarray:
        """Leaf coordinates ``L . (f^x(u) - V-)`` of a point (exact on the leaf)."""
        return self.rows @ (self.system.flux_x(u) - self.system.flux_x(self.base))


def contact_leaf_point(system: System, ul, family: int, s, order=None) -> np.ndarray:
    """Point ``W^alpha(V-, s)`` on the contact leaf through ``ul`` (U-variables)."""
    ur = ContactLeaf(system, ul, family).point(s, order)
    _check_ball(system, ur, "contact end state")
    return ur


def contact_wave(system: System, ul, family: int, s) -> Wave:
    leaf = ContactLeaf(system, ul, family)
    s = np.atleast_1d(np.asarray(s, dtype=float))
    ur = leaf.point(s)
    _check_ball(system, ur, "contact end state")
    return Wave(family=family, kind=CONTACT, ul=leaf.base, ur=ur, xi_lo=leaf.lam,
                xi_hi=leaf.lam, strength=s.copy())


# -- intermediate state ------------------------------------------------------------

@dataclass(frozen=True)
class LeafProjection:
    """Result of the intermediate-state solve."""

    s: np.ndarray
    state: np.ndarray
    residual: float
    iterations: int
    converged: bool


def intermediate_state_u(system: System, uminus, u, family: int, maxiter: int = 50,
                         tol: float = 1e-10) -> LeafProjection:
    """Leaf point ``W(s)`` through ``uminus`` whose jump to ``u`` has no family component.

    Solves ``L . P_hat(W(s), V) (V - W(s)) = 0`` where ``P_hat`` is the total
    projection of the Harten-Lax average for the family and ``L`` the
    family's left rows at the base.  The Jacobian ``-L X`` is frozen at the
    base, where it equals ``-I``.
    """
    leaf = ContactLeaf(system, uminus, family)
    bg = background(system)
    center = float(bg.lambdas[family])
    v = system.flux_x(u)
    s = np.zeros(leaf.mult)
    w = leaf.base
    res = np.inf
    for it in range(1, maxiter + 1):
        w = leaf.point(s)
        am = harten_lax_average_u(system, w, u)
        proj = total_projection(am.a_hat, center, bg.contour_radius)
        g = leaf.rows @ (proj @ (v - system.flux_x(w)))
        res = float(np.max(np.abs(g)))
        if res < tol:
            return LeafProjection(s=s, state=w, residual=res, iterations=it, converged=True)
        s = s + g
    return LeafProjection(s=s, state=w, residual=res, iterations=maxiter, converged=False)


def intermediate_state(system: System, vminus, v, family: int, full: bool = False):
    """Leaf coordinates ``s(V-, V)`` (V-variable inputs).

    Returns ``s``; with ``full`` the whole ``LeafProjection`` including the
    residual.  Failure to converge is reported through the residual.
    """
    um = from_v(system, vminus)
    uu = from_v(system, v, seed=um)
    result = intermediate_state_u(system, um, uu, family)
    return result if full else result.s
