"""Generalized eigenstructure of the flux pencil.

With the change of variables ``V = f^x(U)`` the steady self-similar system
becomes ``(f(V) - xi V)_xi = -V`` where ``f(V) = f^y(U(V))``; the
generalized eigenvalues of ``(f_U^x, f_U^y)`` are the eigenvalues of
``f_V = f_U^y (f_U^x)^{-1}``.  This module computes them grouped by
(constant) multiplicity, with smooth orthonormal right frames continued
from the background state, dual left rows, GNL/LD tags and total spectral
projections.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import (ClassificationError, ContourError, FrameError, HyperbolicityError,
                     OutOfBallError)
from .systems import System

GNL = "GNL"
LD = "LD"

TOL_LD = 1e-8
CLASSIFY_STEP = 1e-6
CONTOUR_NODES = 64
# cos(pi/4): smallest admissible alignment between a continued frame and the background frame
_FRAME_ALIGNMENT = math.cos(math.pi / 4)


@dataclass(frozen=True)
class EigenGroup:
    """One distinct eigenvalue of ``f_V`` with its eigenspace.

    Attributes
    ----------
    lam : float
        Eigenvalue ``lambda^alpha`` (mean over the numerical cluster).
    mult : int
        Multiplicity ``p_alpha``.
    right : ndarray, shape (m, p)
        Orthonormal basis of the eigenspace.
    left : ndarray, shape (p, m)
        Dual rows, from the inverse of the stacked right matrix.
    kind : str or None
        ``"GNL"`` or ``"LD"`` once classified.
    """

    lam: float
    mult: int
    right: np.ndarray
    left: np.ndarray
    kind: str | None = None

    @property
    def projector(self) -> np.ndarray:
        return self.right @ self.left


@dataclass(frozen=True)
class EigenStructure:
    """Grouped eigendecomposition of ``f_V`` at one state."""

    groups: tuple[EigenGroup, ...]
    fv: np.ndarray
    u: np.ndarray = field(repr=False)

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([g.lam for g in self.groups])

    @property
    def multiplicities(self) -> tuple[int, ...]:
        return tuple(g.mult for g in self.groups)

    @property
    def right_matrix(self) -> np.ndarray:
        return np.hstack([g.right for g in self.groups])

    @property
    def left_matrix(self) -> np.ndarray:
        return np.vstack([g.left for g in self.groups])

    def __len__(self):
        return len(self.groups)

    def __getitem__(self, alpha) -> EigenGroup:
        return self.groups[alpha]


# -- change of variables -------------------------------------------------

def to_v(system: System, u) -> np.ndarray:
    """``V = f^x(U)``."""
    return system.flux_x(np.asarray(u, dtype=float))


def from_v(system: System, v, seed=None, maxiter: int = 50) -> np.ndarray:
    """Invert ``V = f^x(U)`` by Newton's method seeded at ``seed`` (default ``Ubar``).

    Raises
    ------
    OutOfBallError
        If Newton does not converge in ``maxiter`` iterations.
    """
    v = np.asarray(v, dtype=float)
    u = np.array(system.background if seed is None else seed, dtype=float)
    scale = max(1.0, float(np.max(np.abs(v))))
    for _ in range(maxiter):
        try:
            r = system.flux_x(u) - v
            step = np.linalg.solve(system.jac_x(u), r)
        except (ValueError, np.linalg.LinAlgError) as exc:
            raise OutOfBallError(f"inversion of f^x left the admissible domain: {exc}") from exc
        u = u - step
        if np.max(np.abs(step)) <= 1e-15 * max(1.0, float(np.max(np.abs(u)))) \
                or np.max(np.abs(r)) <= 1e-16 * scale:
            return u
    if np.max(np.abs(system.flux_x(u) - v)) <= 1e-13 * scale:
        return u
    raise OutOfBallError(f"Newton inversion of f^x did not converge in {maxiter} iterations")


def fv_matrix(system: System, u) -> np.ndarray:
    """``f_V = f_U^y (f_U^x)^{-1}`` at the state ``u``."""
    ax, ay = system.jacobians(np.asarray(u, dtype=float))
    return np.linalg.solve(ax.T, ay.T).T


def u_direction(system: System, u, r) -> np.ndarray:
    """Map a V-space direction to U-space: ``(f_U^x)^{-1} r``."""
    return np.linalg.solve(system.jac_x(u), r)


# -- rotation ------------------------------------------------------------

def pencil_rotation_angle(ax, ay, tol: float = 1e-8) -> float:
    """Smallest rotation making ``f_U^x`` regular for the pencil ``(ax, ay)``.

    Rotating the flux vector by ``theta`` replaces ``ax`` with
    ``cos(theta) ax + sin(theta) ay``.  Angles are searched over the grid
    ``+-k pi / (4 m)``; on ties the positive angle wins.
    """
    ax = np.asarray(ax, dtype=float)
    ay = np.asarray(ay, dtype=float)
    m = ax.shape[0]

    def regular(a):
        return abs(np.linalg.det(a)) > tol * np.linalg.norm(a, 2) ** m

    if regular(ax):
        return 0.0
    step = math.pi / (4 * m)
    for k in range(1, 4 * m + 1):
        for theta in (k * step, -k * step):
            if regular(math.cos(theta) * ax + math.sin(theta) * ay):
                return theta
    raise HyperbolicityError("no rotation on the grid makes the pencil regular")


def char_poly_root_check(system: System, tol: float = 1e-8) -> float:
    """Rotation angle needed so ``(0 : 1)`` is not a root of the characteristic form."""
    ax, ay = system.jacobians(system.background)
    return pencil_rotation_angle(ax, ay, tol)


# -- eigendecomposition --------------------------------------------------

def _sorted_eig(fv):
    w, vecs = np.linalg.eig(fv)
    scale = max(1.0, float(np.max(np.abs(w))))
    if np.max(np.abs(w.imag)) > 1e-7 * scale:
        raise HyperbolicityError(f"complex eigenvalues of f_V: {w}")
    order = np.argsort(w.real, kind="stable")
    return w[order], vecs[:, order]


def _blocks(mults):
    start = 0
    for p in mults:
        yield slice(start, start + p)
        start += p


def _check_grouping(w, mults, threshold):
    re = w.real
    for blk in _blocks(mults):
        if re[blk].max() - re[blk].min() >= threshold:
            raise HyperbolicityError(
                f"eigenvalues {re[blk]} do not cluster into a group of multiplicity "
                f"{blk.stop - blk.start}")
    starts = [blk.start for blk in _blocks(mults)][1:]
    for s in starts:
        if re[s] - re[s - 1] < threshold:
            raise HyperbolicityError(f"eigenvalue gap {re[s] - re[s - 1]:.3g} below grouping threshold")


def _group_frame(proj, reference):
    """Orthonormal basis of ``range(proj)`` continued from ``reference``."""
    p = reference.shape[1]
    if p == 1:
        q = proj @ reference[:, 0]
        nq = np.linalg.norm(q)
        if nq == 0.0:
            raise FrameError("projected reference vector vanished")
        q = (q / nq)[:, None]
    else:
        q, rr = np.linalg.qr(proj @ reference)
        q = q * np.sign(np.diag(rr))
    if np.linalg.svd(reference.T @ q, compute_uv=False).min() < _FRAME_ALIGNMENT:
        raise FrameError("eigenframe rotated by more than pi/4 from the background frame")
    return q


def _initial_frame(proj, p):
    q, rr, _ = scipy.linalg.qr(proj, pivoting=True)
    q = q[:, :p] * np.sign(np.diag(rr)[:p])
    return q


def _decompose(system, u, mults, threshold, references=None, kinds=None):
    fv = fv_matrix(system, u)
    w, vecs = _sorted_eig(fv)
    _check_grouping(w, mults, threshold)
    rinv = np.linalg.inv(vecs)
    frames, lams = [], []
    for a, blk in enumerate(_blocks(mults)):
        proj = (vecs[:, blk] @ rinv[blk, :]).real
        p = blk.stop - blk.start
        if references is None:
            frames.append(_initial_frame(proj, p))
        else:
            frames.append(_group_frame(proj, references[a]))
        lams.append(float(w[blk].real.mean()))
    right = np.hstack(frames)
    left = np.linalg.inv(right)
    groups = []
    for a, blk in enumerate(_blocks(mults)):
        groups.append(EigenGroup(lam=lams[a], mult=blk.stop - blk.start, right=frames[a],
                                 left=left[blk, :], kind=None if kinds is None else kinds[a]))
    return EigenStructure(groups=tuple(groups), fv=fv, u=np.array(u, dtype=float))


@dataclass(frozen=True, eq=False)
class Background:
    """Eigenstructure data fixed at the background state.

    Holds the oriented reference frames used to continue eigenframes
    smoothly over the ball, the field kinds, the minimal inter-group gap
    and derived thresholds.
    """

    system: System
    structure: EigenStructure
    kinds: tuple[str, ...]
    min_gap: float
    threshold: float
    contour_radius: float
    ld_values: tuple[float, ...]

    @property
    def lambdas(self) -> np.ndarray:
        return self.structure.lambdas

    @property
    def multiplicities(self) -> tuple[int, ...]:
        return self.structure.multiplicities

    @property
    def references(self):
        return [g.right for g in self.structure.groups]

    @functools.cached_property
    def slices(self):
        return list(_blocks(self.multiplicities))

    def families(self, kind=None):
        return [a for a, k in enumerate(self.kinds) if kind is None or k == kind]


def _sample_points(system, count=4, seed=12345):
    rng = np.random.default_rng(seed)
    pts = system.random_states(count, rng, radius=0.5 * system.radius)
    return [np.array(system.background, dtype=float)] + list(pts)


@functools.lru_cache(maxsize=64)
def background(system: System) -> Background:
    """Cached background analysis of ``system`` (frames, kinds, gaps)."""
    mults = tuple(system.multiplicities)
    ubar = np.array(system.background, dtype=float)
    w, _ = _sorted_eig(fv_matrix(system, ubar))
    re = w.real
    spreads = [re[blk].max() - re[blk].min() for blk in _blocks(mults)]
    gaps = [re[b.start] - re[b.start - 1] for b in list(_blocks(mults))[1:]]
    min_gap = float(min(gaps)) if gaps else 1.0
    if max(spreads) > 1e-8 * max(1.0, float(np.max(np.abs(re)))) or min_gap <= 0.0:
        raise HyperbolicityError("background spectrum does not match the expected multiplicities")
    threshold = 0.25 * min_gap
    raw = _decompose(system, ubar, mults, threshold)
    refs = [g.right.copy() for g in raw.groups]

    kinds, ld_values = [], []
    for a, g in enumerate(raw.groups):
        vals = []
        for pt in _sample_points(system):
            es = _decompose(system, pt, mults, threshold, refs)
            vals.extend(lambda_derivatives(system, es, a, mults, threshold, refs))
        vals = np.array(vals)
        if np.max(np.abs(vals)) < TOL_LD:
            kinds.append(LD)
        elif g.mult == 1 and (np.all(vals > 100 * TOL_LD) or np.all(vals < -100 * TOL_LD)):
            kinds.append(GNL)
            if vals[0] < 0:
                refs[a] = -refs[a]
        else:
            raise ClassificationError(
                f"family {a} is neither linearly degenerate nor genuinely nonlinear: "
                f"derivatives {vals}")
        ld_values.append(float(np.max(np.abs(vals))))
    final = _decompose(system, ubar, mults, threshold, refs, tuple(kinds))
    return Background(system=system, structure=final, kinds=tuple(kinds), min_gap=min_gap,
                      threshold=threshold, contour_radius=0.5 * min_gap,
                      ld_values=tuple(ld_values))


def eigenstructure(system: System, u, multiplicities=None) -> EigenStructure:
    """Grouped eigenstructure of ``f_V`` at ``u``.

    Parameters
    ----------
    system : System
    u : array_like
        State in the ball.
    multiplicities : sequence of int, optional
        Expected multiplicities; defaults to the system's.

    Returns
    -------
    EigenStructure
        Groups in ascending eigenvalue order; right frames are orthonormal
        and continued from the oriented background frames.

    Raises
    ------
    HyperbolicityError
        If the spectrum is complex or does not cluster as expected.
    """
    bg = background(system)
    mults = bg.multiplicities if multiplicities is None else tuple(multiplicities)
    if mults != bg.multiplicities:
        raise HyperbolicityError(f"multiplicities {mults} differ from background {bg.multiplicities}")
    return _decompose(system, np.asarray(u, dtype=float), mults, bg.threshold, bg.references, bg.kinds)


def eigenvalues(system: System, u) -> np.ndarray:
    """Group eigenvalues ``lambda^alpha(u)`` without frames."""
    return group_eigenvalues(system, np.asarray(u, dtype=float))


def family_lambda(system: System, u, alpha: int) -> float:
    return float(eigenvalues(system, u)[alpha])


def eigenvalues_batch(system: System, us) -> np.ndarray:
    """Group eigenvalues at each row of ``us``, shape ``(k, n)``."""
    us = np.atleast_2d(np.asarray(us, dtype=float))
    closed = getattr(system, "group_eigenvalues_batch", None)
    if closed is not None:
        return closed(us)
    bg = background(system)
    ax, ay = system.jacobians_batch(us)
    fv = np.linalg.solve(np.transpose(ax, (0, 2, 1)), np.transpose(ay, (0, 2, 1)))
    fv = np.transpose(fv, (0, 2, 1))
    w = np.sort(np.linalg.eigvals(fv).real, axis=1)
    return np.stack([w[:, blk].mean(axis=1) for blk in bg.slices], axis=1)


def lambda_derivatives(system, es, alpha, mults=None, threshold=None, refs=None,
                       step: float = CLASSIFY_STEP):
    """Directional derivatives ``lambda^alpha_V r^{alpha,i}`` at ``es.u``.

    Central differences of ``lambda^alpha`` along each right basis vector;
    the V-space step is taken in U-space along ``(f_U^x)^{-1} r``.
    """
    u = es.u
    ax = system.jac_x(u)
    out = []
    for r in es.groups[alpha].right.T:
        d = np.linalg.solve(ax, r)
        lp = _lam_at(system, u + step * d, alpha, mults)
        lm = _lam_at(system, u - step * d, alpha, mults)
        out.append((lp - lm) / (2 * step))
    return out


def _lam_at(system, u, alpha, mults):
    if mults is None:
        mults = background(system).multiplicities
    w = np.sort(np.linalg.eigvals(fv_matrix(system, u)).real)
    return float(w[list(_blocks(mults))[alpha]].mean())


def classify(system: System, group: int, u=None) -> str:
    """GNL/LD tag of family ``group``.

    The tag is decided from ``lambda_V r`` at the background and four
    fixed points of the half-radius ball; ``u`` adds one more sample point.
    Frames are oriented so that ``lambda_V r > 0`` for GNL families.
    """
    bg = background(system)
    kind = bg.kinds[group]
    if u is not None:
        vals = np.array(lambda_derivatives(system, eigenstructure(system, u), group))
        if kind == LD and np.max(np.abs(vals)) >= TOL_LD:
            raise ClassificationError(f"family {group} not linearly degenerate at {u}")
        if kind == GNL and not np.all(vals > 0):
            raise ClassificationError(f"family {group} loses genuine nonlinearity at {u}")
    return kind


def gnl_rate(system: System, u, alpha: int) -> float:
    """``lambda_V r^alpha`` at ``u`` for a GNL family (positive after orientation)."""
    return float(lambda_derivatives(system, eigenstructure(system, u), alpha)[0])


# -- total projections ---------------------------------------------------

def total_projection(a, center: float, radius: float, nodes: int = CONTOUR_NODES) -> np.ndarray:
    """Spectral projector for the eigenvalues of ``a`` inside ``|z - center| < radius``.

    Trapezoidal quadrature of the resolvent integral over the circle with
    ``nodes`` equispaced points.

    Raises
    ------
    ContourError
        If an eigenvalue lies within ``1e-3 radius`` of the circle.
    """
    a = np.asarray(a, dtype=float)
    m = a.shape[0]
    lam = np.linalg.eigvals(a)
    if np.any(np.abs(np.abs(lam - center) - radius) < 1e-3 * radius):
        raise ContourError("eigenvalue too close to the contour")
    phi = 2.0 * math.pi * np.arange(nodes) / nodes
    z = center + radius * np.exp(1j * phi)
    eye = np.eye(m)
    acc = np.zeros((m, m), dtype=complex)
    for zk, ph in zip(z, phi):
        acc += radius * np.exp(1j * ph) * np.linalg.solve(zk * eye - a, eye)
    return (acc / nodes).real


def group_projections(system: System, a, nodes: int = CONTOUR_NODES):
    """Total projections of ``a`` for every family, centered at the background eigenvalues."""
    bg = background(system)
    return [total_projection(a, lam, bg.contour_radius, nodes) for lam in bg.lambdas]


def group_eigenvalues(system: System, u, fv=None) -> np.ndarray:
    """Group eigenvalues, from the system's closed form when it has one."""
    closed = getattr(system, "group_eigenvalues", None)
    if closed is not None:
        return np.asarray(closed(u), dtype=float)
    if fv is None:
        fv = fv_matrix(system, u)
    w = np.sort(np.linalg.eigvals(fv).real)
    return np.array([w[blk].mean() for blk in background(system).slices])


def family_basis(system: System, u, alpha: int, reference=None):
    """Unnormalized basis ``P^alpha(u) reference`` of the family-``alpha`` eigenspace.

    A lean path for vector-field evaluation.  For a semisimple ``f_V`` the
    group projector is the product
    ``prod_{beta != alpha} (f_V - lambda^beta) / (lambda^alpha - lambda^beta)``,
    so no eigenvectors are needed.  ``reference`` defaults to the
    background frame.  Returns the basis and ``f_U^x(u)``.
    """
    if reference is None:
        reference = background(system).references[alpha]
    ax, ay = system.jacobians(u)
    fv = np.linalg.solve(ax.T, ay.T).T
    lam = group_eigenvalues(system, u, fv)
    b = reference
    for beta, lb in enumerate(lam):
        if beta != alpha:
            b = (fv @ b - lb * b) / (lam[alpha] - lb)
    return b, ax
