"""Verification of structure and regularity properties of sampled profiles.

Given a profile ``xi -> U(xi)`` on one half-plane the checks are:

* constancy outside the sectors ``I^alpha`` around the background eigenvalues,
* classification of jumps (matched to eigenvalues of the Harten-Lax average)
  and of simple-wave fans (``lambda^alpha(U(xi)) = xi``),
* per-sector wave rules (LD sectors: one contact at most, ``lambda^alpha``
  continuous, the fan set a point; GNL sectors: one wave at most forward,
  no two consecutive simple waves backward),
* integrated weak form and entropy inequality over pairs ``xi_1 < xi_2``,
* the split into a jump part and a Lipschitz part.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .averaging import e_convexity, entropy_jump, harten_lax_average_u, rh_residual
from .errors import ConfigurationError, SelfSimError
from .pencil import GNL, LD, background, eigenvalues_batch, eigenstructure
from .profile import Profile
from .riemann import BACKWARD, FORWARD
from .systems import System
from .waves import CONTACT, SHOCK, SIMPLE, intermediate_state_u

SECTOR_SAMPLES = 100
SECTOR_SEED = 7


@dataclass(frozen=True)
class Tolerances:
    """Thresholds used by the verifier (all in scaled units)."""

    const: float = 1e-9
    fan: float = 1e-6
    weak: float = 1e-6
    rh: float = 1e-9
    leaf: float = 1e-7
    entropy: float = 1e-13
    lam_cont: float = 1e-8
    jump_floor: float = 1e-7
    jump_factor: float = 10.0
    sbv_factor: float = 2.0
    pairs: int = 200
    seed: int = 0

    def replace(self, **kw) -> "Tolerances":
        d = asdict(self)
        unknown = set(kw) - set(d)
        if unknown:
            raise ConfigurationError(f"unknown tolerance(s): {', '.join(sorted(unknown))}")
        d.update(kw)
        return Tolerances(**d)


# -- sectors ------------------------------------------------------------------

@dataclass(frozen=True)
class SectorMap:
    """Sectors ``]lambda^alpha(Vbar) - delta_s, lambda^alpha(Vbar) + delta_s[``."""

    centers: np.ndarray
    delta_s: float
    side: str
    half_plane: int
    spread: float
    floor: float
    kinds: tuple[str, ...]

    @property
    def intervals(self):
        return [(float(c - self.delta_s), float(c + self.delta_s)) for c in self.centers]

    def sector_of(self, xi):
        """Family index whose open sector contains ``xi`` (``-1`` outside)."""
        xi = np.asarray(xi, dtype=float)
        out = np.full(xi.shape, -1, dtype=int)
        for a, c in enumerate(self.centers):
            out[np.abs(xi - c) < self.delta_s] = a
        return out

    def to_dict(self):
        return {"delta_s": float(self.delta_s), "centers": [float(c) for c in self.centers],
                "intervals": [list(iv) for iv in self.intervals], "side": self.side,
                "half_plane": int(self.half_plane), "spread": float(self.spread),
                "floor": float(self.floor), "kinds": list(self.kinds)}


def sector_map(system: System, eps: float | None = None, side: str = FORWARD,
               samples: int = SECTOR_SAMPLES, seed: int = SECTOR_SEED) -> SectorMap:
    """Sector half-width from the eigenvalue spread over the ``eps``-ball.

    ``delta_s = 2 max_alpha max_k |lambda^alpha(V_k) - lambda^alpha(Vbar)|`` over
    ``samples`` seeded points on the sphere of radius ``eps``, with a floor of
    ``0.1 eps`` times the minimal gap, capped at ``0.45`` of the minimal gap.

    Raises
    ------
    ConfigurationError
        The cap would not contain the eigenvalue spread (``eps`` too large).
    """
    if side not in (FORWARD, BACKWARD):
        raise ConfigurationError(f"unknown side {side!r}")
    bg = background(system)
    eps = system.radius if eps is None else float(eps)
    rng = np.random.default_rng(seed)
    pts = system.random_states(samples, rng, radius=eps, surface=True)
    lam = eigenvalues_batch(system, pts)
    spread = float(np.max(np.abs(lam - bg.lambdas)))
    floor = 0.1 * eps * bg.min_gap
    cap = 0.45 * bg.min_gap
    delta = min(max(2.0 * spread, floor), cap)
    if delta <= spread:
        raise ConfigurationError(
            f"epsilon = {eps:g} is too large: eigenvalue spread {spread:.3g} does not fit "
            f"into disjoint sectors")
    sign = e_convexity(system)
    half = sign if side == FORWARD else -sign
    return SectorMap(centers=bg.lambdas.copy(), delta_s=delta, side=side, half_plane=half,
                     spread=spread, floor=floor, kinds=bg.kinds)


def _sector_nodes(lo, hi, per_sector, breakpoints):
    cuts = sorted({lo, hi} | {float(b) for b in breakpoints if lo < b < hi})
    parts = []
    for a, b in zip(cuts, cuts[1:]):
        cells = max(1, int(round((per_sector - 1) * (b - a) / (hi - lo))))
        parts.append(np.linspace(a, b, cells + 1)[:-1])
    parts.append(np.array([hi]))
    return np.concatenate(parts)


def build_grid(sectors: SectorMap, per_sector: int = 4096, gap_points: int = 32,
               margin: float | None = None, breakpoints=()) -> np.ndarray:
    """Grid with ``per_sector`` points across each sector and sparse points elsewhere.

    ``breakpoints`` inside a sector become nodes, with uniform spacing on
    each piece between them (so every smooth piece is resolved by whole cells).
    """
    if per_sector < 64:
        raise ConfigurationError("grid needs at least 64 points per sector")
    ivs = sectors.intervals
    gap = min((b[0] - a[1] for a, b in zip(ivs, ivs[1:])), default=1.0)
    margin = 0.5 * gap if margin is None else float(margin)
    parts = [np.linspace(ivs[0][0] - margin, ivs[0][0], gap_points + 1)[:-1]]
    for k, (lo, hi) in enumerate(ivs):
        parts.append(_sector_nodes(lo, hi, per_sector, breakpoints))
        if k + 1 < len(ivs):
            parts.append(np.linspace(hi, ivs[k + 1][0], gap_points + 2)[1:-1])
    parts.append(np.linspace(ivs[-1][1], ivs[-1][1] + margin, gap_points + 1)[1:])
    return np.concatenate(parts)


# -- per-profile analysis ---------------------------------------------------------

class ProfileAnalysis:
    """Derived arrays of a profile: V, fluxes, entropy, eigenvalues, jumps."""

    def __init__(self, system: System, profile: Profile, sectors: SectorMap,
                 tol: Tolerances = Tolerances()):
        if profile.dim != system.dim:
            raise ValueError(f"profile has {profile.dim} components, system needs {system.dim}")
        self.system = system
        self.profile = profile
        self.sectors = sectors
        self.tol = tol
        us = profile.states
        self.xi = profile.xi
        self.u = us
        self.v = system.flux_batch(us, 0)
        self.f = system.flux_batch(us, 1)
        self.ent = system.entropy_batch(us)
        self.lam = eigenvalues_batch(system, us)
        self.sector = sectors.sector_of(self.xi)
        bg = background(system)
        self.bg = bg
        self.smooth_u, self.smooth_v = _smooth_bounds(system)
        dxi = np.diff(self.xi)
        du = np.max(np.abs(np.diff(us, axis=0)), axis=1)
        tau = np.maximum(tol.jump_floor, tol.jump_factor * dxi * self.smooth_u)
        dup = dxi == 0.0
        self.jump_cells = np.flatnonzero((dup & (du > 0.0)) | (~dup & (du > tau)))
        in_sec = self.sector >= 0
        steps = [np.diff(self.xi[self.sector == a]) for a in range(len(bg.lambdas))]
        self.resolution = [float(np.min(s[s > 0])) if np.any(s > 0) else np.inf for s in steps]
        self.in_sector = in_sec


def _smooth_bounds(system):
    """Largest ``|dU/dxi|`` and ``|dV/dxi|`` of a simple wave at the background."""
    bg = background(system)
    bu, bv = 0.0, 0.0
    es = bg.structure
    ax = system.jac_x(system.background)
    from .pencil import lambda_derivatives
    for a in bg.families(GNL):
        r = es.groups[a].right[:, 0]
        rate = abs(lambda_derivatives(system, es, a)[0])
        bv = max(bv, np.linalg.norm(r) / rate)
        bu = max(bu, np.max(np.abs(np.linalg.solve(ax, r))) / rate)
    return bu, bv


# -- constancy ------------------------------------------------------------------

@dataclass
class ConstancyResult:
    passed: bool
    oscillation: float
    violations: list
    far_field: float = 0.0


def _regions(mask):
    """Maximal runs ``(start, stop)`` of True values."""
    idx = np.flatnonzero(np.diff(np.concatenate([[0], mask.astype(int), [0]])))
    return list(zip(idx[::2], idx[1::2]))


def verify_constancy(profile: Profile, sectors: SectorMap, tol: float = 1e-9,
                     limits=None) -> ConstancyResult:
    """Oscillation of ``U`` outside the union of sectors (per connected region).

    ``limits = (ul, ur)`` additionally compares the first and last rows
    with the expected far-field states.
    """
    outside = sectors.sector_of(profile.xi) < 0
    osc, bad = 0.0, []
    for start, stop in _regions(outside):
        block = profile.states[start:stop]
        dev = np.max(np.abs(block - block[0]), axis=1)
        o = float(dev.max())
        osc = max(osc, o)
        if o > tol:
            rows = np.flatnonzero(dev > tol) + start
            bad.append([float(profile.xi[max(rows[0] - 1, start)]), float(profile.xi[rows[-1]])])
    far = 0.0
    if limits is not None:
        far = max(float(np.max(np.abs(profile.states[0] - np.asarray(limits[0])))),
                  float(np.max(np.abs(profile.states[-1] - np.asarray(limits[1])))))
        if far > tol:
            bad.append([float(profile.xi[0]), float(profile.xi[-1])])
    return ConstancyResult(passed=not bad, oscillation=osc, violations=bad, far_field=far)


# -- classification ----------------------------------------------------------------

@dataclass
class DetectedWave:
    """A wave found in a profile."""

    family: int
    kind: str
    xi_lo: float
    xi_hi: float
    strength: list
    rows: tuple
    sector: int
    matched: float | None = None
    rh_residual: float = 0.0
    entropy_jump: float = 0.0
    leaf_residual: float | None = 0.0
    lax: bool | None = None
    anomaly: str | None = None
    isolation: float | None = None

    def to_dict(self):
        d = {"family": int(self.family), "kind": self.kind, "xi_lo": float(self.xi_lo),
             "xi_hi": float(self.xi_hi), "strength": [float(x) for x in self.strength],
             "rows": [int(r) for r in self.rows], "sector": int(self.sector),
             "rh_residual": float(self.rh_residual), "entropy_jump": float(self.entropy_jump),
             "leaf_residual": None if self.leaf_residual is None else float(self.leaf_residual),
             "matched_eigenvalue": None if self.matched is None else float(self.matched),
             "lax": self.lax, "anomaly": self.anomaly,
             "isolation": None if self.isolation is None else float(self.isolation)}
        if self.isolation is not None and self.strength:
            d["isolation_ratio"] = float(self.isolation / max(abs(x) for x in self.strength))
        return d


@dataclass
class Classification:
    """Waves detected in a profile together with the underlying analysis."""

    analysis: ProfileAnalysis
    waves: list = field(default_factory=list)

    def __iter__(self):
        return iter(self.waves)

    def __len__(self):
        return len(self.waves)

    @property
    def anomalies(self):
        return [w for w in self.waves if w.anomaly]


def _jump_speed(v_l, v_r, f_l, f_r, lo, hi):
    if lo == hi:
        return lo
    dv = v_r - v_l
    xi = float(dv @ (f_r - f_l) / (dv @ dv))
    return min(max(xi, lo), hi)


def _isolation(an: ProfileAnalysis, k: int, tol_const: float) -> float:
    """Width of the constant neighborhoods on both sides of the jump in cell ``k`` (smaller one).

    A side that stays constant up to the end of the profile counts up to that end,
    so the value is a lower bound there.
    """
    left = np.flatnonzero(np.max(np.abs(an.u[:k + 1] - an.u[k]), axis=1) > tol_const)
    right = np.flatnonzero(np.max(np.abs(an.u[k + 1:] - an.u[k + 1]), axis=1) > tol_const)
    lo = an.xi[left[-1] + 1] if left.size else an.xi[0]
    hi = an.xi[k + right[0]] if right.size else an.xi[-1]
    return float(min(an.xi[k] - lo, hi - an.xi[k + 1]))


def _classify_jump(an: ProfileAnalysis, k: int) -> DetectedWave:
    system, bg, sec = an.system, an.bg, an.sectors
    ul, ur = an.u[k], an.u[k + 1]
    xi = _jump_speed(an.v[k], an.v[k + 1], an.f[k], an.f[k + 1], an.xi[k], an.xi[k + 1])
    anomaly = None
    try:
        lam_hat = np.sort(harten_lax_average_u(system, ul, ur).eigenvalues.real)
    except SelfSimError as exc:
        lam_hat = bg.lambdas
        anomaly = f"averaged matrix unavailable ({exc})"
    j = int(np.argmin(np.abs(lam_hat - xi)))
    family = int(np.argmin(np.abs(bg.lambdas - lam_hat[j])))
    sector = int(sec.sector_of(np.array([xi]))[0])
    if anomaly is None and abs(lam_hat[j] - xi) > sec.delta_s:
        anomaly = "jump speed matches no eigenvalue of the averaged matrix"
    elif anomaly is None and sector != family:
        anomaly = "jump lies outside the sector of its family"
    kind = CONTACT if bg.kinds[family] == LD else SHOCK
    res = float(np.max(np.abs(rh_residual(system, ul, ur, xi))))
    ent = entropy_jump(system, ul, ur, xi)
    dv = an.v[k + 1] - an.v[k]
    leaf_res, lax, iso = 0.0, None, None
    if kind == CONTACT:
        rows = eigenstructure(system, ul).groups[family].left
        strength = rows @ dv
        try:
            proj = intermediate_state_u(system, ul, ur, family)
            leaf_res = float(np.max(np.abs(system.flux_x(proj.state) - an.v[k + 1])))
        except SelfSimError:
            leaf_res = None
    else:
        strength = np.array([bg.structure.groups[family].left[0] @ dv])
        lam_l, lam_r = an.lam[k, family], an.lam[k + 1, family]
        if sec.half_plane == e_convexity(system):
            lax = bool(lam_r < xi < lam_l)
        else:
            lax = bool(lam_l < xi < lam_r)
        iso = _isolation(an, k, an.tol.const)
    return DetectedWave(family=family, kind=kind, xi_lo=xi, xi_hi=xi,
                        strength=list(np.atleast_1d(strength)), rows=(k, k + 1), sector=sector,
                        matched=float(lam_hat[j]), rh_residual=res, entropy_jump=ent,
                        leaf_residual=leaf_res, lax=lax, anomaly=anomaly, isolation=iso)


def _fan_runs(an: ProfileAnalysis, family: int, tol_fan: float):
    """Maximal row runs in the family's sector with ``|lambda - xi| < tol_fan``, not crossing jumps."""
    hit = (an.sector == family) & (np.abs(an.lam[:, family] - an.xi) < tol_fan)
    cut = np.zeros(len(an.xi), dtype=bool)
    cut[an.jump_cells + 1] = True
    runs = []
    for start, stop in _regions(hit):
        seg_start = start
        for r in range(start + 1, stop):
            if cut[r]:
                runs.append((seg_start, r))
                seg_start = r
        runs.append((seg_start, stop))
    return [(a, b) for a, b in runs if b - a >= 2]


def classify_profile(system: System, profile: Profile, sectors: SectorMap,
                     tol: Tolerances = Tolerances(), analysis: ProfileAnalysis | None = None
                     ) -> Classification:
    """Detect and classify the jumps and simple-wave fans of a profile."""
    an = analysis or ProfileAnalysis(system, profile, sectors, tol)
    waves = [_classify_jump(an, int(k)) for k in an.jump_cells]
    for a in an.bg.families(GNL):
        lbar = an.bg.structure.groups[a].left[0]
        for start, stop in _fan_runs(an, a, tol.fan):
            du = np.max(np.abs(an.u[stop - 1] - an.u[start]))
            if du <= tol.const:
                continue
            waves.append(DetectedWave(
                family=a, kind=SIMPLE, xi_lo=float(an.xi[start]), xi_hi=float(an.xi[stop - 1]),
                strength=[float(lbar @ (an.v[stop - 1] - an.v[start]))], rows=(start, stop - 1),
                sector=a))
    waves.sort(key=lambda w: (w.xi_lo, w.rows[0]))
    return Classification(analysis=an, waves=waves)


# -- sector rules ------------------------------------------------------------------

@dataclass
class SectorRules:
    ld_passed: bool
    gnl_passed: bool
    violations: dict
    lambda_jump: float
    f_diameter: float


def _unexplained(an: ProfileAnalysis, family: int, waves, tol_const: float):
    """Row ranges in the sector that vary without belonging to a detected wave."""
    rows = np.flatnonzero(an.sector == family)
    if rows.size == 0:
        return []
    covered = np.zeros(len(an.xi), dtype=bool)
    for w in waves:
        if w.kind == SIMPLE:
            covered[w.rows[0]:w.rows[1] + 1] = True
    cut = set((an.jump_cells + 1).tolist())
    bad = []
    seg = []

    def flush():
        if len(seg) >= 2:
            block = an.u[seg]
            dev = np.flatnonzero(np.max(np.abs(block - block[0]), axis=1) > tol_const)
            if dev.size:
                bad.append([float(an.xi[seg[max(dev[0] - 1, 0)]]), float(an.xi[seg[dev[-1]]])])

    prev = None
    for r in rows:
        if covered[r] or r in cut or (prev is not None and r != prev + 1):
            flush()
            seg = []
        if not covered[r]:
            seg.append(int(r))
        prev = r
    flush()
    return bad


def verify_sector_rules(system: System, classified: Classification, sectors: SectorMap,
                        tol: Tolerances = Tolerances()) -> SectorRules:
    """Wave-count rules per sector, ``lambda`` continuity and the fan-set size in LD sectors."""
    an = classified.analysis
    viol = {"ld_sectors": [], "gnl_sectors": []}
    lam_jump, f_diam = 0.0, 0.0
    for a, kind in enumerate(an.bg.kinds):
        in_a = [w for w in classified.waves if w.sector == a]
        rows = np.flatnonzero(an.sector == a)
        unexplained = _unexplained(an, a, in_a, tol.const)
        if kind == LD:
            if len(in_a) > 1 or any(w.kind != CONTACT for w in in_a):
                viol["ld_sectors"].append({"family": a, "rule": "more than one wave",
                                           "xi": [[w.xi_lo, w.xi_hi] for w in in_a]})
            for iv in unexplained:
                viol["ld_sectors"].append({"family": a, "rule": "state varies off the contact",
                                           "xi": [iv]})
            if rows.size >= 2:
                lam = an.lam[rows, a]
                d = float(np.max(np.abs(np.diff(lam))))
                lam_jump = max(lam_jump, d)
                if d > tol.lam_cont:
                    k = int(np.argmax(np.abs(np.diff(lam))))
                    viol["ld_sectors"].append({"family": a, "rule": "lambda discontinuous",
                                               "xi": [[float(an.xi[rows[k]]),
                                                       float(an.xi[rows[k + 1]])]]})
                h = an.resolution[a]
                tol_f = min(tol.fan, 0.25 * h)
                fset = an.xi[rows][np.abs(lam - an.xi[rows]) < tol_f]
                if fset.size:
                    diam = float(fset.max() - fset.min())
                    f_diam = max(f_diam, diam)
                    if diam >= h:
                        viol["ld_sectors"].append({"family": a, "rule": "fan set is an interval",
                                                   "xi": [[float(fset.min()), float(fset.max())]]})
        else:
            if sectors.side == FORWARD and len(in_a) > 1:
                viol["gnl_sectors"].append({"family": a, "rule": "more than one wave",
                                            "xi": [[w.xi_lo, w.xi_hi] for w in in_a]})
            if sectors.side == BACKWARD:
                for w1, w2 in zip(in_a, in_a[1:]):
                    if w1.kind == SIMPLE and w2.kind == SIMPLE:
                        viol["gnl_sectors"].append({"family": a,
                                                    "rule": "consecutive simple waves",
                                                    "xi": [[w1.xi_lo, w2.xi_hi]]})
            for iv in unexplained:
                viol["gnl_sectors"].append({"family": a, "rule": "state varies off the waves",
                                            "xi": [iv]})
    return SectorRules(ld_passed=not viol["ld_sectors"], gnl_passed=not viol["gnl_sectors"],
                       violations=viol, lambda_jump=lam_jump, f_diameter=f_diam)


# -- weak form ------------------------------------------------------------------

@dataclass
class WeakFormResult:
    max_residual: float
    max_entropy_violation: float
    residuals: np.ndarray
    entropy: np.ndarray
    pairs: np.ndarray
    worst_pairs: dict


def default_pairs(profile: Profile, sectors: SectorMap, count: int = 200, seed: int = 0,
                  jump_cells=()) -> np.ndarray:
    """Row-index pairs ``i < j``: seeded random ones plus pairs around jumps and sectors."""
    n = len(profile)
    rng = np.random.default_rng(seed)
    a = rng.integers(0, n, size=(count, 2))
    pairs = [tuple(sorted(p)) for p in a.tolist()]
    for k in jump_cells:
        pairs += [(k, k + 1), (max(k - 1, 0), min(k + 2, n - 1)), (0, min(k + 1, n - 1)),
                  (k, n - 1)]
    sec = sectors.sector_of(profile.xi)
    for c in range(len(sectors.centers)):
        rows = np.flatnonzero(sec == c)
        if rows.size:
            pairs.append((max(int(rows[0]) - 1, 0), min(int(rows[-1]) + 1, n - 1)))
    pairs.append((0, n - 1))
    pairs = sorted({p for p in pairs if p[0] < p[1]})
    return np.array(pairs, dtype=int)


def pairs_from_xi(profile: Profile, xi_pairs) -> np.ndarray:
    """Snap ``(xi_1, xi_2)`` pairs to row indices.

    Raises
    ------
    ValueError
        A value lies outside the sampled range.
    """
    xi = profile.xi
    out = []
    for x1, x2 in xi_pairs:
        for x in (x1, x2):
            if not xi[0] <= x <= xi[-1]:
                raise ValueError(f"pair value {x!r} outside the sampled range [{xi[0]}, {xi[-1]}]")
        out.append(sorted(int(np.argmin(np.abs(xi - x))) for x in (x1, x2)))
    return np.array(out, dtype=int).reshape(-1, 2)


def _cumtrapz(xi, y):
    dx = np.diff(xi)[:, None]
    inc = 0.5 * dx * (y[1:] + y[:-1])
    return np.vstack([np.zeros((1, y.shape[1])), np.cumsum(inc, axis=0)])


def verify_weak_form(system: System, profile: Profile, pairs=None, sectors: SectorMap | None = None,
                     tol: Tolerances = Tolerances(),
                     analysis: ProfileAnalysis | None = None) -> WeakFormResult:
    """Integrated weak form and entropy inequality over row pairs.

    For rows ``i < j`` the flux line is
    ``(f(V) - xi V)|_i^j + int_i^j V`` and the entropy line
    ``(q - xi e)|_i^j + int_i^j e``; the integrals use the trapezoid rule on
    the rows, which is exact on piecewise-constant stretches because jumps
    are stored as duplicated rows.  Constant offsets (the first row) are
    subtracted first; both lines are invariant under them.  The entropy
    violation is the positive part of ``half_plane * line``.

    ``pairs`` holds row-index pairs, or ``xi`` pairs when given as floats.
    """
    if sectors is None:
        sectors = analysis.sectors if analysis is not None else sector_map(system)
    if analysis is None:
        v = system.flux_batch(profile.states, 0)
        f = system.flux_batch(profile.states, 1)
        ent = system.entropy_batch(profile.states)
        jumps = np.flatnonzero(np.diff(profile.xi) == 0.0)
    else:
        v, f, ent, jumps = analysis.v, analysis.f, analysis.ent, analysis.jump_cells
    xi = profile.xi
    if pairs is None:
        pairs = default_pairs(profile, sectors, tol.pairs, tol.seed, jumps)
    else:
        pairs = np.asarray(pairs)
        if pairs.dtype.kind == "f":
            pairs = pairs_from_xi(profile, pairs)
        else:
            pairs = pairs.astype(int).reshape(-1, 2)
            if pairs.size and (pairs.min() < 0 or pairs.max() >= len(profile)):
                raise ValueError("pair row index outside the profile")
    v0 = v - v[0]
    f0 = f - f[0]
    e0 = ent[:, 1:2] - ent[0, 1]
    q0 = ent[:, 2:3] - ent[0, 2]
    g = f0 - xi[:, None] * v0
    h = q0 - xi[:, None] * e0
    cv = _cumtrapz(xi, v0)
    ce = _cumtrapz(xi, e0)
    i, j = pairs[:, 0], pairs[:, 1]
    res = np.max(np.abs((g[j] - g[i]) + (cv[j] - cv[i])), axis=1) if len(pairs) else np.zeros(0)
    line = ((h[j] - h[i]) + (ce[j] - ce[i]))[:, 0] if len(pairs) else np.zeros(0)
    viol = np.maximum(0.0, sectors.half_plane * line)
    worst = {}
    if len(pairs):
        kr, ke = int(np.argmax(res)), int(np.argmax(viol))
        worst = {"weak_form": [float(xi[i[kr]]), float(xi[j[kr]])],
                 "entropy": [float(xi[i[ke]]), float(xi[j[ke]])]}
    return WeakFormResult(max_residual=float(res.max(initial=0.0)),
                          max_entropy_violation=float(viol.max(initial=0.0)),
                          residuals=res, entropy=line, pairs=pairs, worst_pairs=worst)


# -- SBV split ------------------------------------------------------------------

@dataclass
class SBVResult:
    jump_tv: float
    lipschitz: float
    bound: float
    passed: bool


def sbv_decompose(profile: Profile, classified: Classification | None = None,
                  system: System | None = None, factor: float = 2.0) -> SBVResult:
    """Split ``V`` into detected jumps plus a remainder and bound the remainder's slope.

    Returns the total variation of the jump part (sum of ``|[V]|``) and the
    largest difference quotient of the remainder over adjacent rows.  The
    check passes when that slope stays below ``factor`` times the steepest
    simple-wave slope at the background.
    """
    if classified is not None:
        an = classified.analysis
        v, jumps, bound_v = an.v, set(int(k) for k in an.jump_cells), an.smooth_v
    else:
        if system is None:
            raise ValueError("sbv_decompose needs a classification or a system")
        v = system.flux_batch(profile.states, 0)
        jumps = set(np.flatnonzero(np.diff(profile.xi) == 0.0).tolist())
        bound_v = _smooth_bounds(system)[1]
    xi = profile.xi
    dv = np.linalg.norm(np.diff(v, axis=0), axis=1)
    dxi = np.diff(xi)
    is_jump = np.zeros(dv.size, dtype=bool)
    is_jump[list(jumps)] = True
    tv = float(dv[is_jump].sum())
    smooth = ~is_jump & (dxi > 0)
    lip = float(np.max(dv[smooth] / dxi[smooth], initial=0.0))
    bound = factor * bound_v
    return SBVResult(jump_tv=tv, lipschitz=lip, bound=bound, passed=bool(lip <= bound))


# -- full report ------------------------------------------------------------------

FLAG_NAMES = ("constancy", "classification", "ld_sectors", "gnl_sectors", "weak_form",
              "entropy", "sbv")


@dataclass
class StructureReport:
    """Self-contained verification report."""

    sectors: SectorMap
    waves: list
    residuals: dict
    sbv: dict
    flags: dict
    violations: dict
    tolerances: dict
    grid: dict
    system: dict

    @property
    def passed(self) -> bool:
        return all(self.flags.values())

    def failed(self):
        return [k for k, v in self.flags.items() if not v]

    def to_dict(self) -> dict:
        return {"system": self.system, "side": self.sectors.side,
                "half_plane": int(self.sectors.half_plane), "sectors": self.sectors.to_dict(),
                "waves": [w.to_dict() for w in self.waves], "residuals": self.residuals,
                "sbv": self.sbv, "flags": self.flags, "passed": self.passed,
                "violations": self.violations, "tolerances": self.tolerances, "grid": self.grid}


def verify_profile(system: System, profile: Profile, sectors: SectorMap | None = None,
                   side: str = FORWARD, tol: Tolerances = Tolerances(), pairs=None,
                   limits=None) -> StructureReport:
    """Run every check on ``profile`` and assemble the report."""
    if sectors is None:
        sectors = sector_map(system, side=side)
    an = ProfileAnalysis(system, profile, sectors, tol)
    const = verify_constancy(profile, sectors, tol.const, limits)
    classified = classify_profile(system, profile, sectors, tol, analysis=an)
    rules = verify_sector_rules(system, classified, sectors, tol)
    weak = verify_weak_form(system, profile, pairs, sectors, tol, analysis=an)
    sbv = sbv_decompose(profile, classified, factor=tol.sbv_factor)

    jumps = [w for w in classified.waves if w.kind in (SHOCK, CONTACT)]
    rh_max = max((w.rh_residual for w in jumps), default=0.0)
    leaf_max = max((w.leaf_residual for w in jumps
                    if w.kind == CONTACT and w.leaf_residual is not None), default=0.0)
    ent_jump = max((max(0.0, sectors.half_plane * w.entropy_jump) for w in jumps), default=0.0)
    lax_bad = [w for w in jumps if w.kind == SHOCK and w.lax is False]

    viol = {"constancy": const.violations,
            "classification": [{"xi": [w.xi_lo, w.xi_hi], "reason": w.anomaly}
                               for w in classified.anomalies],
            "ld_sectors": rules.violations["ld_sectors"],
            "gnl_sectors": rules.violations["gnl_sectors"],
            "weak_form": [], "entropy": [], "sbv": []}
    if weak.max_residual >= tol.weak:
        viol["weak_form"].append({"rule": "integrated weak form",
                                  "xi": [weak.worst_pairs["weak_form"]]})
    for w in jumps:
        if w.rh_residual >= tol.rh:
            viol["weak_form"].append({"rule": "Rankine-Hugoniot", "xi": [[w.xi_lo, w.xi_hi]]})
        if w.kind == CONTACT and (w.leaf_residual is None or w.leaf_residual >= tol.leaf):
            viol["weak_form"].append({"rule": "contact states not on one leaf",
                                      "xi": [[w.xi_lo, w.xi_hi]]})
    if weak.max_entropy_violation > tol.entropy:
        viol["entropy"].append({"rule": "integrated entropy inequality",
                                "xi": [weak.worst_pairs["entropy"]]})
    for w in jumps:
        if sectors.half_plane * w.entropy_jump > tol.entropy:
            viol["entropy"].append({"rule": "entropy jump sign", "xi": [[w.xi_lo, w.xi_hi]]})
    for w in lax_bad:
        viol["entropy"].append({"rule": "Lax inequalities", "xi": [[w.xi_lo, w.xi_hi]]})
    if not sbv.passed:
        viol["sbv"].append({"rule": "continuous part not Lipschitz at grid scale",
                            "lipschitz": sbv.lipschitz, "bound": sbv.bound})
    flags = {name: not viol[name] for name in FLAG_NAMES}

    residuals = {"constancy": const.oscillation, "far_field": const.far_field,
                 "weak_form": weak.max_residual, "entropy_violation": weak.max_entropy_violation,
                 "entropy_jump_violation": ent_jump, "rh_max": rh_max, "leaf_max": leaf_max,
                 "lambda_jump_max": rules.lambda_jump, "fan_set_diameter": rules.f_diameter,
                 "pairs": int(len(weak.pairs))}
    residuals = {k: (float(v) if not isinstance(v, int) else v) for k, v in residuals.items()}
    finite = {k: (v if np.isfinite(v) else 1e300) for k, v in residuals.items()}
    grid = {"rows": int(len(profile)), "jumps": int(len(an.jump_cells)),
            "resolution": [float(r) if np.isfinite(r) else 0.0 for r in an.resolution],
            "xi_min": float(profile.xi[0]), "xi_max": float(profile.xi[-1])}
    return StructureReport(sectors=sectors, waves=classified.waves, residuals=finite,
                           sbv={"jump_tv": sbv.jump_tv, "lipschitz": sbv.lipschitz,
                                "bound": sbv.bound},
                           flags=flags, violations=viol, tolerances=asdict(tol), grid=grid,
                           system=system.describe())
