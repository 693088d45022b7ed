"""Sampled self-similar profiles and their CSV representation.

A profile is a table of rows ``(xi, U)`` with ``xi`` nondecreasing; a jump
is encoded by two consecutive rows sharing the same ``xi`` and holding the
left and right states.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .errors import ProfileFormatError


@dataclass(frozen=True, eq=False)
class Profile:
    """Rows ``xi[k], states[k]``.

    Attributes
    ----------
    xi : ndarray, shape (k,)
    states : ndarray, shape (k, m)
    """

    xi: np.ndarray
    states: np.ndarray

    def __post_init__(self):
        xi = np.asarray(self.xi, dtype=float)
        states = np.atleast_2d(np.asarray(self.states, dtype=float))
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "states", states)
        validate(xi, states)

    def __len__(self):
        return self.xi.size

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    @property
    def jump_rows(self) -> np.ndarray:
        """Indices ``k`` with ``xi[k] == xi[k + 1]`` (explicit jumps)."""
        return np.flatnonzero(np.diff(self.xi) == 0.0)

    def to_csv(self) -> str:
        return dumps(self)

    def replace_states(self, states) -> "Profile":
        return Profile(self.xi.copy(), states)


def validate(xi, states):
    if xi.ndim != 1 or states.ndim != 2 or states.shape[0] != xi.size:
        raise ProfileFormatError("profile needs one state row per xi value")
    if xi.size < 2:
        raise ProfileFormatError("profile needs at least two rows")
    if not (np.all(np.isfinite(xi)) and np.all(np.isfinite(states))):
        raise ProfileFormatError("profile contains non-finite values")
    d = np.diff(xi)
    if np.any(d < 0):
        k = int(np.flatnonzero(d < 0)[0])
        raise ProfileFormatError(f"xi decreases at row {k + 2}: {float(xi[k])!r} -> {float(xi[k + 1])!r}")
    dup = d == 0
    if np.any(dup[1:] & dup[:-1]):
        raise ProfileFormatError("a duplicated xi value appears more than twice")


def dumps(profile: Profile) -> str:
    m = profile.dim
    out = io.StringIO()
    out.write(",".join(["xi"] + [f"u{i + 1}" for i in range(m)]) + "\n")
    for x, u in zip(profile.xi, profile.states):
        out.write(",".join("%.17g" % v for v in (x, *u)) + "\n")
    return out.getvalue()


def loads(text: str, dim: int | None = None) -> Profile:
    """Parse CSV text.

    Raises
    ------
    ProfileFormatError
        Bad header, ragged or non-numeric rows, or ordering violations.
    """
    rows = list(csv.reader(io.StringIO(text)))
    rows = [r for r in rows if r and any(c.strip() for c in r)]
    if not rows:
        raise ProfileFormatError("empty profile")
    header = [c.strip() for c in rows[0]]
    m = len(header) - 1
    if m < 1 or header != ["xi"] + [f"u{i + 1}" for i in range(m)]:
        raise ProfileFormatError(f"bad header {','.join(header)!r}; expected xi,u1,...,um")
    if dim is not None and m != dim:
        raise ProfileFormatError(f"profile has {m} state columns, system needs {dim}")
    data = []
    for lineno, r in enumerate(rows[1:], start=2):
        if len(r) != m + 1:
            raise ProfileFormatError(f"row {lineno} has {len(r)} fields, expected {m + 1}")
        try:
            data.append([float(c) for c in r])
        except ValueError as exc:
            raise ProfileFormatError(f"row {lineno}: {exc}") from exc
    arr = np.array(data, dtype=float).reshape(-1, m + 1)
    return Profile(arr[:, 0], arr[:, 1:])


def write_csv(profile: Profile, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(dumps(profile))


def read_csv(path, dim: int | None = None) -> Profile:
    try:
        with open(path, newline="") as fh:
            text = fh.read()
    except OSError as exc:
        raise ProfileFormatError(f"cannot read profile {path}: {exc}") from exc
    return loads(text, dim)
