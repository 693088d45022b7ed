"""Command-line front end.

Settings come from built-in defaults, then an optional flat ``key = value``
config file (``--config``), then command-line flags.  The output directory
defaults to ``$SELFSIM_OUTPUT_DIR`` or ``./selfsim-out``.

Exit codes: 0 all checks pass, 1 verification failure, 2 solver or
composition failure, 3 malformed input or configuration.
"""

from __future__ import annotations

import argparse
import configparser
import dataclasses
import json
import logging
import os
import platform
import sys
import time
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .averaging import e_convexity
from .errors import (CompositionError, ConfigurationError, DomainError, OutOfBallError,
                     ProfileFormatError, SelfSimError, SolverError)
from .kernels import BACKEND
from .pencil import LD, background
from .profile import dumps, loads, read_csv
from .riemann import (BACKWARD, FORWARD, compose_fan, constant_fan, fan_profile,
                      forward_endpoint, solve_forward, strength_size)
from .structure import Tolerances, build_grid, sector_map, verify_profile
from .systems import make_system
from .waves import CONTACT, SHOCK, SIMPLE

log = logging.getLogger("selfsim")

EXIT_OK, EXIT_VERIFY, EXIT_SOLVER, EXIT_INPUT = 0, 1, 2, 3
OUTPUT_ENV = "SELFSIM_OUTPUT_DIR"
WAVE_KINDS = (SHOCK, SIMPLE, CONTACT)
SECTION = "selfsim"
TOL_PREFIX = "tol_"


@dataclasses.dataclass
class RunConfig:
    system: str = "euler"
    gamma: float = 1.4
    mach: float = 2.0
    epsilon: float | None = None
    left_state: str = "background"
    right_state: str = ""
    strengths: str = ""
    waves: str = ""
    side: str = FORWARD
    grid: int = 4096
    gap_points: int = 32
    margin: float | None = None
    seed: int = 0
    pairs: int = 200
    jacobian: str = "fd"
    newton_seed: str = "zero"
    output: str = ""
    tolerances: dict = dataclasses.field(default_factory=dict)

    def validate(self) -> None:
        if self.system not in ("euler", "linear"):
            raise ConfigurationError(f"unknown system {self.system!r}")
        if self.system == "euler" and abs(self.mach) <= 1.0:
            raise ConfigurationError(f"background is not supersonic (M0 = {self.mach:g})")
        if self.epsilon is not None and not self.epsilon > 0:
            raise ConfigurationError("epsilon must be positive")
        if self.grid < 64:
            raise ConfigurationError("grid needs at least 64 points per sector")
        if self.side not in (FORWARD, BACKWARD):
            raise ConfigurationError(f"side must be {FORWARD!r} or {BACKWARD!r}")
        if self.jacobian not in ("fd", "frozen", "broyden"):
            raise ConfigurationError(f"unknown jacobian {self.jacobian!r}")
        if self.newton_seed not in ("zero", "linear"):
            raise ConfigurationError(f"unknown newton_seed {self.newton_seed!r}")
        Tolerances().replace(**self.tolerances)

    def echo(self) -> dict:
        d = dataclasses.asdict(self)
        d.pop("output")
        return d


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}
_TOL_FIELDS = {f.name: f.type for f in dataclasses.fields(Tolerances)}
_CASTS = {"float": float, "int": int, "str": str}


def _cast(key, value):
    if key.startswith(TOL_PREFIX):
        name = key[len(TOL_PREFIX):]
        if name not in _TOL_FIELDS:
            raise ConfigurationError(f"unknown tolerance key {key!r}")
        typ, optional = _CASTS[str(_TOL_FIELDS[name])], False
    elif key in _FIELDS and key != "tolerances":
        spec = str(_FIELDS[key].type)
        typ, optional = _CASTS[spec.split(" |")[0]], spec.endswith("| None")
    else:
        raise ConfigurationError(f"unknown config key {key!r}")
    if isinstance(value, str):
        value = value.strip()
        if optional and value in ("", "none", "None"):
            return None
    try:
        return typ(value)
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"bad value for {key}: {value!r}") from exc


def read_config_file(path) -> dict:
    """Flat ``key = value`` file; an optional ``[selfsim]`` header is accepted."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    parser = configparser.ConfigParser(interpolation=None)
    try:
        if text.lstrip().startswith("["):
            parser.read_string(text)
        else:
            parser.read_string(f"[{SECTION}]\n" + text)
    except configparser.Error as exc:
        raise ConfigurationError(f"malformed config {path}: {exc}") from exc
    if not parser.has_section(SECTION):
        raise ConfigurationError(f"config {path} has no [{SECTION}] section")
    return dict(parser.items(SECTION))


def build_config(args) -> RunConfig:
    values = {}
    if args.config:
        values.update(read_config_file(args.config))
    for key in _FIELDS:
        v = getattr(args, key, None)
        if v is not None and key != "tolerances":
            values[key] = v
    for item in args.tol or ():
        key, sep, val = item.partition("=")
        if not sep:
            raise ConfigurationError(f"--tol expects NAME=VALUE, got {item!r}")
        values[TOL_PREFIX + key.strip()] = val
    cfg = RunConfig()
    for key, val in values.items():
        cast = _cast(key, val)
        if key.startswith(TOL_PREFIX):
            cfg.tolerances[key[len(TOL_PREFIX):]] = cast
        else:
            setattr(cfg, key, cast)
    if "pairs" not in cfg.tolerances:
        cfg.tolerances["pairs"] = cfg.pairs
    if "seed" not in cfg.tolerances:
        cfg.tolerances["seed"] = cfg.seed
    if not cfg.output:
        cfg.output = os.environ.get(OUTPUT_ENV) or "selfsim-out"
    cfg.validate()
    return cfg


def system_from(cfg: RunConfig):
    params = {"gamma": cfg.gamma, "mach": cfg.mach}
    if cfg.epsilon is not None:
        params["epsilon"] = cfg.epsilon
    return make_system(cfg.system, **params)


def parse_vector(text: str, dim: int | None = None) -> np.ndarray:
    try:
        vec = np.array([float(x) for x in text.replace(";", ",").split(",") if x.strip()])
    except ValueError as exc:
        raise ConfigurationError(f"bad vector {text!r}") from exc
    if dim is not None and vec.size != dim:
        raise ConfigurationError(f"expected {dim} components, got {vec.size} in {text!r}")
    return vec


def parse_state(system, text: str) -> np.ndarray:
    if text.strip() in ("", "background"):
        return system.background.copy()
    return parse_vector(text, system.dim)


def parse_waves(text: str):
    """``family:kind:strength[,strength...]`` items separated by ``;``."""
    out = []
    for item in filter(None, (t.strip() for t in text.split(";"))):
        parts = [p.strip() for p in item.split(":")]
        if len(parts) != 3:
            raise ConfigurationError(f"wave spec {item!r} is not family:kind:strength")
        try:
            family = int(parts[0])
        except ValueError as exc:
            raise ConfigurationError(f"bad family in {item!r}") from exc
        if parts[1] not in WAVE_KINDS:
            raise ConfigurationError(f"unknown wave kind {parts[1]!r} in {item!r}")
        st = parse_vector(parts[2])
        if st.size == 0:
            raise ConfigurationError(f"missing strength in {item!r}")
        out.append((family, parts[1], st if st.size > 1 else float(st[0])))
    if not out:
        raise ConfigurationError("no waves given")
    return out


# -- output --------------------------------------------------------------------

def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.bool_):
        return bool(obj)
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def to_json(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, default=_json_default, allow_nan=False) + "\n"


def provenance(cfg, started: float) -> dict:
    return {"version": __version__, "backend": BACKEND, "python": platform.python_version(),
            "numpy": np.__version__, "scipy": scipy.__version__,
            "wall_time": round(time.perf_counter() - started, 6),
            "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z")}


def _document(command, cfg, status, exit_code, started, **extra):
    doc = {"command": command, "status": status, "exit_code": exit_code,
           "config": cfg.echo() if cfg else None, "provenance": provenance(cfg, started)}
    doc.update(extra)
    return doc


def _write(cfg, name, text):
    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    path.write_text(text)
    return path


def _sectors(cfg, system):
    return sector_map(system, side=cfg.side)


def _verify(cfg, system, profile, sectors, limits=None):
    tol = Tolerances().replace(**cfg.tolerances)
    return verify_profile(system, profile, sectors, side=cfg.side, tol=tol, limits=limits)


def _profile_and_report(command, cfg, system, fan, started):
    sectors = _sectors(cfg, system)
    edges = [x for w in fan.waves for x in (w.xi_lo, w.xi_hi)]
    grid = build_grid(sectors, cfg.grid, cfg.gap_points, cfg.margin, breakpoints=edges)
    csv_text = dumps(fan_profile(fan, grid))
    # verify what a reader of the CSV sees
    profile = loads(csv_text, system.dim)
    report = _verify(cfg, system, profile, sectors, limits=(fan.ul, fan.ur))
    code = EXIT_OK if report.passed else EXIT_VERIFY
    csv_path = _write(cfg, "profile.csv", csv_text)
    doc = _document(command, cfg, "pass" if report.passed else "fail", code, started,
                    fan=fan.to_dict(), structure=report.to_dict(), profile=str(csv_path.name))
    _write(cfg, "report.json", to_json(doc))
    return doc, code


# -- commands ------------------------------------------------------------------

def cmd_eigs(cfg: RunConfig, started: float):
    system = system_from(cfg)
    bg = background(system)
    fx = np.sort(np.linalg.eigvals(system.jac_x(system.background)).real)
    sectors = _sectors(cfg, system)
    doc = _document("eigs", cfg, "pass", EXIT_OK, started, eigenstructure={
        "lambdas": [float(x) for x in bg.lambdas],
        "multiplicities": [int(p) for p in bg.multiplicities],
        "kinds": list(bg.kinds),
        "fx_eigenvalues": [float(x) for x in fx],
        "convexity_sign": int(e_convexity(system)),
        "min_gap": float(bg.min_gap),
        "sectors": sectors.to_dict()})
    return doc, EXIT_OK


def cmd_solve(cfg: RunConfig, started: float):
    system = system_from(cfg)
    ul = parse_state(system, cfg.left_state)
    if cfg.strengths:
        if cfg.right_state:
            raise ConfigurationError("give either right_state or strengths, not both")
        ur = forward_endpoint(system, ul, parse_vector(cfg.strengths, strength_size(system)))
    else:
        ur = parse_state(system, cfg.right_state)
    for name, u in (("left", ul), ("right", ur)):
        if not system.in_ball(u):
            raise ConfigurationError(f"{name} state is outside the phase-space ball")
    if np.array_equal(ul, ur):
        fan = constant_fan(system, ul)
    else:
        fan = solve_forward(system, ul, ur, jacobian=cfg.jacobian, seed=cfg.newton_seed)
    return _profile_and_report("solve", cfg, system, fan, started)


def cmd_compose(cfg: RunConfig, started: float):
    system = system_from(cfg)
    ul = parse_state(system, cfg.left_state)
    if not system.in_ball(ul):
        raise ConfigurationError("left state is outside the phase-space ball")
    spec = parse_waves(cfg.waves)
    kinds = background(system).kinds
    for family, kind, _ in spec:
        if not 0 <= family < len(kinds):
            raise ConfigurationError(f"family {family} out of range 0..{len(kinds) - 1}")
        if (kind == CONTACT) != (kinds[family] == LD):
            raise ConfigurationError(f"a {kind} wave needs a {'LD' if kind == CONTACT else 'GNL'} "
                                     f"family; family {family} is {kinds[family]}")
    fan = compose_fan(system, ul, spec, side=cfg.side)
    return _profile_and_report("compose", cfg, system, fan, started)


def cmd_verify(cfg: RunConfig, started: float, profile_path):
    system = system_from(cfg)
    profile = read_csv(profile_path, system.dim)
    try:
        report = _verify(cfg, system, profile, _sectors(cfg, system))
    except DomainError as exc:
        raise ProfileFormatError(f"profile state outside the admissible domain: {exc}") from exc
    code = EXIT_OK if report.passed else EXIT_VERIFY
    doc = _document("verify", cfg, "pass" if report.passed else "fail", code, started,
                    structure=report.to_dict(), profile=str(profile_path))
    _write(cfg, "report.json", to_json(doc))
    return doc, code


def cmd_report(report_path):
    """Summarize an existing report; exit code follows its recorded outcome."""
    try:
        doc = json.loads(Path(report_path).read_text())
    except (OSError, ValueError) as exc:
        raise ProfileFormatError(f"cannot read report {report_path}: {exc}") from exc
    if not isinstance(doc, dict) or "status" not in doc:
        raise ProfileFormatError(f"{report_path} is not a selfsim report")
    lines = [f"command: {doc.get('command')}  status: {doc['status']}"]
    structure = doc.get("structure")
    if structure:
        for name, ok in structure["flags"].items():
            lines.append(f"  {'PASS' if ok else 'FAIL'}  {name}")
        for w in structure["waves"]:
            lines.append(f"  wave family {w['family']} {w['kind']} "
                         f"xi [{w['xi_lo']:.10g}, {w['xi_hi']:.10g}]")
    if doc.get("error"):
        lines.append(f"  error: {doc['error']['type']}: {doc['error']['message']}")
    code = int(doc.get("exit_code", EXIT_OK if doc["status"] == "pass" else EXIT_VERIFY))
    return "\n".join(lines) + "\n", code


# -- argument parsing ------------------------------------------------------------

def _common(parser):
    g = parser.add_argument_group("run configuration")
    g.add_argument("--config", help="flat key = value config file")
    g.add_argument("--system", choices=("euler", "linear"))
    g.add_argument("--gamma", type=float)
    g.add_argument("--mach", type=float, help="background Mach number M0")
    g.add_argument("--epsilon", type=float, help="phase-space ball radius")
    g.add_argument("--left-state", dest="left_state", help="U components or 'background'")
    g.add_argument("--right-state", dest="right_state")
    g.add_argument("--strengths", help="stacked forward strengths defining the right state")
    g.add_argument("--waves", help="family:kind:strength items separated by ';'")
    g.add_argument("--side", choices=(FORWARD, BACKWARD))
    g.add_argument("--grid", type=int, help="points per sector")
    g.add_argument("--gap-points", dest="gap_points", type=int)
    g.add_argument("--margin", type=float)
    g.add_argument("--seed", type=int)
    g.add_argument("--pairs", type=int, help="random pairs for the weak form")
    g.add_argument("--jacobian", choices=("fd", "frozen", "broyden"))
    g.add_argument("--newton-seed", dest="newton_seed", choices=("zero", "linear"))
    g.add_argument("--output", help=f"output directory (default ${OUTPUT_ENV} or ./selfsim-out)")
    g.add_argument("--tol", action="append", metavar="NAME=VALUE",
                   help="tolerance override, e.g. --tol const=1e-9 (repeatable)")
    g.add_argument("-v", "--verbose", action="store_true")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="selfsim", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (("eigs", "eigenstructure of the background state"),
                        ("solve", "solve a forward Riemann problem and verify its profile"),
                        ("compose", "compose waves from a left state and verify the profile")):
        _common(sub.add_parser(name, help=help_))
    p = sub.add_parser("verify", help="verify a profile CSV")
    p.add_argument("profile")
    _common(p)
    p = sub.add_parser("report", help="summarize a report JSON")
    p.add_argument("report")
    p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    started = time.perf_counter()
    if args.command == "report":
        try:
            text, code = cmd_report(args.report)
        except ProfileFormatError as exc:
            print(f"selfsim: {exc}", file=sys.stderr)
            return EXIT_INPUT
        sys.stdout.write(text)
        return code

    cfg = None
    try:
        cfg = build_config(args)
        if args.command == "eigs":
            doc, code = cmd_eigs(cfg, started)
        elif args.command == "solve":
            doc, code = cmd_solve(cfg, started)
        elif args.command == "compose":
            doc, code = cmd_compose(cfg, started)
        else:
            doc, code = cmd_verify(cfg, started, args.profile)
    except (ConfigurationError, ProfileFormatError) as exc:
        print(f"selfsim: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (SolverError, CompositionError, OutOfBallError, SelfSimError) as exc:
        doc = _document(args.command, cfg, "error", EXIT_SOLVER, started,
                        error={"type": type(exc).__name__, "message": str(exc)})
        text = to_json(doc)
        try:
            _write(cfg, "report.json", text)
        except OSError as err:
            log.warning("could not write diagnostic report: %s", err)
        sys.stdout.write(text)
        return EXIT_SOLVER
    sys.stdout.write(to_json(doc))
    return code


if __name__ == "__main__":
    sys.exit(main())
