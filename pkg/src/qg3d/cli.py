"""Command-line front end.

    qg3d <validate|dispersion|bifpoints|eigenfun|branch|crosscheck>
         [--config cfg.json] [overrides...]

Every run writes a resolved-config echo next to its outputs so results
are reproducible from the artifacts alone.  Numeric CSV output uses 17
significant digits and LF line endings; reruns with identical
configuration produce byte-identical files.

Exit codes: 0 success, 1 I/O or parse failure, 2 validation/config
failure, 3 solver failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import nonlinear, spectral
from .errors import AccuracyError, DomainError, GeometryError, SolverError
from .kernel import KernelContext, assemble_kernel_matrix
from .linop import cross_validate
from .profiles import arc_chord_constants, make_profile, profile_from_csv, validate_profile

EXIT_OK = 0
EXIT_IO = 1
EXIT_VALIDATION = 2
EXIT_SOLVER = 3


@dataclass
class RunConfig:
    """Resolved run configuration (JSON file merged with CLI overrides)."""

    profile: str = "sphere"
    phi_nodes: int = 96
    theta_nodes: int = 8
    de_level: int = 9
    direct_level: int = 3
    n_modes: int = 4
    eig_tol: float = 1e-10
    newton_tol: float = 1e-8
    quad_tol: float = 1e-10
    guard: float = 1e-3
    modes: list = field(default_factory=lambda: [2, 3, 4, 5, 6])
    omega_grid: list = field(default_factory=list)
    omega: float | None = None
    s_max: float = 0.03
    steps: int = 10
    axis_z: list = field(default_factory=lambda: [-0.5, 0.0, 0.3])
    outdir: str = "out"
    format: str = "csv"
    threads: int = 1

    def check(self):
        if self.phi_nodes < 8:
            raise DomainError("config: phi_nodes must be >= 8")
        if self.theta_nodes < 2:
            raise DomainError("config: theta_nodes must be >= 2")
        for name in ("eig_tol", "newton_tol", "quad_tol", "guard"):
            v = getattr(self, name)
            if not 0.0 < v < 1e-2:
                raise DomainError(f"config: {name} must lie in (0, 1e-2), got {v}")
        if self.format not in ("csv", "json"):
            raise DomainError(f"config: format must be csv or json, got {self.format}")
        if self.steps < 1:
            raise DomainError("config: steps must be >= 1")


def _fmt(x) -> str:
    return f"{float(x):.17g}"


def _write_csv(path: Path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) if isinstance(v, (float, np.floating)) else str(v) for v in row))
    path.write_text("\n".join(lines) + "\n", newline="\n")


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", newline="\n")


def _load_profile(spec: str):
    if spec == "sphere":
        return make_profile("sphere")
    if spec.startswith("spheroid:"):
        try:
            a = float(spec.split(":", 1)[1])
        except ValueError:
            raise DomainError(f"profile spec {spec!r}: bad semi-axis") from None
        return make_profile("spheroid", a=a)
    if spec.startswith("file:"):
        return profile_from_csv(spec.split(":", 1)[1])
    raise DomainError(f"unknown profile spec {spec!r} (expected sphere | spheroid:a | file:path)")


def _context(cfg: RunConfig, profile) -> KernelContext:
    return KernelContext(profile, cfg.phi_nodes, cfg.de_level, cfg.direct_level, cfg.guard)


def _echo_config(cfg: RunConfig, outdir: Path, command: str) -> None:
    _write_json(outdir / f"{command}_config.json", asdict(cfg))


def cmd_validate(cfg: RunConfig, profile, outdir: Path) -> int:
    report = validate_profile(profile, max(cfg.phi_nodes, 64))
    c_lo, c_hi = arc_chord_constants(profile)
    ctx = _context(cfg, profile)
    payload = {
        "profile": cfg.profile,
        "h1_ok": report.h1_ok,
        "h2_ok": report.h2_ok,
        "h3_ok": report.h3_ok,
        "endpoint_values": list(report.endpoint_values),
        "interior_min": report.interior_min,
        "h2_lo": report.h2_lo,
        "h2_hi": report.h2_hi,
        "sym_defect": report.sym_defect,
        "arc_chord_lo": c_lo,
        "arc_chord_hi": c_hi,
        "kappa": ctx.kappa,
        "passed": report.passed,
    }
    _write_json(outdir / "validate.json", payload)
    return EXIT_OK if report.passed else EXIT_VALIDATION


def cmd_dispersion(cfg: RunConfig, profile, outdir: Path) -> int:
    ctx = _context(cfg, profile)
    guard_hi = ctx.kappa * (1.0 - cfg.guard)
    for om in cfg.omega_grid:
        if not om < guard_hi:
            raise DomainError(f"dispersion: omega={om} not below kappa - guard = {guard_hi}")
    curve = spectral.dispersion_scan(ctx, cfg.modes, cfg.omega_grid, threads=cfg.threads)
    _write_csv(outdir / "dispersion.csv", ["n", "omega", "lambda", "iterations", "residual"], curve.rows)
    _write_csv(
        outdir / "dispersion_anomalies.csv",
        ["kind", "first", "second", "at"],
        [(a[0], a[1], a[2], a[3]) for a in curve.anomalies],
    )
    return EXIT_OK


def cmd_bifpoints(cfg: RunConfig, profile, outdir: Path) -> int:
    ctx = _context(cfg, profile)
    rows = []
    for m in cfg.modes:
        bp = spectral.find_bifurcation_point(ctx, m)
        rows.append((m, bp.omega_m, bp.lam, bp.bracket))
        _write_csv(
            outdir / f"eigenfun_m{m}.csv",
            ["phi", "h"],
            list(zip(ctx.nodes, bp.eigfun)),
        )
    _write_csv(outdir / "bifpoints.csv", ["m", "omega_m", "lambda", "bracket"], rows)
    return EXIT_OK


def cmd_eigenfun(cfg: RunConfig, profile, outdir: Path) -> int:
    ctx = _context(cfg, profile)
    reports = {}
    for m in cfg.modes:
        if cfg.omega is not None:
            res = spectral.largest_eigenvalue(assemble_kernel_matrix(ctx, m, cfg.omega))
            h, omega = res.eigvec, cfg.omega
        else:
            bp = spectral.find_bifurcation_point(ctx, m)
            res = spectral.largest_eigenvalue(assemble_kernel_matrix(ctx, m, bp.omega_m))
            h, omega = bp.eigfun, bp.omega_m
        _write_csv(outdir / f"eigenfun_m{m}.csv", ["phi", "h"], list(zip(ctx.nodes, h)))
        rep = spectral.eigenfunction_boundary_report(ctx, res)
        reports[str(m)] = {
            "omega": omega,
            "lambda": res.lam,
            "boundary_0": rep.value_0,
            "boundary_pi": rep.value_pi,
            "interior_max": rep.interior_max,
        }
    _write_json(outdir / "eigenfun_report.json", reports)
    return EXIT_OK


def cmd_branch(cfg: RunConfig, profile, outdir: Path) -> int:
    ctx = _context(cfg, profile)
    m = cfg.modes[0] if cfg.modes else 2
    if m < 2:
        raise DomainError(f"branch: mode m must be >= 2, got {m}")
    col = nonlinear.Collocation(ctx, m, n_modes=cfg.n_modes, n_theta=cfg.theta_nodes)
    branch = nonlinear.continue_branch(col, cfg.s_max, cfg.steps)
    theta_out = np.linspace(0.0, 2.0 * np.pi, 64, endpoint=False)
    points_meta = []
    for i, pt in enumerate(branch.points):
        axis = nonlinear.velocity_on_axis(col, pt.f, cfg.axis_z)
        vres = nonlinear.velocity_residual(col, pt.omega, pt.f)
        points_meta.append(
            {
                "s": pt.s,
                "omega": pt.omega,
                "residual": pt.residual,
                "iterations": pt.iterations,
                "axis_velocity": axis,
                "velocity_form_residual": vres,
            }
        )
        r = pt.f.radius_at_nodes(theta_out)
        rows = [
            (ctx.nodes[ip], theta_out[it], r[ip, it])
            for ip in range(ctx.n_nodes)
            for it in range(len(theta_out))
        ]
        _write_csv(outdir / f"branch_point_{i + 1:03d}.csv", ["phi", "theta", "r"], rows)
    payload = {
        "m": branch.m,
        "omega_m": branch.omega_ref,
        "s_max": cfg.s_max,
        "steps": cfg.steps,
        "newton_tol": cfg.newton_tol,
        "failed_at": branch.failed_at,
        "message": branch.message,
        "points": points_meta,
    }
    _write_json(outdir / "branch.json", payload)
    return EXIT_OK if branch.failed_at is None else EXIT_SOLVER


def cmd_crosscheck(cfg: RunConfig, profile, outdir: Path) -> int:
    ctx = _context(cfg, profile)
    results = {}
    for n in cfg.modes:
        h = np.sin(ctx.nodes) ** 2
        omega = cfg.omega if cfg.omega is not None else 0.0
        results[str(n)] = cross_validate(ctx, n, omega, h)
    _write_json(outdir / "crosscheck.json", {"profile": cfg.profile, "discrepancy": results})
    return EXIT_OK


COMMANDS = {
    "validate": cmd_validate,
    "dispersion": cmd_dispersion,
    "bifpoints": cmd_bifpoints,
    "eigenfun": cmd_eigenfun,
    "branch": cmd_branch,
    "crosscheck": cmd_crosscheck,
}


def _parse_args(argv):
    ap = argparse.ArgumentParser(prog="qg3d", description=__doc__)
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", help="JSON config file")
    ap.add_argument("--profile")
    ap.add_argument("--phi-nodes", type=int, dest="phi_nodes")
    ap.add_argument("--theta-nodes", type=int, dest="theta_nodes")
    ap.add_argument("--de-level", type=int, dest="de_level")
    ap.add_argument("--direct-level", type=int, dest="direct_level")
    ap.add_argument("--n-modes", type=int, dest="n_modes")
    ap.add_argument("--modes", help="comma-separated mode list")
    ap.add_argument("--omega-grid", dest="omega_grid", help="comma-separated Omega values")
    ap.add_argument("--omega", type=float)
    ap.add_argument("--s-max", type=float, dest="s_max")
    ap.add_argument("--steps", type=int)
    ap.add_argument("--eig-tol", type=float, dest="eig_tol")
    ap.add_argument("--newton-tol", type=float, dest="newton_tol")
    ap.add_argument("--quad-tol", type=float, dest="quad_tol")
    ap.add_argument("--guard", type=float)
    ap.add_argument("--outdir")
    ap.add_argument("--format", choices=["csv", "json"])
    ap.add_argument("--threads", type=int)
    return ap.parse_args(argv)


def _build_config(args) -> RunConfig:
    cfg = RunConfig()
    if args.config:
        try:
            raw = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise OSError(f"config file {args.config}: {exc}") from exc
        for key, val in raw.items():
            if not hasattr(cfg, key):
                raise DomainError(f"config file: unknown key {key!r}")
            setattr(cfg, key, val)
    for key in (
        "profile", "phi_nodes", "theta_nodes", "de_level", "direct_level", "n_modes",
        "omega", "s_max", "steps", "eig_tol", "newton_tol", "quad_tol", "guard",
        "outdir", "format", "threads",
    ):
        val = getattr(args, key, None)
        if val is not None:
            setattr(cfg, key, val)
    if args.modes is not None:
        cfg.modes = [int(s) for s in args.modes.split(",") if s.strip()]
    if args.omega_grid is not None:
        cfg.omega_grid = [float(s) for s in args.omega_grid.split(",") if s.strip()]
    if args.threads is None and "QG3D_THREADS" in os.environ:
        cfg.threads = int(os.environ["QG3D_THREADS"])
    cfg.check()
    return cfg


def main(argv=None) -> int:
    args = _parse_args(sys.argv[1:] if argv is None else argv)
    try:
        cfg = _build_config(args)
    except (OSError,) as exc:
        print(f"qg3d: {exc}", file=sys.stderr)
        return EXIT_IO
    except DomainError as exc:
        print(f"qg3d: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        profile = _load_profile(cfg.profile)
    except (OSError, DomainError, GeometryError) as exc:
        print(f"qg3d: cannot load profile: {exc}", file=sys.stderr)
        return EXIT_IO
    outdir = Path(cfg.outdir)
    try:
        outdir.mkdir(parents=True, exist_ok=True)
        _echo_config(cfg, outdir, args.command)
        return COMMANDS[args.command](cfg, profile, outdir)
    except OSError as exc:
        print(f"qg3d: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (DomainError, GeometryError) as exc:
        print(f"qg3d: validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (SolverError, AccuracyError) as exc:
        print(f"qg3d: solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
