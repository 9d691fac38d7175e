"""Command-line front end.

Subcommands:

``slope``
    Incremental limit analysis of the slope; writes ``loading_curve.csv``,
    ``collapse.vtk`` and ``summary.txt`` into ``--out``.
``material-point``
    Drives one material point along a strain path file and writes a CSV trace.
``wedge``
    Evaluates the closed-form projection onto ``{w1 + |w2| <= 1}`` on a grid.

A config file (``--config``) holds ``key = value`` lines with the keys of
:data:`CONFIG_KEYS`; command-line flags take precedence.
"""
from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import presets, tensors as tn
from .fem.mesh import SlopeGeometry
from .generic import DruckerPragerModel, JirasekGrasslModel
from .jirasek_grassl import JGParams
from .solver import LoadSchedule, NewtonSettings, project_wedge_batch
from .state import CorrectorFailure, ReturnKind, integrate

KIND_NAMES = {int(k): k.name.lower() for k in ReturnKind}


@dataclass
class RunConfig:
    preset: str = "dp-associative"
    element: str = "quad8"
    level: int = 1
    out: str = "slope-output"
    threads: int = 1
    newton_tol: float = 1e-12
    max_iters: int = 30
    zeta_increment: float = 0.1
    min_increment: float = 1e-4
    zeta_max: float = 10.0
    left: float = 15.0
    right: float = 20.0
    depth: float = 10.0
    height: float = 10.0

    def validate(self):
        if self.preset not in presets.PRESETS:
            raise ValueError(f"unknown preset {self.preset!r}; choose from {', '.join(presets.PRESETS)}")
        if self.element not in ("tri3", "quad8"):
            raise ValueError(f"element must be tri3 or quad8, got {self.element!r}")
        if self.level not in (1, 2, 3, 4):
            raise ValueError(f"level must be 1..4, got {self.level}")
        if self.threads < 1:
            raise ValueError("threads must be at least 1")
        self.settings()
        self.schedule()
        self.geometry()
        presets.material(self.preset)
        return self

    def settings(self) -> NewtonSettings:
        return NewtonSettings(epsilon_newton=self.newton_tol, max_iters=self.max_iters)

    def schedule(self) -> LoadSchedule:
        return LoadSchedule(self.zeta_increment, self.min_increment, self.zeta_max)

    def geometry(self) -> SlopeGeometry:
        return SlopeGeometry(self.left, self.right, self.depth, self.height)


CONFIG_KEYS = {f.name: f.type for f in fields(RunConfig)}
_CASTS = {"str": str, "int": int, "float": float}


def read_config(path) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment."""
    values = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = (part.strip() for part in line.partition("="))
            key = key.replace("-", "_")
            if not sep or key not in CONFIG_KEYS:
                raise ValueError(f"{path}:{lineno}: expected 'key = value' with key in {sorted(CONFIG_KEYS)}")
            try:
                values[key] = _CASTS[CONFIG_KEYS[key]](value)
            except ValueError:
                raise ValueError(f"{path}:{lineno}: bad value {value!r} for {key}") from None
    return values


def build_config(args) -> RunConfig:
    values = read_config(args.config) if args.config else {}
    for key in CONFIG_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    return RunConfig(**values).validate()


def read_strain_path(path):
    """One strain per line: ``exx eyy exy`` (plane strain) or ``exx eyy ezz exy eyz exz``.

    Values are tensor components (not engineering shear).  Returns storage
    vectors of shape ``(n, 6)``.
    """
    rows = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.split("#", 1)[0].replace(",", " ").split()
            if not text:
                continue
            try:
                vals = [float(v) for v in text]
            except ValueError:
                raise ValueError(f"{path}:{lineno}: non-numeric strain component") from None
            if len(vals) == 3:
                rows.append(tn.from_plane_strain(*vals))
            elif len(vals) == 6:
                xx, yy, zz, xy, yz, xz = vals
                rows.append(tn.to_mandel(np.array([[xx, xy, xz], [xy, yy, yz], [xz, yz, zz]])))
            else:
                raise ValueError(f"{path}:{lineno}: expected 3 or 6 strain components, got {len(vals)}")
    if not rows:
        raise ValueError(f"{path}: empty strain path")
    return np.array(rows)


def _fmt(x) -> str:
    return f"{x:.9g}"


def material_point_trace(model, strains):
    """Integrate a strain path; yields ``(sigma tensor components, dlam, ebar, kind)`` per step."""
    eps_p = np.zeros(6)
    ebar = 0.0
    for eps in strains:
        up = integrate(model, eps[None, :], eps_p[None, :], np.array([ebar]), tangent=False)
        eps_p, ebar = up.eps_p[0], float(up.eps_bar_p[0])
        s = tn.from_mandel(up.sigma[0])
        yield ([s[0, 0], s[1, 1], s[2, 2], s[0, 1], s[1, 2], s[0, 2]],
               float(up.delta_lambda[0]), ebar, int(up.kind[0]))


def _open_out(path):
    if path in (None, "-"):
        return sys.stdout, False
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    return open(path, "w", newline=""), True


def cmd_material_point(args) -> int:
    material = presets.material(args.preset)
    if args.corrector == "generic":
        material = (JirasekGrasslModel(material) if isinstance(material, JGParams)
                    else DruckerPragerModel(material))
    strains = read_strain_path(args.strain_path)
    fh, close = _open_out(args.out)
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["step", "sigma_xx", "sigma_yy", "sigma_zz", "sigma_xy", "sigma_yz",
                    "sigma_xz", "delta_lambda", "eps_bar_p", "kind"])
        for step, (sig, dlam, ebar, kind) in enumerate(material_point_trace(material, strains), 1):
            w.writerow([step, *map(_fmt, sig), _fmt(dlam), _fmt(ebar), KIND_NAMES[kind]])
    finally:
        if close:
            fh.close()
    return 0


def wedge_grid(z1, z2):
    a = np.linspace(z1[0], z1[1], int(z1[2]))
    b = np.linspace(z2[0], z2[1], int(z2[2]))
    A, B = np.meshgrid(a, b, indexing="ij")
    return np.column_stack([A.ravel(), B.ravel()])


def cmd_wedge(args) -> int:
    z = wedge_grid(args.z1, args.z2)
    w, lam, kind = project_wedge_batch(z)
    fh, close = _open_out(args.out)
    try:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["z1", "z2", "w1", "w2", "lambda", "kind"])
        for zi, wi, li, ki in zip(z, w, lam, kind):
            out.writerow([_fmt(zi[0]), _fmt(zi[1]), _fmt(wi[0]), _fmt(wi[1]), _fmt(li),
                          KIND_NAMES[int(ki)]])
    finally:
        if close:
            fh.close()
    return 0


def cmd_slope(args) -> int:
    from .benchmark import run_slope

    cfg = args.run_config
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)

    def progress(zeta, newton):
        if args.verbose:
            print(f"zeta = {zeta:.9g}  newton_iters = {newton.iters}", file=sys.stderr)

    run = run_slope(presets.material(cfg.preset), cfg.level, cfg.element, cfg.geometry(),
                    cfg.schedule(), cfg.settings(), cfg.threads, progress)
    run.result.curve.write_csv(out / "loading_curve.csv")
    run.write_fields(out / "collapse.vtk")
    text = (f"preset = {cfg.preset}\nelement = {cfg.element}\nlevel = {cfg.level}\n"
            f"nodes = {run.mesh.n_nodes}\n") + run.result.summary_text()
    (out / "summary.txt").write_text(text)
    sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="returnmap", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    slope = sub.add_parser("slope", help="slope stability limit analysis")
    slope.add_argument("--config", help="key = value file; flags override it")
    slope.add_argument("--preset", choices=sorted(presets.PRESETS))
    slope.add_argument("--element", choices=["tri3", "quad8"])
    slope.add_argument("--level", type=int, choices=[1, 2, 3, 4])
    slope.add_argument("--out", help="output directory")
    slope.add_argument("--threads", type=int)
    slope.add_argument("--newton-tol", dest="newton_tol", type=float)
    slope.add_argument("--max-iters", dest="max_iters", type=int)
    slope.add_argument("--zeta-increment", dest="zeta_increment", type=float)
    slope.add_argument("--min-increment", dest="min_increment", type=float)
    slope.add_argument("--zeta-max", dest="zeta_max", type=float)
    for name in ("left", "right", "depth", "height"):
        slope.add_argument(f"--{name}", type=float, help=f"slope geometry: {name} [m]")
    slope.add_argument("-v", "--verbose", action="store_true")
    slope.set_defaults(func=cmd_slope)

    mp = sub.add_parser("material-point", help="integrate a strain path at one point")
    mp.add_argument("--preset", choices=sorted(presets.PRESETS), default="dp-associative")
    mp.add_argument("--corrector", choices=["dedicated", "generic"], default="dedicated")
    mp.add_argument("--strain-path", required=True,
                    help="text file, one strain per line (3 plane or 6 full components)")
    mp.add_argument("--out", default="-", help="CSV file (default stdout)")
    mp.set_defaults(func=cmd_material_point)

    wedge = sub.add_parser("wedge", help="closed-form 2D wedge projection on a grid")
    wedge.add_argument("--z1", nargs=3, type=float, default=[-3.0, 3.0, 61], metavar=("MIN", "MAX", "N"))
    wedge.add_argument("--z2", nargs=3, type=float, default=[-3.0, 3.0, 61], metavar=("MIN", "MAX", "N"))
    wedge.add_argument("--out", default="-", help="CSV file (default stdout)")
    wedge.set_defaults(func=cmd_wedge)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "slope":
        try:
            args.run_config = build_config(args)
        except (ValueError, OSError) as exc:
            parser.error(str(exc))
    try:
        return args.func(args)
    except (ValueError, OSError, CorrectorFailure, RuntimeError) as exc:
        print(f"returnmap {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
