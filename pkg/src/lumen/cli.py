"""Command-line interface.

Exit codes: 0 success, 2 usage or input error, 3 numerical failure (including
failed verification checks).  Positions, times and fields are in internal units.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

import numpy as np

from ._io import atomic_write_text, report_bundle, to_json
from .atomkit import PRESETS, TransitionSpec
from .coupling import CouplingModel
from .exceptions import AccuracyError, FitError, IntegratorError
from .fields import (FieldOptions, FieldScan, geometric_mean_radius, remanent_energy, scan,
                     excitation_budget)
from .kernels import KernelModel, kernel

log = logging.getLogger("lumen")

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL = 0, 2, 3


class UsageError(Exception):
    pass


# --------------------------------------------------------------------------
# helpers

def _floats(text: str, n: int, what: str):
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"{what}: expected {n} comma-separated numbers, got {text!r}") from None
    if len(vals) != n:
        raise UsageError(f"{what}: expected {n} comma-separated numbers, got {text!r}")
    return vals


def _axis(spec: str, key: str):
    parts = spec.split(":")
    if len(parts) not in (3, 4) or (len(parts) == 4 and parts[3] != "log"):
        raise UsageError(f"grid axis {key}: expected start:stop:count[:log], got {spec!r}")
    try:
        a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise UsageError(f"grid axis {key}: bad number in {spec!r}") from None
    if n < 1:
        raise UsageError(f"grid axis {key}: count must be >= 1")
    if len(parts) == 4:
        if a <= 0 or b <= 0:
            raise UsageError(f"grid axis {key}: log spacing needs positive bounds")
        return np.geomspace(a, b, n)
    return np.linspace(a, b, n)


def parse_grid(spec: str, transition: TransitionSpec, seed: int):
    """Grid spec forms:

    * ``cone``: the light-cone check grid (|x| in [0.01, 10], t in [0, 20/Gamma]);
    * ``r=a:b:n[:log],t=a:b:n[:log][,dirs=n]``: radii x directions x times;
    * path to a CSV with columns x,y,z,t.
    """
    from .verification import light_cone_grid

    if spec == "cone":
        return light_cone_grid(transition, seed=seed)
    if spec.endswith(".csv"):
        path = Path(spec)
        if not path.is_file():
            raise UsageError(f"grid file not found: {spec}")
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        try:
            arr = np.array([[float(r[c]) for c in "xyzt"] for r in rows])
        except (KeyError, ValueError):
            raise UsageError(f"{spec}: need numeric columns x,y,z,t") from None
        if arr.size == 0:
            raise UsageError(f"{spec}: empty grid")
        return arr[:, :3], arr[:, 3]
    fields = {}
    for item in spec.split(","):
        key, _, val = item.partition("=")
        if key not in ("r", "t", "dirs") or not val:
            raise UsageError(f"bad grid item {item!r}; see --help")
        fields[key] = val
    if "r" not in fields or "t" not in fields:
        raise UsageError("grid spec needs r= and t=")
    radii, times = _axis(fields["r"], "r"), _axis(fields["t"], "t")
    n_dir = int(fields.get("dirs", 1))
    if n_dir < 1:
        raise UsageError("dirs must be >= 1")
    if n_dir == 1:
        dirs = np.array([[1.0, 0.0, 0.0]])
    else:
        dirs = np.random.default_rng(seed).normal(size=(n_dir, 3))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    pts = (radii[:, None, None] * dirs[None]).reshape(-1, 3)
    return np.repeat(pts, times.size, axis=0), np.tile(times, pts.shape[0])


def _transition(args) -> TransitionSpec:
    cfg = {}
    if args.config:
        path = Path(args.config)
        if not path.is_file():
            raise UsageError(f"config file not found: {args.config}")
        try:
            cfg = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise UsageError(f"config {args.config}: {exc}") from None
        if not isinstance(cfg, dict):
            raise UsageError("config must be a JSON object")
    if args.preset:
        cfg = {**cfg, "preset": args.preset}
    args.resolved_preset = cfg.get("preset", "hydrogen-paper")
    args.resolved_config = cfg or None
    return TransitionSpec.from_config(cfg)


def _emit(args, command: str, payload: dict, out):
    bundle = report_bundle(command, payload, preset=args.resolved_preset, seed=args.seed,
                           config=args.resolved_config)
    text = to_json(bundle)
    if out:
        atomic_write_text(out, text)
    else:
        sys.stdout.write(text)


# --------------------------------------------------------------------------
# commands

def cmd_fields_scan(args):
    tr = _transition(args)
    opts = FieldOptions.from_flags(args.longitudinal, args.zones)
    x, t = parse_grid(args.grid, tr, args.seed)
    sc = scan(args.coupling, x, t, tr, opts)
    buf = io.StringIO()
    sc.write_csv(buf)
    atomic_write_text(args.out, buf.getvalue())
    log.info("wrote %d points to %s", len(sc), args.out)
    return EXIT_OK


def cmd_fields_energy(args):
    tr = _transition(args)
    if args.rmin == "auto-geomean":
        r_min = geometric_mean_radius(tr)
    else:
        try:
            r_min = float(args.rmin)
        except ValueError:
            raise UsageError(f"--rmin must be a length in metres or auto-geomean, got {args.rmin!r}") from None
    e = remanent_energy(r_min, tr)
    threshold = args.threshold_ev * tr.constants.e_charge
    payload = {
        "r_min_m": r_min,
        "energy_J": e.value,
        "energy_eV": e.ev,
        "quadrature_J": e.quadrature,
        "quadrature_rel_diff": e.relative_difference,
        "threshold_eV": args.threshold_ev,
        "excitations_to_threshold": excitation_budget(threshold, energy_per_excitation=e.value),
    }
    _emit(args, "fields energy", payload, args.out)
    return EXIT_OK


def cmd_kernels_dump(args):
    text = kernel(KernelModel.parse(args.model)).to_json() + "\n"
    if args.out:
        atomic_write_text(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_oracle_decay(args):
    from .oracle import ModeGrid, fit_decay, simulate_modes

    tr = _transition(args)
    grid = ModeGrid.preset(args.grid_preset, tr.reduced_gamma)
    traj = simulate_modes(args.coupling, grid, tr, args.t_max / tr.reduced_gamma, args.tol)
    fit = fit_decay(traj)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "re_c_e", "im_c_e", "abs_c_e", "norm"])
    for ti, ce, nm in zip(traj.t, traj.c_e, traj.norm):
        w.writerow(["%.17g" % v for v in (ti, ce.real, ce.imag, abs(ce), nm)])
    atomic_write_text(args.out, buf.getvalue())
    window = traj.t <= fit.window
    summary = {"gamma_eff": fit.gamma_eff, "gamma_configured": tr.reduced_gamma,
               "omega_shift": fit.omega_shift, "r2": fit.r2, "residual": fit.residual,
               "norm_drift": float(np.max(np.abs(traj.norm[window] - 1))),
               "radial_nodes": int(grid.k.size)}
    sys.stdout.write(to_json(summary))
    return EXIT_OK


def cmd_oracle_reconstruct(args):
    from .fields import field
    from .oracle import reconstruct_field

    tr = _transition(args)
    x = np.array(_floats(args.x, 3, "--x"))
    t = float(args.t)
    cutoff_on = args.cutoff == "on"
    psi = reconstruct_field(tr, args.coupling, x, t, cutoff_on, zones=args.zones)
    payload = {"x": x, "t": t, "coupling": args.coupling, "cutoff": args.cutoff,
               "zones": sorted(args.zones.split(",")),
               "psi": [[c.real, c.imag] for c in psi]}
    if CouplingModel.parse(args.coupling) is not CouplingModel.AP_EXACT:
        ana = field(args.coupling, x, t, tr, FieldOptions(zones=args.zones))
        payload["analytic_psi"] = [[c.real, c.imag] for c in ana]
        norm = np.linalg.norm(ana)
        payload["rel_diff"] = float(np.linalg.norm(psi - ana) / norm) if norm > 0 else None
    _emit(args, "oracle reconstruct", payload, args.out)
    return EXIT_OK


def cmd_oracle_compare(args):
    from .oracle import compare

    for p in (args.a, args.b):
        if not Path(p).is_file():
            raise UsageError(f"scan file not found: {p}")
    rep = compare(FieldScan.from_csv(args.a), FieldScan.from_csv(args.b), rms_tol=args.tol)
    sys.stdout.write(to_json(rep))
    if args.tol is not None and not rep["passed"]:
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_verify_all(args):
    from .verification import run_all

    tr = _transition(args)
    results = run_all(tr, seed=args.seed, names=args.only.split(",") if args.only else None)
    for r in results:
        print(r.line())
    payload = {"passed": all(r.passed for r in results), "checks": [r.as_dict() for r in results]}
    if args.out:
        _emit(args, "verify-all", payload, args.out)
    return EXIT_OK if payload["passed"] else EXIT_NUMERICAL


# --------------------------------------------------------------------------
# parser

def _global(p: argparse.ArgumentParser, top: bool):
    d = {} if top else {"default": argparse.SUPPRESS}
    p.add_argument("--config", help="JSON config with transition settings", **({"default": None} if top else d))
    p.add_argument("--preset", choices=sorted(PRESETS), **({"default": None} if top else d))
    p.add_argument("--seed", type=int, **({"default": 0} if top else d))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lumen", description=__doc__.splitlines()[0])
    _global(parser, True)
    parser.add_argument("-v", "--verbose", action="store_true")
    groups = parser.add_subparsers(dest="group", required=True)

    def sub(parent, name, func, help_):
        p = parent.add_parser(name, help=help_)
        _global(p, False)
        p.set_defaults(func=func)
        return p

    fields = groups.add_parser("fields", help="analytic field evaluation")
    fsub = fields.add_subparsers(dest="cmd", required=True)
    p = sub(fsub, "scan", cmd_fields_scan, "evaluate psi on a grid and write CSV")
    p.add_argument("--coupling", default="ap-dip", choices=["er-dip", "ap-dip", "ap-exact"])
    p.add_argument("--longitudinal", default="off", choices=["primitive", "amplitude", "off"])
    p.add_argument("--zones", default="near,mid,far")
    p.add_argument("--grid", required=True, help="cone | r=a:b:n[:log],t=a:b:n[:log][,dirs=n] | file.csv")
    p.add_argument("--out", required=True)

    p = sub(fsub, "energy", cmd_fields_energy, "remanent static-field energy")
    p.add_argument("--rmin", default="auto-geomean", help="metres, or auto-geomean")
    p.add_argument("--threshold-ev", type=float, default=10.0)
    p.add_argument("--out")

    kern = groups.add_parser("kernels", help="Green-function term tables")
    ksub = kern.add_subparsers(dest="cmd", required=True)
    p = sub(ksub, "dump", cmd_kernels_dump, "print a kernel's terms as JSON")
    p.add_argument("--model", required=True, choices=[m.value for m in KernelModel])
    p.add_argument("--out")

    orc = groups.add_parser("oracle", help="numerical cross-checks")
    osub = orc.add_subparsers(dest="cmd", required=True)
    p = sub(osub, "decay", cmd_oracle_decay, "integrate the mode equations")
    p.add_argument("--coupling", default="ap-dip", choices=["er-dip", "ap-dip", "ap-exact"])
    p.add_argument("--grid-preset", default="coarse", choices=["coarse", "fine"])
    p.add_argument("--t-max", type=float, default=3.3, help="in units of 1/Gamma")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--out", required=True)

    p = sub(osub, "reconstruct", cmd_oracle_reconstruct, "radial k-integral of the field at one point")
    p.add_argument("--x", required=True, help="x,y,z in c/omega0")
    p.add_argument("--t", required=True, type=float, help="time in 1/omega0")
    p.add_argument("--cutoff", default="off", choices=["on", "off"])
    p.add_argument("--coupling", default="ap-dip", choices=["er-dip", "ap-dip", "ap-exact"])
    p.add_argument("--zones", default="near,mid,far")
    p.add_argument("--out")

    p = sub(osub, "compare", cmd_oracle_compare, "compare two field-scan CSVs")
    p.add_argument("--a", required=True, help="reference scan")
    p.add_argument("--b", required=True)
    p.add_argument("--tol", type=float, help="normalised RMS tolerance; exit 3 if exceeded")

    p = groups.add_parser("verify-all", help="run every self-check")
    _global(p, False)
    p.set_defaults(func=cmd_verify_all)
    p.add_argument("--only", help="comma-separated check names")
    p.add_argument("--out", help="write the JSON report here")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits 2 on usage errors
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"lumen: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (IntegratorError, AccuracyError, FitError, FloatingPointError, ZeroDivisionError) as exc:
        print(f"lumen: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"lumen: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"lumen: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
