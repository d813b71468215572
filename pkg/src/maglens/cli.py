"""Command-line interface and report serialization.

Units at this boundary follow the figures: nm, Gauss, Gauss/Angstrom, kHz.
JSON reports print floats at 9 significant digits with sorted keys so that
identical inputs give byte-identical output. Bulk contour/vector data goes
to CSV, plot-ready; no plotting is done here.

Exit codes: 0 success, 2 precondition/usage error, 3 analysis error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import config as cfgmod
from .amperian import biot_savart_batch, sheets_for
from .analysis import (AnalysisError, ContourSet, bias_sweep, default_levels,
                       extract_contours, find_focus, focus_tensor, symmetry_plane,
                       vector_grid)
from .constants import ANGSTROM, GAUSS, NM
from .fieldsolver import (EvaluationTooCloseError, FieldGrid, field_at, field_grid,
                          jacobian_batch, magnet_field)
from .geometry import GeometryError
from .quadrature import QuadratureError
from .resonance import PROTON, SpinSpecies, selectivity_report

GPA = GAUSS / ANGSTROM  # T/m per (G/Angstrom)


# ---------------------------------------------------------------------------
# serialization

def _round9(obj):
    if isinstance(obj, float):
        return float(f"{obj:.9g}")
    if isinstance(obj, dict):
        return {k: _round9(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round9(v) for v in obj]
    return obj


def dump_json(obj) -> str:
    return json.dumps(_round9(obj), sort_keys=True, indent=2) + "\n"


def write_contours_csv(contours: ContourSet, fh):
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["level_gauss", "polyline_id", "u_nm", "v_nm"])
    pid = 0
    for level in contours.levels:
        for line in contours.polylines[level]:
            for u, v in line:
                writer.writerow([f"{level / GAUSS:.17g}", pid,
                                 f"{u / NM:.17g}", f"{v / NM:.17g}"])
            pid += 1


def read_contours_csv(fh, plane=None) -> ContourSet:
    """Parse a contour CSV back into a ContourSet (plane supplied by caller)."""
    reader = csv.reader(fh)
    header = next(reader)
    if header != ["level_gauss", "polyline_id", "u_nm", "v_nm"]:
        raise ValueError(f"unexpected contour CSV header: {header}")
    by_line = {}
    order = []
    for level_s, pid_s, u_s, v_s in reader:
        key = (float(level_s) * GAUSS, int(pid_s))
        if key not in by_line:
            by_line[key] = []
            order.append(key)
        by_line[key].append((float(u_s) * NM, float(v_s) * NM))
    levels = []
    polylines = {}
    for level, _pid in order:
        if level not in polylines:
            levels.append(level)
            polylines[level] = []
    for (level, _pid) in order:
        polylines[level].append(np.array(by_line[(level, _pid)]))
    return ContourSet(plane=plane, levels=levels, polylines=polylines)


def write_vectors_csv(grid: FieldGrid, fh):
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["u_nm", "v_nm", "Bu_gauss", "Bv_gauss", "Bmag_gauss"])
    bu, bv = grid.in_plane_components()
    for j in range(len(grid.vs)):
        for i in range(len(grid.us)):
            writer.writerow([f"{grid.us[i] / NM:.17g}", f"{grid.vs[j] / NM:.17g}",
                             f"{bu[j, i] / GAUSS:.17g}", f"{bv[j, i] / GAUSS:.17g}",
                             f"{grid.magnitude[j, i] / GAUSS:.17g}"])


def _focus_dict(rep):
    return {
        "x_nm": float(rep.position[0] / NM),
        "y_nm": float(rep.position[1] / NM),
        "z_nm": float(rep.position[2] / NM),
        "bmin_gauss": float(rep.b_min / GAUSS),
        "classification": rep.classification,
        "degenerate": rep.degenerate,
        "bias_gauss": float(rep.bias_used / GAUSS),
        "hessian_eigenvalues_tesla_per_m2": [float(e) for e in rep.hessian_eigenvalues],
        "gradient_tensor_gauss_per_angstrom":
            [[float(x / GPA) for x in row] for row in rep.gradient_tensor.entries],
    }


def _emit(args, text):
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# subcommands

def _context(args):
    cfg = cfgmod.load_config(args.config) if args.config else cfgmod.default_config()
    geom = cfgmod.geometry_from_config(cfg)
    bias = cfgmod.bias_from_config(cfg)
    if getattr(args, "bias_gauss", None) is not None:
        from .fieldsolver import BiasField
        bias = BiasField(args.bias_gauss * GAUSS)
    spec = cfgmod.quadrature_from_config(cfg)
    return cfg, geom, bias, spec


def cmd_field(args):
    cfg, geom, bias, spec = _context(args)
    parts = args.at.split(",")
    if len(parts) != 3:
        raise CliUsageError("--at expects exactly three comma-separated numbers x_nm,y_nm,z_nm")
    try:
        x, y, z = (float(p) for p in parts)
    except ValueError:
        raise CliUsageError(f"--at could not parse {args.at!r} as x_nm,y_nm,z_nm")
    sample = field_at(geom, bias, np.array([x, y, z]) * NM, spec)
    _emit(args, dump_json({
        "x_nm": x, "y_nm": y, "z_nm": z,
        "bx_gauss": sample.b[0] / GAUSS,
        "by_gauss": sample.b[1] / GAUSS,
        "bz_gauss": sample.b[2] / GAUSS,
        "bmag_gauss": sample.magnitude / GAUSS,
    }))
    return 0


def cmd_focus(args):
    cfg, geom, bias, spec = _context(args)
    rep = find_focus(geom, bias, cfgmod.z_search_from_config(cfg), spec)
    _emit(args, dump_json(_focus_dict(rep)))
    return 0


def cmd_sweep(args):
    cfg, geom, bias, spec = _context(args)
    ac = cfg["analysis"]
    lo = args.from_gauss if args.from_gauss is not None else ac["sweep_from_gauss"]
    hi = args.to_gauss if args.to_gauss is not None else ac["sweep_to_gauss"]
    step = args.step if args.step is not None else ac["sweep_step_gauss"]
    result = bias_sweep(geom, (lo * GAUSS, hi * GAUSS), step * GAUSS, spec,
                        cfgmod.z_search_from_config(cfg))
    runs = [{"classification": c, "from_gauss": a / GAUSS, "to_gauss": b / GAUSS}
            for c, a, b in result.runs]
    window = next(([r["from_gauss"], r["to_gauss"]] for r in runs
                   if r["classification"] == "minimum"), None)
    _emit(args, dump_json({
        "entries": [{"bias_gauss": b / GAUSS,
                     "classification": rep.classification,
                     "z_nm": rep.position[2] / NM,
                     "bmin_gauss": rep.b_min / GAUSS}
                    for b, rep in result.entries],
        "runs": runs,
        "minimum_window_gauss": window,
    }))
    return 0


def cmd_tensor(args):
    cfg, geom, bias, spec = _context(args)
    rep = find_focus(geom, bias, cfgmod.z_search_from_config(cfg), spec)
    ft = focus_tensor(geom, bias, rep.position, spec)
    scale = float(np.max(np.abs(ft.lab.entries)))
    k = int(np.argmin(np.abs(ft.eigenvalues)))
    _emit(args, dump_json({
        "focus": _focus_dict(rep),
        "lab_gauss_per_angstrom": [[x / GPA for x in row] for row in ft.lab.entries],
        "rotated45_gauss_per_angstrom": [[x / GPA for x in row] for row in ft.rotated.entries],
        "eigenvalues_gauss_per_angstrom": [e / GPA for e in ft.eigenvalues],
        "zero_eigenvector": [float(v) for v in ft.eigenvectors[:, k]],
        "diagonal_frame": ft.diagonal_frame,
        "trace_over_max_entry": ft.lab.trace / scale,
        "asymmetry_over_max_entry": ft.lab.asymmetry / scale,
    }))
    return 0


def _contour_grid(args, cfg, geom, bias, spec):
    ac = cfg["analysis"]
    n = args.grid_n or ac["contour_grid_n"]
    window = (args.window_nm or ac["contour_window_nm"]) * NM
    rep = find_focus(geom, bias, cfgmod.z_search_from_config(cfg), spec)
    plane = symmetry_plane(args.plane, rep.position, 0.5 * window)
    return rep, field_grid(geom, bias, plane, n, n, spec)


def cmd_contours(args):
    cfg, geom, bias, spec = _context(args)
    rep, grid = _contour_grid(args, cfg, geom, bias, spec)
    ac = cfg["analysis"]
    levels = default_levels(center=ac["contour_center_gauss"] * GAUSS,
                            step=ac["contour_step_gauss"] * GAUSS, grid=grid)
    contours = extract_contours(grid, levels)
    buf = io.StringIO()
    write_contours_csv(contours, buf)
    _emit(args, buf.getvalue())
    return 0


def cmd_vectors(args):
    cfg, geom, bias, spec = _context(args)
    ac = cfg["analysis"]
    n = args.grid_n or ac["vector_grid_n"]
    window = (args.window_nm or ac["vector_window_nm"]) * NM
    grid = vector_grid(geom, bias, args.plane, window, n, spec)
    buf = io.StringIO()
    write_vectors_csv(grid, buf)
    _emit(args, buf.getvalue())
    return 0


def cmd_selectivity(args):
    cfg, geom, bias, spec = _context(args)
    species_table = cfg["species_gamma_over_2pi_hz_per_tesla"]
    name = args.species
    if name not in species_table:
        raise CliUsageError(f"unknown species {name!r}; config defines {sorted(species_table)}")
    species = SpinSpecies(name, species_table[name])
    linewidth = (args.linewidth_gauss if args.linewidth_gauss is not None
                 else cfg["analysis"]["linewidth_gauss"]) * GAUSS
    rep = selectivity_report(geom, bias, species, linewidth, spec)
    _emit(args, dump_json({
        "species": species.name,
        "linewidth_gauss": linewidth / GAUSS,
        "frequency_khz": rep.frequency_hz / 1e3,
        "freq_gradient_khz_per_nm": [g * NM / 1e3 for g in rep.freq_gradients_hz_per_m],
        "shell_extents_nm": [e / NM for e in rep.shell_extents_m],
        "lattice_site_counts": [int(c) for c in rep.lattice_site_counts],
        "focus": _focus_dict(rep.focus),
    }))
    return 0


def cmd_validate(args):
    cfg, geom, bias, spec = _context(args)
    from scipy.stats import qmc
    checks = []

    n = args.points
    box_lo = np.array([-30.0, -30.0, 10.0]) * NM
    box_hi = np.array([30.0, 30.0, 50.0]) * NM
    pts = qmc.Halton(d=3, scramble=False, seed=0).random(n) * (box_hi - box_lo) + box_lo
    b_charge = magnet_field(geom, pts, spec)
    b_amp = biot_savart_batch(sheets_for(geom), pts, spec)
    mask = np.abs(b_charge) > 1.0 * GAUSS
    rel = np.abs(b_amp - b_charge)[mask] / np.abs(b_charge)[mask]
    worst = float(np.max(rel))
    checks.append({"name": "charge_vs_amperian_rel", "worst": worst,
                   "passed": bool(worst < 1e-4)})

    jac = jacobian_batch(geom, bias, pts, spec)
    scale = np.max(np.abs(jac), axis=(1, 2))
    tr = np.abs(np.trace(jac, axis1=1, axis2=2)) / scale
    asym = np.max(np.abs(jac - np.transpose(jac, (0, 2, 1))), axis=(1, 2)) / scale
    checks.append({"name": "jacobian_trace_rel", "worst": float(np.max(tr)),
                   "passed": bool(np.max(tr) < 1e-6)})
    checks.append({"name": "jacobian_asymmetry_rel", "worst": float(np.max(asym)),
                   "passed": bool(np.max(asym) < 1e-6)})

    passed = all(c["passed"] for c in checks)
    _emit(args, dump_json({"checks": checks, "passed": passed}))
    return 0 if passed else 3


class CliUsageError(ValueError):
    pass


def build_parser():
    parser = argparse.ArgumentParser(
        prog="maglens",
        description="Field solver and analysis for the planar cut-disk magnetic lens")
    parser.add_argument("--config", help="JSON config file (defaults bundled)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("field", help="evaluate B at a point")
    p.add_argument("--at", required=True, metavar="X_NM,Y_NM,Z_NM")
    p.add_argument("--bias-gauss", type=float, default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_field)

    p = sub.add_parser("focus", help="locate and classify the |B| extremum")
    p.add_argument("--bias-gauss", type=float, default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_focus)

    p = sub.add_parser("sweep", help="bias sweep of the focus classification")
    p.add_argument("--from", dest="from_gauss", type=float, default=None)
    p.add_argument("--to", dest="to_gauss", type=float, default=None)
    p.add_argument("--step", type=float, default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("tensor", help="field-gradient tensor at the focus")
    p.add_argument("--bias-gauss", type=float, default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_tensor)

    p = sub.add_parser("contours", help="iso-|B| contours in a symmetry plane (CSV)")
    p.add_argument("--plane", choices=["p45", "m45"], required=True)
    p.add_argument("--grid-n", type=int, default=None)
    p.add_argument("--window-nm", type=float, default=None)
    p.add_argument("--bias-gauss", type=float, default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_contours)

    p = sub.add_parser("vectors", help="field-vector grid in a plane (CSV)")
    p.add_argument("--plane", choices=["p45", "m45", "horizontal"], required=True)
    p.add_argument("--grid-n", type=int, default=None)
    p.add_argument("--window-nm", type=float, default=None)
    p.add_argument("--bias-gauss", type=float, default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_vectors)

    p = sub.add_parser("selectivity", help="resonance selectivity summary")
    p.add_argument("--species", default="proton")
    p.add_argument("--linewidth-gauss", type=float, default=None)
    p.add_argument("--bias-gauss", type=float, default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_selectivity)

    p = sub.add_parser("validate", help="cross-model and Maxwell-constraint checks")
    p.add_argument("--points", type=int, default=50)
    p.add_argument("--out")
    p.set_defaults(func=cmd_validate)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CliUsageError, GeometryError, EvaluationTooCloseError, ValueError) as exc:
        print(f"maglens: error: {exc}", file=sys.stderr)
        return 2
    except (AnalysisError, QuadratureError) as exc:
        sys.stdout.write(dump_json({"error": str(exc)}))
        return 3


if __name__ == "__main__":
    sys.exit(main())
