"""Command-line interface.

Exit codes: 0 ok, 2 bad input or file format, 3 inadmissible input
(non-horizontal path, nonzero area), 4 unsupported configuration, 5 numerical
failure. Outputs go to ``--out``/``--report`` when given, else to the directory
in ``CARNOTEXT_OUTPUT_DIR`` when set, else to standard output.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import algebra as alg_mod
from .allcock import BUILTIN_MODELS, build_allcock, parse_model
from .contact import HORIZONTAL_TOL, check_horizontal, contact_residual_curve, horizontal_lift
from .errors import (AdmissibilityError, DataFormatError, HorizontalityError, InputError,
                     NumericalError, UnsupportedModelError)
from .ensemble import DEFAULT_K, BenchConfig, rows_to_csv, run_bench
from .extension import extend_group_loop, pullback_omega_residual
from .isoperimetry import (graph_area, homotopy_area_breakdown, horizontal_loop_length,
                           riemannian_comparison, sr_area)
from .obstruction import free52_obstruction
from .paths import SampledPath, format_curve_csv, read_curve_csv

OUTPUT_ENV = "CARNOTEXT_OUTPUT_DIR"
EXIT = {"ok": 0, "format": 2, "inadmissible": 3, "unsupported": 4, "numeric": 5}

FIXTURES = {
    "heis": lambda a: alg_mod.heisenberg(int(a or 1)),
    "engel": lambda a: alg_mod.engel(),
    "parabolic": lambda a: alg_mod.parabolic(int(a or 1)),
    "ut": lambda a: alg_mod.upper_triangular(int(a or 4)),
    "free2": lambda a: alg_mod.free_two_step(int(a or 2)),
}


def resolve_algebra(spec: str, copies: int | None):
    """Graded algebra from ``--algebra``/``--copies``.

    With ``--copies`` the spec names a model and the Allcock group is built;
    without it, model names give the model itself and ``heis:n``, ``engel``,
    ``parabolic:n``, ``ut:d``, ``free2:r`` or ``file:<json>`` give fixtures.
    """
    if copies is not None:
        return build_allcock(parse_model(spec), copies).algebra
    name, _, arg = spec.partition(":")
    if name == "file":
        return alg_mod.GradedAlgebra.load(arg)
    if name in FIXTURES:
        try:
            return FIXTURES[name](arg)
        except ValueError:
            raise InputError(f"bad parameter in algebra spec {spec!r}") from None
    return parse_model(spec).algebra


def _target(arg, default_name: str):
    if arg:
        return Path(arg)
    env = os.environ.get(OUTPUT_ENV)
    if env:
        Path(env).mkdir(parents=True, exist_ok=True)
        return Path(env) / default_name
    return None


def _emit_text(text: str, arg, default_name: str) -> None:
    path = _target(arg, default_name)
    if path is None:
        sys.stdout.write(text)
    else:
        path.write_text(text)


def _emit_json(data, arg, default_name: str) -> None:
    _emit_text(json.dumps(data, indent=2, sort_keys=True) + "\n", arg, default_name)


def _read_curve(path) -> SampledPath:
    try:
        return read_curve_csv(path)
    except OSError as exc:
        raise DataFormatError(f"cannot read {path}: {exc.strerror}") from None


def cmd_info(args) -> int:
    alg = resolve_algebra(args.algebra, args.copies)
    out = {"name": alg.name, "layer_dims": list(alg.layer_dims), "dim": alg.dim,
           "step": alg.step, "beta": alg.beta}
    if args.copies is None and args.algebra.partition(":")[0] not in set(FIXTURES) | {"file"}:
        model = parse_model(args.algebra)
        out["C_suriso"] = model.C_suriso
        out["has_kit"] = model.has_kit
    if args.structure:
        out["algebra"] = alg.to_dict()
    _emit_json(out, args.out, "info.json")
    return 0


def cmd_lift(args) -> int:
    alg = resolve_algebra(args.algebra, args.copies)
    curve = _read_curve(args.input)
    lifted = horizontal_lift(alg, curve)
    report = contact_residual_curve(alg, lifted, "spline")
    _emit_text(format_curve_csv(lifted), args.out, "lifted.csv")
    sys.stderr.write(json.dumps({"residual": report.to_dict(),
                                 "endpoint": lifted.values[-1].tolist()}) + "\n")
    return 0


def cmd_residual(args) -> int:
    alg = resolve_algebra(args.algebra, args.copies)
    curve = _read_curve(args.input)
    if args.derivative == "auto":
        try:
            rep = check_horizontal(alg, curve, args.tol)
            ok = True
        except HorizontalityError as exc:
            rep, ok = exc.report, False
    else:
        rep = contact_residual_curve(alg, curve, args.derivative)
        ok = rep.sup <= args.tol
    _emit_json({"horizontal": ok, "tol": args.tol, **rep.to_dict()}, args.report, "residual.json")
    return 0 if ok else EXIT["inadmissible"]


def _group(args):
    if args.copies is None:
        raise InputError("--copies is required")
    return build_allcock(parse_model(args.algebra), args.copies)


def _group_loop(group, curve: SampledPath) -> SampledPath:
    mn, full = group.horizontal_dim, group.algebra.dim
    if curve.dim == mn:
        return horizontal_lift(group.algebra, curve)
    if curve.dim == full:
        return curve
    raise InputError(f"loop has {curve.dim} columns, expected {mn} (first layer) or {full}")


def cmd_extend(args) -> int:
    group = _group(args)
    Gamma = _group_loop(group, _read_curve(args.input))
    Phi, record = extend_group_loop(group, Gamma, args.grid, tol=args.tol)
    _emit_text(json.dumps(Phi.to_dict()) + "\n", args.out, "disk.json")
    info = {k: v for k, v in Phi.info.items()}
    info["grid"] = args.grid
    info["boundary_tolerance_2h"] = 2.0 / args.grid
    if record is not None:
        info["pullback_residual"] = pullback_omega_residual(group, Phi).to_dict()
        info["lambda"] = record.lam
        info["lip_stages"] = record.lip
        info["lip_H"] = record.lip_H
        info["stage_areas"] = homotopy_area_breakdown(record, strict=False).to_dict()
        area = sr_area(group, Phi)
        length = horizontal_loop_length(group, Gamma)
        info.update(length=length, area=area, ratio=area / length ** 2)
    _emit_json(info, args.report, "extend_report.json")
    return 0


def cmd_iso(args) -> int:
    group = _group(args)
    Gamma = _group_loop(group, _read_curve(args.input))
    Phi, record = extend_group_loop(group, Gamma, args.grid, tol=args.tol, gauge_lipschitz=False)
    length = horizontal_loop_length(group, Gamma)
    if record is None:
        area, ratio, per = 0.0, 0.0, {}
    else:
        area = sr_area(group, Phi)
        ratio = area / length ** 2
        per = graph_area(Phi).per_stage
    out = {"length": length, "area": area, "ratio": ratio, "per_stage": per,
           "grid": args.grid, "seed": None, "K": args.K, "K_bound_check": bool(ratio <= args.K)}
    if record is not None and group.model.kind == "heisenberg" and group.copies == 2:
        out["riemannian_comparison"] = riemannian_comparison(group, Phi)
    _emit_json(out, args.report, "iso_report.json")
    return 0


def cmd_bench(args) -> int:
    group = _group(args)
    cfg = BenchConfig(args.algebra, args.copies, args.loops, args.seed, args.modes, args.grid,
                      args.out, args.kind, args.K, args.tol, args.oversample)
    rows = run_bench(group, cfg)
    _emit_text(rows_to_csv(rows), args.out, "bench.csv")
    ratios = [r["ratio"] for r in rows]
    sys.stderr.write(json.dumps({"loops": len(rows), "max_ratio": max(ratios), "K": args.K,
                                 "K_bound_check": bool(max(ratios) <= args.K)}) + "\n")
    return 0


def cmd_obstruction(args) -> int:
    cert = free52_obstruction(args.grid, args.seed, args.restarts)
    _emit_json(cert.to_dict(), args.report, "obstruction.json")
    return 0


def _positive_grid(text: str) -> int:
    n = int(text)
    if n < 10:
        raise argparse.ArgumentTypeError("grid must be at least 10")
    return n


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="carnotext", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)
    fmt = argparse.ArgumentDefaultsHelpFormatter

    def common(sp, copies_required=False):
        sp.add_argument("--algebra", default="heisenberg",
                        help="model (" + ", ".join(BUILTIN_MODELS) + ", custom:<file>); "
                             "without --copies also heis:n, engel, parabolic:n, ut:d, "
                             "free2:r, file:<json>")
        sp.add_argument("--copies", type=int, default=2 if copies_required else None,
                        help="number of copies n of the Allcock group")

    sp = sub.add_parser("info", help="describe an algebra", formatter_class=fmt)
    common(sp)
    sp.add_argument("--structure", action="store_true", help="include structure constants")
    sp.add_argument("--out", help="output JSON path")
    sp.set_defaults(func=cmd_info)

    sp = sub.add_parser("lift", help="horizontal lift of a layer-1 curve", formatter_class=fmt)
    common(sp)
    sp.add_argument("--in", dest="input", required=True, help="curve CSV")
    sp.add_argument("--out", help="lifted curve CSV")
    sp.set_defaults(func=cmd_lift)

    sp = sub.add_parser("residual", help="contact residual of a curve", formatter_class=fmt)
    common(sp)
    sp.add_argument("--in", dest="input", required=True, help="curve CSV")
    sp.add_argument("--tol", type=float, default=HORIZONTAL_TOL, help="horizontality tolerance")
    sp.add_argument("--derivative", choices=("auto", "central", "spline"), default="auto",
                    help="auto accepts if either estimate is below tol")
    sp.add_argument("--report", help="output JSON path")
    sp.set_defaults(func=cmd_residual)

    for name, func, hlp in (("extend", cmd_extend, "disk extension of a loop"),
                            ("iso", cmd_iso, "area / length^2 of a loop")):
        sp = sub.add_parser(name, help=hlp, formatter_class=fmt)
        common(sp, copies_required=True)
        sp.add_argument("--in", dest="input", required=True,
                        help="loop CSV with m*n (first layer, lifted here) or m*n+s columns")
        sp.add_argument("--grid", type=_positive_grid, default=512, help="angular resolution N")
        sp.add_argument("--tol", type=float, default=HORIZONTAL_TOL, help="horizontality tolerance")
        if name == "extend":
            sp.add_argument("--out", help="disk map JSON path")
        else:
            sp.add_argument("--K", type=float, default=DEFAULT_K, help="configured ratio bound")
        sp.add_argument("--report", help="report JSON path")
        sp.set_defaults(func=func)

    sp = sub.add_parser("bench", help="seeded ensemble of area / length^2 ratios",
                        formatter_class=fmt)
    common(sp, copies_required=True)
    sp.add_argument("--loops", type=int, default=100)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--modes", type=int, default=3, help="Fourier modes per loop")
    sp.add_argument("--grid", type=_positive_grid, default=256, help="angular resolution N")
    sp.add_argument("--kind", choices=("fourier", "figure-eight", "constant"), default="fourier")
    sp.add_argument("--oversample", type=int, default=16, help="loop samples per grid step")
    sp.add_argument("--K", type=float, default=DEFAULT_K, help="configured ratio bound")
    sp.add_argument("--tol", type=float, default=HORIZONTAL_TOL, help="horizontality tolerance")
    sp.add_argument("--out", help="CSV path")
    sp.set_defaults(func=cmd_bench)

    sp = sub.add_parser("obstruction", help="certificate for the free 2-step algebra on 5 generators",
                        formatter_class=fmt)
    sp.add_argument("--grid", type=int, default=256, help="loop resolution N")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--restarts", type=int, default=2)
    sp.add_argument("--report", help="output JSON path")
    sp.set_defaults(func=cmd_obstruction)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (AdmissibilityError, HorizontalityError) as exc:
        msg = str(exc)
        if isinstance(exc, AdmissibilityError) and exc.area is not None:
            msg += f" (area vector {np.asarray(exc.area).tolist()})"
        print(f"error: {msg}", file=sys.stderr)
        return EXIT["inadmissible"]
    except UnsupportedModelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT["unsupported"]
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT["numeric"]
    except (InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT["format"]


if __name__ == "__main__":
    sys.exit(main())
