"""Command-line front end.

Every subcommand writes one result file and prints a one-line JSON summary
on stdout. Failures print a single JSON line ``{"error": ..., "message": ...}``
on stderr and exit with status 1 (runtime error) or 2 (usage error).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import fuchsian, melnikov, variational
from .continuation import PRESETS, ContinuationConfig, run_preset, write_branch
from .model import ParamId, SystemParams

__all__ = ["main", "build_parser", "OUTDIR_ENV", "CliError"]

OUTDIR_ENV = "HOMOCLINIC_GL_OUTDIR"


class CliError(Exception):
    pass


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _fmt(x) -> str:
    return format(float(x), ".17g")


def _out_path(args, default_name: str) -> Path:
    if args.out:
        p = Path(args.out)
    else:
        p = Path(os.environ.get(OUTDIR_ENV, ".")) / default_name
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def _int_list(text: str) -> list[int]:
    items = [t for t in text.replace(",", " ").split() if t]
    try:
        return [int(t) for t in items]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not an integer list: {text!r}") from exc


def _param_override(text: str):
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected NAME=VALUE, got {text!r}")
    k, v = text.split("=", 1)
    k = k.strip()
    if k != "s":
        try:
            k = ParamId.parse(k).value
        except KeyError as exc:
            raise argparse.ArgumentTypeError(f"unknown parameter {k!r}") from exc
    try:
        return k, float(v)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a number: {v!r}") from exc


def _dump_json(obj) -> str:
    def default(o):
        if isinstance(o, np.generic):
            return o.item()
        if isinstance(o, np.ndarray):
            return o.tolist()
        raise TypeError(type(o).__name__)

    return json.dumps(obj, indent=2, default=default)


# ---------------------------------------------------------------- commands

def cmd_resonance(args) -> dict:
    if not args.ell_list:
        raise CliError("ell list is empty")
    rows = fuchsian.resonance_curve((args.s_min, args.s_max), args.ell_list, args.points)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["s", "ell", "beta1"])
    for s, ell, b in rows:
        w.writerow([_fmt(s), ell, _fmt(b)])
    path = _out_path(args, "resonance.csv")
    path.write_text(buf.getvalue())
    return {"command": "resonance", "out": str(path), "rows": len(rows)}


def cmd_melnikov(args) -> dict:
    beta4 = args.beta4 if args.mode == "sn" else 0.0
    if args.mode == "pf" and args.beta4 not in (None, 0.0):
        raise CliError("pf mode needs beta4 = 0")
    rep = melnikov.melnikov_report(args.s, args.ell, beta2=args.beta2, beta4=beta4 if beta4 is not None else 1.0, mode=args.mode)
    doc = rep.as_dict()
    path = _out_path(args, f"melnikov_{args.mode}_ell{args.ell}.json")
    path.write_text(_dump_json(doc))
    return {"command": "melnikov", "out": str(path), "classification": rep.classification}


def cmd_bounded(args) -> dict:
    p = SystemParams(s=args.s, beta1=args.beta1)
    res = variational.count_bounded_solutions(variational.ve_along_homoclinic(p), T=args.T, sv_tol=args.sv_tol)
    ell = fuchsian.find_resonant_ell(args.s, args.beta1, tol=1e-6)
    doc = {
        "s": args.s,
        "beta1": args.beta1,
        "T": args.T,
        "sv_tol": args.sv_tol,
        "n0": res.n0,
        "sines": res.sines.tolist(),
        "resonant_ell": ell,
    }
    path = _out_path(args, "bounded.json")
    path.write_text(_dump_json(doc))
    return {"command": "bounded", "out": str(path), "n0": res.n0}


def cmd_kimura(args) -> dict:
    have_nu = args.nu1 is not None or args.nu2 is not None
    if have_nu and args.rho is not None:
        raise _UsageError("give either --nu1/--nu2 or --rho, not both")
    if args.rho is not None:
        scheme = fuchsian.exponents_from_differences(*args.rho)
    elif args.nu1 is not None and args.nu2 is not None:
        scheme = fuchsian.exponents_from_nu(args.nu1, args.nu2)
    else:
        raise _UsageError("need --nu1 and --nu2, or --rho R1 R2 R3")
    v = fuchsian.kimura_triangularizable(scheme, tol=args.tol)
    doc = {
        "rho": list(scheme.rho),
        "triangularizable": v.triangularizable,
        "witness": v.witness,
        "value": v.value,
        "combinations": v.combinations,
    }
    path = _out_path(args, "kimura.json")
    path.write_text(_dump_json(doc))
    return {"command": "kimura", "out": str(path), "triangularizable": v.triangularizable, "witness": v.witness}


def cmd_continue(args) -> dict:
    overrides = dict(args.param or [])
    cfg = None
    if args.diagram == "custom":
        if not args.control:
            raise _UsageError("--diagram custom needs --control")
        lo = args.lam_min if args.lam_min is not None else -math.inf
        hi = args.lam_max if args.lam_max is not None else math.inf
        cfg = ContinuationConfig(ds=args.ds or 0.05, max_points=args.max_points or 100, lam_min=lo, lam_max=hi)
    elif any(v is not None for v in (args.ds, args.max_points, args.lam_min, args.lam_max)):
        base = PRESETS[args.diagram].config
        kw = {}
        if args.ds is not None:
            kw["ds"] = args.ds
        if args.max_points is not None:
            kw["max_points"] = args.max_points
        if args.lam_min is not None:
            kw["lam_min"] = args.lam_min
        if args.lam_max is not None:
            kw["lam_max"] = args.lam_max
        cfg = replace(base, **kw)
    result = run_preset(args.diagram, overrides, orbit_sign=args.orbit_sign, control=args.control, config=cfg)
    br = result.branch
    switches = []
    extra_rows = []
    for sp, sw in result.switches:
        if isinstance(sw, str):
            switches.append({"lam": sp.lam, "error": sw})
            continue
        m = sw.point.measures
        switches.append(
            {
                "lam": sp.lam,
                "criticality": sw.criticality,
                "quadratic_coefficient": sw.quadratic_coefficient,
                "amplitudes": list(sw.amplitudes),
                "lam_shifts": list(sw.lam_shifts),
                "conjugate_residual": sw.conjugate_residual,
                "x2_max": m["x2_max"],
                "x2_min": m["x2_min"],
            }
        )
        extra_rows.append(
            (sw.point.lam, sw.point.nu1, m["x2_0"], m["x2_max"], m["x2_min"], sw.point.residual, f"switch-{sw.criticality}")
        )
    ext = "json" if args.format == "json" else "csv"
    path = _out_path(args, f"branch_{args.diagram}.{ext}")
    extra = {"diagram": args.diagram, "orbit_sign": args.orbit_sign, "params": result.preset.params.as_dict(), "switches": switches}
    write_branch(br, path, args.format, meshes=args.meshes, extra=extra, extra_rows=extra_rows)
    return {
        "command": "continue",
        "out": str(path),
        "points": len(br.points),
        "specials": [{"kind": sp.kind, "lam": sp.lam} for sp in br.specials],
        "switches": [{"lam": s["lam"], "criticality": s.get("criticality")} for s in switches],
    }


# ---------------------------------------------------------------- parser

_RESONANCE_HELP = """output: CSV with header 's,ell,beta1' and one row per (ell, s) sample;
numbers use 17 significant digits."""

_MELNIKOV_HELP = """output: JSON object with keys s, ell, beta1, mode, a2, b2, bar_a2, bar_b2
(each null or {value, error}), closed_form_a2, closed_form_b2 (null unless
mode=sn and ell in {0,2,4}), classification (one of saddle-node-supercritical,
saddle-node-subcritical, pitchfork-supercritical, pitchfork-subcritical,
degenerate, none) and params {beta2, beta4}."""

_BOUNDED_HELP = """output: JSON object with keys s, beta1, T, sv_tol, n0 (number of
independent bounded solutions of the variational equation along x_h),
sines (principal-angle sines at t=0) and resonant_ell (or null)."""

_KIMURA_HELP = """output: JSON object with keys rho (exponent differences),
triangularizable (bool), witness (name of the odd-integer combination or
null), value and combinations (all four signed sums)."""

_CONTINUE_HELP = f"""diagrams:
  fig7a  s=2, beta1=1.7071068, beta2=1, beta4=2; control beta3
  fig7b  s=2, beta1=7.5355339, beta2=1, beta4=2; control beta3
  fig7c  s=2, beta1=17.36396103, beta2=10, beta4=20; control beta3
  fig9   s=2, beta2=1, beta3=beta4=0; control beta1 on [0.4, 20], with
         branch switching at every detected pitchfork
  custom defaults s=2 and all other parameters 0; needs --control

output (csv): columns control,nu1,x2_0,x2_max,x2_min,residual,tag.
One row per branch point (empty tag), one per special point (tag fold or
pitchfork) and one per switched point (tag switch-supercritical or
switch-subcritical). 17 significant digits.
output (json): object with control, stop_reason, points (params, lam,
residual, measures, fold_test, pf_sign, optional grid/X meshes), specials,
diagram, orbit_sign, params and switches.

Default output directory: ${OUTDIR_ENV} or the working directory."""


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="homoclinic-gl", description="Homoclinic bifurcation analysis for a coupled Ginzburg-Landau steady-state system.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)
    fmt = argparse.RawDescriptionHelpFormatter

    r = sub.add_parser("resonance", help="sample the resonance curves beta1(s, ell)", epilog=_RESONANCE_HELP, formatter_class=fmt)
    r.add_argument("--s-min", type=float, required=True)
    r.add_argument("--s-max", type=float, required=True)
    r.add_argument("--ell-list", type=_int_list, required=True, help="comma separated, e.g. 0,1,2")
    r.add_argument("--points", type=int, default=50)
    r.add_argument("--out")
    r.set_defaults(func=cmd_resonance)

    m = sub.add_parser("melnikov", help="Melnikov coefficients and classification", epilog=_MELNIKOV_HELP, formatter_class=fmt)
    m.add_argument("--s", type=float, required=True)
    m.add_argument("--ell", type=int, required=True)
    m.add_argument("--beta2", type=float, default=1.0)
    m.add_argument("--beta4", type=float, default=None, help="default 1 in sn mode, must be 0 in pf mode")
    m.add_argument("--mode", choices=("sn", "pf"), default="sn")
    m.add_argument("--out")
    m.set_defaults(func=cmd_melnikov)

    b = sub.add_parser("bounded", help="count bounded solutions of the variational equation", epilog=_BOUNDED_HELP, formatter_class=fmt)
    b.add_argument("--s", type=float, required=True)
    b.add_argument("--beta1", type=float, required=True)
    b.add_argument("--T", type=float, default=20.0)
    b.add_argument("--sv-tol", type=float, default=1e-4)
    b.add_argument("--out")
    b.set_defaults(func=cmd_bounded)

    c = sub.add_parser("continue", help="continue a branch of homoclinic orbits", epilog=_CONTINUE_HELP, formatter_class=fmt)
    c.add_argument("--diagram", choices=("fig7a", "fig7b", "fig7c", "fig9", "custom"), required=True)
    c.add_argument("--param", type=_param_override, action="append", metavar="NAME=VALUE")
    c.add_argument("--control", choices=[p.value for p in ParamId if p is not ParamId.NU1])
    c.add_argument("--orbit-sign", type=int, choices=(1, -1), default=1)
    c.add_argument("--ds", type=float)
    c.add_argument("--max-points", type=int)
    c.add_argument("--lam-min", type=float)
    c.add_argument("--lam-max", type=float)
    c.add_argument("--format", choices=("csv", "json"), default="csv")
    c.add_argument("--meshes", action="store_true", help="include solution meshes in JSON output")
    c.add_argument("--out")
    c.set_defaults(func=cmd_continue)

    k = sub.add_parser("kimura", help="Kimura triangularizability verdict", epilog=_KIMURA_HELP, formatter_class=fmt)
    k.add_argument("--nu1", type=float)
    k.add_argument("--nu2", type=float)
    k.add_argument("--rho", type=float, nargs=3, metavar=("R1", "R2", "R3"))
    k.add_argument("--tol", type=float, default=1e-9)
    k.add_argument("--out")
    k.set_defaults(func=cmd_kimura)
    return ap


def _fail(kind: str, message: str, code: int) -> int:
    line = json.dumps({"error": kind, "message": " ".join(str(message).split())})
    print(line, file=sys.stderr)
    return code


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
        summary = args.func(args)
    except _UsageError as exc:
        return _fail("usage", str(exc), 2)
    except (CliError, ValueError, KeyError, ArithmeticError, RuntimeError, np.linalg.LinAlgError, OSError) as exc:
        return _fail(type(exc).__name__, str(exc), 1)
    print(json.dumps(summary))
    return 0


if __name__ == "__main__":
    sys.exit(main())
