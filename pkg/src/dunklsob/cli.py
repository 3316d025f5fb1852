"""Command line front end: ``dunklsob <subcommand> [options]``.

Subcommands are ``constants``, ``quad``, ``heat``, ``transform``, ``besov``,
``rearrange`` and ``verify``.  Results are printed as JSON (or written to
``--out``).  The exit code is 0 on success, 1 when a verification check
fails and 2 on usage errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import constants as C
from .errors import DunklError
from .fields import field_from_spec
from .rootsys import ChamberSign, RootSystem, load_root_system
from .verify import (
    Status,
    _emit,
    report_to_json,
    run_suite,
    suite_config_from_dict,
    write_csv_tables,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.prog}: error: {message}")


def _points(text: str, n: int) -> np.ndarray:
    """``"0.5"`` or ``"1,2;0,1"``: points separated by ``;``, coordinates by ``,``."""
    pts = [[float(v) for v in chunk.split(",")] for chunk in text.split(";") if chunk.strip()]
    arr = np.asarray(pts, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != n:
        raise _UsageError(f"points must have {n} coordinate(s): {text!r}")
    return arr


def parse_domain(text: str, rs: RootSystem):
    """``full``, ``ball:R``, ``box:lo;hi`` (comma-separated corners), ``chamber:SIGNS``
    or ``chamber-ball:SIGNS,R``."""
    from .quadrature import WeightedDomain

    kind, _, arg = text.partition(":")
    kind = kind.strip().lower()
    if kind in ("full", "full_space"):
        return WeightedDomain.full_space(rs)
    if kind == "ball":
        return WeightedDomain.ball(rs, float(arg))
    if kind == "box":
        lo, _, hi = arg.partition(";")
        if not hi:
            # N = 1 shorthand box:lo,hi
            vals = [float(v) for v in arg.split(",")]
            if rs.dimension != 1 or len(vals) != 2:
                raise _UsageError("box needs 'lo1,..;hi1,..' corners")
            return WeightedDomain.box(rs, [vals[0]], [vals[1]])
        return WeightedDomain.box(rs, [float(v) for v in lo.split(",")], [float(v) for v in hi.split(",")])
    if kind == "chamber":
        return WeightedDomain.in_chamber(rs, ChamberSign.parse(arg))
    if kind == "chamber-ball":
        signs, _, r = arg.rpartition(",")
        return WeightedDomain.chamber_ball(rs, ChamberSign.parse(signs), float(r))
    raise _UsageError(f"unknown domain {text!r}")


def _write(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _dump(obj, out: str | None = None):
    _write(_emit(obj) + "\n", out)


def _field(args, rs):
    if not args.field:
        raise _UsageError("--field is required")
    return field_from_spec(args.field, rs)


# -- subcommands ---------------------------------------------------------------------

def cmd_constants(args) -> int:
    rs = load_root_system(args.rs)
    doc = C.constants_report(rs, args.p).to_dict()
    doc["macdonald_mehta_product_formula"] = C.macdonald_mehta_product(rs)
    doc["sharp_gamma_bound_constant"] = C.sharp_gamma_bound_constant(rs)
    doc["chamber_sphere_constant"] = C.chamber_sphere_constant(rs)
    doc["root_system"] = rs.summary()
    _dump(doc, args.out)
    return EXIT_OK


def cmd_quad(args) -> int:
    from .quadrature import integrate_weighted, lp_norm

    rs = load_root_system(args.rs)
    f = _field(args, rs)
    dom = parse_domain(args.domain, rs)
    p = args.p
    if p is not None and not np.isfinite(p):
        if args.dump_cells:
            raise _UsageError("--dump-cells needs a finite --p")
        doc = {"p": p, "norm": lp_norm(f, p, dom, args.tol)}
    else:
        if p is None:
            integrand, decay = f, None
        else:
            integrand = lambda x: np.abs(f(x)) ** p  # noqa: E731
            decay = f.decay.power_of(p) if f.decay is not None else None
        res = integrate_weighted(integrand, dom, args.tol, decay=decay, record_cells=bool(args.dump_cells))
        if p is None:
            doc = {"value": res.value, "error_estimate": res.error_estimate, "cells": res.cells_used}
        else:
            doc = {"p": p, "norm": max(res.value, 0.0) ** (1 / p), "integral": res.value,
                   "error_estimate": res.error_estimate, "cells": res.cells_used}
        if args.dump_cells:
            with open(args.dump_cells, "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["s0", "s1", "theta0", "theta1", "value", "error"])
                for c in res.cells or ():
                    w.writerow([format(v, ".17g") for v in (c.s0, c.s1, c.theta0, c.theta1, c.value, c.error)])
    doc.update(field=f.name, domain=args.domain)
    _dump(doc, args.out)
    return EXIT_OK


def cmd_heat(args) -> int:
    from .kernel import heat_apply

    rs = load_root_system(args.rs)
    f = _field(args, rs)
    if args.t is None or args.at is None:
        raise _UsageError("heat needs --t and --at")
    x = _points(args.at, rs.dimension)
    vals = heat_apply(rs, f, args.t, x)
    _dump({"t": args.t, "field": f.name, "points": x.tolist(), "values": np.atleast_1d(vals).tolist()},
          args.out)
    return EXIT_OK


def cmd_transform(args) -> int:
    from .kernel import dunkl_transform

    rs = load_root_system(args.rs)
    f = _field(args, rs)
    if args.xi is None:
        raise _UsageError("transform needs --xi")
    xi = _points(args.xi, rs.dimension)
    v = np.atleast_1d(dunkl_transform(rs, f, xi, args.tol))
    _dump({"field": f.name, "xi": xi.tolist(), "real": v.real.tolist(), "imag": v.imag.tolist()}, args.out)
    return EXIT_OK


def cmd_besov(args) -> int:
    from .kernel import besov_norm, default_t_grid

    rs = load_root_system(args.rs)
    f = _field(args, rs)
    if args.s is None:
        raise _UsageError("besov needs --s")
    grid = default_t_grid(args.t_points)
    _dump({"field": f.name, "s": args.s, "t_points": args.t_points,
           "besov_norm": besov_norm(rs, f, args.s, grid)}, args.out)
    return EXIT_OK


def cmd_rearrange(args) -> int:
    from .quadrature import WeightedDomain, lp_norm
    from .rearrange import decreasing_rearrangement

    rs = load_root_system(args.rs)
    f = _field(args, rs)
    ch = ChamberSign.parse(args.chamber) if args.chamber else rs.chambers[0]
    r = decreasing_rearrangement(rs, f, ch, count=args.levels)
    dom = WeightedDomain.in_chamber(rs, ch)
    norms = {}
    for p in (1.0, 2.0, 6.0):
        norms[f"{p:g}"] = {"original": lp_norm(f, p, dom), "rearranged": r.lp_norm(p)}
    doc = {"field": f.name, "chamber": str(ch), "sup": r.sup, "outer_radius": r.outer_radius,
           "lp_norms": norms, "gradient_l2_norm": r.gradient_lp_norm(2.0)}
    if args.csv:
        path = Path(args.csv)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["radius", "value"])
            for rad, val in zip(r.profile.radii, r.profile.values):
                w.writerow([format(rad, ".17g"), format(val, ".17g")])
    _dump(doc, args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    doc = {}
    if args.config:
        doc = json.loads(Path(args.config).read_text())
    out = args.out or doc.get("out")
    csv_dir = args.csv or doc.get("csv")
    if args.rs is None and "root_system" not in doc:
        raise _UsageError("verify needs --rs or a --config with a root_system")
    if args.seed is None and "seed" not in doc:
        args.seed = 42
    cfg = suite_config_from_dict(doc, root_system=args.rs, seed=args.seed,
                                 checks=None if args.suite in (None, "all") else args.suite,
                                 threads=args.threads, tol_scale=args.tol_scale)
    report = run_suite(cfg)
    _write(report_to_json(report, include_timing=args.timing), out)
    if csv_dir:
        write_csv_tables(report, csv_dir)
    for r in report.results:
        print(f"{r.check_name:20s} {r.status.value}", file=sys.stderr)
    return EXIT_FAIL if any(r.status is Status.FAIL for r in report.results) else EXIT_OK


# -- parser ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dunklsob", description="Dunkl operators and Sobolev-type inequalities.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def common(p, field=True):
        p.add_argument("--rs", help="root system: shorthand (a1:k=1, a2:k=1, b2:k=1,0.5, "
                       "i2m:m=5,k=1, a1x2:k=1,1) or a JSON file")
        if field:
            p.add_argument("--field", help="test field, e.g. gaussian, odd-gaussian, talenti, "
                           "bump:0,1.5, mixture:7, box:1,2")
        p.add_argument("--out", help="write the JSON result here instead of standard output")

    p = sub.add_parser("constants", help="closed-form constants")
    common(p, field=False)
    p.add_argument("--p", type=float, default=2.0)
    p.set_defaults(func=cmd_constants, needs_rs=True)

    p = sub.add_parser("quad", help="weighted integral or L^p norm")
    common(p)
    p.add_argument("--domain", default="full")
    p.add_argument("--p", type=float, default=None, help="compute the L^p norm instead of the integral")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--dump-cells", help="CSV file for per-cell contributions")
    p.set_defaults(func=cmd_quad, needs_rs=True)

    p = sub.add_parser("heat", help="heat semigroup P_t f at points")
    common(p)
    p.add_argument("--t", type=float)
    p.add_argument("--at", help="points, e.g. '0.5' or '1,2;0,1'")
    p.set_defaults(func=cmd_heat, needs_rs=True)

    p = sub.add_parser("transform", help="Dunkl transform at frequencies")
    common(p)
    p.add_argument("--xi", help="frequencies, same format as --at")
    p.add_argument("--tol", type=float, default=1e-10)
    p.set_defaults(func=cmd_transform, needs_rs=True)

    p = sub.add_parser("besov", help="negative-smoothness Besov norm")
    common(p)
    p.add_argument("--s", type=float)
    p.add_argument("--t-points", type=int, default=61)
    p.set_defaults(func=cmd_besov, needs_rs=True)

    p = sub.add_parser("rearrange", help="symmetric decreasing rearrangement on a chamber")
    common(p)
    p.add_argument("--chamber", help="sign pattern such as + or +-+")
    p.add_argument("--levels", type=int, default=300)
    p.add_argument("--csv", help="CSV file for the radial profile")
    p.set_defaults(func=cmd_rearrange, needs_rs=True)

    p = sub.add_parser("verify", help="run the inequality checks")
    common(p, field=False)
    p.add_argument("--config", help="JSON suite configuration")
    p.add_argument("--suite", default="all", help="'all' or comma-separated check names")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--csv", help="directory for one CSV table per check")
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--tol-scale", type=float, default=None)
    p.add_argument("--timing", action="store_true", help="include wall time in the JSON")
    p.set_defaults(func=cmd_verify, needs_rs=False)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        if not argv:
            raise _UsageError("a subcommand is required")
        args = parser.parse_args(argv)
        if args.command is None:
            raise _UsageError("a subcommand is required")
        if args.needs_rs and not args.rs:
            raise _UsageError("--rs is required")
        return args.func(args)
    except _UsageError as exc:
        parser.print_usage(sys.stderr)
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (DunklError, ValueError, KeyError, OSError) as exc:
        print(f"dunklsob: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
