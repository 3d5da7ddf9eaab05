"""Command line: ``jacobipoly list | table | verify | reconstruct``.

Exit codes are 0 on success, 1 when a verification check fails and 2 for
usage or configuration errors (bad parameters, unknown families, missing
coefficients, unsupported regimes).  JSON output carries the shortest
round-trip representation of every double (at most 17 significant
digits); CSV output uses 12 significant digits.  ``JACOBIPOLY_RTOL`` sets
the default relative tolerance of ``verify``.
"""
from __future__ import annotations

import argparse
import csv
import sys

import numpy as np

from . import export
from .driver import SUITES, ConfigError, SuiteConfig, env_tolerance, run_suite
from .families import (
    ClosureCoefficients,
    LatticeError,
    ParameterError,
    UnknownFamilyError,
    catalog_metadata,
    custom_family,
    eval_family,
    family_ids,
    get_family,
)
from .reconstruction import DegenerateLattice, UnsupportedRegime, reconstruct, roundtrip_catalog
from .spectral import SpectrumMethodError, build_P_table

LATTICE_QUANTITIES = ("B", "D", "eta", "phi0sq", "phi")
SPECTRAL_QUANTITIES = ("E", "A", "C", "dnsq", "R1", "R0", "Rm1")
DEFAULT_INFINITE_XMAX = 20
DEFAULT_INFINITE_NMAX = 10

# flag -> ClosureCoefficients field; the two R0 entries default to r0_2 = r1_1, r0_1 = 2 r1_0
COEFFICIENT_FLAGS = {
    "r11": "r1_1", "r10": "r1_0", "r02": "r0_2", "r01": "r0_1", "r00": "r0_0",
    "rm12": "rm1_2", "rm11": "rm1_1", "rm10": "rm1_0",
}
CONSTRAINT_RTOL = 1e-12


class UsageError(Exception):
    pass


def parse_assignments(items):
    values = {}
    for item in items:
        name, sep, raw = item.partition("=")
        if not sep or not name:
            raise UsageError(f"expected name=value, got {item!r}")
        try:
            values[name] = float(raw)
        except ValueError:
            raise UsageError(f"{name}: {raw!r} is not a number") from None
    return values


def _emit(text, path):
    if path is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


# --------------------------------------------------------------------- list

def describe_partner(meta):
    if meta["partner"] == "self":
        return "self-dual"
    return f"dual: {meta['partner']}" if meta["partner"] else "no partner"


def cmd_list(args):
    meta = catalog_metadata()
    if args.filter:
        meta = [m for m in meta if m["kind"] == args.filter]
    if args.json:
        _emit(export.dumps({"count": len(meta), "filter": args.filter}, meta), None)
        return 0
    for m in meta:
        head = f"{m['id']} ({m['kind']}, {describe_partner(m)})"
        print(f"{head:60s} parameters: {', '.join(m['parameters'])}")
    return 0


# -------------------------------------------------------------------- table

def table_columns(family, p, quantities, xmax, nmax):
    """Index name, index values and ``(header, column)`` pairs for ``table``."""
    lattice = [q for q in quantities if q in LATTICE_QUANTITIES or q == "P"]
    spectral = [q for q in quantities if q in SPECTRAL_QUANTITIES]
    unknown = [q for q in quantities if q not in lattice and q not in spectral]
    if unknown:
        raise UsageError(f"unknown quantity {unknown[0]!r}; choose from "
                         f"{', '.join(LATTICE_QUANTITIES + SPECTRAL_QUANTITIES + ('P',))}")
    if lattice and spectral:
        raise UsageError("lattice quantities (indexed by x) and spectral ones (indexed by n) "
                         "go in separate tables")
    if spectral:
        n = np.arange(nmax + 1)
        return "n", n, [(q, eval_family(family.id, p, q, n)) for q in spectral]
    x = np.arange(xmax + 1)
    cols = []
    for q in lattice:
        if q == "P":
            route = "closed_form" if family.P is not None else "recurrence"
            tab = build_P_table(family, p, xmax, route=route, n_max=nmax)
            cols.extend((f"P{k}", tab.values[k]) for k in range(nmax + 1))
        else:
            cols.append((q, eval_family(family.id, p, q, x)))
    return "x", x, cols


def cmd_table(args):
    family = get_family(args.family)
    p = family.params(parse_assignments(args.params))
    quantities = [q for chunk in args.quantities for q in chunk.split(",") if q]
    top = p.N if family.finite else None
    xmax = args.xmax if args.xmax is not None else (top if top is not None else DEFAULT_INFINITE_XMAX)
    nmax = args.nmax if args.nmax is not None else (top if top is not None else DEFAULT_INFINITE_NMAX)
    if xmax < 0 or nmax < 0:
        raise UsageError("--xmax and --nmax must be non-negative")
    index, idx, cols = table_columns(family, p, quantities, xmax, nmax)
    header = [index] + [h for h, _ in cols]
    if args.format == "csv":
        rows = [[int(i)] + [float(c[k]) for _, c in cols] for k, i in enumerate(idx)]
        _emit(export.csv_text(header, rows), args.output)
    else:
        meta = {"family": family.id, "params": family.user_values(p), "columns": header}
        data = {index: idx} | {h: c for h, c in cols}
        _emit(export.dumps(meta, data), args.output)
    return 0


# ------------------------------------------------------------------- verify

def read_bd_file(path):
    """``B`` and ``D`` columns of a CSV with a header row naming them."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    if not rows or "B" not in rows[0] or "D" not in rows[0]:
        raise UsageError(f"{path}: need a header row with columns B and D")
    try:
        B = [float(r["B"]) for r in rows]
        D = [float(r["D"]) for r in rows]
    except (TypeError, ValueError) as exc:
        raise UsageError(f"{path}: {exc}") from None
    return B, D


def verify_config(args):
    suites = SUITES if args.suites is None else tuple(s for s in args.suites.split(",") if s)
    rtol = args.rtol if args.rtol is not None else env_tolerance()
    tolerances = {}
    for item in args.tol:
        name, sep, raw = item.partition("=")
        try:
            tolerances[name] = float(raw)
        except ValueError:
            raise UsageError(f"--tol expects check=value, got {item!r}") from None
    custom, grid = {}, None
    if args.target == "custom":
        if args.bd_file is None:
            raise UsageError("verify custom needs --bd-file")
        custom = {"custom": custom_family(*read_bd_file(args.bd_file))}
        families = ["custom"]
    else:
        if args.bd_file is not None:
            raise UsageError("--bd-file only applies to the target 'custom'")
        families = family_ids() if args.target == "all" else [get_family(args.target).id]
        if args.params:
            if args.target == "all":
                raise UsageError("parameter assignments need a single family")
            values = parse_assignments(args.params)
            get_family(families[0]).params(values)
            grid = {families[0]: [values]}
    return SuiteConfig(families=families, grid=grid, suites=suites, rtol=rtol, atol=args.atol,
                       tolerances=tolerances, custom=custom)


def cmd_verify(args):
    report = run_suite(verify_config(args))
    if args.json:
        _emit(report.to_json(), args.output)
    else:
        _emit(report.to_table(failures_only=args.failures_only), args.output)
    if args.target == "custom":
        skipped = sum(r.status == "not_applicable" for r in report.records)
        print(f"notice: {skipped} checks need closed forms or closure data and were skipped", file=sys.stderr)
    return 0 if report.ok else 1


# -------------------------------------------------------------- reconstruct

def coefficients_from_flags(args):
    given = {flag: getattr(args, flag) for flag in COEFFICIENT_FLAGS}
    required = [f for f in COEFFICIENT_FLAGS if f not in ("r02", "r01")] + ["eta1", "B0"]
    missing = [f for f in required if getattr(args, f) is None]
    if missing:
        raise UsageError("missing coefficient(s): " + ", ".join("--" + f for f in missing))
    if given["r02"] is None:
        given["r02"] = given["r11"]
    if given["r01"] is None:
        given["r01"] = 2 * given["r10"]
    cc = ClosureCoefficients(**{COEFFICIENT_FLAGS[k]: float(v) for k, v in given.items()})
    if cc.constraint_residual() > CONSTRAINT_RTOL:
        raise UsageError("closure coefficients must satisfy r02 = r11 and r01 = 2 r10")
    return cc


def cmd_reconstruct(args):
    roundtrip = None
    if args.from_family:
        family = get_family(args.from_family)
        p = family.params(parse_assignments(args.params))
        coeffs = family.closure(p)
        if coeffs is None:
            raise UsageError(f"{family.id}: no closure coefficients")
        eta1, B0 = float(family.eta(1, p)), float(family.B(0, p))
        xmax = args.xmax if args.xmax is not None else (p.N if family.finite else DEFAULT_INFINITE_XMAX)
        if family.finite and xmax > p.N:
            raise UsageError(f"--xmax {xmax} exceeds N={p.N}")
        x = np.arange(xmax + 1)
        roundtrip = roundtrip_catalog(family, p, window=xmax, route=args.route)
        catalog = {"B": np.asarray(family.B(x, p), dtype=float), "D": np.asarray(family.D(x, p), dtype=float)}
    else:
        if args.params:
            raise UsageError("parameter assignments need --from-family")
        coeffs = coefficients_from_flags(args)
        eta1, B0 = args.eta1, args.B0
        xmax = args.xmax if args.xmax is not None else DEFAULT_INFINITE_XMAX
        catalog = None
    state = reconstruct(coeffs, eta1, B0, xmax, route=args.route)

    if args.format == "json":
        meta = {"eta_class": state.eta_class.tag, "route": state.route, "ri0cond": state.ri0cond}
        data = state.as_dict()
        if roundtrip is not None:
            data["roundtrip"] = roundtrip.as_dict()
        _emit(export.dumps(meta, data), args.output)
        return 0
    x = np.arange(xmax + 1)
    cols = [("eta", state.eta_values), ("a", state.a_values), ("B", state.B_values), ("D", state.D_values)]
    if catalog is not None:
        cols += [("B_catalog", catalog["B"]), ("D_catalog", catalog["D"])]
    rows = [[int(i)] + [float(c[i]) for _, c in cols] for i in x]
    text = export.csv_text(["x"] + [h for h, _ in cols], rows)
    if args.format == "csv":
        _emit(text, args.output)
        return 0
    cls = state.eta_class
    lines = [f"eta class: {cls.tag}" + ("" if cls.q is None else f" (q = {cls.q!r})"),
             f"route: {state.route}", f"ri0cond: {state.ri0cond:.3e}"]
    if roundtrip is not None:
        lines.append(f"round-trip deviation: {roundtrip.deviation:.3e} (coverage {roundtrip.coverage:.2f})")
        lines.append(f"positive: {roundtrip.positive}")
    _emit("\n".join(lines) + "\n\n" + text, args.output)
    return 0


# ------------------------------------------------------------------- parser

def build_parser():
    ap = argparse.ArgumentParser(prog="jacobipoly", description=__doc__.split("\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("list", help="list the catalog")
    p.add_argument("--json", action="store_true")
    p.add_argument("--filter", choices=("finite", "infinite"))
    p.set_defaults(run=cmd_list)

    p = sub.add_parser("table", help="tabulate family quantities")
    p.add_argument("family")
    p.add_argument("params", nargs="*", metavar="name=value")
    p.add_argument("--quantities", nargs="+", default=["B", "D"],
                   help="lattice: B D eta phi0sq phi P; spectral: E A C dnsq R1 R0 Rm1")
    p.add_argument("--xmax", type=int)
    p.add_argument("--nmax", type=int)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--output", "-o")
    p.set_defaults(run=cmd_table)

    p = sub.add_parser("verify", help="run verification suites")
    p.add_argument("target", help="'all', a family id, or 'custom' with --bd-file")
    p.add_argument("params", nargs="*", metavar="name=value", help="one grid point instead of the default grid")
    p.add_argument("--suites", help=f"comma-separated subset of: {','.join(SUITES)}")
    p.add_argument("--bd-file", help="CSV with columns B and D (x = 0..N)")
    p.add_argument("--rtol", type=float, help="replaces every upper-bound tolerance")
    p.add_argument("--atol", type=float, default=0.0)
    p.add_argument("--tol", action="append", default=[], metavar="check=value")
    p.add_argument("--json", action="store_true")
    p.add_argument("--failures-only", action="store_true")
    p.add_argument("--output", "-o")
    p.set_defaults(run=cmd_verify)

    p = sub.add_parser("reconstruct", help="rebuild B and D from closure data")
    p.add_argument("params", nargs="*", metavar="name=value")
    p.add_argument("--from-family")
    for flag in COEFFICIENT_FLAGS:
        p.add_argument(f"--{flag}", type=float)
    p.add_argument("--eta1", type=float)
    p.add_argument("--B0", type=float)
    p.add_argument("--xmax", type=int)
    p.add_argument("--route", choices=("auto", "simple", "general"), default="auto")
    p.add_argument("--format", choices=("text", "csv", "json"), default="text")
    p.add_argument("--output", "-o")
    p.set_defaults(run=cmd_reconstruct)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        with np.errstate(all="ignore"):
            return args.run(args)
    except UnsupportedRegime as exc:
        print(f"error: unsupported regime: {exc}", file=sys.stderr)
        return 2
    except (UsageError, ConfigError, ParameterError, LatticeError, DegenerateLattice,
            SpectrumMethodError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except UnknownFamilyError as exc:
        print(f"error: {exc.args[0]}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
