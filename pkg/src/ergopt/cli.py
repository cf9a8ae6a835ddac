"""Command line front end: ``ergopt analyze|pressure|verify|oracle FILE``.

Exit codes: 0 success or PASS, 1 error, 2 verification failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import fileformat, oracle, pipeline, thermo
from .errors import ErgoptError, TooLarge

EXIT_OK, EXIT_ERROR, EXIT_FAIL = 0, 1, 2
CSV_COLUMNS = ["beta", "pressure", "residual", "log_residual", "slope", "trusted"]
PRESSURE_NOTE = ("P(beta) is the pressure of the normalized potential; "
                 "for the original potential use P_A(beta) = P(beta) + beta*m")


def fmt(x):
    if x is None:
        return "-inf"
    if isinstance(x, Fraction):
        if x.denominator == 1:
            return str(x.numerator)
        return f"{x} ({float(x):.12g})"
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def _json_number(x):
    if x is None:
        return None
    if isinstance(x, Fraction):
        return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, int):
        return x
    return float(x)


def _load(path, args=None):
    spec = fileformat.parse_system_file(path)
    if args is not None:
        spec = fileformat.with_options(
            spec,
            beta_min=getattr(args, "beta_min", None),
            beta_max=getattr(args, "beta_max", None),
            beta_steps=getattr(args, "steps", None),
            precision_bits=getattr(args, "precision_bits", None),
            tol_verify=getattr(args, "tol", None),
        )
    return spec


def _analyze(spec):
    o = spec.options
    return pipeline.analyze(spec.system, spec.potential, tol_zero=o.tol_zero, tol_h=o.tol_h)


def _precision(spec):
    return thermo.PrecisionConfig(mantissa_bits=spec.options.precision_bits)


def _betas(spec):
    o = spec.options
    return pipeline.beta_grid(o.beta_min, o.beta_max, o.beta_steps)


# ---------------------------------------------------------------- analyze

def analysis_dict(a):
    g = a.normalized_graph
    d = a.decomposition
    ext = a.ext
    return {
        "m": _json_number(a.m),
        "V": {g.vertex_str(v): _json_number(a.V[v]) for v in range(g.n_vertices)},
        "components": [
            {"id": c.id, "vertices": [g.vertex_str(v) for v in c.vertex_set],
             "entropy": c.entropy, "V": _json_number(c.subaction_value)}
            for c in d.components
        ],
        "h": d.h,
        "max_entropy_ids": list(d.max_entropy_ids),
        "omega_is_whole": a.omega_is_whole,
        "s_ext": [[_json_number(ext(j, i)) for i in ext.ids] for j in ext.ids],
        "s_ext_skipped": {f"{j},{i}": [g.vertex_str(v) for v in vs] for (j, i), vs in sorted(ext.skipped.items())},
        "lambda": _json_number(a.bound.lam),
        "witness_cycle": list(a.bound.witness_cycle),
        "note": PRESSURE_NOTE,
    }


def analysis_report(a):
    g = a.normalized_graph
    d = a.decomposition
    ext = a.ext
    out = [f"m(A) = {fmt(a.m)}", "", "calibrated subaction V:"]
    for v in range(g.n_vertices):
        out.append(f"  V({g.vertex_str(v)}) = {fmt(a.V[v])}")
    out += ["", "irreducible components of the Aubry set:",
            f"  {'id':>3}  {'entropy':>14}  {'V':>10}  vertices"]
    for c in d.components:
        verts = " ".join(g.vertex_str(v) for v in c.vertex_set)
        out.append(f"  {c.id:>3}  {c.entropy:>14.12g}  {fmt(c.subaction_value):>10}  {verts}")
    out += ["", f"h = {d.h:.15g}",
            f"maximal-entropy components: {', '.join(map(str, d.max_entropy_ids))}", ""]
    if a.omega_is_whole:
        out.append("Omega = X, single component, S_ext undefined (no exterior)")
    else:
        out.append("S_ext(j, i)  (row j = origin, column i = target):")
        width = 14
        out.append("  " + " " * 4 + "".join(f"{i:>{width}}" for i in ext.ids))
        for j in ext.ids:
            out.append(f"  {j:>4}" + "".join(f"{fmt(ext(j, i)):>{width}}" for i in ext.ids))
        for (j, i), vs in sorted(ext.skipped.items()):
            names = " ".join(g.vertex_str(v) for v in vs)
            out.append(f"  S_ext({j},{i}): skipped vertices without outside preimage: {names}")
        out.append("")
        if a.bound.lam is None:
            out.append("lambda: no finite cycle among maximal-entropy components (bound vacuous)")
        else:
            cyc = " -> ".join(f"Omega_{c}" for c in a.bound.witness_cycle)
            out.append(f"lambda = {fmt(a.bound.lam)}   witness cycle: [{cyc}]")
    out += ["", PRESSURE_NOTE]
    return "\n".join(out)


def cmd_analyze(args):
    spec = _load(args.file)
    a = _analyze(spec)
    print(analysis_report(a))
    target = Path(args.json) if args.json else Path(args.file).with_suffix(".analysis.json")
    target.write_text(json.dumps(analysis_dict(a), indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    print(f"\nwrote {target}")
    return EXIT_OK


# ---------------------------------------------------------------- pressure

def pressure_csv(points, precision):
    ctx = precision.context()
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    prev = None
    for p in points:
        slope = ""
        if p.trusted and prev is not None:
            slope = repr((p.log_residual - prev.log_residual) / (p.beta - prev.beta))
        w.writerow([
            repr(float(p.beta)),
            ctx.nstr(p.pressure, 25),
            ctx.nstr(p.residual, 25),
            repr(float(p.log_residual)),
            slope,
            "true" if p.trusted else "false",
        ])
        if p.trusted:
            prev = p
    return buf.getvalue()


def cmd_pressure(args):
    spec = _load(args.file, args)
    a = _analyze(spec)
    precision = _precision(spec)
    points = pipeline.sweep(a, _betas(spec), precision, workers=args.workers)
    text = pressure_csv(points, precision)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {args.out}", file=sys.stderr)
    else:
        sys.stdout.write(text)
    untrusted = sum(not p.trusted and not p.exact_zero for p in points)
    if untrusted:
        print(f"{untrusted} row(s) flagged untrusted (residual near the precision floor)", file=sys.stderr)
    print(PRESSURE_NOTE, file=sys.stderr)
    return EXIT_OK


# ---------------------------------------------------------------- verify

def verify_report(a, report):
    out = []
    lam = report.lam
    out.append(f"lambda (barrier bound) = {fmt(lam) if lam is not None else 'none'}")
    rate = report.rate
    if rate.exact_zero:
        out.append("gamma = -inf (residual identically zero)")
    else:
        out.append(f"gamma estimate (last slope) = {rate.gamma_estimate:.10g}")
        out.append(f"gamma naive (log(P-h)/beta) = {rate.gamma_naive:.10g}")
    for note in report.notes:
        out.append(f"note: {note}")
    if report.diagnostics:
        out += ["", "subaction diagnostic: gamma + V(i) >= S_ext(j,i) + V(j), V ~ (1/beta) log H_beta at the largest trusted beta",
                f"  {'i':>3} {'j':>3} {'lhs':>14} {'rhs':>14}  holds"]
        for i, j, lhs, rhs, holds in report.diagnostics:
            out.append(f"  {i:>3} {j:>3} {lhs:>14.8g} {rhs:>14.8g}  {'yes' if holds else 'no'}")
        out.append(thermo.SUBACTION_CAVEAT)
    verdict = "PASS" if report.passed else "FAIL"
    if lam is not None and not rate.exact_zero:
        out.append(f"\n{verdict}: gamma = {rate.gamma_estimate:.10g} vs lambda - tol = "
                   f"{float(lam) - report.tol:.10g}")
    else:
        out.append(f"\n{verdict}")
    return "\n".join(out)


def cmd_verify(args):
    spec = _load(args.file, args)
    a = _analyze(spec)
    report = pipeline.verify(a, _betas(spec), _precision(spec), spec.options.tol_verify, workers=args.workers)
    print(verify_report(a, report))
    return EXIT_OK if report.passed else EXIT_FAIL


# ---------------------------------------------------------------- oracle

def cmd_oracle(args):
    spec = _load(args.file)
    a = _analyze(spec)
    try:
        reports = oracle.run_oracle_checks(a, args.max_length, instance=str(args.file))
    except TooLarge as exc:
        print(f"skipped: {exc}")
        return EXIT_OK
    for r in reports:
        print(r.line())
    bad = [r for r in reports if not r.passed]
    print(f"\n{len(reports) - len(bad)}/{len(reports)} checks agree")
    return EXIT_FAIL if bad else EXIT_OK


# ---------------------------------------------------------------- main

def build_parser():
    ap = argparse.ArgumentParser(prog="ergopt", description="Ergodic optimization of locally constant potentials on SFTs.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="normalize, decompose the Aubry set, barriers and rate bound")
    p.add_argument("file")
    p.add_argument("--json", default=None, help="where to write the JSON copy (default: FILE.analysis.json)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("pressure", help="extended-precision pressure sweep as CSV")
    p.add_argument("file")
    p.add_argument("--beta-min", type=float)
    p.add_argument("--beta-max", type=float)
    p.add_argument("--steps", type=int)
    p.add_argument("--precision-bits", type=int)
    p.add_argument("--out", default=None, help="CSV path (default: stdout)")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_pressure)

    p = sub.add_parser("verify", help="check the measured decay rate against the barrier bound")
    p.add_argument("file")
    p.add_argument("--tol", type=float)
    p.add_argument("--beta-min", type=float)
    p.add_argument("--beta-max", type=float)
    p.add_argument("--steps", type=int)
    p.add_argument("--precision-bits", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("oracle", help="compare every optimized quantity with brute force")
    p.add_argument("file")
    p.add_argument("--max-length", type=int, default=None)
    p.set_defaults(func=cmd_oracle)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ErgoptError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
