"""Command line interface: ``hesse-mahler run | table2 | catalog | lvalue | mahler``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time

from .catalog import CatalogError, cache_catalog, load_catalog
from .mahler import DomainError, in_KQ, m3_with_error
from .mpnum import PrecisionContext, principal_root
from .radical import RadicalSyntaxError, evaluate_radical
from .registry import UnknownIdError, parse_printed, printed_digits_match, registry_ids, run, table2_rows

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

RADICAL_HELP = """\
t expressions use integers, + - * /, parentheses, sqrt(n), cbrt(n), the
imaginary unit i and rational powers written ** or ^, for example
  "17766+14094*cbrt(2)+11178*cbrt(4)"
  "6+3*cbrt(2)-9*cbrt(4) + 3*i*sqrt(3)*(cbrt(2)+3*cbrt(4))"
Roots are principal branches."""

REPORT_FIELDS = ("id", "lhs", "rhs", "abs_err", "rel_err", "pass", "precision_bits", "wall_ms")


def _default_bits() -> int:
    env = os.environ.get("HESSE_MAHLER_PREC")
    try:
        return int(env) if env else 256
    except ValueError:
        return 256


def _add_common(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--prec", type=int, default=d(_default_bits()), metavar="BITS",
                   help="working precision in bits (default 256, or $HESSE_MAHLER_PREC)")
    p.add_argument("--tol", type=float, default=d(1e-10), metavar="REL",
                   help="relative tolerance for pass/fail (default 1e-10)")
    p.add_argument("--json", dest="json_path", default=d(None), metavar="PATH",
                   help="also write the reports as JSON to PATH")
    p.add_argument("--format", choices=("text", "json", "csv"), default=d("text"))
    p.add_argument("--jobs", type=int, default=d(1), metavar="N", help="worker processes for run")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hesse-mahler",
        description="Verify Mahler measure identities for x^3 + y^3 + 1 - kxy at arbitrary precision.",
        epilog=RADICAL_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    _add_common(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run registry entries (default: all)",
                       description="Registry ids: " + ", ".join(registry_ids()))
    p.add_argument("ids", nargs="*", default=["all"])
    _add_common(p, suppress=True)

    p = sub.add_parser("table2", help="t(tau) at every tabulated CM point, compared with the printed values")
    p.add_argument("--output", "-o", metavar="PATH", help="write the table to PATH instead of stdout")
    _add_common(p, suppress=True)

    p = sub.add_parser("catalog", help="write or load the CM-point catalog (JSON lines)")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--out", metavar="PATH", help="compute the catalog and write it to PATH")
    g.add_argument("--load", metavar="PATH", help="validate and re-verify a stored catalog")
    _add_common(p, suppress=True)

    p = sub.add_parser("lvalue", help="L(f, 2) of a named cusp form")
    p.add_argument("form", help="f27, f36, g36, g144, f108 or a table form such as F108, Ft108, G243")
    p.add_argument("--method", choices=("integral", "dirichlet"), default="integral")
    p.add_argument("--terms", type=int, default=100000, help="Dirichlet series terms (dirichlet method)")
    _add_common(p, suppress=True)

    p = sub.add_parser("mahler", help="m_3(t) for an exact t expression",
                       epilog=RADICAL_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("t", help="exact expression for t")
    _add_common(p, suppress=True)
    return parser


def _format_reports(reports: list, fmt: str) -> str:
    if fmt == "json":
        return json.dumps([r.as_dict() for r in reports], indent=2)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(REPORT_FIELDS + ("error",))
        for r in reports:
            d = r.as_dict()
            w.writerow([d[k] for k in REPORT_FIELDS] + [r.error or ""])
        return buf.getvalue().rstrip("\n")
    lines = []
    for r in reports:
        status = "PASS" if r.passed else "FAIL"
        line = f"{status}  {r.id:<18} rel_err={r.rel_err:.3e}  {r.wall_ms:9.1f} ms"
        if r.error:
            line += f"  error: {r.error}"
        lines.append(line)
    n_pass = sum(r.passed for r in reports)
    lines.append(f"{n_pass}/{len(reports)} passed")
    return "\n".join(lines)


def _emit(reports: list, args) -> int:
    print(_format_reports(reports, args.format))
    if args.json_path:
        with open(args.json_path, "w") as fh:
            json.dump([r.as_dict() for r in reports], fh, indent=2)
    return EXIT_OK if reports and all(r.passed for r in reports) else EXIT_FAIL


def emit_table2(fmt: str, prec: PrecisionContext) -> tuple:
    """(text, all_match) for the tabulated CM points."""
    from .qseries import t_eval

    mp = prec.mp
    rows = []
    for form, printed, italic in table2_rows():
        t = t_eval(form, prec)
        re_p, im_p = parse_printed(printed)
        ok = printed_digits_match(t.real, re_p, mp) and printed_digits_match(t.imag, im_p, mp)
        rows.append({"tau": str(form), "t_re": mp.nstr(t.real, 30), "t_im": mp.nstr(t.imag, 30),
                     "printed": printed, "italic": italic, "match": ok})
    all_ok = all(r["match"] for r in rows)
    if fmt == "json":
        return json.dumps(rows, indent=2), all_ok
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)
        return buf.getvalue().rstrip("\n"), all_ok
    lines = [f"{'tau':<12} {'t(tau)':<50} {'printed':<28} match"]
    for r in rows:
        t = f"{r['t_re']} {'+' if not r['t_im'].startswith('-') else '-'} {r['t_im'].lstrip('-')}i"
        lines.append(f"{r['tau']:<12} {t:<50} {r['printed']:<28} {'yes' if r['match'] else 'NO'}")
    lines.append(f"{sum(r['match'] for r in rows)}/{len(rows)} rows match")
    return "\n".join(lines), all_ok


def _cmd_run(args) -> int:
    try:
        reports = run(args.ids, bits=args.prec, tol=args.tol, jobs=args.jobs)
    except UnknownIdError as exc:
        print(f"unknown registry id {exc.args[0]!r}; known: {', '.join(registry_ids())}", file=sys.stderr)
        return EXIT_USAGE
    return _emit(reports, args)


def _cmd_table2(args) -> int:
    text, ok = emit_table2(args.format, PrecisionContext(args.prec))
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return EXIT_OK if ok else EXIT_FAIL


def _cmd_catalog(args) -> int:
    prec = PrecisionContext(args.prec)
    if args.out:
        n = cache_catalog(args.out, prec)
        print(f"wrote {n} CM points to {args.out}")
        return EXIT_OK
    try:
        rows = load_catalog(args.load, prec)
    except CatalogError as exc:
        print(f"catalog error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except OSError as exc:
        print(f"cannot read catalog: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(f"{len(rows)} CM points validated")
    return EXIT_OK


def _cmd_lvalue(args) -> int:
    from .lser import lvalue2, lvalue2_dirichlet, modular_form

    prec = PrecisionContext(args.prec)
    try:
        f = modular_form(args.form, prec)
    except (KeyError, ValueError) as exc:
        print(f"unknown form {args.form!r}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    start = time.perf_counter()
    if args.method == "integral":
        res = lvalue2(f, prec, tol=min(args.tol, float(prec.mp.ldexp(1, -args.prec // 2))))
    else:
        res = lvalue2_dirichlet(f, args.terms)
    wall = 1000 * (time.perf_counter() - start)
    out = {"form": args.form, "level": f.level, "L2": prec.mp.nstr(prec.mp.mpf(res.value), 40),
           "err_estimate": float(res.err_estimate), "method": res.method,
           "precision_bits": args.prec, "wall_ms": round(wall, 3)}
    print(json.dumps(out, indent=2) if args.format == "json" else
          "\n".join(f"{k}: {v}" for k, v in out.items()))
    return EXIT_OK


def _cmd_mahler(args) -> int:
    prec = PrecisionContext(args.prec)
    mp = prec.mp
    try:
        t = evaluate_radical(args.t, prec)
    except RadicalSyntaxError as exc:
        print(f"cannot parse t: {exc}", file=sys.stderr)
        return EXIT_USAGE
    start = time.perf_counter()
    try:
        value, err = m3_with_error(t, prec)
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    wall = 1000 * (time.perf_counter() - start)
    k = principal_root(t, 3, prec)
    out = {"t": mp.nstr(t, 30), "k": mp.nstr(k, 30), "region": in_KQ(k, prec).value,
           "m3": mp.nstr(value, 40), "err_estimate": float(err), "precision_bits": args.prec,
           "wall_ms": round(wall, 3)}
    print(json.dumps(out, indent=2) if args.format == "json" else
          "\n".join(f"{k_}: {v}" for k_, v in out.items()))
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    if args.prec < 64:
        print("--prec must be at least 64", file=sys.stderr)
        return EXIT_USAGE
    commands = {"run": _cmd_run, "table2": _cmd_table2, "catalog": _cmd_catalog,
                "lvalue": _cmd_lvalue, "mahler": _cmd_mahler}
    return commands[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
