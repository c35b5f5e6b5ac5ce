"""Command-line interface.

Five subcommands cover the full workflow: `search` finds candidate codes by
annealed energy minimization, `refine` polishes a candidate to hundreds of
digits, `certify` recovers the exact algebraic structure and checks the
Gram-matrix existence conditions, `analyze` reports structural features,
and `table` renders the reference catalogue and compares results to it.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .algebraic import read_exact_gram_file
from .analyze import DEFAULT_TOL, build_report
from .catalogue import (compare, load_reference, read_rows, render_table,
                        write_rows)
from .certify import certify_pipeline, write_certificate_file
from .core import read_code_file, write_code_file
from .energy_search import (AnnealSchedule, NcgOptions, SearchConfig,
                            multi_start_search)
from .refine import read_precision_file, refine, write_precision_file


def _is_precision_file(path) -> bool:
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            return line.startswith("# digits")
    return False


def _cmd_search(args) -> int:
    schedule = AnnealSchedule(s_cap=args.s_cap)
    cg = NcgOptions(max_iters=args.max_iters)
    config = SearchConfig(dim=args.dim, count=args.count, starts=args.starts,
                          rng_seed=args.seed, schedule=schedule, cg=cg,
                          polish=not args.no_polish)

    def progress(i, dmin):
        print(f"start {i}: min distance {dmin:.12f}", file=sys.stderr)

    code = multi_start_search(config, progress=progress)
    write_code_file(args.out, code)
    print(f"wrote {args.out}", file=sys.stderr)
    return 0


def _cmd_refine(args) -> int:
    code = read_code_file(args.infile)
    placed, contacts, partition = refine(code, digits=args.digits,
                                         tol=args.tol)
    write_precision_file(args.out, placed, contacts=len(contacts.edges),
                         rattlers=partition.rattlers)
    print(f"wrote {args.out} ({placed.precision} digits, "
          f"{len(contacts.edges)} contacts, "
          f"{len(partition.rattlers)} rattler(s))", file=sys.stderr)
    return 0


def _cmd_certify(args) -> int:
    pcode, _meta = read_precision_file(args.infile)
    if pcode.dim != args.dim:
        print(f"error: input has dimension {pcode.dim}, not {args.dim}",
              file=sys.stderr)
        return 2
    cert, row, gram = certify_pipeline(pcode, args.dim, args.max_degree,
                                       precision=args.precision,
                                       return_gram=True)
    write_certificate_file(args.out, cert, gram)
    if args.row:
        write_rows(args.row, [row])
    poly = "Unknown" if row.polynomial is None else str(row.polynomial)
    print(f"verdict: {cert.verdict}; u = {row.u_decimal}; "
          f"minimal polynomial: {poly}", file=sys.stderr)
    for note in cert.notes:
        print(f"note: {note}", file=sys.stderr)
    return 0 if cert.verdict == "pass" else 1


def _cmd_analyze(args) -> int:
    if _is_precision_file(args.infile):
        code, _meta = read_precision_file(args.infile)
    else:
        code = read_code_file(args.infile)
    g = read_exact_gram_file(args.exact) if args.exact else None
    report = build_report(code=code, g=g, tol=args.tol)
    if args.report:
        Path(args.report).write_text(report, encoding="utf-8")
        print(f"wrote {args.report}", file=sys.stderr)
    else:
        print(report, end="")
    return 0


def _cmd_table(args) -> int:
    rows = [r for r in load_reference() if r.dim == args.dim]
    fmt = "csv" if args.csv else "text"
    print(render_table(rows, dim=args.dim, fmt=fmt), end="")
    status = 0
    if args.compare:
        reference = {(r.dim, r.count): r for r in rows}
        found = []
        for path in sorted(Path(args.compare).glob("*.row")):
            found.extend(read_rows(path))
        for row in found:
            if row.dim != args.dim:
                continue
            ref = reference.get((row.dim, row.count))
            if ref is None:
                print(f"({row.dim}, {row.count}): no reference entry")
                continue
            report = compare(row, ref)
            print(report)
            if report.classification == "regression":
                status = 1
    return status


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="sphcode",
        description="Search, refine, certify, and analyze spherical codes.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("search", help="multi-start annealed energy search")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--starts", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--s-cap", type=float, default=AnnealSchedule().s_cap,
                   help="final inverse-power-law exponent of the anneal")
    p.add_argument("--max-iters", type=int, default=NcgOptions().max_iters,
                   help="conjugate-gradient iteration cap per exponent")
    p.add_argument("--no-polish", action="store_true",
                   help="skip the high-exponent polish of the best start")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_search)

    p = sub.add_parser("refine", help="equalize contacts to many digits")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--digits", type=int, default=500)
    p.add_argument("--tol", type=float, default=1e-5,
                   help="contact-graph distance tolerance")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_refine)

    p = sub.add_parser("certify",
                       help="exact Gram reconstruction and existence check")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--max-degree", type=int, default=16)
    p.add_argument("--precision", type=int, default=400,
                   help="decimal digits used for integer-relation recovery")
    p.add_argument("--out", required=True)
    p.add_argument("--row", help="also write a one-line catalogue row file")
    p.set_defaults(func=_cmd_certify)

    p = sub.add_parser("analyze", help="structural report")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--exact", help="exact Gram file to analyze alongside")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--report", help="write the report here instead of stdout")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("table", help="reference catalogue tables")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--csv", action="store_true")
    p.add_argument("--compare",
                   help="directory of *.row files to compare against")
    p.set_defaults(func=_cmd_table)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
