"""Command-line entry point.

Subcommands::

    run      execute verification suites and write a report
    eval     parse, transform and evaluate a single expression
    alpha    tabulate alpha(t) for one pair
    catalog  list the built-in test functions and their validation status

Exit status is 0 when every executed check passes, 1 when a check fails and
2 for usage errors.
"""
from __future__ import annotations

import argparse
import os
import sys
from typing import List, Optional

import numpy as np

from .catalog import CatalogEntry, builtin_catalog, check_circular_symmetry, check_psh, make_entry, validate_entry
from .expr import evaluate, to_text, wirtinger_dz, wirtinger_dzbar
from .gauss import DEFAULT_NODES
from .growth import UnboundedGrowth, check_growth
from .operators import apply_operator
from .parser import ParseError, parse_expr, parse_point
from .report import to_csv, to_json
from .verify import (
    DEFAULT_ALPHA_NODES,
    DEFAULT_FD_STEP,
    DEFAULT_T_PROXY,
    SUITES,
    RunConfig,
    Verifier,
    make_t_grid,
    run_suite,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def format_complex(v: complex) -> str:
    v = complex(v)
    sign = "-" if v.imag < 0 else "+"
    return f"{v.real:.15g}{sign}{abs(v.imag):.15g}i"


def parse_t_grid(text: str):
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"--t-grid expects start:stop:step, got {text!r}")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError:
        raise UsageError(f"--t-grid expects numbers, got {text!r}") from None
    if step <= 0 or stop < start:
        raise UsageError("--t-grid needs step > 0 and stop >= start")
    return start, stop, step


def parse_proxy(text: str) -> Optional[float]:
    if text.lower() in ("none", "off", ""):
        return None
    return float(text)


def parse_pairs(text: str):
    if text == "all":
        return None
    pairs = []
    for item in filter(None, (s.strip() for s in text.split(","))):
        if ":" not in item:
            raise UsageError(f"pair {item!r} should look like f:g")
        f, g = item.split(":", 1)
        pairs.append((f.strip(), g.strip()))
    return pairs


def parse_entry(text: str, n: int) -> CatalogEntry:
    """``name=expr[:psh][:circ]``; flags claim the corresponding properties."""
    if "=" not in text:
        raise UsageError(f"entry {text!r} should look like name=expr[:psh][:circ]")
    name, rest = text.split("=", 1)
    parts = rest.split(":")
    flags = {p.strip() for p in parts[1:]}
    unknown = flags - {"psh", "circ"}
    if unknown:
        raise UsageError(f"unknown entry flags {sorted(unknown)}")
    return make_entry(name.strip(), parts[0], n, "psh" in flags, "circ" in flags)


def _writable(path: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(d) or not os.access(d, os.W_OK):
        raise UsageError(f"cannot write to {path!r}")


def _write(path: Optional[str], text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pshgauss", description="Numerical verification of Gaussian correlation identities.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--dim", type=int, default=1, help="complex dimension n (1..4)")
        sp.add_argument("--method", choices=("exact", "quad", "mc", "auto"), default="auto")
        sp.add_argument("--nodes", type=int, default=DEFAULT_NODES, help="Gauss-Hermite nodes per real axis")
        sp.add_argument("--samples", type=int, default=10**6, help="Monte Carlo sample count")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--t-grid", default="0:5:0.25", help="start:stop:step")
        sp.add_argument("--t-proxy", default=str(DEFAULT_T_PROXY), help="large-t proxy for infinity, or 'none'")
        sp.add_argument("--alpha-nodes", type=int, default=DEFAULT_ALPHA_NODES)
        sp.add_argument("--fd-step", type=float, default=DEFAULT_FD_STEP)

    r = sub.add_parser("run", help="run verification suites")
    common(r)
    r.add_argument("--suite", choices=SUITES + ("all",), default="all")
    r.add_argument("--pairs", default="all", help="'all' or a comma list f:g,...")
    r.add_argument("--tol", type=float, default=None, help="override the deterministic tolerances")
    r.add_argument("--report", default=None, help="report path")
    r.add_argument("--format", choices=("json", "csv"), default="json")
    r.add_argument("--entry", action="append", default=[], help="extra entry name=expr[:psh][:circ]")
    r.add_argument("--no-controls", action="store_true", help="skip the negative-control pairs")
    r.add_argument("--no-timestamp", action="store_true")
    r.add_argument("--verbose", "-v", action="store_true", help="print every check")

    e = sub.add_parser("eval", help="evaluate or differentiate an expression")
    e.add_argument("--expr", required=True)
    e.add_argument("--dim", type=int, default=1)
    e.add_argument("--at", default=None, help="comma-separated complex point, e.g. '1+1i,2'")
    e.add_argument("--dz", type=int, action="append", default=[], help="apply d/dz_j (repeatable)")
    e.add_argument("--dzbar", type=int, action="append", default=[], help="apply d/dzbar_j (repeatable)")
    e.add_argument("--op", choices=("L", "Lbar", "OU", "R"), default=None)
    e.add_argument("--growth", action="store_true", help="print the growth class")

    a = sub.add_parser("alpha", help="alpha(t) study for one pair")
    common(a)
    a.add_argument("--f", required=True, help="catalog name or expression")
    a.add_argument("--g", required=True, help="catalog name or expression")
    a.add_argument("--output", "-o", default=None, help="data file (default stdout)")

    c = sub.add_parser("catalog", help="list catalog entries")
    c.add_argument("--dim", type=int, default=1)
    c.add_argument("--entry", action="append", default=[], help="extra entry name=expr[:psh][:circ]")
    return p


def _check_dim(n: int) -> None:
    if not 1 <= n <= 4:
        raise UsageError("--dim must lie in [1, 4]")


def cmd_run(args) -> int:
    _check_dim(args.dim)
    if args.report:
        _writable(args.report)
    cfg = RunConfig(
        dim=args.dim,
        suite=args.suite,
        pairs=parse_pairs(args.pairs),
        method=args.method,
        nodes=args.nodes,
        samples=args.samples,
        seed=args.seed,
        t_grid=parse_t_grid(args.t_grid),
        t_proxy=parse_proxy(args.t_proxy),
        tol=args.tol,
        report=args.report,
        format=args.format,
        controls=not args.no_controls,
        extra_entries=[parse_entry(t, args.dim) for t in args.entry],
        alpha_nodes=args.alpha_nodes,
        fd_step=args.fd_step,
    )
    report = run_suite(cfg)
    if args.no_timestamp:
        text = to_json(report, timestamp=False) if cfg.format == "json" else to_csv(report)
    else:
        text = to_json(report) if cfg.format == "json" else to_csv(report)
    if args.report:
        _write(args.report, text)
    for chk in report.checks:
        if args.verbose or not chk.passed:
            status = "ok  " if chk.passed else "FAIL"
            g = f" g={chk.g}" if chk.g else ""
            print(f"{status} [{chk.suite}] {chk.identity}  f={chk.f}{g}  {chk.method}  err={chk.abs_err:.3g} tol={chk.tol:.3g}")
    s = report.summary
    print(f"total {s['total']}  passed {s['passed']}  failed {s['failed']}")
    return EXIT_OK if report.ok else EXIT_FAIL


def cmd_eval(args) -> int:
    _check_dim(args.dim)
    e = parse_expr(args.expr, args.dim)
    for j in args.dz:
        e = wirtinger_dz(e, j)
    for j in args.dzbar:
        e = wirtinger_dzbar(e, j)
    if args.op:
        e = apply_operator(args.op, e, args.dim)
    if args.growth:
        print(check_growth(e))
    if args.at is None:
        print(to_text(e))
    else:
        print(format_complex(evaluate(e, parse_point(args.at, args.dim))))
    return EXIT_OK


def _resolve(text: str, n: int, want_circular: bool) -> CatalogEntry:
    for entry in builtin_catalog(n):
        if entry.name == text:
            return entry
    entry = make_entry(text, text, n, True, want_circular)
    if not check_psh(entry).passed:
        raise UsageError(f"{text!r} failed the psh validation")
    if want_circular and not check_circular_symmetry(entry).passed:
        raise UsageError(f"{text!r} failed the circular-symmetry validation")
    return entry


def cmd_alpha(args) -> int:
    _check_dim(args.dim)
    if args.output:
        _writable(args.output)
    f = _resolve(args.f, args.dim, True)
    g = _resolve(args.g, args.dim, False)
    v = Verifier(args.dim, args.method, args.nodes, args.samples, args.seed,
                 fd_step=args.fd_step, alpha_nodes=args.alpha_nodes)
    proxy = parse_proxy(args.t_proxy)
    st = v.alpha_study(f, g, make_t_grid(*parse_t_grid(args.t_grid), proxy=proxy), proxy)
    lines = ["# t alpha alpha1_fd alpha2_fd alpha2_trace"]
    for row in st.columns():
        lines.append(" ".join(f"{x:.17g}" for x in row))
    _write(args.output, "\n".join(lines) + "\n")
    ok = st.fd_matches_trace and st.convex and st.nonincreasing and st.endpoint_inequality
    print(f"alpha(inf) = {st.alpha_inf:.17g}  convex={st.convex}  nonincreasing={st.nonincreasing}  "
          f"endpoint={st.endpoint_inequality}  fd_matches_trace={st.fd_matches_trace}",
          file=sys.stderr if args.output is None else sys.stdout)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_catalog(args) -> int:
    _check_dim(args.dim)
    entries = builtin_catalog(args.dim) + [parse_entry(t, args.dim) for t in args.entry]
    ok = True
    for entry in entries:
        reports = validate_entry(entry)
        valid = all(r.passed for r in reports)
        ok &= valid
        claims = ",".join(c for c, flag in (("psh", entry.claimed_psh), ("circ", entry.claimed_circular)) if flag) or "-"
        print(f"{entry.name:<12} {'valid' if valid else 'INVALID':<8} {claims:<9} {str(entry.growth):<16} {entry.text}")
    return EXIT_OK if ok else EXIT_FAIL


COMMANDS = {"run": cmd_run, "eval": cmd_eval, "alpha": cmd_alpha, "catalog": cmd_catalog}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        with np.errstate(all="ignore"):
            return COMMANDS[args.command](args)
    except (UsageError, ParseError, UnboundedGrowth, ValueError) as exc:
        print(f"pshgauss: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
