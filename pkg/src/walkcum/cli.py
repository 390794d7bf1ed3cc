"""Command-line entry point: ``walkcum theory|enumerate|sample|experiment|report``.

Exit status: 0 when every assertion passes, 2 on an assertion failure,
1 on a usage or configuration error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import asdict
from fractions import Fraction
from pathlib import Path

from . import theory
from .diagrams import census, normalize_kind
from .ensemble import EnsembleParams, RegimeSpec, sample_graph
from .errors import WalkcumError
from .harness import emit_report, load_config, load_report, parse_kernel, plan_from_config, run_experiment
from .prufer import alphabet
from .walks import REPLICA_FIELDS, WalkStat, count_closed_X3, count_walks_Y, family_of, normalize_statistic

EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON or key=value file; flags override it")
    p.add_argument("--q", type=int)
    p.add_argument("--alpha", type=int, choices=(0, 1))
    p.add_argument("--kernel", help="gaussian | power:p | table:step,psi0,psi1,...")
    p.add_argument("--regime", help="Y1 Y2 Y3 Xi Xii Xiii Xiv")
    p.add_argument("--s", type=float)
    p.add_argument("--lambda", dest="lambda_", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output path (stdout when omitted)")
    p.add_argument("--format", choices=("csv", "json"))


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="walkcum", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    t = sub.add_parser("theory", help="tabulate limiting cumulants or moment bounds")
    _common(t)
    t.add_argument("--orders", default="1,2,3", help="cumulant orders, e.g. 1,2,3")
    t.add_argument("--bound", action="store_true", help="report the moment bound instead")

    e = sub.add_parser("enumerate", help="census of diagrams by (E, V)")
    _common(e)
    e.add_argument("--k", type=int, required=True)
    e.add_argument("--kind", default="lambda", help="lambda (walk elements) or mu (triangles)")
    e.add_argument("--alphabet", action="store_true", help="emit the Prüfer alphabet as JSON")
    e.add_argument("--workers", type=int, default=1)

    s = sub.add_parser("sample", help="sample graphs and record walk statistics")
    _common(s)
    s.add_argument("--N", type=int, required=True)
    s.add_argument("--c", type=float, required=True)
    s.add_argument("--R", type=float, required=True)
    s.add_argument("--replicas", type=int, default=1)
    s.add_argument("--statistic", choices=("Y", "X"), default="Y")
    s.add_argument("--graph-out", help="write the first replica as an edge list")

    x = sub.add_parser("experiment", help="run a replica experiment and compare with theory")
    _common(x)
    x.add_argument("--N", help="comma-separated ladder of odd sizes")
    x.add_argument("--c", type=float)
    x.add_argument("--R", type=float)
    x.add_argument("--replicas", type=int)
    x.add_argument("--orders")
    x.add_argument("--statistic", choices=("Y", "X"))
    x.add_argument("--workers", type=int)

    r = sub.add_parser("report", help="re-emit a saved JSON report")
    r.add_argument("input", help="JSON report written by 'experiment'")
    r.add_argument("--out")
    r.add_argument("--format", choices=("csv", "json"), default="csv")
    return ap


def _write(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _rows_to_text(rows: list[dict], fmt: str) -> str:
    if fmt == "json":
        return json.dumps(rows, indent=2, sort_keys=True, default=str) + "\n"
    if not rows:
        return ""
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def _merged(args, keys) -> dict:
    cfg = load_config(args.config) if getattr(args, "config", None) else {}
    for k in keys:
        v = getattr(args, k if k != "lambda" else "lambda_", None)
        if v is not None:
            cfg[k] = v
    return cfg


def cmd_theory(args) -> int:
    cfg = _merged(args, ["q", "alpha", "kernel", "regime", "s", "lambda", "seed", "format"])
    fmt = cfg.get("format", "csv")
    orders = [int(k) for k in str(args.orders).split(",") if k]
    q = int(cfg.get("q", 2))
    if args.bound:
        rows = []
        for k in orders:
            b = theory.bound_report(k, q)
            d = {f: (float(v) if isinstance(v, Fraction) else v) for f, v in asdict(b).items()}
            rows.append(d)
        _write(_rows_to_text(rows, fmt), args.out)
        return EXIT_OK if all(r["slack"] >= 0 for r in rows) else EXIT_FAIL
    fam = cfg.get("regime")
    if not fam:
        raise WalkcumError("theory needs --regime (or --bound)")
    s = cfg.get("s")
    lam = cfg.get("lambda")
    table = theory.limit_table(fam, max(orders), q if family_of(fam) == "Y" else 3,
                               int(cfg.get("alpha", 0)), None if s is None else float(s),
                               None if lam is None else float(lam), parse_kernel(cfg.get("kernel")))
    rows = [r.as_row() for r in table if r.k in orders]
    _write(_rows_to_text(rows, fmt), args.out)
    return EXIT_OK


def cmd_enumerate(args) -> int:
    kind = normalize_kind(args.kind)
    q = args.q if args.q is not None else 2
    if args.alphabet:
        _write(json.dumps({"k": args.k, "q": q, "alphabet": alphabet(args.k, q)}) + "\n", args.out)
        return EXIT_OK
    cen = census(args.k, q, kind, workers=args.workers)
    cols = ("k", "q", "kind", "E", "V", "count")
    rows = [{c: r[c] for c in cols} for r in cen.rows()]
    _write(_rows_to_text(rows, args.format or "csv"), args.out)
    return EXIT_OK if not cen.above_diagonal() else EXIT_FAIL


def cmd_sample(args) -> int:
    cfg = _merged(args, ["q", "alpha", "kernel", "regime", "s", "lambda", "delta", "seed"])
    alpha = int(cfg.get("alpha", 0))
    q = 3 if args.statistic == "X" else int(cfg.get("q", 2))
    params = EnsembleParams.from_N(args.N, args.c, args.R, parse_kernel(cfg.get("kernel")), alpha,
                                   int(cfg.get("seed", 0)))
    regime = None
    if cfg.get("regime"):
        fam = cfg["regime"]
        if fam == "Xiv":
            regime = RegimeSpec(fam, Lambda=params.c**3 * params.R**2 / params.N**2)
        else:
            regime = RegimeSpec(fam, s=args.c * args.R / params.N)
        if family_of(fam) != args.statistic:
            raise WalkcumError(f"regime {fam} does not apply to statistic {args.statistic}")
    rows = []
    for r in range(args.replicas):
        g = sample_graph(params, r)
        if r == 0 and args.graph_out:
            with open(args.graph_out, "w") as fh:
                g.write(fh)
        raw = count_walks_Y(g, q, alpha) if args.statistic == "Y" else count_closed_X3(g, alpha)
        stat = WalkStat(args.statistic, q, alpha, raw)
        norm = normalize_statistic(stat, params, regime) if regime else raw
        rows.append({"replica": r, "family": args.statistic, "q": q, "alpha": alpha,
                     "raw": repr(raw), "normalized": repr(norm)})
    fmt = cfg.get("format") or args.format or "csv"
    if fmt == "json":
        _write(json.dumps(rows, indent=2) + "\n", args.out)
    else:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=REPLICA_FIELDS, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
        _write(buf.getvalue(), args.out)
    return EXIT_OK


def cmd_experiment(args) -> int:
    cfg = _merged(args, ["q", "alpha", "kernel", "regime", "s", "lambda", "delta", "seed", "out",
                         "format", "N", "c", "R", "replicas", "orders", "statistic", "workers"])
    plan = plan_from_config(cfg)
    report = run_experiment(plan)
    fmt = cfg.get("format", "json")
    out = cfg.get("out")
    if out:
        base = Path(out)
        stem = base.with_suffix("")
        emit_report(report, "csv", stem.with_suffix(".csv"))
        emit_report(report, "json", stem.with_suffix(".json"))
        sys.stdout.write(emit_report(report, fmt))
    else:
        sys.stdout.write(emit_report(report, fmt))
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_report(args) -> int:
    report = load_report(args.input)
    _write(emit_report(report, args.format), args.out)
    return EXIT_OK if report.passed else EXIT_FAIL


COMMANDS = {"theory": cmd_theory, "enumerate": cmd_enumerate, "sample": cmd_sample,
            "experiment": cmd_experiment, "report": cmd_report}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (WalkcumError, ValueError, OSError) as exc:
        sys.stderr.write(f"walkcum {args.command}: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
