"""Command-line entry point: construct, verify, adversary, recheck, learn, bench."""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
import time
from dataclasses import asdict
from fractions import Fraction

from . import adversary as adv
from .amplifier import CONSTANTS_ENV, AmplifierValidationError
from .dlist import (
    DEFAULT_CAP,
    EnumerationCapError,
    FullCube,
    HammingBall,
    list_from_dict,
    list_to_dict,
    loads_list,
    odd_max_bit,
    random_list,
)
from .exactpoly import from_records, to_records
from .ptfbuild import assemble_ball_ptf, assemble_cube_ptf, fit_constant, reports_csv
from .verify import verify_sign
from .winnow import bound_constant, run_online, summary_csv

PTF_FORMAT = "ptfdl-ptf"

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def write_atomic(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    with os.fdopen(fd, "w") as fh:
        fh.write(text)
    os.chmod(tmp, 0o644)
    os.replace(tmp, path)


def _emit(text: str, path: str | None) -> None:
    if path:
        write_atomic(path, text)
    else:
        sys.stdout.write(text)


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


# instance sources


def add_source(p: argparse.ArgumentParser, required: bool = True) -> None:
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--omb", type=int, metavar="N", help="ODD-MAX-BIT on N variables")
    g.add_argument("--list", metavar="FILE", help="decision list JSON file")
    g.add_argument("--random", metavar="N,H", help="random list with N variables and length H (uses --seed)")


def load_source(args):
    if args.omb is not None:
        return odd_max_bit(args.omb)
    if args.list:
        with open(args.list) as fh:
            return loads_list(fh.read())
    if args.random:
        n, h = (int(v) for v in args.random.split(","))
        return random_list(n, h, args.seed)
    return None


def ptf_document(ptf) -> str:
    dom = ptf.domain
    rep = ptf.report
    report = asdict(rep)
    report["C"] = str(rep.C)
    report["log2_weight"] = f"{rep.log2_weight:.6f}"
    doc = {
        "format": PTF_FORMAT,
        "domain": {"kind": "ball" if isinstance(dom, HammingBall) else "cube", "n": dom.n, "k": dom.k},
        "list": list_to_dict(ptf.source),
        "report": report,
        "poly": to_records(ptf.poly),
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"


def read_ptf(path: str):
    """``(poly, list or None, domain or None)`` from a PTF document or bare polynomial records."""
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("format") == PTF_FORMAT:
        d = doc["domain"]
        dom = HammingBall(d["n"], d["k"]) if d["kind"] == "ball" else FullCube(d["n"])
        return from_records(doc["poly"]), list_from_dict(doc["list"]), dom
    return from_records(doc), None, None


# commands


def cmd_construct(args) -> int:
    L = load_source(args)
    t0 = time.perf_counter()
    try:
        if args.domain == "ball":
            ptf = assemble_ball_ptf(L, args.k, args.h, Fraction(args.eps))
        else:
            ptf = assemble_cube_ptf(L, args.h, Fraction(args.eps))
    except AmplifierValidationError as exc:
        _log(exc.report.to_text())
        return EXIT_FAIL
    _log(f"constructed in {time.perf_counter() - t0:.2f}s")
    out = args.out or "ptf.json"
    write_atomic(out, ptf_document(ptf))
    _emit(reports_csv([ptf.report]), args.report)
    status = EXIT_OK if ptf.report.validated else EXIT_FAIL
    if args.verify:
        res = verify_sign(ptf.poly, L, ptf.domain, cap=args.cap, threads=args.threads)
        _log(res.to_text().rstrip())
        status = status or (EXIT_OK if res.passed else EXIT_FAIL)
    return status


def cmd_verify(args) -> int:
    poly, L, dom = read_ptf(args.ptf)
    src = load_source(args)
    L = src or L
    if L is None:
        _log("no decision list: pass --list/--omb/--random or a PTF document")
        return EXIT_USAGE
    if args.domain == "ball":
        dom = HammingBall(L.n, args.k)
    elif args.domain == "cube":
        dom = FullCube(L.n)
    dom = dom or FullCube(L.n)
    try:
        res = verify_sign(poly, L, dom, cap=args.cap, threads=args.threads)
    except EnumerationCapError as exc:
        _log(f"error: {exc}")
        return EXIT_USAGE
    _emit(res.to_text(), args.out)
    return EXIT_OK if res.passed else EXIT_FAIL


def cmd_adversary(args) -> int:
    poly, L, dom = read_ptf(args.ptf)
    n = dom.n if dom else poly.nvars
    k = args.k or (dom.k if isinstance(dom, HammingBall) else None)
    plan = adv.BlockPlan.for_degree(n, args.d, k=k, t=args.t)
    try:
        wc = adv.run_adversary(poly, plan, rule=args.rule, cap=args.cap, threads=args.threads)
    except adv.WitnessError as exc:
        _log(f"error: {exc}")
        return EXIT_FAIL
    cert = adv.weight_certificate(wc, poly)
    out = args.out or "chain.json"
    write_atomic(out, adv.dumps_chain(wc, poly))
    note = " (conditional on p computing ODD-MAX-BIT)" if wc.conditional else ""
    print(f"chain_length={wc.length} blocks={plan.r} certificate=2^{wc.length}={cert}{note}")
    if wc.stopped:
        print(f"stopped: {wc.stopped}")
    return EXIT_OK


def cmd_recheck(args) -> int:
    with open(args.chain) as fh:
        text = fh.read()
    try:
        bound = adv.recheck_document(text)
    except adv.CertificateError as exc:
        print(f"rejected: {exc}")
        return EXIT_FAIL
    print(f"certified weight >= {bound}")
    return EXIT_OK


def cmd_learn(args) -> int:
    L = load_source(args)
    if args.ptf:
        poly, _, _ = read_ptf(args.ptf)
    else:
        poly = assemble_cube_ptf(L, args.h).poly
    d = args.d if args.d is not None else min(poly.degree(), L.n)
    W = poly.weight()
    log = run_online(
        L, FullCube(L.n), d, args.passes, alpha=Fraction(args.alpha), theta=args.theta, order=args.order, seed=args.seed, cap=args.cap
    )
    _emit(log.to_csv(), args.out)
    sys.stderr.write(summary_csv(L.n, d, W, log.mistakes))
    c = bound_constant(log.mistakes, W, d, L.n)
    _log(f"converged={log.converged} passes={log.passes} mistakes={log.mistakes} c={c:.6g}")
    return EXIT_OK if log.converged else EXIT_FAIL


def cmd_bench(args) -> int:
    L = load_source(args)
    rows = []
    if args.k:
        for k in (int(v) for v in args.k.split(",")):
            rows.append(assemble_ball_ptf(L, k).report)
    else:
        for h in (int(v) for v in (args.h or "2,4,8").split(",")):
            rows.append(assemble_cube_ptf(L, h).report)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "h_or_k", "degree", "log2_weight", "bound_expr"])
    for r in rows:
        w.writerow([r.n, r.size, r.formal_degree, f"{r.log2_weight:.4f}", f"{r.bound_expression():.4f}"])
    _emit(buf.getvalue(), args.out)
    _log(f"fitted c = {fit_constant(rows):.4f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    shared.add_argument("--cap", type=int, default=DEFAULT_CAP, help="enumeration cap in points")
    shared.add_argument("--threads", type=int, default=1, help="worker threads for scans")
    shared.add_argument("--out", help="output path (stdout when omitted, where applicable)")
    shared.add_argument("--constants", help=f"amplifier constants file (overrides ${CONSTANTS_ENV})")

    ap = argparse.ArgumentParser(prog="ptfdl", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("construct", parents=[shared], help="build an integer PTF for a decision list")
    add_source(c)
    c.add_argument("--domain", choices=("cube", "ball"), default="cube")
    c.add_argument("--h", type=int, default=None, help="block size (cube default 4, ball default whole list)")
    c.add_argument("--k", type=int, help="Hamming ball radius (required for --domain ball)")
    c.add_argument("--eps", default="1/100", help="inner approximation error")
    c.add_argument("--report", help="CSV report path (stdout when omitted)")
    c.add_argument("--verify", action="store_true", help="verify the result exhaustively")
    c.set_defaults(func=cmd_construct)

    v = sub.add_parser("verify", parents=[shared], help="exhaustively check sign agreement")
    v.add_argument("--ptf", required=True)
    add_source(v, required=False)
    v.add_argument("--domain", choices=("cube", "ball"))
    v.add_argument("--k", type=int)
    v.set_defaults(func=cmd_verify)

    a = sub.add_parser("adversary", parents=[shared], help="search a witness chain")
    a.add_argument("--ptf", required=True)
    a.add_argument("--t", type=int, help="even block size (default smallest even >= 4d^2)")
    a.add_argument("--d", type=int, default=2)
    a.add_argument("--k", type=int)
    a.add_argument("--rule", choices=adv.RULES, default="power")
    a.set_defaults(func=cmd_adversary)

    r = sub.add_parser("recheck", parents=[shared], help="re-verify a serialized witness chain from the file alone")
    r.add_argument("--chain", required=True)
    r.set_defaults(func=cmd_recheck)

    lr = sub.add_parser("learn", parents=[shared], help="run Expanded-Winnow on the full cube")
    add_source(lr)
    lr.add_argument("--d", type=int, help="expansion degree (default: degree of the PTF)")
    lr.add_argument("--ptf", help="PTF supplying the weight W (default: build a cube PTF)")
    lr.add_argument("--h", type=int, default=4)
    lr.add_argument("--passes", type=int, default=200)
    lr.add_argument("--alpha", default="2")
    lr.add_argument("--theta", type=Fraction, default=None)
    lr.add_argument("--order", choices=("enumeration", "reverse", "shuffled"), default="enumeration")
    lr.set_defaults(func=cmd_learn)

    b = sub.add_parser("bench", parents=[shared], help="weight/degree table over block sizes or radii")
    add_source(b)
    b.add_argument("--h", help="comma-separated cube block sizes (default 2,4,8)")
    b.add_argument("--k", help="comma-separated ball radii")
    b.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.constants:
        os.environ[CONSTANTS_ENV] = args.constants
    if args.command == "construct":
        if args.domain == "ball" and args.k is None:
            ap.error("--domain ball requires --k")
        if args.domain == "cube" and args.h is None:
            args.h = 4
    if args.command == "verify" and args.domain == "ball" and args.k is None:
        ap.error("--domain ball requires --k")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
