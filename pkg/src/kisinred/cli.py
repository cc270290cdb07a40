"""Command line interface.

Examples::

    kisinred --p 5 --k 6 --L-val -3
    kisinred --p 3 --k 4 --L "p^-1" --format text
    kisinred --p 3 --k 3 --L-val -1 --weak-bound
    kisinred --sweep "p=3;k=4:8:2;v=-4:-1" --out sweep.json

Exit codes: 0 all asserted certificates true, 1 a certificate failed,
2 out of range, 3 precision exhausted.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from .pipeline import (
    EXIT_CERT_FAILURE,
    EXIT_OK,
    EXIT_OUT_OF_RANGE,
    RunConfig,
    format_summary,
    run_pipeline,
    sweep,
)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="kisinred",
        description="Certified mod p reduction of the semi-stable representations V_{k,L}.",
    )
    ap.add_argument("--p", type=int, help="odd prime")
    ap.add_argument("--k", type=int, help="weight k >= 3 (h = k - 1)")
    grp = ap.add_mutually_exclusive_group()
    grp.add_argument("--L", help='L-invariant literal, e.g. "p^-2", "3/7*w^-5", "1/9 + w^-3"; "oo" for L = infinity')
    grp.add_argument("--L-val", dest="L_val", type=Fraction, help="v_p(L) only; the representative w^(2v) is used")
    ap.add_argument("--prec", type=int, help="p-adic precision M (weights are capped at 2M)")
    ap.add_argument("--deg-u", dest="deg_u", type=int, help="truncation degree N_u in u (at least p^2)")
    ap.add_argument("--weak-bound", action="store_true", help="use the weaker bound, which also admits p = 3, h = 2")
    ap.add_argument("--sweep", help='grid "p=3,5;k=4:8;v=-4:-1" (inclusive ranges, optional :step)')
    ap.add_argument("--out", help="write the JSON report here")
    ap.add_argument("--format", choices=("json", "text"), default="json")
    ap.add_argument("--no-timings", action="store_true", help="omit timings (byte-identical reruns)")
    return ap


def _text_report(rep) -> str:
    d = rep.to_json(timings=False)
    cfg = d["config"]
    lines = [
        f"p = {cfg['p']}, k = {cfg['k']}, L = {d['L_representative']}"
        + ("  (representative of the valuation class)" if d["representative_dependent"] else ""),
        f"status: {d['status']} (exit {d['exit_code']})" + (f"  {d['message']}" if d["message"] else ""),
    ]
    if d["bound"]["satisfied"] is not None:
        lines.append(f"bound satisfied: {d['bound']['satisfied']}")
    for c in d["certificates"]:
        mark = "" if c["asserted"] else "  (observed)"
        lines.append(f"  [{c['status']:>14}] {c['group']}: {c['name']}{mark}")
    if d["P"]:
        vals = ", ".join(_val(c["valuation"]) for c in d["P"])
        lines.append(f"v_p of P coefficients: {vals}")
    if d["reduction"]:
        r = d["reduction"]
        if r.get("label"):
            lines.append(f"reduction {r['form']}: {r['label']}, weights {r['weights']}, "
                         f"det exponent {r['det_exponent']}, irreducible {r['irreducible']}")
        else:
            lines.append(f"reduction refused: {r.get('refused')}")
    if d["labels_agree"] is not None:
        lines.append(f"agrees with L = oo: {d['labels_agree']}")
    return "\n".join(lines)


def _val(v):
    if isinstance(v, dict):
        return str(Fraction(v["num"], v["den"]))
    return str(v)


def _emit(payload, text: str, args):
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=False)
            fh.write("\n")
    if args.format == "json":
        print(json.dumps(payload, indent=2))
    else:
        print(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    base = dict(prec=args.prec, deg_u=args.deg_u, weak_bound=args.weak_bound)
    timings = not args.no_timings
    if args.sweep is not None:
        try:
            reports, rows = sweep(args.sweep, RunConfig(p=3, k=4, **base))
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_OUT_OF_RANGE
        payload = {"schema": 1, "summary": rows, "cells": [r.to_json(timings) for r in reports]}
        _emit(payload, format_summary(rows), args)
        codes = [r.exit_code for r in reports]
        if not codes or all(c in (EXIT_OK, EXIT_OUT_OF_RANGE) for c in codes):
            return EXIT_OK
        return max(codes) if EXIT_CERT_FAILURE not in codes else EXIT_CERT_FAILURE
    if args.p is None or args.k is None or (args.L is None and args.L_val is None):
        print("error: --p, --k and one of --L / --L-val are required (or use --sweep)", file=sys.stderr)
        return EXIT_OUT_OF_RANGE
    rep = run_pipeline(RunConfig(p=args.p, k=args.k, L=args.L, L_val=args.L_val, **base))
    _emit(rep.to_json(timings), _text_report(rep), args)
    return rep.exit_code


if __name__ == "__main__":
    sys.exit(main())
