"""Command line entry point: ``hyperdescent verify|scan|selmer``."""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .pipeline import THEOREM_CASES, RunConfig, emit_report, load_config_file, run
from .selmer import independence_audit, selmer_group, theorem_case

FULL_SCAN = {"p_max": 1000, "height": 100000}
_INT_KEYS = {"p_min", "p_max", "height", "jobs", "i", "j"}


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hyperdescent", description=__doc__)
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--p-min", type=int)
        p.add_argument("--p-max", type=int)
        p.add_argument("--height", type=int, help="bound on the height of the x-coordinate")
        p.add_argument("--jobs", type=int, help="worker processes")
        p.add_argument("--out", help="output file (default: stdout)")
        p.add_argument("--format", dest="fmt", choices=("json", "csv", "text"))
        p.add_argument("--config", help="key = value file; its entries override flags")
        p.add_argument("--no-timestamp", action="store_true", help="omit timestamp and timings")

    v = sub.add_parser("verify", help="verify one theorem case over a prime range")
    v.add_argument("--case", choices=THEOREM_CASES)
    common(v)

    s = sub.add_parser("scan", help="search the family for sporadic points")
    s.add_argument("--i", type=int)
    s.add_argument("--j", type=int)
    s.add_argument("--full", action="store_true", help=f"p < {FULL_SCAN['p_max']}, height {FULL_SCAN['height']}")
    common(s)

    g = sub.add_parser("selmer", help="print the 2-Selmer certificate for one prime")
    g.add_argument("p", type=int)
    g.add_argument("j", type=int, choices=(1, 3))
    g.add_argument("--audit", action="store_true", help="also run the independence audit")
    return ap


def _settings(args: argparse.Namespace) -> dict:
    keys = ("case", "p_min", "p_max", "height", "jobs", "out", "fmt", "i", "j")
    out = {k: getattr(args, k) for k in keys if getattr(args, k, None) is not None}
    if getattr(args, "full", False):
        out.update(FULL_SCAN)
    if args.config:
        for k, val in load_config_file(args.config).items():
            if k == "format":
                k = "fmt"
            out[k] = int(val) if k in _INT_KEYS else val
    if args.no_timestamp:
        out["timestamp"] = False
    return out


def _selmer(args: argparse.Namespace) -> int:
    cert = selmer_group(args.p, args.j)
    payload = cert.to_dict()
    if args.audit:
        audit = independence_audit(args.p, args.j)
        payload["independence_audit"] = {
            "ok": audit.ok,
            "rank": audit.rank,
            "elements": audit.labels,
            "relation": audit.relation,
            "t1_as_d": audit.t1_matches,
            "t2_as_d": audit.t2_matches,
            "t1_as_h": audit.t1_in_h,
            "t2_as_h": audit.t2_in_h,
        }
    json.dump(payload, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")
    ok = cert.rank_bound == 0 or not theorem_case(args.p, args.j)
    return 0 if ok else 1


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "selmer":
        return _selmer(args)
    settings = _settings(args)
    if args.command == "verify":
        settings.setdefault("case", None)
        if settings["case"] is None:
            print("verify: --case is required (flag or config file)", file=sys.stderr)
            return 2
        settings.setdefault("p_min", 2)
    else:
        settings["case"] = "conjecture"
        settings.setdefault("p_min", 3)
    try:
        config = RunConfig(**settings)
    except (TypeError, ValueError) as exc:
        print(f"{args.command}: {exc}", file=sys.stderr)
        return 2
    report = run(config)
    try:
        text = emit_report(report, config.fmt, config.out)
    except OSError as exc:
        print(exc, file=sys.stderr)
        return 2
    if config.out is None:
        sys.stdout.write(text)
    return report.exit_code


if __name__ == "__main__":
    raise SystemExit(main())
