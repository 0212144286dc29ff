"""Command line entry point.

Exit codes: 0 all expectations met, 1 expectation mismatch, 2 bad
configuration (unreadable scenario, invalid parameters, resolution too
coarse).
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .complexes import ComplexError
from .gh import UsageError
from .runner import Scenario, build_surface, run_scenario, verify_all, write_report
from .surfaces import ConfigError

EXIT_OK, EXIT_MISMATCH, EXIT_CONFIG = 0, 1, 2


def _fields(text):
    try:
        return [int(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad field list {text!r}")


def _parser():
    ap = argparse.ArgumentParser(prog="ghcollapse", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="cmd", required=True)

    def common(p, scenario=True):
        if scenario:
            p.add_argument("scenario", help="scenario JSON file or bundled scenario name")
        p.add_argument("--fields", type=_fields, default=None, help="primes, e.g. 2,3,5")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--relaxed-grid", action="store_true",
                       help="also evaluate delta pairs with delta2 >= length/100")

    common(sub.add_parser("generate", help="dump the generated surfaces as JSON"))
    common(sub.add_parser("hprofile", help="grid of h-profiles as CSV"))
    common(sub.add_parser("verify", help="run a scenario and compare with its expectations"))
    common(sub.add_parser("verify-all", help="run the bundled acceptance suite"), scenario=False)
    return ap


def _relaxed(args):
    return True if args.relaxed_grid else None


def cmd_generate(args):
    sc = Scenario.load(args.scenario)
    for value in sc.schedule:
        prm = dict(sc.params)
        prm[sc.schedule_param] = value
        S = build_surface(sc.family, prm, sc.h_for(value))
        doc = S.to_json()
        if args.out:
            out = Path(args.out)
            out.mkdir(parents=True, exist_ok=True)
            (out / f"{sc.name}_{sc.schedule_param}={value:.9g}.surface.json").write_text(doc + "\n")
        else:
            print(doc)
    return EXIT_OK


def cmd_hprofile(args):
    sc = Scenario.load(args.scenario)
    rep = run_scenario(sc, fields=args.fields, threads=args.threads, relaxed=_relaxed(args))
    if args.out:
        write_report(rep, args.out)
    else:
        sys.stdout.write(rep.csv())
    return EXIT_OK


def cmd_verify(args):
    sc = Scenario.load(args.scenario)
    rep = run_scenario(sc, fields=args.fields, threads=args.threads, relaxed=_relaxed(args))
    if args.out:
        write_report(rep, args.out)
    print(json.dumps(rep.summary(), sort_keys=True))
    for line in rep.mismatches:
        print("  " + line)
    return EXIT_OK if rep.match else EXIT_MISMATCH


def cmd_verify_all(args):
    ok, _, _ = verify_all(fields=args.fields, threads=args.threads, out_dir=args.out,
                          relaxed=_relaxed(args), stream=sys.stdout)
    return EXIT_OK if ok else EXIT_MISMATCH


def main(argv=None):
    args = _parser().parse_args(argv)
    handler = {"generate": cmd_generate, "hprofile": cmd_hprofile, "verify": cmd_verify,
               "verify-all": cmd_verify_all}[args.cmd]
    try:
        return handler(args)
    except (ConfigError, UsageError, ComplexError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
