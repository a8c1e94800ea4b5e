"""Command line entry point: ``geocalc run|suite|identities|show``."""

from __future__ import annotations

import argparse
import glob
import os
import sys

from . import library
from .derivatives import DEFAULT_SEED, identity_suite
from .errors import GeocalcError
from .quadrature import QuadratureSpec
from .scenario import load_scenario, print_scenario, run_scenario


def _common(p):
    p.add_argument("--quad-q", type=int, help="Gauss points per axis (overrides the scenario)")
    p.add_argument("--quad-m", type=int, help="subdivisions per axis (overrides the scenario)")
    p.add_argument("--threads", type=int, default=1, help="worker threads for node evaluation")
    p.add_argument("--seed", type=lambda v: int(v, 0), help="random seed (accepts 0x... hex)")
    p.add_argument("--out", help="CSV output path (a directory for suite)")
    p.add_argument("--no-timing", action="store_true", help="write wall_ms as 0 for reproducible CSVs")
    p.add_argument("-q", "--quiet", action="store_true", help="only print the pass/fail line")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="geocalc", description="Geometric calculus checks driven by scenario files.")
    parser.add_argument("--list-patches", action="store_true", help="print the patch registry and exit")
    parser.add_argument("--list-fields", action="store_true", help="print the field registry and exit")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("run", help="run one scenario file")
    p.add_argument("scenario")
    _common(p)

    p = sub.add_parser("suite", help="run every *.yaml scenario in a directory")
    p.add_argument("directory")
    _common(p)

    p = sub.add_parser("identities", help="vector-derivative identity suite")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--method", choices=("fd", "analytic"), default="fd")
    p.add_argument("--tolerance", type=float)
    _common(p)

    p = sub.add_parser("show", help="print a scenario in canonical form")
    p.add_argument("scenario")
    return parser


def _quad_override(args, scenario):
    if args.quad_q is None and args.quad_m is None:
        return None
    q = scenario.quadrature
    return QuadratureSpec(q.rule, args.quad_q or q.q, args.quad_m or q.m)


def _run_one(path, args, out):
    s = load_scenario(path)
    res = run_scenario(s, threads=args.threads, quad=_quad_override(args, s), seed=args.seed, out=out,
                       timing=not args.no_timing)
    lines = res.summary[-1:] if args.quiet else res.summary
    for line in lines:
        print(line)
    if res.output_path:
        if not args.quiet:
            print(f"  wrote {res.output_path}")
    return res.exit_status


def _print_registry(reg):
    width = max(len(k) for k in reg)
    for key, (_, desc) in reg.items():
        print(f"{key:<{width}}  {desc}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.list_patches or args.list_fields:
        if args.list_patches:
            _print_registry({**library.PATCHES, **library.COMPLEXES})
        if args.list_fields:
            _print_registry(library.FIELDS)
        return 0
    if args.command is None:
        parser.print_help()
        return 2
    try:
        if args.command == "run":
            return _run_one(args.scenario, args, args.out)
        if args.command == "show":
            sys.stdout.write(print_scenario(load_scenario(args.scenario)))
            return 0
        if args.command == "suite":
            files = sorted(glob.glob(os.path.join(args.directory, "*.yaml")))
            if not files:
                print(f"no scenarios in {args.directory}", file=sys.stderr)
                return 2
            status = 0
            for path in files:
                out = None
                if args.out:
                    out = os.path.join(args.out, os.path.splitext(os.path.basename(path))[0] + ".csv")
                try:
                    status = max(status, _run_one(path, args, out))
                except GeocalcError as exc:
                    print(f"{path}: error: {exc}", file=sys.stderr)
                    status = max(status, 1)
            print(f"suite: {len(files)} scenario(s), {'all passed' if status == 0 else 'FAILURES'}")
            return status
        # identities
        seed = DEFAULT_SEED if args.seed is None else args.seed
        rep = identity_suite(args.dim, args.trials, seed, args.method)
        tol = args.tolerance or (1e-12 if args.method == "analytic" else 1e-6)
        text = rep.to_csv()
        if args.out:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        ok = rep.passed(tol)
        print(f"identities n={args.dim} ({args.method}): max rel err {rep.max_error():.3e} "
              f"(tol {tol:g}) {'PASS' if ok else 'FAIL'}", file=sys.stderr if not args.out else sys.stdout)
        return 0 if ok else 1
    except (GeocalcError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
