"""Command-line scenario runner.

Subcommands: ``sweep``, ``heatmap``, ``optimize``, ``verify``.  Exit codes:
0 success, 1 usage error, 2 scenario error (bad config or any failed grid
point), 3 verification failure.
"""

import argparse
import contextlib
import sys
from dataclasses import replace

from . import verify as verify_mod
from .config import load_scenario
from .errors import RfiError
from .pipeline import heatmap, run_scenario, write_records

EXIT_OK, EXIT_USAGE, EXIT_SCENARIO, EXIT_VERIFY = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser():
    parser = _Parser(prog="rfimdi", description="Key-rate scenarios for reference-frame-independent MDI-QKD.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, text in (
        ("sweep", "sweep one variable"),
        ("heatmap", "two-variable grid"),
        ("optimize", "optimize decoy intensities at each point"),
    ):
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", required=True, metavar="PATH")
        p.add_argument("--out", metavar="PATH", help="CSV output (default: stdout)")
        p.add_argument("--mode", choices=("sps", "wcs"))
        p.add_argument("--jobs", type=int, default=1, metavar="N")
    v = sub.add_parser("verify", help="run the built-in oracle checks")
    v.add_argument("--out", metavar="PATH", help="report file (default: stdout)")
    v.add_argument("--corrupt-q-order", action="store_true", help=argparse.SUPPRESS)
    return parser


@contextlib.contextmanager
def _output(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _run_grid(args):
    try:
        sc = load_scenario(args.config, args.mode)
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_SCENARIO
    except RfiError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCENARIO
    if args.jobs < 1:
        print("error: --jobs must be at least 1", file=sys.stderr)
        return EXIT_USAGE
    if args.command == "heatmap":
        if sc.sweep is None or sc.sweep2 is None:
            print("error: heatmap needs sweep.* and sweep2.* entries", file=sys.stderr)
            return EXIT_SCENARIO
        rows = heatmap(sc, args.jobs)
    else:
        if args.command == "sweep" and sc.sweep is None:
            print("error: sweep needs sweep.* entries", file=sys.stderr)
            return EXIT_SCENARIO
        if args.command == "optimize":
            if sc.mode != "wcs":
                print("error: optimize needs mode wcs", file=sys.stderr)
                return EXIT_SCENARIO
            sc = replace(sc, optimize=True)
        rows = run_scenario(sc, args.jobs)
    with _output(args.out) as fh:
        write_records(rows, fh)
    failed = sum(1 for r in rows if r["error"])
    if failed:
        print(f"{failed} of {len(rows)} points failed", file=sys.stderr)
        return EXIT_SCENARIO
    return EXIT_OK


def _run_verify(args):
    results = verify_mod.run_all(corrupt_q_order=args.corrupt_q_order)
    with _output(args.out) as fh:
        for r in results:
            print(r.line(), file=fh)
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command == "verify":
        return _run_verify(args)
    return _run_grid(args)


if __name__ == "__main__":
    sys.exit(main())
