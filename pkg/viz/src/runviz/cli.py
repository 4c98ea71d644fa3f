"""Command-line figure rendering from run CSV logs."""

import argparse
import sys

from .csvlog import SchemaMismatch
from .render import KINDS, FigureRequest, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="auvviz", description="Render run-log figures")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("render", help="render one figure kind from a run CSV")
    p.add_argument("--csv", required=True, help="run log CSV")
    p.add_argument("--csv2", help="second run log to overlay (comparison)")
    p.add_argument("--kind", required=True, choices=KINDS)
    p.add_argument("--out", required=True, help="output image path")
    p.add_argument("--tau-max", dest="tau_max", type=float, default=300.0,
                   help="torque guide level")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        request = FigureRequest(
            csv=args.csv, kind=args.kind, out=args.out,
            csv2=args.csv2, tau_max=args.tau_max,
        )
        report = render(request)
    except (SchemaMismatch, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {report.out} ({report.kind}, {report.agents} agents, "
          f"{report.samples} samples)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
