#!/usr/bin/env python3
"""Regenerate every report table (and the diff log) into an output directory.

Usage: python scripts/run_report.py [OUTDIR] [--format csv|json|md]
"""

import sys

from schoolrisk import cli


def main() -> int:
    args = sys.argv[1:]
    out = args[0] if args and not args[0].startswith("-") else "report_out"
    rest = args[1:] if args and not args[0].startswith("-") else args
    return cli.run(["report", "--out", out, *rest])


if __name__ == "__main__":
    sys.exit(main())
