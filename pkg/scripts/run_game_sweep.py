#!/usr/bin/env python3
"""Sweep attacker schedules and defender policies for one scenario and print
both best responses.

Usage: python scripts/run_game_sweep.py [--scenario FILE] [--out DIR]
"""

import sys

from schoolrisk import cli


def main() -> int:
    return cli.run(["simulate", "--sweep", "both", *sys.argv[1:]])


if __name__ == "__main__":
    sys.exit(main())
