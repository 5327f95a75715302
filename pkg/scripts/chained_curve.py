#!/usr/bin/env python3
"""Violation curve of the chained inequality family.

Sweeps the cycle length, prints quantum value vs classical bound per n, and
writes the CSV consumed by plotting tools. The quantum value follows
n*cos(pi*(n-1)/n), always below the classical -n+2.
"""

import argparse
import math
from pathlib import Path

from qcycle.report import csv_lines
from qcycle.search import scan_chained


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--min", type=int, default=3)
    parser.add_argument("--max", type=int, default=12)
    parser.add_argument("--out", type=Path, default=Path("chained_curve.csv"))
    args = parser.parse_args()

    rows = scan_chained(args.min, args.max)
    print(f"{'n':>3} {'quantum':>14} {'classical':>10} {'closed form':>14}")
    for n, lhs, bound in rows:
        closed = n * math.cos(math.pi * (n - 1) / n)
        print(f"{n:>3} {lhs:>14.9f} {bound:>10} {closed:>14.9f}")
    args.out.write_text(csv_lines(("parameter", "lhs_value", "classical_bound"), rows))
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
