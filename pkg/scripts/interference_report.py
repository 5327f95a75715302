#!/usr/bin/env python3
"""Interference account of three-measurement families across a rotation sweep.

For equally spaced xz-plane measurement angles (0, a, 2a) on the maximally
mixed qubit, prints the inequality value and the largest interference term as
the spacing sweeps through the maximally violating 2*pi/3 point.
"""

import argparse
import math

from qcycle.histories import family_from_bloch_angles, lg_decomposition


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--points", type=int, default=13)
    args = parser.parse_args()

    print(f"{'spacing':>10} {'lhs':>10} {'max |I|':>10} {'violated':>9}")
    for i in range(args.points):
        a = math.pi * i / (args.points - 1)
        dec = lg_decomposition(family_from_bloch_angles((0.0, a, 2 * a)))
        worst = max(abs(v) for v in dec.interference.values())
        flag = "yes" if dec.lhs < -1.0 - 1e-9 else "no"
        print(f"{a:>10.4f} {dec.lhs:>10.5f} {worst:>10.5f} {flag:>9}")


if __name__ == "__main__":
    main()
