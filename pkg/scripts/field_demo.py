"""Tree size and achieved accuracy of field implementation as the precision shrinks."""

import argparse
import time
from fractions import Fraction

from isingcircle.cli import parse_unit
from isingcircle.gadgets import implement_field


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--delta", type=int, default=3)
    ap.add_argument("--b", default="1/4")
    ap.add_argument("--lambda", dest="lam", default="i")
    ap.add_argument("--target", default="-1")
    ap.add_argument("--max-digits", type=int, default=8)
    args = ap.parse_args()
    lam, target, b = parse_unit(args.lam), parse_unit(args.target), Fraction(args.b)
    print("eps,size,predicted_size,distance,expansions,route,seconds")
    for d in range(1, args.max_digits + 1):
        eps = Fraction(1, 10 ** d)
        t0 = time.perf_counter()
        out = implement_field(args.delta, b, lam, target, eps)
        dt = time.perf_counter() - t0
        print(f"1e-{d}", out.tree.size, out.plan.predicted_size, f"{out.distance:.3e}",
              out.plan.expansions, out.plan.route, f"{dt:.2f}", sep=",")


if __name__ == "__main__":
    main()
