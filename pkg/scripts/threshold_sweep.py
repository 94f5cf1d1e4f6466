"""CSV of the threshold fields lambda_k over a grid of b, for k = 1..K."""

import argparse
import csv
import sys
from fractions import Fraction

import mpmath

from isingcircle.dynamics import lambda_threshold


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--kmax", type=int, default=5)
    ap.add_argument("--steps", type=int, default=40, help="b runs over j/steps for j = 1..steps-1")
    args = ap.parse_args()
    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["k", "b", "exists", "arg_lambda_k", "re_lambda_k", "re_parabolic_point"])
    for k in range(1, args.kmax + 1):
        for j in range(1, args.steps):
            b = Fraction(j, args.steps)
            t = lambda_threshold(k, b)
            if not t.exists:
                out.writerow([k, str(b), False, "", "", ""])
                continue
            out.writerow([k, str(b), True, mpmath.nstr(t.angle.value, 15),
                          mpmath.nstr(t.lambda_k.real, 15), str(t.re_parabolic)])


if __name__ == "__main__":
    main()
