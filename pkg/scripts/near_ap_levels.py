"""Refinement levels of the near arithmetic progression search for one contraction ratio."""

import argparse
from fractions import Fraction

from isingcircle.dynamics import near_ap_triple, ratio_deviation


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--alpha", default="7/16")
    ap.add_argument("--eps", default="1/10")
    args = ap.parse_args()
    alpha, eps = Fraction(args.alpha), Fraction(args.eps)
    res = near_ap_triple(alpha, eps)
    print("level,w1,w2,w3,deviation")
    for i, level in enumerate(res.levels):
        print(i, *level["words"], f"{float(ratio_deviation(level['intervals'])):.6f}", sep=",")
    print(f"# final words {', '.join(map(str, res.words))}; deviation {float(res.deviation):.6f} < {eps}")


if __name__ == "__main__":
    main()
