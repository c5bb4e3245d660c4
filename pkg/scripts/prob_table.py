"""Closed-form and Monte Carlo hit probabilities over a scenario grid."""

import argparse
import csv
import itertools
import sys

from powerline_hough.prob import PROB_COLUMNS, SamplingScenario, scenario_row


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--trials", type=int, default=10**6)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--M", type=int, default=100)
    parser.add_argument("--k0", type=int, default=5)
    parser.add_argument("-o", "--output", help="CSV path (stdout when omitted)")
    args = parser.parse_args()

    out = open(args.output, "w", encoding="utf-8", newline="") if args.output else sys.stdout
    writer = csv.DictWriter(out, fieldnames=PROB_COLUMNS, lineterminator="\n")
    writer.writeheader()
    grid = itertools.product((10**3, 10**4), (0.05, 0.1), (0.2, 0.4, 1.0))
    for k, (N, frac, I_c) in enumerate(grid):
        n = int(frac * N)
        sc = SamplingScenario(N=N, n=n, m=n, I_c=I_c, M=args.M, k0=args.k0,
                              name=f"N{N}_f{frac}_ic{I_c}")
        writer.writerow(scenario_row(sc, args.trials, args.seed + 2 * k))
    if out is not sys.stdout:
        out.close()
    return 0


if __name__ == "__main__":
    sys.exit(main())
