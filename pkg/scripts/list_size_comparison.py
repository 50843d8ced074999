#!/usr/bin/env python3
"""Candidate-list sizes of the search methods across a budget grid.

Compares, per (hops, q_sum), the number of allocations each method
evaluates: the full enumeration, one fold, the deepest multifold, and
the greedy-pruned multifold.  Also reports the greedy optimality gap
relative to exhaustive search, which is the quantity that justifies
using the pruned list at all.

    python scripts/list_size_comparison.py --hops 5 6 --q-sums 8 16
"""

import argparse
import math
import sys

from arqshare.channel import LinkParams, outage_vector
from arqshare.optimize import (
    FoldContext,
    best_of_list,
    exhaustive_search,
    greedy_multifold,
    multifold_list,
    onefold_search,
)

HEADER = "N,q_sum,outage,exhaustive,onefold,multifold,greedy,greedy_pdp,exhaustive_pdp,greedy_gap"


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--hops", type=int, nargs="+", default=[5, 6])
    ap.add_argument("--q-sums", type=int, nargs=2, default=[8, 16], dest="q_sums",
                    metavar=("LO", "HI"))
    ap.add_argument("--los", type=float, default=0.3)
    ap.add_argument("--snr-db", type=float, default=15.0, dest="snr_db")
    ap.add_argument("--rate", type=float, default=1.0)
    ap.add_argument("--output", default=None)
    args = ap.parse_args(argv)

    lines = [HEADER]
    lo, hi = args.q_sums
    for n in args.hops:
        link = LinkParams(los=args.los, snr_db=args.snr_db, rate=args.rate)
        p = outage_vector([link] * n)
        for q_sum in range(lo, hi + 1):
            if q_sum < n:
                continue
            ctx = FoldContext(p=p, q_sum=q_sum)
            full = exhaustive_search(ctx)
            one = onefold_search(ctx)
            multi = multifold_list(ctx)
            greedy = best_of_list(ctx, greedy_multifold(ctx))
            gap = greedy.pdp / full.pdp - 1.0
            lines.append(",".join([
                str(n), str(q_sum), f"{p[0]:.17g}",
                str(math.comb(q_sum + n - 1, n - 1)),
                str(one.candidates), str(len(multi)), str(greedy.candidates),
                f"{greedy.pdp:.17g}", f"{full.pdp:.17g}", f"{gap:.3e}",
            ]))

    text = "\n".join(lines) + "\n"
    if args.output:
        with open(args.output, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
