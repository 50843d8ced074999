#!/usr/bin/env python3
"""Drop probability of the optimized split as the total ARQ budget grows.

Emits one CSV row per (q_sum, scheme, method) at a fixed channel, using
the same column layout as the CLI.  Typical use:

    python scripts/pdp_vs_budget.py --hops 4 --los 0.3 --snr-db 15 \
        --q-sums 6 8 10 12 14 --methods exhaustive greedy
"""

import argparse
import sys

from arqshare.cli import CSV_HEADER, ExperimentConfig, run_sweep


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--hops", type=int, default=4)
    ap.add_argument("--los", type=float, default=0.3)
    ap.add_argument("--snr-db", type=float, default=15.0, dest="snr_db")
    ap.add_argument("--rate", type=float, default=1.0)
    ap.add_argument("--q-sums", type=int, nargs="+", dest="q_sums",
                    default=[6, 8, 10, 12, 14])
    ap.add_argument("--schemes", nargs="+", default=["semi_cumulative"])
    ap.add_argument("--methods", nargs="+", default=["exhaustive"])
    ap.add_argument("--trials", type=int, default=0,
                    help="Monte Carlo trials for the winning split (0 = skip)")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--output", default=None)
    args = ap.parse_args(argv)

    cfg = ExperimentConfig(
        hops=args.hops, los=args.los, snr_db=args.snr_db, rate=args.rate,
        q_sum=min(args.q_sums), schemes=args.schemes, methods=args.methods,
        trials=args.trials, seed=args.seed, sweep_q_sum=sorted(args.q_sums))
    rows = run_sweep(cfg, mode="sweep", threads=args.threads)
    text = "\n".join([CSV_HEADER] + rows) + "\n"
    if args.output:
        with open(args.output, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
