"""Fire fraction right after initialization across widths, against Q(b) and m^{-1/5}.

    python3 scripts/sparsity_scaling.py --out sparsity.csv
"""

import argparse
import csv

from corrtree.core_types import RngSpec
from corrtree.sparsity import measure_init_sparsity


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--min-log2", type=int, default=8)
    p.add_argument("--max-log2", type=int, default=16)
    p.add_argument("--n", type=int, default=32)
    p.add_argument("--d", type=int, default=16)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    args = p.parse_args()

    rows = []
    for k in range(args.min_log2, args.max_log2 + 1):
        rep = measure_init_sparsity(2**k, args.d, args.n, args.trials, RngSpec(args.seed))
        rows.extend(rep.rows())
        print(rep)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]))
            w.writeheader()
            w.writerows(rows)


if __name__ == "__main__":
    main()
