"""Loss reduction on teacher-labelled data over a learning-rate grid.

Labels come from a random plain-ReLU teacher of width 4 with unit-norm rows.
Every algo produces identical weights, so the tree runs double as a check.

    python3 scripts/teacher_training.py --algos dense,dtree
"""

import argparse

from corrtree.core_types import RngSpec, gaussian_init
from corrtree.network import teacher_dataset
from corrtree.trainer import DivergenceError, TrainConfig, train

ETA_GRID = (0.25, 0.5, 1.0, 2.0, 4.0)


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--m", type=int, default=4096)
    p.add_argument("--n", type=int, default=16)
    p.add_argument("--d", type=int, default=8)
    p.add_argument("--iters", type=int, default=500)
    p.add_argument("--seed", type=int, default=8)
    p.add_argument("--algos", default="dense,dtree")
    p.add_argument("--eta", type=float, nargs="*", default=list(ETA_GRID))
    args = p.parse_args()

    rng = RngSpec(args.seed)
    X = teacher_dataset(args.n, args.d, rng.child(0))
    W0 = gaussian_init(args.m, args.d, rng.child(1))
    print("algo,eta,initial_loss,final_loss,reduction,max_fires,bound,mean_updated")
    for algo in args.algos.split(","):
        for eta in args.eta:
            try:
                _, met = train(X, W0, TrainConfig(eta=eta, iters=args.iters, algo=algo))
            except DivergenceError as exc:
                print(f"{algo},{eta},diverged at {exc.iteration}")
                continue
            first = met.records[0].loss
            print(
                f"{algo},{eta},{first:.6g},{met.final_loss:.6g},{first / met.final_loss:.4g},"
                f"{met.column('max_fires').max()},{met.fire_bound},{met.column('neurons_updated').mean():.1f}"
            )


if __name__ == "__main__":
    main()
