"""Command-line entry point: ``corrtree {gen,train,verify,bench,sparsity}``."""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys

import numpy as np

from corrtree.bench import fit_slope, parse_m_list, run_bench, write_bench_csv
from corrtree.core_types import (
    FormatError,
    RngSpec,
    gaussian_dataset,
    gaussian_init,
    load_dataset,
    load_dataset_csv,
    normalize_rows,
    save_dataset,
    save_dataset_csv,
)
from corrtree.network import teacher_dataset
from corrtree.sparsity import measure_init_sparsity
from corrtree.trainer import ALGOS, DivergenceError, TrainConfig, train
from corrtree.verify import SUITES, run_all

EXIT_OK, EXIT_ERROR, EXIT_DIVERGED = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return v


def _nonneg(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be nonnegative, got {text}")
    return v


def weights_checksum(W: np.ndarray) -> str:
    return hashlib.sha256(np.ascontiguousarray(W, dtype="<f8").tobytes()).hexdigest()


def _load(path: str):
    return load_dataset_csv(path) if path.endswith(".csv") else load_dataset(path)


def cmd_gen(args) -> int:
    rng = RngSpec(args.seed)
    if args.labels == "teacher":
        ds = teacher_dataset(args.n, args.d, rng)
    else:
        ds = gaussian_dataset(args.n, args.d, rng, unit_norm=args.unit_norm)
    if args.out.endswith(".csv"):
        save_dataset_csv(ds, args.out)
    else:
        save_dataset(ds, args.out)
    print(f"wrote n={ds.n} d={ds.d} unit_norm={ds.unit_norm} to {args.out}")
    return EXIT_OK


def cmd_train(args) -> int:
    ds = _load(args.data)
    if not args.no_normalize and not ds.unit_norm:
        ds = normalize_rows(ds)
    W0 = gaussian_init(args.m, ds.d, RngSpec(args.seed).child(1))
    cfg = TrainConfig(eta=args.eta, iters=args.iters, b=args.b, seed=args.seed, algo=args.algo)
    try:
        Wf, met = train(ds, W0, cfg)
    except DivergenceError as exc:
        print(f"diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    if args.metrics:
        met.write_csv(args.metrics)
    fires = met.column("total_fires")
    print(f"algo={args.algo} m={args.m} n={ds.n} d={ds.d} b={met.b:.6f}")
    print(f"initial_loss={met.records[0].loss:.17g}")
    print(f"final_loss={met.final_loss:.17g}")
    print(f"total_fires={int(fires.sum())} mean_fires_per_iter={fires.mean():.3f}")
    print(f"max_fires_per_point={int(met.column('max_fires').max())} bound={met.fire_bound}")
    print(f"weights_sha256={weights_checksum(Wf.weights)}")
    return EXIT_OK


def cmd_verify(args) -> int:
    ok = True
    for res in run_all(args.cases, args.seed, args.suite or None):
        status = "PASS" if res.passed else "FAIL"
        print(f"{status} {res.name}: {res.cases} cases {res.message}".rstrip())
        if not res.passed:
            ok = False
            print(json.dumps(res.counterexample), file=sys.stderr)
    return EXIT_OK if ok else EXIT_ERROR


def cmd_bench(args) -> int:
    m_list = parse_m_list(args.m_list)
    algos = args.algos.split(",")
    bad = [a for a in algos if a not in ALGOS]
    if bad:
        raise UsageError(f"unknown algos {bad}")
    seeds = list(range(args.seed, args.seed + args.seeds))
    try:
        rows = run_bench(m_list, args.n, args.d, args.iters, seeds, algos, args.eta, args.threads)
    except DivergenceError as exc:
        print(f"diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    if args.out:
        write_bench_csv(rows, args.out)
    for r in rows:
        print(
            f"m={r.m:>7} {r.algo:<6} fires/iter={r.total_fires:12.1f} "
            f"visited/iter={r.visited_nodes:12.1f} updated/iter={r.neurons_updated:10.1f}"
        )
    slope = fit_slope(rows)
    if slope is not None:
        print(f"slope log(total_fires) vs log(m): {slope:.4f}")
    return EXIT_OK


def cmd_sparsity(args) -> int:
    report = measure_init_sparsity(args.m, args.d, args.n, args.trials, RngSpec(args.seed))
    print(report)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(report.to_csv())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="corrtree", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="write a random dataset")
    g.add_argument("--n", type=_positive, required=True)
    g.add_argument("--d", type=_positive, required=True)
    g.add_argument("--seed", type=_nonneg, default=0)
    g.add_argument("--unit-norm", action="store_true")
    g.add_argument("--labels", choices=["sign", "teacher"], default="sign")
    g.add_argument("--out", required=True, help="output path; .csv selects the CSV format")
    g.set_defaults(func=cmd_gen)

    t = sub.add_parser("train", help="train the network and log per-iteration metrics")
    t.add_argument("--data", required=True)
    t.add_argument("--m", type=_positive, required=True)
    t.add_argument("--algo", choices=ALGOS, default="dtree")
    t.add_argument("--eta", type=float, default=1.0)
    t.add_argument("--iters", type=_positive, default=100)
    t.add_argument("--seed", type=_nonneg, default=0)
    t.add_argument("--b", type=float, default=None, help="threshold; default sqrt(0.4 ln m)")
    t.add_argument("--no-normalize", action="store_true", help="train on rows as stored")
    t.add_argument("--metrics", help="metrics CSV output path")
    t.set_defaults(func=cmd_train)

    v = sub.add_parser("verify", help="run the randomized oracle-equivalence suites")
    v.add_argument("--seed", type=_nonneg, default=0)
    v.add_argument("--cases", type=_nonneg, default=1000)
    v.add_argument("--suite", action="append", choices=list(SUITES))
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("bench", help="per-iteration operation counts across widths m")
    b.add_argument("--m-list", default="2^10..2^16")
    b.add_argument("--n", type=_positive, default=8)
    b.add_argument("--d", type=_positive, default=16)
    b.add_argument("--iters", type=_positive, default=3)
    b.add_argument("--seeds", type=_positive, default=5)
    b.add_argument("--seed", type=_nonneg, default=0, help="first seed")
    b.add_argument("--eta", type=float, default=0.1)
    b.add_argument("--algos", default="dense,dtree,wtree")
    b.add_argument("--threads", type=_positive, default=None, help="default: $CORRTREE_THREADS or cpu count")
    b.add_argument("--out")
    b.set_defaults(func=cmd_bench)

    s = sub.add_parser("sparsity", help="fire counts right after initialization")
    s.add_argument("--m", type=_positive, default=4096)
    s.add_argument("--d", type=_positive, default=16)
    s.add_argument("--n", type=_positive, default=32)
    s.add_argument("--trials", type=_positive, default=20)
    s.add_argument("--seed", type=_nonneg, default=0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_sparsity)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except (FormatError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
