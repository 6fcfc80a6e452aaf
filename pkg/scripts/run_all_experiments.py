#!/usr/bin/env python3
"""Run the full experiment battery into an output directory.

Desk-scale by default; pass --paper-scale for the slow full-size sweeps
(exp2 at its=1000 and a depth-8 trusted surrogate for exp3/exp4).
"""

import argparse
import sys
from pathlib import Path

from famsec.cli import main as cli


def run(args: list[str]) -> None:
    print("famsec " + " ".join(args))
    rc = cli(args)
    if rc != 0:
        sys.exit(rc)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="experiments_out")
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--workers", type=int, default=2)
    parser.add_argument("--paper-scale", action="store_true")
    args = parser.parse_args()

    out = Path(args.out)
    seed, workers = str(args.seed), str(args.workers)

    run(["experiment", "synthetic_xo", "--out", str(out / "synthetic_xo")])
    run(["experiment", "synthetic_xs", "--out", str(out / "synthetic_xs")])
    run(["experiment", "env_difficulty", "--seed", seed, "--runs", "1000",
         "--workers", workers, "--out", str(out / "env_difficulty")])
    run(["experiment", "calibration", "--seed", seed, "--runs", "200",
         "--workers", workers, "--out", str(out / "calibration")])
    run(["experiment", "exp1", "--seed", seed, "--runs", "2000",
         "--workers", workers, "--out", str(out / "exp1")])

    trusted = "mcts:d=8,its=1000,e=1000" if args.paper_scale else "mcts:d=8,its=100,e=1000"
    surr_runs = "50" if args.paper_scale else "30"
    run(["surrogate", "train", "--tasks", "200", "--runs", surr_runs, "--seed", seed,
         "--trusted", trusted, "--workers", workers, "--out", str(out / "surrogate")])
    model = str(out / "surrogate" / "model.json")
    exp34_its = "1000" if args.paper_scale else "100"
    exp34_m = "1000" if args.paper_scale else "200"
    run(["experiment", "exp3", "--seed", seed, "--model", model, "--its", exp34_its,
         "--runs", exp34_m, "--workers", workers, "--out", str(out / "exp3")])
    run(["experiment", "exp4", "--seed", seed, "--model", model, "--its", exp34_its,
         "--runs", exp34_m, "--workers", workers, "--out", str(out / "exp4")])

    if args.paper_scale:
        run(["experiment", "exp2", "--seed", seed, "--runs", "2000",
             "--workers", workers, "--out", str(out / "exp2")])
    else:
        run(["experiment", "exp2", "--seed", seed, "--runs", "200", "--its", "100",
             "--depths", "1,7,13,19,25", "--workers", workers, "--out", str(out / "exp2")])

    print(f"\nall experiment artifacts under {out}/")


if __name__ == "__main__":
    main()
